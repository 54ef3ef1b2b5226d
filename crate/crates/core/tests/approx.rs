mod common;

use common::corpus;
use credal::approx::{
    gradient_bounds, gradient_theta, log_posterior_likelihood, qem_lower, qem_run, AscentOptions, QemOptions,
    ThetaVector,
};
use credal::ccm::apply_ccm;
use credal::query::event_mass;
use credal::random::{random_instance, RandomConfig};
use credal::type1::bounds_by_enumeration;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Central difference of L along one raw prior weight of one transparent.
fn finite_difference(
    t: &credal::ccm::TransformedNetwork,
    theta: &ThetaVector,
    q: &credal::query::Query,
    i: usize,
    j: usize,
    h: f64,
) -> f64 {
    let at = |d: f64| {
        let mut th = theta.components().to_vec();
        th[i][j] += d;
        let net = t.with_priors(&th).unwrap();
        event_mass(&net, q).unwrap().ratio().unwrap().ln()
    };
    (at(h) - at(-h)) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>()) {
        let inst = random_instance(&RandomConfig::default(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let t = apply_ccm(&inst.net, &inst.specs).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(7));
        let theta = ThetaVector::random(&t.arities(), &mut rng);
        prop_assume!(theta.components().iter().flatten().all(|&x| x > 1e-3));
        let l = log_posterior_likelihood(&t, &theta, &inst.query).unwrap();
        let direct = event_mass(&t.with_priors(theta.components()).unwrap(), &inst.query).unwrap();
        prop_assert!((l - direct.ratio().unwrap().ln()).abs() < 1e-10);
        let g = gradient_theta(&t, &theta, &inst.query).unwrap();
        for (i, row) in g.iter().enumerate() {
            for (j, &gij) in row.iter().enumerate() {
                let fd = finite_difference(&t, &theta, &inst.query, i, j, 1e-5);
                let scale = gij.abs().max(fd.abs()).max(1e-3);
                prop_assert!((gij - fd).abs() / scale <= 1e-4, "({i},{j}): {gij} vs {fd}");
            }
        }
    }
}

#[test]
fn qem_is_monotone_and_inside_the_exact_interval() {
    let opts = QemOptions {
        restarts: 4,
        ..QemOptions::default()
    };
    for inst in corpus(&RandomConfig::default(), 40, 3000) {
        let t = apply_ccm(&inst.net, &inst.specs).unwrap();
        let exact = bounds_by_enumeration(&t, &inst.query).unwrap();
        let up = qem_run(&t, &inst.query, &opts).unwrap();
        assert!(up.trajectory.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(up.bound <= exact.upper + 1e-9 && up.bound >= exact.lower - 1e-9);
        let down = qem_lower(&t, &inst.query, &opts).unwrap();
        assert!(down.bound >= exact.lower - 1e-9 && down.bound <= exact.upper + 1e-9);
    }
}

#[test]
fn gradient_bounds_are_inner() {
    let opts = AscentOptions {
        restarts: 2,
        ..AscentOptions::default()
    };
    for inst in corpus(&RandomConfig::small(), 30, 4000) {
        let t = apply_ccm(&inst.net, &inst.specs).unwrap();
        let exact = bounds_by_enumeration(&t, &inst.query).unwrap();
        let r = gradient_bounds(&t, &inst.query, &opts).unwrap();
        assert!(r.lower >= exact.lower - 1e-9 && r.upper <= exact.upper + 1e-9);
        assert!(r.lower <= r.upper + 1e-9);
    }
}
