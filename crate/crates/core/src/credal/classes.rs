//! Constructors for the standard robust-statistics classes of credal sets.

use super::polytope::{check_distribution, dedup_points};
use super::{ConstraintRow, LinearConstraintSet, Polytope, DEDUP_TOL};
use crate::error::{Error, Result};

/// Largest outcome count for event-wise classes (total variation).
pub const MAX_EVENT_DIM: usize = 16;
/// Largest outcome count for the density ratio class (ordered event pairs).
pub const MAX_RATIO_DIM: usize = 12;
const MAX_BELIEF_VERTICES: u128 = 1_000_000;

/// Mixtures `(1 - eps) p + eps q` for arbitrary `q`: the vertices put the
/// contaminating mass on one outcome at a time.
pub fn eps_contaminated(p: &[f64], eps: f64) -> Result<Polytope> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    check_distribution(p, DEDUP_TOL)?;
    let vertices = (0..p.len())
        .map(|k| {
            p.iter()
                .enumerate()
                .map(|(j, pj)| (1.0 - eps) * pj + if j == k { eps } else { 0.0 })
                .collect()
        })
        .collect();
    Polytope::new(vertices)
}

/// Vertices of the credal set dominating a belief function: every massed
/// focal set sends its whole mass to one of its elements, in all
/// combinations. Disjoint focal sets give the sub-sigma class.
pub fn belief_function(dim: usize, masses: &[(Vec<usize>, f64)]) -> Result<Polytope> {
    if dim == 0 {
        return Err(Error::InvalidParameter("belief function over zero outcomes".into()));
    }
    let mut total = 0.0;
    for (set, m) in masses {
        if set.is_empty() {
            return Err(Error::InvalidParameter("focal sets must be nonempty".into()));
        }
        if let Some(bad) = set.iter().find(|&&x| x >= dim) {
            return Err(Error::InvalidParameter(format!("focal element {bad} out of range")));
        }
        if !m.is_finite() || *m < 0.0 {
            return Err(Error::InvalidParameter(format!("mass {m} is negative")));
        }
        total += m;
    }
    if (total - 1.0).abs() > DEDUP_TOL {
        return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
    }
    let focal: Vec<(Vec<usize>, f64)> = masses
        .iter()
        .filter(|(_, m)| *m > 0.0)
        .map(|(s, m)| {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            (s, *m)
        })
        .collect();
    let count = focal
        .iter()
        .fold(1u128, |acc, (s, _)| acc.saturating_mul(s.len() as u128));
    if count > MAX_BELIEF_VERTICES {
        return Err(Error::CapExceeded {
            what: "belief function concentrations",
            size: count,
            cap: MAX_BELIEF_VERTICES,
        });
    }
    let mut vertices = Vec::with_capacity(count as usize);
    let mut choice = vec![0usize; focal.len()];
    loop {
        let mut v = vec![0.0; dim];
        for ((set, m), &c) in focal.iter().zip(&choice) {
            v[set[c]] += m;
        }
        vertices.push(v);
        // mixed-radix increment
        let mut k = focal.len();
        loop {
            if k == 0 {
                return Polytope::new(dedup_points(vertices, DEDUP_TOL));
            }
            k -= 1;
            choice[k] += 1;
            if choice[k] < focal[k].0.len() {
                break;
            }
            choice[k] = 0;
        }
    }
}

/// `l(x) <= p(x) <= u(x)` for every outcome.
pub fn density_bounded(lower: &[f64], upper: &[f64]) -> Result<LinearConstraintSet> {
    if lower.len() != upper.len() {
        return Err(Error::DimensionMismatch {
            expected: lower.len(),
            got: upper.len(),
        });
    }
    for (l, u) in lower.iter().zip(upper) {
        if !(l.is_finite() && u.is_finite()) || *l < 0.0 || l > u {
            return Err(Error::InvalidParameter(format!("need 0 <= l <= u, got l={l} u={u}")));
        }
    }
    let (sl, su): (f64, f64) = (lower.iter().sum(), upper.iter().sum());
    if sl > 1.0 + DEDUP_TOL || su < 1.0 - DEDUP_TOL {
        return Err(Error::Infeasible(format!(
            "density bounds need sum(l) <= 1 <= sum(u), got {sl} and {su}"
        )));
    }
    let dim = lower.len();
    let mut rows = Vec::with_capacity(2 * dim);
    for x in 0..dim {
        let mut c = vec![0.0; dim];
        c[x] = -1.0;
        rows.push(ConstraintRow::new(c, -lower[x]));
        let mut c = vec![0.0; dim];
        c[x] = 1.0;
        rows.push(ConstraintRow::new(c, upper[x]));
    }
    LinearConstraintSet::unchecked(dim, rows)
}

/// `|p(A) - r(A)| <= eps` for every nonempty proper event `A`.
pub fn total_variation(r: &[f64], eps: f64) -> Result<LinearConstraintSet> {
    check_distribution(r, DEDUP_TOL)?;
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let dim = r.len();
    if dim > MAX_EVENT_DIM {
        return Err(Error::CapExceeded {
            what: "total variation outcomes",
            size: dim as u128,
            cap: MAX_EVENT_DIM as u128,
        });
    }
    let mut rows = Vec::new();
    for mask in 1u32..(1u32 << dim) - 1 {
        let indicator: Vec<f64> = (0..dim).map(|x| f64::from((mask >> x) & 1)).collect();
        let ra: f64 = indicator.iter().zip(r).map(|(a, b)| a * b).sum();
        rows.push(ConstraintRow::new(indicator.clone(), ra + eps));
        rows.push(ConstraintRow::new(indicator.iter().map(|a| -a).collect(), -(ra - eps)));
    }
    LinearConstraintSet::unchecked(dim, rows)
}

/// Odds bounds `l'(A)/l''(B) <= p(A)/p(B)` for every ordered pair of
/// disjoint nonempty events, linearized as `l'(A) p(B) - l''(B) p(A) <= 0`.
/// The upper odds for `(A, B)` is the lower odds for `(B, A)`.
pub fn density_ratio(lower: &[f64], upper: &[f64]) -> Result<LinearConstraintSet> {
    if lower.len() != upper.len() {
        return Err(Error::DimensionMismatch {
            expected: lower.len(),
            got: upper.len(),
        });
    }
    for (l, u) in lower.iter().zip(upper) {
        if !(l.is_finite() && u.is_finite()) || *l <= 0.0 || l > u {
            return Err(Error::InvalidParameter(format!(
                "density ratio needs 0 < l' <= l'', got l'={l} l''={u}"
            )));
        }
    }
    let dim = lower.len();
    if dim > MAX_RATIO_DIM {
        return Err(Error::CapExceeded {
            what: "density ratio outcomes",
            size: dim as u128,
            cap: MAX_RATIO_DIM as u128,
        });
    }
    let measure = |m: &[f64], mask: u32| -> f64 { (0..dim).filter(|x| (mask >> x) & 1 == 1).map(|x| m[x]).sum() };
    let full = (1u32 << dim) - 1;
    let mut rows = Vec::new();
    for a in 1..=full {
        // B ranges over nonempty subsets of the complement of A
        let rest = full & !a;
        let mut b = rest;
        while b > 0 {
            let la = measure(lower, a);
            let ub = measure(upper, b);
            let coeffs = (0..dim)
                .map(|x| {
                    if (b >> x) & 1 == 1 {
                        la
                    } else if (a >> x) & 1 == 1 {
                        -ub
                    } else {
                        0.0
                    }
                })
                .collect();
            rows.push(ConstraintRow::new(coeffs, 0.0));
            b = (b - 1) & rest;
        }
    }
    LinearConstraintSet::unchecked(dim, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn has_vertex(p: &Polytope, v: &[f64]) -> bool {
        p.vertices()
            .iter()
            .any(|w| w.iter().zip(v).all(|(a, b)| (a - b).abs() < 1e-9))
    }

    #[test]
    fn contamination_vertices() {
        let p = eps_contaminated(&[0.75, 0.25], 0.2).unwrap();
        assert_eq!(p.vertex_count(), 2);
        assert!(has_vertex(&p, &[0.8, 0.2]) && has_vertex(&p, &[0.6, 0.4]));
        let q = eps_contaminated(&[1.0, 0.0], 0.5).unwrap();
        assert!(has_vertex(&q, &[1.0, 0.0]) && has_vertex(&q, &[0.5, 0.5]));
        assert!(eps_contaminated(&[0.5, 0.5], 1.0).is_err());
        assert!(eps_contaminated(&[0.5, 0.6], 0.1).is_err());
    }

    #[test]
    fn contamination_mixture_recovers_base() {
        let base = [0.5, 0.3, 0.2];
        let p = eps_contaminated(&base, 0.3).unwrap();
        for j in 0..3 {
            let mix: f64 = p.vertices().iter().zip(base).map(|(v, w)| w * v[j]).sum();
            assert!((mix - base[j]).abs() < 1e-12);
        }
        assert!(p.contains_distribution(&base).unwrap());
    }

    #[test]
    fn belief_vertices() {
        let p = belief_function(3, &[(vec![0], 0.5), (vec![0, 1, 2], 0.5)]).unwrap();
        assert_eq!(p.vertex_count(), 3);
        for v in [[1.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.5, 0.0, 0.5]] {
            assert!(has_vertex(&p, &v));
        }
        let point = belief_function(2, &[(vec![0], 1.0)]).unwrap();
        assert_eq!(point.vertices(), &[vec![1.0, 0.0]]);
        let sub_sigma = belief_function(3, &[(vec![0], 0.3), (vec![1, 2], 0.7)]).unwrap();
        assert_eq!(sub_sigma.vertex_count(), 2);
        assert!(has_vertex(&sub_sigma, &[0.3, 0.7, 0.0]) && has_vertex(&sub_sigma, &[0.3, 0.0, 0.7]));
        assert!(belief_function(2, &[(vec![0], 0.4)]).is_err());
    }

    #[test]
    fn density_bounds_segment() {
        let set = density_bounded(&[0.2, 0.3], &[0.7, 0.8]).unwrap();
        assert_eq!(set.rows().len(), 4);
        let p = set.to_polytope().unwrap();
        assert_eq!(p.vertex_count(), 2);
        assert!(has_vertex(&p, &[0.2, 0.8]) && has_vertex(&p, &[0.7, 0.3]));
        let point = density_bounded(&[0.2, 0.3, 0.5], &[0.2, 0.3, 0.5])
            .unwrap()
            .to_polytope()
            .unwrap();
        assert_eq!(point.vertex_count(), 1);
        let vacuous = density_bounded(&[0.0; 3], &[1.0; 3]).unwrap().to_polytope().unwrap();
        assert!(vacuous.same_vertices(&Polytope::simplex(3)));
        assert!(density_bounded(&[0.6, 0.6], &[0.9, 0.9]).is_err());
    }

    #[test]
    fn total_variation_binary() {
        let set = total_variation(&[0.5, 0.5], 0.1).unwrap();
        assert_eq!(set.rows().len(), 4);
        let p = set.to_polytope().unwrap();
        assert!(has_vertex(&p, &[0.4, 0.6]) && has_vertex(&p, &[0.6, 0.4]));
        assert_eq!(p.vertex_count(), 2);
        let vacuous = total_variation(&[0.2, 0.3, 0.5], 1.0).unwrap().to_polytope().unwrap();
        assert!(vacuous.same_vertices(&Polytope::simplex(3)));
        assert!(total_variation(&[0.2, 0.3, 0.5], 0.05)
            .unwrap()
            .contains_distribution(&[0.2, 0.3, 0.5])
            .unwrap());
        assert_eq!(total_variation(&[0.25; 4], 0.1).unwrap().rows().len(), 2 * 14);
    }

    #[test]
    fn density_ratio_binary() {
        let set = density_ratio(&[1.0, 1.0], &[2.0, 2.0]).unwrap();
        assert_eq!(set.rows().len(), 2);
        let p = set.to_polytope().unwrap();
        assert!(has_vertex(&p, &[1.0 / 3.0, 2.0 / 3.0]) && has_vertex(&p, &[2.0 / 3.0, 1.0 / 3.0]));
        let pinned = density_ratio(&[1.0, 3.0], &[1.0, 3.0]).unwrap().to_polytope().unwrap();
        assert_eq!(pinned.vertex_count(), 1);
        assert!(has_vertex(&pinned, &[0.25, 0.75]));
        let three = density_ratio(&[1.0, 2.0, 1.0], &[2.0, 3.0, 2.0]).unwrap();
        assert_eq!(three.rows().len(), 12);
        let total: f64 = 2.0 + 3.0 + 2.0;
        assert!(three
            .contains_distribution(&[2.0 / total, 3.0 / total, 2.0 / total])
            .unwrap());
        assert!(density_ratio(&[0.0, 1.0], &[1.0, 1.0]).is_err());
    }
}
