//! Exact lower and upper posterior quantities under the type-1 extension:
//! the extremes over every choice of one vertex per local credal set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bn::{eliminate, DiscreteNetwork, Evidence, VarId, DEFAULT_JOINT_CAP};
use crate::ccm::{Assignment, TransformedNetwork};
use crate::error::{Error, Result};
use crate::query::{event_mass, BoundsResult, EventMass, Method, Query, Work};

/// Default cap on the number of transparent assignments enumerated.
pub const DEFAULT_COMBINATION_CAP: u128 = 1_000_000;

const MU_TOL: f64 = 1e-9;
const MU_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Type1Options {
    pub max_combinations: u128,
    /// Largest factor `|q| × ∏ m_i` for the joint-max method.
    pub joint_cap: usize,
}

impl Default for Type1Options {
    fn default() -> Self {
        Self {
            max_combinations: DEFAULT_COMBINATION_CAP,
            joint_cap: DEFAULT_JOINT_CAP,
        }
    }
}

fn check_count(t: &TransformedNetwork, cap: u128) -> Result<usize> {
    let count = t.combination_count();
    if count > cap {
        return Err(Error::CapExceeded {
            what: "transparent assignments",
            size: count,
            cap,
        });
    }
    Ok(count as usize)
}

/// Calls `f` on the instantiated network of every transparent assignment,
/// in parallel, returning results in assignment order.
pub fn map_vertices<T, F>(t: &TransformedNetwork, cap: u128, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&DiscreteNetwork) -> Result<T> + Sync,
{
    let count = check_count(t, cap)?;
    (0..count)
        .into_par_iter()
        .map(|i| f(&t.instantiate_transparent(&t.assignment(i))?))
        .collect()
}

/// (p(event, e), p(e)) for every transparent assignment, by one precise
/// inference run per instantiated network.
pub fn vertex_masses(t: &TransformedNetwork, query: &Query, cap: u128) -> Result<Vec<EventMass>> {
    query.check(t.base())?;
    map_vertices(t, cap, |net| event_mass(net, query))
}

/// The same table from a single elimination on the transformed network
/// that keeps the target and every transparent.
pub fn joint_masses(t: &TransformedNetwork, query: &Query, cap: usize) -> Result<Vec<EventMass>> {
    query.check(t.base())?;
    let count = t.combination_count();
    let card = t.base().cardinality(query.target) as u128;
    let size = count.saturating_mul(card);
    if size > cap as u128 {
        return Err(Error::CapExceeded {
            what: "transparent joint",
            size,
            cap: cap as u128,
        });
    }
    let count = count as usize;
    let ones: Vec<Vec<f64>> = t.arities().iter().map(|&m| vec![1.0; m]).collect();
    let net = t.with_priors(&ones)?;
    let mut keep = vec![query.target];
    keep.extend(t.transparent_ids());
    // target id is below every transparent id, so the scope is [q, z'...]
    let f = eliminate(&net, &keep, &query.evidence)?;
    let values = f.values();
    Ok((0..count)
        .map(|i| {
            let mut m = EventMass {
                event: 0.0,
                evidence: 0.0,
            };
            for v in 0..card as usize {
                let p = values[v * count + i];
                m.evidence += p;
                if query.in_event(v) {
                    m.event += p;
                }
            }
            m
        })
        .collect())
}

/// Min/max of `value` over assignments; `None` entries are zero-mass.
/// Ties keep the first assignment.
pub(crate) fn extremes(t: &TransformedNetwork, values: &[Option<f64>], method: Method) -> Result<BoundsResult> {
    let mut lo: Option<(f64, usize)> = None;
    let mut hi: Option<(f64, usize)> = None;
    let mut zero_mass = Vec::new();
    for (i, v) in values.iter().enumerate() {
        let Some(v) = *v else {
            zero_mass.push(t.assignment(i));
            continue;
        };
        if lo.is_none_or(|(l, _)| v < l) {
            lo = Some((v, i));
        }
        if hi.is_none_or(|(h, _)| v > h) {
            hi = Some((v, i));
        }
    }
    let (Some((lower, imin)), Some((upper, imax))) = (lo, hi) else {
        return Err(Error::ZeroProbabilityEvidence);
    };
    Ok(BoundsResult {
        lower,
        upper,
        argmin: Some(t.assignment(imin)),
        argmax: Some(t.assignment(imax)),
        method,
        work: Work {
            evaluations: values.len(),
            iterations: 0,
            skipped_zero_mass: zero_mass.len(),
        },
        zero_mass,
    })
}

pub fn bounds_by_enumeration(t: &TransformedNetwork, query: &Query) -> Result<BoundsResult> {
    bounds_by_enumeration_with(t, query, &Type1Options::default())
}

/// Exact bounds by one precise inference per transparent assignment.
pub fn bounds_by_enumeration_with(t: &TransformedNetwork, query: &Query, opts: &Type1Options) -> Result<BoundsResult> {
    let masses = vertex_masses(t, query, opts.max_combinations)?;
    let ratios: Vec<Option<f64>> = masses.iter().map(EventMass::ratio).collect();
    extremes(t, &ratios, Method::Enumeration)
}

pub fn bounds_by_joint_max(t: &TransformedNetwork, query: &Query) -> Result<BoundsResult> {
    bounds_by_joint_max_with(t, query, &Type1Options::default())
}

/// Exact bounds from the joint p(x_q, e, z') computed in one elimination.
pub fn bounds_by_joint_max_with(t: &TransformedNetwork, query: &Query, opts: &Type1Options) -> Result<BoundsResult> {
    let masses = joint_masses(t, query, opts.joint_cap)?;
    let ratios: Vec<Option<f64>> = masses.iter().map(EventMass::ratio).collect();
    let mut r = extremes(t, &ratios, Method::JointMax)?;
    r.work.evaluations = 1;
    Ok(r)
}

/// A real function of some variables, tabulated row-major over their joint
/// values (last variable fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityFunction {
    targets: Vec<VarId>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl UtilityFunction {
    pub fn new(net: &DiscreteNetwork, targets: Vec<VarId>, values: Vec<f64>) -> Result<Self> {
        for (i, &v) in targets.iter().enumerate() {
            if v >= net.len() {
                return Err(Error::UnknownVariable(v));
            }
            if targets[..i].contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "utility lists '{}' twice",
                    net.variable(v).name
                )));
            }
        }
        let cards: Vec<usize> = targets.iter().map(|&v| net.cardinality(v)).collect();
        let size: usize = cards.iter().product();
        if values.len() != size {
            return Err(Error::TableSize {
                expected: size,
                got: values.len(),
            });
        }
        if values.iter().any(|u| !u.is_finite()) {
            return Err(Error::InvalidParameter("utility values must be finite".into()));
        }
        Ok(Self { targets, cards, values })
    }

    /// `1{x_var ∈ event}`.
    pub fn indicator(net: &DiscreteNetwork, var: VarId, event: &[usize]) -> Result<Self> {
        if var >= net.len() {
            return Err(Error::UnknownVariable(var));
        }
        let values = (0..net.cardinality(var))
            .map(|v| if event.contains(&v) { 1.0 } else { 0.0 })
            .collect();
        Self::new(net, vec![var], values)
    }

    pub fn targets(&self) -> &[VarId] {
        &self.targets
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, assignment: &[usize]) -> f64 {
        let idx = assignment.iter().zip(&self.cards).fold(0, |acc, (a, c)| acc * c + a);
        self.values[idx]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// The posterior law of `u` as (probability, value) atoms on one precise
    /// network; `None` when p(e) = 0.
    pub fn distribution(&self, net: &DiscreteNetwork, evidence: &Evidence) -> Result<Option<Vec<(f64, f64)>>> {
        let free: Vec<VarId> = {
            let mut f: Vec<VarId> = self
                .targets
                .iter()
                .copied()
                .filter(|v| !evidence.contains(*v))
                .collect();
            f.sort_unstable();
            f
        };
        let f = eliminate(net, &free, evidence)?;
        let total = f.sum();
        if total <= 0.0 {
            return Ok(None);
        }
        let mut atoms = Vec::with_capacity(f.len());
        let mut full = vec![0; self.targets.len()];
        for (i, &p) in f.values().iter().enumerate() {
            let a = f.assignment_of(i);
            for (slot, &v) in full.iter_mut().zip(&self.targets) {
                *slot = match evidence.get(v) {
                    Some(x) => x,
                    None => a[free.iter().position(|&w| w == v).expect("free target")],
                };
            }
            atoms.push((p / total, self.value(&full)));
        }
        Ok(Some(atoms))
    }
}

fn mean(atoms: &[(f64, f64)]) -> f64 {
    atoms.iter().map(|(p, u)| p * u).sum()
}

fn second_moment_about(atoms: &[(f64, f64)], mu: f64) -> f64 {
    atoms.iter().map(|(p, u)| p * (u - mu) * (u - mu)).sum()
}

fn variance(atoms: &[(f64, f64)]) -> f64 {
    second_moment_about(atoms, mean(atoms))
}

fn check_utility(t: &TransformedNetwork, u: &UtilityFunction, e: &Evidence) -> Result<()> {
    e.check(t.base())?;
    if let Some(&bad) = u.targets.iter().find(|&&v| v >= t.base().len()) {
        return Err(Error::UnknownVariable(bad));
    }
    Ok(())
}

fn utility_atoms(
    t: &TransformedNetwork,
    u: &UtilityFunction,
    e: &Evidence,
    cap: u128,
) -> Result<Vec<Option<Vec<(f64, f64)>>>> {
    check_utility(t, u, e)?;
    map_vertices(t, cap, |net| u.distribution(net, e))
}

/// Lower and upper posterior expectation of `u`.
pub fn expectation_bounds(t: &TransformedNetwork, u: &UtilityFunction, e: &Evidence) -> Result<BoundsResult> {
    expectation_bounds_with(t, u, e, &Type1Options::default())
}

pub fn expectation_bounds_with(
    t: &TransformedNetwork,
    u: &UtilityFunction,
    e: &Evidence,
    opts: &Type1Options,
) -> Result<BoundsResult> {
    let atoms = utility_atoms(t, u, e, opts.max_combinations)?;
    let means: Vec<Option<f64>> = atoms.iter().map(|a| a.as_deref().map(mean)).collect();
    extremes(t, &means, Method::Enumeration)
}

/// Variance bounds with the iterative validation alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceBounds {
    /// `argmax` is set only when the upper variance is attained at a vertex.
    pub bounds: BoundsResult,
    /// Mean at which the upper variance is attained.
    pub upper_mean: f64,
    pub iterative_lower: f64,
    pub iterative_upper: f64,
    /// Inner iterations spent by the validation.
    pub iterations: usize,
}

impl VarianceBounds {
    /// Largest disagreement between the exact and iterative values.
    pub fn cross_check_gap(&self) -> f64 {
        (self.bounds.lower - self.iterative_lower)
            .abs()
            .max((self.bounds.upper - self.iterative_upper).abs())
    }
}

/// Lower and upper posterior variance of `u` over the posterior credal set.
///
/// Variance is concave in the distribution, so the lower value is attained at
/// a vertex while the upper value may be interior. The upper value is
/// `min_μ max_j E_j (u − μ)²`, computed exactly from the upper envelope of
/// the lines `μ ↦ Var_j + m_j² − 2 m_j μ`.
pub fn variance_bounds(t: &TransformedNetwork, u: &UtilityFunction, e: &Evidence) -> Result<VarianceBounds> {
    variance_bounds_with(t, u, e, &Type1Options::default())
}

pub fn variance_bounds_with(
    t: &TransformedNetwork,
    u: &UtilityFunction,
    e: &Evidence,
    opts: &Type1Options,
) -> Result<VarianceBounds> {
    let atoms = utility_atoms(t, u, e, opts.max_combinations)?;
    let variances: Vec<Option<f64>> = atoms.iter().map(|a| a.as_deref().map(variance)).collect();
    let mut bounds = extremes(t, &variances, Method::Enumeration)?;

    let live: Vec<&Vec<(f64, f64)>> = atoms.iter().flatten().collect();
    let moments: Vec<(f64, f64)> = live.iter().map(|a| (mean(a), variance(a))).collect();
    let (upper, upper_mean) = minimax_variance(&moments);
    if upper > bounds.upper + 1e-12 {
        bounds.argmax = None;
        bounds.upper = upper;
    }

    let (iterative_upper, it_up) = ternary_upper(&live, u.min_value(), u.max_value())?;
    let (iterative_lower, it_lo) = alternating_lower(&live, &moments)?;
    Ok(VarianceBounds {
        bounds,
        upper_mean,
        iterative_lower,
        iterative_upper,
        iterations: it_up + it_lo,
    })
}

/// `min_μ max_j [v_j + (m_j − μ)²]` for (mean, variance) pairs.
fn minimax_variance(moments: &[(f64, f64)]) -> (f64, f64) {
    // max_j [v_j + m_j² − 2 m_j μ] + μ²: the upper envelope of lines with
    // slopes −2 m_j, then minimize μ² plus that envelope piece by piece.
    let mut lines: Vec<(f64, f64)> = moments.iter().map(|&(m, v)| (-2.0 * m, v + m * m)).collect();
    lines.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    // same slope: keep the higher intercept (last after sorting)
    let mut dedup: Vec<(f64, f64)> = Vec::with_capacity(lines.len());
    for l in lines {
        if let Some(last) = dedup.last_mut() {
            if last.0 == l.0 {
                *last = l;
                continue;
            }
        }
        dedup.push(l);
    }
    let cross = |a: (f64, f64), b: (f64, f64)| (a.1 - b.1) / (b.0 - a.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for l in dedup {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if cross(a, l) <= cross(a, b) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(l);
    }
    let mut best = (f64::INFINITY, 0.0);
    for (k, &(s, c)) in hull.iter().enumerate() {
        let left = if k == 0 {
            f64::NEG_INFINITY
        } else {
            cross(hull[k - 1], hull[k])
        };
        let right = if k + 1 == hull.len() {
            f64::INFINITY
        } else {
            cross(hull[k], hull[k + 1])
        };
        let mu = (-s / 2.0).clamp(left, right);
        let value = mu * mu + s * mu + c;
        if value < best.0 {
            best = (value, mu);
        }
    }
    best
}

fn upper_second_moment(live: &[&Vec<(f64, f64)>], mu: f64) -> f64 {
    live.iter()
        .map(|a| second_moment_about(a, mu))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Ternary search on the convex map `μ ↦ Ē (u − μ)²` over `[min u, max u]`.
fn ternary_upper(live: &[&Vec<(f64, f64)>], mut lo: f64, mut hi: f64) -> Result<(f64, usize)> {
    let mut steps = 0;
    while hi - lo > MU_TOL {
        if steps == MU_ITERATIONS {
            return Err(Error::IterationLimit("variance mean search did not converge".into()));
        }
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if upper_second_moment(live, m1) <= upper_second_moment(live, m2) {
            hi = m2;
        } else {
            lo = m1;
        }
        steps += 1;
    }
    Ok((upper_second_moment(live, 0.5 * (lo + hi)), steps))
}

/// Alternating minimization of `(p, μ) ↦ E_p (u − μ)²`: pick the vertex
/// minimizing the second moment about μ, then move μ to its mean. Started
/// from the vertex means (at most 256 of them, evenly spread).
fn alternating_lower(live: &[&Vec<(f64, f64)>], moments: &[(f64, f64)]) -> Result<(f64, usize)> {
    let mut starts: Vec<f64> = moments.iter().map(|m| m.0).collect();
    starts.sort_by(f64::total_cmp);
    starts.dedup_by(|a, b| (*a - *b).abs() < MU_TOL);
    if starts.len() > 256 {
        let n = starts.len();
        starts = (0..256).map(|k| starts[k * (n - 1) / 255]).collect();
    }
    let mut best = f64::INFINITY;
    let mut total = 0;
    for mut mu in starts {
        let mut steps = 0;
        loop {
            if steps == MU_ITERATIONS {
                return Err(Error::IterationLimit("variance mean iteration did not converge".into()));
            }
            let j = (0..live.len())
                .min_by(|&a, &b| second_moment_about(live[a], mu).total_cmp(&second_moment_about(live[b], mu)))
                .expect("at least one live vertex");
            let next = moments[j].0;
            steps += 1;
            if (next - mu).abs() < MU_TOL {
                best = best.min(second_moment_about(live[j], next));
                break;
            }
            mu = next;
        }
        total += steps;
    }
    Ok((best, total))
}

/// Assignment attaining a bound, for reporting.
pub fn describe_assignment(t: &TransformedNetwork, a: &Assignment) -> String {
    t.transparents()
        .iter()
        .zip(a)
        .map(|(z, v)| format!("{}={}", t.net().variable(z.id).name, v + 1))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::NetworkBuilder;
    use crate::ccm::apply_ccm;
    use crate::credal::{eps_contaminated, CredalSpec, Polytope};

    fn net_b() -> TransformedNetwork {
        let mut b = NetworkBuilder::new();
        let x = b.variable("x", 2);
        let y = b.variable("y", 2);
        b.cpt(x, &[], vec![vec![0.75, 0.25]]);
        b.cpt(y, &[x], vec![vec![0.1, 0.9], vec![0.8, 0.2]]);
        let net = b.build().unwrap();
        let spec = CredalSpec::prior(x, eps_contaminated(&[0.75, 0.25], 0.2).unwrap());
        apply_ccm(&net, &[spec]).unwrap()
    }

    fn single_node() -> TransformedNetwork {
        let mut b = NetworkBuilder::new();
        let x = b.variable("x", 2);
        b.cpt(x, &[], vec![vec![0.7, 0.3]]);
        let net = b.build().unwrap();
        let poly = Polytope::new(vec![vec![0.6, 0.4], vec![0.8, 0.2]]).unwrap();
        apply_ccm(&net, &[CredalSpec::prior(x, poly)]).unwrap()
    }

    #[test]
    fn net_b_enumeration() {
        let t = net_b();
        let q = Query::new(0, 0, Evidence::from_pairs([(1, 1)]));
        let r = bounds_by_enumeration(&t, &q).unwrap();
        assert!((r.lower - 0.54 / 0.62).abs() < 1e-9);
        assert!((r.upper - 0.72 / 0.76).abs() < 1e-9);
        assert_eq!(r.argmin, Some(vec![1]));
        assert_eq!(r.argmax, Some(vec![0]));
        let j = bounds_by_joint_max(&t, &q).unwrap();
        assert!((j.lower - r.lower).abs() < 1e-10 && (j.upper - r.upper).abs() < 1e-10);

        let prior = bounds_by_enumeration(&t, &Query::new(0, 0, Evidence::new())).unwrap();
        assert!((prior.lower - 0.6).abs() < 1e-12 && (prior.upper - 0.8).abs() < 1e-12);
    }

    #[test]
    fn expectation_and_variance_hand_cases() {
        let t = single_node();
        let u = UtilityFunction::new(t.base(), vec![0], vec![10.0, 0.0]).unwrap();
        let r = expectation_bounds(&t, &u, &Evidence::new()).unwrap();
        assert!((r.lower - 6.0).abs() < 1e-12 && (r.upper - 8.0).abs() < 1e-12);

        let u = UtilityFunction::new(t.base(), vec![0], vec![0.0, 1.0]).unwrap();
        let v = variance_bounds(&t, &u, &Evidence::new()).unwrap();
        assert!((v.bounds.lower - 0.16).abs() < 1e-9, "{v:?}");
        assert!((v.bounds.upper - 0.24).abs() < 1e-9, "{v:?}");
        assert!(v.cross_check_gap() < 1e-6, "{v:?}");
        assert_eq!(v.bounds.argmax, Some(vec![0]));

        let c = UtilityFunction::new(t.base(), vec![0], vec![3.0, 3.0]).unwrap();
        let v = variance_bounds(&t, &c, &Evidence::new()).unwrap();
        assert!(v.bounds.lower.abs() < 1e-12 && v.bounds.upper.abs() < 1e-12);
    }

    #[test]
    fn interior_upper_variance() {
        // p(0) ∈ [0.3, 0.8]: p(1−p) peaks at p=0.5 inside the set
        let mut b = NetworkBuilder::new();
        let x = b.variable("x", 2);
        b.cpt(x, &[], vec![vec![0.5, 0.5]]);
        let net = b.build().unwrap();
        let poly = Polytope::new(vec![vec![0.3, 0.7], vec![0.8, 0.2]]).unwrap();
        let t = apply_ccm(&net, &[CredalSpec::prior(x, poly)]).unwrap();
        let u = UtilityFunction::new(&net, vec![0], vec![0.0, 1.0]).unwrap();
        let v = variance_bounds(&t, &u, &Evidence::new()).unwrap();
        assert!((v.bounds.upper - 0.25).abs() < 1e-12);
        assert!((v.bounds.lower - 0.16).abs() < 1e-12);
        assert_eq!(v.bounds.argmax, None);
        assert!((v.upper_mean - 0.5).abs() < 1e-12);
        assert!(v.cross_check_gap() < 1e-6);
    }

    #[test]
    fn indicator_utility_matches_probability() {
        let t = net_b();
        let e = Evidence::from_pairs([(1, 1)]);
        let u = UtilityFunction::indicator(t.base(), 0, &[0]).unwrap();
        let a = expectation_bounds(&t, &u, &e).unwrap();
        let b = bounds_by_enumeration(&t, &Query::new(0, 0, e)).unwrap();
        assert!((a.lower - b.lower).abs() < 1e-12 && (a.upper - b.upper).abs() < 1e-12);
    }

    #[test]
    fn all_zero_mass_is_an_error() {
        let mut b = NetworkBuilder::new();
        let x = b.variable("x", 2);
        let y = b.variable("y", 2);
        b.cpt(x, &[], vec![vec![0.5, 0.5]]);
        b.cpt(y, &[x], vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        let net = b.build().unwrap();
        let t = apply_ccm(&net, &[CredalSpec::prior(x, Polytope::simplex(2))]).unwrap();
        let q = Query::new(0, 0, Evidence::from_pairs([(1, 1)]));
        assert!(matches!(
            bounds_by_enumeration(&t, &q),
            Err(Error::ZeroProbabilityEvidence)
        ));
    }

    #[test]
    fn zero_mass_vertices_are_reported() {
        let mut b = NetworkBuilder::new();
        let x = b.variable("x", 2);
        let y = b.variable("y", 2);
        b.cpt(x, &[], vec![vec![0.5, 0.5]]);
        b.cpt(y, &[x], vec![vec![1.0, 0.0], vec![0.5, 0.5]]);
        let net = b.build().unwrap();
        let t = apply_ccm(&net, &[CredalSpec::prior(x, Polytope::simplex(2))]).unwrap();
        let q = Query::new(0, 1, Evidence::from_pairs([(1, 1)]));
        let r = bounds_by_enumeration(&t, &q).unwrap();
        assert_eq!(r.work.skipped_zero_mass, 1);
        assert_eq!(r.zero_mass, vec![vec![0]]);
        assert_eq!((r.lower, r.upper), (1.0, 1.0));
    }

    #[test]
    fn cap_is_enforced() {
        let t = net_b();
        let q = Query::new(0, 0, Evidence::new());
        let opts = Type1Options {
            max_combinations: 1,
            ..Default::default()
        };
        assert!(matches!(
            bounds_by_enumeration_with(&t, &q, &opts),
            Err(Error::CapExceeded { .. })
        ));
    }
}
