//! Lower posterior bounds by bisection on a threshold k: the lower bound
//! exceeds k exactly when `min p(x_q ∈ A, e) − k·p(e)` over the credal set
//! is positive. The minimum of that multilinear objective is attained at a
//! vertex combination, so vertex enumeration answers each sign test exactly.

use serde::{Deserialize, Serialize};

use crate::ccm::{Assignment, TransformedNetwork};
use crate::error::{Error, Result};
use crate::query::{BoundsResult, EventMass, Method, Query, Work};
use crate::type1::{vertex_masses, DEFAULT_COMBINATION_CAP};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedMinimum {
    pub value: f64,
    pub argmin: Assignment,
}

/// Exact `min_z p(x_q ∈ A, e | z) − k·p(e | z)` over transparent
/// assignments with p(e) > 0.
pub fn signed_objective(t: &TransformedNetwork, query: &Query, k: f64) -> Result<SignedMinimum> {
    let masses = vertex_masses(t, query, DEFAULT_COMBINATION_CAP)?;
    let (value, idx) = minimize(&masses, k).ok_or(Error::ZeroProbabilityEvidence)?;
    Ok(SignedMinimum {
        value,
        argmin: t.assignment(idx),
    })
}

fn minimize(masses: &[EventMass], k: f64) -> Option<(f64, usize)> {
    masses
        .iter()
        .enumerate()
        .filter(|(_, m)| m.evidence > 0.0)
        .map(|(i, m)| (m.event - k * m.evidence, i))
        .fold(None, |best: Option<(f64, usize)>, (v, i)| match best {
            Some((b, _)) if b <= v => best,
            _ => Some((v, i)),
        })
}

/// The bracket `[lo, hi]` around the lower bound and its sign-test log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketState {
    pub lo: f64,
    pub hi: f64,
    /// Sign evaluations made so far.
    pub evaluations: usize,
    /// `(k, min value)` for every sign test, in order.
    pub history: Vec<(f64, f64)>,
}

impl BracketState {
    pub fn new() -> Self {
        Self {
            lo: 0.0,
            hi: 1.0,
            evaluations: 0,
            history: Vec::new(),
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Records the minimum at the current midpoint and halves the bracket.
    pub fn update(&mut self, k: f64, min_value: f64) {
        self.evaluations += 1;
        self.history.push((k, min_value));
        if min_value > 0.0 {
            self.lo = k;
        } else {
            self.hi = k;
        }
    }
}

impl Default for BracketState {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LavineReport {
    /// Midpoint of the final bracket.
    pub bound: f64,
    pub state: BracketState,
    /// Assignments with p(e) = 0, excluded from every sign test.
    pub zero_mass: Vec<Assignment>,
}

/// Bisection for the lower posterior bound until the bracket is at most
/// `tol` wide; uses exactly `⌈log2(1/tol)⌉` sign tests.
pub fn lavine_lower_bound(t: &TransformedNetwork, query: &Query, tol: f64) -> Result<LavineReport> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    // the enumeration oracle is deterministic, so the vertex table is
    // computed once and every sign test reads it
    let masses = vertex_masses(t, query, DEFAULT_COMBINATION_CAP)?;
    let zero_mass: Vec<Assignment> = masses
        .iter()
        .enumerate()
        .filter(|(_, m)| m.evidence <= 0.0)
        .map(|(i, _)| t.assignment(i))
        .collect();
    if zero_mass.len() == masses.len() {
        return Err(Error::ZeroProbabilityEvidence);
    }
    let mut state = BracketState::new();
    while state.width() > tol {
        let k = state.midpoint();
        let (value, _) = minimize(&masses, k).expect("a vertex with positive evidence");
        state.update(k, value);
    }
    Ok(LavineReport {
        bound: state.midpoint(),
        state,
        zero_mass,
    })
}

/// `1 − lower(complement)`.
pub fn lavine_upper_bound(t: &TransformedNetwork, query: &Query, tol: f64) -> Result<LavineReport> {
    let complement = query.complement(t.base().cardinality(query.target));
    let mut r = lavine_lower_bound(t, &complement, tol)?;
    r.bound = 1.0 - r.bound;
    Ok(r)
}

pub fn lavine_bounds(t: &TransformedNetwork, query: &Query, tol: f64) -> Result<BoundsResult> {
    let lo = lavine_lower_bound(t, query, tol)?;
    let hi = lavine_upper_bound(t, query, tol)?;
    Ok(BoundsResult {
        lower: lo.bound,
        upper: hi.bound,
        argmin: None,
        argmax: None,
        method: Method::Lavine,
        work: Work {
            evaluations: lo.state.evaluations + hi.state.evaluations,
            iterations: lo.state.evaluations + hi.state.evaluations,
            skipped_zero_mass: lo.zero_mass.len(),
        },
        zero_mass: lo.zero_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::{Evidence, NetworkBuilder};
    use crate::ccm::apply_ccm;
    use crate::credal::{eps_contaminated, CredalSpec};

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

    fn query() -> Query {
        Query::new(0, 0, Evidence::from_pairs([(1, 1)]))
    }

    #[test]
    fn signed_objective_examples() {
        let t = net_b();
        let s = signed_objective(&t, &query(), 0.9).unwrap();
        assert!((s.value + 0.018).abs() < 1e-12);
        assert_eq!(s.argmin, vec![1]);
        assert!(signed_objective(&t, &query(), 0.0).unwrap().value >= 0.0);
        assert!(signed_objective(&t, &query(), 1.0).unwrap().value <= 0.0);
    }

    #[test]
    fn bisection_hits_net_b() {
        let t = net_b();
        let r = lavine_lower_bound(&t, &query(), 1e-6).unwrap();
        assert!((r.bound - 0.54 / 0.62).abs() <= 5e-7);
        assert_eq!(r.state.evaluations, 20);
        let u = lavine_upper_bound(&t, &query(), 1e-6).unwrap();
        assert!((u.bound - 0.72 / 0.76).abs() <= 5e-7);
        assert!(lavine_lower_bound(&t, &query(), 0.0).is_err());
    }
}
