//! Bounds under the natural extension: the largest set of joint
//! distributions whose local marginals and conditionals satisfy every
//! local constraint, with no independence imposed beyond that. The
//! posterior is a ratio of linear functions of the joint, reduced to an LP
//! by the Charnes–Cooper substitution `y = t·p`, `t = 1 / d·p`.

use serde::{Deserialize, Serialize};

use crate::bn::{DiscreteNetwork, VarId};
use crate::ccm::decode;
use crate::credal::{ConditionalSets, ConstraintRow, CredalSpec, HRepresentation};
use crate::error::{Error, Result};
use crate::lp::{simplex_solve, LinearProgram, LpStatus, Sense};
use crate::query::{BoundsResult, Method, Query, Work};

/// Default cap on the number of joint terms.
pub const DEFAULT_NE_CAP: usize = 1 << 14;

/// `min c·p / d·p` subject to `G p <= h`, `E p = f`, `p >= 0`, where `p`
/// is the full joint enumerated row-major over all variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalProgram {
    pub n: usize,
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
    pub inequalities: Vec<ConstraintRow>,
    /// The first equality is the normalization `Σ p = 1`.
    pub equalities: Vec<ConstraintRow>,
}

impl FractionalProgram {
    pub fn new(
        numerator: Vec<f64>,
        denominator: Vec<f64>,
        inequalities: Vec<ConstraintRow>,
        equalities: Vec<ConstraintRow>,
    ) -> Result<Self> {
        let n = numerator.len();
        if denominator.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: denominator.len(),
            });
        }
        if let Some(r) = inequalities.iter().chain(&equalities).find(|r| r.coeffs.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: r.coeffs.len(),
            });
        }
        Ok(Self {
            n,
            numerator,
            denominator,
            inequalities,
            equalities,
        })
    }

    pub fn ratio(&self, p: &[f64]) -> Option<f64> {
        let d: f64 = self.denominator.iter().zip(p).map(|(a, b)| a * b).sum();
        let c: f64 = self.numerator.iter().zip(p).map(|(a, b)| a * b).sum();
        (d > 0.0).then(|| c / d)
    }

    /// The feasibility LP over `p` alone with a zero objective.
    pub fn feasibility_program(&self) -> LinearProgram {
        let mut lp = LinearProgram::new(vec![0.0; self.n]);
        for r in &self.inequalities {
            lp.add_row(r.coeffs.clone(), Sense::Le, r.bound);
        }
        for r in &self.equalities {
            lp.add_row(r.coeffs.clone(), Sense::Eq, r.bound);
        }
        lp
    }
}

/// Joint assignments of all variables, row-major.
struct JointIndex {
    cards: Vec<usize>,
    assignments: Vec<Vec<usize>>,
}

impl JointIndex {
    fn new(net: &DiscreteNetwork, cap: usize) -> Result<Self> {
        let cards: Vec<usize> = net.variables().iter().map(|v| v.cardinality()).collect();
        let size = cards
            .iter()
            .try_fold(1u128, |acc, &c| acc.checked_mul(c as u128))
            .unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(Error::CapExceeded {
                what: "natural-extension joint",
                size,
                cap: cap as u128,
            });
        }
        let assignments = (0..size as usize).map(|i| decode(i, &cards)).collect();
        Ok(Self { cards, assignments })
    }

    fn len(&self) -> usize {
        self.assignments.len()
    }

    fn parent_config(&self, net: &DiscreteNetwork, var: VarId, a: &[usize]) -> usize {
        net.parents(var).iter().fold(0, |acc, &p| acc * self.cards[p] + a[p])
    }
}

/// Lifts `coeffs · p(x_var | π) <= bound` to the joint, homogenized by
/// `p(π)`; for a root the single configuration makes `p(π) = 1`.
fn lift(
    net: &DiscreteNetwork,
    joint: &JointIndex,
    var: VarId,
    config: usize,
    row: &ConstraintRow,
    root: bool,
) -> ConstraintRow {
    let coeffs = joint
        .assignments
        .iter()
        .map(|a| {
            if root {
                row.coeffs[a[var]]
            } else if joint.parent_config(net, var, a) == config {
                row.coeffs[a[var]] - row.bound
            } else {
                0.0
            }
        })
        .collect();
    ConstraintRow::new(coeffs, if root { row.bound } else { 0.0 })
}

/// The fractional program for `p(x_q ∈ A | e)` under the natural extension.
pub fn build_ne_program(net: &DiscreteNetwork, specs: &[CredalSpec], query: &Query) -> Result<FractionalProgram> {
    build_ne_program_with_cap(net, specs, query, DEFAULT_NE_CAP)
}

pub fn build_ne_program_with_cap(
    net: &DiscreteNetwork,
    specs: &[CredalSpec],
    query: &Query,
    cap: usize,
) -> Result<FractionalProgram> {
    query.check(net)?;
    for (i, spec) in specs.iter().enumerate() {
        spec.check_against(net)?;
        if specs[..i].iter().any(|s| s.node == spec.node) {
            return Err(Error::InvalidParameter(format!(
                "two credal specs target node '{}'",
                net.variable(spec.node).name
            )));
        }
        if matches!(spec.sets, ConditionalSets::Joint(_)) && !net.parents(spec.node).is_empty() {
            return Err(Error::Unsupported(format!(
                "joint-column credal set on '{}' is not a set of linear constraints on its conditionals",
                net.variable(spec.node).name
            )));
        }
    }
    let joint = JointIndex::new(net, cap)?;
    let n = joint.len();

    let mut inequalities = Vec::new();
    let mut equalities = vec![ConstraintRow::new(vec![1.0; n], 1.0)];
    for var in 0..net.len() {
        let root = net.parents(var).is_empty();
        let configs = net.parent_configurations(var);
        match specs.iter().find(|s| s.node == var) {
            Some(spec) => {
                for config in 0..configs {
                    let HRepresentation {
                        inequalities: ineq,
                        equalities: eq,
                    } = spec.column_polytope(config)?.h_representation();
                    inequalities.extend(
                        ineq.iter()
                            .map(|r| lift(net, &joint, var, config, r, root))
                            .filter(nontrivial),
                    );
                    equalities.extend(
                        eq.iter()
                            .filter(|r| !restates_normalization(r))
                            .map(|r| lift(net, &joint, var, config, r, root))
                            .filter(nontrivial),
                    );
                }
            }
            None => {
                let card = net.cardinality(var);
                for config in 0..configs {
                    let column = net.conditional(var, config);
                    // the last value follows from the others and would
                    // only leave a numerically dependent row
                    for v in 0..card - 1 {
                        // p(x=v, π) − p(v|π)·p(π) = 0
                        let mut unit = vec![0.0; card];
                        unit[v] = 1.0;
                        let row = ConstraintRow::new(unit, column[v]);
                        equalities.push(lift(net, &joint, var, config, &row, false));
                    }
                }
            }
        }
    }

    let consistent = |a: &[usize]| query.evidence.iter().all(|(v, x)| a[v] == x);
    let denominator: Vec<f64> = joint
        .assignments
        .iter()
        .map(|a| if consistent(a) { 1.0 } else { 0.0 })
        .collect();
    let numerator: Vec<f64> = joint
        .assignments
        .iter()
        .map(|a| {
            if consistent(a) && query.in_event(a[query.target]) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    FractionalProgram::new(numerator, denominator, inequalities, equalities)
}

/// False for rows that lift to `0 = 0` or `0 <= 0`, such as the
/// normalization of a non-root column.
fn nontrivial(r: &ConstraintRow) -> bool {
    r.coeffs.iter().any(|c| c.abs() > 1e-14) || r.bound.abs() > 1e-14
}

/// True for a multiple of `Σ p_v = 1`, already implied by the joint's
/// normalization.
fn restates_normalization(r: &ConstraintRow) -> bool {
    r.bound != 0.0 && r.coeffs.iter().all(|c| (c - r.bound).abs() <= 1e-12 * r.bound.abs())
}

/// Variables `(y, t)`: minimize `c·y` subject to `d·y = 1`,
/// `G y − h t <= 0`, `E y − f t = 0`, `y, t >= 0`.
pub fn charnes_cooper(fp: &FractionalProgram) -> LinearProgram {
    let n = fp.n;
    let mut objective = fp.numerator.clone();
    objective.push(0.0);
    let mut lp = LinearProgram::new(objective);
    let mut d = fp.denominator.clone();
    d.push(0.0);
    lp.add_row(d, Sense::Eq, 1.0);
    let homogeneous = |r: &ConstraintRow| {
        let mut c = Vec::with_capacity(n + 1);
        c.extend_from_slice(&r.coeffs);
        c.push(-r.bound);
        c
    };
    for r in &fp.inequalities {
        lp.add_row(homogeneous(r), Sense::Le, 0.0);
    }
    for r in &fp.equalities {
        lp.add_row(homogeneous(r), Sense::Eq, 0.0);
    }
    lp
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalSolution {
    pub value: f64,
    /// Minimizing joint `p = y / t`.
    pub point: Vec<f64>,
    pub pivots: usize,
}

/// Minimizes (or, with `maximize`, maximizes) the ratio.
pub fn solve_fractional(fp: &FractionalProgram, maximize: bool) -> Result<FractionalSolution> {
    let mut lp = charnes_cooper(fp);
    if maximize {
        lp.objective.iter_mut().for_each(|c| *c = -*c);
    }
    let sol = simplex_solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => {
            let t = sol.x[fp.n];
            let point = sol.x[..fp.n].iter().map(|y| y / t).collect();
            Ok(FractionalSolution {
                value: if maximize { -sol.value } else { sol.value },
                point,
                pivots: sol.pivots,
            })
        }
        LpStatus::Unbounded => Err(Error::Infeasible("fractional program is unbounded".into())),
        LpStatus::Infeasible => {
            let feasible = simplex_solve(&fp.feasibility_program())?;
            if feasible.status == LpStatus::Infeasible {
                Err(Error::Infeasible(
                    "the local constraints admit no joint distribution".into(),
                ))
            } else {
                Err(Error::ZeroProbabilityEvidence)
            }
        }
    }
}

pub fn ne_bounds(net: &DiscreteNetwork, specs: &[CredalSpec], query: &Query) -> Result<BoundsResult> {
    ne_bounds_with_cap(net, specs, query, DEFAULT_NE_CAP)
}

pub fn ne_bounds_with_cap(
    net: &DiscreteNetwork,
    specs: &[CredalSpec],
    query: &Query,
    cap: usize,
) -> Result<BoundsResult> {
    let fp = build_ne_program_with_cap(net, specs, query, cap)?;
    let lo = solve_fractional(&fp, false)?;
    let hi = solve_fractional(&fp, true)?;
    Ok(BoundsResult {
        lower: lo.value.clamp(0.0, 1.0),
        upper: hi.value.clamp(0.0, 1.0),
        argmin: None,
        argmax: None,
        method: Method::NaturalExtension,
        work: Work {
            evaluations: 2,
            iterations: lo.pivots + hi.pivots,
            skipped_zero_mass: 0,
        },
        zero_mass: Vec::new(),
    })
}

/// The minimizing LP in the plain-text exchange format.
pub fn ne_lp_dump(net: &DiscreteNetwork, specs: &[CredalSpec], query: &Query) -> Result<String> {
    Ok(charnes_cooper(&build_ne_program(net, specs, query)?).to_text())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::{posterior_marginal, Evidence, NetworkBuilder};
    use crate::credal::{eps_contaminated, Polytope};

    fn net_b() -> (DiscreteNetwork, Vec<CredalSpec>) {
        let mut b = NetworkBuilder::new();
        let x = b.variable("x", 2);
        let y = b.variable("y", 2);
        b.cpt(x, &[], vec![vec![0.75, 0.25]]);
        b.cpt(y, &[x], vec![vec![0.1, 0.9], vec![0.8, 0.2]]);
        let spec = CredalSpec::prior(x, eps_contaminated(&[0.75, 0.25], 0.2).unwrap());
        (b.build().unwrap(), vec![spec])
    }

    #[test]
    fn net_b_program_shape() {
        let (net, specs) = net_b();
        let q = Query::new(0, 0, Evidence::from_pairs([(1, 1)]));
        let fp = build_ne_program(&net, &specs, &q).unwrap();
        assert_eq!(fp.n, 4);
        assert_eq!(fp.inequalities.len(), 2);
        // normalization plus one row per configuration of y
        assert_eq!(fp.equalities.len(), 1 + 2);
        assert_eq!(fp.numerator, vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(fp.denominator, vec![0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn net_b_bounds() {
        let (net, specs) = net_b();
        let q = Query::new(0, 0, Evidence::from_pairs([(1, 1)]));
        let r = ne_bounds(&net, &specs, &q).unwrap();
        assert!((r.lower - 0.54 / 0.62).abs() < 1e-7, "{r:?}");
        assert!((r.upper - 0.72 / 0.76).abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn precise_network_is_a_point() {
        let (net, _) = net_b();
        let q = Query::new(0, 0, Evidence::from_pairs([(1, 1)]));
        let r = ne_bounds(&net, &[], &q).unwrap();
        let exact = posterior_marginal(&net, 0, &q.evidence).unwrap()[0];
        assert!((r.lower - exact).abs() < 1e-9 && (r.upper - exact).abs() < 1e-9);
    }

    #[test]
    fn vacuous_node_spans_simplex() {
        let mut b = NetworkBuilder::new();
        let x = b.variable("x", 3);
        b.cpt(x, &[], vec![vec![0.2, 0.3, 0.5]]);
        let net = b.build().unwrap();
        let specs = [CredalSpec::prior(x, Polytope::simplex(3))];
        let r = ne_bounds(&net, &specs, &Query::new(x, 1, Evidence::new())).unwrap();
        assert!(r.lower.abs() < 1e-12 && (r.upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn charnes_cooper_corner() {
        // min x1 / (x1 + 2 x2) over the 2-simplex
        let fp = FractionalProgram::new(
            vec![1.0, 0.0],
            vec![1.0, 2.0],
            vec![],
            vec![ConstraintRow::new(vec![1.0, 1.0], 1.0)],
        )
        .unwrap();
        let s = solve_fractional(&fp, false).unwrap();
        assert!(s.value.abs() < 1e-12);
        assert!((s.point[1] - 1.0).abs() < 1e-12);
        let s = solve_fractional(&fp, true).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_denominator_pins_t() {
        let fp = FractionalProgram::new(
            vec![3.0, 1.0],
            vec![1.0, 1.0],
            vec![],
            vec![ConstraintRow::new(vec![1.0, 1.0], 1.0)],
        )
        .unwrap();
        let lp = charnes_cooper(&fp);
        let sol = simplex_solve(&lp).unwrap();
        assert!((sol.x[2] - 1.0).abs() < 1e-12);
        assert!((sol.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_evidence_is_detected() {
        let mut b = NetworkBuilder::new();
        let x = b.variable("x", 2);
        let y = b.variable("y", 2);
        b.cpt(x, &[], vec![vec![0.5, 0.5]]);
        b.cpt(y, &[x], vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        let net = b.build().unwrap();
        let q = Query::new(0, 0, Evidence::from_pairs([(1, 1)]));
        assert!(matches!(ne_bounds(&net, &[], &q), Err(Error::ZeroProbabilityEvidence)));
    }

    #[test]
    fn joint_mode_on_child_is_unsupported() {
        let (net, _) = net_b();
        let spec = CredalSpec::joint(1, vec![vec![vec![0.1, 0.9], vec![0.8, 0.2]]]).unwrap();
        let q = Query::new(0, 0, Evidence::new());
        assert!(matches!(
            build_ne_program(&net, &[spec], &q),
            Err(Error::Unsupported(_))
        ));
        assert!(ne_lp_dump(&net, &[], &q).unwrap().starts_with("min"));
    }
}
