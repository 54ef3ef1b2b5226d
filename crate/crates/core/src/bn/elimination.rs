use std::collections::BTreeSet;

use super::{DiscreteNetwork, Evidence, Factor, VarId};
use crate::error::{Error, Result};

/// Default cap on the number of entries of a literal full joint.
pub const DEFAULT_JOINT_CAP: usize = 1 << 22;

fn check_keep(net: &DiscreteNetwork, keep: &[VarId], evidence: &Evidence) -> Result<()> {
    evidence.check(net)?;
    for &k in keep {
        if k >= net.len() {
            return Err(Error::UnknownVariable(k));
        }
        if evidence.contains(k) {
            return Err(Error::QueryInEvidence(k));
        }
    }
    Ok(())
}

/// Greedy min-degree elimination order over the variables that are neither
/// kept nor observed. Ties go to the lowest id.
pub fn elimination_order(net: &DiscreteNetwork, keep: &[VarId], evidence: &Evidence) -> Vec<VarId> {
    let mut scopes: Vec<BTreeSet<VarId>> = net
        .cpts()
        .iter()
        .map(|f| f.scope().iter().copied().filter(|v| !evidence.contains(*v)).collect())
        .collect();
    let mut pending: BTreeSet<VarId> = (0..net.len())
        .filter(|v| !keep.contains(v) && !evidence.contains(*v))
        .collect();
    let mut order = Vec::with_capacity(pending.len());
    while !pending.is_empty() {
        let mut best: Option<(usize, VarId)> = None;
        for &v in &pending {
            let mut neighbours = BTreeSet::new();
            for s in scopes.iter().filter(|s| s.contains(&v)) {
                neighbours.extend(s.iter().copied().filter(|&w| w != v));
            }
            let degree = neighbours.len();
            if best.is_none_or(|(d, _)| degree < d) {
                best = Some((degree, v));
            }
        }
        let (_, v) = best.expect("pending is nonempty");
        let mut merged = BTreeSet::new();
        scopes.retain(|s| {
            if s.contains(&v) {
                merged.extend(s.iter().copied().filter(|&w| w != v));
                false
            } else {
                true
            }
        });
        scopes.push(merged);
        pending.remove(&v);
        order.push(v);
    }
    order
}

/// Unnormalized p(keep, e) using a min-degree elimination order. The result
/// scope is `keep` in ascending order.
pub fn eliminate(net: &DiscreteNetwork, keep: &[VarId], evidence: &Evidence) -> Result<Factor> {
    check_keep(net, keep, evidence)?;
    let order = elimination_order(net, keep, evidence);
    run_elimination(net, evidence, &order)
}

/// As [`eliminate`] with a caller-chosen order, which must list exactly the
/// variables that are neither kept nor observed.
pub fn eliminate_with_order(
    net: &DiscreteNetwork,
    keep: &[VarId],
    evidence: &Evidence,
    order: &[VarId],
) -> Result<Factor> {
    check_keep(net, keep, evidence)?;
    let expected: BTreeSet<VarId> = (0..net.len())
        .filter(|v| !keep.contains(v) && !evidence.contains(*v))
        .collect();
    let given: BTreeSet<VarId> = order.iter().copied().collect();
    if given != expected || order.len() != expected.len() {
        return Err(Error::InvalidParameter(
            "elimination order must list every non-kept, non-observed variable once".into(),
        ));
    }
    run_elimination(net, evidence, order)
}

fn run_elimination(net: &DiscreteNetwork, evidence: &Evidence, order: &[VarId]) -> Result<Factor> {
    let mut factors: Vec<Factor> = net.cpts().iter().map(|f| f.restrict(evidence)).collect();
    for &v in order {
        let (touching, rest): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.position(v).is_some());
        factors = rest;
        let mut product = Factor::scalar(1.0);
        for f in &touching {
            product = product.product(f)?;
        }
        factors.push(product.marginalize(v)?);
    }
    let mut result = Factor::scalar(1.0);
    for f in &factors {
        result = result.product(f)?;
    }
    Ok(result)
}

/// p(e); equals 1 for empty evidence.
pub fn joint_prob_of_evidence(net: &DiscreteNetwork, evidence: &Evidence) -> Result<f64> {
    Ok(eliminate(net, &[], evidence)?.values()[0])
}

/// p(x_q | e) as a normalized vector over the values of `q`.
pub fn posterior_marginal(net: &DiscreteNetwork, q: VarId, evidence: &Evidence) -> Result<Vec<f64>> {
    let joint = eliminate(net, &[q], evidence)?;
    let normalized = joint.normalized().ok_or(Error::ZeroProbabilityEvidence)?;
    Ok(normalized.values().to_vec())
}

pub fn brute_force_joint(net: &DiscreteNetwork) -> Result<Factor> {
    brute_force_joint_with_cap(net, DEFAULT_JOINT_CAP)
}

/// The full joint over all variables (scope `0..n`), each entry computed as
/// the literal product of CPT entries.
pub fn brute_force_joint_with_cap(net: &DiscreteNetwork, cap: usize) -> Result<Factor> {
    let cards: Vec<usize> = net.variables().iter().map(|v| v.cardinality()).collect();
    let size = cards
        .iter()
        .try_fold(1u128, |acc, &c| acc.checked_mul(c as u128))
        .unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(Error::CapExceeded {
            what: "full joint",
            size,
            cap: cap as u128,
        });
    }
    let scope: Vec<VarId> = (0..net.len()).collect();
    let template = Factor::new(scope.clone(), cards.clone(), vec![0.0; size as usize])?;
    let mut values = Vec::with_capacity(size as usize);
    for idx in 0..size as usize {
        let assignment = template.assignment_of(idx);
        let mut p = 1.0;
        for (i, cpt) in net.cpts().iter().enumerate() {
            let local: Vec<usize> = std::iter::once(i)
                .chain(net.parents(i).iter().copied())
                .map(|v| assignment[v])
                .collect();
            p *= cpt.get(&local);
        }
        values.push(p);
    }
    Factor::new(scope, cards, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::NetworkBuilder;

    fn net_b(prior: [f64; 2]) -> DiscreteNetwork {
        let mut b = NetworkBuilder::new();
        let x = b.variable("x", 2);
        let y = b.variable("y", 2);
        b.cpt(x, &[], vec![prior.to_vec()]);
        b.cpt(y, &[x], vec![vec![0.1, 0.9], vec![0.8, 0.2]]);
        b.build().unwrap()
    }

    #[test]
    fn eliminate_keeps_evidence_slice() {
        let f = eliminate(&net_b([0.6, 0.4]), &[0], &Evidence::from_pairs([(1, 1)])).unwrap();
        assert_eq!(f.scope(), &[0]);
        assert!((f.values()[0] - 0.54).abs() < 1e-12);
        assert!((f.values()[1] - 0.08).abs() < 1e-12);
    }

    #[test]
    fn full_keep_equals_brute_force() {
        let net = net_b([0.6, 0.4]);
        let f = eliminate(&net, &[0, 1], &Evidence::new()).unwrap();
        let g = brute_force_joint(&net).unwrap();
        for (a, b) in f.values().iter().zip(g.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let expected = [0.06, 0.54, 0.32, 0.08];
        for (a, b) in g.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_node_returns_prior() {
        let mut b = NetworkBuilder::new();
        let x = b.variable("x", 3);
        b.cpt(x, &[], vec![vec![0.2, 0.3, 0.5]]);
        let net = b.build().unwrap();
        assert_eq!(
            eliminate(&net, &[x], &Evidence::new()).unwrap().values(),
            &[0.2, 0.3, 0.5]
        );
        assert_eq!(brute_force_joint(&net).unwrap().values(), &[0.2, 0.3, 0.5]);
    }

    #[test]
    fn evidence_probability() {
        let net = net_b([0.6, 0.4]);
        assert!((joint_prob_of_evidence(&net, &Evidence::new()).unwrap() - 1.0).abs() < 1e-12);
        let p = joint_prob_of_evidence(&net, &Evidence::from_pairs([(1, 1)])).unwrap();
        assert!((p - 0.62).abs() < 1e-12);
    }

    #[test]
    fn impossible_evidence() {
        let mut b = NetworkBuilder::new();
        let x = b.variable("x", 2);
        let y = b.variable("y", 2);
        b.cpt(x, &[], vec![vec![1.0, 0.0]]);
        b.cpt(y, &[x], vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let net = b.build().unwrap();
        let e = Evidence::from_pairs([(y, 1)]);
        assert_eq!(joint_prob_of_evidence(&net, &e).unwrap(), 0.0);
        assert_eq!(
            posterior_marginal(&net, x, &e).unwrap_err(),
            Error::ZeroProbabilityEvidence
        );
    }

    #[test]
    fn posteriors_match_hand_values() {
        let e = Evidence::from_pairs([(1, 1)]);
        let p = posterior_marginal(&net_b([0.6, 0.4]), 0, &e).unwrap();
        assert!((p[0] - 0.54 / 0.62).abs() < 1e-9);
        assert!((p[0] - 0.870968).abs() < 1e-6);
        let p = posterior_marginal(&net_b([0.8, 0.2]), 0, &e).unwrap();
        assert!((p[0] - 0.72 / 0.76).abs() < 1e-9);
        let p = posterior_marginal(&net_b([0.8, 0.2]), 0, &Evidence::new()).unwrap();
        assert!((p[0] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn query_in_evidence_rejected() {
        let e = Evidence::from_pairs([(0, 1)]);
        assert_eq!(
            posterior_marginal(&net_b([0.6, 0.4]), 0, &e).unwrap_err(),
            Error::QueryInEvidence(0)
        );
    }

    #[test]
    fn explicit_order_validated() {
        let net = net_b([0.6, 0.4]);
        assert!(eliminate_with_order(&net, &[0], &Evidence::new(), &[]).is_err());
        let f = eliminate_with_order(&net, &[0], &Evidence::new(), &[1]).unwrap();
        assert!((f.values()[0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn cap_enforced() {
        let net = net_b([0.6, 0.4]);
        assert!(matches!(
            brute_force_joint_with_cap(&net, 3),
            Err(Error::CapExceeded { size: 4, .. })
        ));
    }
}
