//! Seeded generator of small random credal networks and queries.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::bn::{DiscreteNetwork, Evidence, NetworkBuilder, VarId};
use crate::credal::{CredalSpec, Polytope};
use crate::error::Result;
use crate::query::Query;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomConfig {
    pub min_variables: usize,
    pub max_variables: usize,
    pub max_cardinality: usize,
    pub max_parents: usize,
    pub max_credal: usize,
    /// Vertices per credal set (per column in separate mode).
    pub max_vertices: usize,
    /// Credal nodes are drawn among roots only.
    pub credal_roots_only: bool,
    /// Resample vertex counts until `∏ m_i` is at most this.
    pub max_combinations: usize,
    pub max_evidence: usize,
    /// Every variable takes all earlier variables as parents.
    pub complete_dag: bool,
}

impl Default for RandomConfig {
    fn default() -> Self {
        Self {
            min_variables: 2,
            max_variables: 10,
            max_cardinality: 3,
            max_parents: 2,
            max_credal: 3,
            max_vertices: 4,
            credal_roots_only: false,
            max_combinations: 1024,
            max_evidence: 2,
            complete_dag: false,
        }
    }
}

impl RandomConfig {
    /// Small enough for the full-joint natural-extension program.
    pub fn small() -> Self {
        Self {
            max_variables: 5,
            max_cardinality: 2,
            ..Self::default()
        }
    }

    /// One credal root on a complete DAG, everything else precise. The
    /// fixed conditionals then pin the joint down to the root's marginal.
    pub fn single_credal_root() -> Self {
        Self {
            max_variables: 4,
            max_credal: 1,
            credal_roots_only: true,
            complete_dag: true,
            ..Self::small()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomInstance {
    pub net: DiscreteNetwork,
    pub specs: Vec<CredalSpec>,
    pub query: Query,
}

/// A Dirichlet(1, …, 1) draw.
pub fn random_distribution(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn random_network(cfg: &RandomConfig, rng: &mut impl Rng) -> Result<DiscreteNetwork> {
    let n = rng.random_range(cfg.min_variables..=cfg.max_variables);
    let mut b = NetworkBuilder::new();
    let card_of: Vec<usize> = (0..n)
        .map(|_| rng.random_range(2..=cfg.max_cardinality.max(2)))
        .collect();
    let ids: Vec<VarId> = (0..n).map(|i| b.variable(&format!("v{i}"), card_of[i])).collect();
    for i in 0..n {
        let mut parents: Vec<VarId> = if cfg.complete_dag {
            (0..i).collect()
        } else {
            let k = rng.random_range(0..=cfg.max_parents.min(i));
            sample(rng, i, k).into_iter().collect()
        };
        parents.sort_unstable();
        let configs: usize = parents.iter().map(|&p| card_of[p]).product();
        let columns = (0..configs).map(|_| random_distribution(card_of[i], rng)).collect();
        b.cpt(ids[i], &parents, columns);
    }
    b.build()
}

fn random_polytope(dim: usize, vertices: usize, rng: &mut impl Rng) -> Result<Polytope> {
    Polytope::new((0..vertices).map(|_| random_distribution(dim, rng)).collect())
}

pub fn random_instance(cfg: &RandomConfig, rng: &mut impl Rng) -> Result<RandomInstance> {
    let net = random_network(cfg, rng)?;
    let n = net.len();
    let candidates: Vec<VarId> = (0..n)
        .filter(|&i| !cfg.credal_roots_only || net.parents(i).is_empty())
        .collect();
    let count = rng.random_range(1..=cfg.max_credal.min(candidates.len()).max(1));
    let mut nodes: Vec<VarId> = sample(rng, candidates.len(), count.min(candidates.len()))
        .into_iter()
        .map(|k| candidates[k])
        .collect();
    nodes.sort_unstable();

    // vertex counts per (node, column), shrunk until the product fits
    let mut counts: Vec<Vec<usize>> = nodes
        .iter()
        .map(|&v| {
            (0..net.parent_configurations(v))
                .map(|_| rng.random_range(1..=cfg.max_vertices))
                .collect()
        })
        .collect();
    loop {
        let product: usize = counts.iter().flatten().product();
        if product <= cfg.max_combinations.max(1) {
            break;
        }
        let largest = counts.iter_mut().flatten().max().expect("nonempty");
        *largest -= 1;
    }
    let mut specs = Vec::with_capacity(nodes.len());
    for (&v, cs) in nodes.iter().zip(&counts) {
        let dim = net.cardinality(v);
        let polys = cs
            .iter()
            .map(|&m| random_polytope(dim, m, rng))
            .collect::<Result<Vec<_>>>()?;
        specs.push(CredalSpec::separate(v, polys));
    }

    let target = rng.random_range(0..n);
    let value = rng.random_range(0..net.cardinality(target));
    let others: Vec<VarId> = (0..n).filter(|&v| v != target).collect();
    let k = rng.random_range(0..=cfg.max_evidence.min(others.len()));
    let evidence: Evidence = sample(rng, others.len(), k)
        .into_iter()
        .map(|i| {
            let v = others[i];
            (v, rng.random_range(0..net.cardinality(v)))
        })
        .collect();
    Ok(RandomInstance {
        net,
        specs,
        query: Query::new(target, value, evidence),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn instances_are_valid_and_reproducible() {
        let cfg = RandomConfig::default();
        for seed in 0..30 {
            let a = random_instance(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = random_instance(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(a, b);
            assert!(a.net.validate().is_empty());
            assert!(a.specs.len() <= 3);
            for s in &a.specs {
                s.check_against(&a.net).unwrap();
            }
            a.query.check(&a.net).unwrap();
        }
    }

    #[test]
    fn single_root_config() {
        let cfg = RandomConfig::single_credal_root();
        for seed in 0..20 {
            let r = random_instance(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(r.specs.len(), 1);
            assert!(r.net.parents(r.specs[0].node).is_empty());
        }
    }
}
