//! Discrete Bayesian networks: factors, networks, and exact inference by
//! variable elimination, plus a literal full-joint oracle.

mod elimination;
mod factor;
mod network;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use elimination::{
    brute_force_joint, brute_force_joint_with_cap, eliminate, eliminate_with_order, elimination_order,
    joint_prob_of_evidence, posterior_marginal, DEFAULT_JOINT_CAP,
};
pub use factor::Factor;
pub use network::{cpt_from_columns, DiscreteNetwork, NetworkBuilder, Variable, NORMALIZATION_TOL};

/// Dense variable index, `0..n`.
pub type VarId = usize;

/// Observed values, keyed by variable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Evidence(BTreeMap<VarId, usize>);

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, usize)>) -> Self {
        Self(pairs.into_iter().collect())
    }

    pub fn insert(&mut self, var: VarId, value: usize) -> Option<usize> {
        self.0.insert(var, value)
    }

    pub fn with(mut self, var: VarId, value: usize) -> Self {
        self.0.insert(var, value);
        self
    }

    pub fn get(&self, var: VarId) -> Option<usize> {
        self.0.get(&var).copied()
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.0.contains_key(&var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.0.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn check(&self, net: &DiscreteNetwork) -> crate::Result<()> {
        for (var, value) in self.iter() {
            if var >= net.len() {
                return Err(crate::Error::UnknownVariable(var));
            }
            let cardinality = net.cardinality(var);
            if value >= cardinality {
                return Err(crate::Error::ValueOutOfRange {
                    var,
                    value,
                    cardinality,
                });
            }
        }
        Ok(())
    }
}

impl FromIterator<(VarId, usize)> for Evidence {
    fn from_iter<I: IntoIterator<Item = (VarId, usize)>>(iter: I) -> Self {
        Self::from_pairs(iter)
    }
}
