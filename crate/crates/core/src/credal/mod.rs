//! Polytopic credal sets: vertex and constraint representations, the
//! standard classes, and per-node credal specifications.

pub mod classes;
mod constraints;
mod polytope;

use serde::{Deserialize, Serialize};

pub use classes::{belief_function, density_bounded, density_ratio, eps_contaminated, total_variation};
pub use constraints::{enumerate_polytope_vertices, ConstraintRow, LinearConstraintSet, MAX_ENUMERATION_DIM};
pub use polytope::{HRepresentation, Polytope};

use crate::bn::{DiscreteNetwork, VarId};
use crate::error::{Error, Result};

/// Absolute per-coordinate tolerance for merging vertices and checking sums.
pub const DEDUP_TOL: f64 = 1e-9;
/// Tolerance for membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// A full conditional table: one distribution per parent configuration.
pub type ConditionalTable = Vec<Vec<f64>>;

/// How the columns of a conditional credal set vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnMode {
    /// Each parent configuration has its own polytope.
    #[default]
    Separate,
    /// Vertices are whole conditional tables chosen together.
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConditionalSets {
    Separate(Vec<Polytope>),
    Joint(Vec<ConditionalTable>),
}

/// The credal set attached to one network node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredalSpec {
    pub node: VarId,
    pub sets: ConditionalSets,
}

impl CredalSpec {
    /// A credal set on a root node (a single parent configuration).
    pub fn prior(node: VarId, polytope: Polytope) -> Self {
        Self {
            node,
            sets: ConditionalSets::Separate(vec![polytope]),
        }
    }

    pub fn separate(node: VarId, polytopes: Vec<Polytope>) -> Self {
        Self {
            node,
            sets: ConditionalSets::Separate(polytopes),
        }
    }

    /// Vertices given as whole conditional tables. Every column must be a
    /// distribution; duplicate tables are merged.
    pub fn joint(node: VarId, tables: Vec<ConditionalTable>) -> Result<Self> {
        if tables.is_empty() {
            return Err(Error::InvalidParameter("joint credal set needs a vertex".into()));
        }
        let shape: Vec<usize> = tables[0].iter().map(Vec::len).collect();
        let mut unique: Vec<ConditionalTable> = Vec::new();
        for t in tables {
            let t_shape: Vec<usize> = t.iter().map(Vec::len).collect();
            if t_shape != shape {
                return Err(Error::InvalidParameter(
                    "joint vertices must all have the same table shape".into(),
                ));
            }
            for col in &t {
                polytope::check_distribution(col, DEDUP_TOL)?;
            }
            let dup = unique
                .iter()
                .any(|u| u.iter().zip(&t).all(|(a, b)| polytope::same_point(a, b, DEDUP_TOL)));
            if !dup {
                unique.push(t);
            }
        }
        Ok(Self {
            node,
            sets: ConditionalSets::Joint(unique),
        })
    }

    pub fn mode(&self) -> ColumnMode {
        match self.sets {
            ConditionalSets::Separate(_) => ColumnMode::Separate,
            ConditionalSets::Joint(_) => ColumnMode::Joint,
        }
    }

    pub fn configurations(&self) -> usize {
        match &self.sets {
            ConditionalSets::Separate(p) => p.len(),
            ConditionalSets::Joint(t) => t[0].len(),
        }
    }

    /// The polytope of possible distributions for one parent configuration.
    /// In joint mode this is the projection of the table vertices.
    pub fn column_polytope(&self, config: usize) -> Result<Polytope> {
        match &self.sets {
            ConditionalSets::Separate(p) => Ok(p[config].clone()),
            ConditionalSets::Joint(t) => Polytope::new(t.iter().map(|tab| tab[config].clone()).collect()),
        }
    }

    /// Mean of the vertices per configuration; a valid precise stand-in.
    pub fn centroid_columns(&self) -> ConditionalTable {
        match &self.sets {
            ConditionalSets::Separate(p) => p.iter().map(Polytope::centroid).collect(),
            ConditionalSets::Joint(t) => {
                let k = t.len() as f64;
                (0..t[0].len())
                    .map(|c| {
                        (0..t[0][c].len())
                            .map(|v| t.iter().map(|tab| tab[c][v]).sum::<f64>() / k)
                            .collect()
                    })
                    .collect()
            }
        }
    }

    /// Checks that the spec fits `net`: dimensions and configuration count.
    pub fn check_against(&self, net: &DiscreteNetwork) -> Result<()> {
        if self.node >= net.len() {
            return Err(Error::UnknownVariable(self.node));
        }
        let card = net.cardinality(self.node);
        let configs = net.parent_configurations(self.node);
        if self.configurations() != configs {
            return Err(Error::DimensionMismatch {
                expected: configs,
                got: self.configurations(),
            });
        }
        let dims: Vec<usize> = match &self.sets {
            ConditionalSets::Separate(p) => p.iter().map(Polytope::dim).collect(),
            ConditionalSets::Joint(t) => t[0].iter().map(Vec::len).collect(),
        };
        if let Some(&bad) = dims.iter().find(|&&d| d != card) {
            return Err(Error::DimensionMismatch {
                expected: card,
                got: bad,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::NetworkBuilder;

    #[test]
    fn joint_spec_checks_shape() {
        let spec = CredalSpec::joint(
            1,
            vec![
                vec![vec![0.8, 0.2], vec![0.0, 1.0]],
                vec![vec![0.944444, 0.055556], vec![0.0, 1.0]],
            ],
        )
        .unwrap();
        assert_eq!(spec.mode(), ColumnMode::Joint);
        assert_eq!(spec.configurations(), 2);
        assert_eq!(spec.column_polytope(1).unwrap().vertex_count(), 1);
        assert!(CredalSpec::joint(1, vec![vec![vec![0.5, 0.5]], vec![vec![0.5, 0.5], vec![1.0, 0.0]]]).is_err());

        let mut b = NetworkBuilder::new();
        let p = b.variable("p", 2);
        let l = b.variable("l", 2);
        b.cpt(p, &[], vec![vec![0.5, 0.5]]);
        b.cpt(l, &[p], vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        let net = b.build().unwrap();
        spec.check_against(&net).unwrap();
        assert!(CredalSpec::prior(l, Polytope::simplex(2)).check_against(&net).is_err());
    }
}
