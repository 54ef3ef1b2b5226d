//! Rewrites a credal network as a precise network with transparent
//! variables: each credal node gets a parentless selector whose value picks
//! one vertex of its credal set.

use serde::{Deserialize, Serialize};

use crate::bn::{cpt_from_columns, DiscreteNetwork, Evidence, Factor, VarId, Variable};
use crate::credal::{ConditionalSets, CredalSpec};
use crate::error::{Error, Result};

/// A selector variable added by the transform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransparentVariable {
    /// Id in the transformed network.
    pub id: VarId,
    /// The credal node whose vertices this variable selects.
    pub source: VarId,
    /// Parent configuration served, for per-configuration selectors.
    pub config: Option<usize>,
    pub arity: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Original(VarId),
    Transparent { source: VarId },
}

/// A choice of value for every transparent variable, indexed like
/// [`TransformedNetwork::transparents`].
pub type Assignment = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformedNetwork {
    net: DiscreteNetwork,
    base: DiscreteNetwork,
    specs: Vec<CredalSpec>,
    transparents: Vec<TransparentVariable>,
    origin: Vec<Origin>,
}

fn unique_name(taken: &[Variable], wanted: String) -> String {
    let mut name = wanted;
    while taken.iter().any(|v| v.name == name) {
        name.push('_');
    }
    name
}

/// Applies the transform. Original variables keep their ids; transparent
/// variables are appended after them with uniform placeholder priors.
pub fn apply_ccm(net: &DiscreteNetwork, specs: &[CredalSpec]) -> Result<TransformedNetwork> {
    for (i, spec) in specs.iter().enumerate() {
        spec.check_against(net)?;
        if specs[..i].iter().any(|s| s.node == spec.node) {
            return Err(Error::InvalidParameter(format!(
                "two credal specs target node '{}'",
                net.variable(spec.node).name
            )));
        }
    }

    let n = net.len();
    let mut variables: Vec<Variable> = net.variables().to_vec();
    let mut parents: Vec<Vec<VarId>> = (0..n).map(|i| net.parents(i).to_vec()).collect();
    let mut transparents = Vec::new();
    // transparent indices per spec, in configuration order
    let mut owned: Vec<Vec<usize>> = Vec::with_capacity(specs.len());

    for spec in specs {
        let name = &net.variable(spec.node).name;
        let arities: Vec<(Option<usize>, usize)> = match &spec.sets {
            ConditionalSets::Separate(polys) if polys.len() == 1 => vec![(None, polys[0].vertex_count())],
            ConditionalSets::Separate(polys) => polys
                .iter()
                .enumerate()
                .map(|(c, p)| (Some(c), p.vertex_count()))
                .collect(),
            ConditionalSets::Joint(tables) => vec![(None, tables.len())],
        };
        let mut mine = Vec::new();
        for (config, arity) in arities {
            let id = variables.len();
            let wanted = match config {
                None => format!("{name}'"),
                Some(c) => format!("{name}'{c}"),
            };
            variables.push(Variable {
                id,
                name: unique_name(&variables, wanted),
                values: (0..arity).map(|j| j.to_string()).collect(),
            });
            parents.push(Vec::new());
            parents[spec.node].push(id);
            mine.push(transparents.len());
            transparents.push(TransparentVariable {
                id,
                source: spec.node,
                config,
                arity,
            });
        }
        owned.push(mine);
    }

    let mut cpts: Vec<Factor> = Vec::with_capacity(variables.len());
    for i in 0..n {
        match specs.iter().position(|s| s.node == i) {
            None => cpts.push(net.cpt(i).clone()),
            Some(s) => {
                let spec = &specs[s];
                let own = &owned[s];
                let base_configs = net.parent_configurations(i);
                let sel_arities: Vec<usize> = own.iter().map(|&t| transparents[t].arity).collect();
                let sel_count: usize = sel_arities.iter().product();
                let mut columns = Vec::with_capacity(base_configs * sel_count);
                for pa in 0..base_configs {
                    for sel in 0..sel_count {
                        let choice = decode(sel, &sel_arities);
                        let column = match &spec.sets {
                            ConditionalSets::Separate(polys) if polys.len() == 1 => {
                                polys[0].vertices()[choice[0]].clone()
                            }
                            ConditionalSets::Separate(polys) => polys[pa].vertices()[choice[pa]].clone(),
                            ConditionalSets::Joint(tables) => tables[choice[0]][pa].clone(),
                        };
                        columns.push(column);
                    }
                }
                cpts.push(cpt_from_columns(&variables, i, &parents[i], &columns)?);
            }
        }
    }
    for t in &transparents {
        let uniform = vec![1.0 / t.arity as f64; t.arity];
        cpts.push(Factor::new(vec![t.id], vec![t.arity], uniform)?);
    }

    let mut origin: Vec<Origin> = (0..n).map(Origin::Original).collect();
    origin.extend(transparents.iter().map(|t| Origin::Transparent { source: t.source }));

    Ok(TransformedNetwork {
        net: DiscreteNetwork::new(variables, parents, cpts)?,
        base: net.clone(),
        specs: specs.to_vec(),
        transparents,
        origin,
    })
}

/// Mixed-radix decode, last position fastest.
pub(crate) fn decode(mut index: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
    out
}

pub(crate) fn encode(digits: &[usize], radices: &[usize]) -> usize {
    digits.iter().zip(radices).fold(0, |acc, (d, r)| acc * r + d)
}

impl TransformedNetwork {
    /// The transformed network (placeholder uniform priors on transparents).
    pub fn net(&self) -> &DiscreteNetwork {
        &self.net
    }

    /// The untransformed input network.
    pub fn base(&self) -> &DiscreteNetwork {
        &self.base
    }

    pub fn specs(&self) -> &[CredalSpec] {
        &self.specs
    }

    pub fn transparents(&self) -> &[TransparentVariable] {
        &self.transparents
    }

    pub fn origin(&self, id: VarId) -> Origin {
        self.origin[id]
    }

    pub fn transparent_ids(&self) -> Vec<VarId> {
        self.transparents.iter().map(|t| t.id).collect()
    }

    pub fn arities(&self) -> Vec<usize> {
        self.transparents.iter().map(|t| t.arity).collect()
    }

    /// Number of joint transparent assignments (product of arities).
    pub fn combination_count(&self) -> u128 {
        self.transparents
            .iter()
            .fold(1u128, |acc, t| acc.saturating_mul(t.arity as u128))
    }

    pub fn assignment(&self, index: usize) -> Assignment {
        decode(index, &self.arities())
    }

    pub fn assignment_index(&self, assignment: &[usize]) -> usize {
        encode(assignment, &self.arities())
    }

    fn check_assignment(&self, assignment: &[usize]) -> Result<()> {
        if assignment.len() != self.transparents.len() {
            return Err(Error::DimensionMismatch {
                expected: self.transparents.len(),
                got: assignment.len(),
            });
        }
        for (t, &v) in self.transparents.iter().zip(assignment) {
            if v >= t.arity {
                return Err(Error::ValueOutOfRange {
                    var: t.id,
                    value: v,
                    cardinality: t.arity,
                });
            }
        }
        Ok(())
    }

    /// The precise network on the original variables whose credal nodes use
    /// the selected vertices. Every other CPT is copied unchanged.
    pub fn instantiate_transparent(&self, assignment: &[usize]) -> Result<DiscreteNetwork> {
        self.check_assignment(assignment)?;
        let mut out = self.base.clone();
        let mut cursor = 0;
        for spec in &self.specs {
            match &spec.sets {
                ConditionalSets::Separate(polys) => {
                    for (c, p) in polys.iter().enumerate() {
                        out.set_conditional(spec.node, c, &p.vertices()[assignment[cursor]])?;
                        cursor += 1;
                    }
                }
                ConditionalSets::Joint(tables) => {
                    for (c, col) in tables[assignment[cursor]].iter().enumerate() {
                        out.set_conditional(spec.node, c, col)?;
                    }
                    cursor += 1;
                }
            }
        }
        Ok(out)
    }

    /// Transparent assignment written as evidence on the transformed network.
    pub fn as_evidence(&self, assignment: &[usize]) -> Result<Evidence> {
        self.check_assignment(assignment)?;
        Ok(self
            .transparents
            .iter()
            .zip(assignment)
            .map(|(t, &v)| (t.id, v))
            .collect())
    }

    /// The transformed network with transparent priors replaced by `theta`
    /// (one weight vector per transparent). Weights are not renormalized.
    pub fn with_priors(&self, theta: &[Vec<f64>]) -> Result<DiscreteNetwork> {
        if theta.len() != self.transparents.len() {
            return Err(Error::DimensionMismatch {
                expected: self.transparents.len(),
                got: theta.len(),
            });
        }
        let mut net = self.net.clone();
        for (t, w) in self.transparents.iter().zip(theta) {
            if w.len() != t.arity {
                return Err(Error::DimensionMismatch {
                    expected: t.arity,
                    got: w.len(),
                });
            }
            net.replace_cpt(t.id, Factor::new(vec![t.id], vec![t.arity], w.clone())?)?;
        }
        Ok(net)
    }
}
