use serde::{Deserialize, Serialize};

use super::{Factor, VarId};
use crate::error::{Error, Result};

/// Tolerance on CPT column sums.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub values: Vec<String>,
}

impl Variable {
    pub fn cardinality(&self) -> usize {
        self.values.len()
    }
}

/// A discrete Bayesian network. The CPT of variable `i` has scope
/// `[i, parents(i)...]`, so parent configurations are enumerated row-major
/// over the parents in their listed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteNetwork {
    variables: Vec<Variable>,
    parents: Vec<Vec<VarId>>,
    cpts: Vec<Factor>,
}

impl DiscreteNetwork {
    /// Assembles a network, checking only that the pieces line up (ids, CPT
    /// scopes and table sizes). Acyclicity and normalization are reported by
    /// [`DiscreteNetwork::validate`].
    pub fn new(variables: Vec<Variable>, parents: Vec<Vec<VarId>>, cpts: Vec<Factor>) -> Result<Self> {
        let n = variables.len();
        if parents.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: parents.len(),
            });
        }
        if cpts.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: cpts.len(),
            });
        }
        for (i, var) in variables.iter().enumerate() {
            if var.id != i {
                return Err(Error::InvalidParameter(format!(
                    "variable '{}' has id {} at position {i}",
                    var.name, var.id
                )));
            }
            for &p in &parents[i] {
                if p >= n {
                    return Err(Error::UnknownVariable(p));
                }
            }
            let mut scope = vec![i];
            scope.extend(&parents[i]);
            if cpts[i].scope() != scope.as_slice() {
                return Err(Error::InvalidParameter(format!(
                    "cpt for '{}' must have scope {:?}, got {:?}",
                    var.name,
                    scope,
                    cpts[i].scope()
                )));
            }
            for (&v, &c) in scope.iter().zip(cpts[i].cards()) {
                if variables[v].cardinality() != c {
                    return Err(Error::CardinalityMismatch {
                        var: v,
                        left: variables[v].cardinality(),
                        right: c,
                    });
                }
            }
        }
        Ok(Self {
            variables,
            parents,
            cpts,
        })
    }

    /// Like [`DiscreteNetwork::new`] but also rejects any validation violation.
    pub fn validated(variables: Vec<Variable>, parents: Vec<Vec<VarId>>, cpts: Vec<Factor>) -> Result<Self> {
        let net = Self::new(variables, parents, cpts)?;
        let violations = net.validate();
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(Error::InvalidNetwork(violations))
        }
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id]
    }

    pub fn find(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn cardinality(&self, id: VarId) -> usize {
        self.variables[id].cardinality()
    }

    pub fn parents(&self, id: VarId) -> &[VarId] {
        &self.parents[id]
    }

    pub fn children(&self, id: VarId) -> Vec<VarId> {
        (0..self.len()).filter(|&c| self.parents[c].contains(&id)).collect()
    }

    pub fn cpt(&self, id: VarId) -> &Factor {
        &self.cpts[id]
    }

    pub fn cpts(&self) -> &[Factor] {
        &self.cpts
    }

    pub fn parent_configurations(&self, id: VarId) -> usize {
        self.parents[id].iter().map(|&p| self.cardinality(p)).product()
    }

    /// Decodes a parent configuration index into per-parent values.
    pub fn parent_values(&self, id: VarId, mut config: usize) -> Vec<usize> {
        let mut out = vec![0; self.parents[id].len()];
        for (slot, &p) in out.iter_mut().zip(&self.parents[id]).rev() {
            let c = self.cardinality(p);
            *slot = config % c;
            config /= c;
        }
        out
    }

    /// The distribution p(x_id | pa = config).
    pub fn conditional(&self, id: VarId, config: usize) -> Vec<f64> {
        let stride = self.parent_configurations(id);
        let values = self.cpts[id].values();
        (0..self.cardinality(id)).map(|v| values[v * stride + config]).collect()
    }

    /// Overwrites one CPT column. The column must have the node's cardinality.
    pub fn set_conditional(&mut self, id: VarId, config: usize, dist: &[f64]) -> Result<()> {
        let card = self.cardinality(id);
        if dist.len() != card {
            return Err(Error::DimensionMismatch {
                expected: card,
                got: dist.len(),
            });
        }
        let stride = self.parent_configurations(id);
        if config >= stride {
            return Err(Error::InvalidParameter(format!(
                "parent configuration {config} out of range ({stride})"
            )));
        }
        let cpt = &self.cpts[id];
        let mut values = cpt.values().to_vec();
        for (v, &p) in dist.iter().enumerate() {
            values[v * stride + config] = p;
        }
        self.cpts[id] = Factor::new(cpt.scope().to_vec(), cpt.cards().to_vec(), values)?;
        Ok(())
    }

    /// Replaces a whole CPT; the scope must stay `[id, parents...]`.
    pub fn replace_cpt(&mut self, id: VarId, cpt: Factor) -> Result<()> {
        if cpt.scope() != self.cpts[id].scope() || cpt.cards() != self.cpts[id].cards() {
            return Err(Error::InvalidParameter(format!(
                "replacement cpt for '{}' has a different scope",
                self.variables[id].name
            )));
        }
        self.cpts[id] = cpt;
        Ok(())
    }

    /// Kahn's algorithm; `None` if the parent graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<VarId>> {
        let n = self.len();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: Vec<VarId> = (0..n).filter(|&i| indegree[i] == 0).rev().collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop() {
            order.push(v);
            for c in self.children(v) {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Lists every structural violation; an empty list means the network is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, var) in self.variables.iter().enumerate() {
            if var.cardinality() == 0 {
                out.push(format!("variable {} has no values", var.name));
            }
            if self.variables[..i].iter().any(|w| w.name == var.name) {
                out.push(format!("duplicate variable name {}", var.name));
            }
            for (k, p) in self.parents[i].iter().enumerate() {
                if self.parents[i][..k].contains(p) {
                    out.push(format!("variable {} lists parent {} twice", var.name, p));
                }
            }
        }
        if self.topological_order().is_none() {
            out.push("cycle detected".to_string());
        }
        for (i, var) in self.variables.iter().enumerate() {
            for config in 0..self.parent_configurations(i) {
                let column = self.conditional(i, config);
                let total: f64 = column.iter().sum();
                if (total - 1.0).abs() > NORMALIZATION_TOL {
                    out.push(format!("cpt {} not normalized at pa={config}", var.name));
                }
            }
        }
        out
    }
}

/// Incremental construction of a [`DiscreteNetwork`] by name.
#[derive(Debug, Default)]
pub struct NetworkBuilder {
    variables: Vec<Variable>,
    parents: Vec<Vec<VarId>>,
    columns: Vec<Option<Vec<Vec<f64>>>>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable whose values are named "0", "1", ...
    pub fn variable(&mut self, name: &str, cardinality: usize) -> VarId {
        let values = (0..cardinality).map(|v| v.to_string()).collect();
        self.variable_with_values(name, values)
    }

    pub fn variable_with_values(&mut self, name: &str, values: Vec<String>) -> VarId {
        let id = self.variables.len();
        self.variables.push(Variable {
            id,
            name: name.to_string(),
            values,
        });
        self.parents.push(Vec::new());
        self.columns.push(None);
        id
    }

    /// Sets the parents of `var` and its conditional distributions, one
    /// column per parent configuration (row-major over `parents`).
    pub fn cpt(&mut self, var: VarId, parents: &[VarId], columns: Vec<Vec<f64>>) -> &mut Self {
        self.parents[var] = parents.to_vec();
        self.columns[var] = Some(columns);
        self
    }

    pub fn build(&self) -> Result<DiscreteNetwork> {
        let net = self.assemble()?;
        let violations = net.validate();
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(Error::InvalidNetwork(violations))
        }
    }

    /// Builds without validation (cycles and unnormalized columns allowed).
    pub fn build_unchecked(&self) -> Result<DiscreteNetwork> {
        self.assemble()
    }

    fn assemble(&self) -> Result<DiscreteNetwork> {
        let mut cpts = Vec::with_capacity(self.variables.len());
        for (i, var) in self.variables.iter().enumerate() {
            let columns = self.columns[i]
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter(format!("no cpt given for '{}'", var.name)))?;
            cpts.push(cpt_from_columns(&self.variables, i, &self.parents[i], columns)?);
        }
        DiscreteNetwork::new(self.variables.clone(), self.parents.clone(), cpts)
    }
}

/// Lays out per-configuration columns as a factor with scope `[var, parents...]`.
pub fn cpt_from_columns(variables: &[Variable], var: VarId, parents: &[VarId], columns: &[Vec<f64>]) -> Result<Factor> {
    let card = variables[var].cardinality();
    for &p in parents {
        if p >= variables.len() {
            return Err(Error::UnknownVariable(p));
        }
    }
    let configs: usize = parents.iter().map(|&p| variables[p].cardinality()).product();
    if columns.len() != configs {
        return Err(Error::DimensionMismatch {
            expected: configs,
            got: columns.len(),
        });
    }
    let mut values = vec![0.0; card * configs];
    for (c, col) in columns.iter().enumerate() {
        if col.len() != card {
            return Err(Error::DimensionMismatch {
                expected: card,
                got: col.len(),
            });
        }
        for (v, &p) in col.iter().enumerate() {
            values[v * configs + c] = p;
        }
    }
    let mut scope = vec![var];
    scope.extend(parents);
    let cards = scope.iter().map(|&v| variables[v].cardinality()).collect();
    Factor::new(scope, cards, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> NetworkBuilder {
        let mut b = NetworkBuilder::new();
        let x = b.variable("x", 2);
        let y = b.variable("y", 2);
        b.cpt(x, &[], vec![vec![0.6, 0.4]]);
        b.cpt(y, &[x], vec![vec![0.1, 0.9], vec![0.8, 0.2]]);
        b
    }

    #[test]
    fn valid_chain_has_no_violations() {
        assert!(chain().build().unwrap().validate().is_empty());
    }

    #[test]
    fn unnormalized_column_reported() {
        let mut b = chain();
        b.cpt(1, &[0], vec![vec![0.1, 0.8], vec![0.8, 0.2]]);
        let net = b.build_unchecked().unwrap();
        assert_eq!(net.validate(), vec!["cpt y not normalized at pa=0".to_string()]);
        assert!(matches!(b.build(), Err(Error::InvalidNetwork(_))));
    }

    #[test]
    fn cycle_reported() {
        let mut b = NetworkBuilder::new();
        let x = b.variable("x", 2);
        let y = b.variable("y", 2);
        b.cpt(x, &[y], vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        b.cpt(y, &[x], vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        let net = b.build_unchecked().unwrap();
        assert_eq!(net.validate(), vec!["cycle detected".to_string()]);
    }

    #[test]
    fn conditional_columns() {
        let net = chain().build().unwrap();
        assert_eq!(net.conditional(1, 0), vec![0.1, 0.9]);
        assert_eq!(net.conditional(1, 1), vec![0.8, 0.2]);
        assert_eq!(net.cpt(1).get(&[1, 0]), 0.9);
        let mut net = net;
        net.set_conditional(1, 1, &[0.3, 0.7]).unwrap();
        assert_eq!(net.conditional(1, 1), vec![0.3, 0.7]);
    }

    #[test]
    fn parent_values_row_major() {
        let mut b = NetworkBuilder::new();
        let a = b.variable("a", 2);
        let c = b.variable("c", 3);
        let z = b.variable("z", 2);
        b.cpt(a, &[], vec![vec![0.5, 0.5]]);
        b.cpt(c, &[], vec![vec![0.2, 0.3, 0.5]]);
        b.cpt(z, &[a, c], vec![vec![0.5, 0.5]; 6]);
        let net = b.build().unwrap();
        assert_eq!(net.parent_configurations(z), 6);
        assert_eq!(net.parent_values(z, 4), vec![1, 1]);
        assert_eq!(net.topological_order().unwrap(), vec![0, 1, 2]);
    }
}
