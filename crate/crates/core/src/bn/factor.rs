use serde::{Deserialize, Serialize};

use super::{Evidence, VarId};
use crate::error::{Error, Result};

/// A nonnegative table over the joint values of an ordered scope.
///
/// Entries are stored row-major: the last variable of the scope varies fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    scope: Vec<VarId>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    pub fn new(scope: Vec<VarId>, cards: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if scope.len() != cards.len() {
            return Err(Error::DimensionMismatch {
                expected: scope.len(),
                got: cards.len(),
            });
        }
        for (i, v) in scope.iter().enumerate() {
            if scope[..i].contains(v) {
                return Err(Error::InvalidParameter(format!(
                    "variable {v} appears twice in a factor scope"
                )));
            }
        }
        let expected: usize = cards.iter().product();
        if values.len() != expected {
            return Err(Error::TableSize {
                expected,
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "factor entry {bad} is negative or not finite"
            )));
        }
        Ok(Self { scope, cards, values })
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            scope: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.scope.is_empty()
    }

    pub fn position(&self, var: VarId) -> Option<usize> {
        self.scope.iter().position(|&v| v == var)
    }

    pub fn cardinality_of(&self, var: VarId) -> Option<usize> {
        self.position(var).map(|p| self.cards[p])
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    fn strides(&self) -> Vec<usize> {
        strides(&self.cards)
    }

    /// Flat index of an assignment aligned with the scope.
    pub fn index_of(&self, assignment: &[usize]) -> usize {
        debug_assert_eq!(assignment.len(), self.scope.len());
        assignment.iter().zip(self.strides()).map(|(a, s)| a * s).sum()
    }

    pub fn assignment_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.cards.len()];
        for (slot, &card) in out.iter_mut().zip(&self.cards).rev() {
            *slot = index % card;
            index /= card;
        }
        out
    }

    pub fn get(&self, assignment: &[usize]) -> f64 {
        self.values[self.index_of(assignment)]
    }

    /// Pointwise product. The result scope is the ascending union of both scopes.
    pub fn product(&self, other: &Factor) -> Result<Factor> {
        let mut scope: Vec<VarId> = self.scope.clone();
        for &v in &other.scope {
            if !scope.contains(&v) {
                scope.push(v);
            }
        }
        scope.sort_unstable();

        let mut cards = Vec::with_capacity(scope.len());
        for &v in &scope {
            let card = match (self.cardinality_of(v), other.cardinality_of(v)) {
                (Some(a), Some(b)) if a != b => {
                    return Err(Error::CardinalityMismatch {
                        var: v,
                        left: a,
                        right: b,
                    })
                }
                (Some(a), _) => a,
                (None, Some(b)) => b,
                (None, None) => unreachable!(),
            };
            cards.push(card);
        }

        // Stride of each output variable inside each operand (0 when absent).
        let self_strides = self.strides();
        let other_strides = other.strides();
        let lookup = |f: &Factor, fs: &[usize], v: VarId| f.position(v).map_or(0, |p| fs[p]);
        let sa: Vec<usize> = scope.iter().map(|&v| lookup(self, &self_strides, v)).collect();
        let sb: Vec<usize> = scope.iter().map(|&v| lookup(other, &other_strides, v)).collect();

        let len: usize = cards.iter().product();
        let mut values = Vec::with_capacity(len);
        let mut counter = vec![0usize; scope.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..len {
            values.push(self.values[ia] * other.values[ib]);
            // odometer increment, last variable fastest
            for k in (0..counter.len()).rev() {
                counter[k] += 1;
                ia += sa[k];
                ib += sb[k];
                if counter[k] < cards[k] {
                    break;
                }
                ia -= sa[k] * cards[k];
                ib -= sb[k] * cards[k];
                counter[k] = 0;
            }
        }
        Ok(Factor { scope, cards, values })
    }

    /// Sums `var` out of the factor.
    pub fn marginalize(&self, var: VarId) -> Result<Factor> {
        let pos = self.position(var).ok_or(Error::NotInScope(var))?;
        let card = self.cards[pos];
        let inner: usize = self.cards[pos + 1..].iter().product();
        let outer: usize = self.cards[..pos].iter().product();
        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            for v in 0..card {
                let base = (o * card + v) * inner;
                for i in 0..inner {
                    values[o * inner + i] += self.values[base + i];
                }
            }
        }
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);
        Ok(Factor { scope, cards, values })
    }

    /// Keeps only entries consistent with the evidence and drops the observed
    /// variables from the scope. Entries are copied, never recomputed.
    pub fn restrict(&self, evidence: &Evidence) -> Factor {
        let observed: Vec<(usize, usize)> = self
            .scope
            .iter()
            .enumerate()
            .filter_map(|(p, v)| evidence.get(*v).map(|val| (p, val)))
            .collect();
        if observed.is_empty() {
            return self.clone();
        }
        let keep: Vec<usize> = (0..self.scope.len())
            .filter(|p| !observed.iter().any(|(q, _)| q == p))
            .collect();
        let scope: Vec<VarId> = keep.iter().map(|&p| self.scope[p]).collect();
        let cards: Vec<usize> = keep.iter().map(|&p| self.cards[p]).collect();
        let len: usize = cards.iter().product();

        let out_of_range = observed.iter().any(|&(p, val)| val >= self.cards[p]);
        if out_of_range {
            return Factor {
                scope,
                cards,
                values: vec![0.0; len],
            };
        }

        let strides = self.strides();
        let base: usize = observed.iter().map(|&(p, val)| strides[p] * val).sum();
        let kept_strides: Vec<usize> = keep.iter().map(|&p| strides[p]).collect();
        let mut values = Vec::with_capacity(len);
        let mut counter = vec![0usize; keep.len()];
        let mut idx = base;
        for _ in 0..len {
            values.push(self.values[idx]);
            for k in (0..counter.len()).rev() {
                counter[k] += 1;
                idx += kept_strides[k];
                if counter[k] < cards[k] {
                    break;
                }
                idx -= kept_strides[k] * cards[k];
                counter[k] = 0;
            }
        }
        Factor { scope, cards, values }
    }

    /// Same table with the scope rearranged into `order`.
    pub fn permuted(&self, order: &[VarId]) -> Result<Factor> {
        if order.len() != self.scope.len() {
            return Err(Error::DimensionMismatch {
                expected: self.scope.len(),
                got: order.len(),
            });
        }
        let positions = order
            .iter()
            .map(|&v| self.position(v).ok_or(Error::NotInScope(v)))
            .collect::<Result<Vec<_>>>()?;
        let cards: Vec<usize> = positions.iter().map(|&p| self.cards[p]).collect();
        let strides = self.strides();
        let mut values = Vec::with_capacity(self.values.len());
        let out = Factor {
            scope: order.to_vec(),
            cards: cards.clone(),
            values: vec![0.0; self.values.len()],
        };
        for i in 0..self.values.len() {
            let a = out.assignment_of(i);
            let src: usize = a.iter().zip(&positions).map(|(val, &p)| val * strides[p]).sum();
            values.push(self.values[src]);
        }
        Factor::new(order.to_vec(), cards, values)
    }

    /// Divides by the total mass; `None` when the total is zero.
    pub fn normalized(&self) -> Option<Factor> {
        let total = self.sum();
        if total <= 0.0 {
            return None;
        }
        Some(Factor {
            scope: self.scope.clone(),
            cards: self.cards.clone(),
            values: self.values.iter().map(|v| v / total).collect(),
        })
    }
}

pub(crate) fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for k in (0..cards.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * cards[k + 1];
    }
    s
}
