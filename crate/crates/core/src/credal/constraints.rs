use serde::{Deserialize, Serialize};

use super::polytope::{check_distribution, dedup_points};
use super::{Polytope, DEDUP_TOL, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::linalg::{binomial, dot, solve, Combinations};
use crate::lp::{simplex_solve, LinearProgram, LpStatus, Sense};

/// Largest outcome count handled by vertex enumeration.
pub const MAX_ENUMERATION_DIM: usize = 12;

/// Above this many active-set candidates, provably redundant rows are
/// pruned by LP before enumerating.
const PRUNE_THRESHOLD: u128 = 20_000;

/// Hard stop on active-set candidates.
const MAX_CANDIDATES: u128 = 50_000_000;

/// One linear row `coeffs · p <= bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRow {
    pub coeffs: Vec<f64>,
    pub bound: f64,
}

impl ConstraintRow {
    pub fn new(coeffs: Vec<f64>, bound: f64) -> Self {
        Self { coeffs, bound }
    }

    /// `bound - coeffs · p`; nonnegative when satisfied.
    pub fn slack(&self, p: &[f64]) -> f64 {
        self.bound - dot(&self.coeffs, p)
    }
}

/// Linear inequalities on a distribution over `dim` outcomes, on top of
/// the implicit simplex constraints `p >= 0`, `sum p = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraintSet {
    dim: usize,
    rows: Vec<ConstraintRow>,
}

impl LinearConstraintSet {
    /// Checks dimensions and that the region is nonempty.
    pub fn new(dim: usize, rows: Vec<ConstraintRow>) -> Result<Self> {
        let set = Self::unchecked(dim, rows)?;
        if enumerate_polytope_vertices(dim, &set.rows)?.is_empty() {
            return Err(Error::Infeasible("constraint set has no distribution".into()));
        }
        Ok(set)
    }

    /// Checks dimensions only; used by class constructors whose parameters
    /// guarantee feasibility.
    pub(crate) fn unchecked(dim: usize, rows: Vec<ConstraintRow>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("zero-dimensional constraint set".into()));
        }
        for row in &rows {
            if row.coeffs.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.coeffs.len(),
                });
            }
            if row.coeffs.iter().any(|c| !c.is_finite()) || !row.bound.is_finite() {
                return Err(Error::InvalidParameter("non-finite constraint entry".into()));
            }
        }
        Ok(Self { dim, rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[ConstraintRow] {
        &self.rows
    }

    pub fn contains_distribution(&self, p: &[f64]) -> Result<bool> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.len(),
            });
        }
        check_distribution(p, MEMBERSHIP_TOL)?;
        Ok(self.rows.iter().all(|r| r.slack(p) >= -MEMBERSHIP_TOL))
    }

    pub fn to_polytope(&self) -> Result<Polytope> {
        let vertices = enumerate_polytope_vertices(self.dim, &self.rows)?;
        if vertices.is_empty() {
            return Err(Error::Infeasible("constraint set has no distribution".into()));
        }
        Polytope::new(vertices)
    }
}

/// Exact vertex set of `{p >= 0, sum p = 1, rows}` by active-set enumeration:
/// every choice of `dim - 1` tight constraints (rows or nonnegativity
/// facets) together with the normalization is solved, and feasible
/// solutions are kept. An empty result means the region is empty.
pub fn enumerate_polytope_vertices(dim: usize, rows: &[ConstraintRow]) -> Result<Vec<Vec<f64>>> {
    if dim == 0 || dim > MAX_ENUMERATION_DIM {
        return Err(Error::CapExceeded {
            what: "vertex enumeration dimension",
            size: dim as u128,
            cap: MAX_ENUMERATION_DIM as u128,
        });
    }
    let mut candidates: Vec<ConstraintRow> = Vec::new();
    for row in rows {
        if row.coeffs.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.coeffs.len(),
            });
        }
        let scale = row.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if scale < 1e-14 {
            if row.bound < -DEDUP_TOL {
                return Ok(Vec::new());
            }
            continue;
        }
        let normalized = ConstraintRow::new(row.coeffs.iter().map(|c| c / scale).collect(), row.bound / scale);
        if !candidates.iter().any(|c| {
            c.coeffs
                .iter()
                .zip(&normalized.coeffs)
                .all(|(a, b)| (a - b).abs() < 1e-12)
                && (c.bound - normalized.bound).abs() < 1e-12
        }) {
            candidates.push(normalized);
        }
    }
    if binomial(candidates.len() + dim, dim - 1) > PRUNE_THRESHOLD {
        candidates = prune_redundant(dim, candidates)?;
    }
    let mut facets = candidates.clone();
    for k in 0..dim {
        let mut coeffs = vec![0.0; dim];
        coeffs[k] = -1.0;
        facets.push(ConstraintRow::new(coeffs, 0.0));
    }
    let count = binomial(facets.len(), dim - 1);
    if count > MAX_CANDIDATES {
        return Err(Error::CapExceeded {
            what: "vertex enumeration candidates",
            size: count,
            cap: MAX_CANDIDATES,
        });
    }

    let feasible =
        |p: &[f64]| p.iter().all(|x| *x >= -DEDUP_TOL) && candidates.iter().all(|r| r.slack(p) >= -DEDUP_TOL);
    let mut found = Vec::new();
    for active in Combinations::new(facets.len(), dim - 1) {
        let mut a: Vec<Vec<f64>> = active.iter().map(|&i| facets[i].coeffs.clone()).collect();
        let mut b: Vec<f64> = active.iter().map(|&i| facets[i].bound).collect();
        a.push(vec![1.0; dim]);
        b.push(1.0);
        let Some(p) = solve(a, b) else { continue };
        if feasible(&p) {
            let cleaned: Vec<f64> = p
                .iter()
                .map(|x| if x.abs() < 1e-13 { 0.0 } else { x.max(0.0) })
                .collect();
            found.push(cleaned);
        }
    }
    Ok(dedup_points(found, DEDUP_TOL))
}

/// Drops rows that cannot become violated given the others (LP test per row).
fn prune_redundant(dim: usize, rows: Vec<ConstraintRow>) -> Result<Vec<ConstraintRow>> {
    let mut kept = rows;
    let mut i = 0;
    while i < kept.len() {
        // maximize row_i · p subject to the other kept rows and the simplex
        let mut lp = LinearProgram::new(kept[i].coeffs.iter().map(|c| -c).collect());
        lp.add_row(vec![1.0; dim], Sense::Eq, 1.0);
        for (j, r) in kept.iter().enumerate() {
            if j != i {
                lp.add_row(r.coeffs.clone(), Sense::Le, r.bound);
            }
        }
        let sol = simplex_solve(&lp)?;
        match sol.status {
            LpStatus::Infeasible => return Ok(kept),
            LpStatus::Optimal if -sol.value <= kept[i].bound + 1e-12 => {
                kept.remove(i);
            }
            _ => i += 1,
        }
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(c: &[f64], b: f64) -> ConstraintRow {
        ConstraintRow::new(c.to_vec(), b)
    }

    #[test]
    fn no_rows_gives_unit_vectors() {
        let v = enumerate_polytope_vertices(3, &[]).unwrap();
        assert_eq!(v.len(), 3);
        assert!(Polytope::new(v).unwrap().same_vertices(&Polytope::simplex(3)));
    }

    #[test]
    fn contradictory_rows_are_empty() {
        let rows = [row(&[1.0, 0.0], 0.2), row(&[-1.0, 0.0], -0.5)];
        assert!(enumerate_polytope_vertices(2, &rows).unwrap().is_empty());
        assert!(matches!(
            LinearConstraintSet::new(2, rows.to_vec()),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn dimension_cap() {
        assert!(matches!(
            enumerate_polytope_vertices(13, &[]),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn one_outcome() {
        assert_eq!(enumerate_polytope_vertices(1, &[]).unwrap(), vec![vec![1.0]]);
    }

    #[test]
    fn pruning_keeps_region() {
        // many redundant copies of weak rows
        let mut rows = vec![row(&[1.0, 0.0, 0.0, 0.0], 0.5)];
        for k in 1..60 {
            rows.push(row(&[1.0, 0.0, 0.0, 0.0], 0.5 + k as f64 * 0.01));
            rows.push(row(&[0.0, 1.0, 1.0, 0.0], 1.0 + k as f64));
        }
        let v = enumerate_polytope_vertices(4, &rows).unwrap();
        let direct = enumerate_polytope_vertices(4, &rows[..1]).unwrap();
        assert!(Polytope::new(v).unwrap().same_vertices(&Polytope::new(direct).unwrap()));
    }

    #[test]
    fn membership_checks_rows() {
        let set = LinearConstraintSet::new(2, vec![row(&[-1.0, 0.0], -0.6)]).unwrap();
        assert!(set.contains_distribution(&[0.7, 0.3]).unwrap());
        assert!(!set.contains_distribution(&[0.5, 0.5]).unwrap());
        assert!(set.contains_distribution(&[0.7, 0.2]).is_err());
    }
}
