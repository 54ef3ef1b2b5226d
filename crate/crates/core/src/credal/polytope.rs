use serde::{Deserialize, Serialize};

use super::{ConstraintRow, DEDUP_TOL, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::linalg::{dot, null_space, orthonormal_basis, Combinations};
use crate::lp::{simplex_solve, LinearProgram, LpStatus, Sense};

/// A credal set given by its extreme distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vec<f64>>,
}

/// Inequality and equality rows describing a polytope inside the simplex.
/// Rows read `coeffs · p <= bound` and `coeffs · p = bound`; the simplex
/// constraints themselves are implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct HRepresentation {
    pub inequalities: Vec<ConstraintRow>,
    pub equalities: Vec<ConstraintRow>,
}

pub(crate) fn check_distribution(p: &[f64], tol: f64) -> Result<()> {
    if p.iter().any(|x| !x.is_finite() || *x < -tol) {
        return Err(Error::InvalidDistribution(format!("{p:?} has a negative entry")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::InvalidDistribution(format!("{p:?} sums to {total}")));
    }
    Ok(())
}

pub(crate) fn same_point(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

pub(crate) fn dedup_points(points: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| same_point(q, &p, tol)) {
            out.push(p);
        }
    }
    out
}

impl Polytope {
    /// Builds a polytope from probability vectors. Each must be nonnegative
    /// and sum to one within 1e-9; near-duplicates are merged.
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vertices
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidParameter("a polytope needs at least one vertex".into()))?;
        if dim == 0 {
            return Err(Error::InvalidParameter("zero-dimensional distribution".into()));
        }
        for v in &vertices {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            check_distribution(v, DEDUP_TOL)?;
        }
        let vertices = vertices
            .into_iter()
            .map(|v| v.into_iter().map(|x| x.max(0.0)).collect())
            .collect();
        Ok(Self {
            dim,
            vertices: dedup_points(vertices, DEDUP_TOL),
        })
    }

    pub fn point(p: Vec<f64>) -> Result<Self> {
        Self::new(vec![p])
    }

    /// The whole probability simplex over `dim` outcomes.
    pub fn simplex(dim: usize) -> Self {
        let vertices = (0..dim)
            .map(|k| (0..dim).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { dim, vertices }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn centroid(&self) -> Vec<f64> {
        let k = self.vertices.len() as f64;
        (0..self.dim)
            .map(|j| self.vertices.iter().map(|v| v[j]).sum::<f64>() / k)
            .collect()
    }

    /// Set equality within the dedup tolerance.
    pub fn same_vertices(&self, other: &Polytope) -> bool {
        self.dim == other.dim
            && self.vertices.len() == other.vertices.len()
            && self
                .vertices
                .iter()
                .all(|v| other.vertices.iter().any(|w| same_point(v, w, DEDUP_TOL)))
    }

    /// Whether `p` is a convex combination of the vertices, decided by a
    /// feasibility LP over the mixture weights.
    pub fn contains_distribution(&self, p: &[f64]) -> Result<bool> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.len(),
            });
        }
        check_distribution(p, MEMBERSHIP_TOL)?;
        let k = self.vertices.len();
        let mut lp = LinearProgram::new(vec![0.0; k]);
        lp.add_row(vec![1.0; k], Sense::Eq, 1.0);
        for j in 0..self.dim {
            lp.add_row(self.vertices.iter().map(|v| v[j]).collect(), Sense::Eq, p[j]);
        }
        Ok(simplex_solve(&lp)?.status == LpStatus::Optimal)
    }

    /// Facet description of the polytope within the simplex plane.
    ///
    /// Works in the affine hull of the vertices: equalities pin the
    /// directions the hull does not span, and each facet is a supporting
    /// hyperplane through affinely independent vertices.
    pub fn h_representation(&self) -> HRepresentation {
        const TOL: f64 = 1e-10;
        let d = self.dim;
        let origin = &self.vertices[0];
        let directions: Vec<Vec<f64>> = self.vertices[1..]
            .iter()
            .map(|v| v.iter().zip(origin).map(|(a, b)| a - b).collect())
            .collect();
        let hull = orthonormal_basis(&directions, 1e-9);
        let r = hull.len();

        // Directions orthogonal to both the hull and the all-ones vector.
        let mut spanning = hull.clone();
        spanning.push(vec![1.0; d]);
        for k in 0..d {
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            spanning.push(e);
        }
        let full = orthonormal_basis(&spanning, 1e-9);
        let equalities = full[(r + 1).min(full.len())..]
            .iter()
            .map(|w| ConstraintRow::new(w.clone(), dot(w, origin)))
            .collect();

        let mut inequalities: Vec<ConstraintRow> = Vec::new();
        if r > 0 {
            let projected: Vec<Vec<f64>> = self
                .vertices
                .iter()
                .map(|v| {
                    let shifted: Vec<f64> = v.iter().zip(origin).map(|(a, b)| a - b).collect();
                    hull.iter().map(|b| dot(b, &shifted)).collect()
                })
                .collect();
            let mut seen: Vec<(Vec<f64>, f64)> = Vec::new();
            for combo in Combinations::new(projected.len(), r) {
                // Unknowns (n_1..n_r, h) with n·y_i - h = 0 for each chosen vertex.
                let rows: Vec<Vec<f64>> = combo
                    .iter()
                    .map(|&i| {
                        let mut row = projected[i].clone();
                        row.push(-1.0);
                        row
                    })
                    .collect();
                let ns = null_space(&rows, r + 1, 1e-10);
                if ns.len() != 1 {
                    continue;
                }
                let mut normal = ns[0][..r].to_vec();
                let mut offset = ns[0][r];
                let norm = dot(&normal, &normal).sqrt();
                if norm < TOL {
                    continue;
                }
                normal.iter_mut().for_each(|x| *x /= norm);
                offset /= norm;
                let sides: Vec<f64> = projected.iter().map(|y| dot(&normal, y) - offset).collect();
                let above = sides.iter().any(|s| *s > 1e-9);
                let below = sides.iter().any(|s| *s < -1e-9);
                if above && below {
                    continue;
                }
                if above {
                    normal.iter_mut().for_each(|x| *x = -*x);
                    offset = -offset;
                }
                if seen
                    .iter()
                    .any(|(n, h)| same_point(n, &normal, 1e-8) && (h - offset).abs() < 1e-8)
                {
                    continue;
                }
                seen.push((normal.clone(), offset));
                // Map n·B^T(p - origin) <= h back to the original coordinates.
                let coeffs: Vec<f64> = (0..d)
                    .map(|j| hull.iter().zip(&normal).map(|(b, n)| b[j] * n).sum())
                    .collect();
                let bound = offset + dot(&coeffs, origin);
                inequalities.push(ConstraintRow::new(coeffs, bound));
            }
        }
        HRepresentation {
            inequalities,
            equalities,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedups_and_validates() {
        let p = Polytope::new(vec![vec![0.8, 0.2], vec![0.8, 0.2 + 1e-12], vec![0.6, 0.4]]).unwrap();
        assert_eq!(p.vertex_count(), 2);
        assert!(Polytope::new(vec![vec![0.8, 0.3]]).is_err());
        assert!(Polytope::new(vec![]).is_err());
        assert!(Polytope::new(vec![vec![0.5, 0.5], vec![1.0, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn membership_by_lp() {
        let p = Polytope::new(vec![vec![0.8, 0.2], vec![0.6, 0.4]]).unwrap();
        assert!(p.contains_distribution(&[0.7, 0.3]).unwrap());
        assert!(!p.contains_distribution(&[0.5, 0.5]).unwrap());
        assert!(p.contains_distribution(&[0.8, 0.2]).unwrap());
        assert!(p.contains_distribution(&[0.5, 0.25, 0.25]).is_err());
    }

    #[test]
    fn segment_has_two_facets() {
        let p = Polytope::new(vec![vec![0.8, 0.2], vec![0.6, 0.4]]).unwrap();
        let h = p.h_representation();
        assert_eq!(h.inequalities.len(), 2);
        assert!(h.equalities.is_empty());
        for v in p.vertices() {
            for row in &h.inequalities {
                assert!(row.slack(v) >= -1e-9);
            }
        }
        assert!(h.inequalities.iter().any(|r| r.slack(&[0.5, 0.5]) < -1e-6));
        assert!(h.inequalities.iter().any(|r| r.slack(&[0.9, 0.1]) < -1e-6));
    }

    #[test]
    fn point_has_only_equalities() {
        let p = Polytope::point(vec![0.2, 0.3, 0.5]).unwrap();
        let h = p.h_representation();
        assert!(h.inequalities.is_empty());
        assert_eq!(h.equalities.len(), 2);
        for row in &h.equalities {
            assert!(row.slack(&[0.2, 0.3, 0.5]).abs() < 1e-12);
            assert!(row.slack(&[0.3, 0.2, 0.5]).abs() > 1e-6 || row.coeffs[2] != 0.0);
        }
    }

    #[test]
    fn simplex_facets_are_nonnegativity() {
        let h = Polytope::simplex(3).h_representation();
        assert_eq!(h.inequalities.len(), 3);
        assert!(h.equalities.is_empty());
        assert!(h.inequalities.iter().all(|r| r.slack(&[1.0 / 3.0; 3]) > 0.0));
    }
}
