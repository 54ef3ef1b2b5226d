//! Dense two-phase primal simplex with Bland's rule.
//!
//! Problems are always `minimize c·x subject to rows, x >= 0`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        Self {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        self.rows.push(LpRow { coeffs, sense, rhs });
    }

    fn check(&self) -> Result<()> {
        let n = self.num_vars();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("objective has a non-finite coefficient".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.coeffs.len(),
                });
            }
            if row.coeffs.iter().any(|c| !c.is_finite()) || !row.rhs.is_finite() {
                return Err(Error::InvalidParameter(format!("row {i} has a non-finite entry")));
            }
        }
        Ok(())
    }

    /// Plain-text dump: `min c1 c2 ...` then one `a1 a2 ... <sense> b` line per row.
    pub fn to_text(&self) -> String {
        let mut out = String::from("min");
        for c in &self.objective {
            let _ = write!(out, " {c}");
        }
        out.push('\n');
        for row in &self.rows {
            for (k, a) in row.coeffs.iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{a}");
            }
            let _ = writeln!(out, " {} {}", row.sense.symbol(), row.rhs);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines
            .next()
            .ok_or_else(|| Error::InvalidParameter("empty LP text".into()))?;
        let mut tokens = head.split_whitespace();
        if tokens.next() != Some("min") {
            return Err(Error::InvalidParameter("LP text must start with 'min'".into()));
        }
        let objective = tokens.map(parse_num).collect::<Result<Vec<_>>>()?;
        let mut lp = LinearProgram::new(objective);
        for line in lines {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let pos = tokens
                .iter()
                .position(|t| matches!(*t, "<=" | "=" | ">="))
                .ok_or_else(|| Error::InvalidParameter(format!("no sense in LP row '{line}'")))?;
            let sense = match tokens[pos] {
                "<=" => Sense::Le,
                "=" => Sense::Eq,
                _ => Sense::Ge,
            };
            if pos + 2 != tokens.len() {
                return Err(Error::InvalidParameter(format!("malformed LP row '{line}'")));
            }
            let coeffs = tokens[..pos].iter().copied().map(parse_num).collect::<Result<_>>()?;
            lp.add_row(coeffs, sense, parse_num(tokens[pos + 1])?);
        }
        lp.check()?;
        Ok(lp)
    }
}

fn parse_num(t: &str) -> Result<f64> {
    t.parse()
        .map_err(|_| Error::InvalidParameter(format!("bad number '{t}' in LP text")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexSolution {
    pub status: LpStatus,
    /// Objective value at the optimum; `+inf` if infeasible, `-inf` if unbounded.
    pub value: f64,
    pub x: Vec<f64>,
    pub pivots: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_pivots: usize,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_pivots: 1_000_000,
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
        }
    }
}

pub fn simplex_solve(lp: &LinearProgram) -> Result<SimplexSolution> {
    simplex_solve_with(lp, SimplexOptions::default())
}

const PIVOT_TOL: f64 = 1e-9;

struct Tableau {
    width: usize,
    data: Vec<f64>,
    /// Constraint rows as first built, for reinversion.
    original: Vec<f64>,
    basis: Vec<usize>,
    rows: usize,
    pivots: usize,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.data[r * self.width + self.width - 1]
    }

    /// Row index of the objective (reduced cost) row.
    fn obj(&self) -> usize {
        self.rows
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.at(r, c);
        for v in &mut self.data[r * w..(r + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.data[r * w..(r + 1) * w].to_vec();
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Rebuilds the constraint rows from the original data for the current
    /// basis, discarding accumulated round-off. Leaves the tableau untouched
    /// if the basis matrix looks singular.
    fn refactor(&mut self) -> bool {
        let (w, m) = (self.width, self.rows);
        let saved = self.data[..m * w].to_vec();
        self.data[..m * w].copy_from_slice(&self.original);
        let mut assigned = vec![false; m];
        let mut basis = vec![0; m];
        for &c in &self.basis.clone() {
            let Some(r) = (0..m)
                .filter(|&r| !assigned[r])
                .max_by(|&a, &b| self.at(a, c).abs().total_cmp(&self.at(b, c).abs()))
            else {
                break;
            };
            if self.at(r, c).abs() < 1e-9 {
                self.data[..m * w].copy_from_slice(&saved);
                return false;
            }
            let p = self.at(r, c);
            for v in &mut self.data[r * w..(r + 1) * w] {
                *v /= p;
            }
            let pivot_row: Vec<f64> = self.data[r * w..(r + 1) * w].to_vec();
            for i in (0..m).filter(|&i| i != r) {
                let f = self.data[i * w + c];
                if f != 0.0 {
                    let row = &mut self.data[i * w..(i + 1) * w];
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                    row[c] = 0.0;
                }
            }
            assigned[r] = true;
            basis[r] = c;
        }
        self.basis = basis;
        true
    }

    /// Recomputes the objective row from scratch for costs `cost`.
    fn reprice(&mut self, cost: &[f64]) {
        let (w, obj) = (self.width, self.obj());
        let mut row = vec![0.0; w];
        row[..cost.len()].copy_from_slice(cost);
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost.get(b).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for (j, v) in row.iter_mut().enumerate() {
                    *v -= cb * self.data[r * w + j];
                }
            }
        }
        for &b in &self.basis {
            row[b] = 0.0;
        }
        self.data[obj * w..(obj + 1) * w].copy_from_slice(&row);
    }

    /// Optimizes, then reinverts and reprices to confirm the optimum; a
    /// degenerate tableau can drift far enough to stall on a stale row.
    fn solve(&mut self, cost: &[f64], allowed: &[bool], opts: &SimplexOptions) -> Result<bool> {
        self.reprice(cost);
        for _ in 0..8 {
            if !self.optimize(allowed, opts)? {
                return Ok(false);
            }
            if !self.refactor() {
                return Ok(true);
            }
            self.reprice(cost);
            let obj = self.obj();
            if !(0..self.width - 1).any(|j| allowed[j] && self.at(obj, j) < -opts.optimality_tol) {
                return Ok(true);
            }
        }
        Ok(true)
    }

    /// Runs Bland-rule pivots over the columns `allowed`. Returns false if
    /// the problem is unbounded in some allowed direction.
    fn optimize(&mut self, allowed: &[bool], opts: &SimplexOptions) -> Result<bool> {
        loop {
            if self.pivots >= opts.max_pivots {
                return Err(Error::IterationLimit(format!(
                    "simplex exceeded {} pivots",
                    opts.max_pivots
                )));
            }
            let obj = self.obj();
            let entering = (0..self.width - 1).find(|&j| allowed[j] && self.at(obj, j) < -opts.optimality_tol);
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, c);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        let tie = (ratio - lratio).abs() <= 1e-12 * (1.0 + lratio.abs());
                        if (!tie && ratio < lratio) || (tie && self.basis[r] < self.basis[lr]) {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
            match leave {
                None => return Ok(false),
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Power of two closest to `1 / max`, so scaling never rounds.
fn power_of_two_scale(max: f64) -> f64 {
    if max > 0.0 {
        (-max.log2().round()).exp2()
    } else {
        1.0
    }
}

/// Equilibrates rows, then columns, to a largest magnitude near one. Returns
/// the scaled program and the column factors (`x = factor * x_scaled`).
fn equilibrate(lp: &LinearProgram) -> (LinearProgram, Vec<f64>) {
    let n = lp.num_vars();
    let mut rows: Vec<LpRow> = lp
        .rows
        .iter()
        .map(|row| {
            let f = power_of_two_scale(row.coeffs.iter().fold(0.0, |m, a| m.max(a.abs())));
            LpRow {
                coeffs: row.coeffs.iter().map(|a| a * f).collect(),
                sense: row.sense,
                rhs: row.rhs * f,
            }
        })
        .collect();
    let factors: Vec<f64> = (0..n)
        .map(|j| power_of_two_scale(rows.iter().fold(0.0, |m, r| m.max(r.coeffs[j].abs()))))
        .collect();
    for row in &mut rows {
        for (a, f) in row.coeffs.iter_mut().zip(&factors) {
            *a *= f;
        }
    }
    let objective = lp.objective.iter().zip(&factors).map(|(c, f)| c * f).collect();
    (LinearProgram { objective, rows }, factors)
}

pub fn simplex_solve_with(lp: &LinearProgram, opts: SimplexOptions) -> Result<SimplexSolution> {
    lp.check()?;
    let (scaled, factors) = equilibrate(lp);
    let mut sol = solve_tableau(&scaled, opts)?;
    for (x, f) in sol.x.iter_mut().zip(&factors) {
        *x *= f;
    }
    if sol.status == LpStatus::Optimal {
        sol.value = lp.objective.iter().zip(&sol.x).map(|(c, v)| c * v).sum();
    }
    Ok(sol)
}

fn solve_tableau(lp: &LinearProgram, opts: SimplexOptions) -> Result<SimplexSolution> {
    let n = lp.num_vars();
    let m = lp.rows.len();

    // Normalize rows to nonnegative right-hand sides.
    let rows: Vec<(Vec<f64>, Sense, f64)> = lp
        .rows
        .iter()
        .map(|row| {
            if row.rhs < 0.0 {
                let sense = match row.sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
                (row.coeffs.iter().map(|a| -a).collect(), sense, -row.rhs)
            } else {
                (row.coeffs.clone(), row.sense, row.rhs)
            }
        })
        .collect();

    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let total = n + n_slack + n_art;
    let width = total + 1;
    let mut t = Tableau {
        width,
        data: vec![0.0; (m + 1) * width],
        original: Vec::new(),
        basis: vec![0; m],
        rows: m,
        pivots: 0,
    };
    let art_start = n + n_slack;
    let (mut slack, mut art) = (n, art_start);
    for (i, (coeffs, sense, rhs)) in rows.iter().enumerate() {
        let row = &mut t.data[i * width..(i + 1) * width];
        row[..n].copy_from_slice(coeffs);
        row[total] = *rhs;
        match sense {
            Sense::Le => {
                row[slack] = 1.0;
                t.basis[i] = slack;
                slack += 1;
            }
            Sense::Ge => {
                row[slack] = -1.0;
                slack += 1;
                row[art] = 1.0;
                t.basis[i] = art;
                art += 1;
            }
            Sense::Eq => {
                row[art] = 1.0;
                t.basis[i] = art;
                art += 1;
            }
        }
    }

    t.original = t.data[..m * width].to_vec();

    let scale = 1.0 + rows.iter().map(|r| r.2).fold(0.0, f64::max);

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        let mut cost = vec![0.0; total];
        for c in &mut cost[art_start..] {
            *c = 1.0;
        }
        t.solve(&cost, &vec![true; total], &opts)?;
        let obj = t.obj();
        let infeasibility = -t.rhs(obj);
        if infeasibility > opts.feasibility_tol * scale {
            return Ok(SimplexSolution {
                status: LpStatus::Infeasible,
                value: f64::INFINITY,
                x: vec![0.0; n],
                pivots: t.pivots,
            });
        }
        // Drive remaining artificials out of the basis where possible.
        for r in 0..m {
            if t.basis[r] >= art_start {
                if let Some(c) = (0..art_start).find(|&c| t.at(r, c).abs() > 1e-9) {
                    t.pivot(r, c);
                }
            }
        }
    }

    // Phase 2 on the real objective.
    let allowed: Vec<bool> = (0..total).map(|j| j < art_start).collect();
    let bounded = t.solve(&lp.objective, &allowed, &opts)?;
    let mut x = vec![0.0; n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(r).max(0.0);
        }
    }
    if !bounded {
        return Ok(SimplexSolution {
            status: LpStatus::Unbounded,
            value: f64::NEG_INFINITY,
            x,
            pivots: t.pivots,
        });
    }
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(SimplexSolution {
        status: LpStatus::Optimal,
        value,
        x,
        pivots: t.pivots,
    })
}
