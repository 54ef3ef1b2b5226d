//! Interior-point approximations of type-1 bounds. Transparent priors Θ are
//! moved inside the product of simplices to push the posterior ratio up or
//! down; every result is attained by some mixture of vertices, so it never
//! lies outside the exact interval.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bn::eliminate;
use crate::ccm::{decode, TransformedNetwork};
use crate::error::{Error, Result};
use crate::query::{event_mass, BoundsResult, EventMass, Method, Query, Work};
use crate::type1::joint_masses;

/// Smallest entry allowed in Θ during optimization.
pub const THETA_FLOOR: f64 = 1e-9;

/// Largest `|q| × ∏ m_i` for which Θ is evaluated from a precomputed table.
pub const TABLE_CAP: u128 = 1 << 16;

/// One distribution per transparent variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaVector(Vec<Vec<f64>>);

impl ThetaVector {
    pub fn new(theta: Vec<Vec<f64>>) -> Result<Self> {
        for row in &theta {
            if row.is_empty() || row.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::InvalidDistribution(format!("bad Θ component {row:?}")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidDistribution(format!("Θ component sums to {s}")));
            }
        }
        Ok(Self(theta))
    }

    pub fn uniform(arities: &[usize]) -> Self {
        Self(arities.iter().map(|&m| vec![1.0 / m as f64; m]).collect())
    }

    /// Point mass on one transparent assignment.
    pub fn vertex(arities: &[usize], assignment: &[usize]) -> Self {
        Self(
            arities
                .iter()
                .zip(assignment)
                .map(|(&m, &j)| (0..m).map(|k| if k == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    /// Independent Dirichlet(1, …, 1) draws, floored.
    pub fn random(arities: &[usize], rng: &mut impl Rng) -> Self {
        let theta = arities
            .iter()
            .map(|&m| {
                let w: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
                let s: f64 = w.iter().sum();
                project_floored(&w.iter().map(|x| x / s).collect::<Vec<_>>(), THETA_FLOOR)
            })
            .collect();
        Self(theta)
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Vec<f64>> {
        self.0
    }

    fn is_interior(&self) -> bool {
        self.0
            .iter()
            .all(|r| r.len() == 1 || r.iter().all(|x| *x >= THETA_FLOOR * 0.5))
    }

    fn distance(&self, other: &ThetaVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Euclidean projection onto `{θ : θ_j >= floor, Σθ = 1}`.
pub fn project_floored(v: &[f64], floor: f64) -> Vec<f64> {
    let m = v.len();
    if m == 1 {
        return vec![1.0];
    }
    let budget = 1.0 - floor * m as f64;
    // project v - floor onto the simplex of total `budget` (sort-based)
    let shifted: Vec<f64> = v.iter().map(|x| x - floor).collect();
    let mut sorted = shifted.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let t = (cumulative - budget) / (k + 1) as f64;
        if s - t > 0.0 {
            tau = t;
        }
    }
    shifted.iter().map(|x| (x - tau).max(0.0) + floor).collect()
}

/// Quantities needed by all interior methods at one Θ.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaEvaluation {
    /// p(x_q ∈ A, e) under Θ.
    pub event: f64,
    /// p(e) under Θ.
    pub evidence: f64,
    /// p(z'_i = j | x_q ∈ A, e).
    pub posterior_event: Vec<Vec<f64>>,
    /// p(z'_i = j | e).
    pub posterior_evidence: Vec<Vec<f64>>,
}

impl ThetaEvaluation {
    pub fn log_likelihood(&self) -> Result<f64> {
        if self.evidence <= 0.0 {
            return Err(Error::ZeroProbabilityEvidence);
        }
        if self.event <= 0.0 {
            return Err(Error::ZeroLikelihood);
        }
        Ok(self.event.ln() - self.evidence.ln())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Table when it fits under [`TABLE_CAP`], elimination otherwise.
    #[default]
    Auto,
    /// One elimination keeping every transparent, then weighted sums.
    Table,
    /// One elimination per transparent at every Θ.
    Elimination,
}

/// Evaluates the posterior ratio and transparent posteriors at any Θ.
pub struct ThetaModel<'a> {
    t: &'a TransformedNetwork,
    query: Query,
    arities: Vec<usize>,
    table: Option<Vec<EventMass>>,
}

impl<'a> ThetaModel<'a> {
    pub fn new(t: &'a TransformedNetwork, query: &Query, backend: Backend) -> Result<Self> {
        query.check(t.base())?;
        let size = t
            .combination_count()
            .saturating_mul(t.base().cardinality(query.target) as u128);
        let use_table = match backend {
            Backend::Auto => size <= TABLE_CAP,
            Backend::Table => true,
            Backend::Elimination => false,
        };
        let table = if use_table {
            Some(joint_masses(t, query, usize::try_from(size).unwrap_or(usize::MAX))?)
        } else {
            None
        };
        Ok(Self {
            t,
            query: query.clone(),
            arities: t.arities(),
            table,
        })
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn query(&self) -> &Query {
        &self.query
    }

    fn check_theta(&self, theta: &ThetaVector) -> Result<()> {
        let ok = theta.0.len() == self.arities.len() && theta.0.iter().zip(&self.arities).all(|(r, &m)| r.len() == m);
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.arities.len(),
                got: theta.0.len(),
            })
        }
    }

    pub fn evaluate(&self, theta: &ThetaVector) -> Result<ThetaEvaluation> {
        self.check_theta(theta)?;
        match &self.table {
            Some(table) => Ok(self.evaluate_table(table, theta)),
            None => self.evaluate_elimination(theta),
        }
    }

    fn evaluate_table(&self, table: &[EventMass], theta: &ThetaVector) -> ThetaEvaluation {
        let mut pa: Vec<Vec<f64>> = self.arities.iter().map(|&m| vec![0.0; m]).collect();
        let mut pe = pa.clone();
        let (mut event, mut evidence) = (0.0, 0.0);
        for (idx, m) in table.iter().enumerate() {
            if m.evidence == 0.0 {
                continue;
            }
            let z = decode(idx, &self.arities);
            let w: f64 = z.iter().zip(&theta.0).map(|(&j, row)| row[j]).product();
            let (a, e) = (w * m.event, w * m.evidence);
            event += a;
            evidence += e;
            for (i, &j) in z.iter().enumerate() {
                pa[i][j] += a;
                pe[i][j] += e;
            }
        }
        normalize_rows(&mut pa, event);
        normalize_rows(&mut pe, evidence);
        ThetaEvaluation {
            event,
            evidence,
            posterior_event: pa,
            posterior_evidence: pe,
        }
    }

    fn evaluate_elimination(&self, theta: &ThetaVector) -> Result<ThetaEvaluation> {
        let net = self.t.with_priors(&theta.0)?;
        let card = self.t.base().cardinality(self.query.target);
        let mut pa = Vec::with_capacity(self.arities.len());
        let mut pe = Vec::with_capacity(self.arities.len());
        let (mut event, mut evidence) = (0.0, 0.0);
        for (z, &m) in self.t.transparents().iter().zip(&self.arities) {
            // scope [q, z'_i] since the target id is below every transparent id
            let f = eliminate(&net, &[self.query.target, z.id], &self.query.evidence)?;
            let mut a = vec![0.0; m];
            let mut e = vec![0.0; m];
            for v in 0..card {
                for j in 0..m {
                    let p = f.values()[v * m + j];
                    e[j] += p;
                    if self.query.in_event(v) {
                        a[j] += p;
                    }
                }
            }
            event = a.iter().sum();
            evidence = e.iter().sum();
            pa.push(a);
            pe.push(e);
        }
        if self.arities.is_empty() {
            let m = event_mass(&net, &self.query)?;
            event = m.event;
            evidence = m.evidence;
        }
        normalize_rows(&mut pa, event);
        normalize_rows(&mut pe, evidence);
        Ok(ThetaEvaluation {
            event,
            evidence,
            posterior_event: pa,
            posterior_evidence: pe,
        })
    }

    pub fn log_likelihood(&self, theta: &ThetaVector) -> Result<f64> {
        self.evaluate(theta)?.log_likelihood()
    }

    /// `[p(z'_i=j | A, e) − p(z'_i=j | e)] / θ_ij` for every component.
    pub fn gradient(&self, theta: &ThetaVector) -> Result<Vec<Vec<f64>>> {
        if !theta.is_interior() {
            return Err(Error::InvalidParameter("gradient needs an interior Θ".into()));
        }
        let ev = self.evaluate(theta)?;
        ev.log_likelihood()?;
        Ok(gradient_from(&ev, theta))
    }
}

fn normalize_rows(rows: &mut [Vec<f64>], total: f64) {
    if total > 0.0 {
        for r in rows.iter_mut() {
            for x in r.iter_mut() {
                *x /= total;
            }
        }
    }
}

fn gradient_from(ev: &ThetaEvaluation, theta: &ThetaVector) -> Vec<Vec<f64>> {
    ev.posterior_event
        .iter()
        .zip(&ev.posterior_evidence)
        .zip(&theta.0)
        .map(|((a, e), th)| a.iter().zip(e).zip(th).map(|((a, e), t)| (a - e) / t).collect())
        .collect()
}

/// `L(Θ) = log p(x_q ∈ A, e) − log p(e)` with transparent priors Θ.
pub fn log_posterior_likelihood(t: &TransformedNetwork, theta: &ThetaVector, query: &Query) -> Result<f64> {
    ThetaModel::new(t, query, Backend::Elimination)?.log_likelihood(theta)
}

/// Gradient of `L` in the unnormalized coordinates θ_ij.
pub fn gradient_theta(t: &TransformedNetwork, theta: &ThetaVector, query: &Query) -> Result<Vec<Vec<f64>>> {
    ThetaModel::new(t, query, Backend::Elimination)?.gradient(theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Maximize => 1.0,
            Direction::Minimize => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AscentOptions {
    pub direction: Direction,
    pub max_steps: usize,
    /// Stop once an accepted step changes L by less than this.
    pub tol: f64,
    /// Line search gives up below this step length.
    pub min_step: f64,
    /// Number of starts: the uniform Θ, then Dirichlet(1) draws.
    pub restarts: usize,
    pub seed: u64,
    pub backend: Backend,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            direction: Direction::Maximize,
            max_steps: 10_000,
            tol: 1e-10,
            min_step: 1e-12,
            restarts: 8,
            seed: 0,
            backend: Backend::Auto,
        }
    }
}

/// Outcome of the best start of an interior-point run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AscentReport {
    pub theta: ThetaVector,
    /// L(Θ) after every accepted step, starting with the initial value.
    pub trajectory: Vec<f64>,
    pub converged: bool,
    pub steps: usize,
    /// `exp L` at the final Θ.
    pub bound: f64,
    /// Final bound of every start, in start order.
    pub start_bounds: Vec<f64>,
    pub evaluations: usize,
}

fn starts(arities: &[usize], opts: &AscentOptions) -> Vec<ThetaVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = vec![ThetaVector::uniform(arities)];
    for _ in 1..opts.restarts.max(1) {
        out.push(ThetaVector::random(arities, &mut rng));
    }
    out
}

fn best_of(mut runs: Vec<AscentReport>, direction: Direction) -> AscentReport {
    let start_bounds: Vec<f64> = runs.iter().map(|r| r.bound).collect();
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let sign = direction.sign();
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if sign * r.bound > sign * runs[best].bound {
            best = i;
        }
    }
    let mut report = runs.swap_remove(best);
    report.start_bounds = start_bounds;
    report.evaluations = evaluations;
    report
}

/// Report for a query whose event has probability zero under every Θ.
fn zero_report(theta: ThetaVector) -> AscentReport {
    AscentReport {
        theta,
        trajectory: vec![f64::NEG_INFINITY],
        converged: true,
        steps: 0,
        bound: 0.0,
        start_bounds: Vec::new(),
        evaluations: 1,
    }
}

fn add_scaled(theta: &ThetaVector, dir: &[Vec<f64>], step: f64) -> ThetaVector {
    ThetaVector(
        theta
            .0
            .iter()
            .zip(dir)
            .map(|(row, g)| {
                let moved: Vec<f64> = row.iter().zip(g).map(|(t, g)| t + step * g).collect();
                project_floored(&moved, THETA_FLOOR)
            })
            .collect(),
    )
}

fn max_abs(rows: &[Vec<f64>]) -> f64 {
    rows.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Projected gradient ascent (or descent) of L from several starts in
/// parallel; the best final bound wins.
pub fn projected_gradient_ascent(t: &TransformedNetwork, query: &Query, opts: &AscentOptions) -> Result<AscentReport> {
    let model = ThetaModel::new(t, query, opts.backend)?;
    let runs = starts(model.arities(), opts)
        .into_par_iter()
        .map(|start| ascend_from(&model, start, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(best_of(runs, opts.direction))
}

fn ascend_from(model: &ThetaModel<'_>, start: ThetaVector, opts: &AscentOptions) -> Result<AscentReport> {
    let sign = opts.direction.sign();
    let mut theta = start;
    let mut ev = model.evaluate(&theta)?;
    let mut evaluations = 1;
    let mut l = match ev.log_likelihood() {
        Ok(l) => l,
        Err(Error::ZeroLikelihood) => return Ok(zero_report(theta)),
        Err(e) => return Err(e),
    };
    let mut trajectory = vec![l];
    let mut step = 1.0f64;
    let mut steps = 0;
    let mut converged = false;
    while steps < opts.max_steps {
        steps += 1;
        let grad: Vec<Vec<f64>> = gradient_from(&ev, &theta)
            .into_iter()
            .map(|r| r.into_iter().map(|g| sign * g).collect())
            .collect();
        let scale = max_abs(&grad);
        if scale == 0.0 {
            converged = true;
            break;
        }
        // normalized direction; the first trial may cross the whole simplex
        let dir: Vec<Vec<f64>> = grad.iter().map(|r| r.iter().map(|g| g / scale).collect()).collect();
        step = (step * 4.0).min(1.0);
        let mut accepted = None;
        while step >= opts.min_step {
            let cand = add_scaled(&theta, &dir, step);
            if cand.distance(&theta) == 0.0 {
                break;
            }
            let cev = model.evaluate(&cand)?;
            evaluations += 1;
            if let Ok(cl) = cev.log_likelihood() {
                if sign * cl > sign * l {
                    accepted = Some((cand, cev, cl));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((cand, cev, cl)) = accepted else {
            converged = true;
            break;
        };
        let change = (cl - l).abs();
        theta = cand;
        ev = cev;
        l = cl;
        trajectory.push(l);
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(AscentReport {
        theta,
        trajectory,
        converged,
        steps,
        bound: l.exp(),
        start_bounds: Vec::new(),
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QemOptions {
    pub max_iterations: usize,
    /// Stop once L improves by less than this.
    pub tol: f64,
    /// Inner gradient steps per M-step.
    pub inner_steps: usize,
    /// Halvings toward Θ^k when a candidate would lower L.
    pub max_halvings: usize,
    pub restarts: usize,
    pub seed: u64,
    pub backend: Backend,
}

impl Default for QemOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tol: 1e-10,
            inner_steps: 50,
            max_halvings: 60,
            restarts: 8,
            seed: 0,
            backend: Backend::Auto,
        }
    }
}

/// `Σ_ij (p(z'_i=j | A, e) − p(z'_i=j | e)) log θ_ij`.
fn q_objective(weights: &[Vec<f64>], theta: &ThetaVector) -> f64 {
    weights
        .iter()
        .zip(&theta.0)
        .flat_map(|(w, t)| w.iter().zip(t).map(|(w, t)| w * t.ln()))
        .sum()
}

/// Quasi-Bayesian EM: maximizes L (the upper bound). A candidate from the
/// M-step is accepted only if Q strictly increases; if it would lower L it
/// is pulled back toward Θ^k by halving.
pub fn qem_run(t: &TransformedNetwork, query: &Query, opts: &QemOptions) -> Result<AscentReport> {
    Ok(best_of(qem_runs(t, query, opts)?, Direction::Maximize))
}

/// Every restart of [`qem_run`], in start order.
pub fn qem_runs(t: &TransformedNetwork, query: &Query, opts: &QemOptions) -> Result<Vec<AscentReport>> {
    let model = ThetaModel::new(t, query, opts.backend)?;
    let ascent = AscentOptions {
        restarts: opts.restarts,
        seed: opts.seed,
        ..AscentOptions::default()
    };
    starts(model.arities(), &ascent)
        .into_par_iter()
        .map(|start| qem_from(&model, start, opts))
        .collect()
}

/// Lower bound through conjugacy: `1 − upper(complement)`.
pub fn qem_lower(t: &TransformedNetwork, query: &Query, opts: &QemOptions) -> Result<AscentReport> {
    let complement = query.complement(t.base().cardinality(query.target));
    let mut report = qem_run(t, &complement, opts)?;
    report.bound = 1.0 - report.bound;
    report.start_bounds.iter_mut().for_each(|b| *b = 1.0 - *b);
    Ok(report)
}

fn qem_from(model: &ThetaModel<'_>, start: ThetaVector, opts: &QemOptions) -> Result<AscentReport> {
    let mut theta = start;
    let mut ev = model.evaluate(&theta)?;
    let mut evaluations = 1;
    let mut l = match ev.log_likelihood() {
        Ok(l) => l,
        Err(Error::ZeroLikelihood) => return Ok(zero_report(theta)),
        Err(e) => return Err(e),
    };
    let mut trajectory = vec![l];
    let mut converged = false;
    let mut steps = 0;
    while steps < opts.max_iterations {
        steps += 1;
        // E-step
        let weights: Vec<Vec<f64>> = ev
            .posterior_event
            .iter()
            .zip(&ev.posterior_evidence)
            .map(|(a, e)| a.iter().zip(e).map(|(a, e)| a - e).collect())
            .collect();
        let q0 = q_objective(&weights, &theta);
        // M-step: inner projected gradient ascent on Q from Θ^k
        let mut inner = theta.clone();
        let mut q_inner = q0;
        let mut step = 1.0f64;
        for _ in 0..opts.inner_steps {
            let grad: Vec<Vec<f64>> = weights
                .iter()
                .zip(&inner.0)
                .map(|(w, t)| w.iter().zip(t).map(|(w, t)| w / t).collect())
                .collect();
            let scale = max_abs(&grad);
            if scale == 0.0 {
                break;
            }
            let dir: Vec<Vec<f64>> = grad.iter().map(|r| r.iter().map(|g| g / scale).collect()).collect();
            step = (step * 4.0).min(1.0);
            let mut moved = false;
            while step >= 1e-12 {
                let cand = add_scaled(&inner, &dir, step);
                let qc = q_objective(&weights, &cand);
                if qc > q_inner {
                    inner = cand;
                    q_inner = qc;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if q_inner <= q0 {
            converged = true;
            break;
        }
        // accept only candidates that raise Q and do not lower L
        let mut cand = inner;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            if q_objective(&weights, &cand) > q0 {
                let cev = model.evaluate(&cand)?;
                evaluations += 1;
                if let Ok(cl) = cev.log_likelihood() {
                    if cl >= l {
                        accepted = Some((cand, cev, cl));
                        break;
                    }
                }
            }
            cand = ThetaVector(
                cand.0
                    .iter()
                    .zip(&theta.0)
                    .map(|(c, t)| c.iter().zip(t).map(|(c, t)| 0.5 * (c + t)).collect())
                    .collect(),
            );
        }
        let Some((cand, cev, cl)) = accepted else {
            converged = true;
            break;
        };
        let gain = cl - l;
        theta = cand;
        ev = cev;
        l = cl;
        trajectory.push(l);
        if gain < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(AscentReport {
        theta,
        trajectory,
        converged,
        steps,
        bound: l.exp(),
        start_bounds: Vec::new(),
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub initial_temperature: f64,
    /// Geometric cooling factor per step.
    pub cooling: f64,
    pub steps: usize,
    pub seed: u64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            initial_temperature: 1.0,
            cooling: 0.995,
            steps: 5000,
            seed: 0,
        }
    }
}

/// Simulated annealing over transparent assignments, one chain for each
/// bound. Every visited state is a true vertex, so the result is an inner
/// approximation of the exact interval.
pub fn anneal_search(t: &TransformedNetwork, query: &Query, schedule: &AnnealSchedule) -> Result<BoundsResult> {
    query.check(t.base())?;
    if !(schedule.initial_temperature > 0.0 && schedule.cooling > 0.0 && schedule.cooling <= 1.0) {
        return Err(Error::InvalidParameter("annealing needs T0 > 0 and 0 < α <= 1".into()));
    }
    let arities = t.arities();
    let mut cache: HashMap<usize, Option<f64>> = HashMap::new();
    let mut value = |idx: usize| -> Result<Option<f64>> {
        if let Some(v) = cache.get(&idx) {
            return Ok(*v);
        }
        let net = t.instantiate_transparent(&decode(idx, &arities))?;
        let v = event_mass(&net, query)?.ratio();
        cache.insert(idx, v);
        Ok(v)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let movable: Vec<usize> = (0..arities.len()).filter(|&i| arities[i] > 1).collect();

    let mut best: [Option<(f64, usize)>; 2] = [None, None];
    for (slot, sign) in [(0usize, -1.0f64), (1, 1.0)] {
        let mut state: Vec<usize> = arities.iter().map(|&m| rng.random_range(0..m)).collect();
        let mut idx = t.assignment_index(&state);
        let mut current = value(idx)?;
        let mut temperature = schedule.initial_temperature;
        let record = |v: Option<f64>, i: usize, best: &mut Option<(f64, usize)>| {
            if let Some(v) = v {
                if best.is_none_or(|(b, _)| sign * v > sign * b) {
                    *best = Some((v, i));
                }
            }
        };
        record(current, idx, &mut best[slot]);
        if !movable.is_empty() {
            for _ in 0..schedule.steps {
                let i = movable[rng.random_range(0..movable.len())];
                let old = state[i];
                let mut new = rng.random_range(0..arities[i] - 1);
                if new >= old {
                    new += 1;
                }
                state[i] = new;
                let cand_idx = t.assignment_index(&state);
                let cand = value(cand_idx)?;
                let accept = match (current, cand) {
                    (_, None) => false,
                    (None, Some(_)) => true,
                    (Some(c), Some(n)) => {
                        let delta = sign * (n - c);
                        delta >= 0.0 || rng.random::<f64>() < (delta / temperature).exp()
                    }
                };
                if accept {
                    idx = cand_idx;
                    current = cand;
                    record(current, idx, &mut best[slot]);
                } else {
                    state[i] = old;
                }
                temperature *= schedule.cooling;
            }
        }
    }
    let evaluations = cache.len();
    let zero_mass: Vec<_> = {
        let mut z: Vec<usize> = cache.iter().filter(|(_, v)| v.is_none()).map(|(k, _)| *k).collect();
        z.sort_unstable();
        z.into_iter().map(|k| decode(k, &arities)).collect()
    };
    let (Some((lower, imin)), Some((upper, imax))) = (best[0], best[1]) else {
        return Err(Error::ZeroProbabilityEvidence);
    };
    Ok(BoundsResult {
        lower,
        upper,
        argmin: Some(decode(imin, &arities)),
        argmax: Some(decode(imax, &arities)),
        method: Method::Anneal,
        work: Work {
            evaluations,
            iterations: 2 * schedule.steps,
            skipped_zero_mass: zero_mass.len(),
        },
        zero_mass,
    })
}

/// Gradient-ascent bounds for both ends (the lower end by descent).
pub fn gradient_bounds(t: &TransformedNetwork, query: &Query, opts: &AscentOptions) -> Result<BoundsResult> {
    let up = projected_gradient_ascent(
        t,
        query,
        &AscentOptions {
            direction: Direction::Maximize,
            ..*opts
        },
    )?;
    let down = projected_gradient_ascent(
        t,
        query,
        &AscentOptions {
            direction: Direction::Minimize,
            ..*opts
        },
    )?;
    Ok(interior_result(down, up, Method::Gradient))
}

/// QEM bounds for both ends (the lower end through the complement event).
pub fn qem_bounds(t: &TransformedNetwork, query: &Query, opts: &QemOptions) -> Result<BoundsResult> {
    let up = qem_run(t, query, opts)?;
    let down = qem_lower(t, query, opts)?;
    Ok(interior_result(down, up, Method::Qem))
}

fn interior_result(down: AscentReport, up: AscentReport, method: Method) -> BoundsResult {
    BoundsResult {
        lower: down.bound,
        upper: up.bound,
        argmin: None,
        argmax: None,
        method,
        work: Work {
            evaluations: down.evaluations + up.evaluations,
            iterations: down.steps + up.steps,
            skipped_zero_mass: 0,
        },
        zero_mass: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::{Evidence, NetworkBuilder};
    use crate::ccm::apply_ccm;
    use crate::credal::{eps_contaminated, CredalSpec, Polytope};

    fn net_b() -> TransformedNetwork {
        let mut b = NetworkBuilder::new();
        let x = b.variable("x", 2);
        let y = b.variable("y", 2);
        b.cpt(x, &[], vec![vec![0.75, 0.25]]);
        b.cpt(y, &[x], vec![vec![0.1, 0.9], vec![0.8, 0.2]]);
        let net = b.build().unwrap();
        let spec = CredalSpec::prior(x, eps_contaminated(&[0.75, 0.25], 0.2).unwrap());
        apply_ccm(&net, &[spec]).unwrap()
    }

    fn query() -> Query {
        Query::new(0, 0, Evidence::from_pairs([(1, 1)]))
    }

    #[test]
    fn projection() {
        let p = project_floored(&[0.7, 0.7], 0.0);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let p = project_floored(&[2.0, -1.0, 0.0], 1e-9);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p.iter().all(|x| *x >= 1e-9));
        assert!((p[0] - (1.0 - 2e-9)).abs() < 1e-15);
    }

    #[test]
    fn likelihood_at_mixture_and_vertex() {
        let t = net_b();
        let l = log_posterior_likelihood(&t, &ThetaVector::uniform(&[2]), &query()).unwrap();
        assert!((l - (0.63f64 / 0.69).ln()).abs() < 1e-12);
        assert!((l + 0.090972).abs() < 1e-6);
        let v = log_posterior_likelihood(&t, &ThetaVector::vertex(&[2], &[0]), &query()).unwrap();
        assert!((v + 0.054067).abs() < 1e-6);
    }

    #[test]
    fn gradient_hand_value_and_backends_agree() {
        let t = net_b();
        let g = gradient_theta(&t, &ThetaVector::uniform(&[2]), &query()).unwrap();
        assert!((g[0][0] - 0.041408).abs() < 1e-6, "{g:?}");
        assert!((g[0][1] + 0.041408).abs() < 1e-6);
        let table = ThetaModel::new(&t, &query(), Backend::Table).unwrap();
        let g2 = table.gradient(&ThetaVector::uniform(&[2])).unwrap();
        assert!((g[0][0] - g2[0][0]).abs() < 1e-14);
        assert!(gradient_theta(&t, &ThetaVector::vertex(&[2], &[0]), &query()).is_err());
    }

    #[test]
    fn ascent_finds_net_b_bounds() {
        let t = net_b();
        let up = projected_gradient_ascent(&t, &query(), &AscentOptions::default()).unwrap();
        assert!((up.bound - 0.72 / 0.76).abs() < 1e-6, "{up:?}");
        assert!(up.theta.components()[0][0] > 0.999);
        let down = projected_gradient_ascent(
            &t,
            &query(),
            &AscentOptions {
                direction: Direction::Minimize,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((down.bound - 0.54 / 0.62).abs() < 1e-6);
    }

    #[test]
    fn qem_finds_net_b_bounds() {
        let t = net_b();
        let up = qem_run(&t, &query(), &QemOptions::default()).unwrap();
        assert!((up.bound - 0.72 / 0.76).abs() < 1e-6, "{up:?}");
        assert!(up.trajectory.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        let down = qem_lower(&t, &query(), &QemOptions::default()).unwrap();
        assert!((down.bound - 0.54 / 0.62).abs() < 1e-6, "{down:?}");
    }

    #[test]
    fn point_set_is_flat() {
        let mut b = NetworkBuilder::new();
        let x = b.variable("x", 2);
        let y = b.variable("y", 2);
        b.cpt(x, &[], vec![vec![0.75, 0.25]]);
        b.cpt(y, &[x], vec![vec![0.1, 0.9], vec![0.8, 0.2]]);
        let net = b.build().unwrap();
        let spec = CredalSpec::prior(x, Polytope::point(vec![0.75, 0.25]).unwrap());
        let t = apply_ccm(&net, &[spec]).unwrap();
        let g = gradient_theta(&t, &ThetaVector::uniform(&[1]), &query()).unwrap();
        assert_eq!(g, vec![vec![0.0]]);
        let r = projected_gradient_ascent(&t, &query(), &AscentOptions::default()).unwrap();
        assert_eq!(r.steps, 1);
        assert!((r.bound - 0.675 / 0.725).abs() < 1e-12);
    }

    #[test]
    fn anneal_exhausts_net_b() {
        let t = net_b();
        let r = anneal_search(&t, &query(), &AnnealSchedule::default()).unwrap();
        assert!((r.upper - 0.72 / 0.76).abs() < 1e-12);
        assert!((r.lower - 0.54 / 0.62).abs() < 1e-12);
        assert_eq!(r.work.evaluations, 2);
    }

    #[test]
    fn seeded_runs_are_deterministic() {
        let t = net_b();
        let opts = AscentOptions {
            seed: 7,
            ..Default::default()
        };
        let a = projected_gradient_ascent(&t, &query(), &opts).unwrap();
        let b = projected_gradient_ascent(&t, &query(), &opts).unwrap();
        assert_eq!(a, b);
    }
}
