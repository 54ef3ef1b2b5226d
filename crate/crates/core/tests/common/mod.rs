//! Reference computations for the integration tests, written without the
//! transform, the elimination engine or the simplex solver.
#![allow(dead_code)]

use credal::bn::{DiscreteNetwork, VarId};
use credal::credal::{ConditionalSets, CredalSpec};
use credal::query::Query;
use credal::random::{random_instance, RandomConfig, RandomInstance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn corpus(cfg: &RandomConfig, count: usize, seed: u64) -> Vec<RandomInstance> {
    (0..count as u64)
        .map(|i| random_instance(cfg, &mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(i))).unwrap())
        .collect()
}

/// Variables the query depends on: targets, evidence and their ancestors.
fn relevant(net: &DiscreteNetwork, q: &Query) -> Vec<bool> {
    let mut keep = vec![false; net.len()];
    let mut stack: Vec<VarId> = std::iter::once(q.target)
        .chain(q.evidence.iter().map(|(v, _)| v))
        .collect();
    while let Some(v) = stack.pop() {
        if !keep[v] {
            keep[v] = true;
            stack.extend_from_slice(net.parents(v));
        }
    }
    keep
}

/// The local choices of one credal node: a list of alternatives, each a full
/// set of columns.
fn alternatives(net: &DiscreteNetwork, spec: &CredalSpec) -> Vec<Vec<Vec<f64>>> {
    match &spec.sets {
        ConditionalSets::Joint(tables) => tables.clone(),
        ConditionalSets::Separate(polys) => {
            let mut out: Vec<Vec<Vec<f64>>> = vec![Vec::new()];
            for poly in polys {
                out = out
                    .into_iter()
                    .flat_map(|prefix| {
                        poly.vertices().iter().map(move |v| {
                            let mut next = prefix.clone();
                            next.push(v.clone());
                            next
                        })
                    })
                    .collect();
            }
            let _ = net;
            out
        }
    }
}

/// `p(A, e)` and `p(e)` by summing the full joint of the relevant variables.
fn masses(net: &DiscreteNetwork, columns: &[Vec<Vec<f64>>], keep: &[bool], q: &Query) -> (f64, f64) {
    let vars: Vec<VarId> = (0..net.len()).filter(|&v| keep[v]).collect();
    let mut x = vec![0usize; net.len()];
    for (v, val) in q.evidence.iter() {
        x[v] = val;
    }
    let free: Vec<VarId> = vars.iter().copied().filter(|&v| !q.evidence.contains(v)).collect();
    let (mut num, mut den) = (0.0, 0.0);
    loop {
        let mut p = 1.0;
        for &v in &vars {
            let mut config = 0;
            for &u in net.parents(v) {
                config = config * net.cardinality(u) + x[u];
            }
            p *= columns[v][config][x[v]];
            if p == 0.0 {
                break;
            }
        }
        den += p;
        if q.values.contains(&x[q.target]) {
            num += p;
        }
        // odometer over the free variables
        let mut i = free.len();
        loop {
            if i == 0 {
                return (num, den);
            }
            i -= 1;
            let v = free[i];
            x[v] += 1;
            if x[v] < net.cardinality(v) {
                break;
            }
            x[v] = 0;
        }
    }
}

/// Exact type-1 bounds by multiplying out the full joint for every
/// combination of local vertices. `None` when every combination gives
/// the evidence probability zero.
pub fn brute_force_bounds(net: &DiscreteNetwork, specs: &[CredalSpec], q: &Query) -> Option<(f64, f64)> {
    let keep = relevant(net, q);
    let base: Vec<Vec<Vec<f64>>> = (0..net.len())
        .map(|v| {
            (0..net.parent_configurations(v))
                .map(|k| net.conditional(v, k))
                .collect()
        })
        .collect();
    let choices: Vec<(VarId, Vec<Vec<Vec<f64>>>)> = specs
        .iter()
        .filter(|s| keep[s.node])
        .map(|s| (s.node, alternatives(net, s)))
        .collect();
    let mut pick = vec![0usize; choices.len()];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut columns = base;
    loop {
        for ((v, alts), &k) in choices.iter().zip(&pick) {
            columns[*v] = alts[k].clone();
        }
        let (num, den) = masses(net, &columns, &keep, q);
        if den > 0.0 {
            let r = num / den;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let mut i = choices.len();
        loop {
            if i == 0 {
                return (lo <= hi).then_some((lo, hi));
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < choices[i].1.len() {
                break;
            }
            pick[i] = 0;
        }
    }
}

/// Gaussian elimination with partial pivoting; `None` if singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn combinations(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Vertices of `{x >= 0, G x <= h, E x = f}` in `n` dimensions, found by
/// making every choice of `n` constraints tight.
pub fn polytope_vertices(n: usize, ineq: &[(Vec<f64>, f64)], eq: &[(Vec<f64>, f64)]) -> Vec<Vec<f64>> {
    let mut rows: Vec<(Vec<f64>, f64)> = eq.to_vec();
    let optional: Vec<(Vec<f64>, f64)> = ineq
        .iter()
        .cloned()
        .chain((0..n).map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            (e, 0.0)
        }))
        .collect();
    let mut out = Vec::new();
    if eq.len() > n {
        return out;
    }
    let need = n - eq.len();
    combinations(optional.len(), need, &mut |pick| {
        rows.truncate(eq.len());
        rows.extend(pick.iter().map(|&i| optional[i].clone()));
        let (a, b): (Vec<_>, Vec<_>) = rows.iter().cloned().unzip();
        let Some(x) = solve_dense(a, b) else { return };
        let feasible = x.iter().all(|&v| v >= -1e-9)
            && ineq.iter().all(|(g, h)| dot(g, &x) <= h + 1e-9)
            && eq.iter().all(|(e, f)| (dot(e, &x) - f).abs() <= 1e-9);
        if feasible {
            out.push(x);
        }
    });
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
