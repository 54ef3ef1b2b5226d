use std::fs;
use std::io::Write;
use std::path::Path;

use credal::approx::{anneal_search, gradient_bounds, qem_bounds, AnnealSchedule, AscentOptions, QemOptions};
use credal::bn::Evidence;
use credal::ccm::TransformedNetwork;
use credal::io::{
    load_model, load_model_json, model_from_document, parse_json_document, parse_network_file, serialize_results,
    CredalModel, NetworkDocument, OutputFormat, ParamValue, QueryOutcome,
};
use credal::lavine::lavine_bounds;
use credal::natural::ne_bounds;
use credal::query::{BoundsResult, Method, Query};
use credal::type1::{
    bounds_by_enumeration_with, bounds_by_joint_max_with, expectation_bounds_with, variance_bounds_with, Type1Options,
};
use credal::Error;
use rayon::prelude::*;

use crate::args::{Command, EventArgs, OracleArgs, QueryArgs, SolverArgs, SweepArgs, ValidateArgs};
use crate::{Failure, EXIT_COMPUTATION, EXIT_OK};

const DEFAULT_LAVINE_TOL: f64 = 1e-6;

pub(crate) fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Query(a) => query(a, out),
        Command::Validate(a) => validate(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Oracle(a) => oracle(a, out, err),
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<CredalModel, Failure> {
    let text = read(path)?;
    let model = if is_json(path) {
        load_model_json(&text)
    } else {
        load_model(&text)
    };
    model.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_document(path: &Path) -> Result<NetworkDocument, Failure> {
    let text = read(path)?;
    let doc = if is_json(path) {
        parse_json_document(&text)
    } else {
        parse_network_file(&text)
    };
    doc.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn transform(model: &CredalModel) -> Result<TransformedNetwork, Failure> {
    model.transform().map_err(|e| Failure::Computation(e.to_string()))
}

fn input(e: Error) -> Failure {
    Failure::Input(e.to_string())
}

/// The queries named by `--target`/`--evidence`: one value, every value of
/// the target, or (with `all_targets`) every value of every unobserved variable.
fn queries(model: &CredalModel, event: &EventArgs, all_targets: bool) -> Result<Vec<Query>, Failure> {
    let evidence = model.evidence(&event.evidence).map_err(input)?;
    let targets: Vec<(usize, Option<usize>)> = match &event.target {
        Some(t) => {
            let var = model.variable(&t.variable).map_err(input)?;
            let value = t
                .value
                .as_deref()
                .map(|v| model.value(var, v))
                .transpose()
                .map_err(input)?;
            vec![(var, value)]
        }
        None if all_targets => (0..model.net.len())
            .filter(|v| !evidence.contains(*v))
            .map(|v| (v, None))
            .collect(),
        None => return Err(Failure::Usage("--target is required".into())),
    };
    let mut out = Vec::new();
    for (var, value) in targets {
        let values = match value {
            Some(v) => vec![v],
            None => (0..model.net.cardinality(var)).collect(),
        };
        for v in values {
            let q = Query::new(var, v, evidence.clone());
            q.check(&model.net).map_err(input)?;
            out.push(q);
        }
    }
    Ok(out)
}

fn evidence_label(model: &CredalModel, evidence: &Evidence) -> String {
    let parts: Vec<String> = evidence
        .iter()
        .map(|(v, x)| {
            let var = model.net.variable(v);
            format!("{}={}", var.name, var.values[x])
        })
        .collect();
    if parts.is_empty() {
        String::new()
    } else {
        format!(" | {}", parts.join(", "))
    }
}

fn label(model: &CredalModel, q: &Query) -> String {
    let var = model.net.variable(q.target);
    let values: Vec<&str> = q.values.iter().map(|&x| var.values[x].as_str()).collect();
    format!(
        "P({}={}{})",
        var.name,
        values.join("|"),
        evidence_label(model, &q.evidence)
    )
}

fn type1_options(s: &SolverArgs) -> Type1Options {
    Type1Options {
        max_combinations: s.max_combinations,
        ..Type1Options::default()
    }
}

fn solve(
    model: &CredalModel,
    t: &TransformedNetwork,
    q: &Query,
    method: Method,
    s: &SolverArgs,
) -> credal::Result<BoundsResult> {
    match method {
        Method::Enumeration => bounds_by_enumeration_with(t, q, &type1_options(s)),
        Method::JointMax => bounds_by_joint_max_with(t, q, &type1_options(s)),
        Method::Gradient => {
            let d = AscentOptions::default();
            let opts = AscentOptions {
                max_steps: s.max_steps,
                tol: s.tol.unwrap_or(d.tol),
                restarts: s.restarts,
                seed: s.seed,
                ..d
            };
            gradient_bounds(t, q, &opts)
        }
        Method::Qem => {
            let d = QemOptions::default();
            let opts = QemOptions {
                max_iterations: s.max_steps,
                tol: s.tol.unwrap_or(d.tol),
                restarts: s.restarts,
                seed: s.seed,
                ..d
            };
            qem_bounds(t, q, &opts)
        }
        Method::Anneal => {
            let schedule = AnnealSchedule {
                steps: s.anneal_steps,
                seed: s.seed,
                ..AnnealSchedule::default()
            };
            anneal_search(t, q, &schedule)
        }
        Method::Lavine => lavine_bounds(t, q, s.tol.unwrap_or(DEFAULT_LAVINE_TOL)),
        Method::NaturalExtension => ne_bounds(&model.net, &model.specs, q),
    }
}

fn emit(out: &mut dyn Write, outcomes: &[QueryOutcome], format: OutputFormat) -> Result<(), Failure> {
    let text = serialize_results(outcomes, format).map_err(|e| Failure::Computation(e.to_string()))?;
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::Computation(format!("writing output: {e}")))
}

fn query(a: &QueryArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let model = load(&a.event.net)?;
    let t = transform(&model)?;
    let outcomes = if let Some(name) = &a.utility {
        if a.method != Method::Enumeration {
            return Err(Failure::Usage("--utility is computed by --method enum only".into()));
        }
        let u = model
            .utility(name)
            .ok_or_else(|| Failure::Input(format!("no utility named '{name}'")))?;
        let evidence = model.evidence(&a.event.evidence).map_err(input)?;
        let opts = type1_options(&a.solver);
        let (kind, result) = if a.variance {
            ("Var", variance_bounds_with(&t, u, &evidence, &opts).map(|v| v.bounds))
        } else {
            ("E", expectation_bounds_with(&t, u, &evidence, &opts))
        };
        let result = result.map_err(|e| Failure::Computation(e.to_string()))?;
        vec![QueryOutcome {
            label: format!("{kind}[{name}{}]", evidence_label(&model, &evidence)),
            parameter: None,
            result,
        }]
    } else {
        let mut outcomes = Vec::new();
        for q in queries(&model, &a.event, false)? {
            let result = solve(&model, &t, &q, a.method, &a.solver).map_err(|e| Failure::Computation(e.to_string()))?;
            outcomes.push(QueryOutcome {
                label: label(&model, &q),
                parameter: None,
                result,
            });
        }
        outcomes
    };
    emit(out, &outcomes, a.format)?;
    Ok(EXIT_OK)
}

fn validate(a: &ValidateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let model = load(&a.net)?;
    let t = transform(&model)?;
    let _ = writeln!(
        out,
        "{}: ok ({} variables, {} credal nodes, {} vertex combinations)",
        a.net.display(),
        model.net.len(),
        model.specs.len(),
        t.combination_count()
    );
    Ok(EXIT_OK)
}

/// Sets every scalar parameter `name` of `var`'s credal block to `x`.
fn set_param(doc: &mut NetworkDocument, var: &str, name: &str, x: f64) -> Result<(), Failure> {
    let block = doc
        .credal
        .iter_mut()
        .find(|c| c.variable == var)
        .ok_or_else(|| Failure::Input(format!("'{var}' has no credal block")))?;
    let mut found = false;
    for p in block.params.iter_mut().filter(|p| p.name == name) {
        match &mut p.value {
            ParamValue::Numbers(xs) if xs.len() == 1 => xs[0] = x,
            _ => return Err(Failure::Input(format!("'{var}.{name}' is not a scalar parameter"))),
        }
        found = true;
    }
    if found {
        Ok(())
    } else {
        Err(Failure::Input(format!("'{var}' has no parameter '{name}'")))
    }
}

fn sweep_points(from: f64, to: f64, steps: usize) -> Vec<f64> {
    let round = |x: f64| (x * 1e12).round() / 1e12;
    match steps {
        1 => vec![from],
        n => (0..n)
            .map(|i| round(from + (to - from) * i as f64 / (n - 1) as f64))
            .collect(),
    }
}

fn sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    if a.steps == 0 {
        return Err(Failure::Usage("--steps must be at least 1".into()));
    }
    if !(a.from.is_finite() && a.to.is_finite()) {
        return Err(Failure::Usage("--from and --to must be finite".into()));
    }
    let doc = load_document(&a.event.net)?;
    let (var, name) = &a.param;
    let points = sweep_points(a.from, a.to, a.steps);
    let rows: Vec<Result<Vec<QueryOutcome>, Failure>> = points
        .par_iter()
        .map(|&x| {
            let mut doc = doc.clone();
            set_param(&mut doc, var, name, x)?;
            let model =
                model_from_document(&doc).map_err(|e| Failure::Input(format!("{var}.{name} = {x}: {}", e.message)))?;
            let t = transform(&model)?;
            queries(&model, &a.event, false)?
                .into_iter()
                .map(|q| {
                    let result = solve(&model, &t, &q, a.method, &a.solver)
                        .map_err(|e| Failure::Computation(format!("{var}.{name} = {x}: {e}")))?;
                    Ok(QueryOutcome {
                        label: label(&model, &q),
                        parameter: Some(x),
                        result,
                    })
                })
                .collect()
        })
        .collect();
    let mut outcomes = Vec::new();
    for r in rows {
        outcomes.extend(r?);
    }
    emit(out, &outcomes, a.format)?;
    Ok(EXIT_OK)
}

/// Natural extension is exact when the sole credal set sits on a root of a
/// complete DAG, so the precise conditionals fix everything but the root
/// marginal; otherwise it must contain the type-1 interval.
fn ne_is_exact(model: &CredalModel) -> bool {
    let net = &model.net;
    let n = net.len();
    let edges: usize = (0..n).map(|v| net.parents(v).len()).sum();
    model.specs.len() <= 1 && model.specs.iter().all(|s| net.parents(s.node).is_empty()) && edges == n * (n - 1) / 2
}

fn oracle(a: &OracleArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let model = load(&a.event.net)?;
    let t = transform(&model)?;
    let methods: Vec<Method> = if a.method.is_empty() {
        Method::ALL
            .iter()
            .copied()
            .filter(|m| *m != Method::Enumeration)
            .collect()
    } else {
        a.method.clone()
    };
    let (mut checked, mut mismatches, mut skipped) = (0usize, 0usize, 0usize);
    for q in queries(&model, &a.event, true)? {
        let name = label(&model, &q);
        let exact = match bounds_by_enumeration_with(&t, &q, &type1_options(&a.solver)) {
            Ok(r) => r,
            Err(Error::ZeroProbabilityEvidence) => {
                return Err(Failure::Input(
                    "the evidence has probability zero under every vertex".into(),
                ))
            }
            Err(e) => return Err(Failure::Computation(format!("{name}: enumeration failed: {e}"))),
        };
        for &m in &methods {
            let r = match solve(&model, &t, &q, m, &a.solver) {
                Ok(r) => r,
                Err(Error::Unsupported(why)) => {
                    skipped += 1;
                    let _ = writeln!(out, "skip {m} {name}: {why}");
                    continue;
                }
                Err(e) => {
                    mismatches += 1;
                    let _ = writeln!(out, "FAIL {m} {name}: {e}");
                    continue;
                }
            };
            let gap = if m == Method::NaturalExtension && !ne_is_exact(&model) {
                (r.lower - exact.lower).max(exact.upper - r.upper).max(0.0)
            } else {
                (r.lower - exact.lower).abs().max((r.upper - exact.upper).abs())
            };
            checked += 1;
            let status = if gap > a.threshold {
                mismatches += 1;
                "MISMATCH"
            } else {
                "ok"
            };
            let _ = writeln!(
                out,
                "{status} {m} {name}: [{:.9}, {:.9}] vs enum [{:.9}, {:.9}] gap {gap:.2e}",
                r.lower, r.upper, exact.lower, exact.upper
            );
        }
    }
    let _ = writeln!(out, "{checked} checks, {mismatches} mismatches, {skipped} skipped");
    if mismatches > 0 {
        let _ = writeln!(
            err,
            "error: {mismatches} result(s) differ from enumeration by more than {}",
            a.threshold
        );
        Ok(EXIT_COMPUTATION)
    } else {
        Ok(EXIT_OK)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_points_include_both_ends() {
        assert_eq!(sweep_points(0.0, 0.3, 4), vec![0.0, 0.1, 0.2, 0.3]);
        assert_eq!(sweep_points(0.5, 1.0, 1), vec![0.5]);
    }
}
