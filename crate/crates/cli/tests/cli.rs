use std::path::PathBuf;

use credal_cli::{run, EXIT_COMPUTATION, EXIT_INPUT, EXIT_OK, EXIT_USAGE};

fn network(name: &str) -> String {
    path("networks", name)
}

fn fixture(name: &str) -> String {
    path("tests/fixtures", name)
}

fn path(dir: &str, name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), dir, name].iter().collect();
    p.to_string_lossy().into_owned()
}

/// Exit code, stdout and stderr of one invocation.
fn credal(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(
        std::iter::once("credal").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// The numbers after `lower=` and `upper=` on the first line.
fn bounds(line: &str) -> (f64, f64) {
    let grab = |key: &str| -> f64 {
        let rest = &line[line.find(key).unwrap() + key.len()..];
        rest.split_whitespace().next().unwrap().parse().unwrap()
    };
    (grab("lower="), grab("upper="))
}

#[test]
fn query_prints_the_posterior_interval() {
    let net = network("netb.cn");
    let (code, out, _) = credal(&["query", "--net", &net, "--target", "x=a", "--evidence", "y=y"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "P(x=a | y=y): lower=0.870968 upper=0.947368 method=enum\n");
}

#[test]
fn every_value_of_the_target_without_a_value() {
    let net = network("netb.cn");
    let (code, out, _) = credal(&["query", "--net", &net, "--target", "y", "--method", "joint"]);
    assert_eq!(code, EXIT_OK, "{out}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    let (lo, hi) = bounds(lines[1]);
    assert!((lo - 0.62).abs() < 1e-6 && (hi - 0.76).abs() < 1e-6);
}

#[test]
fn utility_expectation_and_variance() {
    let net = network("netb.cn");
    let (code, out, err) = credal(&["query", "--net", &net, "--utility", "gain"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let (lo, hi) = bounds(&out);
    assert!((lo - 6.2).abs() < 1e-9 && (hi - 7.6).abs() < 1e-9, "{out}");
    let (code, out, _) = credal(&["query", "--net", &net, "--utility", "gain", "--variance"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("Var[gain]"));
    let (lo, hi) = bounds(&out);
    assert!((lo - 18.24).abs() < 1e-6 && (hi - 23.56).abs() < 1e-6, "{out}");
}

#[test]
fn json_output_carries_the_method() {
    let net = network("netb.cn");
    let (code, out, _) = credal(&["query", "--net", &net, "--target", "x=a", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["method"], "enum");
    assert!((v[0]["lower"].as_f64().unwrap() - 0.6).abs() < 1e-12);
}

#[test]
fn json_networks_are_accepted() {
    let text = std::fs::read_to_string(network("netb.cn")).unwrap();
    let doc = credal::io::parse_network_file(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("netb.json");
    std::fs::write(&file, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let file = file.to_string_lossy();
    let (code, out, err) = credal(&["query", "--net", &file, "--target", "x=a", "--evidence", "y=y"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("lower=0.870968 upper=0.947368"));
}

#[test]
fn validate_reports_sizes() {
    let net = network("car.cn");
    let (code, out, _) = credal(&["validate", "--net", &net]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains(": ok ("), "{out}");
}

#[test]
fn damaged_inputs_exit_with_the_input_code() {
    let (code, _, err) = credal(&["validate", "--net", &fixture("cyclic.cn")]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("cycle detected"), "{err}");
    let (code, _, _) = credal(&["validate", "--net", &fixture("unnormalized.cn")]);
    assert_eq!(code, EXIT_INPUT);
    let (code, _, err) = credal(&["validate", "--net", &fixture("syntax.cn")]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("line 2, column 24"), "{err}");
    let (code, _, _) = credal(&["validate", "--net", "/no/such/file.cn"]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn unknown_names_are_input_errors() {
    let net = network("netb.cn");
    let (code, _, err) = credal(&["query", "--net", &net, "--target", "zz=a"]);
    assert_eq!(code, EXIT_INPUT, "{err}");
    let (code, _, _) = credal(&["query", "--net", &net, "--target", "x=q"]);
    assert_eq!(code, EXIT_INPUT);
    let (code, _, _) = credal(&["query", "--net", &net, "--utility", "nope"]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn usage_errors_exit_with_one() {
    let net = network("netb.cn");
    assert_eq!(credal(&[]).0, EXIT_USAGE);
    assert_eq!(credal(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(
        credal(&["query", "--net", &net, "--target", "x", "--method", "magic"]).0,
        EXIT_USAGE
    );
    assert_eq!(credal(&["query", "--net", &net]).0, EXIT_USAGE);
    assert_eq!(credal(&["query", "--net", &net, "--variance"]).0, EXIT_USAGE);
    assert_eq!(
        credal(&["query", "--net", &net, "--utility", "gain", "--method", "qem"]).0,
        EXIT_USAGE
    );
    let (code, out, _) = credal(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("query"));
}

#[test]
fn computation_failures_exit_with_three() {
    // eps must stay inside (0, 1)
    let net = network("netb.cn");
    let (code, _, _) = credal(&[
        "sweep", "--net", &net, "--target", "x=a", "--param", "x.eps", "--from", "0.5", "--to", "1.5", "--steps", "3",
    ]);
    assert!(code == EXIT_INPUT || code == EXIT_COMPUTATION, "{code}");
}

#[test]
fn sweep_writes_one_csv_row_per_point() {
    let net = network("netb.cn");
    let (code, out, err) = credal(&[
        "sweep", "--net", &net, "--target", "x=a", "--param", "x.eps", "--from", "0.1", "--to", "0.3", "--steps", "3",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines[0],
        "query,parameter,lower,upper,method,evaluations,iterations,skipped_zero_mass"
    );
    assert_eq!(lines.len(), 4);
    // lower = 0.75 (1 - eps)
    for (line, eps) in lines[1..].iter().zip([0.1, 0.2, 0.3]) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[1].parse::<f64>().unwrap(), eps);
        assert!((fields[2].parse::<f64>().unwrap() - 0.75 * (1.0 - eps)).abs() < 1e-12);
    }
}

#[test]
fn oracle_agrees_on_every_bundled_network() {
    for name in ["netb.cn", "car.cn", "and-gate.cn", "chain.cn", "belief.cn"] {
        let net = network(name);
        let (code, out, err) = credal(&["oracle", "--net", &net]);
        assert_eq!(code, EXIT_OK, "{name}: {out}{err}");
        assert!(out.contains("0 mismatches"), "{name}: {out}");
    }
}

#[test]
fn oracle_qem_on_netb() {
    let net = network("netb.cn");
    let (code, out, _) = credal(&["oracle", "--net", &net, "--method", "qem", "--evidence", "y=y"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.lines().any(|l| l.starts_with("ok")));
}
