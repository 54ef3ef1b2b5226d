use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::query::BoundsResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Plain,
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Self::Plain),
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            _ => Err(Error::InvalidParameter(format!(
                "unknown output format '{s}' (expected plain, json or csv)"
            ))),
        }
    }
}

/// One labelled result; `parameter` is the swept value in a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<f64>,
    #[serde(flatten)]
    pub result: BoundsResult,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    query: &'a str,
    parameter: Option<f64>,
    lower: f64,
    upper: f64,
    method: &'a str,
    evaluations: usize,
    iterations: usize,
    skipped_zero_mass: usize,
}

/// Plain text rounds to six decimals and prints `lower=upper=x` when the
/// rounded bounds agree; JSON and CSV keep full precision.
pub fn serialize_results(outcomes: &[QueryOutcome], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Plain => {
            let mut out = String::new();
            for o in outcomes {
                let lo = format!("{:.6}", o.result.lower);
                let hi = format!("{:.6}", o.result.upper);
                let _ = write!(out, "{}", o.label);
                if let Some(p) = o.parameter {
                    let _ = write!(out, " [{p}]");
                }
                if lo == hi {
                    let _ = write!(out, ": lower=upper={lo}");
                } else {
                    let _ = write!(out, ": lower={lo} upper={hi}");
                }
                let _ = writeln!(out, " method={}", o.result.method);
            }
            Ok(out)
        }
        OutputFormat::Json => serde_json::to_string_pretty(outcomes)
            .map(|s| s + "\n")
            .map_err(|e| Error::InvalidParameter(e.to_string())),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for o in outcomes {
                w.serialize(CsvRow {
                    query: &o.label,
                    parameter: o.parameter,
                    lower: o.result.lower,
                    upper: o.result.upper,
                    method: o.result.method.name(),
                    evaluations: o.result.work.evaluations,
                    iterations: o.result.work.iterations,
                    skipped_zero_mass: o.result.work.skipped_zero_mass,
                })
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            }
            if outcomes.is_empty() {
                w.write_record([
                    "query",
                    "parameter",
                    "lower",
                    "upper",
                    "method",
                    "evaluations",
                    "iterations",
                    "skipped_zero_mass",
                ])
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::InvalidParameter(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::Method;

    fn outcome(lower: f64, upper: f64) -> QueryOutcome {
        let mut result = BoundsResult::point(lower, Method::Enumeration);
        result.upper = upper;
        QueryOutcome {
            label: "P(x=a | y=b)".into(),
            parameter: None,
            result,
        }
    }

    #[test]
    fn plain_rounds_and_collapses_points() {
        let out = serialize_results(
            &[outcome(0.870967741, 0.947368421), outcome(0.5, 0.5000000001)],
            OutputFormat::Plain,
        )
        .unwrap();
        assert_eq!(
            out,
            "P(x=a | y=b): lower=0.870968 upper=0.947368 method=enum\nP(x=a | y=b): lower=upper=0.500000 method=enum\n"
        );
    }

    #[test]
    fn csv_has_header_and_full_precision() {
        let out = serialize_results(&[outcome(0.1, 0.2)], OutputFormat::Csv).unwrap();
        let mut lines = out.lines();
        assert_eq!(
            lines.next().unwrap(),
            "query,parameter,lower,upper,method,evaluations,iterations,skipped_zero_mass"
        );
        assert_eq!(lines.next().unwrap(), "P(x=a | y=b),,0.1,0.2,enum,0,0,0");
    }

    #[test]
    fn json_round_trips() {
        let out = serialize_results(&[outcome(0.25, 0.75)], OutputFormat::Json).unwrap();
        let back: Vec<QueryOutcome> = serde_json::from_str(&out).unwrap();
        assert_eq!(back, vec![outcome(0.25, 0.75)]);
    }
}
