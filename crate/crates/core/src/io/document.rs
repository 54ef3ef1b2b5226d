use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::lexer::is_word;
use crate::credal::ColumnMode;

pub const FORMAT_VERSION: u32 = 1;

/// The parsed contents of a network file, before any numeric checking
/// beyond syntax. Printing with [`NetworkDocument::to_text`] and parsing
/// again gives an identical document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDocument {
    #[serde(default = "default_version")]
    pub version: u32,
    pub variables: Vec<VariableDecl>,
    #[serde(default)]
    pub parents: Vec<ParentsDecl>,
    #[serde(default)]
    pub cpts: Vec<CptDecl>,
    #[serde(default)]
    pub credal: Vec<CredalDecl>,
    #[serde(default)]
    pub utilities: Vec<UtilityDecl>,
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableDecl {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParentsDecl {
    pub child: String,
    pub parents: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CptDecl {
    pub variable: String,
    pub rows: Vec<CptRow>,
}

/// One conditional distribution; `config` names the parent values in
/// parent order and is empty for a root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CptRow {
    #[serde(default)]
    pub config: Vec<String>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CredalClass {
    Vertices,
    EpsContaminated,
    BeliefFunction,
    DensityBounded,
    TotalVariation,
    DensityRatio,
}

impl CredalClass {
    pub const ALL: [CredalClass; 6] = [
        CredalClass::Vertices,
        CredalClass::EpsContaminated,
        CredalClass::BeliefFunction,
        CredalClass::DensityBounded,
        CredalClass::TotalVariation,
        CredalClass::DensityRatio,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            CredalClass::Vertices => "vertices",
            CredalClass::EpsContaminated => "eps-contaminated",
            CredalClass::BeliefFunction => "belief-function",
            CredalClass::DensityBounded => "density-bounded",
            CredalClass::TotalVariation => "total-variation",
            CredalClass::DensityRatio => "density-ratio",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.tag() == tag)
    }

    /// Parameter names the class requires (vertex labels are free-form).
    pub fn required_params(self) -> &'static [&'static str] {
        match self {
            CredalClass::Vertices => &[],
            CredalClass::EpsContaminated | CredalClass::TotalVariation => &["base", "eps"],
            CredalClass::BeliefFunction => &["masses"],
            CredalClass::DensityBounded | CredalClass::DensityRatio => &["lower", "upper"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredalDecl {
    pub variable: String,
    pub class: CredalClass,
    #[serde(default)]
    pub columns: ColumnMode,
    pub params: Vec<CredalParam>,
}

/// `[config...] name: value`. In joint mode a vertex value is the whole
/// table, columns concatenated in configuration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredalParam {
    #[serde(default)]
    pub config: Vec<String>,
    pub name: String,
    pub value: ParamValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Numbers(Vec<f64>),
    /// Belief-function masses: focal set (value names) and mass.
    Masses(Vec<(Vec<String>, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityDecl {
    pub name: String,
    pub targets: Vec<String>,
    /// Row-major over the targets' joint values, last target fastest.
    pub values: Vec<f64>,
}

fn word(s: &str) -> String {
    debug_assert!(is_word(s), "'{s}' is not printable as a word");
    s.to_string()
}

fn numbers(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ")
}

fn words(xs: &[String]) -> String {
    xs.iter().map(|x| word(x)).collect::<Vec<_>>().join(", ")
}

fn keyed(config: &[String], name: Option<&str>) -> String {
    let mut parts: Vec<String> = config.iter().map(|c| word(c)).collect();
    if let Some(n) = name {
        parts.push(word(n));
    }
    parts.join(" ")
}

impl NetworkDocument {
    /// Canonical text: declarations grouped by kind, in document order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "version {}", self.version);
        for v in &self.variables {
            let _ = writeln!(out, "variable {} {{ values: {} }}", word(&v.name), words(&v.values));
        }
        for p in &self.parents {
            let _ = writeln!(out, "parents {}: {}", word(&p.child), words(&p.parents));
        }
        for c in &self.cpts {
            let rows: Vec<String> = c
                .rows
                .iter()
                .map(|r| {
                    if r.config.is_empty() {
                        numbers(&r.probs)
                    } else {
                        format!("{}: {}", keyed(&r.config, None), numbers(&r.probs))
                    }
                })
                .collect();
            let _ = writeln!(out, "cpt {} {{ {} }}", word(&c.variable), rows.join("; "));
        }
        for c in &self.credal {
            let mode = match c.columns {
                ColumnMode::Separate => "separate",
                ColumnMode::Joint => "joint",
            };
            let mut entries = vec![format!("class: {}", c.class.tag()), format!("columns: {mode}")];
            for p in &c.params {
                let value = match &p.value {
                    ParamValue::Numbers(xs) => numbers(xs),
                    ParamValue::Masses(ms) => ms
                        .iter()
                        .map(|(set, m)| format!("{{{}}}={m}", words(set)))
                        .collect::<Vec<_>>()
                        .join(", "),
                };
                entries.push(format!("{}: {value}", keyed(&p.config, Some(&p.name))));
            }
            let _ = writeln!(out, "credal {} {{ {} }}", word(&c.variable), entries.join("; "));
        }
        for u in &self.utilities {
            let _ = writeln!(
                out,
                "utility {} {{ target: {}; values: {} }}",
                word(&u.name),
                words(&u.targets),
                numbers(&u.values)
            );
        }
        out
    }

    pub fn variable(&self, name: &str) -> Option<&VariableDecl> {
        self.variables.iter().find(|v| v.name == name)
    }
}
