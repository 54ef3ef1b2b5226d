use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bn::{eliminate, DiscreteNetwork, Evidence, VarId};
use crate::ccm::Assignment;
use crate::error::{Error, Result};

/// The event `x_target ∈ values` conditioned on `evidence`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub target: VarId,
    pub values: Vec<usize>,
    pub evidence: Evidence,
}

impl Query {
    pub fn new(target: VarId, value: usize, evidence: Evidence) -> Self {
        Self {
            target,
            values: vec![value],
            evidence,
        }
    }

    pub fn event(target: VarId, mut values: Vec<usize>, evidence: Evidence) -> Self {
        values.sort_unstable();
        values.dedup();
        Self {
            target,
            values,
            evidence,
        }
    }

    /// The complementary event on the same target and evidence.
    pub fn complement(&self, cardinality: usize) -> Self {
        Self {
            target: self.target,
            values: (0..cardinality).filter(|v| !self.values.contains(v)).collect(),
            evidence: self.evidence.clone(),
        }
    }

    pub fn check(&self, net: &DiscreteNetwork) -> Result<()> {
        if self.target >= net.len() {
            return Err(Error::UnknownVariable(self.target));
        }
        if self.evidence.contains(self.target) {
            return Err(Error::QueryInEvidence(self.target));
        }
        let cardinality = net.cardinality(self.target);
        if let Some(&value) = self.values.iter().find(|&&v| v >= cardinality) {
            return Err(Error::ValueOutOfRange {
                var: self.target,
                value,
                cardinality,
            });
        }
        self.evidence.check(net)
    }

    pub(crate) fn in_event(&self, value: usize) -> bool {
        self.values.contains(&value)
    }
}

/// The pair (p(event, e), p(e)) for one precise network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventMass {
    pub event: f64,
    pub evidence: f64,
}

impl EventMass {
    pub fn ratio(&self) -> Option<f64> {
        (self.evidence > 0.0).then(|| self.event / self.evidence)
    }
}

/// One elimination run keeping the target.
pub fn event_mass(net: &DiscreteNetwork, query: &Query) -> Result<EventMass> {
    let f = eliminate(net, &[query.target], &query.evidence)?;
    let event = f
        .values()
        .iter()
        .enumerate()
        .filter(|(v, _)| query.in_event(*v))
        .map(|(_, p)| p)
        .sum();
    Ok(EventMass {
        event,
        evidence: f.sum(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[serde(rename = "enum")]
    Enumeration,
    #[serde(rename = "joint")]
    JointMax,
    Gradient,
    Qem,
    Anneal,
    Lavine,
    #[serde(rename = "ne-lp")]
    NaturalExtension,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Enumeration,
        Method::JointMax,
        Method::Gradient,
        Method::Qem,
        Method::Anneal,
        Method::Lavine,
        Method::NaturalExtension,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Enumeration => "enum",
            Method::JointMax => "joint",
            Method::Gradient => "gradient",
            Method::Qem => "qem",
            Method::Anneal => "anneal",
            Method::Lavine => "lavine",
            Method::NaturalExtension => "ne-lp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Work {
    /// Precise inference runs or objective evaluations.
    pub evaluations: usize,
    /// Optimizer steps, bisection steps or simplex pivots.
    pub iterations: usize,
    /// Transparent assignments excluded because p(e) = 0 there.
    pub skipped_zero_mass: usize,
}

/// Lower and upper values of a posterior quantity with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsResult {
    pub lower: f64,
    pub upper: f64,
    /// Transparent assignment attaining the lower value, when one does.
    pub argmin: Option<Assignment>,
    pub argmax: Option<Assignment>,
    pub method: Method,
    pub work: Work,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub zero_mass: Vec<Assignment>,
}

impl BoundsResult {
    pub fn point(value: f64, method: Method) -> Self {
        Self {
            lower: value,
            upper: value,
            argmin: None,
            argmax: None,
            method,
            work: Work::default(),
            zero_mass: Vec::new(),
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}
