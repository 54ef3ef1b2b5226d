use std::collections::BTreeMap;

use super::document::{
    CptDecl, CptRow, CredalClass, CredalDecl, CredalParam, NetworkDocument, ParamValue, ParentsDecl, VariableDecl,
};
use super::{ParseError, Position, INPUT_SUM_TOL};
use crate::bn::{DiscreteNetwork, Evidence, NetworkBuilder, VarId};
use crate::ccm::{apply_ccm, TransformedNetwork};
use crate::credal::{
    belief_function, density_bounded, density_ratio, eps_contaminated, total_variation, ColumnMode, ConditionalSets,
    ConditionalTable, CredalSpec, Polytope,
};
use crate::error::{Error, Result};
use crate::query::Query;
use crate::type1::UtilityFunction;

/// A declaration to attach an error to.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Loc {
    Document,
    Variable(usize),
    Parents(usize),
    Cpt(usize, Option<usize>),
    Credal(usize, Option<usize>),
    Utility(usize),
}

/// A checked network file: the precise network (credal nodes carry the
/// centroid of their set unless a CPT was given), credal specs, and named
/// utilities.
#[derive(Debug, Clone, PartialEq)]
pub struct CredalModel {
    pub net: DiscreteNetwork,
    pub specs: Vec<CredalSpec>,
    pub utilities: Vec<(String, UtilityFunction)>,
}

impl CredalModel {
    pub fn transform(&self) -> Result<TransformedNetwork> {
        apply_ccm(&self.net, &self.specs)
    }

    pub fn utility(&self, name: &str) -> Option<&UtilityFunction> {
        self.utilities.iter().find(|(n, _)| n == name).map(|(_, u)| u)
    }

    pub fn variable(&self, name: &str) -> Result<VarId> {
        self.net
            .find(name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown variable '{name}'")))
    }

    /// A value by name, or by 0-based index when no value has that name.
    pub fn value(&self, var: VarId, token: &str) -> Result<usize> {
        let v = self.net.variable(var);
        if let Some(i) = v.values.iter().position(|x| x == token) {
            return Ok(i);
        }
        match token.parse::<usize>() {
            Ok(i) if i < v.cardinality() => Ok(i),
            _ => Err(Error::InvalidParameter(format!(
                "'{token}' is not a value of '{}' (values: {})",
                v.name,
                v.values.join(", ")
            ))),
        }
    }

    /// `VAR=VALUE` pairs.
    pub fn evidence(&self, pairs: &[(String, String)]) -> Result<Evidence> {
        let mut e = Evidence::new();
        for (name, value) in pairs {
            let var = self.variable(name)?;
            let val = self.value(var, value)?;
            if e.insert(var, val).is_some_and(|old| old != val) {
                return Err(Error::InvalidParameter(format!("conflicting evidence on '{name}'")));
            }
        }
        Ok(e)
    }

    pub fn query(&self, target: &str, value: &str, evidence: &[(String, String)]) -> Result<Query> {
        let var = self.variable(target)?;
        Ok(Query::new(var, self.value(var, value)?, self.evidence(evidence)?))
    }
}

impl NetworkDocument {
    /// A document describing `net` with every credal set written as
    /// explicit vertices. Credal nodes get no cpt block.
    pub fn from_network(net: &DiscreteNetwork, specs: &[CredalSpec]) -> Self {
        let vars = net.variables();
        let config_words = |v: VarId, k: usize| -> Vec<String> {
            net.parent_values(v, k)
                .into_iter()
                .zip(net.parents(v))
                .map(|(x, &p)| vars[p].values[x].clone())
                .collect()
        };
        let mut doc = NetworkDocument {
            version: super::FORMAT_VERSION,
            variables: vars
                .iter()
                .map(|v| VariableDecl {
                    name: v.name.clone(),
                    values: v.values.clone(),
                })
                .collect(),
            parents: Vec::new(),
            cpts: Vec::new(),
            credal: Vec::new(),
            utilities: Vec::new(),
        };
        for v in 0..net.len() {
            if !net.parents(v).is_empty() {
                doc.parents.push(ParentsDecl {
                    child: vars[v].name.clone(),
                    parents: net.parents(v).iter().map(|&p| vars[p].name.clone()).collect(),
                });
            }
            if specs.iter().any(|s| s.node == v) {
                continue;
            }
            doc.cpts.push(CptDecl {
                variable: vars[v].name.clone(),
                rows: (0..net.parent_configurations(v))
                    .map(|k| CptRow {
                        config: config_words(v, k),
                        probs: net.conditional(v, k),
                    })
                    .collect(),
            });
        }
        for spec in specs {
            let v = spec.node;
            let (columns, params) = match &spec.sets {
                ConditionalSets::Separate(polys) => {
                    let params = polys
                        .iter()
                        .enumerate()
                        .flat_map(|(k, poly)| {
                            let config = config_words(v, k);
                            poly.vertices().iter().enumerate().map(move |(j, x)| CredalParam {
                                config: config.clone(),
                                name: format!("v{}", j + 1),
                                value: ParamValue::Numbers(x.clone()),
                            })
                        })
                        .collect();
                    (ColumnMode::Separate, params)
                }
                ConditionalSets::Joint(tables) => {
                    let params = tables
                        .iter()
                        .enumerate()
                        .map(|(j, t)| CredalParam {
                            config: Vec::new(),
                            name: format!("v{}", j + 1),
                            value: ParamValue::Numbers(t.concat()),
                        })
                        .collect();
                    (ColumnMode::Joint, params)
                }
            };
            doc.credal.push(CredalDecl {
                variable: vars[v].name.clone(),
                class: CredalClass::Vertices,
                columns,
                params,
            });
        }
        doc
    }
}

type Locate<'a> = &'a dyn Fn(Loc) -> Position;

fn sem(locate: Locate<'_>, loc: Loc, msg: impl Into<String>) -> ParseError {
    ParseError::semantic(locate(loc), msg)
}

/// Checks a probability row read from a file and renormalizes it exactly.
fn normalize_row(row: &[f64]) -> std::result::Result<Vec<f64>, String> {
    if let Some(x) = row.iter().find(|x| **x < -INPUT_SUM_TOL) {
        return Err(format!("negative probability {x}"));
    }
    let clipped: Vec<f64> = row.iter().map(|x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if (total - 1.0).abs() > INPUT_SUM_TOL {
        return Err(format!("probabilities sum to {total}, not 1"));
    }
    Ok(clipped.into_iter().map(|x| x / total).collect())
}

struct Decls<'a> {
    doc: &'a NetworkDocument,
    parents: Vec<Vec<VarId>>,
}

impl Decls<'_> {
    fn card(&self, v: VarId) -> usize {
        self.doc.variables[v].values.len()
    }

    fn configs(&self, v: VarId) -> usize {
        self.parents[v].iter().map(|&p| self.card(p)).product()
    }

    fn value_index(&self, v: VarId, name: &str) -> Option<usize> {
        self.doc.variables[v].values.iter().position(|x| x == name)
    }

    /// Parent configuration index for the given parent value names.
    fn config_index(&self, v: VarId, config: &[String]) -> std::result::Result<usize, String> {
        let parents = &self.parents[v];
        if config.len() != parents.len() {
            return Err(format!(
                "'{}' has {} parent(s); the configuration names {}",
                self.doc.variables[v].name,
                parents.len(),
                config.len()
            ));
        }
        let mut idx = 0;
        for (&p, name) in parents.iter().zip(config) {
            let val = self
                .value_index(p, name)
                .ok_or_else(|| format!("'{name}' is not a value of parent '{}'", self.doc.variables[p].name))?;
            idx = idx * self.card(p) + val;
        }
        Ok(idx)
    }
}

pub(crate) fn build_model(doc: &NetworkDocument, locate: Locate<'_>) -> std::result::Result<CredalModel, ParseError> {
    if doc.variables.is_empty() {
        return Err(sem(locate, Loc::Document, "no variables declared"));
    }
    let mut ids: BTreeMap<&str, VarId> = BTreeMap::new();
    for (i, v) in doc.variables.iter().enumerate() {
        if ids.insert(v.name.as_str(), i).is_some() {
            return Err(sem(
                locate,
                Loc::Variable(i),
                format!("duplicate variable '{}'", v.name),
            ));
        }
        if v.values.is_empty() {
            return Err(sem(
                locate,
                Loc::Variable(i),
                format!("variable '{}' has no values", v.name),
            ));
        }
        for (k, val) in v.values.iter().enumerate() {
            if v.values[..k].contains(val) {
                return Err(sem(
                    locate,
                    Loc::Variable(i),
                    format!("variable '{}' repeats value '{val}'", v.name),
                ));
            }
        }
    }
    let lookup = |name: &str, loc: Loc| {
        ids.get(name)
            .copied()
            .ok_or_else(|| sem(locate, loc, format!("undeclared variable '{name}'")))
    };

    let mut parents: Vec<Option<Vec<VarId>>> = vec![None; doc.variables.len()];
    for (i, p) in doc.parents.iter().enumerate() {
        let child = lookup(&p.child, Loc::Parents(i))?;
        if parents[child].is_some() {
            return Err(sem(
                locate,
                Loc::Parents(i),
                format!("parents of '{}' declared twice", p.child),
            ));
        }
        let mut list = Vec::with_capacity(p.parents.len());
        for name in &p.parents {
            let id = lookup(name, Loc::Parents(i))?;
            if id == child {
                return Err(sem(
                    locate,
                    Loc::Parents(i),
                    format!("'{name}' cannot be its own parent"),
                ));
            }
            if list.contains(&id) {
                return Err(sem(locate, Loc::Parents(i), format!("parent '{name}' listed twice")));
            }
            list.push(id);
        }
        parents[child] = Some(list);
    }
    let decls = Decls {
        doc,
        parents: parents.into_iter().map(Option::unwrap_or_default).collect(),
    };

    // credal specs first: they only need cardinalities and parent lists
    let mut specs: Vec<CredalSpec> = Vec::new();
    for (i, c) in doc.credal.iter().enumerate() {
        let node = lookup(&c.variable, Loc::Credal(i, None))?;
        if specs.iter().any(|s| s.node == node) {
            return Err(sem(
                locate,
                Loc::Credal(i, None),
                format!("credal set for '{}' declared twice", c.variable),
            ));
        }
        specs.push(credal_spec(&decls, node, c, i, locate)?);
    }

    let mut columns: Vec<Option<ConditionalTable>> = vec![None; doc.variables.len()];
    for (i, c) in doc.cpts.iter().enumerate() {
        let v = lookup(&c.variable, Loc::Cpt(i, None))?;
        if columns[v].is_some() {
            return Err(sem(
                locate,
                Loc::Cpt(i, None),
                format!("cpt for '{}' declared twice", c.variable),
            ));
        }
        let configs = decls.configs(v);
        let mut table: Vec<Option<Vec<f64>>> = vec![None; configs];
        for (r, row) in c.rows.iter().enumerate() {
            let loc = Loc::Cpt(i, Some(r));
            let idx = decls.config_index(v, &row.config).map_err(|m| sem(locate, loc, m))?;
            if row.probs.len() != decls.card(v) {
                return Err(sem(
                    locate,
                    loc,
                    format!(
                        "row has {} probabilities, '{}' has {} values",
                        row.probs.len(),
                        c.variable,
                        decls.card(v)
                    ),
                ));
            }
            if table[idx].is_some() {
                return Err(sem(locate, loc, "parent configuration given twice"));
            }
            let probs =
                normalize_row(&row.probs).map_err(|m| sem(locate, loc, format!("cpt '{}': {m}", c.variable)))?;
            table[idx] = Some(probs);
        }
        if let Some(missing) = table.iter().position(Option::is_none) {
            return Err(sem(
                locate,
                Loc::Cpt(i, None),
                format!(
                    "cpt '{}' has no row for parent configuration {}",
                    c.variable,
                    missing + 1
                ),
            ));
        }
        columns[v] = Some(table.into_iter().map(Option::unwrap).collect());
    }

    let mut b = NetworkBuilder::new();
    for v in &doc.variables {
        b.variable_with_values(&v.name, v.values.clone());
    }
    for v in 0..doc.variables.len() {
        let table = match (&columns[v], specs.iter().find(|s| s.node == v)) {
            (Some(t), _) => t.clone(),
            (None, Some(spec)) => spec.centroid_columns(),
            (None, None) => {
                return Err(sem(
                    locate,
                    Loc::Variable(v),
                    format!("'{}' has neither a cpt nor a credal set", doc.variables[v].name),
                ))
            }
        };
        b.cpt(v, &decls.parents[v], table);
    }
    let net = b.build().map_err(|e| {
        let loc = if doc.parents.is_empty() {
            Loc::Document
        } else {
            Loc::Parents(0)
        };
        sem(locate, loc, e.to_string())
    })?;
    for (i, spec) in specs.iter().enumerate() {
        spec.check_against(&net)
            .map_err(|e| sem(locate, Loc::Credal(i, None), e.to_string()))?;
    }

    let mut utilities = Vec::new();
    for (i, u) in doc.utilities.iter().enumerate() {
        if utilities.iter().any(|(n, _): &(String, UtilityFunction)| *n == u.name) {
            return Err(sem(
                locate,
                Loc::Utility(i),
                format!("utility '{}' declared twice", u.name),
            ));
        }
        let targets = u
            .targets
            .iter()
            .map(|t| lookup(t, Loc::Utility(i)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let f = UtilityFunction::new(&net, targets, u.values.clone())
            .map_err(|e| sem(locate, Loc::Utility(i), format!("utility '{}': {e}", u.name)))?;
        utilities.push((u.name.clone(), f));
    }
    Ok(CredalModel { net, specs, utilities })
}

fn numbers(p: &CredalParam) -> std::result::Result<&[f64], String> {
    match &p.value {
        ParamValue::Numbers(xs) => Ok(xs),
        ParamValue::Masses(_) => Err(format!("'{}' takes numbers, not focal sets", p.name)),
    }
}

fn scalar(p: &CredalParam) -> std::result::Result<f64, String> {
    match numbers(p)? {
        [x] => Ok(*x),
        xs => Err(format!("'{}' takes one number, got {}", p.name, xs.len())),
    }
}

/// One column's credal set from its parameters.
fn column_set(
    decls: &Decls<'_>,
    node: VarId,
    class: CredalClass,
    params: &[(usize, &CredalParam)],
) -> std::result::Result<Polytope, (Option<usize>, String)> {
    let dim = decls.card(node);
    let get = |name: &str| {
        params
            .iter()
            .find(|(_, p)| p.name == name)
            .map(|(i, p)| (*i, *p))
            .ok_or((None, format!("missing parameter '{name}'")))
    };
    let at = |i: usize| move |m: String| (Some(i), m);
    let vector = |name: &str| -> std::result::Result<(usize, Vec<f64>), (Option<usize>, String)> {
        let (i, p) = get(name)?;
        let xs = numbers(p).map_err(at(i))?;
        if xs.len() != dim {
            return Err((Some(i), format!("'{name}' needs {dim} numbers, got {}", xs.len())));
        }
        Ok((i, xs.to_vec()))
    };
    for (i, p) in params {
        let known = match class {
            CredalClass::Vertices => true,
            _ => class.required_params().contains(&p.name.as_str()),
        };
        if !known {
            return Err((
                Some(*i),
                format!("unknown parameter '{}' for class {}", p.name, class.tag()),
            ));
        }
    }
    let core = |i: usize| move |e: Error| (Some(i), e.to_string());
    match class {
        CredalClass::Vertices => {
            if params.is_empty() {
                return Err((None, "a vertices set needs at least one vertex".into()));
            }
            let mut vs = Vec::with_capacity(params.len());
            for (i, p) in params {
                let xs = numbers(p).map_err(at(*i))?;
                if xs.len() != dim {
                    return Err((
                        Some(*i),
                        format!("vertex '{}' needs {dim} numbers, got {}", p.name, xs.len()),
                    ));
                }
                vs.push(normalize_row(xs).map_err(at(*i))?);
            }
            Polytope::new(vs).map_err(core(params[0].0))
        }
        CredalClass::EpsContaminated => {
            let (i, base) = vector("base")?;
            let base = normalize_row(&base).map_err(at(i))?;
            let (j, eps) = get("eps")?;
            eps_contaminated(&base, scalar(eps).map_err(at(j))?).map_err(core(j))
        }
        CredalClass::TotalVariation => {
            let (i, base) = vector("base")?;
            let base = normalize_row(&base).map_err(at(i))?;
            let (j, eps) = get("eps")?;
            total_variation(&base, scalar(eps).map_err(at(j))?)
                .and_then(|s| s.to_polytope())
                .map_err(core(j))
        }
        CredalClass::BeliefFunction => {
            let (i, p) = get("masses")?;
            let ParamValue::Masses(ms) = &p.value else {
                return Err((Some(i), "masses are written {a, b}=0.5, …".into()));
            };
            let mut focal = Vec::with_capacity(ms.len());
            for (set, m) in ms {
                let idx = set
                    .iter()
                    .map(|name| {
                        decls
                            .value_index(node, name)
                            .ok_or((Some(i), format!("'{name}' is not a value of this variable")))
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                focal.push((idx, *m));
            }
            belief_function(dim, &focal).map_err(core(i))
        }
        CredalClass::DensityBounded | CredalClass::DensityRatio => {
            let (_, lo) = vector("lower")?;
            let (j, hi) = vector("upper")?;
            let set = if class == CredalClass::DensityBounded {
                density_bounded(&lo, &hi)
            } else {
                density_ratio(&lo, &hi)
            };
            set.and_then(|s| s.to_polytope()).map_err(core(j))
        }
    }
}

fn credal_spec(
    decls: &Decls<'_>,
    node: VarId,
    c: &CredalDecl,
    index: usize,
    locate: Locate<'_>,
) -> std::result::Result<CredalSpec, ParseError> {
    let err = |param: Option<usize>, msg: String| {
        sem(
            locate,
            Loc::Credal(index, param),
            format!("credal '{}': {msg}", c.variable),
        )
    };
    for (i, p) in c.params.iter().enumerate() {
        if c.params[..i].iter().any(|q| q.name == p.name && q.config == p.config) {
            return Err(err(Some(i), format!("parameter '{}' given twice", p.name)));
        }
    }
    let card = decls.card(node);
    let configs = decls.configs(node);
    match c.columns {
        ColumnMode::Joint => {
            if c.class != CredalClass::Vertices {
                return Err(err(
                    None,
                    "joint columns are only available for class 'vertices'".into(),
                ));
            }
            if c.params.is_empty() {
                return Err(err(None, "a vertices set needs at least one vertex".into()));
            }
            let mut tables = Vec::with_capacity(c.params.len());
            for (i, p) in c.params.iter().enumerate() {
                if !p.config.is_empty() {
                    return Err(err(
                        Some(i),
                        "joint vertices list whole tables and take no configuration".into(),
                    ));
                }
                let xs = numbers(p).map_err(|m| err(Some(i), m))?;
                if xs.len() != card * configs {
                    return Err(err(
                        Some(i),
                        format!(
                            "vertex '{}' needs {} numbers ({configs} columns of {card}), got {}",
                            p.name,
                            card * configs,
                            xs.len()
                        ),
                    ));
                }
                let table = xs
                    .chunks(card)
                    .map(normalize_row)
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|m| err(Some(i), m))?;
                tables.push(table);
            }
            CredalSpec::joint(node, tables).map_err(|e| err(None, e.to_string()))
        }
        ColumnMode::Separate => {
            let mut by_config: Vec<Vec<(usize, &CredalParam)>> = vec![Vec::new(); configs];
            for (i, p) in c.params.iter().enumerate() {
                let idx = decls.config_index(node, &p.config).map_err(|m| err(Some(i), m))?;
                by_config[idx].push((i, p));
            }
            let mut polys = Vec::with_capacity(configs);
            for (k, params) in by_config.iter().enumerate() {
                let poly = column_set(decls, node, c.class, params).map_err(|(i, m)| {
                    if configs > 1 {
                        err(i, format!("parent configuration {}: {m}", k + 1))
                    } else {
                        err(i, m)
                    }
                })?;
                polys.push(poly);
            }
            Ok(CredalSpec::separate(node, polys))
        }
    }
}
