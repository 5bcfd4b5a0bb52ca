//! JSON input formats. Every document may carry `"format": 1`.

use std::collections::BTreeMap;
use std::path::Path;

use mlrelax::linearization::{LinClass, Linearization, LinearizationFile};
use mlrelax::model::{Hypergraph, MultilinearInstance, VarKey};
use mlrelax::rational;
use mlrelax::Rational;
use serde::Deserialize;

use crate::CliError;

/// A rational written as `"p/q"`, `"p"` or a JSON integer.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RationalText {
    Int(i64),
    Text(String),
}

impl RationalText {
    fn value(&self) -> Result<Rational, CliError> {
        match self {
            RationalText::Int(v) => Ok(rational::int(*v)),
            RationalText::Text(t) => rational::parse(t).ok_or_else(|| CliError::Input(format!("not a rational: {t:?}"))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonomialEntry {
    coef: RationalText,
    vars: Vec<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintEntry {
    terms: Vec<MonomialEntry>,
    rhs: RationalText,
    #[serde(default = "default_sense")]
    sense: String,
}

fn default_sense() -> String {
    "<=".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    #[serde(default = "one")]
    format: u32,
    num_vars: u32,
    #[serde(default)]
    objective: Vec<MonomialEntry>,
    #[serde(default)]
    constraints: Vec<ConstraintEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointEntry {
    vars: Vec<u32>,
    value: RationalText,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointFile {
    #[serde(default = "one")]
    format: u32,
    entries: Vec<PointEntry>,
}

fn one() -> u32 {
    1
}

fn check_format(path: &Path, format: u32) -> Result<(), CliError> {
    if format != 1 {
        return Err(CliError::Input(format!("{}: unsupported format {format}", path.display())));
    }
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn monomials(entries: &[MonomialEntry]) -> Result<Vec<(Rational, Vec<u32>)>, CliError> {
    entries.iter().map(|m| Ok((m.coef.value()?, m.vars.clone()))).collect()
}

pub fn load_instance(path: &Path) -> Result<MultilinearInstance, CliError> {
    let file: InstanceFile = read_json(path)?;
    check_format(path, file.format)?;
    let mut constraints = Vec::with_capacity(file.constraints.len());
    for c in &file.constraints {
        let terms = monomials(&c.terms)?;
        let rhs = c.rhs.value()?;
        match c.sense.as_str() {
            "<=" => constraints.push((terms, rhs)),
            ">=" => constraints.push((terms.into_iter().map(|(k, v)| (-k, v)).collect(), -rhs)),
            other => return Err(CliError::Input(format!("{}: unknown constraint sense {other:?}", path.display()))),
        }
    }
    MultilinearInstance::from_monomials(file.num_vars, monomials(&file.objective)?, constraints)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn load_point(path: &Path) -> Result<BTreeMap<VarKey, Rational>, CliError> {
    let file: PointFile = read_json(path)?;
    check_format(path, file.format)?;
    let mut point = BTreeMap::new();
    for e in &file.entries {
        let key = mlrelax::VarSet::new(e.vars.iter().copied())
            .map(VarKey::from_set)
            .map_err(|err| CliError::Input(format!("{}: {err}", path.display())))?;
        if point.insert(key.clone(), e.value.value()?).is_some() {
            return Err(CliError::Input(format!("{}: repeated coordinate {key}", path.display())));
        }
    }
    Ok(point)
}

pub fn load_linearization(path: &Path) -> Result<(Linearization, Hypergraph, LinClass), CliError> {
    let file: LinearizationFile = read_json(path)?;
    file.load().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// `"1,2,3"` into a member list.
pub fn parse_set(text: &str) -> Result<mlrelax::VarSet, CliError> {
    let members = text
        .split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|_| CliError::Input(format!("not a variable list: {text:?}"))))
        .collect::<Result<Vec<u32>, _>>()?;
    mlrelax::VarSet::new(members).map_err(|e| CliError::Input(e.to_string()))
}
