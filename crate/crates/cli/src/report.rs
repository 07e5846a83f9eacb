//! JSON report shapes and the small text helpers shared by the commands.
//! Field names here are the stable machine-readable schema.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use plp_core::ground::Substitution;
use plp_core::logical::{Interval, WitnessDistribution};
use plp_core::syntax::Rational;
use plp_core::worlds::WorldSpace;

/// Exact fraction. Components are JSON integers when they fit in `i64`,
/// decimal strings otherwise.
#[derive(Debug, Serialize)]
pub struct Fraction {
    pub num: Value,
    pub den: Value,
}

fn big(s: String) -> Value {
    s.parse::<i64>().map(Value::from).unwrap_or(Value::String(s))
}

impl From<&Rational> for Fraction {
    fn from(r: &Rational) -> Self {
        Fraction { num: big(r.numer().to_string()), den: big(r.denom().to_string()) }
    }
}

#[derive(Debug, Serialize)]
pub struct Bounds {
    pub lower: Fraction,
    pub upper: Fraction,
}

impl From<&Interval> for Bounds {
    fn from(i: &Interval) -> Self {
        Bounds { lower: i.lower().into(), upper: i.upper().into() }
    }
}

pub fn theta_map(theta: &Substitution) -> BTreeMap<String, String> {
    theta.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[derive(Debug, Serialize)]
pub struct SubstitutionReport {
    pub theta: BTreeMap<String, String>,
    pub lower: Fraction,
    pub upper: Fraction,
    /// Only for queries with numeric bounds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entailed: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct WorldMass {
    pub atoms: Vec<String>,
    pub probability: Fraction,
}

#[derive(Debug, Serialize)]
pub struct WitnessReport {
    pub theta: BTreeMap<String, String>,
    pub lower: Option<Vec<WorldMass>>,
    pub upper: Option<Vec<WorldMass>>,
}

#[derive(Debug, Serialize)]
pub struct QueryReport {
    pub query: String,
    pub semantics: String,
    pub consistent: bool,
    /// `"yes"` or `"no"` for queries with numeric bounds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer: Option<&'static str>,
    pub substitutions: Vec<SubstitutionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<WitnessReport>>,
}

#[derive(Debug, Serialize)]
pub struct OracleRow {
    pub theta: BTreeMap<String, String>,
    pub engine: Bounds,
    pub oracle: Bounds,
    pub agree: bool,
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub query: String,
    pub semantics: String,
    pub consistent: bool,
    pub substitutions: Vec<OracleRow>,
    pub agree: bool,
}

#[derive(Debug, Serialize)]
pub struct PartitionReport {
    pub consistent: bool,
    pub levels: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub consistent: bool,
}

#[derive(Debug, Serialize)]
pub struct SelftestRow {
    pub example: String,
    pub semantics: String,
    pub expected: Bounds,
    pub computed: Bounds,
    /// `"pass"`, `"fail"` or `"info"`.
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn world_masses(space: &WorldSpace, w: &WitnessDistribution) -> Vec<WorldMass> {
    w.iter()
        .map(|(world, p)| WorldMass {
            atoms: space.atoms_of(*world).iter().map(|a| a.to_string()).collect(),
            probability: p.into(),
        })
        .collect()
}

/// `{X/tweety, L/19/20, U/1}`: the object bindings followed by the bound
/// variables, as an answer substitution.
pub fn answer_text(theta: &Substitution, names: (&str, &str), i: &Interval) -> String {
    let mut parts: Vec<String> = theta.iter().map(|(k, v)| format!("{k}/{v}")).collect();
    parts.push(format!("{}/{}", names.0, i.lower()));
    parts.push(format!("{}/{}", names.1, i.upper()));
    format!("{{{}}}", parts.join(", "))
}

pub fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}
