//! Serializable run reports and the schema they are checked against.

use crate::flux::{ConditionWitness, FluxProfile, Taxonomy};
use crate::solver::{ConvergenceReport, GateReport};
use crate::verify::VerificationReport;
use serde::Serialize;
use serde_json::Value;

pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub kind: String,
    pub description: String,
    pub s0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub verified_range: [f64; 2],
}

impl WitnessReport {
    pub fn from_witness(w: &ConditionWitness) -> Self {
        Self {
            kind: format!("{:?}", w.kind),
            description: w.describe(),
            s0: w.s0,
            alpha: w.alpha,
            beta: w.beta,
            verified_range: [w.verified_range.0, w.verified_range.1],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub profile: String,
    pub p: f64,
    pub eps_reg: f64,
    pub regular: bool,
    pub mder: Option<WitnessReport>,
    pub sder: Option<WitnessReport>,
    pub cond3: Option<WitnessReport>,
    pub cond4: Option<WitnessReport>,
}

pub fn classification_report(profile: &FluxProfile, tax: &Taxonomy) -> ClassificationReport {
    ClassificationReport {
        profile: profile.label().to_string(),
        p: profile.p(),
        eps_reg: profile.eps_reg(),
        regular: tax.regular,
        mder: tax.mder.as_ref().map(WitnessReport::from_witness),
        sder: tax.sder.as_ref().map(WitnessReport::from_witness),
        cond3: tax.cond3.as_ref().map(WitnessReport::from_witness),
        cond4: tax.cond4.as_ref().map(WitnessReport::from_witness),
    }
}

/// A row of the grid-refinement order table.
#[derive(Debug, Clone, Serialize)]
pub struct OrderRow {
    pub grid: Vec<usize>,
    pub h: f64,
    pub error_vs_finest: f64,
    pub observed_order: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub kind: String,
    pub label: String,
    pub classification: ClassificationReport,
    pub gate: GateReport,
    pub convergence: ConvergenceReport,
    pub verification: VerificationReport,
    pub refinement: Vec<OrderRow>,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyRunReport {
    pub kind: String,
    pub classification: ClassificationReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct HyperbolicBarrierReport {
    pub n: usize,
    pub c: f64,
    pub g_zero: f64,
    pub conservation_max_dev: f64,
    pub supersolution_max: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BarrierRunReport {
    pub kind: String,
    pub branch: String,
    pub delta: f64,
    pub alpha_floor: f64,
    pub c1: f64,
    pub gradient_bound: f64,
    pub heuristic: bool,
    pub supersolution_max: f64,
    pub supersolution_tolerance: f64,
    pub supersolution_pass: bool,
    pub hyperbolic: Vec<HyperbolicBarrierReport>,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityRunReport {
    pub kind: String,
    pub lambda: f64,
    pub samples: usize,
    pub violations: usize,
    pub all_hold: bool,
    pub all_sufficient: bool,
    pub artifacts: Vec<String>,
}

/// Validate a JSON value against the subset of JSON Schema used by the
/// shipped report schema (`type`, `properties`, `required`, `items`, `enum`,
/// `oneOf`, boolean `additionalProperties`).
pub fn validate_against_schema(value: &Value, schema: &Value) -> Result<(), String> {
    fn check(value: &Value, schema: &Value, path: &str) -> Result<(), String> {
        if let Some(one_of) = schema.get("oneOf").and_then(|v| v.as_array()) {
            let mut errs = Vec::new();
            for (i, sub) in one_of.iter().enumerate() {
                match check(value, sub, path) {
                    Ok(()) => return Ok(()),
                    Err(e) => errs.push(format!("variant {i}: {e}")),
                }
            }
            return Err(format!("{path}: no oneOf variant matched ({})", errs.join(" | ")));
        }
        if let Some(allowed) = schema.get("enum").and_then(|v| v.as_array()) {
            if !allowed.contains(value) {
                return Err(format!("{path}: value {value} not in enum"));
            }
        }
        if let Some(ty) = schema.get("type") {
            let names: Vec<&str> = match ty {
                Value::String(s) => vec![s.as_str()],
                Value::Array(a) => a.iter().filter_map(|v| v.as_str()).collect(),
                _ => vec![],
            };
            let ok = names.iter().any(|name| match *name {
                "object" => value.is_object(),
                "array" => value.is_array(),
                "string" => value.is_string(),
                "number" => value.is_number(),
                "integer" => value.as_i64().is_some() || value.as_u64().is_some(),
                "boolean" => value.is_boolean(),
                "null" => value.is_null(),
                _ => false,
            });
            if !ok {
                return Err(format!("{path}: expected type {names:?}, got {value}"));
            }
        }
        if let Some(req) = schema.get("required").and_then(|v| v.as_array()) {
            if let Some(obj) = value.as_object() {
                for key in req.iter().filter_map(|v| v.as_str()) {
                    if !obj.contains_key(key) {
                        return Err(format!("{path}: missing required key `{key}`"));
                    }
                }
            }
        }
        if let Some(props) = schema.get("properties").and_then(|v| v.as_object()) {
            if let Some(obj) = value.as_object() {
                for (key, sub) in props {
                    if let Some(v) = obj.get(key) {
                        check(v, sub, &format!("{path}.{key}"))?;
                    }
                }
                if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
                    for key in obj.keys() {
                        if !props.contains_key(key) {
                            return Err(format!("{path}: unexpected key `{key}`"));
                        }
                    }
                }
            }
        }
        if let Some(items) = schema.get("items") {
            if let Some(arr) = value.as_array() {
                for (i, v) in arr.iter().enumerate() {
                    check(v, items, &format!("{path}[{i}]"))?;
                }
            }
        }
        Ok(())
    }
    check(value, schema, "$")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_parses() {
        let schema: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
        assert!(schema.get("oneOf").is_some());
    }

    #[test]
    fn validator_flags_missing_keys() {
        let schema: Value = serde_json::from_str(
            r#"{"type": "object", "required": ["a"], "properties": {"a": {"type": "number"}}}"#,
        )
        .unwrap();
        assert!(validate_against_schema(&serde_json::json!({"a": 1.0}), &schema).is_ok());
        assert!(validate_against_schema(&serde_json::json!({}), &schema).is_err());
        assert!(validate_against_schema(&serde_json::json!({"a": "x"}), &schema).is_err());
    }
}
