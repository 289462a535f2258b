//! Check records and the JSON/CSV encodings shared by the CLI and the
//! acceptance suite. Every float is written with 17 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "pshlab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    pub fn holds(self, value: f64, limit: f64) -> bool {
        match self {
            Relation::Le => value <= limit,
            Relation::Lt => value < limit,
            Relation::Ge => value >= limit,
            Relation::Gt => value > limit,
        }
    }
}

/// `quantity relation limit`, e.g. `residual <= 1e-3`.
#[derive(Clone, Debug, Serialize)]
pub struct Bound {
    pub quantity: String,
    pub value: f64,
    pub relation: Relation,
    pub limit: f64,
    pub holds: bool,
}

/// One named check. `passed` is the conjunction of the bounds, and false when
/// the computation itself failed.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub bounds: Vec<Bound>,
    pub values: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: true,
            bounds: Vec::new(),
            values: BTreeMap::new(),
            notes: Vec::new(),
            error: None,
        }
    }

    pub fn bound(&mut self, quantity: impl Into<String>, value: f64, relation: Relation, limit: f64) -> &mut Self {
        let holds = relation.holds(value, limit);
        self.passed &= holds;
        self.bounds.push(Bound {
            quantity: quantity.into(),
            value,
            relation,
            limit,
            holds,
        });
        self
    }

    pub fn le(&mut self, quantity: impl Into<String>, value: f64, limit: f64) -> &mut Self {
        self.bound(quantity, value, Relation::Le, limit)
    }

    pub fn lt(&mut self, quantity: impl Into<String>, value: f64, limit: f64) -> &mut Self {
        self.bound(quantity, value, Relation::Lt, limit)
    }

    pub fn ge(&mut self, quantity: impl Into<String>, value: f64, limit: f64) -> &mut Self {
        self.bound(quantity, value, Relation::Ge, limit)
    }

    pub fn gt(&mut self, quantity: impl Into<String>, value: f64, limit: f64) -> &mut Self {
        self.bound(quantity, value, Relation::Gt, limit)
    }

    /// `lo <= value <= hi` as two bounds.
    pub fn within(&mut self, quantity: &str, value: f64, lo: f64, hi: f64) -> &mut Self {
        self.ge(quantity, value, lo).le(quantity, value, hi)
    }

    pub fn value(&mut self, key: impl Into<String>, v: f64) -> &mut Self {
        self.values.insert(key.into(), v);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn fail(&mut self, error: impl std::fmt::Display) -> &mut Self {
        self.passed = false;
        self.error = Some(error.to_string());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Every effective knob of the run.
    pub config: Value,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
    /// Subcommand payload (certificates, sweep rows, solver output).
    pub data: Value,
    /// Wall-clock seconds per check, plus `total`.
    pub wall_seconds: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: impl Into<String>, config: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: TOOL.into(),
            version: TOOL_VERSION.into(),
            command: command.into(),
            config,
            passed: true,
            checks: Vec::new(),
            data: Value::Null,
            wall_seconds: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, check: CheckRecord, seconds: f64) {
        self.passed &= check.passed;
        self.wall_seconds.insert(check.name.clone(), seconds);
        self.checks.push(check);
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        to_json_string(&v)
    }

    /// The report without wall-clock times; identical across reruns of a
    /// deterministic configuration.
    pub fn numeric_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(map) = &mut v {
            map.remove("wall_seconds");
        }
        to_json_string(&v)
    }
}

/// 17 significant digits. Non-finite values print as `NaN`, `inf`, `-inf`;
/// they only reach CSV output, since JSON values carry them as `null`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..16).contains(&exp) {
        let decimals = (16 - exp).max(1) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("f64");
                // serde_json maps non-finite floats to null before we get here
                out.push_str(&fmt_f64(x));
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            if items.iter().all(|x| x.is_number()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push_str(": ");
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Pretty JSON with 17-significant-digit floats.
pub fn to_json_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}
