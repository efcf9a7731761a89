use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use contact_core::curve::ContactRatio;
use contact_core::expr::{print_polynomial, print_tuple, VarNames};
use contact_core::typecalc::TypeValue;
use contact_core::{Curve, GaussianRational, Order, Polynomial, Rational, Truncation};

pub const FORMAT: &str = "contact-report/1";
pub const MACHINE_MARKER: &str = "--- machine ---";

/// Options of a run, echoed into the report so that it can be replayed.
#[derive(Serialize, Deserialize, Clone, Default, PartialEq, Eq, Debug)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub curve: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_mult: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_deg: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coeff_height: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trials: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kmin: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kmax: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub all: bool,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub assume_ps: bool,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
pub struct InputEcho {
    /// Canonical problem text.
    pub problem: String,
    pub sha256: String,
}

impl InputEcho {
    pub fn new(problem: String) -> Self {
        let sha256 = sha256_hex(problem.as_bytes());
        Self { problem, sha256 }
    }
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Debug)]
pub struct Claim {
    pub name: String,
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<Value>,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Debug)]
pub struct Report {
    pub format: String,
    pub tool_version: String,
    pub command: String,
    pub params: Params,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input: Option<InputEcho>,
    pub claims: Vec<Claim>,
    pub transcript: Vec<String>,
    /// `ok` or `violation`.
    pub status: String,
}

impl Report {
    pub fn new(command: &str, params: &Params, input: Option<InputEcho>) -> Self {
        Self {
            format: FORMAT.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            params: params.clone(),
            input,
            claims: Vec::new(),
            transcript: Vec::new(),
            status: "ok".into(),
        }
    }

    pub fn claim(&mut self, name: &str, value: Value, certificate: Option<Value>) {
        self.claims.push(Claim { name: name.into(), value, certificate });
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.transcript.push(line.into());
    }

    pub fn machine(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human-readable summary followed by the machine section.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.command, self.status);
        if let Some(input) = &self.input {
            for line in input.problem.lines() {
                let _ = writeln!(out, "  {}", line);
            }
        }
        for c in &self.claims {
            let _ = writeln!(out, "{}: {}", c.name, short(&c.value));
        }
        for t in &self.transcript {
            let _ = writeln!(out, "  {}", t);
        }
        let _ = writeln!(out, "{}", MACHINE_MARKER);
        out.push_str(&self.machine());
        out
    }

    /// Reads either a full rendered report or a bare machine section.
    pub fn parse(text: &str) -> Result<Self, String> {
        let body = match text.find(MACHINE_MARKER) {
            Some(at) => &text[at + MACHINE_MARKER.len()..],
            None => text,
        };
        serde_json::from_str(body.trim()).map_err(|e| format!("malformed report: {}", e))
    }
}

fn short(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Object(m) if m.contains_key("text") => m["text"].as_str().unwrap_or_default().to_string(),
        other => other.to_string(),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{:02x}", b);
        s
    })
}

pub fn rational(r: &Rational) -> Value {
    json!({ "num": r.numer().to_string(), "den": r.denom().to_string() })
}

pub fn gaussian(c: &GaussianRational) -> Value {
    json!({ "re": rational(&c.re), "im": rational(&c.im), "text": c.to_string() })
}

pub fn polynomial(p: &Polynomial, names: &VarNames) -> Value {
    let jet = match p.truncation() {
        Truncation::Exact => Value::Null,
        Truncation::Jet(n) => json!(n),
    };
    json!({ "text": print_polynomial(p, names), "jet": jet })
}

pub fn pullback_poly(p: &Polynomial) -> Value {
    polynomial(p, &VarNames::t())
}

pub fn curve(z: &Curve) -> Value {
    json!({ "text": print_tuple(&z.to_polynomials(), &VarNames::t()), "multiplicity": z.multiplicity() })
}

pub fn order(o: &Order) -> Value {
    match o {
        Order::Exact(k) => json!({ "kind": "exact", "value": k, "text": o.to_string() }),
        Order::AtLeast(k) => json!({ "kind": "at-least", "value": k, "text": o.to_string() }),
        Order::IdenticallyZero => json!({ "kind": "infinite", "text": o.to_string() }),
    }
}

pub fn type_value(v: &TypeValue<Rational>) -> Value {
    match v {
        TypeValue::ExactValue(x) => json!({ "kind": "exact", "value": rational(x), "text": v.to_string() }),
        TypeValue::AtLeast(x) => json!({ "kind": "at-least", "value": rational(x), "text": v.to_string() }),
        TypeValue::Infinite => json!({ "kind": "infinite", "text": v.to_string() }),
    }
}

pub fn ratio(r: &ContactRatio<Rational>) -> Value {
    match r {
        ContactRatio::Exact(x) => json!({ "kind": "exact", "value": rational(x), "text": r.to_string() }),
        ContactRatio::AtLeast(x) => json!({ "kind": "at-least", "value": rational(x), "text": r.to_string() }),
        ContactRatio::Infinite => json!({ "kind": "infinite", "text": r.to_string() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn rendered_report_parses_back() {
        let mut r = Report::new("order", &Params { seed: Some(3), ..Default::default() }, None);
        r.claim("order", order(&Order::Exact(4)), None);
        assert_eq!(Report::parse(&r.render()).unwrap(), r);
        assert_eq!(Report::parse(&r.machine()).unwrap(), r);
    }
}
