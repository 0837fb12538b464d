//! Command reports and their two renderings: JSON and plain text.

use std::fmt::Write;

use exo_core::forms::{Form, Pseudostructure};
use exo_core::relations::{OriginationEvent, Relation, StructureClass};
use exo_core::{Chart, Confidence, Verdict};
use serde::Serialize;
use serde_json::{json, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartInfo {
    pub dim: usize,
    pub vars: Vec<String>,
}

impl ChartInfo {
    pub fn none() -> ChartInfo {
        ChartInfo {
            dim: 0,
            vars: Vec::new(),
        }
    }

    pub fn of(chart: &Chart) -> ChartInfo {
        ChartInfo {
            dim: chart.dim(),
            vars: chart.names().to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Form,
    Verdict,
    Event,
    Class,
    Relation,
    Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Item {
    pub name: String,
    pub kind: Kind,
    pub value: Value,
    pub confidence: &'static str,
}

/// Labels for the two outcomes of a verdict, e.g. `CLOSED` and `NOT_CLOSED`.
#[derive(Clone, Copy, Debug)]
pub struct Labels(pub &'static str, pub &'static str);

pub const CLOSED: Labels = Labels("CLOSED", "NOT_CLOSED");
pub const ZERO: Labels = Labels("ZERO", "NONZERO");
pub const CANONICAL: Labels = Labels("CANONICAL", "NOT_CANONICAL");

pub fn verdict_label(v: Verdict, labels: Labels) -> &'static str {
    match v {
        Verdict::Holds(_) => labels.0,
        Verdict::Fails(_) => labels.1,
        Verdict::Indeterminate => "INDETERMINATE",
    }
}

fn verdict_value(v: Verdict, labels: Labels) -> Value {
    json!({ "value": verdict_label(v, labels), "confidence": v.confidence().as_str() })
}

fn form_text(f: &Form) -> String {
    f.display().to_string()
}

fn relation_value(r: &Relation) -> Value {
    json!({
        "kind": r.kind().as_str().to_uppercase(),
        "potential": r.lhs().map(form_text),
        "rhs": form_text(r.rhs()),
        "pseudostructure": r.pseudostructure().map(Pseudostructure::to_string),
    })
}

impl Item {
    pub fn form(name: impl Into<String>, f: &Form) -> Item {
        Item {
            name: name.into(),
            kind: Kind::Form,
            value: Value::String(form_text(f)),
            confidence: Confidence::Exact.as_str(),
        }
    }

    pub fn verdict(name: impl Into<String>, v: Verdict, labels: Labels) -> Item {
        Item {
            name: name.into(),
            kind: Kind::Verdict,
            value: Value::String(verdict_label(v, labels).into()),
            confidence: v.confidence().as_str(),
        }
    }

    pub fn label(name: impl Into<String>, label: &str, confidence: Confidence) -> Item {
        Item {
            name: name.into(),
            kind: Kind::Verdict,
            value: Value::String(label.into()),
            confidence: confidence.as_str(),
        }
    }

    pub fn relation(name: impl Into<String>, r: &Relation) -> Item {
        Item {
            name: name.into(),
            kind: Kind::Relation,
            value: relation_value(r),
            confidence: r.confidence().as_str(),
        }
    }

    pub fn event(name: impl Into<String>, e: &OriginationEvent) -> Item {
        let confidence = e
            .form_closed
            .confidence()
            .min(e.dual_closed.confidence())
            .min(e.residual_vanishes.confidence());
        Item {
            name: name.into(),
            kind: Kind::Event,
            value: json!({
                "pseudostructure": e.pseudostructure.to_string(),
                "restricted": form_text(&e.restricted),
                "form_closed": verdict_value(e.form_closed, CLOSED),
                "dual_closed": verdict_value(e.dual_closed, CLOSED),
                "relation": relation_value(&e.relation),
                "residual": form_text(&e.residual),
                "residual_vanishes": verdict_value(e.residual_vanishes, ZERO),
            }),
            confidence: confidence.as_str(),
        }
    }

    pub fn class(name: impl Into<String>, c: &StructureClass) -> Item {
        Item {
            name: name.into(),
            kind: Kind::Class,
            value: json!({
                "p": c.p,
                "k": c.k,
                "n": c.n,
                "N": c.formed_dim,
                "interaction": c.interaction.as_str(),
                "pseudostructure_dim": c.pseudostructure_dim,
            }),
            confidence: Confidence::Exact.as_str(),
        }
    }

    /// A number that may be unavailable, e.g. a norm at a pole.
    pub fn scalar(name: impl Into<String>, x: Option<f64>, confidence: Confidence) -> Item {
        Item {
            name: name.into(),
            kind: Kind::Scalar,
            value: x.map_or(Value::Null, Value::from),
            confidence: confidence.as_str(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub chart: ChartInfo,
    pub results: Vec<Item>,
    pub seed: u64,
    pub version: &'static str,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.command).unwrap();
        if self.results.is_empty() {
            writeln!(out, "  (no results)").unwrap();
        }
        for item in &self.results {
            match &item.value {
                Value::Object(fields) => {
                    writeln!(
                        out,
                        "  {} [{}, {}]",
                        item.name,
                        kind_name(item.kind),
                        item.confidence
                    )
                    .unwrap();
                    for (k, v) in fields {
                        writeln!(out, "    {k}: {}", plain(v)).unwrap();
                    }
                }
                v => writeln!(out, "  {}: {} [{}]", item.name, plain(v), item.confidence).unwrap(),
            }
        }
        out
    }
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Form => "form",
        Kind::Verdict => "verdict",
        Kind::Event => "event",
        Kind::Class => "class",
        Kind::Relation => "relation",
        Kind::Scalar => "scalar",
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        Value::Object(m) => {
            let label = m.get("value").map(plain).unwrap_or_default();
            match m.get("confidence") {
                Some(c) => format!("{label} ({})", plain(c)),
                None => m
                    .iter()
                    .map(|(k, v)| format!("{k} {}", plain(v)))
                    .collect::<Vec<_>>()
                    .join(", "),
            }
        }
        other => other.to_string(),
    }
}
