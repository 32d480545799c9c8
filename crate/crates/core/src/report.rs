//! Structured verification output.

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA: &str = "crlab/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

/// One check. `anchor` names the mathematical claim being checked, or is the
/// literal `"plumbing"` for infrastructure checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    pub status: Status,
    /// Measured quantity (residual, minimum, gap, ...).
    pub observed: Option<f64>,
    /// Bound the observed value was compared against.
    pub threshold: Option<f64>,
    /// Signed distance to failure; positive means the check holds.
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub witness: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn new(id: impl Into<String>, anchor: impl Into<String>, status: Status) -> Self {
        let mut anchor = anchor.into();
        if anchor.trim().is_empty() {
            anchor = "plumbing".to_owned();
        }
        Self {
            id: id.into(),
            anchor,
            status,
            observed: None,
            threshold: None,
            margin: None,
            witness: Value::Null,
            note: None,
        }
    }

    pub fn pass_if(id: impl Into<String>, anchor: impl Into<String>, ok: bool) -> Self {
        Self::new(id, anchor, if ok { Status::Pass } else { Status::Fail })
    }

    /// Passes iff `observed <= threshold`.
    pub fn at_most(id: impl Into<String>, anchor: impl Into<String>, observed: f64, threshold: f64) -> Self {
        let ok = observed <= threshold;
        let mut r = Self::pass_if(id, anchor, ok);
        r.observed = Some(observed);
        r.threshold = Some(threshold);
        r.margin = Some(threshold - observed);
        r
    }

    /// Passes iff `observed >= threshold`.
    pub fn at_least(id: impl Into<String>, anchor: impl Into<String>, observed: f64, threshold: f64) -> Self {
        let ok = observed >= threshold;
        let mut r = Self::pass_if(id, anchor, ok);
        r.observed = Some(observed);
        r.threshold = Some(threshold);
        r.margin = Some(observed - threshold);
        r
    }

    pub fn with_witness(mut self, witness: Value) -> Self {
        self.witness = witness;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub suite: String,
    pub config: Value,
    pub records: Vec<CheckRecord>,
    pub wall_time_ms: f64,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>) -> Self {
        Self {
            schema: SCHEMA.to_owned(),
            suite: suite.into(),
            config: Value::Null,
            records: Vec::new(),
            wall_time_ms: 0.0,
        }
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.records.extend(other.records);
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(CheckRecord::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| r.status == Status::Fail)
    }

    pub fn record(&self, id: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    /// The report with `wall_time_ms` zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_time_ms: 0.0,
            ..self.clone()
        }
    }
}

/// JSON form of a complex number.
pub fn complex_json(z: num_complex::Complex64) -> Value {
    serde_json::json!({ "re": z.re, "im": z.im })
}
