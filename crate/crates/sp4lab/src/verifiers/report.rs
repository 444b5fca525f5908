//! Verification reports, serialized as one JSON object per line.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Violated,
    Undecided,
}

/// Exhaustive enumeration or seeded sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Exhaustive,
    Sample { n: u64, seed: u64 },
}

impl Mode {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Mode::Exhaustive => None,
            Mode::Sample { seed, .. } => Some(*seed),
        }
    }
}

/// Counterexamples kept verbatim; the total count goes to `margins`.
pub const MAX_COUNTEREXAMPLES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub task: String,
    pub params: Value,
    pub status: Status,
    pub cases_total: u64,
    pub cases_run: u64,
    pub counterexamples: Vec<Value>,
    pub margins: BTreeMap<String, Value>,
    pub elapsed_ms: u64,
    pub seed: Option<u64>,
}

impl VerificationReport {
    pub fn new(task: impl Into<String>, params: Value, seed: Option<u64>) -> VerificationReport {
        VerificationReport {
            task: task.into(),
            params,
            status: Status::Pass,
            cases_total: 0,
            cases_run: 0,
            counterexamples: Vec::new(),
            margins: BTreeMap::new(),
            elapsed_ms: 0,
            seed,
        }
    }

    /// Records a failing case; status becomes `violated`.
    pub fn counterexample(&mut self, c: Value) {
        self.status = Status::Violated;
        let n = self.margins.get("counterexamples_total").and_then(Value::as_u64).unwrap_or(0) + 1;
        self.margins.insert("counterexamples_total".into(), n.into());
        if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
            self.counterexamples.push(c);
        }
    }

    pub fn undecided(&mut self) {
        if self.status == Status::Pass {
            self.status = Status::Undecided;
        }
    }

    pub fn margin(&mut self, key: &str, v: impl Into<Value>) {
        self.margins.insert(key.into(), v.into());
    }

    pub fn finish(mut self, start: Instant) -> VerificationReport {
        self.elapsed_ms = start.elapsed().as_millis() as u64;
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Merge of partition results: counts add, counterexamples concatenate.
    pub fn merge(&mut self, o: VerificationReport) {
        self.cases_total += o.cases_total;
        self.cases_run += o.cases_run;
        for c in o.counterexamples {
            self.counterexample(c);
        }
        self.status = match (self.status, o.status) {
            (Status::Violated, _) | (_, Status::Violated) => Status::Violated,
            (Status::Undecided, _) | (_, Status::Undecided) => Status::Undecided,
            _ => Status::Pass,
        };
        self.elapsed_ms += o.elapsed_ms;
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// The report with timing removed, for determinism comparisons.
    pub fn without_timing(&self) -> VerificationReport {
        VerificationReport { elapsed_ms: 0, ..self.clone() }
    }

    pub fn to_text(&self) -> String {
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Violated => "VIOLATED",
            Status::Undecided => "UNDECIDED",
        };
        let mut s = format!(
            "{:<10} {} {}  cases {}/{}  {} ms",
            status, self.task, self.params, self.cases_run, self.cases_total, self.elapsed_ms
        );
        for (k, v) in &self.margins {
            s.push_str(&format!("\n    {k}: {v}"));
        }
        for c in &self.counterexamples {
            s.push_str(&format!("\n    counterexample: {c}"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn status_follows_counterexamples() {
        let mut r = VerificationReport::new("t", json!({}), None);
        assert!(r.passed());
        r.counterexample(json!({"a": 1}));
        assert_eq!(r.status, Status::Violated);
        let line = r.to_json_line();
        for key in ["task", "params", "status", "cases_total", "cases_run", "counterexamples", "margins", "elapsed_ms", "seed"] {
            assert!(line.contains(&format!("\"{key}\"")), "{key}");
        }
    }

    #[test]
    fn merge_adds() {
        let mut a = VerificationReport::new("t", json!({}), None);
        a.cases_total = 3;
        let mut b = VerificationReport::new("t", json!({}), None);
        b.cases_total = 4;
        b.undecided();
        a.merge(b);
        assert_eq!((a.cases_total, a.status), (7, Status::Undecided));
    }
}
