//! Structured verification outcomes.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Unresolved,
    BudgetExhausted,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Unresolved => "unresolved",
            Status::BudgetExhausted => "budget_exhausted",
        }
    }
}

/// One named check. A failing report always carries a witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check_name: String,
    pub status: Status,
    pub witness: Option<Value>,
    pub elapsed_ms: u64,
    pub params: Value,
}

impl Report {
    pub fn new(check_name: impl Into<String>, status: Status) -> Self {
        Report {
            check_name: check_name.into(),
            status,
            witness: None,
            elapsed_ms: 0,
            params: Value::Object(Default::default()),
        }
    }

    pub fn with_witness(mut self, witness: Value) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn with_params(mut self, params: Value) -> Self {
        self.params = params;
        self
    }

    pub fn timed(mut self, started: Instant) -> Self {
        self.elapsed_ms = started.elapsed().as_millis() as u64;
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Builds a pass/fail report; a failure without an explicit witness
    /// gets a placeholder so the invariant above holds.
    pub fn from_outcome(check_name: impl Into<String>, ok: bool, witness: Option<Value>) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        let witness = match (ok, witness) {
            (false, None) => Some(Value::String("no witness recorded".into())),
            (_, w) => w,
        };
        Report { witness, ..Report::new(check_name, status) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failing_report_has_witness() {
        let r = Report::from_outcome("x", false, None);
        assert_eq!(r.status, Status::Fail);
        assert!(r.witness.is_some());
    }

    #[test]
    fn json_round_trip() {
        let r = Report::new("units", Status::BudgetExhausted)
            .with_witness(serde_json::json!({"k": 3}))
            .with_params(serde_json::json!({"n": 3}));
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"budget_exhausted\""));
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
