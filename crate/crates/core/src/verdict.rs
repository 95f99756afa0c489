use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    StablyEmbedded,
    UniformlyStablyEmbedded,
    NotStablyEmbedded,
    Unknown,
}

impl Status {
    pub fn is_stably_embedded(self) -> bool {
        matches!(self, Status::StablyEmbedded | Status::UniformlyStablyEmbedded)
    }

    /// CLI exit code: 0 stably embedded, 1 not, 2 unknown.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::StablyEmbedded | Status::UniformlyStablyEmbedded => 0,
            Status::NotStablyEmbedded => 1,
            Status::Unknown => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reason {
    pub rule: String,
    pub outcome: Outcome,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<serde_json::Value>,
}

impl Reason {
    pub fn new(rule: &str, outcome: Outcome, detail: impl Into<String>) -> Reason {
        Reason { rule: rule.to_string(), outcome, detail: detail.into(), witness: None }
    }

    pub fn with_witness(mut self, w: serde_json::Value) -> Reason {
        self.witness = Some(w);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub reasons: Vec<Reason>,
}

impl Verdict {
    pub fn new(status: Status, reasons: Vec<Reason>) -> Verdict {
        Verdict { status, reasons }
    }

    pub fn witnesses(&self) -> impl Iterator<Item = &Reason> {
        self.reasons.iter().filter(|r| r.outcome == Outcome::Fail)
    }

    pub fn cites(&self, rule_prefix: &str) -> bool {
        self.reasons.iter().any(|r| r.rule.starts_with(rule_prefix))
    }
}
