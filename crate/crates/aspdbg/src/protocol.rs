//! Newline-delimited JSON messages exchanged with a debugging front end.
//!
//! Every message is one JSON object with a `kind` field, the kind's
//! payload fields, and an optional `seq`. Outbound messages always carry a
//! `seq`; inbound ones may omit it.

use serde::{Deserialize, Serialize};

use crate::source::SourceSpan;

pub const PROTOCOL_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionMessage {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    #[serde(flatten)]
    pub payload: Payload,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Hello {
        version: String,
        files: Vec<String>,
        test: Vec<String>,
        /// `None` when every answer set is sampled.
        max_models_per_query: Option<usize>,
    },
    GroundReport {
        atoms: usize,
        program_rules: usize,
        debugging_rules: usize,
        assumptions: usize,
        warnings: Vec<RuleRef>,
    },
    Diagnosis {
        step: usize,
        status: Status,
        reason: Vec<String>,
        minimal: bool,
        findings: Vec<FindingInfo>,
        answered: Vec<AnswerInfo>,
    },
    Queries {
        step: usize,
        queries: Vec<QueryInfo>,
    },
    Answer {
        atom: String,
        value: bool,
    },
    Undo {
        to_step: usize,
    },
    Stop {},
    Finding {
        finding: FindingInfo,
    },
    Error {
        message: String,
        /// `seq` of the inbound message that caused the error, if known.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        in_reply_to: Option<u64>,
    },
    Bye {},
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Open,
    Finished,
    Inconsistent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleRef {
    pub rule_id: u32,
    pub span: Option<SourceSpan>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    pub var: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub substitution: Vec<Binding>,
    pub ground_instance: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FindingInfo {
    Rule {
        rule_id: u32,
        span: Option<SourceSpan>,
        rule: String,
        instances: Vec<InstanceInfo>,
    },
    Unsupported {
        atom: String,
        candidate_rules: Vec<RuleRef>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryInfo {
    pub atom: String,
    pub q_plus: usize,
    pub q_minus: usize,
    pub score: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerInfo {
    pub atom: String,
    pub value: bool,
}

impl SessionMessage {
    pub fn new(seq: u64, payload: Payload) -> Self {
        SessionMessage {
            seq: Some(seq),
            payload,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.payload {
            Payload::Hello { .. } => "hello",
            Payload::GroundReport { .. } => "ground_report",
            Payload::Diagnosis { .. } => "diagnosis",
            Payload::Queries { .. } => "queries",
            Payload::Answer { .. } => "answer",
            Payload::Undo { .. } => "undo",
            Payload::Stop {} => "stop",
            Payload::Finding { .. } => "finding",
            Payload::Error { .. } => "error",
            Payload::Bye {} => "bye",
        }
    }

    /// One line of JSON, without the newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("messages serialize")
    }

    pub fn from_line(line: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }
}

/// Best-effort `seq` of a line that failed to parse as a message.
pub fn salvage_seq(line: &str) -> Option<u64> {
    serde_json::from_str::<serde_json::Value>(line)
        .ok()?
        .get("seq")?
        .as_u64()
}
