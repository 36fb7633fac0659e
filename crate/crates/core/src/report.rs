//! Structured reports with a versioned schema header and the exit-code
//! contract: 0 verified, 1 refuted, 2 inconclusive, 3 malformed input.

use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "boundchain-report/1";

pub const EXIT_VERIFIED: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_SCHEMA_VIOLATION: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    Refuted,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Verified => EXIT_VERIFIED,
            Verdict::Refuted => EXIT_REFUTED,
            Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        }
    }
}

/// A machine-readable run report. Field order is fixed and nested values use
/// sorted maps, so identical runs serialize to identical bytes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub seed: Option<u64>,
    pub verdict: Verdict,
    pub summary: String,
    pub details: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, seed: Option<u64>, verdict: Verdict, summary: String) -> Report {
        Report {
            schema: SCHEMA.to_string(),
            command: command.to_string(),
            seed,
            verdict,
            summary,
            details: serde_json::Value::Null,
        }
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Report {
        self.details = details;
        self
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("report serializes");
        out.push(b'\n');
        out
    }
}
