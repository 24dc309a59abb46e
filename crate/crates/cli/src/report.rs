use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use cogame::{Outcome, Verdict};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub command: String,
    /// Hex SHA-256 over the inputs in argument order.
    pub input_digest: String,
    pub checks: Vec<Check>,
    pub timing_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub subject: String,
    pub outcome: Outcome,
    pub vacuous: bool,
    pub summary: String,
    /// Set when the check asserts a known outcome rather than requiring
    /// `holds`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Outcome>,
    pub detail: Value,
    #[serde(skip)]
    pub lines: Vec<String>,
}

impl Check {
    pub fn new(name: &str, subject: &str, outcome: Outcome, summary: impl Into<String>, detail: Value) -> Self {
        Check {
            name: name.to_owned(),
            subject: subject.to_owned(),
            outcome,
            vacuous: false,
            summary: summary.into(),
            expected: None,
            detail,
            lines: Vec::new(),
        }
    }

    pub fn from_verdict(name: &str, subject: &str, v: &Verdict) -> Self {
        Check {
            vacuous: v.is_vacuous(),
            ..Check::new(
                name,
                subject,
                v.outcome,
                v.note.clone(),
                serde_json::to_value(v).expect("verdicts serialize"),
            )
        }
    }

    pub fn with_lines(mut self, lines: Vec<String>) -> Self {
        self.lines = lines;
        self
    }

    pub fn expecting(mut self, outcome: Outcome) -> Self {
        self.expected = Some(outcome);
        self
    }

    pub fn passed(&self) -> bool {
        self.outcome == self.expected.unwrap_or(Outcome::Holds)
    }
}

pub fn digest<'a>(inputs: impl IntoIterator<Item = &'a [u8]>) -> String {
    let mut h = Sha256::new();
    for bytes in inputs {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

pub fn outcome_word(o: Outcome) -> &'static str {
    match o {
        Outcome::Holds => "holds",
        Outcome::Fails => "fails",
    }
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().all(Check::passed) {
            0
        } else {
            1
        }
    }

    pub fn human(&self) -> String {
        let mut out = String::new();
        let name_w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let subj_w = self.checks.iter().map(|c| c.subject.len()).max().unwrap_or(0);
        for c in &self.checks {
            let mut word = outcome_word(c.outcome).to_owned();
            if c.vacuous {
                word.push_str(" (vacuous)");
            }
            if let Some(e) = c.expected {
                let mark = if c.passed() { "as expected" } else { "UNEXPECTED" };
                word.push_str(&format!(" [{mark}: {}]", outcome_word(e)));
            }
            out.push_str(&format!(
                "{:name_w$}  {:subj_w$}  {word}  {}\n",
                c.name, c.subject, c.summary
            ));
            for l in &c.lines {
                out.push_str(&format!("    {l}\n"));
            }
        }
        out
    }
}
