use qsslab_core::Error;
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

pub const TOOL: &str = "qsslab";

/// One numeric result: passes when `value ≤ tolerance`.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        // Adding zero turns -0.0 into 0.0 for the JSON output.
        let value = value + 0.0;
        Check {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
            detail: None,
        }
    }

    /// Counts failures of a boolean property; tolerance zero.
    pub fn count(name: impl Into<String>, failures: usize) -> Self {
        Check::new(name, failures as f64, 0.0)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub kind: &'static str,
    pub message: String,
}

impl From<&Error> for ErrorInfo {
    fn from(e: &Error) -> Self {
        let (kind, message) = match e {
            Error::Usage(m) => ("usage", m),
            Error::Resource(m) => ("resource", m),
            Error::Protocol(m) => ("protocol", m),
        };
        ErrorInfo { kind, message: message.clone() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    pub error: Option<ErrorInfo>,
    pub notes: Vec<String>,
    pub details: Value,
}

impl Report {
    pub fn new(command: &str, config: RunConfig) -> Self {
        Report {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config,
            checks: Vec::new(),
            verdict: Verdict::Pass,
            error: None,
            notes: Vec::new(),
            details: Value::Null,
        }
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn finish(mut self) -> Self {
        if self.error.is_none() {
            self.verdict = if self.checks.iter().all(|c| c.passed) {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
        }
        self
    }

    pub fn failed_with(mut self, err: &Error) -> Self {
        self.verdict = Verdict::Error;
        self.error = Some(err.into());
        self
    }

    /// 0 pass, 1 failed check or protocol error, 2 usage, 3 resource.
    pub fn exit_code(&self) -> i32 {
        match (&self.verdict, self.error.as_ref().map(|e| e.kind)) {
            (Verdict::Pass, _) => 0,
            (_, Some("usage")) => 2,
            (_, Some("resource")) => 3,
            _ => 1,
        }
    }
}
