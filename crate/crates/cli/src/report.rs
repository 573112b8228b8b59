use std::process::ExitCode;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use sessprog_core::progress::{Evidence, ProgressVerdict};
use sessprog_core::semantics::CanonState;

/// What a subcommand produced: an exit status, a text rendering, a JSON
/// rendering and diagnostics for standard error.
pub struct Outcome {
    pub code: u8,
    pub text: String,
    pub json: Value,
    pub errors: Vec<String>,
}

impl Outcome {
    pub fn new(code: u8, text: String, body: &impl Serialize) -> Outcome {
        Outcome {
            code,
            text,
            json: serde_json::to_value(body).expect("report types serialize"),
            errors: Vec::new(),
        }
    }

    pub fn with_errors(mut self, errors: Vec<String>) -> Outcome {
        self.errors = errors;
        self
    }

    fn error(code: u8, message: String) -> Outcome {
        Outcome {
            code,
            text: String::new(),
            json: json!({ "error": message }),
            errors: vec![message],
        }
    }

    /// Unreadable or unparsable input, or a bad flag combination.
    pub fn input(message: String) -> Outcome {
        Outcome::error(2, message)
    }

    pub fn usage(message: String) -> Outcome {
        Outcome::error(2, message)
    }

    pub fn failure(message: String) -> Outcome {
        Outcome::error(1, message)
    }

    pub fn limit(message: String) -> Outcome {
        Outcome::error(3, message)
    }
}

pub fn emit(outcome: &Outcome, as_json: bool) -> ExitCode {
    if as_json {
        println!("{}", serde_json::to_string_pretty(&outcome.json).expect("JSON values serialize"));
    } else {
        print!("{}", outcome.text);
    }
    for e in &outcome.errors {
        eprintln!("{e}");
    }
    ExitCode::from(outcome.code)
}

/// Hex SHA-256 of the canonical key of a state.
pub fn state_hash(s: &CanonState) -> String {
    Sha256::digest(s.key().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn progress_text(v: &ProgressVerdict) -> String {
    let status = serde_json::to_value(v.status).expect("status serializes");
    let mut text = format!("{}\n", status.as_str().unwrap_or_default());
    match &v.evidence {
        Evidence::Assignment { values } => {
            for (k, n) in values {
                text.push_str(&format!("  {k} = {n}\n"));
            }
        }
        Evidence::Rejected { diagnostics } => {
            for d in diagnostics {
                text.push_str(&format!("  {d}\n"));
            }
        }
        Evidence::Counterexample {
            initial,
            trace,
            state,
            thread,
            endpoint,
            ..
        } => {
            text.push_str(&format!("  initial\t{initial}\n"));
            for (i, s) in trace.iter().enumerate() {
                text.push_str(&format!("  {i}\t{}\t{}\n", s.label, s.state));
            }
            text.push_str(&format!("  stuck on {endpoint} in `{thread}` at `{state}`\n"));
        }
        Evidence::Exploration {
            approximant,
            residual_checks,
        } => {
            text.push_str(&format!(
                "  {} states, {residual_checks} residual checks\n  approximant\t{approximant}\n",
                v.states_explored
            ));
        }
    }
    if v.truncated {
        text.push_str("  exploration truncated\n");
    }
    text
}
