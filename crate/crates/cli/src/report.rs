//! Exit codes, errors and output formats.

use std::fmt::Write as _;
use std::path::Path;

use cnp_core::covariance::Verdict;
use serde_json::Value;

/// All checks passed or were verified up to the horizon.
pub const OK: i32 = 0;
/// Some check failed.
pub const FAILED: i32 = 1;
/// Malformed input.
pub const INPUT: i32 = 2;
/// A hypothesis of the requested check does not hold.
pub const HYPOTHESIS: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: INPUT, message: message.into() }
    }

    pub fn hypothesis(message: impl Into<String>) -> Self {
        CliError { code: HYPOTHESIS, message: message.into() }
    }

    pub fn from_core(e: cnp_core::Error) -> Self {
        use cnp_core::Error::*;
        let code = match e {
            Domain(_) | Hypothesis(_) | IntervalInfinite(_) | DivisorSetInfinite(_) => HYPOTHESIS,
            ModuleMismatch(_) | Shape(_) | Parse(_) | Invalid(_) | MissingFibre(_) => INPUT,
        };
        CliError { code, message: e.to_string() }
    }

    pub fn located(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

/// A report and the exit code it implies.
pub struct Output {
    pub report: Value,
    pub code: i32,
}

impl Output {
    pub fn query(report: Value) -> Self {
        Output { report, code: OK }
    }

    pub fn check(report: Value, pass: bool) -> Self {
        Output { report, code: if pass { OK } else { FAILED } }
    }
}

/// Failures win over unmet hypotheses, which win over passes.
pub fn code_of<'a>(verdicts: impl IntoIterator<Item = &'a Verdict>) -> i32 {
    let mut code = OK;
    for v in verdicts {
        match v {
            Verdict::Fail(_) => return FAILED,
            Verdict::NotApplicable(_) => code = HYPOTHESIS,
            _ => {}
        }
    }
    code
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// One line of JSON.
    Json,
    /// Indented JSON.
    Pretty,
    Text,
}

pub fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string(v).expect("serializable"),
        Format::Pretty => serde_json::to_string_pretty(v).expect("serializable"),
        Format::Text => {
            let mut out = String::new();
            text(v, 0, &mut out);
            out.trim_end().to_string()
        }
    }
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(if *b { "yes".into() } else { "no".into() }),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.is_empty() => Some("none".into()),
        Value::Array(a) if a.iter().all(|x| matches!(x, Value::String(_) | Value::Number(_))) => {
            Some(a.iter().map(|x| scalar_text(x).unwrap()).collect::<Vec<_>>().join(", "))
        }
        _ => None,
    }
}

fn text(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match scalar_text(x) {
                    Some(s) => writeln!(out, "{pad}{k}: {s}").unwrap(),
                    None => {
                        writeln!(out, "{pad}{k}:").unwrap();
                        text(x, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for x in items {
                match scalar_text(x) {
                    Some(s) => writeln!(out, "{pad}- {s}").unwrap(),
                    None => {
                        writeln!(out, "{pad}-").unwrap();
                        text(x, depth + 1, out);
                    }
                }
            }
        }
        other => writeln!(out, "{pad}{}", scalar_text(other).unwrap()).unwrap(),
    }
}
