use serde::Serialize;

use crate::scenarios::Check;

/// The machine-readable result of one CLI invocation (`--json`).
///
/// `data` carries the command-specific payload (moment vectors, Jacobian
/// report, trajectory summary). `passed` is false when any check failed,
/// which also makes the process exit with status 1.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    /// Echo of the inputs the command ran with.
    pub spec: serde_json::Value,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub data: serde_json::Value,
    pub artifacts: Vec<String>,
    /// Wall-clock seconds, only with `--timing` so that reports stay reproducible.
    pub timing: Option<f64>,
}

impl RunReport {
    pub fn new(
        command: impl Into<String>,
        spec: serde_json::Value,
        checks: Vec<Check>,
        data: serde_json::Value,
    ) -> Self {
        let passed = checks.iter().all(Check::passed);
        Self {
            command: command.into(),
            spec,
            passed,
            checks,
            data,
            artifacts: Vec::new(),
            timing: None,
        }
    }

    /// Text form: one line per check, then the artifacts.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = match c.status {
                crate::scenarios::CheckStatus::Pass => "PASS",
                crate::scenarios::CheckStatus::Fail => "FAIL",
                crate::scenarios::CheckStatus::Skipped => "SKIP",
            };
            match (c.residual, c.threshold) {
                (Some(r), Some(t)) => out.push_str(&format!("{status}  {:<44} {r:.3e} (< {t:.0e})\n", c.name)),
                _ => out.push_str(&format!("{status}  {}\n", c.name)),
            }
        }
        for a in &self.artifacts {
            out.push_str(&format!("wrote {a}\n"));
        }
        if let Some(t) = self.timing {
            out.push_str(&format!("elapsed {t:.3} s\n"));
        }
        out
    }
}
