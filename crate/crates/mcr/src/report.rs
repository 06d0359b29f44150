//! Validation reports: named checks with residuals and pass flags.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

/// A group of residual checks sharing a default tolerance. `pass` on each
/// check is `max_residual <= tolerance`, nothing else.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub suite: String,
    pub tolerance: f64,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Whether the kernel satisfies the strong exchange symmetry; recorded
    /// by the field-moment suite as a statement of fact, not a check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strong_condition_holds: Option<bool>,
}

impl ValidationReport {
    pub fn new(suite: &str, tolerance: f64) -> Self {
        ValidationReport {
            suite: suite.to_string(),
            tolerance,
            checks: Vec::new(),
            kappa: None,
            strong_condition_holds: None,
        }
    }

    pub fn push(&mut self, name: &str, max_residual: f64, counterexample: Option<String>) {
        let tolerance = self.tolerance;
        self.push_with_tol(name, max_residual, tolerance, counterexample);
    }

    pub fn push_with_tol(
        &mut self,
        name: &str,
        max_residual: f64,
        tolerance: f64,
        counterexample: Option<String>,
    ) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
            counterexample,
        });
    }

    /// Record a boolean expectation as a 0/1 residual.
    pub fn push_flag(&mut self, name: &str, ok: bool, detail: Option<String>) {
        self.push_with_tol(name, if ok { 0.0 } else { 1.0 }, 0.5, detail);
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.max_residual)
            .fold(0.0, f64::max)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Error out on the first failing check, otherwise pass the report through.
    pub fn into_result(self) -> Result<Self> {
        if let Some(bad) = self.checks.iter().find(|c| !c.pass) {
            return Err(Error::Constraint(format!(
                "{}/{} failed: residual {:.3e} > {:.1e}{}",
                self.suite,
                bad.name,
                bad.max_residual,
                bad.tolerance,
                bad.counterexample
                    .as_deref()
                    .map(|c| format!(" at {c}"))
                    .unwrap_or_default()
            )));
        }
        Ok(self)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "[{}]", self.suite)?;
        if let Some(k) = self.kappa {
            writeln!(f, "  kappa = {k}")?;
        }
        if let Some(holds) = self.strong_condition_holds {
            writeln!(
                f,
                "  strong exchange condition: {}",
                if holds { "holds" } else { "does not hold" }
            )?;
        }
        for c in &self.checks {
            writeln!(
                f,
                "  {:<36} residual {:>12.5e}  (tol {:.1e})  {}{}",
                c.name,
                c.max_residual,
                c.tolerance,
                if c.pass { "pass" } else { "FAIL" },
                c.counterexample
                    .as_deref()
                    .map(|ce| format!("  [{ce}]"))
                    .unwrap_or_default()
            )?;
        }
        Ok(())
    }
}

/// A complex matrix as nested JSON arrays of `[re, im]` pairs, rows outer,
/// in the fixed lexicographic product-basis order.
pub fn matrix_to_json(m: &CMatrix) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = (0..m.n)
        .map(|i| {
            let row: Vec<serde_json::Value> = (0..m.n)
                .map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im]))
                .collect();
            serde_json::Value::Array(row)
        })
        .collect();
    serde_json::Value::Array(rows)
}
