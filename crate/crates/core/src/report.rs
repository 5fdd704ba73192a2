use serde::{Deserialize, Serialize};

/// Outcome of one named numerical check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub threshold: f64,
    pub passed: bool,
    /// The input that produced the worst residual, when the check failed.
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a check that passes iff `residual <= threshold` (NaN fails).
    pub fn record(
        &mut self,
        name: impl Into<String>,
        residual: f64,
        threshold: f64,
        witness: Option<String>,
    ) -> &Check {
        let passed = residual <= threshold;
        self.checks.push(Check {
            name: name.into(),
            max_residual: residual,
            threshold,
            passed,
            witness: if passed { None } else { witness },
        });
        self.checks.last().expect("just pushed")
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Largest residual over all checks.
    pub fn max_residual(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.max_residual)
            .fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
    }
}

/// Running maximum of a residual together with a description of where it
/// was attained.
#[derive(Debug, Clone, Default)]
pub(crate) struct Worst {
    pub value: f64,
    pub witness: Option<String>,
}

impl Worst {
    pub fn update(&mut self, value: f64, witness: impl FnOnce() -> String) {
        let value = if value.is_nan() { f64::INFINITY } else { value };
        if value > self.value || self.witness.is_none() && value >= self.value {
            self.value = value;
            self.witness = Some(witness());
        }
    }

    pub fn record(self, report: &mut Report, name: &str, threshold: f64) {
        report.record(name, self.value, threshold, self.witness);
    }
}
