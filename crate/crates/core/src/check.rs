//! Named pass/fail records shared by all checkers.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// Holds only within the numerical floor, not strictly.
    PassAtFloor,
    Fail,
    NotEvaluated,
}

impl Status {
    pub fn ok(self) -> bool {
        matches!(self, Status::Pass | Status::PassAtFloor)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::PassAtFloor => "pass_at_floor",
            Status::Fail => "fail",
            Status::NotEvaluated => "not_evaluated",
        })
    }
}

/// One evaluated check. `value` is the worst defect or margin seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub value: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    /// Passes when `defect < tolerance`.
    pub fn defect(name: impl Into<String>, defect: f64, tolerance: f64) -> Self {
        let status = if defect < tolerance { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, value: defect, tolerance, detail: String::new() }
    }

    /// Passes when `margin >= -tolerance`; `PassAtFloor` if the margin is negative but within tolerance.
    pub fn margin(name: impl Into<String>, margin: f64, tolerance: f64) -> Self {
        let status = if margin >= 0.0 {
            Status::Pass
        } else if margin >= -tolerance {
            Status::PassAtFloor
        } else {
            Status::Fail
        };
        Self { name: name.into(), status, value: margin, tolerance, detail: String::new() }
    }

    pub fn skipped(name: impl Into<String>, why: impl Into<String>) -> Self {
        Self { name: name.into(), status: Status::NotEvaluated, value: 0.0, tolerance: 0.0, detail: why.into() }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn ok(&self) -> bool {
        self.status.ok()
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} (value {:.3e}, tol {:.1e})", self.name, self.status, self.value, self.tolerance)?;
        if !self.detail.is_empty() {
            write!(f, " [{}]", self.detail)?;
        }
        Ok(())
    }
}

/// First failing check, if any.
pub fn first_failure(checks: &[Check]) -> Option<&Check> {
    checks.iter().find(|c| c.status == Status::Fail)
}
