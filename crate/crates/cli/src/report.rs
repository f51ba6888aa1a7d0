use std::cell::Cell;
use std::collections::BTreeMap;

use serde::{Serialize, Serializer};
use teelab::check::{first_failure, Check};

use crate::config::{ScenarioConfig, Units};

thread_local! {
    static DISPLAY_UNITS: Cell<Units> = const { Cell::new(Units::Nats) };
}

/// An entropy held in nats; written in the report's display units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Nats(pub f64);

impl Serialize for Nats {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(DISPLAY_UNITS.with(Cell::get).convert(self.0))
    }
}

/// Numbers a sweep row is built from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Summary {
    /// `I(A:C|B)` of the base sector.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cmi: Option<Nats>,
    /// Lower bound on that `I`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<Nats>,
}

impl Summary {
    pub fn gamma(&self) -> Option<Nats> {
        self.cmi.map(|i| Nats(i.0 / 2.0))
    }

    pub fn margin(&self) -> Option<Nats> {
        Some(Nats(self.cmi?.0 - self.bound?.0))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub input_hash: String,
    pub scenario: ScenarioConfig,
    pub units: Units,
    pub summary: Summary,
    pub results: serde_json::Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl RunReport {
    pub fn new(scenario: ScenarioConfig, summary: Summary, results: serde_json::Value, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.status != teelab::check::Status::Fail);
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            input_hash: scenario.input_hash(),
            units: scenario.units(),
            scenario,
            summary,
            results,
            checks,
            passed,
            timings: None,
        }
    }

    pub fn first_failure(&self) -> Option<&Check> {
        first_failure(&self.checks)
    }
}

/// Serializes with every [`Nats`] converted to `units`.
pub fn with_units<T>(units: Units, f: impl FnOnce() -> T) -> T {
    let prev = DISPLAY_UNITS.with(|u| u.replace(units));
    let out = f();
    DISPLAY_UNITS.with(|u| u.set(prev));
    out
}

/// Converts a results struct to JSON in the given units.
pub fn to_value<T: Serialize>(units: Units, value: &T) -> serde_json::Value {
    with_units(units, || serde_json::to_value(value).expect("results serialize"))
}

pub fn to_json(report: &RunReport) -> String {
    let mut text = with_units(report.units, || serde_json::to_string_pretty(report).expect("report serializes"));
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_apply_only_at_serialization() {
        let x = Nats(2f64.ln());
        assert_eq!(with_units(Units::Bits, || serde_json::to_string(&x).unwrap()), "1.0");
        assert_eq!(serde_json::to_string(&x).unwrap(), format!("{}", 2f64.ln()));
        assert_eq!(x.0, 2f64.ln());
    }

    #[test]
    fn summary_derives_gamma_and_margin() {
        let s = Summary { cmi: Some(Nats(2.0)), bound: Some(Nats(1.5)) };
        assert_eq!(s.gamma(), Some(Nats(1.0)));
        assert_eq!(s.margin(), Some(Nats(0.5)));
        assert_eq!(Summary::default().margin(), None);
    }
}
