use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => teelab::info::bits(nats),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Fusion,
    Ring,
    Stabilizer,
    Audit,
    Sweep,
}

/// Parameter lists for a sweep; the target scenario decides which ones matter.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub category: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub q: Vec<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub p: Vec<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub widths: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<usize>,
}

impl Grid {
    pub fn is_empty(&self) -> bool {
        self == &Grid::default()
    }
}

/// One run, as read from a JSON document and then overridden by flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    /// Bundled name or path to a category file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    /// Ring arcs `[A, B1, C, B2]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arcs: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    /// One common width, or `[A, B, C]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub widths: Option<Vec<usize>>,
    /// `[e, m]`; all sectors when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sector: Option<Vec<u32>>,
    /// Nested levels for the audit replay.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Kind>,
    #[serde(skip_serializing_if = "Grid::is_empty")]
    pub grid: Grid,
    /// Where the report goes; not part of the echo or the hash.
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr, $($field:ident),*) => {
        $(if $src.$field.is_some() { $dst.$field = $src.$field.clone(); })*
    };
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }

    /// Fields set in `flags` win.
    pub fn overridden_by(mut self, flags: &ScenarioConfig) -> Self {
        overlay!(
            self, flags, kind, category, q, arcs, p, size, widths, sector, n, trace, epsilon, alpha, eps_points,
            seed, target, output, units
        );
        let g = &flags.grid;
        if !g.category.is_empty() {
            self.grid.category = g.category.clone();
        }
        if !g.q.is_empty() {
            self.grid.q = g.q.clone();
        }
        if !g.p.is_empty() {
            self.grid.p = g.p.clone();
        }
        if !g.widths.is_empty() {
            self.grid.widths = g.widths.clone();
        }
        if !g.n.is_empty() {
            self.grid.n = g.n.clone();
        }
        self
    }

    pub fn units(&self) -> Units {
        self.units.unwrap_or_default()
    }

    /// SHA-256 of the canonical JSON of the resolved config, plus the trace file's bytes if any.
    pub fn input_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("config serializes"));
        if let Some(bytes) = self.trace.as_ref().and_then(|t| fs::read(t).ok()) {
            h.update(bytes);
        }
        hex::encode(h.finalize())
    }
}

/// Comma-separated integers and inclusive ranges `a..=b`, e.g. `1,4..=6`.
pub fn parse_list<T: TryFrom<u64>>(s: &str) -> Result<Vec<T>, CliError> {
    let bad = |m: String| CliError::Config(format!("list `{s}`: {m}"));
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad(format!("`{t}` is not a non-negative integer")));
    let mut raw = vec![];
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..=") {
            Some((lo, hi)) => {
                let (lo, hi) = (num(lo)?, num(hi)?);
                if hi < lo {
                    return Err(bad(format!("empty range `{part}`")));
                }
                raw.extend(lo..=hi);
            }
            None => raw.push(num(part)?),
        }
    }
    if raw.is_empty() {
        return Err(bad("no values".into()));
    }
    raw.into_iter().map(|v| T::try_from(v).map_err(|_| bad(format!("{v} is out of range")))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list::<u32>("2,3,5").unwrap(), vec![2, 3, 5]);
        assert_eq!(parse_list::<usize>("1..=4, 7").unwrap(), vec![1, 2, 3, 4, 7]);
        assert!(parse_list::<u32>("3..=1").is_err());
        assert!(parse_list::<u32>("x").is_err());
        assert!(parse_list::<u32>("").is_err());
    }

    #[test]
    fn flags_override_file_fields() {
        let file: ScenarioConfig = serde_json::from_str(r#"{"kind": "ring", "q": 3, "arcs": [1, 1, 1, 1]}"#).unwrap();
        let flags = ScenarioConfig { q: Some(5), ..Default::default() };
        let merged = file.clone().overridden_by(&flags);
        assert_eq!(merged.q, Some(5));
        assert_eq!(merged.arcs, file.arcs);
        assert_ne!(merged.input_hash(), file.input_hash());
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"qq": 3}"#).is_err());
    }
}
