use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Kind, ScenarioConfig, Units};
use crate::report::{to_json, with_units, Nats, RunReport};
use crate::scenario::{run, Clock};
use crate::CliError;

pub const THREADS_VAR: &str = "TEELAB_THREADS";

/// Grid points in deterministic order: category, q, p, widths, n, last varying fastest.
pub fn grid_points(cfg: &ScenarioConfig) -> Result<Vec<ScenarioConfig>, CliError> {
    let target = cfg.target.ok_or_else(|| CliError::Config("sweep needs a target scenario".into()))?;
    if target == Kind::Sweep {
        return Err(CliError::Config("a sweep cannot target another sweep".into()));
    }
    if cfg.grid.is_empty() {
        return Err(CliError::Config("sweep grid is empty".into()));
    }
    let mut base = cfg.clone();
    base.kind = Some(target);
    base.target = None;
    base.grid = Default::default();
    base.output = None;
    let mut points = vec![base];
    let g = &cfg.grid;
    fn expand<T: Clone>(points: Vec<ScenarioConfig>, values: &[T], set: impl Fn(&mut ScenarioConfig, T)) -> Vec<ScenarioConfig> {
        if values.is_empty() {
            return points;
        }
        points
            .into_iter()
            .flat_map(|pt| {
                values.iter().map(|v| {
                    let mut c = pt.clone();
                    set(&mut c, v.clone());
                    c
                }).collect::<Vec<_>>()
            })
            .collect()
    }
    points = expand(points, &g.category, |c, v| c.category = Some(v));
    points = expand(points, &g.q, |c, v| c.q = Some(v));
    points = expand(points, &g.p, |c, v| c.p = Some(v));
    points = expand(points, &g.widths, |c, v| c.widths = Some(vec![v]));
    points = expand(points, &g.n, |c, v| c.n = Some(v));
    Ok(points)
}

/// Thread count from the environment; `None` leaves rayon's default.
pub fn thread_count() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{THREADS_VAR} must be a positive integer, got `{v}`"))),
        },
    }
}

#[derive(Debug, Serialize)]
pub struct Row {
    pub point: usize,
    pub target: String,
    pub category: Option<String>,
    pub q: Option<u32>,
    pub p: Option<u32>,
    pub width: Option<usize>,
    pub n: Option<usize>,
    #[serde(rename = "I")]
    pub cmi: Option<Nats>,
    pub gamma: Option<Nats>,
    pub bound: Option<Nats>,
    pub margin: Option<Nats>,
    pub passed: bool,
    pub failure: String,
}

pub struct SweepOutcome {
    pub rows: Vec<Row>,
    pub reports: Vec<Option<RunReport>>,
}

impl SweepOutcome {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn first_failure(&self) -> Option<&Row> {
        self.rows.iter().find(|r| !r.passed)
    }
}

fn row(i: usize, pt: &ScenarioConfig, out: &Result<RunReport, CliError>) -> Row {
    let mut r = Row {
        point: i,
        target: pt.kind.map(|k| format!("{k:?}").to_lowercase()).unwrap_or_default(),
        category: pt.category.clone(),
        q: pt.q,
        p: pt.p,
        width: pt.widths.as_ref().and_then(|w| w.first().copied()),
        n: pt.n,
        cmi: None,
        gamma: None,
        bound: None,
        margin: None,
        passed: false,
        failure: String::new(),
    };
    match out {
        Ok(rep) => {
            let s = rep.summary;
            (r.cmi, r.gamma, r.bound, r.margin) = (s.cmi, s.gamma(), s.bound, s.margin());
            r.passed = rep.passed;
            if let Some(c) = rep.first_failure() {
                r.failure = c.to_string();
            }
        }
        Err(e) => r.failure = e.to_string(),
    }
    r
}

/// Runs every grid point; a failing point is recorded in its row.
pub fn sweep(cfg: &ScenarioConfig) -> Result<SweepOutcome, CliError> {
    let points = grid_points(cfg)?;
    let work = || -> Vec<Result<RunReport, CliError>> {
        points.par_iter().map(|pt| run(pt, &mut Clock::default())).collect()
    };
    let results = match thread_count()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let rows = points.iter().zip(&results).enumerate().map(|(i, (pt, out))| row(i, pt, out)).collect();
    Ok(SweepOutcome { rows, reports: results.into_iter().map(Result::ok).collect() })
}

pub fn write_csv<W: std::io::Write>(rows: &[Row], units: Units, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    with_units(units, || -> Result<(), csv::Error> {
        for r in rows {
            w.serialize(r)?;
        }
        Ok(())
    })
    .map_err(|e| CliError::Io(e.to_string()))?;
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// `point-NNN.json` per successful point and `summary.csv`, all under `dir`.
pub fn write_outputs(outcome: &SweepOutcome, units: Units, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for (i, rep) in outcome.reports.iter().enumerate() {
        if let Some(rep) = rep {
            let path = dir.join(format!("point-{i:03}.json"));
            fs::write(&path, to_json(rep)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
    }
    let path = dir.join("summary.csv");
    let file = fs::File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    write_csv(&outcome.rows, units, file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Grid;

    #[test]
    fn grid_order_is_row_major() {
        let cfg = ScenarioConfig {
            target: Some(Kind::Stabilizer),
            grid: Grid { p: vec![2, 3, 5], widths: vec![2, 3], ..Default::default() },
            ..Default::default()
        };
        let pts = grid_points(&cfg).unwrap();
        let got: Vec<(u32, usize)> = pts.iter().map(|c| (c.p.unwrap(), c.widths.as_ref().unwrap()[0])).collect();
        assert_eq!(got, vec![(2, 2), (2, 3), (3, 2), (3, 3), (5, 2), (5, 3)]);
        assert!(pts.iter().all(|c| c.kind == Some(Kind::Stabilizer) && c.grid.is_empty()));
    }

    #[test]
    fn sweeps_need_a_target_and_a_grid() {
        assert!(grid_points(&ScenarioConfig::default()).is_err());
        let cfg = ScenarioConfig { target: Some(Kind::Ring), ..Default::default() };
        assert!(grid_points(&cfg).is_err());
    }
}
