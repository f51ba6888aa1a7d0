use teelab::audit::{AuditTrace, DECREASING_TRACE};

use crate::config::{Kind, ScenarioConfig};
use crate::scenario::{audit_report, run, Clock};
use crate::CliError;

pub struct SelftestLine {
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

fn scenario(kind: Kind) -> ScenarioConfig {
    ScenarioConfig { kind: Some(kind), ..Default::default() }
}

/// Small end-to-end runs with known outcomes.
pub fn selftest() -> Result<Vec<SelftestLine>, CliError> {
    let cases: Vec<(&'static str, ScenarioConfig)> = vec![
        ("fibonacci fixed point", ScenarioConfig { category: Some("fibonacci".into()), n: Some(100), ..scenario(Kind::Fusion) }),
        ("ring q = 3 with replay", ScenarioConfig { q: Some(3), arcs: Some(vec![3, 1, 1, 1]), n: Some(1), ..scenario(Kind::Ring) }),
        ("toric code annulus", ScenarioConfig { p: Some(2), ..scenario(Kind::Stabilizer) }),
        ("toric code saturating replay", ScenarioConfig { category: Some("toric_code".into()), n: Some(4), ..scenario(Kind::Audit) }),
    ];
    let mut out = vec![];
    for (name, cfg) in cases {
        let rep = run(&cfg, &mut Clock::default())?;
        let detail = match rep.first_failure() {
            Some(c) => c.to_string(),
            None => format!("{} checks", rep.checks.len()),
        };
        out.push(SelftestLine { name, ok: rep.passed, detail });
    }
    let bad = AuditTrace::from_json(DECREASING_TRACE).map_err(|e| CliError::Config(e.to_string()))?;
    let rep = audit_report(&bad, &scenario(Kind::Audit), &mut Clock::default())?;
    let failed_at = rep.first_failure().map(|c| c.name.clone()).unwrap_or_default();
    out.push(SelftestLine {
        name: "decreasing trace is rejected",
        ok: failed_at == "monotonicity",
        detail: format!("first failure: {failed_at}"),
    });
    Ok(out)
}
