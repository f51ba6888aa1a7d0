use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use teelab::audit::{audit_trace, epsilon_grid, taylor_bound_sweep, AuditOptions, AuditTrace, Provenance, FLOOR};
use teelab::check::Check;
use teelab::dense::{
    check_fusion_property, check_global_distinguishability, check_local_indistinguishability, OPERATOR_CAP,
};
use teelab::fusion::{
    bound_constant, bundled, bundled_json, closed_form_fixed_point, fixed_point_from, fixed_point_iterative,
    fusion_probabilities, quantum_dimensions, tee_lower_bound, verify_fixed_point_identity, AnyonDistribution,
    FusionCategory, BUNDLED,
};
use teelab::ring::{self, RingError, RingSpec};
use teelab::stabilizer::{
    self, annulus_cmi, sector_states, verify_assumptions, AnnulusPartition, CmiCertificate, FusionStringRule,
    SectorLabel, ELL,
};

use crate::config::{Kind, ScenarioConfig};
use crate::report::{to_value, Nats, RunReport, Summary};
use crate::CliError;

/// Largest dense export the ring report cross-checks; the counting checks cover the rest.
pub const DENSE_CHECK_CAP: u128 = 1 << 10;

fn config<E: ToString>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

/// Named wall-clock phases of one run.
#[derive(Debug, Default)]
pub struct Clock {
    pub phases: BTreeMap<String, f64>,
}

impl Clock {
    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.phases.entry(name.to_string()).or_default() += start.elapsed().as_secs_f64();
        out
    }
}

pub fn run(cfg: &ScenarioConfig, clock: &mut Clock) -> Result<RunReport, CliError> {
    match cfg.kind {
        Some(Kind::Fusion) => run_fusion(cfg, clock),
        Some(Kind::Ring) => run_ring(cfg, clock),
        Some(Kind::Stabilizer) => run_stabilizer(cfg, clock),
        Some(Kind::Audit) => run_audit(cfg, clock),
        Some(Kind::Sweep) => Err(CliError::Config("a sweep cannot be run as a single scenario".into())),
        None => Err(CliError::Config("scenario kind is not set".into())),
    }
}

pub fn load_category(name: &str) -> Result<FusionCategory, CliError> {
    if bundled_json(name).is_some() {
        return bundled(name).map_err(config);
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(CliError::Config(format!(
            "`{name}` is neither a bundled category ({}) nor a file",
            BUNDLED.join(", ")
        )));
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{name}: {e}")))?;
    FusionCategory::from_json(&text).map_err(config)
}

#[derive(Serialize)]
struct BoundAt {
    n: usize,
    a0: String,
    value: Nats,
    ceiling: Nats,
}

#[derive(Serialize)]
struct FusionResults {
    category: String,
    labels: Vec<String>,
    quantum_dimensions: Vec<f64>,
    total_dimension: f64,
    log_total_dimension: Nats,
    p_star: Vec<f64>,
    p_min: f64,
    iterations: usize,
    identity_residual: f64,
    closed_form_distance: f64,
    k: f64,
    taylor_evaluations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    lower_bound: Option<BoundAt>,
}

fn run_fusion(cfg: &ScenarioConfig, clock: &mut Clock) -> Result<RunReport, CliError> {
    let name = cfg.category.as_deref().ok_or_else(|| CliError::Config("fusion needs a category".into()))?;
    let cat = load_category(name)?;
    let r = cat.rank();
    let (dims, fp) = clock.time("algebra", || -> Result<_, CliError> {
        let dims = quantum_dimensions(&cat).map_err(config)?;
        let fp = fusion_probabilities(&cat, &dims).map_err(config)?;
        Ok((dims, fp))
    })?;
    let closed = closed_form_fixed_point(&dims);
    let it = clock.time("fixed point", || fixed_point_iterative(&fp)).map_err(config)?;
    let residual = verify_fixed_point_identity(&fp, &closed).max.max(it.residual);
    let distance = it.p_star.sup_distance(&closed);
    // Uniqueness: every point mass flows to the same distribution.
    let mut spread = 0.0f64;
    for a in 0..r {
        let q = fixed_point_from(&fp, AnyonDistribution::point(r, a)).map_err(config)?;
        spread = spread.max(q.sup_distance(&closed));
    }
    let k = bound_constant(&closed, r).map_err(config)?;
    let grid = epsilon_grid(closed.min(), cfg.eps_points.unwrap_or(41));
    let taylor = clock.time("taylor sweep", || taylor_bound_sweep(&closed, &fp, &grid)).map_err(config)?;

    let mut checks = vec![
        Check::defect("fusion probabilities", fp.row_sum_defect().max(fp.associativity_defect()), 1e-12),
        Check::defect("fixed-point identity", residual, 1e-12),
        Check::defect("closed form agreement", distance, 1e-10),
        Check::defect("fixed-point uniqueness", spread, 1e-10),
    ];
    checks.extend(taylor.checks);

    let ceiling = (1.0 / closed.probs()[0]).ln();
    let lower_bound = match cfg.n {
        Some(n) => {
            let value = tee_lower_bound(0, &closed, n as u64, k).map_err(config)?;
            checks.push(Check::margin("bound below ceiling", ceiling - value, FLOOR));
            Some(BoundAt { n, a0: cat.label(0).to_string(), value: Nats(value), ceiling: Nats(ceiling) })
        }
        None => None,
    };
    let summary = Summary { cmi: Some(Nats(ceiling)), bound: lower_bound.as_ref().map(|b| b.value) };
    let results = FusionResults {
        category: cat.name().to_string(),
        labels: cat.labels().to_vec(),
        quantum_dimensions: dims.d.clone(),
        total_dimension: dims.total,
        log_total_dimension: Nats(dims.total.ln()),
        p_star: closed.probs().to_vec(),
        p_min: closed.min(),
        iterations: it.iterations,
        identity_residual: residual,
        closed_form_distance: distance,
        k,
        taylor_evaluations: taylor.evaluations,
        lower_bound,
    };
    Ok(RunReport::new(cfg.clone(), summary, to_value(cfg.units(), &results), checks))
}

#[derive(Serialize)]
struct SectorRow {
    label: String,
    cmi: Nats,
    gamma: Nats,
    #[serde(skip_serializing_if = "Option::is_none")]
    enumerated: Option<Nats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ranks: Option<CmiCertificate>,
}

#[derive(Serialize)]
struct ReplayResults {
    provenance: Provenance,
    n: usize,
    a0: String,
    epsilon: f64,
    alpha: f64,
    p_min: f64,
    k: f64,
    delta: Vec<f64>,
    combined_bound: Nats,
    final_bound: Nats,
    observed: Nats,
    margin: Nats,
}

fn replay(trace: &AuditTrace, cfg: &ScenarioConfig, clock: &mut Clock) -> Result<(ReplayResults, Vec<Check>), CliError> {
    if trace.n() == 0 {
        return Err(CliError::Config("the replay needs n >= 1".into()));
    }
    let opts = AuditOptions { epsilon: cfg.epsilon, alpha: cfg.alpha };
    let rep = clock.time("replay", || audit_trace(trace, &opts)).map_err(config)?;
    let results = ReplayResults {
        provenance: trace.provenance,
        n: rep.n,
        a0: rep.a0.clone(),
        epsilon: rep.epsilon,
        alpha: rep.alpha,
        p_min: rep.p_min,
        k: rep.k,
        delta: rep.delta.clone(),
        combined_bound: Nats(rep.combined_bound),
        final_bound: Nats(rep.final_bound),
        observed: Nats(rep.observed),
        margin: Nats(rep.final_margin()),
    };
    Ok((results, rep.checks))
}

fn prefixed(checks: Vec<Check>, prefix: &str) -> impl Iterator<Item = Check> + '_ {
    checks.into_iter().map(move |mut c| {
        c.name = format!("{prefix}: {}", c.name);
        c
    })
}

#[derive(Serialize)]
struct RingResults {
    q: u32,
    arcs: [usize; 4],
    log_set_size: Nats,
    sectors: Vec<SectorRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    replay: Option<ReplayResults>,
}

fn run_ring(cfg: &ScenarioConfig, clock: &mut Clock) -> Result<RunReport, CliError> {
    let q = cfg.q.ok_or_else(|| CliError::Config("ring needs q".into()))?;
    let arcs = match cfg.arcs.as_deref() {
        None => [1, 1, 1, 1],
        Some(&[a, b1, c, b2]) => [a, b1, c, b2],
        Some(other) => return Err(CliError::Config(format!("arcs needs four sizes, got {other:?}"))),
    };
    let spec = RingSpec::new(q, arcs[0], arcs[1], arcs[2], arcs[3]).map_err(config)?;
    let exact = clock.time("counting", || ring::exact_cmi(&spec));
    let ln_q = f64::from(q).ln();
    let mut checks = vec![Check::margin("abelian bound", exact - ln_q, FLOOR)];

    let mut sectors = vec![];
    let mut worst = 0.0f64;
    let mut capped = None;
    clock.time("enumeration", || {
        for a in 0..q {
            let enumerated = match ring::enumerated_cmi(&spec, a, spec.sites_a) {
                Ok(e) => {
                    worst = worst.max((e - exact).abs());
                    Some(Nats(e))
                }
                Err(e) => {
                    capped = Some(e.to_string());
                    None
                }
            };
            sectors.push(SectorRow {
                label: a.to_string(),
                cmi: Nats(exact),
                gamma: Nats(exact / 2.0),
                enumerated,
                ranks: None,
            });
        }
    });
    checks.push(match capped {
        Some(why) => Check::skipped("enumeration", why),
        None => Check::defect("enumeration", worst, 1e-12),
    });

    if spec.sites_a >= 2 {
        let width = spec.sites_a - 1;
        let mut worst = Check::defect("counted fusion", 0.0, 1e-9);
        let mut skipped = None;
        clock.time("fusion", || {
            for s in 0..q {
                let w = ring::fusion_unitary(&spec, s, width, width).expect("endpoint lies outside the kept width");
                match ring::fusion_check_exact(&spec, &w, s, width) {
                    Ok(c) if c.value >= worst.value => worst = c.with_detail(format!("string {s}")),
                    Ok(_) => {}
                    Err(RingError::EnumerationCap(n)) => skipped = Some(format!("{n} configurations")),
                    Err(e) => skipped = Some(e.to_string()),
                }
            }
        });
        worst.name = "counted fusion".into();
        checks.push(match skipped {
            Some(why) => Check::skipped("counted fusion", why),
            None => worst,
        });
    } else {
        checks.push(Check::skipped("counted fusion", "A has a single site, so it cannot be thinned"));
    }

    let dense_dim = u128::from(q).checked_pow(spec.sites() as u32);
    if dense_dim.is_some_and(|d| d <= DENSE_CHECK_CAP.min(OPERATOR_CAP as u128)) {
        let dense = clock.time("dense export", || -> Result<Vec<Check>, CliError> {
            let (fam, part) = ring::build_family(&spec).map_err(config)?;
            let mut out = vec![
                check_global_distinguishability(&fam, &part).map_err(config)?,
                check_local_indistinguishability(&fam, &part).map_err(config)?,
            ];
            if spec.sites_a >= 2 {
                let width = spec.sites_a - 1;
                let thin = spec.partition(width);
                let fp = ring::fusion_data(&spec);
                let mut worst: Option<Check> = None;
                for s in 0..q {
                    let w = ring::fusion_unitary(&spec, s, width, width).map_err(config)?;
                    let c = check_fusion_property(&fam, &part, &thin, &w.to_local_operator(), s as usize, &fp)
                        .map_err(config)?;
                    if worst.as_ref().is_none_or(|x| c.value >= x.value) {
                        worst = Some(c);
                    }
                }
                let mut c = worst.expect("q >= 2");
                c.name = "fusion".into();
                out.push(c);
            }
            Ok(out)
        })?;
        checks.extend(prefixed(dense, "dense"));
    } else {
        checks.push(Check::skipped("dense", format!("dimension above {}", DENSE_CHECK_CAP.min(OPERATOR_CAP as u128))));
    }

    let replay_results = match cfg.n {
        Some(n) => {
            let trace = ring::nested_annulus_table(&spec, n).map_err(config)?;
            let (res, c) = replay(&trace, cfg, clock)?;
            checks.extend(prefixed(c, "replay"));
            Some(res)
        }
        None => None,
    };
    let summary = Summary { cmi: Some(Nats(exact)), bound: Some(Nats(ln_q)) };
    let results = RingResults { q, arcs, log_set_size: Nats(ln_q), sectors, replay: replay_results };
    Ok(RunReport::new(cfg.clone(), summary, to_value(cfg.units(), &results), checks))
}

#[derive(Serialize)]
struct StabilizerResults {
    p: u32,
    lattice: [usize; 2],
    widths: [usize; 3],
    log_total_dimension: Nats,
    sectors: Vec<SectorRow>,
    violations: Vec<stabilizer::Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    replay: Option<ReplayResults>,
}

pub fn stabilizer_partition(cfg: &ScenarioConfig) -> Result<AnnulusPartition, CliError> {
    let p = cfg.p.ok_or_else(|| CliError::Config("stabilizer needs p".into()))?;
    let part = match cfg.widths.as_deref().unwrap_or(&[ELL]) {
        &[w] => AnnulusPartition::square(p, cfg.size.unwrap_or(8 + 2 * w), w),
        &[wa, wb, wc] => {
            if cfg.size.is_some() {
                return Err(CliError::Config("size is derived from the widths when three are given".into()));
            }
            AnnulusPartition::with_widths(p, wa, wb, wc)
        }
        other => return Err(CliError::Config(format!("widths needs one or three values, got {other:?}"))),
    };
    part.map_err(config)
}

fn run_stabilizer(cfg: &ScenarioConfig, clock: &mut Clock) -> Result<RunReport, CliError> {
    let part = stabilizer_partition(cfg)?;
    let p = part.lattice.p;
    let wanted = match cfg.sector.as_deref() {
        None => None,
        Some(&[e, m]) if SectorLabel::new(e, m).is_valid(p) => Some(SectorLabel::new(e, m)),
        Some(other) => return Err(CliError::Config(format!("sector {other:?} is not a pair in Z_{p}"))),
    };
    let states = clock.time("sector states", || sector_states(&part)).map_err(config)?;
    let mut sectors = vec![];
    let mut units = vec![];
    clock.time("ranks", || -> Result<(), CliError> {
        for (i, st) in states.iter().enumerate() {
            let label = SectorLabel::from_index(i, p);
            let c = annulus_cmi(st, &part).map_err(config)?;
            units.push(c.units);
            if wanted.is_none_or(|w| w == label) {
                let i = c.nats(p);
                sectors.push(SectorRow {
                    label: label.to_string(),
                    cmi: Nats(i),
                    gamma: Nats(i / 2.0),
                    enumerated: None,
                    ranks: Some(c),
                });
            }
        }
        Ok(())
    })?;
    let report = clock.time("assumptions", || verify_assumptions(&states, &part, FusionStringRule::default()))
        .map_err(config)?;
    let ln_p = f64::from(p).ln();
    let (lo, hi) = (*units.iter().min().expect("p^2 sectors"), *units.iter().max().expect("p^2 sectors"));
    let mut checks = report.checks;
    checks.push(Check::margin("abelian bound", lo as f64 * ln_p - 2.0 * ln_p, FLOOR));
    checks.push(Check::defect("sector independence", (hi - lo) as f64, 0.5));

    let replay_results = match cfg.n {
        Some(n) => {
            let trace = clock.time("nested table", || stabilizer::nested_annulus_table(&states, &part, n))
                .map_err(config)?;
            let (res, c) = replay(&trace, cfg, clock)?;
            checks.extend(prefixed(c, "replay"));
            Some(res)
        }
        None => None,
    };
    let (h, o) = (part.hole, part.outer);
    let results = StabilizerResults {
        p,
        lattice: [part.lattice.width, part.lattice.height],
        widths: [part.width_a(), h.x0 - o.x0, h.y0 - o.y0],
        log_total_dimension: Nats(ln_p),
        sectors,
        violations: report.violations,
        replay: replay_results,
    };
    let summary = Summary { cmi: Some(Nats(units[0] as f64 * ln_p)), bound: Some(Nats(2.0 * ln_p)) };
    Ok(RunReport::new(cfg.clone(), summary, to_value(cfg.units(), &results), checks))
}

/// Table with every sector at `ln(1/p*_a)` on every level.
pub fn saturating_trace(cat: &FusionCategory, n: usize) -> Result<AuditTrace, CliError> {
    let dims = quantum_dimensions(cat).map_err(config)?;
    let fp = fusion_probabilities(cat, &dims).map_err(config)?;
    let p = closed_form_fixed_point(&dims);
    let row: Vec<f64> = p.probs().iter().map(|x| (1.0 / x).ln()).collect();
    AuditTrace::new(cat.labels().to_vec(), vec![row; n + 2], fp, p, 0, Provenance::Synthetic).map_err(config)
}

pub fn audit_report(trace: &AuditTrace, cfg: &ScenarioConfig, clock: &mut Clock) -> Result<RunReport, CliError> {
    let (results, checks) = replay(trace, cfg, clock)?;
    let summary = Summary { cmi: Some(results.observed), bound: Some(results.final_bound) };
    Ok(RunReport::new(cfg.clone(), summary, to_value(cfg.units(), &results), checks))
}

fn run_audit(cfg: &ScenarioConfig, clock: &mut Clock) -> Result<RunReport, CliError> {
    let trace = match (&cfg.trace, &cfg.category) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read trace {}: {e}", path.display())))?;
            let t = AuditTrace::from_json(&text).map_err(config)?;
            if cfg.n.is_some_and(|n| n != t.n()) {
                return Err(CliError::Config(format!("trace has n = {}, config asks for {:?}", t.n(), cfg.n)));
            }
            t
        }
        (None, Some(name)) => saturating_trace(&load_category(name)?, cfg.n.unwrap_or(4))?,
        (None, None) => return Err(CliError::Config("audit needs a trace file or a category".into())),
    };
    audit_report(&trace, cfg, clock)
}
