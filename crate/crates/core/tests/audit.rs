use proptest::prelude::*;

use teelab::audit::*;
use teelab::check::Status;
use teelab::fusion::{bundled, closed_form_fixed_point, fusion_probabilities, quantum_dimensions, BUNDLED};
use teelab::ring::{self, RingSpec};
use teelab::stabilizer::{self, sector_states, AnnulusPartition};

fn ring_trace(q: u32, n: usize) -> AuditTrace {
    ring::nested_annulus_table(&RingSpec::new(q, n + 2, 1, 1, 1).unwrap(), n).unwrap()
}

#[test]
fn ring_traces_assemble() {
    for q in 2..=5 {
        for n in 1..=4 {
            let t = ring_trace(q, n);
            let r = assemble_bound(&t).unwrap_or_else(|e| panic!("q = {q}, n = {n}: {e}"));
            assert_eq!(r.observed, f64::from(q).ln());
            assert!((r.final_margin() - r.k / (n as f64).sqrt()).abs() < 1e-12);
            assert!(r.checks.iter().all(|c| c.status == Status::Pass));
        }
    }
}

#[test]
fn stabilizer_traces_assemble() {
    for p in [2, 3] {
        for n in 1..=3 {
            let part = AnnulusPartition::for_levels(p, n).unwrap();
            let states = sector_states(&part).unwrap();
            let t = stabilizer::nested_annulus_table(&states, &part, n).unwrap();
            assert_eq!(t.provenance, Provenance::StabilizerTee);
            let r = assemble_bound(&t).unwrap_or_else(|e| panic!("p = {p}, n = {n}: {e}"));
            assert_eq!(r.observed, 2.0 * f64::from(p).ln());
        }
    }
}

#[test]
fn decreasing_trace_is_rejected() {
    let t = AuditTrace::from_json(DECREASING_TRACE).unwrap();
    let err = assemble_bound(&t).unwrap_err();
    assert!(matches!(&err, AuditError::PremiseViolated { lemma, .. } if lemma == "monotonicity"), "{err}");
}

#[test]
fn trace_documents_round_trip() {
    let t = ring_trace(3, 2);
    let text = serde_json::to_string(&t.to_document()).unwrap();
    assert_eq!(AuditTrace::from_json(&text).unwrap(), t);
    let mut doc = t.to_document();
    doc.levels += 1;
    assert!(matches!(AuditTrace::from_document(doc), Err(AuditError::MalformedTrace(_))));
    let mut doc = t.to_document();
    doc.a0 = "7".into();
    assert!(matches!(AuditTrace::from_document(doc), Err(AuditError::MalformedTrace(_))));
}

#[test]
fn taylor_sweep_holds_for_bundled_categories() {
    for &name in BUNDLED {
        let cat = bundled(name).unwrap();
        let dims = quantum_dimensions(&cat).unwrap();
        let fp = fusion_probabilities(&cat, &dims).unwrap();
        let p = closed_form_fixed_point(&dims);
        let grid = epsilon_grid(p.min(), 41);
        assert_eq!(grid.len(), 41);
        let rep = taylor_bound_sweep(&p, &fp, &grid).unwrap();
        assert_eq!(rep.evaluations, cat.rank() * cat.rank() * 41);
        for c in &rep.checks {
            assert!(c.value >= -1e-9, "{name}: {c}");
        }
        let wide = [p.min()];
        assert!(matches!(taylor_bound_sweep(&p, &fp, &wide), Err(AuditError::EpsilonOutOfRange { .. })));
    }
}

#[test]
fn explicit_options_are_respected() {
    let t = ring_trace(2, 3);
    let p_min = t.p_star.min();
    let opts = AuditOptions { epsilon: Some(p_min / 4.0), alpha: Some(0.5) };
    let r = audit_trace(&t, &opts).unwrap();
    assert_eq!((r.epsilon, r.alpha), (p_min / 4.0, 0.5));
    assert!(r.checks.iter().all(|c| c.name != "delta cancellation"));
    let too_big = AuditOptions { epsilon: Some(p_min), alpha: None };
    assert!(matches!(audit_trace(&t, &too_big), Err(AuditError::EpsilonOutOfRange { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn any_drop_between_levels_is_caught(q in 2u32..6, n in 1usize..5, level in 0usize..5, drop in 1e-6f64..1.0) {
        let mut t = ring_trace(q, n);
        let i = level % (n + 1);
        for x in t.cmi[i + 1].iter_mut() {
            *x -= drop;
        }
        let r = audit_trace(&t, &AuditOptions::default()).unwrap();
        prop_assert!(!r.passed());
        prop_assert!(assemble_bound(&t).is_err());
    }

    #[test]
    fn default_alpha_cancels_deltas(q in 2u32..6, n in 1usize..5) {
        let r = assemble_bound(&ring_trace(q, n)).unwrap();
        let c = r.checks.iter().find(|c| c.name == "delta cancellation").unwrap();
        prop_assert!(c.value < 1e-12);
        prop_assert!((r.epsilon - default_epsilon(r.p_min, n)).abs() < 1e-15);
    }
}
