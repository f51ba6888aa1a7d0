use proptest::prelude::*;

use teelab::dense::{
    check_fusion_property, check_global_distinguishability, check_local_indistinguishability,
    conditional_mutual_information, mixture_cmi_decomposition,
};
use teelab::fusion::AnyonDistribution;
use teelab::ring::*;

/// Every ring with `q <= 5` and at most `max_sites` sites in total.
fn small_rings(max_sites: usize) -> Vec<RingSpec> {
    let mut out = vec![];
    for q in 2..=5 {
        for a in 1..=3 {
            for b1 in 1..=3 {
                for c in 1..=3 {
                    for b2 in 1..=3 {
                        if a + b1 + c + b2 <= max_sites {
                            out.push(RingSpec::new(q, a, b1, c, b2).unwrap());
                        }
                    }
                }
            }
        }
    }
    out
}

#[test]
fn counting_matches_enumeration_on_small_rings() {
    let rings = small_rings(8);
    assert!(rings.len() > 100);
    for spec in rings {
        let ln_q = f64::from(spec.q).ln();
        assert_eq!(cmi_units(&spec, spec.sites_a), 1, "{spec:?}");
        assert_eq!(exact_cmi(&spec), ln_q);
        for a in 0..spec.q {
            for w in 1..=spec.sites_a {
                let e = enumerated_cmi(&spec, a, w).unwrap();
                let d = (e - cmi_units(&spec, w) as f64 * ln_q).abs();
                assert!(d < 1e-12, "{spec:?}, sector {a}, width {w}: {d:e}");
            }
        }
    }
}

#[test]
fn dense_export_agrees_with_counting() {
    for spec in [RingSpec::new(2, 2, 1, 2, 1).unwrap(), RingSpec::new(3, 1, 1, 1, 1).unwrap()] {
        let (fam, part) = build_family(&spec).unwrap();
        assert_eq!(fam.len(), spec.q as usize);
        for rho in &fam.states {
            let i = conditional_mutual_information(rho, &part).unwrap();
            assert!((i - exact_cmi(&spec)).abs() < 1e-10, "{spec:?}");
        }
        assert!(check_global_distinguishability(&fam, &part).unwrap().ok());
        assert!(check_local_indistinguishability(&fam, &part).unwrap().ok());
    }
}

#[test]
fn fusion_through_dense_route() {
    let spec = RingSpec::new(3, 2, 1, 1, 1).unwrap();
    let (fam, full) = build_family(&spec).unwrap();
    let thin = spec.partition(1);
    let fp = fusion_data(&spec);
    for s in 0..spec.q {
        let w = fusion_unitary(&spec, s, 1, 1).unwrap();
        let dense = check_fusion_property(&fam, &full, &thin, &w.to_local_operator(), s as usize, &fp).unwrap();
        assert!(dense.ok(), "{dense}");
        assert_eq!(fusion_check_exact(&spec, &w, s, 1).unwrap().value, 0.0);
    }
    // A string stopping inside A' splits the shared A value on A'BC.
    let spec = RingSpec::new(2, 3, 1, 1, 1).unwrap();
    let (fam, full) = build_family(&spec).unwrap();
    let bad = shift_up_to(&spec, 1, 0);
    let dense = check_fusion_property(&fam, &full, &spec.partition(2), &bad.to_local_operator(), 1, &fusion_data(&spec))
        .unwrap();
    assert!(!dense.ok());
    assert!(!fusion_check_exact(&spec, &bad, 1, 2).unwrap().ok());
}

#[test]
fn ring_mixture_decomposes() {
    let spec = RingSpec::new(3, 1, 1, 1, 1).unwrap();
    let (fam, part) = build_family(&spec).unwrap();
    for p in [vec![1.0 / 3.0; 3], vec![0.5, 0.3, 0.2], vec![0.9, 0.05, 0.05]] {
        let p = AnyonDistribution::new(p).unwrap();
        let rep = mixture_cmi_decomposition(&fam, &part, &p).unwrap();
        assert!((rep.mixture_cmi - rep.decomposed).abs() < 1e-9, "{rep:?}");
        // Uniform mixture over sectors drops the loop constraint entirely.
        if (p.shannon() - 3f64.ln()).abs() < 1e-12 {
            assert!(rep.mixture_cmi.abs() < 1e-10);
        }
    }
}

#[test]
fn nested_tables_need_enough_sites() {
    for q in [2, 3, 5] {
        for n in 1..=4 {
            let spec = RingSpec::new(q, n + 2, 1, 1, 1).unwrap();
            let t = nested_annulus_table(&spec, n).unwrap();
            assert_eq!(t.cmi.len(), n + 2);
            assert!(t.cmi.iter().flatten().all(|&x| x == f64::from(q).ln()));
            assert!(matches!(nested_annulus_table(&spec, n + 1), Err(RingError::InsufficientWidth { .. })));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cmi_is_one_unit_for_any_ring(q in 2u32..12, a in 1usize..20, b1 in 1usize..20, c in 1usize..20, b2 in 1usize..20) {
        let spec = RingSpec::new(q, a, b1, c, b2).unwrap();
        prop_assert_eq!(cmi_units(&spec, a), 1);
        prop_assert_eq!(exact_cmi(&spec), f64::from(q).ln());
    }

    #[test]
    fn strings_compose_additively(q in 2u32..8, s in 0u32..8, t in 0u32..8, end in 1usize..4) {
        let spec = RingSpec::new(q, 4, 1, 1, 1).unwrap();
        let u = fusion_unitary(&spec, s, 1, end).unwrap();
        let v = fusion_unitary(&spec, t, 1, end).unwrap();
        prop_assert_eq!(u.compose(&v), shift_up_to(&spec, (s + t) % q, end));
    }
}
