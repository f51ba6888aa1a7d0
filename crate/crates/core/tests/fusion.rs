use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use teelab::fusion::*;

fn data(name: &str) -> (FusionCategory, QuantumDims, FusionProbabilities) {
    let cat = bundled(name).unwrap();
    let dims = quantum_dimensions(&cat).unwrap();
    let fp = fusion_probabilities(&cat, &dims).unwrap();
    (cat, dims, fp)
}

fn random_distribution(rng: &mut ChaCha8Rng, r: usize) -> AnyonDistribution {
    let w: Vec<f64> = (0..r).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    AnyonDistribution::new(w.iter().map(|x| x / total).collect()).unwrap()
}

#[test]
fn bundled_categories_satisfy_structural_identities() {
    for &name in BUNDLED {
        let (cat, dims, fp) = data(name);
        assert!(cat.first_associativity_defect().is_none(), "{name}");
        assert!(cat.first_reciprocity_defect().is_none(), "{name}: N^sa_b = N^(b abar)_s");
        assert!(fp.row_sum_defect() < 1e-12, "{name}");
        assert!(fp.associativity_defect() < 1e-12, "{name}");
        for a in 0..cat.rank() {
            assert!((dims.d[a] - dims.d[cat.dual(a)]).abs() < 1e-10);
        }
    }
}

#[test]
fn iterative_and_closed_form_fixed_points_agree() {
    for &name in BUNDLED {
        let (_, dims, fp) = data(name);
        let it = fixed_point_iterative(&fp).unwrap();
        let closed = closed_form_fixed_point(&dims);
        assert!(it.p_star.sup_distance(&closed) < 1e-10, "{name}");
        assert!(it.residual < 1e-12, "{name}");
        assert!(verify_fixed_point_identity(&fp, &closed).max < 1e-12, "{name}");
    }
}

#[test]
fn fibonacci_values() {
    let (_, dims, fp) = data("fibonacci");
    // Largest root of x^2 = x + 1.
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((dims.d[1] - phi).abs() < 1e-12);
    assert!((dims.total_squared() - (5.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    assert!((fp.get(1, 1, 1) - 0.6180339887).abs() < 1e-10);
    let tt = star(&AnyonDistribution::point(2, 1), &AnyonDistribution::point(2, 1), &fp);
    assert!((tt.probs()[0] - 0.3819660113).abs() < 1e-9);
    let q = fixed_point_iterative(&fp).unwrap().p_star;
    // (5 - sqrt 5) / 10 and (5 + sqrt 5) / 10.
    assert!((q.probs()[0] - 0.2763932023).abs() < 1e-9);
    assert!((q.probs()[1] - 0.7236067977).abs() < 1e-9);
}

#[test]
fn ising_values() {
    let (cat, dims, fp) = data("ising");
    let sigma = cat.index_of("σ").or_else(|| cat.index_of("sigma")).unwrap();
    assert!((dims.d[sigma] - 2f64.sqrt()).abs() < 1e-10);
    assert!((dims.total_squared() - 4.0).abs() < 1e-10);
    assert!((fp.get(sigma, sigma, 0) - 0.5).abs() < 1e-12);
    let k = bound_constant(&closed_form_fixed_point(&dims), 3).unwrap();
    assert!((k - (1.0 + 32.0 * 12f64.ln())).abs() < 1e-12);
}

#[test]
fn toric_bound_constant_and_limit() {
    let (_, _, fp) = data("toric_code");
    let p = fixed_point_iterative(&fp).unwrap().p_star;
    let k = bound_constant(&p, 4).unwrap();
    assert!((k - (1.0 + 32.0 * 16f64.ln())).abs() < 1e-12);
    let mut last = f64::NEG_INFINITY;
    for n in [1u64, 10, 100, 10_000, 1_000_000, 10_000_000_000] {
        let b = tee_lower_bound(0, &p, n, k).unwrap();
        assert!(b > last);
        assert!(b < 4f64.ln());
        assert!((4f64.ln() - b - k / (n as f64).sqrt()).abs() < 1e-12);
        last = b;
    }
    assert!((last - 4f64.ln()).abs() < 1e-3);
    assert!(tee_lower_bound(0, &p, 0, k).is_err());
}

#[test]
fn unit_fuses_trivially_and_groups_multiply() {
    let (cat, _, fp) = data("toric_code");
    let e = cat.index_of("e").unwrap();
    let m = cat.index_of("m").unwrap();
    let pe = AnyonDistribution::point(4, e);
    let pm = AnyonDistribution::point(4, m);
    let em = star(&pe, &pm, &fp);
    let eps = (0..4).find(|&i| i != 0 && i != e && i != m).unwrap();
    assert_eq!(em.probs()[eps], 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let q = random_distribution(&mut rng, 4);
    assert!(star(&AnyonDistribution::point(4, 0), &q, &fp).sup_distance(&q) < 1e-15);
}

#[test]
fn invalid_tables_are_rejected() {
    // x×x = 1 + y, y×y = 1, x×y = x, y×x = x + y: (x×x)×x ≠ x×(x×x).
    let bad = r#"{"labels": ["1", "x", "y"], "N": {
        "1": {"1": {"1": 1}, "x": {"x": 1}, "y": {"y": 1}},
        "x": {"1": {"x": 1}, "x": {"1": 1, "y": 1}, "y": {"x": 1}},
        "y": {"1": {"y": 1}, "x": {"x": 1, "y": 1}, "y": {"1": 1}}}}"#;
    assert!(matches!(FusionCategory::from_json(bad), Err(FusionError::InvalidCategory(_))));
    assert!(matches!(FusionCategory::from_json(r#"{"labels": []}"#), Err(FusionError::MalformedInput(_))));
}

#[test]
fn defect_identity_holds_for_group_case() {
    let (cat, _, fp) = data("z4");
    let r = cat.rank();
    let labels: Vec<String> = cat.labels().to_vec();
    let p: Vec<f64> = (0..r).flat_map(|s| (0..r).flat_map(move |b| (0..r).map(move |a| (s, b, a)))).map(|(s, b, a)| fp.get(s, b, a)).collect();
    let sys = DefectFusionSystem::new(labels.clone(), labels, p).unwrap();
    let solved = defect_fixed_point(&sys).unwrap();
    assert!(solved.p_star.as_ref().unwrap().sup_distance(&AnyonDistribution::uniform(r)) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn star_is_associative(seed in any::<u64>(), which in 0usize..BUNDLED.len()) {
        let (cat, _, fp) = data(BUNDLED[which]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let p = random_distribution(&mut rng, cat.rank());
            let q = random_distribution(&mut rng, cat.rank());
            let r = random_distribution(&mut rng, cat.rank());
            let left = star(&p, &star(&q, &r, &fp), &fp);
            let right = star(&star(&p, &q, &fp), &r, &fp);
            prop_assert!(left.sup_distance(&right) < 1e-12);
        }
    }

    #[test]
    fn fixed_point_is_unique(seed in any::<u64>(), which in 0usize..BUNDLED.len()) {
        let (cat, dims, fp) = data(BUNDLED[which]);
        let closed = closed_form_fixed_point(&dims);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let start = random_distribution(&mut rng, cat.rank());
            let q = fixed_point_from(&fp, start).unwrap();
            prop_assert!(q.sup_distance(&closed) < 1e-10);
        }
    }

    #[test]
    fn lower_bound_gap_is_k_over_root_n(n in 1u64..1_000_000_000, which in 0usize..BUNDLED.len()) {
        let (cat, dims, _) = data(BUNDLED[which]);
        let p = closed_form_fixed_point(&dims);
        let k = bound_constant(&p, cat.rank()).unwrap();
        for a0 in 0..cat.rank() {
            let b = tee_lower_bound(a0, &p, n, k).unwrap();
            let top = (1.0 / p.probs()[a0]).ln();
            prop_assert!(b < top);
            prop_assert!((top - b - k / (n as f64).sqrt()).abs() < 1e-12);
            prop_assert!(tee_lower_bound(a0, &p, n + 1, k).unwrap() > b);
        }
    }
}
