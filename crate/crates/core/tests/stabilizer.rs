use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use teelab::dense::{
    check_global_distinguishability, check_local_indistinguishability, conditional_mutual_information,
    von_neumann_entropy, Partition, Region, SectorFamily,
};
use teelab::stabilizer::*;

#[test]
fn annulus_cmi_is_two_ln_p_in_every_sector() {
    for p in [2, 3, 5] {
        let part = AnnulusPartition::standard(p).unwrap();
        let states = sector_states(&part).unwrap();
        assert_eq!(states.len(), (p * p) as usize);
        for (i, st) in states.iter().enumerate() {
            let c = annulus_cmi(st, &part).unwrap();
            assert_eq!(c.units, 2, "p = {p}, sector {}", SectorLabel::from_index(i, p));
            assert_eq!(c.nats(p), 2.0 * f64::from(p).ln());
        }
    }
}

#[test]
fn wilson_loops_read_charge_and_flux() {
    let part = AnnulusPartition::standard(2).unwrap();
    let ground = build_ground_state(&part.lattice).unwrap();
    let e = create_sector(&ground, &part, SectorLabel::new(1, 0)).unwrap();
    // Phase 1 mod 2 is eigenvalue -1.
    assert_eq!(e.x_eigenphase(&charge_loop(&part)), Some(1));
    assert_eq!(e.z_eigenphase(&flux_loop(&part)), Some(0));

    let part = AnnulusPartition::standard(3).unwrap();
    let ground = build_ground_state(&part.lattice).unwrap();
    let dyon = create_sector(&ground, &part, SectorLabel::new(1, 1)).unwrap();
    assert_eq!(dyon.x_eigenphase(&charge_loop(&part)), Some(1));
    assert_eq!(dyon.z_eigenphase(&flux_loop(&part)), Some(1));
}

#[test]
fn origin_inside_a_breaks_local_indistinguishability() {
    let part = AnnulusPartition::standard(2).unwrap().with_origin_unchecked((6, 10));
    let states = sector_states(&part).unwrap();
    let rep = verify_assumptions(&states, &part, FusionStringRule::default()).unwrap();
    assert!(!rep.checks[1].ok());
    let v = rep.violations.iter().find(|v| v.property == 2).unwrap();
    assert_eq!(v.region, "AB");
    assert!(v.witness.starts_with("vertex operator at (6,10)"), "{}", v.witness);
}

#[test]
fn misplaced_fusion_string_is_detected() {
    let part = AnnulusPartition::standard(2).unwrap();
    let states = sector_states(&part).unwrap();
    let rule = FusionStringRule { placement: Placement::Misplaced, ..Default::default() };
    let rep = verify_assumptions(&states, &part, rule).unwrap();
    assert!(rep.checks[0].ok() && rep.checks[1].ok());
    assert!(!rep.checks[2].ok());
    // Every nontrivial string fails on every sector.
    assert_eq!(rep.violations.len(), 3 * 4);
}

#[test]
fn assumptions_hold_for_p3_and_wider_annuli() {
    let part = AnnulusPartition::with_widths(3, 3, 2, 2).unwrap();
    let states = sector_states(&part).unwrap();
    for k in 0..2 {
        let level = part.thinned(k).unwrap();
        let rep = verify_assumptions(&states, &level, FusionStringRule::default()).unwrap();
        assert!(rep.passed(), "thinning {k}: {:?}", rep.violations.first());
    }
}

#[test]
fn blocked_route_is_rejected() {
    let part = AnnulusPartition::standard(2).unwrap();
    let route = Route { detour_column: Some(9), direction: Direction::Up };
    let err = sector_states(&part.with_route(route).unwrap()).unwrap_err();
    assert!(matches!(err, StabilizerError::PathBlocked { .. }), "{err}");
    let route = Route { detour_column: Some(7), direction: Direction::Down };
    let states = sector_states(&part.with_route(route).unwrap()).unwrap();
    assert!(verify_assumptions(&states, &part, FusionStringRule::default()).unwrap().passed());
}

#[test]
fn nested_tables_are_constant() {
    for (p, n) in [(2, 3), (3, 2), (3, 3)] {
        let part = AnnulusPartition::for_levels(p, n).unwrap();
        let states = sector_states(&part).unwrap();
        let trace = nested_annulus_table(&states, &part, n).unwrap();
        assert_eq!(trace.cmi.len(), n + 2);
        let v = 2.0 * f64::from(p).ln();
        assert!(trace.cmi.iter().flatten().all(|&x| x == v));
        assert!(matches!(
            nested_annulus_table(&states, &part, n + 1),
            Err(StabilizerError::InsufficientWidth { .. })
        ));
    }
}

#[test]
fn dense_import_of_the_origin_region() {
    // p = 2 on the origin star and plaquette (6 edges); p = 3 on the star alone (4 edges).
    for (p, with_plaquette) in [(2, true), (3, false)] {
        let part = AnnulusPartition::standard(p).unwrap();
        let lat = part.lattice;
        let states = sector_states(&part).unwrap();
        let (ox, oy) = part.origin;
        let plaquette = if with_plaquette { lat.boundary(ox, oy).to_vec() } else { vec![] };
        let mut region: Vec<usize> = lat.star(ox, oy).iter().chain(&plaquette).map(|s| s.0).collect();
        region.sort_unstable();
        region.dedup();
        assert_eq!(region.len(), if with_plaquette { 6 } else { 4 });
        let dense: Vec<_> = states.iter().map(|s| s.dense_reduction(&region).unwrap()).collect();
        for (st, rho) in states.iter().zip(&dense) {
            let s = st.region_entropy(&region);
            assert!((von_neumann_entropy(rho).unwrap() - s.nats(p)).abs() < 1e-9);
        }
        let labels = SectorLabel::all(p).iter().map(ToString::to_string).collect();
        let fam = SectorFamily::new(labels, dense, 0).unwrap();
        let k = region.len() / 3;
        let tags = Partition::from_lists(&region[..k], &region[k..2 * k], &region[2 * k..], &[]);
        // The star alone cannot see flux, so only the p = 2 region separates all sectors.
        assert_eq!(check_global_distinguishability(&fam, &tags).unwrap().ok(), with_plaquette);
        assert!(check_local_indistinguishability(&fam, &tags).unwrap().ok());
        let i = conditional_mutual_information(&fam.states[0], &tags).unwrap();
        assert!(i >= -1e-9);
    }
}

fn random_region(lat: &Lattice, rng: &mut ChaCha8Rng, density: f64) -> Vec<usize> {
    (0..lat.edges()).filter(|_| rng.random_bool(density)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn entropies_are_pure_state_consistent(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3, 5])) {
        let lat = Lattice::new(5, 4, p).unwrap();
        let ground = build_ground_state(&lat).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let region = random_region(&lat, &mut rng, 0.4);
        let comp: Vec<usize> = (0..lat.edges()).filter(|e| !region.contains(e)).collect();
        let s = ground.region_entropy(&region);
        prop_assert_eq!(s.units, ground.region_entropy(&comp).units);
        prop_assert_eq!(s.units, ground.region_entropy_dual(&region));
    }

    #[test]
    fn gf2_and_generic_ranks_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<u32>> = (0..20).map(|_| (0..90).map(|_| rng.random_range(0..2)).collect()).collect();
        let cols: Vec<usize> = (0..90).filter(|_| rng.random_bool(0.5)).collect();
        prop_assert_eq!(rank_on_columns(&rows, &cols, 2), rank_on_columns_generic(&rows, &cols, 2));
    }

    #[test]
    fn cmi_is_nonnegative_on_random_tripartitions(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3])) {
        let part = AnnulusPartition::standard(p).unwrap();
        let states = sector_states(&part).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = &states[rng.random_range(0..states.len())];
        let tag: Vec<u8> = (0..part.lattice.edges()).map(|_| rng.random_range(0..4)).collect();
        let pick = |t: &[u8]| (0..tag.len()).filter(|&e| t.contains(&tag[e])).collect::<Vec<_>>();
        let s = |t: &[u8]| st.region_entropy(&pick(t)).units as i64;
        let i = s(&[0, 1]) + s(&[1, 2]) - s(&[1]) - s(&[0, 1, 2]);
        prop_assert!(i >= 0);
    }

    #[test]
    fn annulus_cmi_is_sector_independent(wa in 2usize..4, wb in 2usize..4, wc in 2usize..4, p in prop::sample::select(vec![2u32, 3])) {
        let part = AnnulusPartition::with_widths(p, wa, wb, wc).unwrap();
        let states = sector_states(&part).unwrap();
        for st in &states {
            let c = annulus_cmi(st, &part).unwrap();
            prop_assert_eq!(c.units, 2);
            prop_assert_eq!(c.abc.units as i64, c.abc.edges as i64 - c.abc.supported_rank as i64);
        }
    }
}

#[test]
fn region_tags_cover_the_annulus() {
    let part = AnnulusPartition::standard(2).unwrap();
    let tags = part.to_partition();
    let a = tags.region(Region::A);
    let b = tags.region(Region::B);
    let c = tags.region(Region::C);
    assert_eq!((a.len(), c.len()), (20, 20));
    // Two 2×9 side strips, two edges per plaquette.
    assert_eq!(b.len(), 72);
}
