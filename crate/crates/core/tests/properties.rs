use std::sync::Arc;

use proptest::prelude::*;
use ssh_revival::analysis::{
    crossover_length, curve_distance, gaussian_curve, visibility_scan, CurveSpec, TimeGrid,
    UniversalityCriterion,
};
use ssh_revival::chain::{
    build_mode_basis, dense_zero_mode, single_particle_hamiltonian, ChainParams,
};
use ssh_revival::entanglement::{
    dense_log_negativity, fermionic_log_negativity, mutual_information, renyi_entropy,
    EntropyOrder, GaussianEngine, Measure, NegativityFlavor, Partition,
};
use ssh_revival::fock::{FockSpace, Statistics};
use ssh_revival::lindblad::{build_initial_state, evolve};
use ssh_revival::semiclassical::{
    green_function, mode_correlations, semiclassical_density_operator, ModeOccupation,
    PopulationLaw,
};

fn odd_length(max_cells: usize) -> impl Strategy<Value = usize> {
    (1..=max_cells).prop_map(|n| 2 * n + 1)
}

fn partition_of(length: usize) -> impl Strategy<Value = Partition> {
    proptest::sample::subsequence((0..length).collect::<Vec<_>>(), 1..length)
        .prop_map(move |a| Partition::new(length, a).unwrap())
}

proptest! {
    #[test]
    fn transform_is_orthogonal_and_chiral(l in odd_length(20), q in 0.0f64..0.99) {
        let params = ChainParams::with_ratio(l, q, 0.1).unwrap();
        let b = build_mode_basis(&params);
        let u = b.transform();
        let id = u * u.transpose();
        let eye = nalgebra::DMatrix::<f64>::identity(l, l);
        prop_assert!((&id - &eye).abs().max() < 1e-12);
        let h = single_particle_hamiltonian(&params);
        let s = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_fn(l, |i, _| {
            if i % 2 == 0 { 1.0 } else { -1.0 }
        }));
        prop_assert!((&s * &h * &s + &h).abs().max() == 0.0);
        let d = u * &h * u.transpose();
        for k in b.mode_indices() {
            let r = b.row_of(k);
            prop_assert!((d[(r, r)] - b.mode_energy(k)).abs() < 1e-10);
            prop_assert!((b.mode_energy(k) + b.mode_energy(-k)).abs() < 1e-14);
        }
        let dense = dense_zero_mode(&params);
        let edge = b.edge_mode();
        let sign = if dense[0] * edge[0] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..l {
            prop_assert!((sign * dense[i] - edge[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn populations_normalized(n in 1usize..30, gamma in 0.01f64..2.0, gt in 0.0f64..20.0) {
        let law = PopulationLaw::new(n, gamma).unwrap();
        let total: f64 = (1..=n + 1).map(|m| law.aggregate(m, gt / gamma).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn green_function_spectrum_in_unit_interval(
        l in odd_length(25), q in 0.0f64..0.99, gt in 0.0f64..30.0, all in any::<bool>()
    ) {
        let b = build_mode_basis(&ChainParams::with_ratio(l, q, 0.1).unwrap());
        let occ = if all { ModeOccupation::all_occupied(l / 2) } else { ModeOccupation::ground_state(l / 2) };
        let chi = mode_correlations(&b, gt / 0.1, &occ);
        prop_assert!(chi.iter().all(|&c| (0.0..=1.0).contains(&c)));
        let g = green_function(&b, gt / 0.1, &occ);
        let eig = g.matrix().clone().symmetric_eigenvalues();
        prop_assert!(eig.iter().all(|&x| x > -1e-12 && x < 1.0 + 1e-12));
    }

    #[test]
    fn fock_ladder_round_trip(bose in any::<bool>(), sites in 1usize..7, cap in 1usize..4, pick in any::<prop::sample::Index>()) {
        let stats = if bose { Statistics::Bose } else { Statistics::Fermi };
        let space = FockSpace::new(stats, sites, cap).unwrap();
        let idx = pick.index(space.dim());
        prop_assert_eq!(space.index_of(space.occupation(idx)), Some(idx));
        for site in 0..sites {
            if let Some((lowered, a)) = space.lower(site, idx) {
                let (back, c) = space.raise(site, lowered).unwrap();
                prop_assert_eq!(back, idx);
                let n = space.occupation(idx)[site] as f64;
                prop_assert!((a * c - n).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gaussian_engine_matches_dense_formula(
        (l, part) in odd_length(12).prop_flat_map(|l| (Just(l), partition_of(l))),
        q in 0.05f64..0.95,
        gt in 0.0f64..15.0,
    ) {
        let b = build_mode_basis(&ChainParams::with_ratio(l, q, 0.1).unwrap());
        let occ = ModeOccupation::ground_state(l / 2);
        let engine = GaussianEngine::new(&b, &occ, &part).unwrap();
        let snap = engine.snapshot(gt / 0.1).unwrap();
        let g = green_function(&b, gt / 0.1, &occ);
        let dense = fermionic_log_negativity(&g, &part).unwrap();
        prop_assert!(snap.negativity >= 0.0);
        prop_assert!((snap.negativity - dense).abs() < 1e-9);
        let mi = mutual_information(&g, &part, EntropyOrder::VonNeumann).unwrap();
        prop_assert!((snap.mutual_information(EntropyOrder::VonNeumann) - mi.max(0.0)).abs() < 1e-9);
    }

    #[test]
    fn curve_distance_scale_invariant(l in odd_length(30), q in 0.05f64..0.95, scale in 0.1f64..10.0) {
        let spec = CurveSpec::new(0.1, vec![2], TimeGrid::new(20.0, 100).unwrap());
        let crit = UniversalityCriterion::default();
        let a = gaussian_curve(l, q, &spec, Measure::FermionicNegativity).unwrap();
        let b = gaussian_curve(61, q, &spec, Measure::FermionicNegativity).unwrap();
        let d = curve_distance(&a, &b, &crit).unwrap();
        prop_assert!(d >= 0.0);
        let mut a2 = a.clone();
        let mut b2 = b.clone();
        a2.values.iter_mut().for_each(|v| *v *= scale);
        b2.values.iter_mut().for_each(|v| *v *= scale);
        prop_assert!((curve_distance(&a2, &b2, &crit).unwrap() - d).abs() < 1e-12 * d.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn negativity_symmetric_under_swap(
        bose in any::<bool>(),
        part in partition_of(5),
        q in 0.05f64..0.95,
        gt in 0.0f64..10.0,
    ) {
        let stats = if bose { Statistics::Bose } else { Statistics::Fermi };
        let b = build_mode_basis(&ChainParams::with_ratio(5, q, 0.1).unwrap());
        let occ = ModeOccupation::ground_state(2);
        let rho = semiclassical_density_operator(&b, gt / 0.1, stats, &occ, 4096).unwrap();
        let flavor = NegativityFlavor::Conventional;
        let x = dense_log_negativity(&rho, &part, flavor).unwrap();
        let y = dense_log_negativity(&rho, &part.swapped(), flavor).unwrap();
        prop_assert!(x >= 0.0);
        prop_assert!((x - y).abs() < 1e-10);
        prop_assert!(mutual_information(&rho, &part, EntropyOrder::VonNeumann).unwrap() > -1e-10);
    }


    #[test]
    fn entropy_density_size_independent(gt in 0.01f64..20.0, bose in any::<bool>()) {
        let stats = if bose { Statistics::Bose } else { Statistics::Fermi };
        let mut densities = Vec::new();
        for l in [5usize, 7, 9] {
            let b = build_mode_basis(&ChainParams::with_ratio(l, 0.3, 0.1).unwrap());
            let occ = ModeOccupation::ground_state(l / 2);
            let rho = semiclassical_density_operator(&b, gt / 0.1, stats, &occ, 1 << 13).unwrap();
            densities.push(renyi_entropy(&rho, EntropyOrder::VonNeumann, None).unwrap() / (l / 2) as f64);
        }
        prop_assert!((densities[0] - densities[1]).abs() < 1e-10);
        prop_assert!((densities[1] - densities[2]).abs() < 1e-10);
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn master_equation_preserves_trace_and_edge(q in 0.0f64..0.9, bose in any::<bool>()) {
        let stats = if bose { Statistics::Bose } else { Statistics::Fermi };
        let params = ChainParams::with_ratio(3, q, 0.1).unwrap();
        let b = build_mode_basis(&params);
        let space = Arc::new(FockSpace::new(stats, 3, 2).unwrap());
        let rho0 = build_initial_state(&b, space).unwrap();
        let times: Vec<f64> = (0..=8).map(|i| 10.0 * i as f64).collect();
        let states = evolve(&rho0, &params, &times).unwrap();
        let edge = |rho: &ssh_revival::density::DensityOperator| {
            ssh_revival::lindblad::edge_occupation(rho, &b)
        };
        let e0 = edge(&states[0]);
        for rho in &states {
            prop_assert!((rho.trace() - 1.0).abs() < 1e-8);
            prop_assert!(rho.hermiticity_defect() < 1e-10);
            prop_assert!((edge(rho) - e0).abs() < 1e-8);
        }
    }

    #[test]
    fn crossover_scan_monotone_containment(q in 0.1f64..0.9) {
        let spec = CurveSpec::new(0.1, vec![2], TimeGrid::new(20.0, 100).unwrap());
        let crit = UniversalityCriterion { reference_length: 61, ..Default::default() };
        let scan = crossover_length(q, &crit, &spec).unwrap();
        for (i, &l) in scan.lengths.iter().enumerate() {
            if scan.distances[i..].iter().all(|&d| d <= crit.epsilon) {
                prop_assert!(scan.result.is_some_and(|lc| lc <= l));
            }
        }
    }
}

#[test]
fn visibility_has_no_jumps() {
    let spec = CurveSpec::new(0.1, vec![2], TimeGrid::new(20.0, 400).unwrap());
    let ratios: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
    let scan = visibility_scan(301, &ratios, &spec).unwrap();
    for w in scan.windows(2) {
        assert!((w[1].1.visibility - w[0].1.visibility).abs() <= 0.2);
    }
    assert!(scan.iter().all(|(_, s)| s.visibility >= 0.0));
}

#[test]
fn negativity_flavors_on_semiclassical_states() {
    // for this number-conserving ensemble both flavors coincide
    let b = build_mode_basis(&ChainParams::with_ratio(5, 0.5, 0.1).unwrap());
    let occ = ModeOccupation::ground_state(2);
    let part = Partition::default_for(5).unwrap();
    for gt in [0.0, 1.0, 3.0, 10.0] {
        let rho = semiclassical_density_operator(&b, gt / 0.1, Statistics::Fermi, &occ, 4096).unwrap();
        let f = dense_log_negativity(&rho, &part, NegativityFlavor::Fermionic).unwrap();
        let c = dense_log_negativity(&rho, &part, NegativityFlavor::Conventional).unwrap();
        assert!(f >= 0.0);
        assert!((f - c).abs() < 1e-10, "Γt={gt}: {f} vs {c}");
    }
}
