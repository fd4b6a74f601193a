//! Cross-checks between independent routes to the same quantity.

use std::sync::Arc;

use nalgebra::DMatrix;
use ssh_revival::analysis::steady_state_value;
use ssh_revival::chain::{
    build_mode_basis, dense_spectrum, ChainParams, ModeBasis,
};
use ssh_revival::entanglement::{
    dense_log_negativity, dense_log_negativity_unblocked, entropy_density_closed_form,
    fermionic_log_negativity, mutual_information, renyi_entropy, EnsembleSpectra, EntropyOrder,
    Measure, NegativityFlavor, Partition,
};
use ssh_revival::fock::{FockSpace, Statistics};
use ssh_revival::lindblad::{
    build_initial_state, build_occupied_state, edge_occupation, edge_state, evolve,
    transition_rates,
};
use ssh_revival::semiclassical::{
    green_function, mode_correlations, mode_state, semiclassical_density_operator, ModeOccupation,
    SemiclassicalEnsemble,
};

const CAP: usize = 1 << 14;

fn basis(length: usize, ratio: f64, gamma: f64) -> ModeBasis {
    build_mode_basis(&ChainParams::with_ratio(length, ratio, gamma).unwrap())
}

fn max_abs(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

#[test]
fn mode_energies_match_dense_diagonalization() {
    for (l, q) in [(3, 1.0 - 1e-12), (7, 0.1), (9, 0.6), (15, 0.95)] {
        let b = basis(l, q, 0.1);
        let mut analytic: Vec<f64> = b.mode_indices().map(|k| b.mode_energy(k)).collect();
        analytic.sort_by(f64::total_cmp);
        let dense = dense_spectrum(b.params());
        assert_eq!(analytic.len(), dense.len());
        for (x, y) in analytic.iter().zip(&dense) {
            assert!((x - y).abs() < 1e-10, "L={l}: {x} vs {y}");
        }
    }
}

#[test]
fn green_function_matches_dense_ensemble() {
    let b = basis(7, 0.1, 0.1);
    let occ = ModeOccupation::ground_state(3);
    for gt in [0.0, 0.3, 2.0 * 2f64.ln(), 5.0, 25.0] {
        let t = gt / 0.1;
        let rho = semiclassical_density_operator(&b, t, Statistics::Fermi, &occ, CAP).unwrap();
        let dense = rho.green_matrix().map(|z| z.re);
        let g = green_function(&b, t, &occ);
        assert!(max_abs(&dense, g.matrix()) < 1e-10, "Γt={gt}");
    }
}

#[test]
fn ensemble_spectrum_independent_of_statistics() {
    let b = basis(7, 0.4, 0.1);
    let occ = ModeOccupation::ground_state(3);
    for gt in [0.5, 1.7, 6.0] {
        let t = gt / 0.1;
        let f = semiclassical_density_operator(&b, t, Statistics::Fermi, &occ, CAP).unwrap();
        let s = semiclassical_density_operator(&b, t, Statistics::Bose, &occ, CAP).unwrap();
        let (ef, es) = (f.eigenvalues(), s.eigenvalues());
        let top = |v: &[f64]| {
            let mut v: Vec<f64> = v.iter().copied().filter(|x| *x > 1e-13).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let (ef, es) = (top(&ef), top(&es));
        assert_eq!(ef.len(), es.len());
        for (x, y) in ef.iter().zip(&es) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn decoupled_dimer_initial_state() {
    let b = basis(3, 0.0, 0.1);
    let space = Arc::new(FockSpace::fermi(3).unwrap());
    let rho = build_initial_state(&b, space.clone()).unwrap();
    // f_0† (f_1† - f_2†)/√2 |vac⟩, up to a global sign
    let mut psi = vec![0.0; space.dim()];
    psi[space.index_of(&[1, 1, 0]).unwrap()] = 1.0 / 2f64.sqrt();
    psi[space.index_of(&[1, 0, 1]).unwrap()] = -1.0 / 2f64.sqrt();
    assert!((rho.fidelity_with_pure(&psi) - 1.0).abs() < 1e-12);
}

#[test]
fn initial_particle_number() {
    for l in [3, 5, 7] {
        let b = basis(l, 0.3, 0.1);
        for stats in [Statistics::Fermi, Statistics::Bose] {
            let space = Arc::new(FockSpace::new(stats, l, l.div_ceil(2)).unwrap());
            let rho = build_initial_state(&b, space.clone()).unwrap();
            let n: f64 = (0..l).map(|i| rho.expectation(&space.number(i)).re).sum();
            assert!((n - (l + 1) as f64 / 2.0).abs() < 1e-12);
        }
    }
}

#[test]
fn master_equation_against_semiclassical_green_function() {
    // g2/Γ = 10 for the Wick comparison
    let params = ChainParams::with_ratio(5, 0.1, 0.1).unwrap();
    let b = build_mode_basis(&params);
    let space = Arc::new(FockSpace::fermi(5).unwrap());
    let occ = ModeOccupation::ground_state(2);
    let rho0 = build_initial_state(&b, space).unwrap();
    let times: Vec<f64> = (0..=20).map(|i| i as f64).collect();
    let states = evolve(&rho0, &params, &times).unwrap();
    let edge0 = edge_occupation(&states[0], &b);
    let mut previous_n = f64::INFINITY;
    let mut worst = 0.0f64;
    for rho in &states {
        assert!((rho.trace() - 1.0).abs() < 1e-8);
        assert!(rho.hermiticity_defect() < 1e-10);
        assert!(rho.eigenvalues().iter().all(|&x| x > -1e-8));
        assert!((edge_occupation(rho, &b) - edge0).abs() < 1e-8);
        let n: f64 = rho.one_body_density().diagonal().iter().map(|z| z.re).sum();
        assert!(n <= previous_n + 1e-9);
        previous_n = n;
        let g = green_function(&b, rho.time(), &occ);
        worst = worst.max(max_abs(&rho.green_matrix().map(|z| z.re), g.matrix()));
    }
    assert!(worst <= 0.02, "Wick deviation {worst}");
}

#[test]
fn all_modes_occupied_correlations_follow_master_equation() {
    let params = ChainParams::with_ratio(5, 0.1, 0.1).unwrap();
    let b = build_mode_basis(&params);
    let space = Arc::new(FockSpace::fermi(5).unwrap());
    let occ = ModeOccupation::all_occupied(2);
    let rho0 = build_occupied_state(&b, space, &occ).unwrap();
    let times: Vec<f64> = (0..=10).map(|i| 2.0 * i as f64).collect();
    for rho in evolve(&rho0, &params, &times).unwrap() {
        let n = rho.one_body_density().map(|z| z.re);
        let u = b.transform();
        let chi = mode_correlations(&b, rho.time(), &occ);
        for k in b.mode_indices() {
            let row = b.row_of(k);
            let occupied = (u.row(row) * &n * u.row(row).transpose())[(0, 0)];
            assert!((1.0 - occupied - chi[row]).abs() < 0.02, "k={k} t={}", rho.time());
        }
    }
}

#[test]
fn steady_state_reached() {
    let params = ChainParams::with_ratio(5, 0.3, 0.1).unwrap();
    let b = build_mode_basis(&params);
    let space = Arc::new(FockSpace::fermi(5).unwrap());
    let rho0 = build_initial_state(&b, space.clone()).unwrap();
    let psi = mode_state(&b, &space, &[0]).unwrap();
    let states = evolve(&rho0, &params, &[0.0, 400.0]).unwrap();
    assert!(states[1].fidelity_with_pure(&psi) >= 1.0 - 1e-6);
    let target = edge_state(&b, space).unwrap();
    assert!((target.fidelity_with_pure(&psi) - 1.0).abs() < 1e-12);
}

#[test]
fn transition_rate_structure() {
    let b = basis(5, 0.4, 0.2);
    let space = FockSpace::fermi(5).unwrap();
    let rates = transition_rates(&b, &space).unwrap();
    assert_eq!(rates.total_out(&[0]), Some(0.0));
    assert!(rates.total_out(&[]).unwrap().abs() < 1e-15);
    let ground = [-2, -1, 0];
    for k in [-2, -1] {
        let to: Vec<isize> = ground.iter().copied().filter(|&m| m != k).collect();
        assert!((rates.rate(&ground, &to).unwrap() - 0.1).abs() < 1e-12);
    }
    assert!(rates.rate(&ground, &[0]).unwrap().abs() < 1e-15);
    assert!(rates.rate(&ground, &[-2, 0, 1]).unwrap().abs() < 1e-15);
}

#[test]
fn gaussian_and_dense_negativities_agree() {
    for (l, q) in [(3, 0.5), (5, 0.1), (5, 0.9), (7, 0.5)] {
        let b = basis(l, q, 0.1);
        let occ = ModeOccupation::ground_state(l / 2);
        let part = Partition::default_for(l).unwrap();
        for gt in [0.0, 0.7, 1.9, 4.0, 12.0] {
            let t = gt / 0.1;
            let rho = semiclassical_density_operator(&b, t, Statistics::Fermi, &occ, CAP).unwrap();
            let dense = dense_log_negativity(&rho, &part, NegativityFlavor::Fermionic).unwrap();
            let gauss = fermionic_log_negativity(&green_function(&b, t, &occ), &part).unwrap();
            assert!((dense - gauss).abs() < 1e-8, "L={l} q={q} Γt={gt}: {dense} vs {gauss}");
        }
    }
}

#[test]
fn blocked_trace_norm_matches_full_matrix() {
    let b = basis(5, 0.6, 0.1);
    let occ = ModeOccupation::ground_state(2);
    let parts = [
        Partition::default_for(5).unwrap(),
        Partition::new(5, [0, 3]).unwrap(),
    ];
    for stats in [Statistics::Fermi, Statistics::Bose] {
        let rho = semiclassical_density_operator(&b, 13.0, stats, &occ, CAP).unwrap();
        for part in &parts {
            let mut flavors = vec![NegativityFlavor::Conventional];
            if stats == Statistics::Fermi {
                flavors.push(NegativityFlavor::Fermionic);
            }
            for flavor in flavors {
                let blocked = dense_log_negativity(&rho, part, flavor).unwrap();
                let full = dense_log_negativity_unblocked(&rho, part, flavor).unwrap();
                assert!((blocked - full).abs() < 1e-10, "{stats:?} {part} {flavor:?}");
                let swapped = dense_log_negativity(&rho, &part.swapped(), flavor).unwrap();
                assert!((blocked - swapped).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn gaussian_entropies_match_dense_partial_trace() {
    let b = basis(7, 0.5, 0.1);
    let occ = ModeOccupation::ground_state(3);
    let sub = [0usize, 1, 2];
    for gt in [0.4, 1.5, 3.3] {
        let t = gt / 0.1;
        let rho = semiclassical_density_operator(&b, t, Statistics::Fermi, &occ, CAP).unwrap();
        let g = green_function(&b, t, &occ);
        for order in [EntropyOrder::VonNeumann, EntropyOrder::Renyi(2.0), EntropyOrder::Renyi(0.5)] {
            let dense = renyi_entropy(&rho, order, Some(&sub)).unwrap();
            let gauss = renyi_entropy(&g, order, Some(&sub)).unwrap();
            assert!((dense - gauss).abs() < 1e-9, "{order:?}: {dense} vs {gauss}");
        }
    }
}

#[test]
fn ensemble_spectra_match_dense_mutual_information() {
    let b = basis(5, 0.3, 0.1);
    let occ = ModeOccupation::ground_state(2);
    let part = Partition::new(5, [1, 2]).unwrap();
    for stats in [Statistics::Fermi, Statistics::Bose] {
        let ensemble = SemiclassicalEnsemble::new(&b, stats, &occ, usize::MAX).unwrap();
        let spectra = EnsembleSpectra::new(&ensemble, &part, usize::MAX).unwrap();
        for gt in [0.0, 1.1, 5.0] {
            let t = gt / 0.1;
            let rho = ensemble.density_operator(t);
            for order in [EntropyOrder::VonNeumann, EntropyOrder::Renyi(2.0)] {
                let dense = mutual_information(&rho, &part, order).unwrap();
                let fast = spectra.mutual_information(t, order);
                assert!((dense - fast).abs() < 1e-10, "{stats:?} Γt={gt} {order:?}");
            }
        }
    }
}

#[test]
fn steady_state_values_match_dense_edge_state() {
    for stats in [Statistics::Fermi, Statistics::Bose] {
        let b = basis(5, 0.7, 0.1);
        let space = Arc::new(FockSpace::new(stats, 5, 3).unwrap());
        let rho = edge_state(&b, space).unwrap();
        let part = Partition::default_for(5).unwrap();
        let neg = dense_log_negativity(&rho, &part, NegativityFlavor::Conventional).unwrap();
        let expected = steady_state_value(&b, &part, Measure::ConventionalNegativity);
        assert!((neg - expected).abs() < 1e-12);
        for order in [EntropyOrder::VonNeumann, EntropyOrder::Renyi(2.0)] {
            let mi = mutual_information(&rho, &part, order).unwrap();
            let expected = steady_state_value(&b, &part, Measure::MutualInformation(order));
            assert!((mi - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn entropy_density_matches_dense_spectrum() {
    let b = basis(5, 0.2, 0.1);
    let occ = ModeOccupation::ground_state(2);
    for gt in [0.05, 1.0, 2.0 * 2f64.ln(), 3.0, 9.0] {
        let t = gt / 0.1;
        let rho = semiclassical_density_operator(&b, t, Statistics::Bose, &occ, CAP).unwrap();
        for order in [EntropyOrder::VonNeumann, EntropyOrder::Renyi(2.0)] {
            let s = renyi_entropy(&rho, order, None).unwrap() / 2.0;
            let closed = entropy_density_closed_form(t, 0.1, order).unwrap();
            assert!((s - closed).abs() < 1e-10);
        }
    }
}

#[test]
fn unitary_dynamics_keeps_purity() {
    let params = ChainParams::new(5, 0.4, 1.0, 0.0).unwrap();
    let b = build_mode_basis(&params);
    let space = Arc::new(FockSpace::bose(5, 3).unwrap());
    let rho0 = build_initial_state(&b, space).unwrap();
    let states = evolve(&rho0, &params, &[0.0, 3.0, 17.0]).unwrap();
    for rho in &states {
        assert!((rho.purity() - 1.0).abs() < 1e-8);
    }
}
