use fermivqe_core::circuits::{Ansatz, Paradigm};
use fermivqe_core::exactsolver::{global_ground, ground_in_sector};
use fermivqe_core::fit::loglog_fit;
use fermivqe_core::fock::{reference_state, ReferencePattern};
use fermivqe_core::hamiltonian::{build_spinful_hubbard, build_spinless_hubbard, jw_transform, HubbardCouplings};
use fermivqe_core::lattice::{Geometry, Ordering, RegisterMap};
use fermivqe_core::vqe::{run_vqe, GradientMode, VqeConfig, VqeProblem};

#[test]
fn spinful_dimer_sector_ground() {
    let g = Geometry::chain(2).unwrap();
    let r = RegisterMap::new(&g, true, Ordering::RowMajor);
    let u = 2.5;
    let h = build_spinful_hubbard(&g, &r, HubbardCouplings { u, ..Default::default() }).unwrap();
    let (e, _) = ground_in_sector(&h, 2).unwrap();
    assert!((e - (u - (u * u + 16.0f64).sqrt()) / 2.0).abs() < 1e-10);
}

#[test]
fn jw_image_matches_fermionic_matrix() {
    let g = Geometry::ladder(2).unwrap();
    let r = RegisterMap::new(&g, false, Ordering::Snake);
    let h = build_spinless_hubbard(&g, &r, 1.0, 1.5, 0.3).unwrap();
    let diff = h.to_dense() - jw_transform(&h).to_dense();
    assert!(diff.iter().all(|z| z.norm() < 1e-12));
}

#[test]
fn both_paradigms_reach_the_ground_state_of_a_short_chain() {
    let g = Geometry::chain(4).unwrap();
    let r = RegisterMap::new(&g, false, Ordering::RowMajor);
    let h = build_spinless_hubbard(&g, &r, 1.0, 1.0, 0.0).unwrap();
    let ground = global_ground(&h).unwrap();
    let config =
        VqeConfig { max_iterations: 150, restarts: 3, gradient_mode: GradientMode::Adjoint, ..Default::default() };
    for paradigm in [Paradigm::Fermionic, Paradigm::Qubit] {
        let ansatz = Ansatz::build(&g, paradigm, &r, 3).unwrap();
        let reference = reference_state(4, ground.n_f, ReferencePattern::Spread).unwrap();
        let problem = VqeProblem::new(&h, ansatz, reference, &ground).unwrap();
        let (summary, traces) = run_vqe(&problem, &config).unwrap();
        assert_eq!(traces.len(), 3);
        assert!(summary.final_energy.mean >= ground.energy - 1e-9);
        assert!(summary.final_fidelity.mean > 0.99, "{paradigm:?}: {}", summary.final_fidelity.mean);
        assert!(summary.max_leakage < 1e-12);
    }
}

#[test]
fn power_law_fit_recovers_exponent() {
    let points: Vec<(f64, f64)> = [6.0f64, 8.0, 10.0, 12.0].iter().map(|&n| (n, 3.0 * n.powf(2.5))).collect();
    let fit = loglog_fit(&points).unwrap();
    assert!((fit.exponent - 2.5).abs() < 1e-12);
    assert!(fit.stderr < 1e-12);
}
