//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fermivqe::config::{ExperimentConfig, LatticeKind, ParadigmSpec};
use fermivqe::experiments::{
    resource_table, run_molecule, run_scaling, run_staircase, run_table, write_table, CellReport, ResourceKind,
};
use fermivqe::molecule::bundled_h2o;
use fermivqe::runner::with_threads;
use fermivqe_core::circuits::{
    apply_interaction, apply_phase_rotation, apply_tunneling, apply_xy_zz, Ansatz, Paradigm,
};
use fermivqe_core::exactsolver::{global_ground, ground_in_sector, GroundSolution};
use fermivqe_core::fock::{reference_state, ReferencePattern, StateVector};
use fermivqe_core::hamiltonian::{
    build_spinful_hubbard, build_spinless_hubbard, jw_transform, FermionHamiltonian, FermionOp, FermionTerm,
    HubbardCouplings, PauliString, PauliSum,
};
use fermivqe_core::lattice::{Geometry, Ordering, RegisterMap};
use fermivqe_core::vqe::{initial_params, GradientMode, VqeConfig, VqeProblem};
use fermivqe_core::C64;
use nalgebra::DMatrix;

const ANALYTIC_TOL: f64 = 1e-9;
const JW_TOL: f64 = 1e-10;
const GATE_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-12;
const LEAKAGE_TOL: f64 = 1e-12;
const VARIATIONAL_SLACK: f64 = 1e-9;
const GRADIENT_TOL: f64 = 1e-6;
const FAST_LIMIT_SECS: f64 = 1.0;
const MIN_FIDELITY: f64 = 0.95;
const REFERENCE_FACTOR: f64 = 2.0;
const CONVERGENCE_RESTARTS: usize = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn preset(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&configs().join(name)).unwrap()
}

fn within_factor(value: f64, reference: f64) -> bool {
    value >= reference / REFERENCE_FACTOR && value <= reference * REFERENCE_FACTOR
}

fn mean_l_i(c: &CellReport) -> f64 {
    c.convergence.as_ref().map_or(f64::NAN, |s| s.l_i.mean)
}

fn mean_fidelity(c: &CellReport) -> f64 {
    c.convergence.as_ref().map_or(f64::NAN, |s| s.final_fidelity.mean)
}

fn resource_ledger() -> Outcome {
    let start = Instant::now();
    let expected_spinless = [(88, 176), (198, 204), (96, 192), (144, 132), (102, 204), (306, 276)];
    let expected_spinful = [(150, 250), (420, 364), (210, 350), (504, 408)];
    let got = |name| -> Vec<(usize, usize)> {
        resource_table(&preset(name)).unwrap().iter().map(|(_, r)| (r.r_q, r.l_p)).collect()
    };
    let spinless = got("table_spinless.json");
    let spinful = got("table_spinful.json");
    let secs = start.elapsed().as_secs_f64();
    outcome(
        spinless == expected_spinless && spinful == expected_spinful && secs < FAST_LIMIT_SECS,
        format!("spinless {spinless:?}, spinful {spinful:?}, {secs:.3} s"),
    )
}

fn spinless_chain(n: usize, v: f64) -> FermionHamiltonian {
    let g = Geometry::chain(n).unwrap();
    build_spinless_hubbard(&g, &RegisterMap::new(&g, false, Ordering::RowMajor), 1.0, v, 0.0).unwrap()
}

fn ed_oracles() -> Outcome {
    let start = Instant::now();
    let chain = global_ground(&spinless_chain(12, 0.0)).unwrap().energy;
    let chain_exact = -2.0 * (1..=6).map(|k| (k as f64 * PI / 13.0).cos()).sum::<f64>();
    let g = Geometry::chain(2).unwrap();
    let dimer = build_spinful_hubbard(
        &g,
        &RegisterMap::new(&g, true, Ordering::RowMajor),
        HubbardCouplings { t: 1.0, u: 2.5, v: 0.0, mu: 0.0 },
    )
    .unwrap();
    let (dimer_e, _) = ground_in_sector(&dimer, 2).unwrap();
    let dimer_exact = (2.5 - (2.5f64 * 2.5 + 16.0).sqrt()) / 2.0;
    let secs = start.elapsed().as_secs_f64();
    let (d1, d2) = ((chain - chain_exact).abs(), (dimer_e - dimer_exact).abs());
    outcome(
        d1 <= ANALYTIC_TOL && d2 <= ANALYTIC_TOL && secs < FAST_LIMIT_SECS,
        format!("chain error {d1:.1e}, dimer error {d2:.1e}, {secs:.3} s"),
    )
}

fn staircase_sectors() -> Outcome {
    let mut c = preset("staircase_chain12.json");
    c.staircase.as_mut().unwrap().grid = vec![0.0, 2.0];
    let rows = run_staircase(&c).unwrap();
    let n_f: Vec<usize> = rows.iter().map(|r| r.n_f).collect();
    outcome(n_f == [6, 5], format!("N_f at V=0 and V=2: {n_f:?}"))
}

fn builtin_models() -> Vec<(String, FermionHamiltonian)> {
    let couplings = HubbardCouplings { t: 1.0, u: 2.5, v: 0.5, mu: 0.3 };
    let mut out = Vec::new();
    let mut lattices = Vec::new();
    for n in 2..=8 {
        lattices.push(Geometry::chain(n).unwrap());
    }
    for cols in 2..=4 {
        lattices.push(Geometry::ladder(cols).unwrap());
    }
    lattices.push(Geometry::rectangle(2, 2).unwrap());
    lattices.push(Geometry::rectangle(2, 3).unwrap());
    for g in &lattices {
        for spinful in [false, true] {
            for ordering in [Ordering::RowMajor, Ordering::Snake, Ordering::SpinBlocked] {
                let r = RegisterMap::new(g, spinful, ordering);
                if r.num_modes() > 8 {
                    continue;
                }
                let h = if spinful {
                    build_spinful_hubbard(g, &r, couplings).unwrap()
                } else {
                    build_spinless_hubbard(g, &r, couplings.t, couplings.v, couplings.mu).unwrap()
                };
                out.push((format!("{:?} {}x{} spinful={spinful} {ordering:?}", g.kind(), g.rows(), g.cols()), h));
            }
        }
    }
    out.push(("water".into(), bundled_h2o().hamiltonian));
    out
}

fn jw_equivalence() -> Outcome {
    let models = builtin_models();
    let mut worst = 0.0f64;
    let mut worst_name = String::new();
    for (name, h) in &models {
        let a = h.to_dense();
        let b = jw_transform(h).to_dense();
        let d = a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        if d > worst {
            worst = d;
            worst_name.clone_from(name);
        }
    }
    outcome(worst <= JW_TOL, format!("{} models, max entry deviation {worst:.1e} {worst_name}", models.len()))
}

fn gate_matrix(modes: usize, apply: impl Fn(&mut StateVector)) -> DMatrix<C64> {
    let dim = 1 << modes;
    let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for x in 0..dim {
        let mut s = StateVector::basis(modes, x as u64).unwrap();
        apply(&mut s);
        for (y, a) in s.amplitudes().iter().enumerate() {
            m[(y, x)] = *a;
        }
    }
    m
}

fn max_deviation(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn gate_oracles() -> Outcome {
    let minus_i = C64::new(0.0, -1.0);
    let (t1, t2, t3) = (1.3, -0.6, 0.45);
    let (theta, par, perp, phi) = (0.83, 0.31, -0.72, 1.1);
    let mut worst = 0.0f64;
    // the four-mode pairs straddle modes that may be occupied
    for (modes, a, b) in [(2, 0, 1), (2, 1, 0), (4, 0, 2), (4, 3, 1), (4, 0, 3)] {
        let e = C64::from_polar(t1 / 2.0, -t2);
        let tunneling = FermionHamiltonian::new(
            modes,
            vec![
                FermionTerm::new(e, vec![FermionOp::create(a), FermionOp::annihilate(b)]),
                FermionTerm::new(e.conj(), vec![FermionOp::create(b), FermionOp::annihilate(a)]),
                FermionTerm::number(t3 / 2.0, a),
                FermionTerm::number(-t3 / 2.0, b),
            ],
        )
        .unwrap();
        let oracle = (tunneling.to_dense() * minus_i).exp();
        worst =
            worst.max(max_deviation(&gate_matrix(modes, |s| apply_tunneling(s, a, b, t1, t2, t3).unwrap()), &oracle));

        let nn = FermionHamiltonian::new(modes, vec![FermionTerm::density_density(1.0, a, b)]).unwrap();
        let oracle = (nn.to_dense() * (minus_i * theta)).exp();
        worst = worst.max(max_deviation(&gate_matrix(modes, |s| apply_interaction(s, a, b, theta).unwrap()), &oracle));

        let (ma, mb) = (1u64 << a, 1u64 << b);
        let p = |x, z, coeff| PauliString { coeff, x, z };
        let xy_zz = PauliSum {
            qubits: modes,
            strings: vec![p(ma | mb, 0, par), p(ma | mb, ma | mb, par), p(0, ma | mb, perp)],
        };
        let oracle = (xy_zz.to_dense() * C64::new(0.0, 1.0)).exp();
        worst = worst.max(max_deviation(&gate_matrix(modes, |s| apply_xy_zz(s, a, b, par, perp).unwrap()), &oracle));

        let z = PauliSum { qubits: modes, strings: vec![p(0, ma, 0.5)] };
        let oracle = (z.to_dense() * (minus_i * phi)).exp();
        worst = worst.max(max_deviation(&gate_matrix(modes, |s| apply_phase_rotation(s, a, phi).unwrap()), &oracle));
    }
    outcome(worst <= GATE_TOL, format!("max deviation from exponentiated generators {worst:.1e}"))
}

fn convergence_pair(name: &str) -> (CellReport, CellReport) {
    let mut c = preset(name);
    c.cells.truncate(2);
    c.vqe.restarts = CONVERGENCE_RESTARTS;
    assert!(c.cells[0].paradigm == ParadigmSpec::Fermionic && c.cells[1].paradigm == ParadigmSpec::Qubit);
    assert_eq!(c.cells[0].model.geometry.kind, LatticeKind::Chain);
    let (report, _) = run_table(&c).unwrap();
    let mut cells = report.cells.into_iter();
    (cells.next().unwrap(), cells.next().unwrap())
}

fn spinless_convergence() -> Outcome {
    let (f, q) = convergence_pair("table_spinless.json");
    let (lf, lq) = (mean_l_i(&f), mean_l_i(&q));
    let (ff, fq) = (mean_fidelity(&f), mean_fidelity(&q));
    outcome(
        ff >= MIN_FIDELITY && fq >= MIN_FIDELITY && lf < lq && within_factor(lf, 75.0) && within_factor(lq, 106.0),
        format!("fermionic L=4 l_I {lf:.1} F {ff:.4}; qubit L=6 l_I {lq:.1} F {fq:.4}"),
    )
}

fn spinful_convergence() -> Outcome {
    let (f, q) = convergence_pair("table_spinful.json");
    let (lf, lq) = (mean_l_i(&f), mean_l_i(&q));
    let (ff, fq) = (mean_fidelity(&f), mean_fidelity(&q));
    outcome(
        ff >= MIN_FIDELITY && lf < lq && within_factor(lf, 73.0),
        format!("fermionic L=5 l_I {lf:.1} F {ff:.4}; qubit L=7 l_I {lq:.1} F {fq:.4}"),
    )
}

fn scaling_order() -> Outcome {
    let c = preset("scaling_chain.json");
    let report = run_scaling(&c).unwrap();
    let beta = |p: &str, k: ResourceKind| {
        report.fits.iter().find(|f| f.paradigm == p && f.resource == k).map_or(f64::NAN, |f| f.exponent)
    };
    let (qf, qq) = (beta("fermionic", ResourceKind::Quantum), beta("qubit", ResourceKind::Quantum));
    let (cf, cq) = (beta("fermionic", ResourceKind::Classical), beta("qubit", ResourceKind::Classical));
    let layers: Vec<String> =
        report.points.iter().map(|p| format!("{}{}:{:?}", &p.paradigm[..1], p.sites, p.layers)).collect();
    outcome(
        qf > 0.0 && cf > 0.0 && qf < qq && cf < cq,
        format!("beta_Q {qf:.2} vs {qq:.2}, beta_C {cf:.2} vs {cq:.2}, L {}", layers.join(" ")),
    )
}

fn molecule() -> Outcome {
    let mut c = preset("molecule_h2o.json");
    c.vqe.restarts = CONVERGENCE_RESTARTS;
    let (r, _) = run_molecule(&c).unwrap();
    let (lf, lq) = (mean_l_i(&r.fermionic), mean_l_i(&r.qubit));
    let ff = mean_fidelity(&r.fermionic);
    let (qf, qq) = (r.fermionic.resources.r_q, r.qubit.resources.r_q);
    outcome(
        ff >= MIN_FIDELITY && lf < lq && qf < qq,
        format!("fermionic l_I {lf:.1} F {ff:.4} R_Q {qf}; qubit l_I {lq:.1} R_Q {qq}"),
    )
}

struct PropertyCase {
    h: FermionHamiltonian,
    ansatz: Ansatz,
    reference: StateVector,
    ground: GroundSolution,
}

fn property_cases() -> Vec<PropertyCase> {
    let mut cases = Vec::new();
    let lattice = |g: Geometry, spinful, couplings: HubbardCouplings, paradigm, layers| {
        let r = RegisterMap::new(&g, spinful, Ordering::RowMajor);
        let h = if spinful {
            build_spinful_hubbard(&g, &r, couplings).unwrap()
        } else {
            build_spinless_hubbard(&g, &r, couplings.t, couplings.v, couplings.mu).unwrap()
        };
        let ground = global_ground(&h).unwrap();
        let pattern =
            if spinful { ReferencePattern::Mask(r.neel_mask(ground.n_f).unwrap()) } else { ReferencePattern::Spread };
        let reference = reference_state(r.num_modes(), ground.n_f, pattern).unwrap();
        let ansatz = Ansatz::build(&g, paradigm, &r, layers).unwrap();
        PropertyCase { h, ansatz, reference, ground }
    };
    let spinless = HubbardCouplings { t: 1.0, u: 0.0, v: 2.0, mu: 0.0 };
    let spinful = HubbardCouplings { t: 1.0, u: 2.5, v: 0.5, mu: 0.0 };
    for paradigm in [Paradigm::Fermionic, Paradigm::Qubit] {
        cases.push(lattice(Geometry::chain(12).unwrap(), false, spinless, paradigm, 2));
        cases.push(lattice(Geometry::ladder(3).unwrap(), false, spinless, paradigm, 2));
        cases.push(lattice(Geometry::chain(6).unwrap(), true, spinful, paradigm, 2));
    }
    let water = bundled_h2o().hamiltonian;
    let (energy, vectors) = ground_in_sector(&water, 4).unwrap();
    let g = Geometry::chain(4).unwrap();
    let r = RegisterMap::new(&g, true, Ordering::RowMajor);
    for paradigm in [Paradigm::Fermionic, Paradigm::Qubit] {
        cases.push(PropertyCase {
            h: water.clone(),
            ansatz: Ansatz::build(&g, paradigm, &r, 2).unwrap(),
            reference: reference_state(8, 4, ReferencePattern::Mask(r.neel_mask(4).unwrap())).unwrap(),
            ground: GroundSolution {
                energy,
                n_f: 4,
                vectors: vectors.clone(),
                degeneracy_tol: 1e-9,
                sector_energies: Vec::new(),
                tied_sectors: Vec::new(),
            },
        });
    }
    cases
}

fn random_params(n: usize, scale: f64, stream: usize) -> Vec<f64> {
    initial_params(&VqeConfig { init_scale: scale, seed: 2024, ..VqeConfig::default() }, n, stream)
}

fn property_suite() -> Outcome {
    let mut failures = Vec::new();
    let (mut norm_err, mut leak, mut bound_gap, mut grad_err) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
    for (k, case) in property_cases().into_iter().enumerate() {
        let n = case.ansatz.num_params();
        let n_f = case.reference.amplitudes().iter().position(|a| a.norm() > 0.0).unwrap().count_ones() as usize;
        let problem = VqeProblem::new(&case.h, case.ansatz.clone(), case.reference.clone(), &case.ground).unwrap();
        let mut ws = problem.workspace();
        for point in 0..10 {
            let params = random_params(n, PI, 100 * k + point);
            let psi = case.ansatz.apply(&params, &case.reference).unwrap();
            norm_err = norm_err.max((psi.norm_sqr() - 1.0).abs());
            leak = leak.max(psi.leakage(n_f));
            let amps: Vec<C64> = random_params(2 << case.h.modes(), 1.0, 100 * k + point + 50)
                .chunks(2)
                .map(|c| C64::new(c[0], c[1]))
                .collect();
            let mut generic = StateVector::from_amplitudes(case.h.modes(), amps).unwrap();
            generic.normalize();
            norm_err = norm_err.max((case.ansatz.apply(&params, &generic).unwrap().norm_sqr() - 1.0).abs());

            let e = problem.energy(&params, &mut ws).unwrap();
            bound_gap = bound_gap.min(e - case.ground.energy);
            let (mut ga, mut gf) = (vec![0.0; n], vec![0.0; n]);
            problem.energy_and_gradient(&params, GradientMode::Adjoint, 1e-5, &mut ga, &mut ws).unwrap();
            problem.energy_and_gradient(&params, GradientMode::FiniteDifference, 1e-5, &mut gf, &mut ws).unwrap();
            grad_err = grad_err.max(ga.iter().zip(&gf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
    }
    if norm_err > NORM_TOL {
        failures.push(format!("norm drift {norm_err:.1e}"));
    }
    if leak > LEAKAGE_TOL {
        failures.push(format!("sector leakage {leak:.1e}"));
    }
    if bound_gap < -VARIATIONAL_SLACK {
        failures.push(format!("energy below ground by {:.1e}", -bound_gap));
    }
    if grad_err > GRADIENT_TOL {
        failures.push(format!("adjoint vs finite difference {grad_err:.1e}"));
    }

    let config = ExperimentConfig::from_json(
        r#"{"kind": "table_spinless",
            "cells": [
              {"model": {"geometry": {"kind": "chain", "cols": 6}, "couplings": {"v": 2.0}},
               "paradigm": "fermionic", "layers": 2},
              {"model": {"geometry": {"kind": "chain", "cols": 3}, "spinful": true, "couplings": {"u": 2.5, "v": 0.5}},
               "paradigm": "qubit", "layers": 2}
            ],
            "vqe": {"max_iterations": 30, "restarts": 6, "init_scale": 0.01, "seed": 11, "fd_step": 1e-5,
                    "grad_tolerance": 1e-8, "fidelity_threshold": 0.95, "gradient": "finite_difference"}}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for threads in [Some(1), Some(4), Some(1), None] {
        let dir = tempfile::tempdir().unwrap();
        let (report, traces) = with_threads(threads, || run_table(&config)).unwrap().unwrap();
        write_table(dir.path(), &report, &traces).unwrap();
        let bytes: Vec<Vec<u8>> = ["summary.json", "table.csv", "trace.csv"]
            .iter()
            .map(|f| std::fs::read(dir.path().join(f)).unwrap())
            .collect();
        outputs.push(bytes);
    }
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    if !identical {
        failures.push("outputs differ between serial and parallel runs".into());
    }
    outcome(
        failures.is_empty(),
        format!(
            "norm {norm_err:.1e}, leakage {leak:.1e}, min E-E0 {bound_gap:.1e}, gradient gap {grad_err:.1e}, \
             reruns identical {identical}{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 10] = [
        ("resource ledger", resource_ledger),
        ("ED oracles", ed_oracles),
        ("staircase", staircase_sectors),
        ("JW equivalence", jw_equivalence),
        ("gate oracles", gate_oracles),
        ("spinless chain convergence", spinless_convergence),
        ("spinful chain convergence", spinful_convergence),
        ("scaling ordering", scaling_order),
        ("molecule", molecule),
        ("property suite", property_suite),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let line = format!(
            "criterion {:>2} {:<28} {} ({}) [{:.1} s]\n",
            k + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        // written past the test harness capture so every line shows
        let mut out = std::io::stdout().lock();
        out.write_all(line.as_bytes()).unwrap();
        out.flush().unwrap();
        if !o.pass {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
