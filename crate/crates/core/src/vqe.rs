//! The variational loop: energy and gradient of an ansatz state, BFGS with a
//! strong-Wolfe line search, per-restart traces and restart statistics.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[allow(unused_imports)] // float math without std
use num_traits::Float;

use crate::circuits::{Ansatz, Block};
use crate::exactsolver::{GroundSolution, SectorOperator};
use crate::fock::{dot, StateVector};
use crate::hamiltonian::FermionHamiltonian;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMode {
    FiniteDifference,
    Adjoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VqeConfig {
    pub max_iterations: usize,
    pub restarts: usize,
    /// Initial parameters are uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
    pub seed: u64,
    pub fd_step: f64,
    pub grad_tolerance: f64,
    pub fidelity_threshold: f64,
    pub gradient_mode: GradientMode,
}

impl Default for VqeConfig {
    fn default() -> Self {
        VqeConfig {
            max_iterations: 150,
            restarts: 100,
            init_scale: 0.01,
            seed: 0,
            fd_step: 1e-5,
            grad_tolerance: 1e-8,
            fidelity_threshold: 0.95,
            gradient_mode: GradientMode::FiniteDifference,
        }
    }
}

impl VqeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.into()));
        // NaN fails every check
        let positive = |x: f64| x > 0.0;
        if self.restarts == 0 {
            return bad("at least one restart is required");
        }
        if !positive(self.init_scale) {
            return bad("init_scale must be positive");
        }
        if !positive(self.fidelity_threshold) || self.fidelity_threshold > 1.0 {
            return bad("fidelity_threshold must lie in (0, 1]");
        }
        if !positive(self.fd_step) || self.grad_tolerance.is_nan() || self.grad_tolerance < 0.0 {
            return bad("fd_step must be positive and grad_tolerance non-negative");
        }
        Ok(())
    }
}

/// Everything one restart needs, shared read-only between restarts.
#[derive(Debug, Clone)]
pub struct VqeProblem {
    ansatz: Ansatz,
    reference: StateVector,
    n_f: usize,
    op: SectorOperator,
    ground_energy: f64,
    /// Ground vectors in sector-local coordinates; empty if the reference
    /// lives in another sector.
    ground_local: Vec<Vec<C64>>,
}

/// Scratch buffers reused across evaluations of one restart.
#[derive(Debug, Clone)]
pub struct Workspace {
    phi: Vec<C64>,
    lambda: Vec<C64>,
    local: Vec<C64>,
    local_out: Vec<C64>,
    blocks: Vec<Block>,
    ders: Vec<Block>,
    probe: Vec<f64>,
}

impl VqeProblem {
    /// The sector of the energy operator is the particle number of `reference`,
    /// which must be a computational basis state.
    pub fn new(
        h: &FermionHamiltonian,
        ansatz: Ansatz,
        reference: StateVector,
        ground: &GroundSolution,
    ) -> Result<Self> {
        if reference.modes() != h.modes() || ansatz.modes() != h.modes() {
            return Err(Error::DimensionMismatch { expected: 1 << h.modes(), got: reference.dim() });
        }
        let occupied: Vec<usize> =
            reference.amplitudes().iter().enumerate().filter(|(_, a)| a.norm_sqr() > 0.0).map(|(x, _)| x).collect();
        if occupied.len() != 1 {
            return Err(Error::InvalidArgument("reference must be a single occupation basis state".into()));
        }
        let n_f = occupied[0].count_ones() as usize;
        let op = SectorOperator::new(&h.compile(), n_f)?;
        let ground_local = if ground.n_f == n_f {
            ground
                .vectors
                .iter()
                .map(|g| {
                    let mut l = vec![C64::new(0.0, 0.0); op.dim()];
                    op.gather(g.amplitudes(), &mut l);
                    l
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(VqeProblem { ansatz, reference, n_f, op, ground_energy: ground.energy, ground_local })
    }

    pub fn ansatz(&self) -> &Ansatz {
        &self.ansatz
    }

    pub fn num_params(&self) -> usize {
        self.ansatz.num_params()
    }

    pub fn n_f(&self) -> usize {
        self.n_f
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    pub fn workspace(&self) -> Workspace {
        let dim = 1usize << self.ansatz.modes();
        Workspace {
            phi: vec![C64::new(0.0, 0.0); dim],
            lambda: vec![C64::new(0.0, 0.0); dim],
            local: vec![C64::new(0.0, 0.0); self.op.dim()],
            local_out: vec![C64::new(0.0, 0.0); self.op.dim()],
            blocks: Vec::with_capacity(self.ansatz.gates().len()),
            ders: Vec::new(),
            probe: Vec::new(),
        }
    }

    fn prepare(&self, params: &[f64], ws: &mut Workspace) {
        ws.phi.copy_from_slice(self.reference.amplitudes());
        self.ansatz.apply_raw(params, &mut ws.phi);
        self.op.gather(&ws.phi, &mut ws.local);
    }

    fn sector_energy(&self, ws: &mut Workspace) -> f64 {
        self.op.matvec(&ws.local, &mut ws.local_out);
        dot(&ws.local, &ws.local_out).re
    }

    /// `⟨ψ(θ)|H|ψ(θ)⟩`
    pub fn energy(&self, params: &[f64], ws: &mut Workspace) -> Result<f64> {
        self.ansatz.check_params(params)?;
        self.prepare(params, ws);
        Ok(self.sector_energy(ws))
    }

    /// Fidelity and out-of-sector weight of the state prepared by the last
    /// energy or gradient call.
    fn observe(&self, ws: &Workspace) -> (f64, f64) {
        let fid = self.ground_local.iter().map(|g| dot(g, &ws.local).norm_sqr()).sum();
        let inside: f64 = ws.local.iter().map(|a| a.norm_sqr()).sum();
        (fid, (1.0 - inside).max(0.0))
    }

    pub fn fidelity(&self, params: &[f64], ws: &mut Workspace) -> Result<f64> {
        self.ansatz.check_params(params)?;
        self.prepare(params, ws);
        Ok(self.observe(ws).0)
    }

    /// Energy and its gradient; `grad` is overwritten.
    pub fn energy_and_gradient(
        &self,
        params: &[f64],
        mode: GradientMode,
        fd_step: f64,
        grad: &mut [f64],
        ws: &mut Workspace,
    ) -> Result<f64> {
        self.ansatz.check_params(params)?;
        if grad.len() != params.len() {
            return Err(Error::DimensionMismatch { expected: params.len(), got: grad.len() });
        }
        match mode {
            GradientMode::FiniteDifference => {
                let mut probe = core::mem::take(&mut ws.probe);
                probe.clear();
                probe.extend_from_slice(params);
                for (k, g) in grad.iter_mut().enumerate() {
                    probe[k] = params[k] + fd_step;
                    self.prepare(&probe, ws);
                    let up = self.sector_energy(ws);
                    probe[k] = params[k] - fd_step;
                    self.prepare(&probe, ws);
                    let down = self.sector_energy(ws);
                    probe[k] = params[k];
                    *g = (up - down) / (2.0 * fd_step);
                }
                ws.probe = probe;
                self.prepare(params, ws);
                Ok(self.sector_energy(ws))
            }
            GradientMode::Adjoint => Ok(self.adjoint(params, grad, ws)),
        }
    }

    fn adjoint(&self, params: &[f64], grad: &mut [f64], ws: &mut Workspace) -> f64 {
        let modes = self.ansatz.modes();
        let gates = self.ansatz.gates();
        ws.blocks.clear();
        ws.phi.copy_from_slice(self.reference.amplitudes());
        for g in gates {
            let b = g.gate.block(params);
            b.apply(modes, &mut ws.phi);
            ws.blocks.push(b);
        }
        self.op.gather(&ws.phi, &mut ws.local);
        let energy = self.sector_energy(ws);
        ws.lambda.iter_mut().for_each(|a| *a = C64::new(0.0, 0.0));
        for (&x, &v) in self.op.basis().iter().zip(&ws.local_out) {
            ws.lambda[x as usize] = v;
        }
        // reverse sweep: φ holds the state before gate k, λ the back-propagated H|ψ⟩
        for (k, g) in gates.iter().enumerate().rev() {
            let inv = ws.blocks[k].adjoint();
            inv.apply(modes, &mut ws.phi);
            g.gate.derivative_blocks(params, &mut ws.ders);
            let slot = g.gate.slot();
            for (j, d) in ws.ders.iter().enumerate() {
                grad[slot + j] = 2.0 * d.overlap(modes, &ws.lambda, &ws.phi).re;
            }
            inv.apply(modes, &mut ws.lambda);
        }
        energy
    }

    /// The state `U(θ)|reference⟩`.
    pub fn state(&self, params: &[f64]) -> Result<StateVector> {
        self.ansatz.apply(params, &self.reference)
    }
}

/// `⟨ψ(θ)|H|ψ(θ)⟩` for `ψ(θ) = U(θ)|reference⟩`.
pub fn energy_of(params: &[f64], ansatz: &Ansatz, h: &FermionHamiltonian, reference: &StateVector) -> Result<f64> {
    h.expectation(&ansatz.apply(params, reference)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientTolerance,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_BRACKET: usize = 30;
const MAX_ZOOM: usize = 40;

struct Trial {
    alpha: f64,
    f: f64,
    g: Vec<f64>,
    slope: f64,
}

/// Strong-Wolfe line search along `p` (bracketing then zoom).
fn line_search(
    fg: &mut dyn FnMut(&[f64], &mut [f64]) -> f64,
    evals: &mut usize,
    x: &[f64],
    f0: f64,
    slope0: f64,
    p: &[f64],
    alpha_init: f64,
) -> Option<Trial> {
    let n = x.len();
    let mut xt = vec![0.0; n];
    let mut eval = |alpha: f64| {
        for i in 0..n {
            xt[i] = x[i] + alpha * p[i];
        }
        let mut g = vec![0.0; n];
        let f = fg(&xt, &mut g);
        *evals += 1;
        let slope = g.iter().zip(p).map(|(a, b)| a * b).sum();
        Trial { alpha, f, g, slope }
    };
    let zoom = |eval: &mut dyn FnMut(f64) -> Trial, mut lo: Trial, mut hi: Trial| -> Option<Trial> {
        for _ in 0..MAX_ZOOM {
            let alpha = interpolate(&lo, &hi);
            if (hi.alpha - lo.alpha).abs() < 1e-16 * lo.alpha.abs().max(1.0) {
                return None;
            }
            let t = eval(alpha);
            if t.f > f0 + C1 * alpha * slope0 || t.f >= lo.f {
                hi = t;
            } else {
                if t.slope.abs() <= -C2 * slope0 {
                    return Some(t);
                }
                if t.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = t;
            }
        }
        None
    };
    let mut prev = Trial { alpha: 0.0, f: f0, g: Vec::new(), slope: slope0 };
    let mut alpha = alpha_init;
    for i in 0..MAX_BRACKET {
        let t = eval(alpha);
        if !t.f.is_finite() {
            return None;
        }
        if t.f > f0 + C1 * alpha * slope0 || (i > 0 && t.f >= prev.f) {
            return zoom(&mut eval, prev, t);
        }
        if t.slope.abs() <= -C2 * slope0 {
            return Some(t);
        }
        if t.slope >= 0.0 {
            return zoom(&mut eval, t, prev);
        }
        alpha *= 2.0;
        prev = t;
    }
    None
}

/// Minimizer of the cubic through both endpoints, safeguarded into the
/// interior of the bracket; bisection otherwise.
fn interpolate(lo: &Trial, hi: &Trial) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    let mid = 0.5 * (a + b);
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let denom = hi.slope - lo.slope + 2.0 * d2;
    if denom == 0.0 {
        return mid;
    }
    let c = b - (b - a) * (hi.slope + d2 - d1) / denom;
    let (left, right) = (a.min(b), a.max(b));
    let margin = 0.1 * (right - left);
    if c.is_finite() && c > left + margin && c < right - margin {
        c
    } else {
        mid
    }
}

/// BFGS from `x0` with unit initial inverse Hessian. `on_step(iteration, x, f)`
/// runs once for the start point (iteration 0) and after every accepted step.
pub fn bfgs_minimize(
    fg: &mut dyn FnMut(&[f64], &mut [f64]) -> f64,
    x0: &[f64],
    max_iterations: usize,
    grad_tolerance: f64,
    on_step: &mut dyn FnMut(usize, &[f64], f64),
) -> BfgsResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = fg(&x, &mut g);
    let mut evals = 1;
    let mut hinv = DMatrix::<f64>::identity(n, n);
    let inf_norm = |g: &[f64]| g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut f_prev = f + g.iter().map(|v| v * v).sum::<f64>().sqrt() / 2.0;
    on_step(0, &x, f);
    let mut iterations = 0;
    let stop = loop {
        if inf_norm(&g) < grad_tolerance {
            break StopReason::GradientTolerance;
        }
        if iterations >= max_iterations {
            break StopReason::MaxIterations;
        }
        let gv = DVector::from_column_slice(&g);
        let p: Vec<f64> = (-(&hinv * &gv)).iter().copied().collect();
        let slope0: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope0.is_nan() || slope0 >= 0.0 {
            break StopReason::LineSearchFailed;
        }
        let alpha0 = if f_prev > f { (1.01 * 2.0 * (f - f_prev) / slope0).min(1.0) } else { 1.0 };
        let Some(t) = line_search(fg, &mut evals, &x, f, slope0, &p, alpha0) else {
            break StopReason::LineSearchFailed;
        };
        let s = DVector::from_iterator(n, p.iter().map(|v| v * t.alpha));
        let y = DVector::from_iterator(n, t.g.iter().zip(&g).map(|(a, b)| a - b));
        let ys = y.dot(&s);
        for i in 0..n {
            x[i] += s[i];
        }
        f_prev = f;
        f = t.f;
        g = t.g;
        iterations += 1;
        on_step(iterations, &x, f);
        if ys > 0.0 {
            let rho = 1.0 / ys;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
            hinv -= (&s * hy.transpose() + &hy * s.transpose()) * rho;
            hinv += (&s * s.transpose()) * (rho * rho * yhy + rho);
        }
    };
    BfgsResult { x, f, iterations, evaluations: evals, stop }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub restart: usize,
    /// One record for the start point and one per accepted step.
    pub records: Vec<IterationRecord>,
    pub final_params: Vec<f64>,
    /// First iteration whose fidelity reached the threshold.
    pub iterations_to_threshold: Option<usize>,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
    /// Largest out-of-sector weight seen along the run.
    pub max_leakage: f64,
}

impl RunTrace {
    pub fn final_energy(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.energy)
    }

    pub fn final_fidelity(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.fidelity)
    }
}

/// Uniform start point of restart `restart`; each restart owns the ChaCha
/// stream numbered by its index, so restarts are independent of scheduling.
pub fn initial_params(config: &VqeConfig, num_params: usize, restart: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart as u64);
    (0..num_params).map(|_| rng.random_range(-config.init_scale..=config.init_scale)).collect()
}

/// BFGS from `x0` with fidelity recorded once per iteration.
pub fn run_from(problem: &VqeProblem, config: &VqeConfig, x0: &[f64], restart: usize) -> Result<RunTrace> {
    problem.ansatz.check_params(x0)?;
    let mut ws = problem.workspace();
    let mut records = Vec::new();
    let mut max_leakage = 0.0f64;
    let mut reached = None;
    let mut fg = |x: &[f64], g: &mut [f64]| {
        problem
            .energy_and_gradient(x, config.gradient_mode, config.fd_step, g, &mut ws)
            .expect("parameter length checked")
    };
    let mut observe_ws = problem.workspace();
    let mut on_step = |it: usize, x: &[f64], f: f64| {
        problem.prepare(x, &mut observe_ws);
        let (fid, leak) = problem.observe(&observe_ws);
        max_leakage = max_leakage.max(leak);
        if reached.is_none() && fid >= config.fidelity_threshold {
            reached = Some(it);
        }
        records.push(IterationRecord { iteration: it, energy: f, fidelity: fid });
    };
    let res = bfgs_minimize(&mut fg, x0, config.max_iterations, config.grad_tolerance, &mut on_step);
    Ok(RunTrace {
        restart,
        records,
        final_params: res.x,
        iterations_to_threshold: reached,
        iterations: res.iterations,
        evaluations: res.evaluations,
        stop: res.stop,
        max_leakage,
    })
}

pub fn run_restart(problem: &VqeProblem, config: &VqeConfig, restart: usize) -> Result<RunTrace> {
    let x0 = initial_params(config, problem.num_params(), restart);
    run_from(problem, config, &x0, restart)
}

/// Mean, standard deviation and 10th/90th percentiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub p10: f64,
    pub p90: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Stats {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var =
            if values.len() > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Stats { mean, std: var.sqrt(), p10: percentile(&sorted, 0.1), p90: percentile(&sorted, 0.9) }
    }
}

/// Linear interpolation between closest ranks of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Restarts that never reach the threshold count as `max_iterations`.
pub const CAPPING_RULE: &str = "restarts never reaching the fidelity threshold contribute max_iterations to l_I";

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub restarts: usize,
    pub ground_energy: f64,
    pub final_energy: Stats,
    pub final_fidelity: Stats,
    /// Iterations to the fidelity threshold, capped at `max_iterations`.
    pub l_i: Stats,
    pub reach_fraction: f64,
    pub l_p: usize,
    /// `l_p × mean l_I`
    pub r_c: f64,
    pub mean_evaluations: f64,
    pub line_search_failures: usize,
    pub max_leakage: f64,
}

pub fn summarize(traces: &[RunTrace], config: &VqeConfig, l_p: usize, ground_energy: f64) -> Result<RunSummary> {
    if traces.is_empty() {
        return Err(Error::InvalidArgument("no restarts to summarize".into()));
    }
    let col = |f: &dyn Fn(&RunTrace) -> f64| traces.iter().map(f).collect::<Vec<f64>>();
    let l_i = Stats::of(&col(&|t| t.iterations_to_threshold.unwrap_or(config.max_iterations) as f64));
    let reached = traces.iter().filter(|t| t.iterations_to_threshold.is_some()).count();
    Ok(RunSummary {
        restarts: traces.len(),
        ground_energy,
        final_energy: Stats::of(&col(&|t| t.final_energy())),
        final_fidelity: Stats::of(&col(&|t| t.final_fidelity())),
        l_i,
        reach_fraction: reached as f64 / traces.len() as f64,
        l_p,
        r_c: l_p as f64 * l_i.mean,
        mean_evaluations: col(&|t| t.evaluations as f64).iter().sum::<f64>() / traces.len() as f64,
        line_search_failures: traces.iter().filter(|t| t.stop == StopReason::LineSearchFailed).count(),
        max_leakage: traces.iter().map(|t| t.max_leakage).fold(0.0, f64::max),
    })
}

/// Serial multi-restart run.
pub fn run_vqe(problem: &VqeProblem, config: &VqeConfig) -> Result<(RunSummary, Vec<RunTrace>)> {
    config.validate()?;
    let traces = (0..config.restarts).map(|r| run_restart(problem, config, r)).collect::<Result<Vec<_>>>()?;
    let summary = summarize(&traces, config, problem.num_params(), problem.ground_energy())?;
    Ok((summary, traces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::Paradigm;
    use crate::exactsolver::global_ground;
    use crate::fock::{reference_state, ReferencePattern};
    use crate::hamiltonian::{build_spinful_hubbard, build_spinless_hubbard, HubbardCouplings};
    use crate::lattice::{Geometry, Ordering, RegisterMap};
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn spinless_problem(n: usize, v: f64, paradigm: Paradigm, layers: usize) -> (FermionHamiltonian, VqeProblem) {
        let g = Geometry::chain(n).unwrap();
        let regs = RegisterMap::new(&g, false, Ordering::RowMajor);
        let h = build_spinless_hubbard(&g, &regs, 1.0, v, 0.0).unwrap();
        let ground = global_ground(&h).unwrap();
        let a = Ansatz::build(&g, paradigm, &regs, layers).unwrap();
        let r = reference_state(n, ground.n_f, ReferencePattern::Spread).unwrap();
        let p = VqeProblem::new(&h, a, r, &ground).unwrap();
        (h, p)
    }

    #[test]
    fn zero_parameters_give_the_reference_energy() {
        let (h, p) = spinless_problem(12, 0.0, Paradigm::Fermionic, 4);
        let mut ws = p.workspace();
        let zero = vec![0.0; p.num_params()];
        assert_eq!(p.energy(&zero, &mut ws).unwrap(), 0.0);
        let r = reference_state(12, 6, ReferencePattern::Spread).unwrap();
        assert_eq!(energy_of(&zero, p.ansatz(), &h, &r).unwrap(), 0.0);
        assert!(p.energy(&[0.0], &mut ws).is_err());
    }

    #[test]
    fn energy_is_periodic_in_interaction_angles() {
        let (_, p) = spinless_problem(6, 2.0, Paradigm::Fermionic, 1);
        let mut ws = p.workspace();
        let x = initial_params(&VqeConfig { init_scale: 1.0, ..Default::default() }, p.num_params(), 3);
        let e = p.energy(&x, &mut ws).unwrap();
        let interaction_slot = p.num_params() - 1;
        let mut y = x.clone();
        y[interaction_slot] += 2.0 * PI;
        assert!((p.energy(&y, &mut ws).unwrap() - e).abs() < 1e-12);
    }

    #[test]
    fn stationary_two_mode_toy() {
        let g = Geometry::chain(2).unwrap();
        let regs = RegisterMap::new(&g, false, Ordering::RowMajor);
        let h = build_spinless_hubbard(&g, &regs, 1.0, 0.0, 0.0).unwrap();
        let ground = global_ground(&h).unwrap();
        let a = Ansatz::build(&g, Paradigm::Fermionic, &regs, 1).unwrap();
        // both modes filled: every tunneling angle is a symmetry
        let p = VqeProblem::new(&h, a, StateVector::basis(2, 0b11).unwrap(), &ground).unwrap();
        let mut ws = p.workspace();
        let mut grad = vec![1.0; p.num_params()];
        for mode in [GradientMode::Adjoint, GradientMode::FiniteDifference] {
            p.energy_and_gradient(&[0.0; 4], mode, 1e-5, &mut grad, &mut ws).unwrap();
            assert!(grad.iter().all(|g| g.abs() < 1e-6));
        }
    }

    #[test]
    fn adjoint_matches_finite_differences() {
        let cases = [
            (Paradigm::Fermionic, false),
            (Paradigm::Qubit, false),
            (Paradigm::Fermionic, true),
            (Paradigm::Qubit, true),
        ];
        for (paradigm, spinful) in cases {
            let g = Geometry::chain(if spinful { 3 } else { 4 }).unwrap();
            let regs = RegisterMap::new(&g, spinful, Ordering::RowMajor);
            let h = if spinful {
                build_spinful_hubbard(&g, &regs, HubbardCouplings { u: 2.5, v: 0.5, ..Default::default() }).unwrap()
            } else {
                build_spinless_hubbard(&g, &regs, 1.0, 2.0, 0.0).unwrap()
            };
            let ground = global_ground(&h).unwrap();
            let a = Ansatz::build(&g, paradigm, &regs, 2).unwrap();
            let reference =
                StateVector::basis(regs.num_modes(), if spinful { regs.neel_mask(3).unwrap() } else { 0b0101 })
                    .unwrap();
            let p = VqeProblem::new(&h, a, reference, &ground).unwrap();
            let mut ws = p.workspace();
            let cfg = VqeConfig { init_scale: 2.0, ..Default::default() };
            for k in 0..10 {
                let x = initial_params(&cfg, p.num_params(), k);
                let mut ga = vec![0.0; x.len()];
                let mut gf = vec![0.0; x.len()];
                let ea = p.energy_and_gradient(&x, GradientMode::Adjoint, 1e-5, &mut ga, &mut ws).unwrap();
                let ef = p.energy_and_gradient(&x, GradientMode::FiniteDifference, 1e-5, &mut gf, &mut ws).unwrap();
                assert!((ea - ef).abs() < 1e-12);
                let dev = ga.iter().zip(&gf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(dev < 1e-6, "{paradigm:?} spinful={spinful} deviation {dev}");
            }
        }
    }

    #[test]
    fn bfgs_on_a_quadratic() {
        let target = [1.0, -2.0, 0.5, 3.0];
        let scales = [1.0; 4];
        let mut fg = |x: &[f64], g: &mut [f64]| {
            let mut f = 0.0;
            for i in 0..4 {
                let d = x[i] - target[i];
                f += scales[i] * d * d;
                g[i] = 2.0 * scales[i] * d;
            }
            f
        };
        let r = bfgs_minimize(&mut fg, &[0.0; 4], 100, 1e-10, &mut |_, _, _| {});
        assert_eq!(r.stop, StopReason::GradientTolerance);
        assert!(r.iterations <= 6, "{} iterations", r.iterations);
        for (x, t) in r.x.iter().zip(&target) {
            assert!((x - t).abs() < 1e-9);
        }
        let scales = [1.0, 4.0, 0.5, 2.0];
        let mut aniso = |x: &[f64], g: &mut [f64]| {
            let mut f = 0.0;
            for i in 0..4 {
                let d = x[i] - target[i];
                f += scales[i] * d * d;
                g[i] = 2.0 * scales[i] * d;
            }
            f
        };
        let r = bfgs_minimize(&mut aniso, &[0.0; 4], 100, 1e-10, &mut |_, _, _| {});
        assert_eq!(r.stop, StopReason::GradientTolerance);
        assert!(r.x.iter().zip(&target).all(|(a, b)| (a - b).abs() < 1e-9));
        let at_opt = bfgs_minimize(&mut fg, &target, 100, 1e-10, &mut |_, _, _| {});
        assert_eq!(at_opt.iterations, 0);
    }

    #[test]
    fn bfgs_on_rosenbrock() {
        let mut fg = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let mut energies = Vec::new();
        let r = bfgs_minimize(&mut fg, &[-1.2, 1.0], 200, 1e-8, &mut |_, _, f| energies.push(f));
        assert_eq!(r.stop, StopReason::GradientTolerance);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
        assert!(energies.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn vqe_on_a_small_chain_is_variational_and_deterministic() {
        let (_, p) = spinless_problem(6, 2.0, Paradigm::Fermionic, 2);
        let cfg = VqeConfig { restarts: 3, gradient_mode: GradientMode::Adjoint, seed: 11, ..Default::default() };
        let (summary, traces) = run_vqe(&p, &cfg).unwrap();
        for t in &traces {
            assert!(t.records.windows(2).all(|w| w[1].energy <= w[0].energy));
            assert!(t.records.iter().all(|r| r.energy >= p.ground_energy() - 1e-9));
            assert!(t.max_leakage < 1e-12);
        }
        assert!(summary.final_fidelity.mean > 0.95, "{:?}", summary);
        let again = run_restart(&p, &cfg, 1).unwrap();
        assert_eq!(again.final_params, traces[1].final_params);
        assert_eq!(summary.r_c, summary.l_p as f64 * summary.l_i.mean);
    }

    #[test]
    fn capping_and_statistics() {
        let trace = |reached: Option<usize>, f: f64| RunTrace {
            restart: 0,
            records: vec![IterationRecord { iteration: 0, energy: -1.0, fidelity: f }],
            final_params: Vec::new(),
            iterations_to_threshold: reached,
            iterations: 0,
            evaluations: 1,
            stop: StopReason::MaxIterations,
            max_leakage: 0.0,
        };
        let cfg = VqeConfig::default();
        let s = summarize(&[trace(Some(10), 0.99), trace(None, 0.5), trace(Some(20), 0.97)], &cfg, 4, -1.0).unwrap();
        assert!((s.l_i.mean - 60.0).abs() < 1e-12);
        assert!((s.reach_fraction - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.r_c - 240.0).abs() < 1e-12);
        assert!((s.l_i.p10 - 12.0).abs() < 1e-12);
        assert!(summarize(&[], &cfg, 4, 0.0).is_err());
        assert!(VqeConfig { restarts: 0, ..cfg }.validate().is_err());
        assert!(VqeConfig { init_scale: 0.0, ..cfg }.validate().is_err());
        assert!(VqeConfig { fidelity_threshold: 1.5, ..cfg }.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn energies_respect_the_variational_bound(seed in 0u64..1000, qubit in any::<bool>()) {
            let paradigm = if qubit { Paradigm::Qubit } else { Paradigm::Fermionic };
            let (_, p) = spinless_problem(6, 1.0, paradigm, 1);
            let x = initial_params(&VqeConfig { init_scale: PI, seed, ..Default::default() }, p.num_params(), 0);
            let mut ws = p.workspace();
            prop_assert!(p.energy(&x, &mut ws).unwrap() >= p.ground_energy() - 1e-9);
            let f = p.fidelity(&x, &mut ws).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        }
    }
}
