//! Parameterized number-conserving gates for the fermionic and qubit
//! paradigms, layered ansatz construction and resource counting.
//!
//! Every two-mode gate here acts block-diagonally on the occupations of its
//! modes `(a, b)`: a phase on `(0,0)`, a phase on `(1,1)` and a 2×2 unitary
//! mixing `(1,0)` (a occupied) with `(0,1)` (b occupied). Fermionic tunneling
//! multiplies the off-diagonal entries by the Jordan–Wigner sign of the modes
//! strictly between `a` and `b`; qubit gates carry no such sign.

use alloc::vec::Vec;

#[allow(unused_imports)] // float math without std
use num_traits::Float;

use crate::fock::{between_mask, StateVector};
use crate::lattice::{edge_color, Bond, Geometry, RegisterMap, Spin};
use crate::{Error, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Paradigm {
    Fermionic,
    Qubit,
}

/// One gate with the index of its first parameter slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    /// Slots `θ₁, θ₂, θ₃` at `slot, slot+1, slot+2`.
    Tunneling {
        a: usize,
        b: usize,
        slot: usize,
    },
    Interaction {
        a: usize,
        b: usize,
        slot: usize,
    },
    /// Slots `θ∥, θ⊥` at `slot, slot+1`.
    XyZz {
        a: usize,
        b: usize,
        slot: usize,
    },
    PhaseRotation {
        mode: usize,
        slot: usize,
    },
}

impl Gate {
    pub fn num_params(&self) -> usize {
        match self {
            Gate::Tunneling { .. } => 3,
            Gate::Interaction { .. } | Gate::PhaseRotation { .. } => 1,
            Gate::XyZz { .. } => 2,
        }
    }

    pub fn slot(&self) -> usize {
        match *self {
            Gate::Tunneling { slot, .. }
            | Gate::Interaction { slot, .. }
            | Gate::XyZz { slot, .. }
            | Gate::PhaseRotation { slot, .. } => slot,
        }
    }

    /// Contribution to `R_Q`: one per two-mode fermionic gate, three
    /// entangling gates per XY+ZZ gate, nothing for single-register rotations.
    pub fn entangling_cost(&self) -> usize {
        match self {
            Gate::Tunneling { .. } | Gate::Interaction { .. } => 1,
            Gate::XyZz { .. } => 3,
            Gate::PhaseRotation { .. } => 0,
        }
    }

    pub fn modes(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::Tunneling { a, b, .. } | Gate::Interaction { a, b, .. } | Gate::XyZz { a, b, .. } => (a, Some(b)),
            Gate::PhaseRotation { mode, .. } => (mode, None),
        }
    }

    pub(crate) fn block(&self, params: &[f64]) -> Block {
        let p = &params[self.slot()..self.slot() + self.num_params()];
        match *self {
            Gate::Tunneling { a, b, .. } => tunneling_block(a, b, p[0], p[1], p[2]),
            Gate::Interaction { a, b, .. } => interaction_block(a, b, p[0]),
            Gate::XyZz { a, b, .. } => xy_zz_block(a, b, p[0], p[1]),
            Gate::PhaseRotation { mode, .. } => phase_block(mode, p[0]),
        }
    }

    /// `∂U/∂θ` for each of the gate's slots, in slot order.
    pub(crate) fn derivative_blocks(&self, params: &[f64], out: &mut Vec<Block>) {
        out.clear();
        let p = &params[self.slot()..self.slot() + self.num_params()];
        match *self {
            Gate::Tunneling { a, b, .. } => tunneling_derivatives(a, b, p[0], p[1], p[2], out),
            Gate::Interaction { a, b, .. } => {
                let ph = C64::from_polar(1.0, -p[0]);
                out.push(Block::Pair(PairBlock { a, b, d00: ZERO, d11: -I * ph, m: [[ZERO; 2]; 2], signed: false }));
            }
            Gate::XyZz { a, b, .. } => {
                let (par, perp) = (p[0], p[1]);
                let e_plus = C64::from_polar(1.0, perp);
                let e_minus = C64::from_polar(1.0, -perp);
                let (s2, c2) = (2.0 * par).sin_cos();
                let dm = [[e_minus * -2.0 * s2, e_minus * I * 2.0 * c2], [e_minus * I * 2.0 * c2, e_minus * -2.0 * s2]];
                out.push(Block::Pair(PairBlock { a, b, d00: ZERO, d11: ZERO, m: dm, signed: false }));
                let m = [[e_minus * c2, e_minus * I * s2], [e_minus * I * s2, e_minus * c2]];
                let mi = [[-I * m[0][0], -I * m[0][1]], [-I * m[1][0], -I * m[1][1]]];
                out.push(Block::Pair(PairBlock { a, b, d00: I * e_plus, d11: I * e_plus, m: mi, signed: false }));
            }
            Gate::PhaseRotation { mode, .. } => {
                let half = p[0] / 2.0;
                out.push(Block::Single {
                    a: mode,
                    d0: -I * 0.5 * C64::from_polar(1.0, -half),
                    d1: I * 0.5 * C64::from_polar(1.0, half),
                });
            }
        }
    }
}

/// Block-structured linear map on the occupations of one or two modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Block {
    Pair(PairBlock),
    Single { a: usize, d0: C64, d1: C64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PairBlock {
    a: usize,
    b: usize,
    d00: C64,
    d11: C64,
    /// Rows/columns: 0 = (a occupied, b empty), 1 = (b occupied, a empty).
    m: [[C64; 2]; 2],
    signed: bool,
}

/// Calls `f` with every basis index whose bits `lo` and `hi` are clear.
#[inline]
fn for_each_base(modes: usize, lo: usize, hi: usize, mut f: impl FnMut(usize)) {
    debug_assert!(lo < hi);
    let lo_mask = (1usize << lo) - 1;
    let hi_mask = (1usize << hi) - 1;
    for k in 0..(1usize << (modes - 2)) {
        let t = ((k & !lo_mask) << 1) | (k & lo_mask);
        f(((t & !hi_mask) << 1) | (t & hi_mask));
    }
}

impl Block {
    pub(crate) fn adjoint(&self) -> Block {
        match *self {
            Block::Pair(p) => Block::Pair(PairBlock {
                d00: p.d00.conj(),
                d11: p.d11.conj(),
                m: [[p.m[0][0].conj(), p.m[1][0].conj()], [p.m[0][1].conj(), p.m[1][1].conj()]],
                ..p
            }),
            Block::Single { a, d0, d1 } => Block::Single { a, d0: d0.conj(), d1: d1.conj() },
        }
    }

    pub(crate) fn apply(&self, modes: usize, amps: &mut [C64]) {
        match *self {
            Block::Pair(p) => {
                let (ma, mb) = (1usize << p.a, 1usize << p.b);
                let between = if p.signed { between_mask(p.a, p.b) as usize } else { 0 };
                let phase00 = p.d00 != ONE;
                let phase11 = p.d11 != ONE;
                for_each_base(modes, p.a.min(p.b), p.a.max(p.b), |x| {
                    if phase00 {
                        amps[x] *= p.d00;
                    }
                    if phase11 {
                        amps[x | ma | mb] *= p.d11;
                    }
                    let s = if (x & between).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
                    let (u, v) = (amps[x | ma], amps[x | mb]);
                    amps[x | ma] = p.m[0][0] * u + p.m[0][1] * v * s;
                    amps[x | mb] = p.m[1][0] * u * s + p.m[1][1] * v;
                });
            }
            Block::Single { a, d0, d1 } => {
                let ma = 1usize << a;
                for (x, amp) in amps.iter_mut().enumerate() {
                    *amp *= if x & ma != 0 { d1 } else { d0 };
                }
            }
        }
    }

    /// `⟨λ| B |φ⟩` without materializing `B|φ⟩`.
    pub(crate) fn overlap(&self, modes: usize, lambda: &[C64], phi: &[C64]) -> C64 {
        match *self {
            Block::Pair(p) => {
                let (ma, mb) = (1usize << p.a, 1usize << p.b);
                let between = if p.signed { between_mask(p.a, p.b) as usize } else { 0 };
                let mut acc = ZERO;
                for_each_base(modes, p.a.min(p.b), p.a.max(p.b), |x| {
                    let x11 = x | ma | mb;
                    let s = if (x & between).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
                    let (u, v) = (phi[x | ma], phi[x | mb]);
                    acc += lambda[x].conj() * p.d00 * phi[x]
                        + lambda[x11].conj() * p.d11 * phi[x11]
                        + lambda[x | ma].conj() * (p.m[0][0] * u + p.m[0][1] * v * s)
                        + lambda[x | mb].conj() * (p.m[1][0] * u * s + p.m[1][1] * v);
                });
                acc
            }
            Block::Single { a, d0, d1 } => {
                let ma = 1usize << a;
                lambda
                    .iter()
                    .zip(phi)
                    .enumerate()
                    .fold(ZERO, |acc, (x, (l, f))| acc + l.conj() * f * if x & ma != 0 { d1 } else { d0 })
            }
        }
    }
}

/// `sin ω / ω`
fn sinc(w: f64) -> f64 {
    if w < 1e-8 {
        1.0 - w * w / 6.0
    } else {
        w.sin() / w
    }
}

/// `(ω cos ω − sin ω) / ω³`, the derivative of `sinc` divided by `ω`.
fn sinc_prime_over_w(w: f64) -> f64 {
    if w < 0.05 {
        let w2 = w * w;
        -1.0 / 3.0 + w2 / 30.0 - w2 * w2 / 840.0 + w2 * w2 * w2 / 45360.0
    } else {
        (w * w.cos() - w.sin()) / (w * w * w)
    }
}

/// Hermitian generator of the tunneling gate on the odd block (unsigned).
fn tunneling_generator(t1: f64, t2: f64, t3: f64) -> [[C64; 2]; 2] {
    let off = C64::from_polar(t1 / 2.0, -t2);
    [[C64::new(t3 / 2.0, 0.0), off], [off.conj(), C64::new(-t3 / 2.0, 0.0)]]
}

/// `exp(-i[(θ₁/2)(e^{-iθ₂} c†_a c_b + e^{iθ₂} c†_b c_a) + (θ₃/2)(n_a − n_b)])`
fn tunneling_block(a: usize, b: usize, t1: f64, t2: f64, t3: f64) -> Block {
    let w = 0.5 * (t1 * t1 + t3 * t3).sqrt();
    let (c, f) = (w.cos(), sinc(w));
    let g = tunneling_generator(t1, t2, t3);
    let m = [[ONE * c - I * f * g[0][0], -I * f * g[0][1]], [-I * f * g[1][0], ONE * c - I * f * g[1][1]]];
    Block::Pair(PairBlock { a, b, d00: ONE, d11: ONE, m, signed: true })
}

fn tunneling_derivatives(a: usize, b: usize, t1: f64, t2: f64, t3: f64, out: &mut Vec<Block>) {
    // U = cos ω · I − i sinc(ω) · G with ω = ½√(θ₁² + θ₃²)
    let w = 0.5 * (t1 * t1 + t3 * t3).sqrt();
    let f = sinc(w);
    let h = sinc_prime_over_w(w);
    let g = tunneling_generator(t1, t2, t3);
    let pair = |m: [[C64; 2]; 2]| Block::Pair(PairBlock { a, b, d00: ZERO, d11: ZERO, m, signed: true });
    let combine = |dc: f64, df: f64, dg: [[C64; 2]; 2]| {
        let mut m = [[ZERO; 2]; 2];
        for r in 0..2 {
            for k in 0..2 {
                let id = if r == k { dc } else { 0.0 };
                m[r][k] = ONE * id - I * (g[r][k] * df + dg[r][k] * f);
            }
        }
        m
    };
    let e = C64::from_polar(0.5, -t2);
    let dg1 = [[ZERO, e], [e.conj(), ZERO]];
    out.push(pair(combine(-f * t1 / 4.0, h * t1 / 4.0, dg1)));
    let dg2 = [[ZERO, -I * e * t1], [I * e.conj() * t1, ZERO]];
    out.push(pair(combine(0.0, 0.0, dg2)));
    let dg3 = [[C64::new(0.5, 0.0), ZERO], [ZERO, C64::new(-0.5, 0.0)]];
    out.push(pair(combine(-f * t3 / 4.0, h * t3 / 4.0, dg3)));
}

/// `exp(-iθ n_a n_b)`
fn interaction_block(a: usize, b: usize, theta: f64) -> Block {
    Block::Pair(PairBlock {
        a,
        b,
        d00: ONE,
        d11: C64::from_polar(1.0, -theta),
        m: [[ONE, ZERO], [ZERO, ONE]],
        signed: false,
    })
}

/// `exp(+i[θ∥(X_aX_b + Y_aY_b) + θ⊥ Z_aZ_b])`
fn xy_zz_block(a: usize, b: usize, par: f64, perp: f64) -> Block {
    let e_plus = C64::from_polar(1.0, perp);
    let e_minus = C64::from_polar(1.0, -perp);
    let (s2, c2) = (2.0 * par).sin_cos();
    let m = [[e_minus * c2, e_minus * I * s2], [e_minus * I * s2, e_minus * c2]];
    Block::Pair(PairBlock { a, b, d00: e_plus, d11: e_plus, m, signed: false })
}

/// `exp(-i(θ/2)σ^z)`; an empty register is the `σ^z = +1` eigenstate.
fn phase_block(a: usize, theta: f64) -> Block {
    Block::Single { a, d0: C64::from_polar(1.0, -theta / 2.0), d1: C64::from_polar(1.0, theta / 2.0) }
}

fn check_pair(state: &StateVector, a: usize, b: usize) -> Result<()> {
    let modes = state.modes();
    for m in [a, b] {
        if m >= modes {
            return Err(Error::ModeOutOfRange { mode: m, modes });
        }
    }
    if a == b {
        return Err(Error::InvalidArgument(alloc::format!("two-mode gate on identical modes {a}")));
    }
    Ok(())
}

pub fn apply_tunneling(state: &mut StateVector, a: usize, b: usize, t1: f64, t2: f64, t3: f64) -> Result<()> {
    check_pair(state, a, b)?;
    let modes = state.modes();
    tunneling_block(a, b, t1, t2, t3).apply(modes, state.amplitudes_mut());
    Ok(())
}

pub fn apply_interaction(state: &mut StateVector, a: usize, b: usize, theta: f64) -> Result<()> {
    check_pair(state, a, b)?;
    let modes = state.modes();
    interaction_block(a, b, theta).apply(modes, state.amplitudes_mut());
    Ok(())
}

pub fn apply_xy_zz(state: &mut StateVector, a: usize, b: usize, par: f64, perp: f64) -> Result<()> {
    check_pair(state, a, b)?;
    let modes = state.modes();
    xy_zz_block(a, b, par, perp).apply(modes, state.amplitudes_mut());
    Ok(())
}

pub fn apply_phase_rotation(state: &mut StateVector, a: usize, theta: f64) -> Result<()> {
    if a >= state.modes() {
        return Err(Error::ModeOutOfRange { mode: a, modes: state.modes() });
    }
    let modes = state.modes();
    phase_block(a, theta).apply(modes, state.amplitudes_mut());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlacedGate {
    pub gate: Gate,
    pub layer: usize,
    /// Parallel step within the layer.
    pub step: usize,
}

/// Layered parameterized circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    paradigm: Paradigm,
    modes: usize,
    layers: usize,
    depth_per_layer: usize,
    gates: Vec<PlacedGate>,
    num_params: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resources {
    pub r_q: usize,
    pub l_p: usize,
    pub layers: usize,
    pub depth_per_layer: usize,
    pub depth_total: usize,
}

struct LayerBuilder<'a> {
    gates: &'a mut Vec<PlacedGate>,
    slot: &'a mut usize,
    layer: usize,
    step: usize,
}

impl LayerBuilder<'_> {
    fn push(&mut self, make: impl FnOnce(usize) -> Gate) {
        let gate = make(*self.slot);
        *self.slot += gate.num_params();
        self.gates.push(PlacedGate { gate, layer: self.layer, step: self.step });
    }

    fn next_step(&mut self) {
        self.step += 1;
    }
}

impl Ansatz {
    /// Builds `layers` repetitions of the paradigm's layer over the bond
    /// schedule of `geometry`:
    ///
    /// * spinless fermionic: tunneling on every bond, then interaction on
    ///   every bond (`2χ'` steps);
    /// * spinless qubit: XY+ZZ on every bond, then one step of phase
    ///   rotations on all registers (`χ'+1`);
    /// * spinful fermionic: same-spin tunneling (both spins share a step),
    ///   then interactions on the `(↑↑),(↓↓)` pairs, then on the `(↑↓),(↓↑)`
    ///   pairs of every bond (`3χ'`);
    /// * spinful qubit: XY+ZZ on those four register pairs per bond, then
    ///   phase rotations (`2χ'+1`).
    pub fn build(geometry: &Geometry, paradigm: Paradigm, registers: &RegisterMap, layers: usize) -> Result<Self> {
        if layers == 0 {
            return Err(Error::InvalidArgument("an ansatz needs at least one layer".into()));
        }
        if registers.num_sites() != geometry.num_sites() {
            return Err(Error::InvalidArgument("register map does not match the geometry".into()));
        }
        let schedule = edge_color(geometry);
        let modes = registers.num_modes();
        let mut gates = Vec::new();
        let mut slot = 0;
        let mut depth_per_layer = 0;
        let mode = |s, spin| registers.mode(s, spin);
        let same_spin =
            |b: &Bond| [(mode(b.a, Spin::Up), mode(b.b, Spin::Up)), (mode(b.a, Spin::Down), mode(b.b, Spin::Down))];
        let cross_spin =
            |b: &Bond| [(mode(b.a, Spin::Up), mode(b.b, Spin::Down)), (mode(b.a, Spin::Down), mode(b.b, Spin::Up))];
        for layer in 0..layers {
            let mut lb = LayerBuilder { gates: &mut gates, slot: &mut slot, layer, step: 0 };
            match (paradigm, registers.spinful()) {
                (Paradigm::Fermionic, false) => {
                    for make in [
                        (|a, b, slot| Gate::Tunneling { a, b, slot }) as fn(usize, usize, usize) -> Gate,
                        |a, b, slot| Gate::Interaction { a, b, slot },
                    ] {
                        for step in schedule.steps() {
                            for bond in step {
                                let (a, b) = (mode(bond.a, Spin::Up), mode(bond.b, Spin::Up));
                                lb.push(|s| make(a, b, s));
                            }
                            lb.next_step();
                        }
                    }
                }
                (Paradigm::Qubit, false) => {
                    for step in schedule.steps() {
                        for bond in step {
                            let (a, b) = (mode(bond.a, Spin::Up), mode(bond.b, Spin::Up));
                            lb.push(|slot| Gate::XyZz { a, b, slot });
                        }
                        lb.next_step();
                    }
                    for m in 0..modes {
                        lb.push(|slot| Gate::PhaseRotation { mode: m, slot });
                    }
                    lb.next_step();
                }
                (Paradigm::Fermionic, true) => {
                    for step in schedule.steps() {
                        for bond in step {
                            for (a, b) in same_spin(bond) {
                                lb.push(|slot| Gate::Tunneling { a, b, slot });
                            }
                        }
                        lb.next_step();
                    }
                    for pairs in [&same_spin as &dyn Fn(&Bond) -> [(usize, usize); 2], &cross_spin] {
                        for step in schedule.steps() {
                            for bond in step {
                                for (a, b) in pairs(bond) {
                                    lb.push(|slot| Gate::Interaction { a, b, slot });
                                }
                            }
                            lb.next_step();
                        }
                    }
                }
                (Paradigm::Qubit, true) => {
                    for pairs in [&same_spin as &dyn Fn(&Bond) -> [(usize, usize); 2], &cross_spin] {
                        for step in schedule.steps() {
                            for bond in step {
                                for (a, b) in pairs(bond) {
                                    lb.push(|slot| Gate::XyZz { a, b, slot });
                                }
                            }
                            lb.next_step();
                        }
                    }
                    for m in 0..modes {
                        lb.push(|slot| Gate::PhaseRotation { mode: m, slot });
                    }
                    lb.next_step();
                }
            }
            depth_per_layer = lb.step;
        }
        Ok(Ansatz { paradigm, modes, layers, depth_per_layer, gates, num_params: slot })
    }

    pub fn paradigm(&self) -> Paradigm {
        self.paradigm
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn gates(&self) -> &[PlacedGate] {
        &self.gates
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn depth_per_layer(&self) -> usize {
        self.depth_per_layer
    }

    pub fn resources(&self) -> Resources {
        Resources {
            r_q: self.gates.iter().map(|g| g.gate.entangling_cost()).sum(),
            l_p: self.num_params,
            layers: self.layers,
            depth_per_layer: self.depth_per_layer,
            depth_total: self.layers * self.depth_per_layer,
        }
    }

    pub(crate) fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params {
            return Err(Error::DimensionMismatch { expected: self.num_params, got: params.len() });
        }
        Ok(())
    }

    /// Applies the gates in sequence to `amps` in place.
    pub(crate) fn apply_raw(&self, params: &[f64], amps: &mut [C64]) {
        for g in &self.gates {
            g.gate.block(params).apply(self.modes, amps);
        }
    }

    /// `U(θ)|reference⟩`
    pub fn apply(&self, params: &[f64], reference: &StateVector) -> Result<StateVector> {
        self.check_params(params)?;
        if reference.modes() != self.modes {
            return Err(Error::DimensionMismatch { expected: 1 << self.modes, got: reference.dim() });
        }
        let mut out = reference.clone();
        self.apply_raw(params, out.amplitudes_mut());
        Ok(out)
    }
}

pub fn count_resources(ansatz: &Ansatz) -> Resources {
    ansatz.resources()
}
