//! Second-quantized operators: Hubbard builders, Hermiticity validation,
//! application to state vectors and the Jordan–Wigner map to Pauli sums.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::fock::{parity_below_odd, StateVector};
use crate::lattice::{Geometry, RegisterMap, Spin};
use crate::{Error, Result, C64};

const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FermionOp {
    pub mode: usize,
    pub dagger: bool,
}

impl FermionOp {
    pub fn create(mode: usize) -> Self {
        FermionOp { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        FermionOp { mode, dagger: false }
    }
}

/// `coefficient · ops[0] ops[1] …`; the rightmost operator acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionTerm {
    pub coeff: C64,
    pub ops: Vec<FermionOp>,
}

impl FermionTerm {
    pub fn new(coeff: C64, ops: Vec<FermionOp>) -> Self {
        FermionTerm { coeff, ops }
    }

    pub fn real(coeff: f64, ops: Vec<FermionOp>) -> Self {
        FermionTerm { coeff: C64::new(coeff, 0.0), ops }
    }

    pub fn hopping(coeff: f64, to: usize, from: usize) -> Self {
        Self::real(coeff, vec![FermionOp::create(to), FermionOp::annihilate(from)])
    }

    pub fn number(coeff: f64, mode: usize) -> Self {
        Self::real(coeff, vec![FermionOp::create(mode), FermionOp::annihilate(mode)])
    }

    pub fn density_density(coeff: f64, a: usize, b: usize) -> Self {
        Self::real(
            coeff,
            vec![FermionOp::create(a), FermionOp::annihilate(a), FermionOp::create(b), FermionOp::annihilate(b)],
        )
    }

    pub fn adjoint(&self) -> Self {
        FermionTerm {
            coeff: self.coeff.conj(),
            ops: self.ops.iter().rev().map(|o| FermionOp { mode: o.mode, dagger: !o.dagger }).collect(),
        }
    }

    /// Action on one basis state: `None` if annihilated, else the target
    /// mask and whether the fermionic sign is negative.
    #[inline]
    pub fn act_on(&self, mask: u64) -> Option<(u64, bool)> {
        act(&self.ops, mask)
    }
}

#[inline]
fn act(ops: &[FermionOp], mut x: u64) -> Option<(u64, bool)> {
    let mut negative = false;
    for op in ops.iter().rev() {
        let bit = 1u64 << op.mode;
        if (x & bit != 0) == op.dagger {
            return None;
        }
        negative ^= parity_below_odd(x, op.mode);
        x ^= bit;
    }
    Some((x, negative))
}

/// Normal-ordered key: creation modes descending, then annihilation modes descending.
pub type NormalKey = (Vec<usize>, Vec<usize>);

enum Disorder {
    None,
    Repeated,
    Swap(usize),
}

/// First adjacent pair violating normal order (creations before
/// annihilations, each group by descending mode).
fn first_disorder(ops: &[FermionOp]) -> Disorder {
    for (i, w) in ops.windows(2).enumerate() {
        let (p, q) = (w[0], w[1]);
        match (p.dagger, q.dagger) {
            (false, true) => return Disorder::Swap(i),
            (true, false) => {}
            _ if p.mode == q.mode => return Disorder::Repeated,
            _ if p.mode < q.mode => return Disorder::Swap(i),
            _ => {}
        }
    }
    Disorder::None
}

/// Canonical normal-ordered expansion of a sum of terms with zero
/// coefficients removed.
pub fn normal_form<'a>(terms: impl IntoIterator<Item = &'a FermionTerm>) -> BTreeMap<NormalKey, C64> {
    let mut acc: BTreeMap<NormalKey, C64> = BTreeMap::new();
    let mut work: Vec<(C64, Vec<FermionOp>)> = Vec::new();
    for t in terms {
        work.push((t.coeff, t.ops.clone()));
        while let Some((c, mut ops)) = work.pop() {
            match first_disorder(&ops) {
                Disorder::None => {}
                // a repeated creation or annihilation makes the product vanish
                Disorder::Repeated => continue,
                Disorder::Swap(i) => {
                    let (p, q) = (ops[i], ops[i + 1]);
                    if !p.dagger && q.dagger && p.mode == q.mode {
                        // c_p c†_p = 1 - c†_p c_p
                        let mut contracted = ops.clone();
                        contracted.drain(i..i + 2);
                        work.push((c, contracted));
                    }
                    ops.swap(i, i + 1);
                    work.push((-c, ops));
                    continue;
                }
            }
            let split = ops.iter().position(|o| !o.dagger).unwrap_or(ops.len());
            let key = (ops[..split].iter().map(|o| o.mode).collect(), ops[split..].iter().map(|o| o.mode).collect());
            *acc.entry(key).or_insert(C64::new(0.0, 0.0)) += c;
        }
    }
    acc.retain(|_, c| c.norm() > 1e-14);
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct FermionHamiltonian {
    modes: usize,
    terms: Vec<FermionTerm>,
}

impl FermionHamiltonian {
    /// Validates mode ranges and Hermiticity.
    pub fn new(modes: usize, terms: Vec<FermionTerm>) -> Result<Self> {
        if modes > 24 {
            return Err(Error::InvalidArgument(format!("{modes} modes exceed the simulator limit of 24")));
        }
        for t in &terms {
            if let Some(op) = t.ops.iter().find(|o| o.mode >= modes) {
                return Err(Error::ModeOutOfRange { mode: op.mode, modes });
            }
        }
        let h = FermionHamiltonian { modes, terms };
        h.check_hermitian()?;
        Ok(h)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn terms(&self) -> &[FermionTerm] {
        &self.terms
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let h = normal_form(&self.terms);
        let adj: Vec<FermionTerm> = self.terms.iter().map(FermionTerm::adjoint).collect();
        let hd = normal_form(&adj);
        let zero = C64::new(0.0, 0.0);
        for key in h.keys().chain(hd.keys()) {
            let a = h.get(key).copied().unwrap_or(zero);
            let b = hd.get(key).copied().unwrap_or(zero);
            if (a - b).norm() > HERMITIAN_TOL * a.norm().max(b.norm()).max(1.0) {
                return Err(Error::NotHermitian(format!(
                    "normal-ordered term c†{:?} c{:?} has coefficient {a} but its adjoint partner gives {b}",
                    key.0, key.1
                )));
            }
        }
        Ok(())
    }

    /// True if every normal-ordered term has as many creators as annihilators.
    pub fn conserves_number(&self) -> bool {
        normal_form(&self.terms).keys().all(|(c, a)| c.len() == a.len())
    }

    fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.modes() != self.modes {
            return Err(Error::DimensionMismatch { expected: 1 << self.modes, got: state.dim() });
        }
        Ok(())
    }

    /// `H|ψ⟩`, evaluated term by term with fermionic signs.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.check_state(state)?;
        let mut out = StateVector::zeros(self.modes);
        let psi = state.amplitudes();
        let o = out.amplitudes_mut();
        for t in &self.terms {
            for (x, &a) in psi.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                if let Some((y, neg)) = t.act_on(x as u64) {
                    let v = t.coeff * a;
                    o[y as usize] += if neg { -v } else { v };
                }
            }
        }
        Ok(out)
    }

    /// `⟨ψ|H|ψ⟩`. Panics in debug builds if the imaginary residue exceeds 1e-10.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        let hpsi = self.apply(state)?;
        let e = crate::fock::dot(state.amplitudes(), hpsi.amplitudes());
        debug_assert!(e.im.abs() <= 1e-10 * e.re.abs().max(1.0), "imaginary energy {e}");
        Ok(e.re)
    }

    /// Dense `2^M × 2^M` matrix in the occupation basis.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = 1usize << self.modes;
        let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for t in &self.terms {
            for x in 0..dim {
                if let Some((y, neg)) = t.act_on(x as u64) {
                    m[(y as usize, x)] += if neg { -t.coeff } else { t.coeff };
                }
            }
        }
        m
    }

    pub fn compile(&self) -> SparseHamiltonian {
        SparseHamiltonian::from_hamiltonian(self)
    }
}

/// Normal-ordered operator split into a precomputed diagonal and a list of
/// off-diagonal strings. The fast path for repeated expectation values.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    modes: usize,
    diag: Vec<f64>,
    offdiag: Vec<(C64, Vec<FermionOp>)>,
}

impl SparseHamiltonian {
    pub fn from_hamiltonian(h: &FermionHamiltonian) -> Self {
        let dim = 1usize << h.modes;
        let mut diag = vec![0.0; dim];
        let mut offdiag = Vec::new();
        for ((cre, ann), c) in normal_form(&h.terms) {
            let ops: Vec<FermionOp> = cre
                .iter()
                .map(|&m| FermionOp::create(m))
                .chain(ann.iter().map(|&m| FermionOp::annihilate(m)))
                .collect();
            let mut cs = cre.clone();
            let mut as_ = ann.clone();
            cs.sort_unstable();
            as_.sort_unstable();
            if cs == as_ {
                for (x, d) in diag.iter_mut().enumerate() {
                    if let Some((_, neg)) = act(&ops, x as u64) {
                        *d += if neg { -c.re } else { c.re };
                    }
                }
            } else {
                offdiag.push((c, ops));
            }
        }
        SparseHamiltonian { modes: h.modes, diag, offdiag }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Calls `f(y, value)` for every nonzero `⟨y|H|x⟩`.
    pub fn for_each_in_column(&self, x: u64, mut f: impl FnMut(u64, C64)) {
        let d = self.diag[x as usize];
        if d != 0.0 {
            f(x, C64::new(d, 0.0));
        }
        for (c, ops) in &self.offdiag {
            if let Some((y, neg)) = act(ops, x) {
                f(y, if neg { -*c } else { *c });
            }
        }
    }

    /// `out = H ψ` on raw amplitude slices.
    pub fn apply_into(&self, psi: &[C64], out: &mut [C64]) {
        for ((o, p), d) in out.iter_mut().zip(psi).zip(&self.diag) {
            *o = p * d;
        }
        for (c, ops) in &self.offdiag {
            for (x, &a) in psi.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                if let Some((y, neg)) = act(ops, x as u64) {
                    let v = c * a;
                    out[y as usize] += if neg { -v } else { v };
                }
            }
        }
    }

    pub fn expectation_raw(&self, psi: &[C64]) -> f64 {
        let mut e: f64 = psi.iter().zip(&self.diag).map(|(a, d)| a.norm_sqr() * d).sum();
        for (c, ops) in &self.offdiag {
            let mut acc = C64::new(0.0, 0.0);
            for (x, &a) in psi.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                if let Some((y, neg)) = act(ops, x as u64) {
                    let v = psi[y as usize].conj() * a;
                    acc += if neg { -v } else { v };
                }
            }
            e += (c * acc).re;
        }
        e
    }

    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        if state.modes() != self.modes {
            return Err(Error::DimensionMismatch { expected: 1 << self.modes, got: state.dim() });
        }
        Ok(self.expectation_raw(state.amplitudes()))
    }
}

/// Couplings of the (spinless or spinful) extended Hubbard model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HubbardCouplings {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub mu: f64,
}

impl Default for HubbardCouplings {
    fn default() -> Self {
        HubbardCouplings { t: 1.0, u: 0.0, v: 0.0, mu: 0.0 }
    }
}

/// `-t Σ (c†_j c_j' + h.c.) + V Σ n_j n_j' - μ Σ n_j` over the bonds of
/// `geometry`. Zero-coefficient terms are omitted.
pub fn build_spinless_hubbard(
    geometry: &Geometry,
    registers: &RegisterMap,
    t: f64,
    v: f64,
    mu: f64,
) -> Result<FermionHamiltonian> {
    if registers.spinful() || registers.num_sites() != geometry.num_sites() {
        return Err(Error::InvalidArgument("spinless model needs a spinless register map of the same lattice".into()));
    }
    let mode = |s| registers.mode(s, Spin::Up);
    let mut terms = Vec::new();
    for b in geometry.bonds() {
        let (a, c) = (mode(b.a), mode(b.b));
        if t != 0.0 {
            terms.push(FermionTerm::hopping(-t, a, c));
            terms.push(FermionTerm::hopping(-t, c, a));
        }
        if v != 0.0 {
            terms.push(FermionTerm::density_density(v, a, c));
        }
    }
    if mu != 0.0 {
        for s in 0..geometry.num_sites() {
            terms.push(FermionTerm::number(-mu, mode(s)));
        }
    }
    FermionHamiltonian::new(registers.num_modes(), terms)
}

/// Spinful extended Hubbard model. The inter-site density product
/// `n_j n_j'` is expanded into its four spin-resolved two-mode terms.
pub fn build_spinful_hubbard(
    geometry: &Geometry,
    registers: &RegisterMap,
    couplings: HubbardCouplings,
) -> Result<FermionHamiltonian> {
    if !registers.spinful() || registers.num_sites() != geometry.num_sites() {
        return Err(Error::InvalidArgument("spinful model needs a spinful register map of the same lattice".into()));
    }
    let HubbardCouplings { t, u, v, mu } = couplings;
    let mut terms = Vec::new();
    for b in geometry.bonds() {
        for s in Spin::BOTH {
            let (a, c) = (registers.mode(b.a, s), registers.mode(b.b, s));
            if t != 0.0 {
                terms.push(FermionTerm::hopping(-t, a, c));
                terms.push(FermionTerm::hopping(-t, c, a));
            }
        }
    }
    for j in 0..geometry.num_sites() {
        if u != 0.0 {
            terms.push(FermionTerm::density_density(u, registers.mode(j, Spin::Up), registers.mode(j, Spin::Down)));
        }
    }
    if v != 0.0 {
        for b in geometry.bonds() {
            for sa in Spin::BOTH {
                for sb in Spin::BOTH {
                    terms.push(FermionTerm::density_density(v, registers.mode(b.a, sa), registers.mode(b.b, sb)));
                }
            }
        }
    }
    if mu != 0.0 {
        for j in 0..geometry.num_sites() {
            for s in Spin::BOTH {
                terms.push(FermionTerm::number(-mu, registers.mode(j, s)));
            }
        }
    }
    FermionHamiltonian::new(registers.num_modes(), terms)
}

/// A lattice model plus register layout; builds the matching Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HubbardModel {
    pub geometry: Geometry,
    pub registers: RegisterMap,
    pub couplings: HubbardCouplings,
}

impl HubbardModel {
    pub fn build(&self) -> Result<FermionHamiltonian> {
        if self.registers.spinful() {
            build_spinful_hubbard(&self.geometry, &self.registers, self.couplings)
        } else {
            let c = self.couplings;
            build_spinless_hubbard(&self.geometry, &self.registers, c.t, c.v, c.mu)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn label(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Real multiple of a tensor product of Pauli operators, stored as bit masks:
/// qubit `q` carries X if only `x` has bit `q`, Z if only `z` has it, Y if both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliString {
    pub coeff: f64,
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn factors(&self) -> Vec<(usize, Pauli)> {
        let support = self.x | self.z;
        (0..64)
            .filter(|q| support >> q & 1 == 1)
            .map(|q| {
                let p = match (self.x >> q & 1, self.z >> q & 1) {
                    (1, 1) => Pauli::Y,
                    (1, 0) => Pauli::X,
                    _ => Pauli::Z,
                };
                (q, p)
            })
            .collect()
    }

    /// `P|x⟩ = phase · |x ⊕ self.x⟩`, including the coefficient.
    #[inline]
    pub fn act_on(&self, basis: u64) -> (u64, C64) {
        // labelled Y = i·X·Z, so the X^x Z^z form picks up i per Y factor
        let ys = (self.x & self.z).count_ones();
        let zsign = (self.z & basis).count_ones() & 1 == 1;
        let mut phase = match ys % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        } * self.coeff;
        if zsign {
            phase = -phase;
        }
        (basis ^ self.x, phase)
    }

    pub fn label(&self, qubits: usize) -> alloc::string::String {
        let mut s = alloc::string::String::with_capacity(qubits);
        for q in 0..qubits {
            s.push(match (self.x >> q & 1, self.z >> q & 1) {
                (1, 1) => 'Y',
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => 'I',
            });
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    pub qubits: usize,
    pub strings: Vec<PauliString>,
}

impl PauliSum {
    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = 1usize << self.qubits;
        let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for p in &self.strings {
            for x in 0..dim {
                let (y, v) = p.act_on(x as u64);
                m[(y as usize, x)] += v;
            }
        }
        m
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.modes() != self.qubits {
            return Err(Error::DimensionMismatch { expected: 1 << self.qubits, got: state.dim() });
        }
        let mut out = StateVector::zeros(self.qubits);
        let o = out.amplitudes_mut();
        for p in &self.strings {
            for (x, a) in state.amplitudes().iter().enumerate() {
                let (y, v) = p.act_on(x as u64);
                o[y as usize] += v * a;
            }
        }
        Ok(out)
    }
}

/// Jordan–Wigner image with the register order as the qubit order.
pub fn jw_transform(h: &FermionHamiltonian) -> PauliSum {
    let identity: Vec<usize> = (0..h.modes).collect();
    jw_transform_ordered(h, &identity).expect("identity order is a permutation")
}

/// Jordan–Wigner image where mode `m` is placed on qubit `qubit_of_mode[m]`.
///
/// `c†_m = Z_{<q} (X_q + X_q Z_q)/2` and `c_m = Z_{<q} (X_q − X_q Z_q)/2`
/// with `q = qubit_of_mode[m]`; products are multiplied in X^x Z^z form and
/// duplicate strings merged.
pub fn jw_transform_ordered(h: &FermionHamiltonian, qubit_of_mode: &[usize]) -> Result<PauliSum> {
    let n = h.modes;
    let mut check = qubit_of_mode.to_vec();
    check.sort_unstable();
    if check != (0..n).collect::<Vec<_>>() {
        return Err(Error::InvalidArgument("qubit order must be a permutation of the modes".into()));
    }
    let mut acc: BTreeMap<(u64, u64), C64> = BTreeMap::new();
    for term in &h.terms {
        let mut partial: Vec<(C64, u64, u64)> = vec![(term.coeff, 0, 0)];
        for op in &term.ops {
            let q = qubit_of_mode[op.mode];
            let zlow = (1u64 << q) - 1;
            let xq = 1u64 << q;
            let second = if op.dagger { 0.5 } else { -0.5 };
            let factors = [(0.5, xq, zlow), (second, xq, zlow | xq)];
            let mut next = Vec::with_capacity(partial.len() * 2);
            for &(c, x1, z1) in &partial {
                for &(f, x2, z2) in &factors {
                    let sign = if (z1 & x2).count_ones() & 1 == 1 { -f } else { f };
                    next.push((c * sign, x1 ^ x2, z1 ^ z2));
                }
            }
            partial = next;
        }
        for (c, x, z) in partial {
            *acc.entry((x, z)).or_insert(C64::new(0.0, 0.0)) += c;
        }
    }
    let mut strings = Vec::with_capacity(acc.len());
    for ((x, z), c) in acc {
        // X^x Z^z = (-i)^{#Y} · labelled string
        let ys = (x & z).count_ones();
        let labelled = c * match ys % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, -1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, 1.0),
        };
        if labelled.norm() <= 1e-12 {
            continue;
        }
        debug_assert!(labelled.im.abs() <= 1e-10, "non-real Pauli coefficient {labelled}");
        strings.push(PauliString { coeff: labelled.re, x, z });
    }
    Ok(PauliSum { qubits: n, strings })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliStats {
    pub term_count: usize,
    pub max_weight: u32,
    /// `histogram[w]` = number of strings of weight `w`.
    pub histogram: Vec<usize>,
}

pub fn pauli_stats(sum: &PauliSum) -> PauliStats {
    let max_weight = sum.strings.iter().map(PauliString::weight).max().unwrap_or(0);
    let mut histogram = vec![0; max_weight as usize + 1];
    for p in &sum.strings {
        histogram[p.weight() as usize] += 1;
    }
    PauliStats { term_count: sum.strings.len(), max_weight, histogram }
}
