//! Occupation-number basis, particle-number sectors and full-space state vectors.
//!
//! Bit `m` of a basis mask is mode `m` (bit 0 least significant).

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result, C64};

/// Occupation pattern over `M` modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState(pub u64);

impl BasisState {
    pub fn particles(self) -> u32 {
        self.0.count_ones()
    }

    pub fn occupied(self, mode: usize) -> bool {
        self.0 >> mode & 1 == 1
    }
}

/// Fermionic sign `(-1)^k` where `k` counts occupied modes strictly between
/// `j` and `jp`. Independent of the occupation of `j` and `jp` themselves.
pub fn parity_between(mask: u64, j: usize, jp: usize) -> i32 {
    if between_parity_odd(mask, j, jp) {
        -1
    } else {
        1
    }
}

#[inline]
pub(crate) fn between_mask(j: usize, jp: usize) -> u64 {
    let (lo, hi) = (j.min(jp), j.max(jp));
    if hi <= lo + 1 {
        return 0;
    }
    ((1u64 << hi) - 1) & !((1u64 << (lo + 1)) - 1)
}

#[inline]
pub(crate) fn between_parity_odd(mask: u64, j: usize, jp: usize) -> bool {
    (mask & between_mask(j, jp)).count_ones() & 1 == 1
}

/// Sign `(-1)^k` with `k` the number of occupied modes below `mode`.
#[inline]
pub(crate) fn parity_below_odd(mask: u64, mode: usize) -> bool {
    (mask & ((1u64 << mode) - 1)).count_ones() & 1 == 1
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Fixed particle-number subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sector {
    pub modes: usize,
    pub n_f: usize,
}

impl Sector {
    pub fn new(modes: usize, n_f: usize) -> Result<Self> {
        if n_f > modes {
            return Err(Error::TooManyParticles { n_f, modes });
        }
        Ok(Sector { modes, n_f })
    }

    pub fn dim(&self) -> usize {
        binomial(self.modes, self.n_f)
    }

    /// Ascending list of masks with exactly `n_f` bits set.
    pub fn basis(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.dim());
        if self.n_f == 0 {
            out.push(0);
            return out;
        }
        let mut x: u64 = (1u64 << self.n_f) - 1;
        let limit = 1u64 << self.modes;
        while x < limit {
            out.push(x);
            // next integer with the same popcount (Gosper's hack)
            let c = x & x.wrapping_neg();
            let r = x + c;
            x = (((r ^ x) >> 2) / c) | r;
        }
        out
    }
}

/// How the fermions of a reference basis state are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferencePattern {
    /// Fermion `k` sits on mode `floor(k·M/N_f)`.
    Spread,
    /// The lowest `N_f` modes are filled.
    Lowest,
    /// An explicit occupation mask.
    Mask(u64),
}

pub(crate) fn spread_mask(modes: usize, n_f: usize) -> u64 {
    (0..n_f).fold(0u64, |m, k| m | 1 << (k * modes / n_f))
}

/// Amplitudes over the full `2^M` occupation basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    modes: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zeros(modes: usize) -> Self {
        StateVector { modes, amps: vec![C64::new(0.0, 0.0); 1usize << modes] }
    }

    pub fn basis(modes: usize, mask: u64) -> Result<Self> {
        if mask >> modes != 0 {
            return Err(Error::InvalidArgument(alloc::format!("mask {mask:#b} has bits beyond {modes} modes")));
        }
        let mut s = Self::zeros(modes);
        s.amps[mask as usize] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(modes: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1usize << modes {
            return Err(Error::DimensionMismatch { expected: 1 << modes, got: amps.len() });
        }
        Ok(StateVector { modes, amps })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = num_traits::Float::sqrt(self.norm_sqr());
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    /// Probability weight outside the `n_f`-particle sector.
    pub fn leakage(&self, n_f: usize) -> f64 {
        self.amps.iter().enumerate().filter(|(x, _)| x.count_ones() as usize != n_f).map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn check_same_space(&self, other: &StateVector) -> Result<()> {
        if self.modes != other.modes {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(())
    }
}

/// Computational basis state with `n_f` particles placed by `pattern`.
pub fn reference_state(modes: usize, n_f: usize, pattern: ReferencePattern) -> Result<StateVector> {
    if n_f > modes {
        return Err(Error::TooManyParticles { n_f, modes });
    }
    let mask = match pattern {
        ReferencePattern::Spread => spread_mask(modes, n_f),
        ReferencePattern::Lowest => (1u64 << n_f) - 1,
        ReferencePattern::Mask(m) => {
            if m.count_ones() as usize != n_f {
                return Err(Error::InvalidArgument(alloc::format!("mask {m:#b} does not hold {n_f} particles")));
            }
            m
        }
    };
    StateVector::basis(modes, mask)
}

/// `⟨a|b⟩`, antilinear in the first argument.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64> {
    a.check_same_space(b)?;
    Ok(dot(&a.amps, &b.amps))
}

#[inline]
pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}
