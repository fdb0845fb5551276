//! Sector-resolved exact diagonalization.
//!
//! The Hamiltonian is restricted to one particle-number sector as a sparse
//! row-compressed matrix over the sector basis. Small sectors are solved
//! densely; larger ones with restarted Lanczos (full reorthogonalization,
//! deflation to collect degenerate ground states).

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[allow(unused_imports)] // float math without std
use num_traits::Float;

use crate::fock::{dot, Sector, StateVector};
use crate::hamiltonian::{FermionHamiltonian, HubbardModel, SparseHamiltonian};
use crate::{Error, Result, C64};

/// Largest sector solved with a dense eigendecomposition.
pub const DENSE_LIMIT: usize = 256;
/// States within this absolute distance of the ground energy are grouped.
pub const DEGENERACY_TOL: f64 = 1e-9;

const LANCZOS_KRYLOV: usize = 120;
const LANCZOS_RESTARTS: usize = 60;
const LANCZOS_RESIDUAL: f64 = 1e-10;

/// `H` restricted to one sector, row-compressed over the ascending sector basis.
#[derive(Debug, Clone)]
pub struct SectorOperator {
    basis: Vec<u64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<C64>,
    real: bool,
}

impl SectorOperator {
    pub fn new(h: &SparseHamiltonian, n_f: usize) -> Result<Self> {
        let basis = Sector::new(h.modes(), n_f)?.basis();
        let mut row_ptr = Vec::with_capacity(basis.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        let mut leaked = false;
        for &x in &basis {
            // ⟨x|H|y⟩ = conj(⟨y|H|x⟩) for Hermitian H
            h.for_each_in_column(x, |y, v| match basis.binary_search(&y) {
                Ok(j) => {
                    cols.push(j as u32);
                    vals.push(v.conj());
                }
                Err(_) => leaked = true,
            });
            row_ptr.push(cols.len());
        }
        if leaked {
            return Err(Error::InvalidArgument("Hamiltonian does not conserve particle number".into()));
        }
        let real = vals.iter().all(|v: &C64| v.im == 0.0);
        Ok(SectorOperator { basis, row_ptr, cols, vals, real })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Occupation masks of the sector basis, ascending.
    pub fn basis(&self) -> &[u64] {
        &self.basis
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// `y = H x` on sector-local vectors.
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *out = acc;
        }
    }

    /// Picks the sector amplitudes out of a full `2^M` vector.
    pub fn gather(&self, full: &[C64], local: &mut [C64]) {
        for (l, &x) in local.iter_mut().zip(&self.basis) {
            *l = full[x as usize];
        }
    }

    pub fn embed(&self, local: &[C64], modes: usize) -> StateVector {
        let mut s = StateVector::zeros(modes);
        let amps = s.amplitudes_mut();
        for (&x, &v) in self.basis.iter().zip(local) {
            amps[x as usize] = v;
        }
        s
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for r in 0..n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k] as usize)] += self.vals[k];
            }
        }
        m
    }
}

/// Lowest eigenvalue of a sector and an orthonormal basis of its eigenspace
/// (sector-local coordinates).
#[derive(Debug, Clone)]
pub struct SectorGround {
    pub energy: f64,
    pub vectors: Vec<Vec<C64>>,
}

pub fn solve_sector(op: &SectorOperator) -> Result<SectorGround> {
    if op.dim() <= DENSE_LIMIT {
        Ok(dense_ground(op))
    } else {
        lanczos_ground(op)
    }
}

fn dense_ground(op: &SectorOperator) -> SectorGround {
    let m = op.to_dense();
    let (values, vectors): (Vec<f64>, Vec<Vec<C64>>) = if op.is_real() {
        let eig = SymmetricEigen::new(m.map(|c| c.re));
        let vals = eig.eigenvalues.iter().copied().collect();
        let vecs = eig.eigenvectors.column_iter().map(|c| c.iter().map(|&v| C64::new(v, 0.0)).collect()).collect();
        (vals, vecs)
    } else {
        let eig = SymmetricEigen::new(m);
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.column_iter().map(|c| c.iter().copied().collect()).collect(),
        )
    };
    let energy = values.iter().copied().fold(f64::INFINITY, f64::min);
    let vectors = values.iter().zip(vectors).filter(|(e, _)| **e <= energy + DEGENERACY_TOL).map(|(_, v)| v).collect();
    SectorGround { energy, vectors }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn orthogonalize(v: &mut [C64], against: &[Vec<C64>]) {
    // two passes keep the basis orthogonal to working precision
    for _ in 0..2 {
        for u in against {
            let c = dot(u, v);
            for (x, y) in v.iter_mut().zip(u) {
                *x -= c * y;
            }
        }
    }
}

/// Lowest eigenpair of `op` on the orthogonal complement of `deflate`.
fn lanczos_lowest(op: &SectorOperator, deflate: &[Vec<C64>], rng: &mut ChaCha8Rng) -> Result<(f64, Vec<C64>)> {
    let n = op.dim();
    let free = n - deflate.len();
    let kmax = LANCZOS_KRYLOV.min(free);
    let mut start: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0)).collect();
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut residual = f64::INFINITY;
    for _ in 0..LANCZOS_RESTARTS {
        orthogonalize(&mut start, deflate);
        let s = norm(&start);
        for a in &mut start {
            *a /= s;
        }
        let mut basis: Vec<Vec<C64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(kmax);
        let mut beta: Vec<f64> = Vec::with_capacity(kmax);
        loop {
            let j = basis.len() - 1;
            op.matvec(&basis[j], &mut w);
            alpha.push(dot(&basis[j], &w).re);
            // deflated directions are projected out last: any remnant would
            // be amplified by later iterations
            orthogonalize(&mut w, &basis);
            orthogonalize(&mut w, deflate);
            let b = norm(&w);
            if basis.len() == kmax || b < 1e-12 {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|a| a / b).collect());
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (imin, _) =
            eig.eigenvalues
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, e)| if e < acc.1 { (i, e) } else { acc });
        let y: DVector<f64> = eig.eigenvectors.column(imin).into_owned();
        let mut ritz = vec![C64::new(0.0, 0.0); n];
        for (coef, v) in y.iter().zip(&basis) {
            for (r, a) in ritz.iter_mut().zip(v) {
                *r += a * *coef;
            }
        }
        orthogonalize(&mut ritz, deflate);
        let rn = norm(&ritz);
        for a in &mut ritz {
            *a /= rn;
        }
        op.matvec(&ritz, &mut w);
        let rayleigh = dot(&ritz, &w).re;
        residual = w.iter().zip(&ritz).map(|(hw, r)| (hw - r * rayleigh).norm_sqr()).sum::<f64>().sqrt();
        if residual <= LANCZOS_RESIDUAL * rayleigh.abs().max(1.0) {
            return Ok((rayleigh, ritz));
        }
        start = ritz;
    }
    Err(Error::NoConvergence { restarts: LANCZOS_RESTARTS, residual })
}

fn lanczos_ground(op: &SectorOperator) -> Result<SectorGround> {
    let mut rng = ChaCha8Rng::seed_from_u64(op.dim() as u64);
    let mut vectors: Vec<Vec<C64>> = Vec::new();
    let mut energy = f64::INFINITY;
    while vectors.len() < op.dim() {
        let (e, v) = lanczos_lowest(op, &vectors, &mut rng)?;
        if vectors.is_empty() || e <= energy + DEGENERACY_TOL {
            energy = energy.min(e);
            vectors.push(v);
        } else {
            break;
        }
    }
    Ok(SectorGround { energy, vectors })
}

/// Lowest energy of `h` among states with `n_f` particles, with its
/// eigenvectors embedded in the full `2^M` space.
pub fn ground_in_sector(h: &FermionHamiltonian, n_f: usize) -> Result<(f64, Vec<StateVector>)> {
    let op = SectorOperator::new(&h.compile(), n_f)?;
    let g = solve_sector(&op)?;
    Ok((g.energy, g.vectors.iter().map(|v| op.embed(v, h.modes())).collect()))
}

/// Ground state over all sectors.
#[derive(Debug, Clone)]
pub struct GroundSolution {
    pub energy: f64,
    pub n_f: usize,
    /// Orthonormal basis of the ground eigenspace within sector `n_f`.
    pub vectors: Vec<StateVector>,
    pub degeneracy_tol: f64,
    /// Lowest energy of every sector, indexed by particle number.
    pub sector_energies: Vec<f64>,
    /// Other sectors whose ground energy ties with `energy` within the tolerance.
    pub tied_sectors: Vec<usize>,
}

impl GroundSolution {
    pub fn degeneracy(&self) -> usize {
        self.vectors.len()
    }
}

pub fn global_ground(h: &FermionHamiltonian) -> Result<GroundSolution> {
    global_ground_compiled(&h.compile())
}

pub fn global_ground_compiled(sparse: &SparseHamiltonian) -> Result<GroundSolution> {
    let modes = sparse.modes();
    let mut best: Option<(usize, SectorOperator, SectorGround)> = None;
    let mut sector_energies = Vec::with_capacity(modes + 1);
    for n_f in 0..=modes {
        let op = SectorOperator::new(sparse, n_f)?;
        let g = solve_sector(&op)?;
        sector_energies.push(g.energy);
        // strict improvement beyond the tolerance keeps ties at the smaller sector
        if best.as_ref().is_none_or(|(_, _, b)| g.energy < b.energy - DEGENERACY_TOL) {
            best = Some((n_f, op, g));
        }
    }
    let (n_f, op, g) = best.expect("at least the vacuum sector exists");
    let tied_sectors = sector_energies
        .iter()
        .enumerate()
        .filter(|&(k, e)| k != n_f && (e - g.energy).abs() <= DEGENERACY_TOL)
        .map(|(k, _)| k)
        .collect();
    Ok(GroundSolution {
        energy: g.energy,
        n_f,
        vectors: g.vectors.iter().map(|v| op.embed(v, modes)).collect(),
        degeneracy_tol: DEGENERACY_TOL,
        sector_energies,
        tied_sectors,
    })
}

/// Squared norm of the projection of `state` onto the ground eigenspace.
pub fn fidelity(state: &StateVector, ground: &GroundSolution) -> Result<f64> {
    let mut f = 0.0;
    for g in &ground.vectors {
        state.check_same_space(g)?;
        f += dot(g.amplitudes(), state.amplitudes()).norm_sqr();
    }
    Ok(f)
}

/// Coupling swept by a staircase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingAxis {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaircasePoint {
    pub coupling: f64,
    pub energy: f64,
    pub n_f: usize,
}

/// Ground particle number of `model` at every value of `grid` on `axis`.
pub fn staircase(model: &HubbardModel, axis: CouplingAxis, grid: &[f64]) -> Result<Vec<StaircasePoint>> {
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("staircase grid must be non-decreasing".into()));
    }
    grid.iter()
        .map(|&c| {
            let mut m = model.clone();
            match axis {
                CouplingAxis::U => m.couplings.u = c,
                CouplingAxis::V => m.couplings.v = c,
            }
            let g = global_ground(&m.build()?)?;
            Ok(StaircasePoint { coupling: c, energy: g.energy, n_f: g.n_f })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_spinful_hubbard, build_spinless_hubbard, HubbardCouplings};
    use crate::lattice::{Geometry, Ordering, RegisterMap};
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn spinless_chain(n: usize, v: f64) -> FermionHamiltonian {
        let g = Geometry::chain(n).unwrap();
        build_spinless_hubbard(&g, &RegisterMap::new(&g, false, Ordering::RowMajor), 1.0, v, 0.0).unwrap()
    }

    fn residual(h: &FermionHamiltonian, v: &StateVector, e: f64) -> f64 {
        let hv = h.apply(v).unwrap();
        hv.amplitudes().iter().zip(v.amplitudes()).map(|(a, b)| (a - b * e).norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn free_chain_sector() {
        let (e, vs) = ground_in_sector(&spinless_chain(4, 0.0), 2).unwrap();
        assert!((e + 2.0 * ((PI / 5.0).cos() + (2.0 * PI / 5.0).cos())).abs() < 1e-12);
        assert_eq!(vs.len(), 1);
        let (e0, _) = ground_in_sector(&spinless_chain(4, 1.0), 0).unwrap();
        assert_eq!(e0, 0.0);
    }

    #[test]
    fn hubbard_dimer() {
        let g = Geometry::chain(2).unwrap();
        let u = 2.5;
        let h = build_spinful_hubbard(
            &g,
            &RegisterMap::new(&g, true, Ordering::RowMajor),
            HubbardCouplings { u, ..Default::default() },
        )
        .unwrap();
        let (e, _) = ground_in_sector(&h, 2).unwrap();
        assert!((e - (u - (u * u + 16.0).sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn global_ground_of_chain_12() {
        let h = spinless_chain(12, 0.0);
        let g = global_ground(&h).unwrap();
        let exact: f64 = -2.0 * (1..=6).map(|k| (k as f64 * PI / 13.0).cos()).sum::<f64>();
        assert_eq!(g.n_f, 6);
        assert!((g.energy - exact).abs() < 1e-10);
        assert!(g.tied_sectors.is_empty());
        for v in &g.vectors {
            assert!(residual(&h, v, g.energy) < 1e-8);
            assert!((fidelity(v, &g).unwrap() - 1.0).abs() < 1e-10);
        }
        assert_eq!(global_ground(&spinless_chain(12, 2.0)).unwrap().n_f, 5);
    }

    #[test]
    fn fidelity_examples() {
        let h = spinless_chain(4, 0.0);
        let g = global_ground(&h).unwrap();
        let op = SectorOperator::new(&h.compile(), g.n_f).unwrap();
        let dense = SymmetricEigen::new(op.to_dense().map(|c| c.re));
        let mut order: Vec<usize> = (0..op.dim()).collect();
        order.sort_by(|&a, &b| dense.eigenvalues[a].total_cmp(&dense.eigenvalues[b]));
        let excited: Vec<C64> = dense.eigenvectors.column(order[1]).iter().map(|&x| C64::new(x, 0.0)).collect();
        let excited = op.embed(&excited, 4);
        assert!(fidelity(&excited, &g).unwrap() < 1e-20);
        let r = 0.5f64.sqrt();
        let mixed = StateVector::from_amplitudes(
            4,
            g.vectors[0].amplitudes().iter().zip(excited.amplitudes()).map(|(a, b)| (a + b) * r).collect(),
        )
        .unwrap();
        assert!((fidelity(&mixed, &g).unwrap() - 0.5).abs() < 1e-12);
        assert!(fidelity(&StateVector::zeros(3), &g).is_err());
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        for (n, spinful, u, v) in [(6, true, 2.5, 0.5), (6, true, 0.0, 0.0), (12, false, 0.0, 1.0)] {
            let g = Geometry::chain(n).unwrap();
            let regs = RegisterMap::new(&g, spinful, Ordering::RowMajor);
            let h = if spinful {
                build_spinful_hubbard(&g, &regs, HubbardCouplings { u, v, ..Default::default() }).unwrap()
            } else {
                build_spinless_hubbard(&g, &regs, 1.0, v, 0.0).unwrap()
            };
            let op = SectorOperator::new(&h.compile(), regs.num_modes() / 2).unwrap();
            assert!(op.dim() > DENSE_LIMIT);
            let dense = dense_ground(&op);
            let lz = lanczos_ground(&op).unwrap();
            assert!((dense.energy - lz.energy).abs() < 1e-9, "{} vs {}", dense.energy, lz.energy);
            assert_eq!(dense.vectors.len(), lz.vectors.len());
        }
    }

    #[test]
    fn lanczos_finds_degenerate_subspace() {
        // free spinful chain of 6 sites with 5 fermions: the spin of the
        // unpaired electron gives a twofold ground space
        let g = Geometry::chain(6).unwrap();
        let regs = RegisterMap::new(&g, true, Ordering::RowMajor);
        let h = build_spinful_hubbard(&g, &regs, HubbardCouplings::default()).unwrap();
        let op = SectorOperator::new(&h.compile(), 5).unwrap();
        assert!(op.dim() > DENSE_LIMIT);
        let lz = lanczos_ground(&op).unwrap();
        assert_eq!(lz.vectors.len(), 2);
        assert_eq!(dense_ground(&op).vectors.len(), 2);
        let exact = -4.0 * ((PI / 7.0).cos() + (2.0 * PI / 7.0).cos()) - 2.0 * (3.0 * PI / 7.0).cos();
        assert!((lz.energy - exact).abs() < 1e-9);
    }

    #[test]
    fn staircase_examples() {
        let g = Geometry::chain(4).unwrap();
        let model = HubbardModel {
            geometry: g.clone(),
            registers: RegisterMap::new(&g, false, Ordering::RowMajor),
            couplings: HubbardCouplings::default(),
        };
        let pts = staircase(&model, CouplingAxis::V, &[0.0, 50.0]).unwrap();
        assert_eq!(pts[0].n_f, 2);
        assert!(pts[1].n_f <= 2);
        assert!(staircase(&model, CouplingAxis::V, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn ties_resolve_to_the_smaller_sector() {
        // a single isolated mode with zero energy: sectors 0 and 1 both have E = 0
        let h = FermionHamiltonian::new(1, Vec::new()).unwrap();
        let g = global_ground(&h).unwrap();
        assert_eq!(g.n_f, 0);
        assert_eq!(g.tied_sectors, vec![1]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn sector_restriction_matches_full_spectrum(v in 0.0f64..4.0, mu in -1.0f64..1.0, cols in 2usize..5) {
            let g = Geometry::ladder(cols).unwrap();
            let h = build_spinless_hubbard(&g, &RegisterMap::new(&g, false, Ordering::RowMajor), 1.0, v, mu).unwrap();
            let full = SymmetricEigen::new(h.to_dense().map(|c| c.re));
            let global = global_ground(&h).unwrap();
            let min_full = full.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert!((global.energy - min_full).abs() < 1e-9);
            for n_f in 0..=h.modes() {
                let sector_min = (0..full.eigenvalues.len())
                    .filter(|&k| {
                        let w: f64 = full.eigenvectors.column(k).iter().enumerate()
                            .filter(|(x, _)| x.count_ones() as usize == n_f).map(|(_, a)| a * a).sum();
                        w > 0.5
                    })
                    .map(|k| full.eigenvalues[k])
                    .fold(f64::INFINITY, f64::min);
                prop_assert!((global.sector_energies[n_f] - sector_min).abs() < 1e-9);
            }
        }
    }
}
