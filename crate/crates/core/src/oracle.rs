//! Exact diagonalization of small spin chains, independent of the
//! free-fermion machinery.
//!
//! Basis states are bit strings with bit s describing site s; a clear bit is
//! spin up (σᶻ = +1). Every bond term flips two spins, so the Hamiltonian
//! conserves the spin-flip parity `P = Π σᶻ` and is diagonalized one parity
//! sector at a time.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::corr::FiniteChainGround;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::model::ModelSpec;
use crate::spectra::report;

pub const MAX_SITES: usize = 14;
pub const MAX_VALIDATE_SITES: usize = 12;

/// Sector dimension up to which the dense eigensolver is used.
const DENSE_LIMIT: usize = 512;
const DEGENERACY_TOLERANCE: f64 = 1e-10;
const LANCZOS_KRYLOV: usize = 80;
const LANCZOS_RESTARTS: usize = 50;
const LANCZOS_RESIDUAL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// `H = -Σ_bonds [Jx σˣσˣ + Jy σʸσʸ] - λ Σ σᶻ` on `n_sites` spins.
#[derive(Debug, Clone)]
pub struct SpinHamiltonian {
    n_sites: usize,
    lambda: f64,
    /// Amplitude of a bond flip when the two spins are equal / opposite.
    flip_equal: f64,
    flip_opposite: f64,
    bonds: Vec<(usize, usize)>,
}

impl SpinHamiltonian {
    pub fn new(model: &ModelSpec, n_sites: usize, boundary: Boundary) -> Result<Self> {
        if n_sites > MAX_SITES {
            return Err(Error::SizeLimit {
                n: n_sites,
                max: MAX_SITES,
            });
        }
        if n_sites < 2 {
            return Err(Error::InvalidInput(format!(
                "chain needs at least 2 sites, got {n_sites}"
            )));
        }
        let (jx, jy) = model.couplings();
        let mut bonds: Vec<(usize, usize)> = (0..n_sites - 1).map(|s| (s, s + 1)).collect();
        if boundary == Boundary::Periodic && n_sites > 2 {
            bonds.push((n_sites - 1, 0));
        }
        // σʸσʸ gives -1 on |↑↑⟩, |↓↓⟩ and +1 on |↑↓⟩, |↓↑⟩.
        Ok(Self {
            n_sites,
            lambda: model.lambda(),
            flip_equal: -(jx - jy),
            flip_opposite: -(jx + jy),
            bonds,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    fn diagonal(&self, state: usize) -> f64 {
        let down = state.count_ones() as f64;
        -self.lambda * (self.n_sites as f64 - 2.0 * down)
    }

    /// Calls `emit(target, amplitude)` for every off-diagonal element in
    /// the column of `state`.
    fn off_diagonal(&self, state: usize, mut emit: impl FnMut(usize, f64)) {
        for &(s, t) in &self.bonds {
            let equal = (state >> s & 1) == (state >> t & 1);
            let amp = if equal { self.flip_equal } else { self.flip_opposite };
            if amp != 0.0 {
                emit(state ^ (1 << s) ^ (1 << t), amp);
            }
        }
    }

    /// `H ψ` on the full space.
    pub fn apply(&self, psi: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = (0..self.dim()).map(|b| self.diagonal(b) * psi[b]).collect();
        for (b, &amp_in) in psi.iter().enumerate() {
            if amp_in != 0.0 {
                self.off_diagonal(b, |target, amp| out[target] += amp * amp_in);
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim(), self.dim());
        for b in 0..self.dim() {
            h[(b, b)] = self.diagonal(b);
            self.off_diagonal(b, |target, amp| h[(target, b)] += amp);
        }
        h
    }

    fn sector(&self, parity: Parity) -> Sector<'_> {
        let states: Vec<usize> = (0..self.dim())
            .filter(|b| parity.contains(*b))
            .collect();
        let mut index = vec![usize::MAX; self.dim()];
        for (i, &b) in states.iter().enumerate() {
            index[b] = i;
        }
        Sector {
            ham: self,
            states,
            index,
        }
    }
}

/// Dense real symmetric matrix of the chain in the σᶻ basis.
pub fn build_hamiltonian(
    model: &ModelSpec,
    n_sites: usize,
    boundary: Boundary,
) -> Result<DMatrix<f64>> {
    Ok(SpinHamiltonian::new(model, n_sites, boundary)?.to_dense())
}

/// Eigenvalue of `Π σᶻ`: even means an even number of down spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn contains(self, state: usize) -> bool {
        (state.count_ones() % 2 == 0) == (self == Parity::Even)
    }
}

struct Sector<'a> {
    ham: &'a SpinHamiltonian,
    states: Vec<usize>,
    index: Vec<usize>,
}

impl Sector<'_> {
    fn dim(&self) -> usize {
        self.states.len()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.dim());
        for (i, &b) in self.states.iter().enumerate() {
            y[i] += self.ham.diagonal(b) * x[i];
            self.ham
                .off_diagonal(b, |target, amp| y[self.index[target]] += amp * x[i]);
        }
        y
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim(), self.dim());
        for (i, &b) in self.states.iter().enumerate() {
            h[(i, i)] = self.ham.diagonal(b);
            self.ham
                .off_diagonal(b, |target, amp| h[(self.index[target], i)] += amp);
        }
        h
    }

    fn ground(&self) -> Result<(f64, DVector<f64>)> {
        if self.dim() <= DENSE_LIMIT {
            let eig = SymmetricEigen::new(self.to_dense());
            let i = eig.eigenvalues.argmin().0;
            return Ok((eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned()));
        }
        self.lanczos()
    }

    /// Restarted Lanczos with full reorthogonalization.
    fn lanczos(&self) -> Result<(f64, DVector<f64>)> {
        let n = self.dim();
        let mut rng = StdRng::seed_from_u64(0x5eed ^ n as u64);
        let mut start = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
        start.normalize_mut();

        let krylov = LANCZOS_KRYLOV.min(n);
        for _ in 0..LANCZOS_RESTARTS {
            let mut basis: Vec<DVector<f64>> = vec![start.clone()];
            let mut alpha = Vec::with_capacity(krylov);
            let mut beta: Vec<f64> = Vec::with_capacity(krylov);
            for j in 0..krylov {
                let mut w = self.apply(&basis[j]);
                alpha.push(basis[j].dot(&w));
                for _ in 0..2 {
                    for v in &basis {
                        let c = v.dot(&w);
                        w.axpy(-c, v, 1.0);
                    }
                }
                let b = w.norm();
                if j + 1 == krylov || b < 1e-14 {
                    break;
                }
                beta.push(b);
                basis.push(w / b);
            }
            let m = alpha.len();
            let t = DMatrix::from_fn(m, m, |i, k| {
                if i == k {
                    alpha[i]
                } else if i.abs_diff(k) == 1 {
                    beta[i.min(k)]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let i = eig.eigenvalues.argmin().0;
            let energy = eig.eigenvalues[i];
            let mut ritz = DVector::zeros(n);
            for (k, v) in basis.iter().take(m).enumerate() {
                ritz.axpy(eig.eigenvectors[(k, i)], v, 1.0);
            }
            ritz.normalize_mut();
            let residual = (self.apply(&ritz) - energy * &ritz).norm();
            if residual <= LANCZOS_RESIDUAL * energy.abs().max(1.0) || m == n {
                return Ok((energy, ritz));
            }
            start = ritz;
        }
        Err(Error::EigensolveFailure(format!(
            "Lanczos did not converge in sector of dimension {n}"
        )))
    }
}

/// Ground state of a chain, embedded in the full 2^N space.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub n_sites: usize,
    pub energy: f64,
    pub parity: Parity,
    /// The two parity sectors are degenerate within 1e-10; the even one was taken.
    pub degenerate: bool,
    psi: Vec<f64>,
}

impl GroundState {
    pub fn new(model: &ModelSpec, n_sites: usize, boundary: Boundary) -> Result<Self> {
        let ham = SpinHamiltonian::new(model, n_sites, boundary)?;
        let even = ham.sector(Parity::Even);
        let odd = ham.sector(Parity::Odd);
        let (e_even, v_even) = even.ground()?;
        let (e_odd, v_odd) = odd.ground()?;
        let degenerate = (e_even - e_odd).abs() < DEGENERACY_TOLERANCE;
        let (energy, parity, sector, vector) = if degenerate || e_even < e_odd {
            (e_even, Parity::Even, &even, v_even)
        } else {
            (e_odd, Parity::Odd, &odd, v_odd)
        };
        let mut psi = vec![0.0; ham.dim()];
        for (i, &b) in sector.states.iter().enumerate() {
            psi[b] = vector[i];
        }
        Ok(Self {
            n_sites,
            energy,
            parity,
            degenerate,
            psi,
        })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.psi
    }

    /// Eigenvalues of the reduced state of sites `0 .. block_len`.
    pub fn reduced_eigenvalues(&self, block_len: usize) -> Result<Vec<f64>> {
        if block_len == 0 || block_len > self.n_sites {
            return Err(Error::InvalidInput(format!(
                "block length {block_len} outside 1..={}",
                self.n_sites
            )));
        }
        let rows = 1usize << block_len;
        let cols = 1usize << (self.n_sites - block_len);
        // ψ[a | b << ℓ] with a the block configuration.
        let m = DMatrix::from_fn(rows, cols, |a, b| self.psi[a | (b << block_len)]);
        let gram = if rows <= cols {
            &m * m.transpose()
        } else {
            m.transpose() * &m
        };
        symmetric_eigenvalues(gram)
    }

    pub fn reduced(&self, block_len: usize) -> Result<EdResult> {
        let eigs = self.reduced_eigenvalues(block_len)?;
        let entropy = eigs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum::<f64>()
            .max(0.0);
        let lambda1 = eigs.iter().copied().fold(0.0, f64::max).min(1.0);
        Ok(EdResult {
            n_sites: self.n_sites,
            block_start: 0,
            block_len,
            entropy,
            lambda1,
            ground_energy: self.energy,
            parity: self.parity,
            degenerate: self.degenerate,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdResult {
    #[serde(rename = "N")]
    pub n_sites: usize,
    pub block_start: usize,
    pub block_len: usize,
    pub entropy: f64,
    pub lambda1: f64,
    pub ground_energy: f64,
    pub parity: Parity,
    pub degenerate: bool,
}

/// Entropy and λ1 of the first `block_len` sites in the ground state.
pub fn ground_reduced(
    model: &ModelSpec,
    n_sites: usize,
    block_len: usize,
    boundary: Boundary,
) -> Result<EdResult> {
    GroundState::new(model, n_sites, boundary)?.reduced(block_len)
}

/// Largest of |ΔS| and |Δλ1| between exact diagonalization and the
/// open-chain correlation matrix, over blocks of 1..=N/2 sites at the chain
/// end.
pub fn cross_validate(model: &ModelSpec, n_sites: usize) -> Result<f64> {
    if n_sites > MAX_VALIDATE_SITES {
        return Err(Error::SizeLimit {
            n: n_sites,
            max: MAX_VALIDATE_SITES,
        });
    }
    let ed = GroundState::new(model, n_sites, Boundary::Open)?;
    let fermions = FiniteChainGround::new(model, n_sites)?;
    let mut worst = 0.0f64;
    for len in 1..=n_sites / 2 {
        let exact = ed.reduced(len)?;
        let free = report(&fermions.block_spectrum(0, len)?)?;
        worst = worst
            .max((exact.entropy - free.entropy).abs())
            .max((exact.lambda1 - free.lambda1).abs());
    }
    Ok(worst)
}
