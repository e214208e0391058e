//! Ground-state correlation matrices of XY chains and the single-particle
//! spectrum of a block.
//!
//! For the infinite chain the block correlations are Toeplitz, generated by
//! the Fourier coefficients of the normalized symbol
//!
//! ```text
//! g(θ) = (cos θ - λ - iγ sin θ) / √((cos θ - λ)² + γ² sin² θ)
//! ```
//!
//! For γ = 0 this is sign(cos θ - λ) and the block matrix `T_L[j,k] = g_{j-k}`
//! equals `1 - 2C` with C the fermionic two-point matrix. For γ > 0 the
//! 2L×2L Majorana covariance has the block form `[[0, G], [-Gᵀ, 0]]` (after
//! grouping odd and even Majoranas) with `G[j,k] = g_{j-k}`, so the
//! magnitudes of its canonical form are the singular values of G.
//!
//! Open finite chains are built from the exact single-particle modes of
//! their coupling matrix; they are what the exact-diagonalization oracle is
//! compared with.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SVD};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::model::ModelSpec;
use crate::quadrature::GaussKronrod;

/// Raw eigenvalues may leave [-1, 1] by this much before it is an error.
pub const CLAMP_TOLERANCE: f64 = 1e-10;

/// Absolute tolerance of each Fourier coefficient.
pub const SYMBOL_TOLERANCE: f64 = 1e-10;

/// Single-particle energies below this are treated as exact zero modes.
pub const ZERO_MODE_TOLERANCE: f64 = 1e-10;

/// The values μ_l ∈ [-1, 1] characterizing a quasi-free reduced state,
/// stored in descending order of |μ| (ties: larger value first).
#[derive(Debug, Clone, PartialEq)]
pub struct SingleParticleSpectrum {
    mu: Vec<f64>,
}

impl SingleParticleSpectrum {
    /// Validates, clamps values within [`CLAMP_TOLERANCE`] of ±1, and sorts.
    pub fn new(mut mu: Vec<f64>) -> Result<Self> {
        for m in mu.iter_mut() {
            if !m.is_finite() || m.abs() > 1.0 + CLAMP_TOLERANCE {
                return Err(Error::SpectrumOutOfRange { value: *m });
            }
            *m = m.clamp(-1.0, 1.0);
        }
        mu.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));
        Ok(Self { mu })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Spectrum of the union of two uncorrelated blocks.
    pub fn concat(&self, other: &Self) -> Self {
        let mut mu = self.mu.clone();
        mu.extend_from_slice(&other.mu);
        Self::new(mu).expect("both inputs are already in range")
    }
}

/// The real part of `e^{-ilθ} g(θ)`; the imaginary part is odd in θ.
fn symbol_integrand(model: &ModelSpec, l: i64, theta: f64) -> f64 {
    let gamma = model.gamma();
    let lambda = model.lambda();
    let (s, c) = theta.sin_cos();
    let re = c - lambda;
    let im = gamma * s;
    let norm = re.hypot(im);
    if norm == 0.0 {
        return 0.0;
    }
    let (sl, cl) = (l as f64 * theta).sin_cos();
    (re * cl - im * sl) / norm
}

/// Fourier coefficient `g_l = (1/2π) ∫ e^{-ilθ} g(θ) dθ`.
///
/// g is real for every l because the symbol satisfies g(-θ) = conj g(θ), so
/// the coefficient reduces to `(1/π) ∫₀^π Re[e^{-ilθ} g(θ)] dθ`. The
/// integral is split at the Fermi point of the isotropic symbol.
pub fn symbol_fourier(model: &ModelSpec, l: i64) -> Result<f64> {
    let mut breaks = vec![0.0];
    if model.is_isotropic() && model.lambda().abs() < 1.0 {
        breaks.push(model.lambda().acos());
    }
    breaks.push(PI);
    let subdivisions = (l.unsigned_abs() as usize) / 2 + 1;
    let gk = GaussKronrod::with_tolerance(SYMBOL_TOLERANCE);
    let integral = gk.integrate_pieces(
        |theta| symbol_integrand(model, l, theta),
        &breaks,
        subdivisions,
    )?;
    Ok(integral.value / PI)
}

/// Precomputed coefficients `g_l` for `|l| ≤ max_offset`. Immutable once
/// built, so one table can serve a whole sweep from many threads.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    model: ModelSpec,
    max_offset: usize,
    coeffs: Vec<f64>,
}

impl SymbolTable {
    pub fn build(model: ModelSpec, max_offset: usize) -> Result<Self> {
        let m = max_offset as i64;
        let coeffs = if model.is_isotropic() {
            // g_{-l} = g_l for the real even symbol.
            let half: Vec<f64> = (0..=m)
                .into_par_iter()
                .map(|l| symbol_fourier(&model, l))
                .collect::<Result<_>>()?;
            (-m..=m).map(|l| half[l.unsigned_abs() as usize]).collect()
        } else {
            (-m..=m)
                .into_par_iter()
                .map(|l| symbol_fourier(&model, l))
                .collect::<Result<_>>()?
        };
        Ok(Self {
            model,
            max_offset,
            coeffs,
        })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn max_offset(&self) -> usize {
        self.max_offset
    }

    /// `g_l`, or `None` outside the table.
    pub fn get(&self, l: i64) -> Option<f64> {
        let idx = l + self.max_offset as i64;
        if idx < 0 {
            return None;
        }
        self.coeffs.get(idx as usize).copied()
    }

    fn block_matrix(&self, block_len: usize) -> DMatrix<f64> {
        DMatrix::from_fn(block_len, block_len, |j, k| {
            self.get(j as i64 - k as i64).expect("offset checked by caller")
        })
    }
}

/// Single-particle spectrum of a block of `block_len` consecutive sites in
/// the infinite chain.
pub fn block_spectrum(model: &ModelSpec, block_len: usize) -> Result<SingleParticleSpectrum> {
    let table = SymbolTable::build(*model, block_len.saturating_sub(1))?;
    block_spectrum_with(&table, block_len)
}

/// As [`block_spectrum`], reusing a table with `max_offset ≥ block_len - 1`.
pub fn block_spectrum_with(
    table: &SymbolTable,
    block_len: usize,
) -> Result<SingleParticleSpectrum> {
    if block_len == 0 {
        return Err(Error::InvalidInput("block length must be >= 1".into()));
    }
    if block_len - 1 > table.max_offset() {
        return Err(Error::InvalidInput(format!(
            "symbol table covers offsets up to {}, block of {block_len} needs {}",
            table.max_offset(),
            block_len - 1
        )));
    }
    let m = table.block_matrix(block_len);
    let mu = if table.model().is_isotropic() {
        symmetric_eigenvalues(m)?
    } else {
        singular_values(m)?
    };
    SingleParticleSpectrum::new(mu)
}

fn singular_values(m: DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows().max(10);
    let svd = SVD::try_new(m, false, false, f64::EPSILON, 200 * n)
        .ok_or_else(|| Error::EigensolveFailure("SVD did not converge".into()))?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Particle-hole check: whether the multiset {μ} equals {-μ} within 1e-10.
///
/// Only meaningful on the isotropic path, where μ carries a sign; for γ > 0
/// the spectrum holds magnitudes and the check returns false.
pub fn spectrum_symmetry_check(spectrum: &SingleParticleSpectrum, model: &ModelSpec) -> bool {
    if !model.is_isotropic() {
        return false;
    }
    let mut up: Vec<f64> = spectrum.mu().to_vec();
    let mut down: Vec<f64> = spectrum.mu().iter().map(|m| -m).collect();
    up.sort_by(f64::total_cmp);
    down.sort_by(f64::total_cmp);
    up.iter().zip(&down).all(|(a, b)| (a - b).abs() <= 1e-10)
}

/// Majorana coupling matrix A of the open chain, `H = (i/4) Σ A_ab a_a a_b`,
/// with Majoranas `a_{2s} = (Π_{r<s} σᶻ_r) σˣ_s`, `a_{2s+1} = (Π_{r<s} σᶻ_r) σʸ_s`.
pub fn majorana_couplings(model: &ModelSpec, n_sites: usize) -> DMatrix<f64> {
    let m = bipartite_couplings(model, n_sites);
    let mut a = DMatrix::zeros(2 * n_sites, 2 * n_sites);
    for j in 0..n_sites {
        for k in 0..n_sites {
            a[(2 * j, 2 * k + 1)] = m[(j, k)];
            a[(2 * k + 1, 2 * j)] = -m[(j, k)];
        }
    }
    a
}

/// The block `M[j,k] = A[2j, 2k+1]`. A only couples even to odd Majoranas:
/// `-λσᶻ = iλ a_{2s} a_{2s+1}`, `-Jx σˣσˣ = iJx a_{2s+1} a_{2s+2}` and
/// `-Jy σʸσʸ = -iJy a_{2s} a_{2s+3}`.
fn bipartite_couplings(model: &ModelSpec, n_sites: usize) -> DMatrix<f64> {
    let (jx, jy) = model.couplings();
    let mut m = DMatrix::zeros(n_sites, n_sites);
    for s in 0..n_sites {
        m[(s, s)] = 2.0 * model.lambda();
    }
    for s in 0..n_sites.saturating_sub(1) {
        m[(s + 1, s)] = -2.0 * jx;
        m[(s, s + 1)] = -2.0 * jy;
    }
    m
}

/// Ground-state Majorana covariance Γ of an open chain, where
/// `⟨a_p a_q⟩ = δ_pq + iΓ_pq`.
///
/// Γ inherits the even/odd structure of A and is stored as the block
/// `W[j,k] = Γ[2j, 2k+1]`, the orthogonal polar factor of M. The global
/// parity `⟨Π σᶻ⟩ = Pf Γ` equals det W.
#[derive(Debug, Clone)]
pub struct FiniteChainGround {
    w: DMatrix<f64>,
    /// Number of exact zero modes; the even-parity state is chosen when > 0.
    pub zero_modes: usize,
    /// Smallest single-particle excitation energy.
    pub gap: f64,
}

impl FiniteChainGround {
    pub fn new(model: &ModelSpec, n_sites: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidInput("chain needs at least one site".into()));
        }
        let m = bipartite_couplings(model, n_sites);
        let svd = SVD::try_new(m, true, true, f64::EPSILON, 200 * n_sites.max(10))
            .ok_or_else(|| Error::EigensolveFailure("SVD of coupling matrix".into()))?;
        let u = svd.u.as_ref().expect("requested");
        let v_t = svd.v_t.as_ref().expect("requested");

        // Zero singular vectors pair up into a valid completion of the
        // polar factor; only the sign of one such pair is left to choose.
        let mut w = u * v_t;
        let zero: Vec<usize> = (0..n_sites)
            .filter(|&i| svd.singular_values[i] < ZERO_MODE_TOLERANCE)
            .collect();
        if let Some(&i) = zero.first() {
            if w.determinant() < 0.0 {
                w -= 2.0 * u.column(i) * v_t.row(i);
            }
        }
        let gap = if zero.is_empty() {
            svd.singular_values.min()
        } else {
            0.0
        };
        Ok(Self {
            w,
            zero_modes: zero.len(),
            gap,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.w.nrows()
    }

    /// The full 2N×2N covariance in site-interleaved ordering.
    pub fn covariance(&self) -> DMatrix<f64> {
        let n = self.n_sites();
        let mut g = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            for k in 0..n {
                g[(2 * j, 2 * k + 1)] = self.w[(j, k)];
                g[(2 * k + 1, 2 * j)] = -self.w[(j, k)];
            }
        }
        g
    }

    /// Spectrum of sites `start .. start + block_len`.
    pub fn block_spectrum(&self, start: usize, block_len: usize) -> Result<SingleParticleSpectrum> {
        if block_len == 0 || start + block_len > self.n_sites() {
            return Err(Error::InvalidInput(format!(
                "block {start}..{} outside chain of {} sites",
                start + block_len,
                self.n_sites()
            )));
        }
        let block = self.w.view((start, start), (block_len, block_len)).into_owned();
        SingleParticleSpectrum::new(singular_values(block)?)
    }
}

/// Spectrum of a block of an open chain of `n_sites`.
pub fn finite_chain_spectrum(
    model: &ModelSpec,
    n_sites: usize,
    start: usize,
    block_len: usize,
) -> Result<SingleParticleSpectrum> {
    FiniteChainGround::new(model, n_sites)?.block_spectrum(start, block_len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pfaffian;
    use crate::spectra::report;

    fn xx_closed_form(lambda: f64, l: i64) -> f64 {
        let kf = lambda.acos();
        if l == 0 {
            (2.0 * kf - PI) / PI
        } else {
            2.0 * (l as f64 * kf).sin() / (PI * l as f64)
        }
    }

    #[test]
    fn xx_coefficients_match_step_symbol() {
        for &lambda in &[0.0, 0.5, -0.3, 0.9] {
            let m = ModelSpec::xx(lambda).unwrap();
            for l in [0i64, 1, 2, 3, 7, 50, 333, -4] {
                let g = symbol_fourier(&m, l).unwrap();
                assert!(
                    (g - xx_closed_form(lambda, l)).abs() < 1e-10,
                    "lambda={lambda} l={l} g={g}"
                );
            }
        }
        let m = ModelSpec::xx(0.0).unwrap();
        assert!(symbol_fourier(&m, 0).unwrap().abs() < 1e-14);
        assert!((symbol_fourier(&m, 1).unwrap() - 2.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn critical_ising_coefficients() {
        // g(θ) = -i e^{-iθ/2} on (0, π) gives g_l = -2/(π(2l+1)).
        let m = ModelSpec::ising(1.0).unwrap();
        for l in [-7i64, -1, 0, 1, 2, 25, 400] {
            let g = symbol_fourier(&m, l).unwrap();
            let exact = -2.0 / (PI * (2 * l + 1) as f64);
            assert!((g - exact).abs() < 1e-10, "l={l} g={g} exact={exact}");
        }
    }

    #[test]
    fn strong_field_is_polarized() {
        let m = ModelSpec::ising(10.0).unwrap();
        let g0 = symbol_fourier(&m, 0).unwrap();
        assert!((g0 + 1.0).abs() < 0.02, "g0={g0}");
        let s = block_spectrum(&m, 4).unwrap();
        assert!(s.mu().iter().all(|m| m.abs() >= 0.99));
    }

    #[test]
    fn gapped_xx_is_a_product_state() {
        let s = block_spectrum(&ModelSpec::xx(2.0).unwrap(), 12).unwrap();
        assert!(s.mu().iter().all(|m| (m.abs() - 1.0).abs() < 1e-10));
        assert!(report(&s).unwrap().entropy < 1e-9);
    }

    #[test]
    fn small_block_examples() {
        let m = ModelSpec::xx(0.0).unwrap();
        let one = block_spectrum(&m, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one.mu()[0].abs() < 1e-14);

        let two = block_spectrum(&m, 2).unwrap();
        assert!((two.mu()[0] - 2.0 / PI).abs() < 1e-12);
        assert!((two.mu()[1] + 2.0 / PI).abs() < 1e-12);
        assert!(block_spectrum(&m, 0).is_err());
    }

    #[test]
    fn table_bounds_are_checked() {
        let m = ModelSpec::xx(0.0).unwrap();
        let t = SymbolTable::build(m, 3).unwrap();
        assert_eq!(t.get(4), None);
        assert_eq!(t.get(-4), None);
        assert_eq!(t.get(-3), t.get(3));
        assert!(block_spectrum_with(&t, 5).is_err());
        assert!(block_spectrum_with(&t, 4).is_ok());
    }

    #[test]
    fn particle_hole_symmetry_at_half_filling() {
        let half = ModelSpec::xx(0.0).unwrap();
        let s = block_spectrum(&half, 10).unwrap();
        assert!(spectrum_symmetry_check(&s, &half));

        let doped = ModelSpec::xx(0.5).unwrap();
        let s = block_spectrum(&doped, 10).unwrap();
        assert!(!spectrum_symmetry_check(&s, &doped));

        let single = SingleParticleSpectrum::new(vec![0.0]).unwrap();
        assert!(spectrum_symmetry_check(&single, &half));
    }

    #[test]
    fn isotropic_spectra_interlace() {
        let m = ModelSpec::xx(0.3).unwrap();
        let table = SymbolTable::build(m, 40).unwrap();
        for len in [5usize, 17, 40] {
            let mut small: Vec<f64> = block_spectrum_with(&table, len).unwrap().mu().to_vec();
            let mut big: Vec<f64> = block_spectrum_with(&table, len + 1).unwrap().mu().to_vec();
            small.sort_by(f64::total_cmp);
            big.sort_by(f64::total_cmp);
            for i in 0..len {
                assert!(big[i] <= small[i] + 1e-12 && small[i] <= big[i + 1] + 1e-12);
            }
        }
    }

    #[test]
    fn entropy_grows_with_block_at_criticality() {
        for m in [ModelSpec::xx(0.0).unwrap(), ModelSpec::ising(1.0).unwrap()] {
            let table = SymbolTable::build(m, 120).unwrap();
            let mut prev = 0.0;
            for len in (1..=121).step_by(8) {
                let s = report(&block_spectrum_with(&table, len).unwrap()).unwrap().entropy;
                assert!(s >= prev - 1e-12, "{m} L={len}");
                prev = s;
            }
        }
    }

    #[test]
    fn spectrum_rejects_out_of_range() {
        assert!(SingleParticleSpectrum::new(vec![1.0 + 1e-11]).is_ok());
        assert!(matches!(
            SingleParticleSpectrum::new(vec![1.0 + 1e-8]),
            Err(Error::SpectrumOutOfRange { .. })
        ));
        let s = SingleParticleSpectrum::new(vec![0.1, -0.9, 0.9, 0.0]).unwrap();
        assert_eq!(s.mu(), &[0.9, -0.9, 0.1, 0.0]);
    }

    #[test]
    fn bulk_of_long_open_chain_matches_infinite_chain() {
        // Deep inside a gapped open chain the block correlations converge
        // exponentially to the translation-invariant ones.
        for (gamma, lambda) in [(1.0, 2.0), (0.5, 1.2), (1.0, 0.5), (1.0, 1.7)] {
            let m = ModelSpec::new(gamma, lambda).unwrap();
            let finite = finite_chain_spectrum(&m, 200, 95, 10).unwrap();
            let infinite = block_spectrum(&m, 10).unwrap();
            for (a, b) in finite.mu().iter().zip(infinite.mu()) {
                assert!((a.abs() - b.abs()).abs() < 1e-9, "{m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn zero_mode_gets_even_parity() {
        // The 8-site XX chain at λ = 1/2 has an exact zero mode at k = π/3.
        let m = ModelSpec::xx(0.5).unwrap();
        let ground = FiniteChainGround::new(&m, 8).unwrap();
        assert_eq!(ground.zero_modes, 1);
        let g = ground.covariance();
        assert!((pfaffian(&g).unwrap() - 1.0).abs() < 1e-10);
        let orth = &g * g.transpose() - DMatrix::identity(16, 16);
        assert!(orth.abs().max() < 1e-10);
    }

    #[test]
    fn covariance_is_polar_factor_of_couplings() {
        for (gamma, lambda) in [(0.0, 0.3), (1.0, 1.0), (0.5, 1.2), (1.0, 0.5)] {
            let m = ModelSpec::new(gamma, lambda).unwrap();
            let a = majorana_couplings(&m, 9);
            let g = FiniteChainGround::new(&m, 9).unwrap().covariance();
            // A = Γ P with P = Γᵀ A symmetric positive semi-definite.
            let p = g.transpose() * &a;
            assert!((&p - p.transpose()).abs().max() < 1e-12);
            assert!(p.symmetric_eigenvalues().min() > -1e-12);
            assert!((&g * g.transpose() - DMatrix::identity(18, 18)).abs().max() < 1e-12);
        }
    }

    #[test]
    fn covariance_of_polarized_chain() {
        // λ → ∞ favors all spins up: Γ_{2s,2s+1} = 1.
        let m = ModelSpec::ising(1e6).unwrap();
        let g = FiniteChainGround::new(&m, 3).unwrap();
        for s in 0..3 {
            assert!((g.covariance()[(2 * s, 2 * s + 1)] - 1.0).abs() < 1e-5);
        }
    }
}
