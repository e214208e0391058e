//! Entanglement quantities of a quasi-free reduced state.
//!
//! A block with single-particle spectrum μ_1..μ_L has a reduced density
//! matrix that factorizes into L independent modes with occupation
//! probabilities (1 ± |μ_l|)/2. Everything here is a mode-wise sum.

use serde::Serialize;

use crate::corr::SingleParticleSpectrum;
use crate::error::{Error, Result};
use crate::linalg::compensated_sum;

const DOMAIN_SLACK: f64 = 1e-12;

fn check_domain(mu: f64) -> Result<f64> {
    if !mu.is_finite() || mu.abs() > 1.0 + DOMAIN_SLACK {
        return Err(Error::Domain(format!("|mu| = {} exceeds 1", mu.abs())));
    }
    Ok(mu.abs().min(1.0))
}

/// Binary entropy of one mode, `-p ln p - q ln q` with p,q = (1 ± μ)/2.
pub fn f_entropy(mu: f64) -> Result<f64> {
    let m = check_domain(mu)?;
    let p = 0.5 * (1.0 + m);
    let q = 0.5 * (1.0 - m);
    if q == 0.0 {
        return Ok(0.0);
    }
    // ln p = ln(1 - q) keeps precision when p is close to 1.
    Ok(-p * (-q).ln_1p() - q * q.ln())
}

/// One mode's contribution to -ln λ1: `-ln((1 + |μ|)/2)`.
pub fn f_single(mu: f64) -> Result<f64> {
    let m = check_domain(mu)?;
    Ok(std::f64::consts::LN_2 - m.ln_1p())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementReport {
    #[serde(rename = "L")]
    pub block_len: usize,
    pub entropy: f64,
    pub log_inv_lambda1: f64,
    pub e1_floored: f64,
    pub lambda1: f64,
}

impl EntanglementReport {
    /// Ratio S / (-ln λ1).
    pub fn ratio(&self) -> Result<f64> {
        if self.log_inv_lambda1 == 0.0 {
            return Err(Error::DivisionByZero {
                block_len: self.block_len,
            });
        }
        Ok(self.entropy / self.log_inv_lambda1)
    }
}

/// `ln⌊1/λ1⌋`, consistent with the supplied λ1: the result is 0 whenever
/// λ1 > 1/2 and never exceeds `ln(1/λ1)`.
pub fn floored_single_copy(lambda1: f64, log_inv_lambda1: f64) -> f64 {
    // Beyond 2^52 the floor is below the resolution of f64.
    if log_inv_lambda1 > 36.0 {
        return log_inv_lambda1;
    }
    let inverse = 1.0 / lambda1;
    let mut n = inverse.floor();
    // 1/λ1 may round just below an integer n+1 even though (n+1)·λ1 ≤ 1.
    if (n + 1.0) * lambda1 <= 1.0 {
        n += 1.0;
    }
    if n <= 1.0 {
        0.0
    } else {
        n.ln().min(log_inv_lambda1)
    }
}

/// Entropy, -ln λ1, λ1 and the floored single-copy entanglement of a block.
pub fn report(spectrum: &SingleParticleSpectrum) -> Result<EntanglementReport> {
    // The spectrum is stored in descending |μ| order, so the compensated
    // sums accumulate small terms after large ones.
    let mu = spectrum.mu();
    let entropy = compensated_sum(mu.iter().map(|&m| f_entropy(m)).collect::<Result<Vec<_>>>()?);
    let log_inv_lambda1 =
        compensated_sum(mu.iter().map(|&m| f_single(m)).collect::<Result<Vec<_>>>()?);

    let product: f64 = mu.iter().map(|m| 0.5 * (1.0 + m.abs())).product();
    let lambda1 = if product > 1e-300 {
        product
    } else {
        (-log_inv_lambda1).exp()
    };

    Ok(EntanglementReport {
        block_len: spectrum.len(),
        entropy,
        log_inv_lambda1,
        e1_floored: floored_single_copy(lambda1, log_inv_lambda1),
        lambda1,
    })
}
