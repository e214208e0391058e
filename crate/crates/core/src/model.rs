//! XY-family spin chains and their criticality.
//!
//! The Hamiltonian convention throughout the crate is
//!
//! ```text
//! H = -Σ_l [ (1+γ)/2 σˣ_l σˣ_{l+1} + (1-γ)/2 σʸ_l σʸ_{l+1} ] - λ Σ_l σᶻ_l
//! ```
//!
//! with γ ≥ 0 the anisotropy and λ the transverse field. γ = 0 is the XX
//! chain and γ = 1 the transverse-field Ising chain.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Xy,
    Xx,
    Ising,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Xy => "XY",
            Family::Xx => "XX",
            Family::Ising => "Ising",
        };
        f.write_str(s)
    }
}

/// Couplings of an XY chain. The family tag is derived from γ, so it can
/// never disagree with the couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSpec {
    gamma: f64,
    lambda: f64,
}

impl ModelSpec {
    pub fn new(gamma: f64, lambda: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidModel(format!(
                "anisotropy must be finite and >= 0, got {gamma}"
            )));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidModel(format!(
                "field must be finite, got {lambda}"
            )));
        }
        Ok(Self { gamma, lambda })
    }

    pub fn xx(lambda: f64) -> Result<Self> {
        Self::new(0.0, lambda)
    }

    pub fn ising(lambda: f64) -> Result<Self> {
        Self::new(1.0, lambda)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn family(&self) -> Family {
        if self.gamma == 0.0 {
            Family::Xx
        } else if self.gamma == 1.0 {
            Family::Ising
        } else {
            Family::Xy
        }
    }

    pub fn is_isotropic(&self) -> bool {
        self.gamma == 0.0
    }

    /// σˣσˣ and σʸσʸ bond strengths.
    pub fn couplings(&self) -> (f64, f64) {
        ((1.0 + self.gamma) / 2.0, (1.0 - self.gamma) / 2.0)
    }

    pub fn classify(&self) -> CriticalityClass {
        let field = self.lambda.abs();
        if self.gamma == 0.0 && field < 1.0 {
            CriticalityClass::critical(Universality::FreeFermionC1)
        } else if self.gamma > 0.0 && field == 1.0 {
            CriticalityClass::critical(Universality::IsingCHalf)
        } else {
            CriticalityClass::gapped()
        }
    }

    /// Elliptic modulus x of the off-critical half-chain spectrum.
    ///
    /// The chain is symmetric under λ → -λ, so the branch is chosen by |λ|:
    ///
    /// ```text
    /// x = √(λ²+γ²-1)/γ   for |λ| < 1
    /// x = γ/√(λ²+γ²-1)   for |λ| > 1
    /// ```
    ///
    /// Only defined outside the circle λ²+γ² = 1.
    pub fn x_parameter(&self) -> Result<f64> {
        let field = self.lambda.abs();
        if field == 1.0 {
            return Err(Error::CriticalPoint {
                gamma: self.gamma,
                lambda: self.lambda,
            });
        }
        if self.gamma == 0.0 {
            return Err(Error::ZeroAnisotropy);
        }
        let radius2 = field * field + self.gamma * self.gamma - 1.0;
        if radius2 <= 0.0 {
            return Err(Error::BmCircleViolation {
                gamma: self.gamma,
                lambda: self.lambda,
            });
        }
        let root = radius2.sqrt();
        let x = if field < 1.0 {
            root / self.gamma
        } else {
            self.gamma / root
        };
        Ok(x)
    }

    /// Half the number of jumps of the isotropic symbol sign(cos θ - λ)
    /// over one period.
    pub fn symbol_discontinuity_count(&self) -> Result<u32> {
        if !self.is_isotropic() {
            return Err(Error::NotIsotropic { gamma: self.gamma });
        }
        // cos θ - λ changes sign twice per period iff |λ| < 1; at |λ| = 1 it
        // only touches zero.
        Ok(if self.lambda.abs() < 1.0 { 1 } else { 0 })
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (gamma={}, lambda={})",
            self.family(),
            self.gamma,
            self.lambda
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Universality {
    FreeFermionC1,
    IsingCHalf,
    Gapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalityClass {
    pub is_critical: bool,
    pub central_charge: Option<f64>,
    pub universality: Universality,
}

impl CriticalityClass {
    fn critical(universality: Universality) -> Self {
        let c = match universality {
            Universality::FreeFermionC1 => 1.0,
            Universality::IsingCHalf => 0.5,
            Universality::Gapped => unreachable!("gapped class has no central charge"),
        };
        Self {
            is_critical: true,
            central_charge: Some(c),
            universality,
        }
    }

    fn gapped() -> Self {
        Self {
            is_critical: false,
            central_charge: None,
            universality: Universality::Gapped,
        }
    }
}
