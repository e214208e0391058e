//! The gapped XY chain: elliptic level spacing of the half-chain
//! entanglement Hamiltonian and closed forms for -ln λ1 in terms of it.
//!
//! The reduced state of half a long chain is thermal,
//! `ρ ∝ exp(-Σ_k ε_k n_k)`, with an equally spaced ladder whose spacing ε is
//! a ratio of complete elliptic integrals. Two ladders occur:
//!
//! ```text
//! even:  ε_k = 2kε      (k = 0, 1, ...; the k = 0 level is a zero mode)
//! odd:   ε_k = (2k+1)ε
//! ```
//!
//! Each closed form below is the small-ε expansion of one ladder sum. The
//! remainders are known exactly by modular duality:
//!
//! ```text
//! Σ ln(1+e^{-(2k+1)ε}) = π²/(24ε) - ε/24        + Σ ln(1+e^{-(2k+1)π²/ε})
//! Σ ln(1+e^{-2kε})     = π²/(24ε) + ln2/2 + ε/12 + Σ ln(1-e^{-(2k+1)π²/ε})
//! ```

use std::f64::consts::{LN_2, PI};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::corr::FiniteChainGround;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::spectra::{report, EntanglementReport};

/// Complete elliptic integral of the first kind in the modulus convention,
/// `K(x) = ∫₀^{π/2} dθ / √(1 - x² sin²θ)`, via the arithmetic-geometric mean.
pub fn elliptic_k(x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "elliptic modulus must lie in [0, 1), got {x}"
        )));
    }
    // Complementary modulus, factored to keep precision as x → 1.
    Ok(k_from_complement(((1.0 - x) * (1.0 + x)).sqrt()))
}

/// `K` as a function of the complementary modulus: `π / (2 AGM(1, x'))`.
fn k_from_complement(complement: f64) -> f64 {
    let mut a = 1.0;
    let mut b = complement;
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    PI / (2.0 * a)
}

/// `π K(√(1-x²)) / K(x)`.
pub fn epsilon_from_x(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x must lie in (0, 1), got {x}")));
    }
    // The complementary modulus of √(1-x²) is x itself.
    Ok(PI * k_from_complement(x) / elliptic_k(x)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    #[serde(rename = "lambda_below_1")]
    LambdaBelow1,
    #[serde(rename = "lambda_above_1")]
    LambdaAbove1,
}

impl Branch {
    /// Ladder of the half-chain spectrum in this phase.
    pub fn ladder(self) -> Ladder {
        match self {
            Branch::LambdaBelow1 => Ladder::Even,
            Branch::LambdaAbove1 => Ladder::Odd,
        }
    }

    /// Whether a zero level counts ln 2 by default: the ordered phase has a
    /// twofold quasi-degenerate ground state.
    pub fn default_zero_mode_policy(self) -> ZeroModePolicy {
        match self {
            Branch::LambdaBelow1 => ZeroModePolicy::Include,
            Branch::LambdaAbove1 => ZeroModePolicy::Exclude,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::LambdaBelow1 => "lambda_below_1",
            Branch::LambdaAbove1 => "lambda_above_1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ladder {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroModePolicy {
    Include,
    Exclude,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffCriticalPoint {
    pub gamma: f64,
    pub lambda: f64,
    pub x: f64,
    pub epsilon: f64,
    pub branch: Branch,
}

pub fn epsilon_of(model: &ModelSpec) -> Result<OffCriticalPoint> {
    let x = model.x_parameter()?;
    let branch = if model.lambda().abs() < 1.0 {
        Branch::LambdaBelow1
    } else {
        Branch::LambdaAbove1
    };
    Ok(OffCriticalPoint {
        gamma: model.gamma(),
        lambda: model.lambda(),
        x,
        epsilon: epsilon_from_x(x)?,
        branch,
    })
}

/// Smallest k_max with the ladder tail below 1e-16 for any ε > 0.
pub fn default_k_max(epsilon: f64) -> usize {
    (40.0 / epsilon).ceil() as usize + 20
}

/// `[ε_0, ..., ε_{k_max}]` on the given ladder.
pub fn ladder_levels(epsilon: f64, ladder: Ladder, k_max: usize) -> Vec<f64> {
    (0..=k_max)
        .map(|k| match ladder {
            Ladder::Even => 2.0 * k as f64 * epsilon,
            Ladder::Odd => (2 * k + 1) as f64 * epsilon,
        })
        .collect()
}

/// Levels of the half-chain spectrum in the point's phase.
pub fn half_chain_levels(point: &OffCriticalPoint, k_max: usize) -> Vec<f64> {
    ladder_levels(point.epsilon, point.branch.ladder(), k_max)
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if let Some(bad) = levels.iter().find(|e| !(**e >= 0.0)) {
        return Err(Error::Domain(format!("levels must be >= 0, got {bad}")));
    }
    // A ladder whose last level still carries weight was cut off too early.
    if levels.len() >= 2 {
        let last = levels[levels.len() - 1];
        let spacing = last - levels[levels.len() - 2];
        let tail = (-last).exp();
        if spacing > 0.0 && tail >= 1e-16 {
            return Err(Error::Truncation { tail });
        }
    }
    Ok(())
}

/// `-ln λ1 = Σ_k ln(1 + e^{-ε_k})` for a thermal free-fermion state.
pub fn log_inv_lambda1_sum(levels: &[f64], policy: ZeroModePolicy) -> Result<f64> {
    check_levels(levels)?;
    Ok(levels
        .iter()
        .filter(|&&e| e > 0.0 || policy == ZeroModePolicy::Include)
        .map(|&e| (-e).exp().ln_1p())
        .sum())
}

/// Von Neumann entropy of the same thermal state.
pub fn entropy_sum(levels: &[f64], policy: ZeroModePolicy) -> Result<f64> {
    check_levels(levels)?;
    Ok(levels
        .iter()
        .filter(|&&e| e > 0.0 || policy == ZeroModePolicy::Include)
        .map(|&e| {
            let w = (-e).exp();
            w.ln_1p() + e * w / (1.0 + w)
        })
        .sum())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Domain(format!("epsilon must be > 0, got {epsilon}")));
    }
    Ok(())
}

/// The closed form for -ln λ1 labelled with `branch`.
pub fn log_inv_lambda1_closed(epsilon: f64, branch: Branch) -> Result<f64> {
    check_epsilon(epsilon)?;
    let base = PI * PI / (24.0 * epsilon);
    Ok(match branch {
        Branch::LambdaBelow1 => base - epsilon / 24.0,
        Branch::LambdaAbove1 => base + LN_2 / 2.0 + epsilon / 12.0,
    })
}

/// `(1 - ε ∂_ε)` applied analytically to [`log_inv_lambda1_closed`].
pub fn entropy_closed(epsilon: f64, branch: Branch) -> Result<f64> {
    check_epsilon(epsilon)?;
    let base = PI * PI / (12.0 * epsilon);
    Ok(match branch {
        Branch::LambdaBelow1 => base,
        Branch::LambdaAbove1 => base + LN_2 / 2.0,
    })
}

/// The ladder sum whose small-ε expansion is the closed form of `branch`.
///
/// This pairing is the opposite of [`Branch::ladder`]: the closed form
/// labelled λ < 1 expands the odd ladder, the one labelled λ > 1 the even
/// ladder with its zero level.
pub fn expansion_ladder(branch: Branch) -> (Ladder, ZeroModePolicy) {
    match branch {
        Branch::LambdaBelow1 => (Ladder::Odd, ZeroModePolicy::Exclude),
        Branch::LambdaAbove1 => (Ladder::Even, ZeroModePolicy::Include),
    }
}

/// Exact remainder `Σ ladder - closed form` from modular duality.
pub fn closed_form_remainder(epsilon: f64, branch: Branch) -> Result<f64> {
    check_epsilon(epsilon)?;
    let dual = PI * PI / epsilon;
    let terms = (0..)
        .map(|k| (-((2 * k + 1) as f64) * dual).exp())
        .take_while(|w| *w > 1e-300);
    Ok(match branch {
        Branch::LambdaBelow1 => terms.map(f64::ln_1p).sum(),
        Branch::LambdaAbove1 => terms.map(|w| (-w).ln_1p()).sum(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormReport {
    pub epsilon: f64,
    pub branch: Branch,
    pub log_inv_lambda1_closed: f64,
    /// Direct sum over the ladder the closed form expands.
    pub log_inv_lambda1_sum: f64,
    pub entropy_closed: f64,
    pub entropy_sum: f64,
    /// `log_inv_lambda1_closed / entropy_closed`.
    pub ratio: f64,
    /// Direct sum over the ladder of the branch's phase.
    pub log_inv_lambda1_phase: f64,
    pub entropy_phase: f64,
}

pub fn closed_forms_at(epsilon: f64, branch: Branch) -> Result<ClosedFormReport> {
    let closed = log_inv_lambda1_closed(epsilon, branch)?;
    let s_closed = entropy_closed(epsilon, branch)?;
    let k_max = default_k_max(epsilon);

    let (ladder, policy) = expansion_ladder(branch);
    let paired = ladder_levels(epsilon, ladder, k_max);
    let phase = ladder_levels(epsilon, branch.ladder(), k_max);
    let phase_policy = branch.default_zero_mode_policy();

    Ok(ClosedFormReport {
        epsilon,
        branch,
        log_inv_lambda1_closed: closed,
        log_inv_lambda1_sum: log_inv_lambda1_sum(&paired, policy)?,
        entropy_closed: s_closed,
        entropy_sum: entropy_sum(&paired, policy)?,
        ratio: closed / s_closed,
        log_inv_lambda1_phase: log_inv_lambda1_sum(&phase, phase_policy)?,
        entropy_phase: entropy_sum(&phase, phase_policy)?,
    })
}

pub fn closed_forms(point: &OffCriticalPoint) -> Result<ClosedFormReport> {
    closed_forms_at(point.epsilon, point.branch)
}

/// Relative mismatch between [`entropy_closed`] and `(1 - ε∂_ε)` applied to
/// [`log_inv_lambda1_closed`] by central differences with step 1e-6·ε.
pub fn entropy_relation_residual(epsilon: f64, branch: Branch) -> Result<f64> {
    let h = 1e-6 * epsilon;
    let f = log_inv_lambda1_closed(epsilon, branch)?;
    let derivative = (log_inv_lambda1_closed(epsilon + h, branch)?
        - log_inv_lambda1_closed(epsilon - h, branch)?)
        / (2.0 * h);
    let s = entropy_closed(epsilon, branch)?;
    Ok(((f - epsilon * derivative) - s).abs() / s.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioPoint {
    pub lambda: f64,
    pub epsilon: f64,
    /// `-ln λ1 / S` from the direct sums over the phase's ladder.
    pub ratio: f64,
    /// The same ratio from the closed forms of the branch.
    pub ratio_closed: f64,
}

/// `-ln λ1 / S` along a line of fixed γ. Points whose entropy is below
/// 1e-12 (deep in the polarized phase) are dropped.
pub fn ratio_limit_scan(gamma: f64, lambdas: &[f64]) -> Result<Vec<RatioPoint>> {
    let points: Vec<Option<RatioPoint>> = lambdas
        .par_iter()
        .map(|&lambda| {
            let point = epsilon_of(&ModelSpec::new(gamma, lambda)?)?;
            let r = closed_forms(&point)?;
            if r.entropy_phase < 1e-12 {
                return Ok(None);
            }
            Ok(Some(RatioPoint {
                lambda,
                epsilon: point.epsilon,
                ratio: r.log_inv_lambda1_phase / r.entropy_phase,
                ratio_closed: r.ratio,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(points.into_iter().flatten().collect())
}

/// Entanglement of the left half of an open chain of `2 * half_len` sites,
/// a block with a single boundary.
pub fn half_chain_report(model: &ModelSpec, half_len: usize) -> Result<EntanglementReport> {
    let ground = FiniteChainGround::new(model, 2 * half_len)?;
    report(&ground.block_spectrum(0, half_len)?)
}

/// Which ladder and which closed form describe a lattice half chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchMatch {
    pub point: OffCriticalPoint,
    pub pipeline: f64,
    pub even_ladder: f64,
    pub odd_ladder: f64,
    pub closed_below: f64,
    pub closed_above: f64,
    /// Ladder whose sum reproduces the pipeline within the tolerance.
    pub matched_ladder: Option<Ladder>,
    /// Closed form within the tolerance of the pipeline, if any.
    pub matched_closed_form: Option<Branch>,
}

fn nearest<T>(target: f64, tolerance: f64, candidates: [(f64, T); 2]) -> Option<T> {
    candidates
        .into_iter()
        .filter(|(v, _)| (v - target).abs() <= tolerance)
        .min_by(|a, b| (a.0 - target).abs().total_cmp(&(b.0 - target).abs()))
        .map(|(_, tag)| tag)
}

pub fn match_branch(model: &ModelSpec, half_len: usize, tolerance: f64) -> Result<BranchMatch> {
    let point = epsilon_of(model)?;
    let pipeline = half_chain_report(model, half_len)?.log_inv_lambda1;
    let k_max = default_k_max(point.epsilon);
    let even = log_inv_lambda1_sum(
        &ladder_levels(point.epsilon, Ladder::Even, k_max),
        ZeroModePolicy::Include,
    )?;
    let odd = log_inv_lambda1_sum(
        &ladder_levels(point.epsilon, Ladder::Odd, k_max),
        ZeroModePolicy::Exclude,
    )?;
    let below = log_inv_lambda1_closed(point.epsilon, Branch::LambdaBelow1)?;
    let above = log_inv_lambda1_closed(point.epsilon, Branch::LambdaAbove1)?;

    Ok(BranchMatch {
        point,
        pipeline,
        even_ladder: even,
        odd_ladder: odd,
        closed_below: below,
        closed_above: above,
        matched_ladder: nearest(pipeline, tolerance, [(even, Ladder::Even), (odd, Ladder::Odd)]),
        matched_closed_form: nearest(
            pipeline,
            tolerance,
            [(below, Branch::LambdaBelow1), (above, Branch::LambdaAbove1)],
        ),
    })
}
