//! Conformal scaling forms and least-squares extraction of the central
//! charge from block-size sweeps.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::GaussKronrod;
use crate::spectra::EntanglementReport;

/// Cutoff in the rapidity u where x = tanh u; the integrands decay like
/// u·e^{-2u}, so the neglected tail is far below 1e-15.
const RAPIDITY_CUTOFF: f64 = 20.0;

/// CFT predictions at one block length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CftPrediction {
    pub c: f64,
    #[serde(rename = "L")]
    pub block_len: usize,
    pub e1_pred: f64,
    pub entropy_slope: f64,
    pub e1_slope: f64,
    pub invlog_coeff: f64,
}

impl CftPrediction {
    pub fn new(c: f64, block_len: usize) -> Result<Self> {
        Ok(Self {
            c,
            block_len,
            e1_pred: e1_prediction(c, block_len)?,
            entropy_slope: c / 3.0,
            e1_slope: c / 6.0,
            invlog_coeff: -c * PI * PI / 6.0,
        })
    }
}

fn check_prediction_args(c: f64, block_len: usize) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("central charge must be > 0, got {c}")));
    }
    if block_len < 2 {
        return Err(Error::Domain(format!(
            "block length must be >= 2, got {block_len}"
        )));
    }
    Ok((block_len as f64).ln())
}

/// `(c/6)(ln L - π²/ln L)`.
pub fn e1_prediction(c: f64, block_len: usize) -> Result<f64> {
    let log_l = check_prediction_args(c, block_len)?;
    Ok(c / 6.0 * (log_l - PI * PI / log_l))
}

/// `(c/3) ln L + k` with a non-universal constant k.
pub fn entropy_prediction(c: f64, block_len: usize, k: f64) -> Result<f64> {
    let log_l = check_prediction_args(c, block_len)?;
    Ok(c / 3.0 * log_l + k)
}

/// Log-L prefactors of S and -ln λ1 per pair of symbol discontinuities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherHartwigIntegrals {
    pub i_entropy: f64,
    pub i_single: f64,
    /// Quadrature error bound on each prefactor.
    pub abs_error: f64,
}

/// `(1/π²) ∫_{-1}^{1} f(x)/(1-x²) dx` evaluated as `(1/π²) ∫ f(tanh u) du`,
/// for f even in x and given as a function of u ≥ 0.
pub fn weighted_log_integral<F: Fn(f64) -> f64>(f_of_u: F) -> Result<(f64, f64)> {
    let gk = GaussKronrod::with_tolerance(1e-13);
    let half = gk.integrate(f_of_u, 0.0, RAPIDITY_CUTOFF)?;
    Ok((2.0 * half.value / (PI * PI), 2.0 * half.abs_error / (PI * PI)))
}

/// Binary entropy of the mode with |μ| = tanh u, written in u to stay
/// accurate as μ → 1.
fn entropy_of_rapidity(u: f64) -> f64 {
    let w = (-2.0 * u).exp();
    let q = w / (1.0 + w);
    w.ln_1p() + 2.0 * u * q
}

/// `-ln((1 + tanh u)/2)`.
fn single_of_rapidity(u: f64) -> f64 {
    (-2.0 * u).exp().ln_1p()
}

/// The two prefactor integrals, each carrying the weight 2/π² of one
/// Fermi-point pair (two jump discontinuities of the symbol).
pub fn fisher_hartwig_integrals() -> Result<FisherHartwigIntegrals> {
    let (s, es) = weighted_log_integral(entropy_of_rapidity)?;
    let (e, ee) = weighted_log_integral(single_of_rapidity)?;
    Ok(FisherHartwigIntegrals {
        i_entropy: 2.0 * s,
        i_single: 2.0 * e,
        abs_error: 2.0 * es.max(ee),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisTerm {
    Log,
    Const,
    InvLog,
}

impl BasisTerm {
    fn eval(self, log_l: f64) -> f64 {
        match self {
            BasisTerm::Log => log_l,
            BasisTerm::Const => 1.0,
            BasisTerm::InvLog => 1.0 / log_l,
        }
    }
}

impl fmt::Display for BasisTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisTerm::Log => "log",
            BasisTerm::Const => "const",
            BasisTerm::InvLog => "invlog",
        })
    }
}

impl FromStr for BasisTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "log" | "logl" => Ok(BasisTerm::Log),
            "const" | "1" => Ok(BasisTerm::Const),
            "invlog" | "invlogl" => Ok(BasisTerm::InvLog),
            other => Err(Error::InvalidInput(format!("unknown basis term '{other}'"))),
        }
    }
}

/// Which column of a sweep is being fitted; fixes the slope-to-c factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Entropy,
    LogInvLambda1,
}

impl Quantity {
    pub fn slope_to_c(self) -> f64 {
        match self {
            Quantity::Entropy => 3.0,
            Quantity::LogInvLambda1 => 6.0,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::Entropy => "entropy",
            Quantity::LogInvLambda1 => "log_inv_lambda1",
        })
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "entropy" => Ok(Quantity::Entropy),
            "log_inv_lambda1" => Ok(Quantity::LogInvLambda1),
            other => Err(Error::InvalidInput(format!(
                "cannot fit quantity '{other}'; use entropy or log_inv_lambda1"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub quantity: Quantity,
    pub basis: Vec<BasisTerm>,
    pub coef_log: f64,
    pub coef_const: Option<f64>,
    pub coef_invlog: Option<f64>,
    pub residual_rms: f64,
    pub estimated_c: f64,
    pub n_points: usize,
    pub l_min: f64,
    pub l_max: f64,
}

/// Unweighted least squares of `value ≈ Σ coef·term(ln L)`.
///
/// The basis must contain the log term. Columns are scaled to unit norm
/// before the SVD solve, and a condition number above 1e12 is reported as
/// a singular design.
pub fn fit_scaling(
    points: &[(f64, f64)],
    basis: &[BasisTerm],
    quantity: Quantity,
) -> Result<ScalingFit> {
    let mut terms: Vec<BasisTerm> = Vec::new();
    for t in basis {
        if !terms.contains(t) {
            terms.push(*t);
        }
    }
    terms.sort_by_key(|t| *t as u8);
    if !terms.contains(&BasisTerm::Log) {
        return Err(Error::InvalidInput("fit basis must include the log term".into()));
    }
    let needed = terms.len() + 2;
    if points.len() < needed {
        return Err(Error::InsufficientPoints {
            needed,
            got: points.len(),
        });
    }
    for &(l, v) in points {
        if !(l >= 2.0) || !l.is_finite() || !v.is_finite() {
            return Err(Error::InvalidInput(format!(
                "fit points need finite values and L >= 2, got ({l}, {v})"
            )));
        }
    }
    let mut ls: Vec<f64> = points.iter().map(|p| p.0).collect();
    ls.sort_by(f64::total_cmp);
    if ls.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("fit points need distinct L".into()));
    }

    let n = points.len();
    let k = terms.len();
    let mut design = DMatrix::from_fn(n, k, |i, j| terms[j].eval(points[i].0.ln()));
    let rhs = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let scales: Vec<f64> = (0..k).map(|j| design.column(j).norm()).collect();
    for (j, s) in scales.iter().enumerate() {
        design.column_mut(j).unscale_mut(*s);
    }

    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::SingularDesign);
    }
    let scaled = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::EigensolveFailure(e.to_string()))?;
    let residual = &design * &scaled - &rhs;
    let residual_rms = (residual.norm_squared() / n as f64).sqrt();

    let coef = |term: BasisTerm| {
        terms
            .iter()
            .position(|t| *t == term)
            .map(|j| scaled[j] / scales[j])
    };
    let coef_log = coef(BasisTerm::Log).expect("log term checked above");
    let coef_const = coef(BasisTerm::Const);
    let coef_invlog = coef(BasisTerm::InvLog);
    Ok(ScalingFit {
        quantity,
        basis: terms,
        coef_log,
        coef_const,
        coef_invlog,
        residual_rms,
        estimated_c: quantity.slope_to_c() * coef_log,
        n_points: n,
        l_min: ls[0],
        l_max: ls[n - 1],
    })
}

/// `(L, S / -ln λ1)` for each report.
pub fn ratio_trend(reports: &[EntanglementReport]) -> Result<Vec<(usize, f64)>> {
    if reports.windows(2).any(|w| w[0].block_len >= w[1].block_len) {
        return Err(Error::InvalidInput(
            "reports must be sorted by strictly increasing L".into(),
        ));
    }
    reports.iter().map(|r| Ok((r.block_len, r.ratio()?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{f_entropy, f_single};
    use proptest::prelude::*;

    const ALL: [BasisTerm; 3] = [BasisTerm::Log, BasisTerm::Const, BasisTerm::InvLog];

    #[test]
    fn e1_prediction_examples() {
        let root = PI.exp();
        assert!(e1_prediction(1.0, root.floor() as usize).unwrap() < 0.0);
        assert!(e1_prediction(1.0, root.ceil() as usize).unwrap() > 0.0);
        assert!((e1_prediction(0.5, 100).unwrap() - 0.20516).abs() < 1e-5);
        assert!((e1_prediction(1.0, 1000).unwrap() - 0.91317).abs() < 1e-5);
        assert!(e1_prediction(1.0, 1).is_err());
        assert!(e1_prediction(0.0, 10).is_err());
    }

    #[test]
    fn entropy_prediction_examples() {
        let l = 3f64.exp().round() as usize;
        assert!((entropy_prediction(1.0, l, 0.0).unwrap() - 1.0).abs() < 0.01);
        assert!((entropy_prediction(0.5, 100, 0.0).unwrap() - 0.76753).abs() < 1e-5);
        assert!(entropy_prediction(1.0, 0, 0.0).is_err());
    }

    #[test]
    fn predicted_ratio_approaches_two() {
        // S/E1 = 2/(1 - π²/ln²L) for k = 0: about 2.109 at L = 1e6 and
        // still 0.5% above 2 at L = 1e19.
        for l in [1_000usize, 1_000_000, 10_000_000_000_000_000_000] {
            let log_l = (l as f64).ln();
            let r = entropy_prediction(1.0, l, 0.0).unwrap() / e1_prediction(1.0, l).unwrap();
            let exact = 2.0 / (1.0 - PI * PI / (log_l * log_l));
            assert!((r - exact).abs() < 1e-12, "L={l} r={r}");
        }
        let far = 10_000_000_000_000_000_000usize;
        let r = entropy_prediction(1.0, far, 0.0).unwrap() / e1_prediction(1.0, far).unwrap();
        assert!(r > 2.0 && r - 2.0 < 0.011, "r={r}");
    }

    #[test]
    fn slopes_halve_exactly() {
        for k in 1..=40 {
            let c = 0.05 * k as f64;
            let p = CftPrediction::new(c, 64).unwrap();
            assert_eq!(p.entropy_slope, 2.0 * p.e1_slope);
            assert_eq!(p.invlog_coeff, -c * PI * PI / 6.0);
        }
    }

    #[test]
    fn prediction_gap_is_positive() {
        for c in [0.5, 1.0, 2.0] {
            for l in 3..2000 {
                let gap = entropy_prediction(c, l, 0.0).unwrap() - e1_prediction(c, l).unwrap();
                assert!(gap > 0.0);
            }
        }
    }

    /// Composite Simpson in u on [-U, U] with an even number of panels.
    fn simpson(f: impl Fn(f64) -> f64, half_width: f64, panels: usize) -> f64 {
        let h = 2.0 * half_width / panels as f64;
        let mut s = f(-half_width) + f(half_width);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(-half_width + h * i as f64);
        }
        s * h / 3.0
    }

    #[test]
    fn raw_integrals_against_simpson() {
        let (s, _) = weighted_log_integral(entropy_of_rapidity).unwrap();
        let (e, _) = weighted_log_integral(single_of_rapidity).unwrap();
        let simpson_s = simpson(|u| f_entropy(u.tanh()).unwrap(), 20.0, 40_000) / (PI * PI);
        let simpson_e = simpson(|u| f_single(u.tanh()).unwrap(), 20.0, 40_000) / (PI * PI);
        assert!((s - simpson_s).abs() < 1e-9, "{s} vs {simpson_s}");
        assert!((e - simpson_e).abs() < 1e-9, "{e} vs {simpson_e}");
        // ∫ ln(1+e^{-2|u|}) du = π²/12
        assert!((e - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn prefactor_integrals() {
        let fh = fisher_hartwig_integrals().unwrap();
        assert!((fh.i_entropy - 1.0 / 3.0).abs() < 1e-8);
        assert!((fh.i_single - 1.0 / 6.0).abs() < 1e-8);
        assert!((fh.i_entropy / fh.i_single - 2.0).abs() < 1e-7);
        assert!(fh.abs_error < 1e-8);
    }

    #[test]
    fn rapidity_forms_match_mode_functions() {
        for k in 0..200 {
            let u = 0.05 * k as f64;
            let mu = u.tanh();
            assert!((entropy_of_rapidity(u) - f_entropy(mu).unwrap()).abs() < 1e-13);
            assert!((single_of_rapidity(u) - f_single(mu).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn fit_round_trips_entropy_prediction() {
        let pts: Vec<(f64, f64)> = (5..=10)
            .map(|p| {
                let l = 1usize << p;
                (l as f64, entropy_prediction(1.0, l, 0.7).unwrap())
            })
            .collect();
        let fit = fit_scaling(&pts, &[BasisTerm::Log, BasisTerm::Const], Quantity::Entropy).unwrap();
        assert!((fit.coef_log - 1.0 / 3.0).abs() < 1e-10);
        assert!((fit.coef_const.unwrap() - 0.7).abs() < 1e-10);
        assert!((fit.estimated_c - 1.0).abs() < 1e-9);
        assert!(fit.residual_rms < 1e-10);
        assert_eq!(fit.coef_invlog, None);
    }

    #[test]
    fn fit_round_trips_e1_prediction() {
        let pts: Vec<(f64, f64)> = [32, 50, 80, 128, 300, 700, 1024]
            .iter()
            .map(|&l| (l as f64, e1_prediction(1.0, l).unwrap()))
            .collect();
        let fit = fit_scaling(
            &pts,
            &[BasisTerm::InvLog, BasisTerm::Log],
            Quantity::LogInvLambda1,
        )
        .unwrap();
        assert_eq!(fit.basis, vec![BasisTerm::Log, BasisTerm::InvLog]);
        assert!((fit.coef_log - 1.0 / 6.0).abs() < 1e-10);
        assert!((fit.coef_invlog.unwrap() + PI * PI / 6.0).abs() < 1e-10);
        assert!((fit.estimated_c - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let pts = [(10.0, 1.0), (20.0, 1.2), (40.0, 1.4), (80.0, 1.6)];
        assert!(matches!(
            fit_scaling(&pts, &ALL, Quantity::Entropy),
            Err(Error::InsufficientPoints { needed: 5, got: 4 })
        ));
        let dup = [(10.0, 1.0), (10.0, 1.2), (40.0, 1.4), (80.0, 1.6)];
        assert!(fit_scaling(&dup, &[BasisTerm::Log], Quantity::Entropy).is_err());
        assert!(fit_scaling(&pts, &[BasisTerm::Const], Quantity::Entropy).is_err());
        let small = [(1.0, 0.0), (10.0, 1.2), (40.0, 1.4), (80.0, 1.6)];
        assert!(fit_scaling(&small, &[BasisTerm::Log], Quantity::Entropy).is_err());
    }

    #[test]
    fn near_collinear_basis_is_singular() {
        // At L near 1e15 with tiny spread, log and 1/log are numerically constant.
        let pts: Vec<(f64, f64)> = (0..6).map(|i| (1e15 + i as f64 * 0.25, 1.0)).collect();
        assert!(matches!(
            fit_scaling(&pts, &ALL, Quantity::Entropy),
            Err(Error::SingularDesign)
        ));
    }

    #[test]
    fn basis_terms_parse() {
        assert_eq!("logL".parse::<BasisTerm>().unwrap(), BasisTerm::Log);
        assert_eq!("invlog".parse::<BasisTerm>().unwrap(), BasisTerm::InvLog);
        assert!("quadratic".parse::<BasisTerm>().is_err());
        assert_eq!(
            "log_inv_lambda1".parse::<Quantity>().unwrap(),
            Quantity::LogInvLambda1
        );
    }

    fn fake_report(block_len: usize, entropy: f64, log_inv: f64) -> EntanglementReport {
        EntanglementReport {
            block_len,
            entropy,
            log_inv_lambda1: log_inv,
            e1_floored: 0.0,
            lambda1: (-log_inv).exp(),
        }
    }

    #[test]
    fn ratio_trend_examples() {
        let ls = [1000usize, 1_000_000, 10_000_000_000_000_000_000];
        let reports: Vec<_> = ls
            .iter()
            .map(|&l| {
                fake_report(
                    l,
                    entropy_prediction(1.0, l, 0.0).unwrap(),
                    e1_prediction(1.0, l).unwrap(),
                )
            })
            .collect();
        let trend = ratio_trend(&reports).unwrap();
        assert!((trend[2].1 - 2.0).abs() < 0.011);
        assert!(trend[0].1 > trend[1].1 && trend[1].1 > trend[2].1);

        let single = fake_report(1, std::f64::consts::LN_2, std::f64::consts::LN_2);
        assert_eq!(ratio_trend(&[single]).unwrap(), vec![(1, 1.0)]);

        let zero = fake_report(3, 0.0, 0.0);
        assert!(matches!(
            ratio_trend(&[zero]),
            Err(Error::DivisionByZero { block_len: 3 })
        ));
        assert!(ratio_trend(&[reports[1], reports[0]]).is_err());
    }

    proptest! {
        #[test]
        fn fit_is_exact_on_its_own_basis(
            a in -2.0f64..2.0, b in -5.0f64..5.0, d in -5.0f64..5.0,
        ) {
            let pts: Vec<(f64, f64)> = [20.0, 35.0, 60.0, 110.0, 250.0, 600.0, 1000.0]
                .iter()
                .map(|&l: &f64| (l, a * l.ln() + b + d / l.ln()))
                .collect();
            let fit = fit_scaling(&pts, &ALL, Quantity::LogInvLambda1).unwrap();
            prop_assert!(fit.residual_rms <= 1e-10);
            prop_assert!((fit.coef_log - a).abs() < 1e-8);
            prop_assert!((fit.estimated_c - 6.0 * fit.coef_log).abs() < 1e-15);
        }
    }
}
