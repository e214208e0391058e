//! Globally adaptive 21-point Gauss–Kronrod quadrature.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_067_515_558,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One application of the 21-point rule with the QUADPACK error rescaling.
fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        let scale = (200.0 * error / res_asc).powf(1.5);
        error = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }

    Segment { a, b, value, error }
}

/// Adaptive integrator: bisects the worst segment until the summed error
/// estimate meets `max(abs_tol, rel_tol·|I|)`.
#[derive(Debug, Clone, Copy)]
pub struct GaussKronrod {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for GaussKronrod {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_intervals: 20_000,
        }
    }
}

impl GaussKronrod {
    pub fn with_tolerance(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Integral> {
        self.integrate_pieces(f, &[a, b], 1)
    }

    /// Integrates over `[points[0], points[last]]`, never placing a node on
    /// an interior break point. Each piece is further pre-split into
    /// `subdivisions` equal parts, which helps with oscillatory integrands.
    pub fn integrate_pieces<F: Fn(f64) -> f64>(
        &self,
        f: F,
        points: &[f64],
        subdivisions: usize,
    ) -> Result<Integral> {
        if points.len() < 2 {
            return Err(Error::InvalidInput(
                "quadrature needs at least two break points".into(),
            ));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput(
                "quadrature break points must be strictly increasing".into(),
            ));
        }
        let subdivisions = subdivisions.max(1);

        let mut heap = BinaryHeap::new();
        for w in points.windows(2) {
            let step = (w[1] - w[0]) / subdivisions as f64;
            for k in 0..subdivisions {
                let a = w[0] + step * k as f64;
                let b = if k + 1 == subdivisions {
                    w[1]
                } else {
                    w[0] + step * (k + 1) as f64
                };
                heap.push(kronrod21(&f, a, b));
            }
        }

        let totals = |heap: &BinaryHeap<Segment>| {
            heap.iter()
                .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
        };
        let (mut value, mut error) = totals(&heap);
        loop {
            let tolerance = self.abs_tol.max(self.rel_tol * value.abs());
            if error <= tolerance {
                // Re-sum to shed drift from the incremental updates.
                (value, error) = totals(&heap);
                if error <= tolerance {
                    return Ok(Integral {
                        value,
                        abs_error: error,
                        intervals: heap.len(),
                    });
                }
            }
            if heap.len() >= self.max_intervals {
                return Err(Error::QuadratureFailure {
                    abs_error: error,
                    tolerance,
                    intervals: heap.len(),
                });
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if !(worst.a < mid && mid < worst.b) {
                // Segment cannot be split further in floating point.
                return Err(Error::QuadratureFailure {
                    abs_error: error,
                    tolerance,
                    intervals: heap.len() + 1,
                });
            }
            let left = kronrod21(&f, worst.a, mid);
            let right = kronrod21(&f, mid, worst.b);
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kronrod_weights_integrate_constants() {
        let sum: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        assert!((sum - 2.0).abs() < 1e-15);
        let sum_g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((sum_g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials_of_degree_31() {
        // The Kronrod extension is exact through degree 3n+1 = 31.
        let s = kronrod21(&|x: f64| x.powi(30), -1.0, 1.0);
        assert!((s.value - 2.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_integrals() {
        let gk = GaussKronrod::with_tolerance(1e-12);
        let r = gk.integrate(|x: f64| x.sin(), 0.0, PI).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        let r = gk.integrate(|x: f64| (-x * x).exp(), -8.0, 8.0).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn break_points_handle_jumps() {
        let gk = GaussKronrod::with_tolerance(1e-12);
        let step = |x: f64| if x < 0.3 { 1.0 } else { -1.0 };
        let r = gk.integrate_pieces(step, &[0.0, 0.3, 1.0], 1).unwrap();
        assert!((r.value - (0.3 - 0.7)).abs() < 1e-14);
    }

    #[test]
    fn integrable_log_singularity() {
        let gk = GaussKronrod::with_tolerance(1e-10);
        let r = gk.integrate(|x: f64| x.ln(), 0.0, 1.0).unwrap();
        assert!((r.value + 1.0).abs() < 1e-10);
    }

    #[test]
    fn oscillatory_with_presplit() {
        let gk = GaussKronrod::with_tolerance(1e-12);
        let l = 400.0;
        let r = gk
            .integrate_pieces(|x: f64| (l * x).cos() * x, &[0.0, PI], 200)
            .unwrap();
        // ∫₀^π x cos(lx) dx = (cos(lπ) - 1)/l² for integer l
        let exact = ((l * PI).cos() - 1.0) / (l * l);
        assert!((r.value - exact).abs() < 1e-12);
    }

    #[test]
    fn reports_failure_when_budget_exhausted() {
        let gk = GaussKronrod {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_intervals: 4,
        };
        let err = gk.integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
    }

    #[test]
    fn rejects_unsorted_breaks() {
        let gk = GaussKronrod::default();
        assert!(gk.integrate_pieces(|x| x, &[0.0, 0.0], 1).is_err());
        assert!(gk.integrate_pieces(|x| x, &[1.0], 1).is_err());
    }
}
