//! Dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricTridiagonal};

use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

/// Eigenvalues of a real symmetric matrix (lower triangle is read), in no
/// particular order.
///
/// Householder tridiagonalization followed by implicit QL with Wilkinson
/// shifts. Fails instead of looping if an eigenvalue does not converge
/// within a fixed sweep budget.
pub fn symmetric_eigenvalues(m: DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidInput("matrix is not square".into()));
    }
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![m[(0, 0)]]),
        _ => {}
    }
    let (diag, off) = SymmetricTridiagonal::new(m).unpack_tridiagonal();
    let mut d: Vec<f64> = diag.iter().copied().collect();
    let mut e: Vec<f64> = off.iter().copied().collect();
    e.push(0.0);
    tridiagonal_ql(&mut d, &mut e)?;
    Ok(d)
}

/// Implicit QL on a symmetric tridiagonal matrix with diagonal `d` and
/// sub-diagonal `e[..n-1]`. On success `d` holds the eigenvalues.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::EigensolveFailure(format!(
                    "eigenvalue {l} of {n} not converged after {MAX_QL_SWEEPS} QL sweeps"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Pfaffian of a real antisymmetric matrix by Gaussian elimination with
/// pivoting (Parlett–Reid). O(n³).
pub fn pfaffian(m: &DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidInput("matrix is not square".into()));
    }
    if n % 2 == 1 {
        return Ok(0.0);
    }
    let mut a = m.clone();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        // Largest entry in column k below the diagonal becomes the pivot.
        let (pivot, pivot_val) = ((k + 1)..n)
            .map(|i| (i, a[(i, k)].abs()))
            .fold((k + 1, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot != k + 1 {
            a.swap_rows(k + 1, pivot);
            a.swap_columns(k + 1, pivot);
            pf = -pf;
        }
        if pivot_val == 0.0 {
            return Ok(0.0);
        }
        let akk1 = a[(k, k + 1)];
        pf *= akk1;
        if k + 2 < n {
            // Eliminate column k and row k beyond k+1 using row/column k+1.
            let tau: Vec<f64> = ((k + 2)..n).map(|i| a[(k, i)] / akk1).collect();
            let col: Vec<f64> = ((k + 2)..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in ((k + 2)..n).enumerate() {
                for (jj, j) in ((k + 2)..n).enumerate() {
                    a[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    Ok(pf)
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn eigenvalues_of_small_matrices() {
        assert!(symmetric_eigenvalues(DMatrix::zeros(0, 0)).unwrap().is_empty());
        assert_eq!(
            symmetric_eigenvalues(DMatrix::from_element(1, 1, 3.5)).unwrap(),
            vec![3.5]
        );
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let ev = sorted(symmetric_eigenvalues(m).unwrap());
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn path_graph_laplacian() {
        // Eigenvalues of the n-site path adjacency matrix: 2cos(kπ/(n+1)).
        let n = 50;
        let m = DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
        let ev = sorted(symmetric_eigenvalues(m).unwrap());
        let exact = sorted(
            (1..=n)
                .map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos())
                .collect(),
        );
        for (a, b) in ev.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn pfaffian_of_canonical_blocks() {
        let mut m = DMatrix::zeros(6, 6);
        for (k, v) in [2.0, -0.5, 3.0].iter().enumerate() {
            m[(2 * k, 2 * k + 1)] = *v;
            m[(2 * k + 1, 2 * k)] = -*v;
        }
        assert!((pfaffian(&m).unwrap() - (-3.0)).abs() < 1e-14);
        // A symmetric swap of two indices flips the sign.
        let mut p = m.clone();
        p.swap_rows(1, 2);
        p.swap_columns(1, 2);
        assert!((pfaffian(&p).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1.0, 1e-16, 1e-16, -1.0];
        assert_eq!(compensated_sum(v), 2e-16);
    }

    proptest! {
        #[test]
        fn eigenvalues_match_nalgebra(entries in proptest::collection::vec(-1.0f64..1.0, 64)) {
            let a = DMatrix::from_vec(8, 8, entries);
            let s = &a + a.transpose();
            let ours = sorted(symmetric_eigenvalues(s.clone()).unwrap());
            let reference = sorted(s.symmetric_eigenvalues().iter().copied().collect());
            for (x, y) in ours.iter().zip(&reference) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn pfaffian_squares_to_determinant(entries in proptest::collection::vec(-1.0f64..1.0, 36)) {
            let a = DMatrix::from_vec(6, 6, entries);
            let k = &a - a.transpose();
            let pf = pfaffian(&k).unwrap();
            let det = k.determinant();
            prop_assert!((pf * pf - det).abs() < 1e-10 * (1.0 + det.abs()));
        }
    }
}
