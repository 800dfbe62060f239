//! Eigenvalues of real symmetric tridiagonal matrices by implicit-shift QL.

use alloc::vec::Vec;
use num_traits::Float;

use crate::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigenvalues, ascending, of the symmetric tridiagonal matrix with diagonal
/// `diag` and sub/super-diagonal `off` (`off.len() == diag.len() - 1`).
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::LengthMismatch {
            expected: n - 1,
            got: off.len(),
        });
    }
    if diag.iter().chain(off).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("tridiagonal entries"));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);

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
            if sweeps > MAX_SWEEPS {
                return Err(Error::EigenSolve);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
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
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn two_by_two() {
        let ev = symmetric_tridiagonal_eigenvalues(&[0.0, 0.0], &[0.5]).unwrap();
        assert_relative_eq!(ev[0], -0.5, max_relative = 1e-15);
        assert_relative_eq!(ev[1], 0.5, max_relative = 1e-15);
    }

    #[test]
    fn discrete_laplacian() {
        // 2 on the diagonal, −1 off it: 2 − 2cos(kπ/(n+1))
        let n = 12;
        let ev = symmetric_tridiagonal_eigenvalues(&alloc::vec![2.0; n], &alloc::vec![-1.0; n - 1])
            .unwrap();
        for (k, v) in ev.iter().enumerate() {
            let want =
                2.0 - 2.0 * (((k + 1) as f64) * core::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert_relative_eq!(*v, want, epsilon = 1e-13);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(symmetric_tridiagonal_eigenvalues(&[1.0, 2.0], &[]).is_err());
        assert!(symmetric_tridiagonal_eigenvalues(&[f64::NAN], &[]).is_err());
        assert!(symmetric_tridiagonal_eigenvalues(&[], &[])
            .unwrap()
            .is_empty());
    }

    proptest! {
        #[test]
        fn matches_dense_solver(diag in proptest::collection::vec(-5.0f64..5.0, 1..15), seed in proptest::collection::vec(-3.0f64..3.0, 15)) {
            let n = diag.len();
            let off: Vec<f64> = seed[..n - 1].to_vec();
            let ev = symmetric_tridiagonal_eigenvalues(&diag, &off).unwrap();
            let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                m[(i, i)] = diag[i];
                if i + 1 < n {
                    m[(i, i + 1)] = off[i];
                    m[(i + 1, i)] = off[i];
                }
            }
            let mut dense: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            dense.sort_by(|a, b| a.total_cmp(b));
            for (a, b) in ev.iter().zip(&dense) {
                prop_assert!((a - b).abs() <= 1e-11 * (1.0 + b.abs()));
            }
            let tr: f64 = diag.iter().sum();
            let s: f64 = ev.iter().sum();
            prop_assert!((tr - s).abs() <= 1e-11 * (1.0 + tr.abs()));
        }
    }
}
