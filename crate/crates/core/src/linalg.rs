//! Tridiagonal and cyclic tridiagonal solvers.

use crate::error::{Error, Result};

fn check_lengths(n: usize, others: &[usize]) -> Result<()> {
    for &len in others {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: len,
            });
        }
    }
    Ok(())
}

/// Scratch buffers for repeated solves; reusing one avoids reallocating on
/// every Newton iteration.
#[derive(Debug, Clone, Default)]
pub struct TridiagWorkspace {
    c_prime: Vec<f64>,
    diag: Vec<f64>,
    z: Vec<f64>,
}

impl TridiagWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Thomas algorithm writing the solution into `x`.
    ///
    /// `sub[i]` is `A[i][i-1]` (ignored for `i = 0`), `sup[i]` is `A[i][i+1]`
    /// (ignored for the last row). All slices have the same length.
    pub fn thomas(&mut self, sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64], x: &mut [f64]) -> Result<()> {
        let n = diag.len();
        check_lengths(n, &[sub.len(), sup.len(), rhs.len(), x.len()])?;
        if n == 0 {
            return Ok(());
        }
        self.c_prime.resize(n, 0.0);
        let c = &mut self.c_prime;
        let mut pivot = diag[0];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularJacobian { row: 0 });
        }
        c[0] = sup[0] / pivot;
        x[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = diag[i] - sub[i] * c[i - 1];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularJacobian { row: i });
            }
            let inv = 1.0 / pivot;
            c[i] = sup[i] * inv;
            x[i] = (rhs[i] - sub[i] * x[i - 1]) * inv;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        Ok(())
    }

    /// Cyclic tridiagonal solve, where additionally `A[0][n-1] = sub[0]` and
    /// `A[n-1][0] = sup[n-1]`, by a Sherman-Morrison correction. Both
    /// auxiliary systems share one elimination sweep.
    pub fn cyclic(&mut self, sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64], x: &mut [f64]) -> Result<()> {
        let n = diag.len();
        check_lengths(n, &[sub.len(), sup.len(), rhs.len(), x.len()])?;
        if n < 3 {
            return Err(Error::InvalidGrid(format!(
                "cyclic solve needs at least 3 unknowns, got {n}"
            )));
        }
        let alpha = sup[n - 1]; // bottom-left corner
        let beta = sub[0]; // top-right corner
        let gamma = -diag[0];
        self.diag.clear();
        self.diag.extend_from_slice(diag);
        self.diag[0] -= gamma;
        self.diag[n - 1] -= alpha * beta / gamma;
        self.c_prime.resize(n, 0.0);
        self.z.resize(n, 0.0);
        let (c, d, z) = (&mut self.c_prime, &self.diag, &mut self.z);

        // z solves the system with right-hand side (gamma, 0, ..., 0, alpha)
        let mut pivot = d[0];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularJacobian { row: 0 });
        }
        c[0] = sup[0] / pivot;
        x[0] = rhs[0] / pivot;
        z[0] = gamma / pivot;
        for i in 1..n {
            pivot = d[i] - sub[i] * c[i - 1];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularJacobian { row: i });
            }
            let inv = 1.0 / pivot;
            let u = if i == n - 1 { alpha } else { 0.0 };
            c[i] = sup[i] * inv;
            x[i] = (rhs[i] - sub[i] * x[i - 1]) * inv;
            z[i] = (u - sub[i] * z[i - 1]) * inv;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
            z[i] -= c[i] * z[i + 1];
        }
        let denom = 1.0 + z[0] + beta * z[n - 1] / gamma;
        if denom == 0.0 {
            return Err(Error::SingularJacobian { row: 0 });
        }
        let fact = (x[0] + beta * x[n - 1] / gamma) / denom;
        for (x, z) in x.iter_mut().zip(z.iter()) {
            *x -= fact * z;
        }
        Ok(())
    }
}

/// Solves `A x = rhs` for tridiagonal `A` by the Thomas algorithm.
///
/// `sub[i]` is `A[i][i-1]` (ignored for `i = 0`), `sup[i]` is `A[i][i+1]`
/// (ignored for the last row). All slices have the same length.
pub fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let mut x = vec![0.0; diag.len()];
    TridiagWorkspace::new().thomas(sub, diag, sup, rhs, &mut x)?;
    Ok(x)
}

/// Solves a cyclic tridiagonal system, where additionally `A[0][n-1] = sub[0]`
/// and `A[n-1][0] = sup[n-1]`, with a Sherman-Morrison correction.
pub fn cyclic_thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let mut x = vec![0.0; diag.len()];
    TridiagWorkspace::new().cyclic(sub, diag, sup, rhs, &mut x)?;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_mul(sub: &[f64], diag: &[f64], sup: &[f64], x: &[f64], cyclic: bool) -> Vec<f64> {
        let n = diag.len();
        (0..n)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += sub[i] * x[i - 1];
                } else if cyclic {
                    s += sub[0] * x[n - 1];
                }
                if i + 1 < n {
                    s += sup[i] * x[i + 1];
                } else if cyclic {
                    s += sup[n - 1] * x[0];
                }
                s
            })
            .collect()
    }

    #[test]
    fn small_known_system() {
        // [2 1 0; 1 2 1; 0 1 2] x = [4 8 8] -> x = [1 2 3]
        let x = thomas(&[0.0, 1.0, 1.0], &[2.0, 2.0, 2.0], &[1.0, 1.0, 0.0], &[4.0, 8.0, 8.0]).unwrap();
        for (a, b) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let err = thomas(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::SingularJacobian { row: 0 }));
    }

    proptest! {
        #[test]
        fn solves_dominant_systems(
            n in 3usize..60,
            seed in proptest::collection::vec(-1.0f64..1.0, 240),
            cyclic in proptest::bool::ANY,
        ) {
            let sub: Vec<f64> = seed[..n].to_vec();
            let sup: Vec<f64> = seed[60..60 + n].to_vec();
            let diag: Vec<f64> = (0..n).map(|i| -(2.5 + seed[120 + i].abs())).collect();
            let rhs: Vec<f64> = seed[180..180 + n].to_vec();
            let x = if cyclic {
                cyclic_thomas(&sub, &diag, &sup, &rhs).unwrap()
            } else {
                thomas(&sub, &diag, &sup, &rhs).unwrap()
            };
            let back = dense_mul(&sub, &diag, &sup, &x, cyclic);
            for (a, b) in back.iter().zip(&rhs) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
