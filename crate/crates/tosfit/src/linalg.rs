//! Minimal dense linear algebra for small symmetric systems.
//!
//! Matrices here are tiny (feature dimension squared), so everything is
//! plain row-major `Vec<f64>` with no external dependency. The reference
//! implementations in [`crate::oracle`] deliberately do not use this module.

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SqMat {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SqMat {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// `self * x`.
    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            out[i] = dot(row, x);
        }
        out
    }

    /// Largest absolute asymmetry `max |A_ij - A_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.at(i, j) - self.at(j, i)).abs());
            }
        }
        worst
    }

    /// Lower-triangular Cholesky factor of a symmetric positive
    /// semi-definite matrix. Pivots within `tol` of zero are treated as
    /// exactly zero (rank-deficient directions contribute nothing), pivots
    /// below `-tol` are rejected.
    pub fn cholesky_psd(&self, tol: f64) -> Option<SqMat> {
        let n = self.n;
        let mut l = SqMat::zeros(n);
        for j in 0..n {
            let mut diag = self.at(j, j);
            for k in 0..j {
                diag -= l.at(j, k) * l.at(j, k);
            }
            if diag < -tol {
                return None;
            }
            if diag <= tol {
                // Rank-deficient column: leave it zero.
                continue;
            }
            let pivot = diag.sqrt();
            *l.at_mut(j, j) = pivot;
            for i in (j + 1)..n {
                let mut v = self.at(i, j);
                for k in 0..j {
                    v -= l.at(i, k) * l.at(j, k);
                }
                *l.at_mut(i, j) = v / pivot;
            }
        }
        Some(l)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Draw from `N(mean, L L^T)` given a Cholesky-type factor `L` and a slice of
/// standard normal variates `z`.
pub fn affine_gaussian(mean: &[f64], l: &SqMat, z: &[f64]) -> Vec<f64> {
    let n = mean.len();
    let mut out = mean.to_vec();
    for i in 0..n {
        let mut acc = 0.0;
        for k in 0..=i {
            acc += l.at(i, k) * z[k];
        }
        out[i] += acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_recovers_matrix() {
        // A = L0 L0^T for a fixed lower-triangular L0.
        let mut l0 = SqMat::zeros(3);
        let entries = [(0, 0, 2.0), (1, 0, -1.0), (1, 1, 1.5), (2, 0, 0.3), (2, 1, 0.7), (2, 2, 0.9)];
        for (i, j, v) in entries {
            *l0.at_mut(i, j) = v;
        }
        let mut a = SqMat::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += l0.at(i, k) * l0.at(j, k);
                }
                *a.at_mut(i, j) = s;
            }
        }
        let l = a.cholesky_psd(1e-12).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((l.at(i, j) - l0.at(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_handles_singular_psd() {
        // All-ones matrix: PSD of rank one.
        let a = SqMat { n: 2, data: vec![1.0, 1.0, 1.0, 1.0] };
        let l = a.cholesky_psd(1e-12).unwrap();
        assert!((l.at(0, 0) - 1.0).abs() < 1e-15);
        assert!((l.at(1, 0) - 1.0).abs() < 1e-15);
        assert_eq!(l.at(1, 1), 0.0);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = SqMat { n: 2, data: vec![1.0, 2.0, 2.0, 1.0] };
        assert!(a.cholesky_psd(1e-12).is_none());
    }
}
