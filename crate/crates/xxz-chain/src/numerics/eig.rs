//! Dense nonsymmetric complex eigendecomposition with left and right
//! eigenvectors.

use super::{CMat, CVec};
use crate::{Error, Result};
use ndarray_linalg::{Eig, Inverse};

/// Result of [`eig_dense`].
///
/// `right` holds right eigenvectors as columns, `left` holds left
/// eigenvectors as rows, normalized so that `left · right = 1` pairwise
/// (the rows of `right⁻¹`). For distinct eigenvalues this gives the exact
/// biorthogonal pairing u_j · v_k = δ_jk.
pub struct EigDecomp {
    pub values: CVec,
    pub right: CMat,
    pub left: CMat,
}

impl EigDecomp {
    /// Right eigenvector of branch k.
    pub fn right_vec(&self, k: usize) -> CVec {
        self.right.column(k).to_owned()
    }
    /// Left eigenvector of branch k (row of `left`).
    pub fn left_vec(&self, k: usize) -> CVec {
        self.left.row(k).to_owned()
    }
    /// Smallest pairwise eigenvalue gap.
    pub fn min_gap(&self) -> f64 {
        let n = self.values.len();
        let mut gap = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                gap = gap.min((self.values[i] - self.values[j]).norm());
            }
        }
        gap
    }
}

/// Eigendecomposition of a general complex square matrix (LAPACK zgeev).
///
/// Left eigenvectors are obtained by inverting the right eigenvector matrix,
/// which enforces biorthogonality exactly; ill-conditioned eigenbases show
/// up as a `ConvergenceFailure`.
pub fn eig_dense(a: &CMat) -> Result<EigDecomp> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::NonSquare { rows: r, cols: c });
    }
    let (values, right) = a
        .eig()
        .map_err(|e| Error::ConvergenceFailure(format!("zgeev: {e}")))?;
    let left = right
        .inv()
        .map_err(|e| Error::ConvergenceFailure(format!("eigenbasis inversion: {e}")))?;
    Ok(EigDecomp {
        values,
        right,
        left,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{bilinear, fro_norm, CMat, ONE, ZERO};
    use crate::C64;
    use ndarray::{array, Array2};

    #[test]
    fn diagonal_matrix() {
        let a = Array2::from_diag(&ndarray::arr1(&[
            C64::new(1.0, 0.0),
            C64::new(2.0, 0.0),
            C64::new(3.0, 0.0),
        ]));
        let d = eig_dense(&a).unwrap();
        let mut vals: Vec<f64> = d.values.iter().map(|z| z.re).collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-13);
        assert!((vals[1] - 2.0).abs() < 1e-13);
        assert!((vals[2] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn sigma_x_eigenvalues() {
        let a: CMat = array![[ZERO, ONE], [ONE, ZERO]];
        let d = eig_dense(&a).unwrap();
        let mut vals: Vec<f64> = d.values.iter().map(|z| z.re).collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] + 1.0).abs() < 1e-13);
        assert!((vals[1] - 1.0).abs() < 1e-13);
    }

    fn pseudo_random_mat(n: usize, seed: u64) -> CMat {
        // deterministic LCG fill; good enough for residual tests
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        Array2::from_shape_fn((n, n), |_| C64::new(next(), next()))
    }

    #[test]
    fn residuals_and_biorthogonality_random_8x8() {
        let a = pseudo_random_mat(8, 0xC0FFEE);
        let norm_a = fro_norm(&a);
        let d = eig_dense(&a).unwrap();
        for k in 0..8 {
            let v = d.right_vec(k);
            let av = a.dot(&v);
            let r = &av - &v.mapv(|z| z * d.values[k]);
            assert!(crate::numerics::vec_norm(&r) < 1e-12 * norm_a);
            let u = d.left_vec(k);
            let ua = u.dot(&a);
            let rl = &ua - &u.mapv(|z| z * d.values[k]);
            assert!(crate::numerics::vec_norm(&rl) < 1e-10 * norm_a);
        }
        // pairing u_j · v_k = δ_jk by construction
        for j in 0..8 {
            for k in 0..8 {
                let p = bilinear(&d.left_vec(j), &d.right_vec(k));
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((p - C64::new(expect, 0.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn reconstruction_random_16x16() {
        let a = pseudo_random_mat(16, 0xABCDE);
        let d = eig_dense(&a).unwrap();
        // A = Σ w_k v_k u_k (u_k·v_k = 1 here)
        let mut rec: CMat = Array2::zeros((16, 16));
        for k in 0..16 {
            let v = d.right_vec(k);
            let u = d.left_vec(k);
            for i in 0..16 {
                for j in 0..16 {
                    rec[(i, j)] += d.values[k] * v[i] * u[j];
                }
            }
        }
        assert!(fro_norm(&(&rec - &a)) < 1e-10 * fro_norm(&a));
    }

    #[test]
    fn non_square_rejected() {
        let a: CMat = Array2::zeros((2, 3));
        assert!(matches!(eig_dense(&a), Err(Error::NonSquare { .. })));
    }
}
