//! Dense complex linear algebra, root finding and quadrature.
//!
//! Everything downstream works on `ndarray` arrays of `Complex64`; matrices
//! are row-major and dimensions stay at or below 2¹². Eigendecomposition is
//! delegated to LAPACK (zgeev) through `ndarray-linalg`.

mod eig;
mod newton;
mod quad;

pub use eig::{eig_dense, EigDecomp};
pub use newton::{newton_multidim, NewtonOutcome};
pub use quad::{gauss_legendre_nodes, quad_polyline, quad_segment};

use crate::{C64, Error, Result};
use ndarray::{Array1, Array2};

/// Dense complex matrix, row-major.
pub type CMat = Array2<C64>;
/// Dense complex vector.
pub type CVec = Array1<C64>;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// n×n identity.
pub fn eye(n: usize) -> CMat {
    Array2::from_diag(&Array1::from_elem(n, ONE))
}

/// Kronecker product with index convention (i_A i_B, j_A j_B) ↦ A[i_A,j_A]·B[i_B,j_B].
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for ia in 0..ra {
        for ja in 0..ca {
            let aij = a[(ia, ja)];
            if aij == ZERO {
                continue;
            }
            for ib in 0..rb {
                for jb in 0..cb {
                    out[(ia * rb + ib, ja * cb + jb)] = aij * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Frobenius norm.
pub fn fro_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Max-abs norm of a vector.
pub fn inf_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unconjugated bilinear pairing u·v = Σ u_i v_i.
pub fn bilinear(u: &CVec, v: &CVec) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
}

/// Determinant by partial-pivot LU; sizes here are tiny (m ≤ N).
pub fn det_lu(a: &CMat) -> Result<C64> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::NonSquare { rows: r, cols: c });
    }
    let n = r;
    let mut m = a.clone();
    let mut det = ONE;
    for k in 0..n {
        let mut piv = k;
        let mut best = m[(k, k)].norm();
        for i in k + 1..n {
            let v = m[(i, k)].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return Ok(ZERO);
        }
        if piv != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(piv, j)];
                m[(piv, j)] = t;
            }
            det = -det;
        }
        let d = m[(k, k)];
        det *= d;
        for i in k + 1..n {
            let f = m[(i, k)] / d;
            for j in k..n {
                let mkj = m[(k, j)];
                m[(i, j)] -= f * mkj;
            }
        }
    }
    Ok(det)
}

/// Solve A x = b by partial-pivot LU (complex, small systems).
pub fn solve_lu(a: &CMat, b: &CVec) -> Result<CVec> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::NonSquare { rows: r, cols: c });
    }
    let n = r;
    let mut m = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let mut piv = k;
        let mut best = m[(k, k)].norm();
        for i in k + 1..n {
            let v = m[(i, k)].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best < 1e-300 {
            return Err(Error::SingularJacobian { iteration: 0 });
        }
        if piv != k {
            for j in 0..n {
                m.swap((k, j), (piv, j));
            }
            x.swap(k, piv);
        }
        let d = m[(k, k)];
        for i in k + 1..n {
            let f = m[(i, k)] / d;
            for j in k..n {
                let mkj = m[(k, j)];
                m[(i, j)] -= f * mkj;
            }
            let xk = x[k];
            x[i] -= f * xk;
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= m[(i, j)] * x[j];
        }
        x[i] = s / m[(i, i)];
    }
    Ok(x)
}

/// Polynomial extrapolation of f(h) to h = 0 through the sample points
/// (Neville's scheme). Returns the extrapolated value and an error estimate
/// from the last correction. Used for Richardson-style homogeneous limits.
pub fn extrapolate_to_zero(steps: &[f64], values: &[C64]) -> Result<(C64, f64)> {
    let n = steps.len();
    if n != values.len() || n == 0 {
        return Err(Error::InvalidInput(
            "extrapolate_to_zero: mismatched or empty inputs".into(),
        ));
    }
    if n == 1 {
        return Ok((values[0], f64::NAN));
    }
    let mut tab: Vec<C64> = values.to_vec();
    let mut last = tab[0];
    for level in 1..n {
        for i in 0..n - level {
            let h_i = steps[i];
            let h_il = steps[i + level];
            let denom = h_i - h_il;
            if denom.abs() < 1e-300 {
                return Err(Error::NonConvergentSequence("repeated step sizes".into()));
            }
            // value at h=0 of the interpolant through (h_i.., h_{i+level})
            tab[i] = (tab[i + 1] * C64::new(h_i, 0.0) - tab[i] * C64::new(h_il, 0.0))
                / C64::new(denom, 0.0);
        }
        last = tab[0];
    }
    let err = (last - values[0]).norm().min((last - tab[1.min(n - 1)]).norm());
    Ok((last, err))
}

pub(crate) fn csinh(z: C64) -> C64 {
    z.sinh()
}
pub(crate) fn ccosh(z: C64) -> C64 {
    z.cosh()
}
pub(crate) fn ccoth(z: C64) -> C64 {
    z.cosh() / z.sinh()
}
pub(crate) fn ctanh(z: C64) -> C64 {
    z.tanh()
}
