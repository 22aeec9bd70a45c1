//! Multidimensional Newton iteration over complex vectors.

use super::{inf_norm, solve_lu, CMat, CVec};
use crate::{C64, Error, Result};

#[derive(Debug)]
pub struct NewtonOutcome {
    pub x: CVec,
    pub residual_inf: f64,
    pub iterations: usize,
}

/// Newton's method for F(x) = 0 with analytic Jacobian and step halving.
///
/// The Jacobian convention is J[i][j] = ∂F_i/∂x_j (holomorphic derivative).
/// On failure to reach `tol` within `max_iter`, the best iterate found is
/// returned inside the error for diagnostics.
pub fn newton_multidim(
    residual: &dyn Fn(&CVec) -> CVec,
    jacobian: &dyn Fn(&CVec) -> CMat,
    x0: &CVec,
    tol: f64,
    max_iter: usize,
) -> Result<NewtonOutcome> {
    let mut x = x0.clone();
    let mut r = residual(&x);
    let mut rn = inf_norm(&r);
    let mut best = (x.clone(), rn);
    for it in 0..max_iter {
        if rn < tol {
            return Ok(NewtonOutcome {
                x,
                residual_inf: rn,
                iterations: it,
            });
        }
        let j = jacobian(&x);
        let step = solve_lu(&j, &r).map_err(|_| Error::SingularJacobian { iteration: it })?;
        // backtracking: halve until the residual stops growing (at most 20 times)
        let mut scale = 1.0f64;
        let mut accepted = false;
        for _ in 0..20 {
            let cand = &x - &step.mapv(|z| z * C64::new(scale, 0.0));
            let rc = residual(&cand);
            let rcn = inf_norm(&rc);
            if rcn.is_finite() && rcn < rn {
                x = cand;
                r = rc;
                rn = rcn;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            // full step anyway; Newton may still escape a plateau
            x = &x - &step;
            r = residual(&x);
            rn = inf_norm(&r);
            if !rn.is_finite() {
                return Err(Error::NoConvergence {
                    best: best.0.to_vec(),
                    residual_inf: best.1,
                    iterations: it,
                });
            }
        }
        if rn < best.1 {
            best = (x.clone(), rn);
        }
    }
    if rn < tol {
        return Ok(NewtonOutcome {
            x,
            residual_inf: rn,
            iterations: max_iter,
        });
    }
    Err(Error::NoConvergence {
        best: best.0.to_vec(),
        residual_inf: best.1,
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr1;

    #[test]
    fn scalar_square_root() {
        let f = |x: &CVec| arr1(&[x[0] * x[0] - C64::new(4.0, 0.0)]);
        let j = |x: &CVec| ndarray::arr2(&[[C64::new(2.0, 0.0) * x[0]]]);
        let out = newton_multidim(&f, &j, &arr1(&[C64::new(3.0, 0.0)]), 1e-12, 50).unwrap();
        assert!((out.x[0] - C64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn scalar_sinh_equation() {
        let target = C64::new(1.0, 0.0).sinh();
        let f = move |x: &CVec| arr1(&[x[0].sinh() - target]);
        let j = |x: &CVec| ndarray::arr2(&[[x[0].cosh()]]);
        let out = newton_multidim(&f, &j, &arr1(&[C64::new(0.9, 0.0)]), 1e-12, 50).unwrap();
        assert!((out.x[0] - C64::new(1.0, 0.0)).norm() < 1e-11);
    }

    #[test]
    fn reports_best_iterate_on_failure() {
        // residual with no zero: |F| >= 1
        let f = |x: &CVec| arr1(&[x[0] * x[0] + C64::new(0.0, 0.0) * x[0] + C64::new(1e6, 0.0)]);
        let j = |x: &CVec| ndarray::arr2(&[[C64::new(2.0, 0.0) * x[0]]]);
        let r = newton_multidim(&f, &j, &arr1(&[C64::new(1.0, 0.5)]), 1e-30, 5);
        match r {
            Err(Error::NoConvergence { best, .. }) => assert_eq!(best.len(), 1),
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }
}
