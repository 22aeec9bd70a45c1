//! Constraint bookkeeping, the functions a, d, 𝐚_ε, 𝐀_ε, Q-polynomials,
//! TQ residuals and the constrained Bethe-equation solver.
//!
//! The boundary parameters satisfy the constraint for sector M and sign
//! choice ε = (ε_{φ+}, ε_{φ−}, ε_{ψ+}, ε_{ψ−}) when
//!
//!   τ₊ − τ₋ = −ε_{φ+}(φ₊+ψ₊) − ε_{φ−}(φ₋−ψ₋) − (N−1−2M)η
//!             + (1−ε_{φ+}ε_{φ−})/2 · iπ   (mod 2iπ),
//!
//! in which case part of the transfer-matrix spectrum is generated by
//! Q-polynomials Q(λ) = ∏_j (sinh²λ − sinh²λ_j) solving the homogeneous
//! TQ-equation τQ = 𝐀_ε Q⁻ + 𝐀_ε(−·) Q⁺, with the roots λ_j solving the
//! corresponding Bethe equations.

use crate::gauge::GaugePair;
use crate::lattice::{BoundaryParams, ChainConfig, Side};
use crate::numerics::{ccosh, ccoth, csinh, ctanh, newton_multidim, CMat, CVec, ONE, ZERO};
use crate::{C64, Error, Result};
use ndarray::{Array1, Array2};

pub use crate::lattice::derive_phi_psi;

/// Sign 4-tuple ε = (ε_{φ+}, ε_{φ−}, ε_{ψ+}, ε_{ψ−}) with product +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpsilonChoice {
    pub e_phi_p: i8,
    pub e_phi_m: i8,
    pub e_psi_p: i8,
    pub e_psi_m: i8,
}

impl EpsilonChoice {
    pub fn new(e_phi_p: i8, e_phi_m: i8, e_psi_p: i8, e_psi_m: i8) -> Result<Self> {
        for s in [e_phi_p, e_phi_m, e_psi_p, e_psi_m] {
            if s != 1 && s != -1 {
                return Err(Error::InvalidInput("epsilon signs must be ±1".into()));
            }
        }
        if e_phi_p * e_phi_m * e_psi_p * e_psi_m != 1 {
            return Err(Error::InvalidInput(
                "epsilon signs must have product +1".into(),
            ));
        }
        Ok(Self {
            e_phi_p,
            e_phi_m,
            e_psi_p,
            e_psi_m,
        })
    }

    /// ε_ψ± aligned with ε_φ±; the product condition then holds automatically.
    pub fn phi_aligned(e_phi_p: i8, e_phi_m: i8) -> Result<Self> {
        Self::new(e_phi_p, e_phi_m, e_phi_p, e_phi_m)
    }

    pub fn negated(&self) -> Self {
        Self {
            e_phi_p: -self.e_phi_p,
            e_phi_m: -self.e_phi_m,
            e_psi_p: -self.e_psi_p,
            e_psi_m: -self.e_psi_m,
        }
    }
}

// ---------------------------------------------------------------------------
// scalar building blocks
// ---------------------------------------------------------------------------

/// a(λ) = ∏ₙ sinh(λ−ξₙ+η/2), d(λ) = ∏ₙ sinh(λ−ξₙ−η/2) = a(λ−η).
pub fn a_d(config: &ChainConfig, lambda: C64) -> (C64, C64) {
    let half = config.eta * C64::new(0.5, 0.0);
    let mut a = ONE;
    let mut d = ONE;
    for &xi in &config.xi {
        a *= csinh(lambda - xi + half);
        d *= csinh(lambda - xi - half);
    }
    (a, d)
}

/// Single-boundary factor 𝐚_ε(λ) with the φ₊, ψ₊ parameters:
/// sinh(λ−η/2+εφ₊) cosh(λ−η/2+εψ₊) / [sinh(εφ₊) cosh(εψ₊)].
pub fn a_eps_plus(boundary: &BoundaryParams, eps: i8, lambda: C64, eta: C64) -> Result<C64> {
    let (phi, psi) = boundary.phi_psi(Side::Plus)?;
    let e = C64::new(eps as f64, 0.0);
    let half = eta * C64::new(0.5, 0.0);
    Ok(csinh(lambda - half + e * phi) * ccosh(lambda - half + e * psi)
        / (csinh(e * phi) * ccosh(e * psi)))
}

/// Two-boundary factor 𝐚_ε(λ):
/// [sinh(λ−η/2+ε_{φ+}φ₊) cosh(λ−η/2+ε_{ψ+}ψ₊) / (sinh ε_{φ+}φ₊ cosh ε_{ψ+}ψ₊)]
/// × [sinh(λ−η/2+ε_{φ−}φ₋) cosh(λ−η/2−ε_{ψ−}ψ₋) / (sinh ε_{φ−}φ₋ cosh ε_{ψ−}ψ₋)].
pub fn a_eps(
    boundary: &BoundaryParams,
    eps: &EpsilonChoice,
    lambda: C64,
    eta: C64,
) -> Result<C64> {
    let (phi_p, psi_p) = boundary.phi_psi(Side::Plus)?;
    let (phi_m, psi_m) = boundary.phi_psi(Side::Minus)?;
    let half = eta * C64::new(0.5, 0.0);
    let efp = C64::new(eps.e_phi_p as f64, 0.0);
    let efm = C64::new(eps.e_phi_m as f64, 0.0);
    let epp = C64::new(eps.e_psi_p as f64, 0.0);
    let epm = C64::new(eps.e_psi_m as f64, 0.0);
    let plus = csinh(lambda - half + efp * phi_p) * ccosh(lambda - half + epp * psi_p)
        / (csinh(efp * phi_p) * ccosh(epp * psi_p));
    let minus = csinh(lambda - half + efm * phi_m) * ccosh(lambda - half - epm * psi_m)
        / (csinh(efm * phi_m) * ccosh(epm * psi_m));
    Ok(plus * minus)
}

/// 𝐀_ε(λ) = (−1)^N [sinh(2λ+η)/sinh 2λ] 𝐚_ε(λ) a(λ) d(−λ).
pub fn cap_a_eps(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    eps: &EpsilonChoice,
    lambda: C64,
) -> Result<C64> {
    let eta = config.eta;
    let two = C64::new(2.0, 0.0);
    let s2 = csinh(two * lambda);
    if s2.norm() < 1e-12 {
        return Err(Error::SingularKinematics(lambda));
    }
    let sign = if config.n_sites % 2 == 0 { 1.0 } else { -1.0 };
    let (a, _) = a_d(config, lambda);
    let (_, d_neg) = a_d(config, -lambda);
    Ok(C64::new(sign, 0.0) * csinh(two * lambda + eta) / s2
        * a_eps(boundary, eps, lambda, eta)?
        * a
        * d_neg)
}

/// 𝔣_ε^{(r)} = [2κ₊κ₋/(sinh ς₊ sinh ς₋)] · [cosh(τ₊−τ₋)
/// − ε_{φ+}ε_{φ−} cosh(ε_{φ+}φ₊ + ε_{φ−}φ₋ + ε_{ψ+}ψ₊ − ε_{ψ−}ψ₋ + (N−1−2r)η)].
pub fn f_eps_r(
    boundary: &BoundaryParams,
    eps: &EpsilonChoice,
    n_sites: usize,
    r: i64,
    eta: C64,
) -> Result<C64> {
    let (phi_p, psi_p) = boundary.phi_psi(Side::Plus)?;
    let (phi_m, psi_m) = boundary.phi_psi(Side::Minus)?;
    let pre = C64::new(2.0, 0.0) * boundary.kappa_p * boundary.kappa_m
        / (csinh(boundary.varsigma_p) * csinh(boundary.varsigma_m));
    let arg = C64::new(eps.e_phi_p as f64, 0.0) * phi_p
        + C64::new(eps.e_phi_m as f64, 0.0) * phi_m
        + C64::new(eps.e_psi_p as f64, 0.0) * psi_p
        - C64::new(eps.e_psi_m as f64, 0.0) * psi_m
        + C64::new((n_sites as i64 - 1 - 2 * r) as f64, 0.0) * eta;
    let sign = C64::new((eps.e_phi_p * eps.e_phi_m) as f64, 0.0);
    Ok(pre * (ccosh(boundary.tau_p - boundary.tau_m) - sign * ccosh(arg)))
}

// ---------------------------------------------------------------------------
// the constraint
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ConstraintReport {
    pub holds: bool,
    /// |e^X − 1| with X the linear combination that must vanish mod 2iπ.
    pub residual: f64,
    pub companion_m: i64,
    pub companion_eps: EpsilonChoice,
}

/// Linear combination τ₊ − τ₋ + ε_{φ+}(φ₊+ψ₊) + ε_{φ−}(φ₋−ψ₋)
/// + (N−1−2M)η − (1−ε_{φ+}ε_{φ−})/2 iπ, which must vanish mod 2iπ.
pub fn constraint_lhs(
    boundary: &BoundaryParams,
    eps: &EpsilonChoice,
    n_sites: usize,
    m: i64,
    eta: C64,
) -> Result<C64> {
    let (phi_p, psi_p) = boundary.phi_psi(Side::Plus)?;
    let (phi_m, psi_m) = boundary.phi_psi(Side::Minus)?;
    let efp = C64::new(eps.e_phi_p as f64, 0.0);
    let efm = C64::new(eps.e_phi_m as f64, 0.0);
    let pi_term = C64::new(0.0, std::f64::consts::PI)
        * C64::new((1 - eps.e_phi_p * eps.e_phi_m) as f64 / 2.0, 0.0);
    Ok(boundary.tau_p - boundary.tau_m
        + efp * (phi_p + psi_p)
        + efm * (phi_m - psi_m)
        + C64::new((n_sites as i64 - 1 - 2 * m) as f64, 0.0) * eta
        - pi_term)
}

/// Checks the boundary constraint for sector (M, ε) mod 2iπ and reports the
/// companion sector (N−1−M, −ε) that carries the same constraint.
///
/// The constraint is a cosh identity, so both linear branches
/// τ₊−τ₋ = ∓[ε_{φ+}(φ₊+ψ₊)+ε_{φ−}(φ₋−ψ₋)+(N−1−2M)η] + (1−ε_{φ+}ε_{φ−})/2 iπ
/// are accepted; this is what makes the companion-sector property
/// (M, ε) ⟺ (N−1−M, −ε) an identity.
pub fn check_constraint(
    boundary: &BoundaryParams,
    eps: &EpsilonChoice,
    n_sites: usize,
    m: i64,
    eta: C64,
) -> Result<ConstraintReport> {
    let x_minus = constraint_lhs(boundary, eps, n_sites, m, eta)?;
    // the + branch is the − branch of the companion sector
    let x_plus = constraint_lhs(&boundary.clone(), &eps.negated(), n_sites, n_sites as i64 - 1 - m, eta)?;
    let residual = (x_minus.exp() - ONE).norm().min((x_plus.exp() - ONE).norm());
    Ok(ConstraintReport {
        holds: residual < 1e-10,
        residual,
        companion_m: n_sites as i64 - 1 - m,
        companion_eps: eps.negated(),
    })
}

/// τ₊ that satisfies the constraint exactly for the given sector, leaving the
/// other five parameters free. Fixture builder for constrained runs.
pub fn tau_p_for_constraint(
    phi_p: C64,
    psi_p: C64,
    phi_m: C64,
    psi_m: C64,
    tau_m: C64,
    eps: &EpsilonChoice,
    n_sites: usize,
    m: i64,
    eta: C64,
) -> C64 {
    let efp = C64::new(eps.e_phi_p as f64, 0.0);
    let efm = C64::new(eps.e_phi_m as f64, 0.0);
    let pi_term = C64::new(0.0, std::f64::consts::PI)
        * C64::new((1 - eps.e_phi_p * eps.e_phi_m) as f64 / 2.0, 0.0);
    tau_m - efp * (phi_p + psi_p) - efm * (phi_m - psi_m)
        - C64::new((n_sites as i64 - 1 - 2 * m) as f64, 0.0) * eta
        + pi_term
}

/// Gauge pair (α, β) fixed by the boundary parameters at site 1:
/// ηα = −τ₋ − ε_{φ−} iπ/2, ηβ = ε_{φ−}(φ₋−ψ₋) + iπ/2,
/// the ε₋ = ε_{φ−}, k = 0 branch (the choice keeps sinh(ηβ) away from zero).
pub fn default_gauge(boundary: &BoundaryParams, eps: &EpsilonChoice, eta: C64) -> Result<GaugePair> {
    let (phi_m, psi_m) = boundary.phi_psi(Side::Minus)?;
    let e = C64::new(eps.e_phi_m as f64, 0.0);
    let half_i_pi = C64::new(0.0, std::f64::consts::FRAC_PI_2);
    let alpha = (-boundary.tau_m - e * half_i_pi) / eta;
    let beta = (e * (phi_m - psi_m) + half_i_pi) / eta;
    Ok(GaugePair::new(alpha, beta))
}

// ---------------------------------------------------------------------------
// Q-polynomials
// ---------------------------------------------------------------------------

/// Q(λ) = ∏_j (sinh²λ − sinh²λ_j), a polynomial of degree M in cosh 2λ.
#[derive(Debug, Clone)]
pub struct QPolynomial {
    pub roots: Vec<C64>,
}

impl QPolynomial {
    /// Validates Σ_Q^M membership: roots pairwise distinct in sinh² and off
    /// the shifted-inhomogeneity lattice cosh 2ξ_n^{(h)}.
    pub fn new(roots: Vec<C64>, config: &ChainConfig) -> Result<Self> {
        crate::gauge::reject_root_collisions(&roots)?;
        let two = C64::new(2.0, 0.0);
        for &r in &roots {
            let cr = ccosh(two * r);
            for n in 1..=config.n_sites {
                for h in 0..=1u8 {
                    let cx = ccosh(two * config.xi_shift(n, h));
                    if (cr - cx).norm() < 1e-10 {
                        return Err(Error::InvalidInput(format!(
                            "Bethe root {r} collides with the ξ-lattice point ξ_{n}^({h})"
                        )));
                    }
                }
            }
        }
        Ok(Self { roots })
    }

    /// The constant polynomial Q ≡ 1 (sector M = 0).
    pub fn one() -> Self {
        Self { roots: Vec::new() }
    }

    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn eval(&self, lambda: C64) -> C64 {
        let s2 = csinh(lambda) * csinh(lambda);
        self.roots
            .iter()
            .map(|&r| s2 - csinh(r) * csinh(r))
            .product()
    }

    /// d/dλ log Q(λ) = Σ_j [coth(λ−λ_j) + coth(λ+λ_j)].
    pub fn log_derivative(&self, lambda: C64) -> C64 {
        self.roots
            .iter()
            .map(|&r| ccoth(lambda - r) + ccoth(lambda + r))
            .sum()
    }
}

/// Canonical root representative: Im λ ∈ (−π/2, π/2] after iπ shifts, then
/// Re λ ≥ 0 by the λ → −λ symmetry (ties on the imaginary axis take Im ≥ 0).
pub fn canonicalize_root(lambda: C64) -> C64 {
    let mut z = lambda;
    let pi = std::f64::consts::PI;
    let shift = ((z.im + pi / 2.0) / pi).floor();
    z = C64::new(z.re, z.im - shift * pi);
    if z.im <= -pi / 2.0 + 1e-14 {
        z = C64::new(z.re, z.im + pi);
    }
    if z.re < -1e-12 || (z.re.abs() <= 1e-12 && z.im < 0.0) {
        z = -z;
        let shift = ((z.im + pi / 2.0) / pi).floor();
        z = C64::new(z.re, z.im - shift * pi);
        if z.im <= -pi / 2.0 + 1e-14 {
            z = C64::new(z.re, z.im + pi);
        }
    }
    z
}

// ---------------------------------------------------------------------------
// TQ residuals
// ---------------------------------------------------------------------------

/// max over the sample points of the homogeneous TQ-equation residual
/// |τQ − 𝐀_ε Q⁻ − 𝐀_ε(−·) Q⁺| / scale.
pub fn tq_residual_hom(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    eps: &EpsilonChoice,
    q: &QPolynomial,
    tau: &dyn Fn(C64) -> C64,
    lambdas: &[C64],
) -> Result<f64> {
    let eta = config.eta;
    let mut worst = 0.0f64;
    for &lam in lambdas {
        let ap = cap_a_eps(config, boundary, eps, lam)?;
        let am = cap_a_eps(config, boundary, eps, -lam)?;
        let t1 = ap * q.eval(lam - eta);
        let t2 = am * q.eval(lam + eta);
        let lhs = tau(lam) * q.eval(lam);
        let scale = t1.norm() + t2.norm() + lhs.norm();
        if scale == 0.0 {
            continue;
        }
        worst = worst.max((lhs - t1 - t2).norm() / scale);
    }
    Ok(worst)
}

/// Inhomogeneous TQ residual, including
/// 𝔣_ε^{(N)} a(λ)a(−λ)d(λ)d(−λ)[cosh²2λ − cosh²η].
pub fn tq_residual_inhom(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    eps: &EpsilonChoice,
    q: &QPolynomial,
    tau: &dyn Fn(C64) -> C64,
    lambdas: &[C64],
) -> Result<f64> {
    let eta = config.eta;
    let f_n = f_eps_r(boundary, eps, config.n_sites, config.n_sites as i64, eta)?;
    let two = C64::new(2.0, 0.0);
    let mut worst = 0.0f64;
    for &lam in lambdas {
        let ap = cap_a_eps(config, boundary, eps, lam)?;
        let am = cap_a_eps(config, boundary, eps, -lam)?;
        let (a_p, d_p) = a_d(config, lam);
        let (a_m, d_m) = a_d(config, -lam);
        let c2 = ccosh(two * lam);
        let inhom = f_n * a_p * a_m * d_p * d_m * (c2 * c2 - ccosh(eta) * ccosh(eta));
        let t1 = ap * q.eval(lam - eta);
        let t2 = am * q.eval(lam + eta);
        let lhs = tau(lam) * q.eval(lam);
        let scale = t1.norm() + t2.norm() + lhs.norm() + inhom.norm();
        if scale == 0.0 {
            continue;
        }
        worst = worst.max((lhs - t1 - t2 - inhom).norm() / scale);
    }
    Ok(worst)
}

/// Residuals of the discrete TQ conditions at the shifted inhomogeneities:
/// Q(ξ_n^{(1)})/Q(ξ_n^{(0)}) = τ(ξ_n^{(0)})/𝐀_ε(ξ_n^{(0)}) = 𝐀_ε(−ξ_n^{(1)})/τ(ξ_n^{(1)}).
/// `tau_samples` holds (τ(ξ_n^{(0)}), τ(ξ_n^{(1)})) per site.
pub fn discrete_tq_check(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    eps: &EpsilonChoice,
    q: &QPolynomial,
    tau_samples: &[(C64, C64)],
) -> Result<f64> {
    if tau_samples.len() != config.n_sites {
        return Err(Error::InvalidInput(
            "discrete_tq_check needs one τ-sample pair per site".into(),
        ));
    }
    let mut worst = 0.0f64;
    for n in 1..=config.n_sites {
        let x0 = config.xi_shift(n, 0);
        let x1 = config.xi_shift(n, 1);
        let q0 = q.eval(x0);
        if q0.norm() < 1e-12 {
            return Err(Error::DivisionNearZero(format!("Q(ξ_{n}^(0)) ≈ 0")));
        }
        let ratio = q.eval(x1) / q0;
        let (t0, t1) = tau_samples[n - 1];
        let a0 = cap_a_eps(config, boundary, eps, x0)?;
        let a1 = cap_a_eps(config, boundary, eps, -x1)?;
        let r1 = (ratio - t0 / a0).norm() / ratio.norm().max(1.0);
        let r2 = (ratio - a1 / t1).norm() / ratio.norm().max(1.0);
        worst = worst.max(r1).max(r2);
    }
    Ok(worst)
}

/// τ(λ) = [𝐀_ε(λ) Q(λ−η) + 𝐀_ε(−λ) Q(λ+η)] / Q(λ).
pub fn eigenvalue_from_q(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    eps: &EpsilonChoice,
    q: &QPolynomial,
    lambda: C64,
) -> Result<C64> {
    let qv = q.eval(lambda);
    let ap = cap_a_eps(config, boundary, eps, lambda)?;
    let am = cap_a_eps(config, boundary, eps, -lambda)?;
    let num = ap * q.eval(lambda - config.eta) + am * q.eval(lambda + config.eta);
    if qv.norm() < 1e-12 * num.norm().max(1.0) {
        return Err(Error::DivisionNearZero(format!("Q({lambda}) ≈ 0")));
    }
    Ok(num / qv)
}

// ---------------------------------------------------------------------------
// Bethe equations
// ---------------------------------------------------------------------------

/// One factor-wise logarithm of the product form of the Bethe equation for
/// root j; the equation is F_j ≡ 0 mod 2πi.
fn bethe_log_form(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    eps: &EpsilonChoice,
    roots: &CVec,
    j: usize,
) -> Result<C64> {
    let eta = config.eta;
    let half = eta * C64::new(0.5, 0.0);
    let lam = roots[j];
    let mut acc = ZERO;
    // a(−λ)d(λ)/(a(λ)d(−λ)) factor-wise
    for &xi in &config.xi {
        acc += csinh(-lam - xi + half).ln() + csinh(lam - xi - half).ln()
            - csinh(lam - xi + half).ln()
            - csinh(-lam - xi - half).ln();
    }
    // boundary factor, σ = ± sides
    let (phi_p, psi_p) = boundary.phi_psi(Side::Plus)?;
    let (phi_m, psi_m) = boundary.phi_psi(Side::Minus)?;
    for (sigma, phi, psi, ef, ep) in [
        (1.0, phi_p, psi_p, eps.e_phi_p, eps.e_psi_p),
        (-1.0, phi_m, psi_m, eps.e_phi_m, eps.e_psi_m),
    ] {
        let f = C64::new(ef as f64, 0.0) * phi;
        let p = C64::new((sigma * ep as f64) as f64, 0.0) * psi;
        acc += csinh(lam + half - f).ln() + ccosh(lam + half - p).ln()
            - csinh(lam - half + f).ln()
            - ccosh(lam - half + p).ln();
    }
    // pair interactions
    for (k, &mu) in roots.iter().enumerate() {
        if k == j {
            continue;
        }
        acc += csinh(lam - mu + eta).ln() + csinh(lam + mu + eta).ln()
            - csinh(lam - mu - eta).ln()
            - csinh(lam + mu - eta).ln();
    }
    Ok(acc)
}

fn bethe_log_jacobian(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    eps: &EpsilonChoice,
    roots: &CVec,
) -> Result<CMat> {
    let eta = config.eta;
    let half = eta * C64::new(0.5, 0.0);
    let m = roots.len();
    let (phi_p, psi_p) = boundary.phi_psi(Side::Plus)?;
    let (phi_m, psi_m) = boundary.phi_psi(Side::Minus)?;
    let mut jac: CMat = Array2::zeros((m, m));
    for j in 0..m {
        let lam = roots[j];
        let mut diag = ZERO;
        for &xi in &config.xi {
            diag += -ccoth(-lam - xi + half) + ccoth(lam - xi - half) - ccoth(lam - xi + half)
                + ccoth(-lam - xi - half);
        }
        for (sigma, phi, psi, ef, ep) in [
            (1.0, phi_p, psi_p, eps.e_phi_p, eps.e_psi_p),
            (-1.0, phi_m, psi_m, eps.e_phi_m, eps.e_psi_m),
        ] {
            let f = C64::new(ef as f64, 0.0) * phi;
            let p = C64::new((sigma * ep as f64) as f64, 0.0) * psi;
            diag += ccoth(lam + half - f) + ctanh(lam + half - p)
                - ccoth(lam - half + f)
                - ctanh(lam - half + p);
        }
        for (k, &mu) in roots.iter().enumerate() {
            if k == j {
                continue;
            }
            diag += ccoth(lam - mu + eta) + ccoth(lam + mu + eta)
                - ccoth(lam - mu - eta)
                - ccoth(lam + mu - eta);
            jac[(j, k)] = -ccoth(lam - mu + eta) + ccoth(lam + mu + eta)
                + ccoth(lam - mu - eta)
                - ccoth(lam + mu - eta);
        }
        jac[(j, j)] = diag;
    }
    Ok(jac)
}

/// Relative residual of the entire form of the Bethe equations
/// 𝐀_ε(λ_j)Q(λ_j−η) + 𝐀_ε(−λ_j)Q(λ_j+η) = 0, max over roots.
pub fn bethe_residual_entire(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    eps: &EpsilonChoice,
    roots: &[C64],
) -> Result<f64> {
    let q = QPolynomial {
        roots: roots.to_vec(),
    };
    let eta = config.eta;
    let mut worst = 0.0f64;
    for &lam in roots {
        let t1 = cap_a_eps(config, boundary, eps, lam)? * q.eval(lam - eta);
        let t2 = cap_a_eps(config, boundary, eps, -lam)? * q.eval(lam + eta);
        let scale = t1.norm() + t2.norm();
        if scale == 0.0 {
            continue;
        }
        worst = worst.max((t1 + t2).norm() / scale);
    }
    Ok(worst)
}

/// Relative deviation of the product form of the Bethe equations from 1,
/// max over roots. The roots must avoid {0, iπ/2} where the rewriting fails.
pub fn bethe_residual_product(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    eps: &EpsilonChoice,
    roots: &[C64],
) -> Result<f64> {
    let v = Array1::from_vec(roots.to_vec());
    let mut worst = 0.0f64;
    for j in 0..roots.len() {
        let f = bethe_log_form(config, boundary, eps, &v, j)?;
        worst = worst.max((f.exp() - ONE).norm());
    }
    Ok(worst)
}

/// A solved constrained Bethe system.
#[derive(Debug, Clone)]
pub struct BetheSolution {
    pub q: QPolynomial,
    pub sector_m: usize,
    pub eps: EpsilonChoice,
    pub gauge: GaugePair,
    pub residual_inf: f64,
}

impl BetheSolution {
    pub fn tau(&self, config: &ChainConfig, boundary: &BoundaryParams, lambda: C64) -> Result<C64> {
        eigenvalue_from_q(config, boundary, &self.eps, &self.q, lambda)
    }
}

/// Solve the Bethe equations in sector M from a seed root configuration.
///
/// The solver works on the factor-wise logarithmic form with the analytic
/// Jacobian; the branch integers are frozen at the seed. The constraint for
/// (M, ε) is checked first, collided roots are rejected, and the returned
/// residual is the entire-form residual at the converged roots.
pub fn bethe_solve(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    eps: &EpsilonChoice,
    m: usize,
    seed: &[C64],
    tol: f64,
    max_iter: usize,
) -> Result<BetheSolution> {
    if seed.len() != m {
        return Err(Error::InvalidInput(format!(
            "seed has {} roots, sector needs {m}",
            seed.len()
        )));
    }
    let report = check_constraint(boundary, eps, config.n_sites, m as i64, config.eta)?;
    if !report.holds {
        return Err(Error::ConstraintViolated {
            m,
            residual: report.residual,
        });
    }
    let x0 = Array1::from_vec(seed.to_vec());
    // freeze branch integers at the seed
    let mut branch = vec![ZERO; m];
    for (j, b) in branch.iter_mut().enumerate() {
        let f = bethe_log_form(config, boundary, eps, &x0, j)?;
        let k = (f.im / (2.0 * std::f64::consts::PI)).round();
        *b = C64::new(0.0, 2.0 * std::f64::consts::PI * k);
    }
    let cfg = config.clone();
    let bnd = boundary.clone();
    let eps_c = *eps;
    let branch_c = branch.clone();
    let residual = move |x: &CVec| -> CVec {
        let mut out = Array1::zeros(x.len());
        for j in 0..x.len() {
            out[j] = match bethe_log_form(&cfg, &bnd, &eps_c, x, j) {
                Ok(f) => f - branch_c[j],
                Err(_) => C64::new(f64::NAN, f64::NAN),
            };
        }
        out
    };
    let cfg2 = config.clone();
    let bnd2 = boundary.clone();
    let jacobian = move |x: &CVec| -> CMat {
        bethe_log_jacobian(&cfg2, &bnd2, &eps_c, x)
            .unwrap_or_else(|_| Array2::zeros((x.len(), x.len())))
    };
    let out = newton_multidim(&residual, &jacobian, &x0, tol, max_iter)?;
    let roots: Vec<C64> = out.x.iter().map(|&z| canonicalize_root(z)).collect();
    let q = QPolynomial::new(roots.clone(), config)?;
    let residual_inf = bethe_residual_entire(config, boundary, eps, &roots)?;
    let gauge = default_gauge(boundary, eps, config.eta)?;
    Ok(BetheSolution {
        q,
        sector_m: m,
        eps: *eps,
        gauge,
        residual_inf,
    })
}

// ---------------------------------------------------------------------------
// Q from τ samples (discrete-TQ least squares)
// ---------------------------------------------------------------------------

/// Fit a sector-M Q-polynomial to transfer eigenvalue samples at the 2N
/// points ξ_n^{(0)}, ξ_n^{(1)} by solving the discrete TQ conditions, which
/// are linear in the coefficients of Q as a polynomial in cosh 2λ.
/// Returns the fitted roots (canonicalized) and the residual of the linear
/// system, normalized by the RHS norm.
pub fn q_fit_from_tau(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    eps: &EpsilonChoice,
    m: usize,
    tau_samples: &[(C64, C64)],
) -> Result<(Vec<C64>, f64)> {
    if tau_samples.len() != config.n_sites {
        return Err(Error::InvalidInput(
            "q_fit_from_tau needs one τ-sample pair per site".into(),
        ));
    }
    let two = C64::new(2.0, 0.0);
    let n = config.n_sites;
    // Q(c) = 2^{−M} c^M + Σ_{k<M} a_k c^k in c = cosh 2λ
    let lead = C64::new(0.5f64.powi(m as i32), 0.0);
    let rows = 2 * n;
    let mut mat: CMat = Array2::zeros((rows, m));
    let mut rhs: CVec = Array1::zeros(rows);
    for site in 1..=n {
        let x0 = config.xi_shift(site, 0);
        let x1 = config.xi_shift(site, 1);
        let c0 = ccosh(two * x0);
        let c1 = ccosh(two * x1);
        let (t0, t1) = tau_samples[site - 1];
        let a0 = cap_a_eps(config, boundary, eps, x0)?;
        let a1 = cap_a_eps(config, boundary, eps, -x1)?;
        // τ(ξ⁰)Q(ξ⁰) − 𝐀(ξ⁰)Q(ξ¹) = 0
        for k in 0..m {
            mat[(2 * (site - 1), k)] = t0 * c0.powu(k as u32) - a0 * c1.powu(k as u32);
        }
        rhs[2 * (site - 1)] = -lead * (t0 * c0.powu(m as u32) - a0 * c1.powu(m as u32));
        // τ(ξ¹)Q(ξ¹) − 𝐀(−ξ¹)Q(ξ⁰) = 0
        for k in 0..m {
            mat[(2 * (site - 1) + 1, k)] = t1 * c1.powu(k as u32) - a1 * c0.powu(k as u32);
        }
        rhs[2 * (site - 1) + 1] = -lead * (t1 * c1.powu(m as u32) - a1 * c0.powu(m as u32));
    }
    // least squares through the normal equations (tiny systems)
    let mut ata: CMat = Array2::zeros((m, m));
    let mut atb: CVec = Array1::zeros(m);
    for i in 0..rows {
        for k in 0..m {
            let mik = mat[(i, k)].conj();
            for l in 0..m {
                ata[(k, l)] += mik * mat[(i, l)];
            }
            atb[k] += mik * rhs[i];
        }
    }
    let coeffs = if m > 0 {
        crate::numerics::solve_lu(&ata, &atb)?
    } else {
        Array1::zeros(0)
    };
    // residual of the full system
    let mut res = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..rows {
        let mut v = -rhs[i];
        for k in 0..m {
            v += mat[(i, k)] * coeffs[k];
        }
        res += v.norm_sqr();
        scale += rhs[i].norm_sqr();
    }
    let rel = (res / scale.max(1e-300)).sqrt();
    // roots of the monic-normalized polynomial in c via companion matrix
    let mut poly = Vec::with_capacity(m + 1);
    for k in 0..m {
        poly.push(coeffs[k] / lead);
    }
    poly.push(ONE); // monic
    let roots_c = poly_roots(&poly)?;
    let mut roots = Vec::with_capacity(m);
    for c in roots_c {
        // cosh 2λ = c → λ = ½ log(c + √(c²−1))
        let lam = (c + (c * c - ONE).sqrt()).ln() * C64::new(0.5, 0.0);
        roots.push(canonicalize_root(lam));
    }
    Ok((roots, rel))
}

/// Roots of a monic polynomial (coefficients low→high, last = 1) via the
/// companion-matrix eigenvalues.
fn poly_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let mut comp: CMat = Array2::zeros((deg, deg));
    for i in 1..deg {
        comp[(i, i - 1)] = ONE;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i];
    }
    let d = crate::numerics::eig_dense(&comp)?;
    Ok(d.values.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoundaryParams;

    fn test_eta() -> C64 {
        C64::new(0.73, 0.21)
    }

    fn generic_boundary() -> BoundaryParams {
        BoundaryParams::from_phi_psi(
            C64::new(0.41, -0.12),
            C64::new(0.27, 0.08),
            C64::new(0.52, 0.31),
            C64::new(-0.52, 0.17),
            C64::new(0.33, -0.26),
            C64::new(0.15, 0.34),
        )
        .unwrap()
    }

    fn eps_pppp() -> EpsilonChoice {
        EpsilonChoice::new(1, 1, 1, 1).unwrap()
    }

    #[test]
    fn epsilon_product_enforced() {
        assert!(EpsilonChoice::new(1, 1, 1, -1).is_err());
        assert!(EpsilonChoice::new(1, -1, -1, 1).is_ok());
        assert!(EpsilonChoice::new(1, 2, 1, 1).is_err());
    }

    #[test]
    fn a_d_relations() {
        let eta = test_eta();
        let config = ChainConfig::with_default_xi(3, eta).unwrap();
        let lam = C64::new(0.42, -0.17);
        let (_, d) = a_d(&config, lam);
        let (a_shift, _) = a_d(&config, lam - eta);
        assert!((d - a_shift).norm() < 1e-13 * d.norm());
        // a(ξ_n − η/2) = 0
        let (a0, _) = a_d(&config, config.xi[1] - eta * C64::new(0.5, 0.0));
        assert!(a0.norm() < 1e-13);
        // N = 1 closed form
        let config1 = ChainConfig::new(1, eta, vec![C64::new(0.3, 0.1)]).unwrap();
        let (a1, d1) = a_d(&config1, lam);
        let half = eta * C64::new(0.5, 0.0);
        assert!((a1 - csinh(lam - config1.xi[0] + half)).norm() < 1e-14);
        assert!((d1 - csinh(lam - config1.xi[0] - half)).norm() < 1e-14);
    }

    #[test]
    fn a_eps_normalization_at_half_eta() {
        // 𝐚_ε(η/2) = 1 for every admissible sign choice
        let eta = test_eta();
        let boundary = generic_boundary();
        let half = eta * C64::new(0.5, 0.0);
        for (p, m, pp, pm) in [
            (1i8, 1i8, 1i8, 1i8),
            (1, -1, 1, -1),
            (-1, 1, -1, 1),
            (-1, -1, 1, 1),
            (1, 1, -1, -1),
        ] {
            let eps = EpsilonChoice::new(p, m, pp, pm).unwrap();
            let v = a_eps(&boundary, &eps, half, eta).unwrap();
            assert!((v - ONE).norm() < 1e-12, "ε = ({p},{m},{pp},{pm})");
        }
    }

    #[test]
    fn cap_a_eps_zero_at_shifted_xi() {
        let eta = test_eta();
        let config = ChainConfig::with_default_xi(3, eta).unwrap();
        let boundary = generic_boundary();
        let eps = eps_pppp();
        // zero of 𝐀_ε at λ = ξ_n − η/2 through a(λ)
        let lam = config.xi[2] - eta * C64::new(0.5, 0.0);
        let v = cap_a_eps(&config, &boundary, &eps, lam).unwrap();
        assert!(v.norm() < 1e-10);
        // kinematic pole guard
        assert!(matches!(
            cap_a_eps(&config, &boundary, &eps, ZERO),
            Err(Error::SingularKinematics(_))
        ));
    }

    #[test]
    fn cap_a_eps_double_entry_evaluation() {
        // independent re-implementation of the defining product at 5 points
        let eta = test_eta();
        let config = ChainConfig::with_default_xi(2, eta).unwrap();
        let boundary = generic_boundary();
        let eps = EpsilonChoice::new(-1, 1, 1, -1).unwrap();
        let (phi_p, psi_p) = boundary.phi_psi(Side::Plus).unwrap();
        let (phi_m, psi_m) = boundary.phi_psi(Side::Minus).unwrap();
        for t in 0..5 {
            let lam = C64::new(0.21 + 0.17 * t as f64, -0.33 + 0.13 * t as f64);
            let v = cap_a_eps(&config, &boundary, &eps, lam).unwrap();
            let half = eta * C64::new(0.5, 0.0);
            let two = C64::new(2.0, 0.0);
            let mut expect = csinh(two * lam + eta) / csinh(two * lam);
            if config.n_sites % 2 == 1 {
                expect = -expect;
            }
            expect *= csinh(lam - half - phi_p) * ccosh(lam - half + psi_p)
                / (csinh(-phi_p) * ccosh(psi_p));
            expect *= csinh(lam - half + phi_m) * ccosh(lam - half + psi_m)
                / (csinh(phi_m) * ccosh(-psi_m));
            for &xi in &config.xi {
                expect *= csinh(lam - xi + half) * csinh(-lam - xi - half);
            }
            assert!((v - expect).norm() < 1e-12 * expect.norm(), "t={t}");
        }
    }

    #[test]
    fn constraint_and_f_eps_consistency() {
        let eta = test_eta();
        let n = 4usize;
        let m = 2i64;
        let eps = eps_pppp();
        let (phi_p, psi_p) = (C64::new(0.41, -0.12), C64::new(0.27, 0.08));
        let (phi_m, psi_m) = (C64::new(-0.52, 0.17), C64::new(0.33, -0.26));
        let tau_m = C64::new(0.15, 0.34);
        let tau_p = tau_p_for_constraint(phi_p, psi_p, phi_m, psi_m, tau_m, &eps, n, m, eta);
        let b = BoundaryParams::from_phi_psi(phi_p, psi_p, tau_p, phi_m, psi_m, tau_m).unwrap();
        let rep = check_constraint(&b, &eps, n, m, eta).unwrap();
        assert!(rep.holds, "residual {:.3e}", rep.residual);
        assert_eq!(rep.companion_m, n as i64 - 1 - m);
        // constraint ⟺ 𝔣_ε^{(M)} = 0
        let f = f_eps_r(&b, &eps, n, m, eta).unwrap();
        assert!(f.norm() < 1e-10, "f = {:.3e}", f.norm());
        // companion sector satisfies the constraint too
        let rep2 = check_constraint(&b, &eps.negated(), n, rep.companion_m, eta).unwrap();
        assert!(rep2.holds, "companion residual {:.3e}", rep2.residual);
        // perturbation breaks it
        let b2 = BoundaryParams::from_phi_psi(
            phi_p,
            psi_p,
            tau_p + C64::new(1e-3, 0.0),
            phi_m,
            psi_m,
            tau_m,
        )
        .unwrap();
        assert!(!check_constraint(&b2, &eps, n, m, eta).unwrap().holds);
        let f2 = f_eps_r(&b2, &eps, n, m, eta).unwrap();
        assert!(f2.norm() > 1e-8);
        // generic parameters: 𝔣 ≠ 0 for every r in 0..N
        for r in 0..n as i64 {
            let f = f_eps_r(&b2, &eps, n, r, eta).unwrap();
            assert!(f.norm() > 1e-8, "r = {r}");
        }
        // κ₊ = 0 kills the prefactor
        let bdiag = BoundaryParams::from_varsigma(
            C64::new(0.8, -0.3),
            ZERO,
            C64::new(0.4, 0.1),
            b.varsigma_m,
            b.kappa_m,
            b.tau_m,
        )
        .unwrap();
        // φ₊ undefined at κ₊=0; the prefactor route needs the (ς,κ) form only
        assert!(matches!(
            f_eps_r(&bdiag, &eps, n, 0, eta),
            Err(Error::SingularBoundary)
        ));
    }

    #[test]
    fn canonicalization_respects_symmetries() {
        let pi = std::f64::consts::PI;
        let z = C64::new(0.4, 0.2);
        // λ, −λ and λ+iπ share a representative
        let c1 = canonicalize_root(z);
        let c2 = canonicalize_root(-z);
        let c3 = canonicalize_root(z + C64::new(0.0, pi));
        assert!((c1 - c2).norm() < 1e-13);
        assert!((c1 - c3).norm() < 1e-13);
        assert!(c1.re >= 0.0 && c1.im > -pi / 2.0 - 1e-14 && c1.im <= pi / 2.0 + 1e-14);
    }

    #[test]
    fn m0_eigenvalue_is_a_sum() {
        let eta = test_eta();
        let config = ChainConfig::with_default_xi(2, eta).unwrap();
        let boundary = generic_boundary();
        let eps = eps_pppp();
        let q = QPolynomial::one();
        let lam = C64::new(0.37, 0.21);
        let tau = eigenvalue_from_q(&config, &boundary, &eps, &q, lam).unwrap();
        let expect = cap_a_eps(&config, &boundary, &eps, lam).unwrap()
            + cap_a_eps(&config, &boundary, &eps, -lam).unwrap();
        assert!((tau - expect).norm() < 1e-13 * expect.norm());
    }

    #[test]
    fn tq_residual_definitional_and_negative_control() {
        let eta = test_eta();
        let config = ChainConfig::with_default_xi(3, eta).unwrap();
        let boundary = generic_boundary();
        let eps = eps_pppp();
        let q = QPolynomial::new(vec![C64::new(0.45, 0.11), C64::new(0.91, -0.32)], &config)
            .unwrap();
        let lambdas: Vec<C64> = (0..7)
            .map(|k| C64::new(0.31 + 0.11 * k as f64, -0.22 + 0.07 * k as f64))
            .collect();
        let cfg = config.clone();
        let bnd = boundary.clone();
        let q2 = q.clone();
        let tau = move |lam: C64| eigenvalue_from_q(&cfg, &bnd, &eps_pppp(), &q2, lam).unwrap();
        let r = tq_residual_hom(&config, &boundary, &eps, &q, &tau, &lambdas).unwrap();
        assert!(r < 1e-12, "definitional residual {r:.3e}");
        // a random Q is O(1) off
        let q_bad =
            QPolynomial::new(vec![C64::new(0.77, 0.41), C64::new(0.13, -0.54)], &config).unwrap();
        let r_bad = tq_residual_hom(&config, &boundary, &eps, &q_bad, &tau, &lambdas).unwrap();
        assert!(r_bad > 1e-3, "negative control too small: {r_bad:.3e}");
    }

    #[test]
    fn inhom_term_vanishes_when_kappa_product_zero() {
        // κ₊ = 0 → inhomogeneous term prefactor 𝔣 uses κ₊κ₋ = 0; here realized
        // through a boundary with φψ defined but τ₊ solved from the constraint,
        // so 𝔣^{(M)} = 0 and the two residuals coincide on eigen-consistent data.
        let eta = test_eta();
        let n = 2usize;
        let m = 1i64;
        let eps = eps_pppp();
        let (phi_p, psi_p) = (C64::new(0.41, -0.12), C64::new(0.27, 0.08));
        let (phi_m, psi_m) = (C64::new(-0.52, 0.17), C64::new(0.33, -0.26));
        let tau_m = C64::new(0.15, 0.34);
        let tau_p = tau_p_for_constraint(phi_p, psi_p, phi_m, psi_m, tau_m, &eps, n, m, eta);
        let b = BoundaryParams::from_phi_psi(phi_p, psi_p, tau_p, phi_m, psi_m, tau_m).unwrap();
        let config = ChainConfig::with_default_xi(n, eta).unwrap();
        let f = f_eps_r(&b, &eps, n, m, eta).unwrap();
        assert!(f.norm() < 1e-12);
        // with 𝔣^{(M)} = 0 but 𝔣^{(N)} ≠ 0 the inhom residual differs from hom
        // unless the inhom term is included consistently; definitional check:
        let q = QPolynomial::new(vec![C64::new(0.52, 0.19)], &config).unwrap();
        let cfg = config.clone();
        let bc = b.clone();
        let qc = q.clone();
        let tau = move |lam: C64| eigenvalue_from_q(&cfg, &bc, &eps_pppp(), &qc, lam).unwrap();
        let lambdas = [C64::new(0.4, 0.3), C64::new(-0.2, 0.5)];
        let r_hom = tq_residual_hom(&config, &b, &eps, &q, &tau, &lambdas).unwrap();
        assert!(r_hom < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let eta = test_eta();
        let config = ChainConfig::with_default_xi(4, eta).unwrap();
        let boundary = generic_boundary();
        let eps = eps_pppp();
        let roots = Array1::from_vec(vec![C64::new(0.42, 0.13), C64::new(0.87, -0.21)]);
        let jac = bethe_log_jacobian(&config, &boundary, &eps, &roots).unwrap();
        let h = 1e-7;
        for j in 0..2 {
            for k in 0..2 {
                let mut xp = roots.clone();
                xp[k] += C64::new(h, 0.0);
                let mut xm = roots.clone();
                xm[k] -= C64::new(h, 0.0);
                let fp = bethe_log_form(&config, &boundary, &eps, &xp, j).unwrap();
                let fm = bethe_log_form(&config, &boundary, &eps, &xm, j).unwrap();
                let fd = (fp - fm) / C64::new(2.0 * h, 0.0);
                let rel = (jac[(j, k)] - fd).norm() / fd.norm().max(1.0);
                assert!(rel < 1e-5, "({j},{k}): rel {rel:.3e}");
            }
        }
    }

    #[test]
    fn q_fit_recovers_planted_roots() {
        // plant a Q, generate τ from it, fit back
        let eta = test_eta();
        let config = ChainConfig::with_default_xi(3, eta).unwrap();
        let boundary = generic_boundary();
        let eps = eps_pppp();
        let planted = vec![C64::new(0.45, 0.11), C64::new(0.91, -0.32)];
        let q = QPolynomial::new(planted.clone(), &config).unwrap();
        let mut samples = Vec::new();
        for n in 1..=config.n_sites {
            let t0 =
                eigenvalue_from_q(&config, &boundary, &eps, &q, config.xi_shift(n, 0)).unwrap();
            let t1 =
                eigenvalue_from_q(&config, &boundary, &eps, &q, config.xi_shift(n, 1)).unwrap();
            samples.push((t0, t1));
        }
        let (fitted, rel) = q_fit_from_tau(&config, &boundary, &eps, 2, &samples).unwrap();
        assert!(rel < 1e-10, "fit residual {rel:.3e}");
        let mut expect: Vec<C64> = planted.iter().map(|&z| canonicalize_root(z)).collect();
        let mut got = fitted.clone();
        expect.sort_by(|a, b| a.re.total_cmp(&b.re));
        got.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (e, g) in expect.iter().zip(got.iter()) {
            assert!((e - g).norm() < 1e-8, "expect {e}, got {g}");
        }
    }
}
