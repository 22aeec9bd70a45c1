//! Lattice operators: R-matrices, boundary K-matrices, bulk and boundary
//! monodromy matrices, the transfer matrix and the Hamiltonian, all as dense
//! operators on the 2^N-dimensional chain space.
//!
//! Conventions:
//!
//! - T(λ)  = R_{01}(λ−ξ₁−η/2) ⋯ R_{0N}(λ−ξ_N−η/2)
//! - T̂(λ)  = R_{0N}(λ+ξ_N−η/2) ⋯ R_{01}(λ+ξ₁−η/2)
//! - M(λ)  = R̄_{0N}(λ−ξ_N+η/2) ⋯ R̄_{01}(λ−ξ₁+η/2) = (−1)^N T̂(−λ)
//! - M̂(λ)  = R̄_{01}(λ+ξ₁+η/2) ⋯ R̄_{0N}(λ+ξ_N+η/2) = (−1)^N T(−λ)
//! - 𝒰₋(λ) = T(λ) K₋(λ) T̂(λ) = M̂(−λ) K₋(λ) M(−λ)
//! - 𝒯(λ)  = tr₀[K₊(λ) 𝒰₋(λ)]
//!
//! K₋ carries the (ς₊, κ₊, τ₊) parameters of the field at site N and K₊ the
//! (ς₋, κ₋, τ₋) of the field at site 1.

use crate::numerics::{ccosh, ccoth, csinh, eye, kron, CMat, ONE, ZERO};
use crate::{C64, Error, Result};
use ndarray::{array, Array2};

/// Tolerance used for the genericity condition on the inhomogeneities.
pub const GENERICITY_TOL: f64 = 1e-8;

// ---------------------------------------------------------------------------
// chain configuration
// ---------------------------------------------------------------------------

/// Chain geometry: length, anisotropy parameter η (Δ = cosh η) and the
/// inhomogeneity parameters ξ₁..ξ_N.
#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub n_sites: usize,
    pub eta: C64,
    pub xi: Vec<C64>,
}

impl ChainConfig {
    /// Validates the genericity condition: ξ_j and ξ_j ± ξ_k must avoid
    /// {0, ±η} mod iπ within [`GENERICITY_TOL`].
    pub fn new(n_sites: usize, eta: C64, xi: Vec<C64>) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidInput("chain needs at least one site".into()));
        }
        if xi.len() != n_sites {
            return Err(Error::InvalidInput(format!(
                "expected {n_sites} inhomogeneities, got {}",
                xi.len()
            )));
        }
        let cfg = Self { n_sites, eta, xi };
        let margin = cfg.genericity_margin();
        if margin < GENERICITY_TOL {
            return Err(Error::InvalidInput(format!(
                "inhomogeneities are not generic (margin {margin:.3e}); re-randomize"
            )));
        }
        Ok(cfg)
    }

    /// Deterministic generic recipe ξ_n = c·n·(0.13 + 0.071 i), rescaled so
    /// that |Im ξ_n| stays below π/4.
    pub fn with_default_xi(n_sites: usize, eta: C64) -> Result<Self> {
        let c = 1.0f64.min(0.7 / (0.071 * n_sites as f64));
        let xi = (1..=n_sites)
            .map(|n| C64::new(0.13, 0.071) * C64::new(c * n as f64, 0.0))
            .collect();
        Self::new(n_sites, eta, xi)
    }

    /// Homogeneous-limit member ξ_n = n·δ of the extrapolation family.
    pub fn with_scaled_xi(n_sites: usize, eta: C64, delta: f64) -> Result<Self> {
        let xi = (1..=n_sites).map(|n| C64::new(n as f64 * delta, 0.0)).collect();
        Self::new(n_sites, eta, xi)
    }

    /// Shifted inhomogeneity ξ_n^{(h)} = ξ_n + η/2 − hη (site index 1-based).
    pub fn xi_shift(&self, site: usize, h: u8) -> C64 {
        self.xi[site - 1] + self.eta * C64::new(0.5 - h as f64, 0.0)
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_sites
    }

    /// Smallest |sinh| distance of ξ_j and ξ_j ± ξ_k from {0, ±η} mod iπ.
    pub fn genericity_margin(&self) -> f64 {
        let targets = [ZERO, self.eta, -self.eta];
        let mut margin = f64::INFINITY;
        let mut check = |z: C64| {
            for t in targets {
                margin = margin.min(csinh(z - t).norm());
            }
        };
        for j in 0..self.n_sites {
            check(self.xi[j]);
            for k in 0..self.n_sites {
                if j != k {
                    check(self.xi[j] + self.xi[k]);
                    check(self.xi[j] - self.xi[k]);
                }
            }
        }
        margin
    }
}

// ---------------------------------------------------------------------------
// boundary parameters
// ---------------------------------------------------------------------------

/// Which boundary a quantity refers to. `Plus` is the field at site N
/// (parameters ς₊, κ₊, τ₊ entering K₋), `Minus` the field at site 1
/// (parameters ς₋, κ₋, τ₋ entering K₊).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// The six boundary parameters (ς±, κ±, τ±) together with the derived
/// (φ±, ψ±) of the alternative parametrization
///
///   sinh φ cosh ψ = sinh ς/(2κ),   cosh φ sinh ψ = cosh ς/(2κ).
///
/// For κ = 0 (diagonal K) the (φ, ψ) pair is undefined and the accessors
/// return `SingularBoundary`.
#[derive(Debug, Clone)]
pub struct BoundaryParams {
    pub varsigma_p: C64,
    pub kappa_p: C64,
    pub tau_p: C64,
    pub varsigma_m: C64,
    pub kappa_m: C64,
    pub tau_m: C64,
    phi_psi_p: Option<(C64, C64)>,
    phi_psi_m: Option<(C64, C64)>,
}

/// Principal-branch solution of the reparametrization equations:
/// φ = ½[asinh(u+v) + asinh(u−v)], ψ = ½[asinh(u+v) − asinh(u−v)]
/// with u = sinh ς/(2κ), v = cosh ς/(2κ).
pub fn derive_phi_psi(varsigma: C64, kappa: C64) -> Result<(C64, C64)> {
    if kappa.norm() < 1e-14 {
        return Err(Error::SingularBoundary);
    }
    let u = csinh(varsigma) / (C64::new(2.0, 0.0) * kappa);
    let v = ccosh(varsigma) / (C64::new(2.0, 0.0) * kappa);
    let s = (u + v).asinh();
    let d = (u - v).asinh();
    Ok(((s + d) * C64::new(0.5, 0.0), (s - d) * C64::new(0.5, 0.0)))
}

impl BoundaryParams {
    pub fn from_varsigma(
        varsigma_p: C64,
        kappa_p: C64,
        tau_p: C64,
        varsigma_m: C64,
        kappa_m: C64,
        tau_m: C64,
    ) -> Result<Self> {
        if csinh(varsigma_p).norm() < 1e-14 || csinh(varsigma_m).norm() < 1e-14 {
            return Err(Error::SingularBoundary);
        }
        let phi_psi_p = derive_phi_psi(varsigma_p, kappa_p).ok();
        let phi_psi_m = derive_phi_psi(varsigma_m, kappa_m).ok();
        Ok(Self {
            varsigma_p,
            kappa_p,
            tau_p,
            varsigma_m,
            kappa_m,
            tau_m,
            phi_psi_p,
            phi_psi_m,
        })
    }

    /// Build from the (φ, ψ, τ) parametrization. The given (φ, ψ) are stored
    /// verbatim; (ς, κ) are reconstructed from
    /// sinh ς = u/w, cosh ς = v/w, κ = 1/(2w) with w = √(v²−u²),
    /// u = sinh φ cosh ψ, v = cosh φ sinh ψ.
    pub fn from_phi_psi(
        phi_p: C64,
        psi_p: C64,
        tau_p: C64,
        phi_m: C64,
        psi_m: C64,
        tau_m: C64,
    ) -> Result<Self> {
        let rebuild = |phi: C64, psi: C64| -> Result<(C64, C64)> {
            let u = csinh(phi) * ccosh(psi);
            let v = ccosh(phi) * csinh(psi);
            let w2 = v * v - u * u;
            if w2.norm() < 1e-14 {
                return Err(Error::SingularBoundary);
            }
            let w = w2.sqrt();
            let kappa = C64::new(0.5, 0.0) / w;
            // ς = log(cosh ς + sinh ς)
            let varsigma = ((v + u) / w).ln();
            Ok((varsigma, kappa))
        };
        let (varsigma_p, kappa_p) = rebuild(phi_p, psi_p)?;
        let (varsigma_m, kappa_m) = rebuild(phi_m, psi_m)?;
        Ok(Self {
            varsigma_p,
            kappa_p,
            tau_p,
            varsigma_m,
            kappa_m,
            tau_m,
            phi_psi_p: Some((phi_p, psi_p)),
            phi_psi_m: Some((phi_m, psi_m)),
        })
    }

    pub fn varsigma(&self, side: Side) -> C64 {
        match side {
            Side::Plus => self.varsigma_p,
            Side::Minus => self.varsigma_m,
        }
    }
    pub fn kappa(&self, side: Side) -> C64 {
        match side {
            Side::Plus => self.kappa_p,
            Side::Minus => self.kappa_m,
        }
    }
    pub fn tau(&self, side: Side) -> C64 {
        match side {
            Side::Plus => self.tau_p,
            Side::Minus => self.tau_m,
        }
    }

    pub fn phi_psi(&self, side: Side) -> Result<(C64, C64)> {
        match side {
            Side::Plus => self.phi_psi_p,
            Side::Minus => self.phi_psi_m,
        }
        .ok_or(Error::SingularBoundary)
    }

    /// Residual of the reparametrization identities for one side; NaN-free
    /// only when (φ, ψ) is defined.
    pub fn reparam_residual(&self, side: Side) -> Result<f64> {
        let (phi, psi) = self.phi_psi(side)?;
        let two_k = C64::new(2.0, 0.0) * self.kappa(side);
        let r1 = csinh(phi) * ccosh(psi) - csinh(self.varsigma(side)) / two_k;
        let r2 = ccosh(phi) * csinh(psi) - ccosh(self.varsigma(side)) / two_k;
        Ok(r1.norm().max(r2.norm()))
    }

    /// Field components (h^x, h^y, h^z) from the (ς, κ, τ) parametrization.
    pub fn field(&self, side: Side, eta: C64) -> [C64; 3] {
        let sh = csinh(eta);
        let vs = self.varsigma(side);
        let ka = self.kappa(side);
        let ta = self.tau(side);
        let pre = C64::new(2.0, 0.0) * ka * sh / csinh(vs);
        [
            pre * ccosh(ta),
            C64::new(0.0, 1.0) * pre * csinh(ta),
            sh * ccoth(vs),
        ]
    }

    /// Field components from the (φ, ψ, τ) parametrization; agrees with
    /// [`BoundaryParams::field`] when both are defined.
    pub fn field_from_phi_psi(&self, side: Side, eta: C64) -> Result<[C64; 3]> {
        let (phi, psi) = self.phi_psi(side)?;
        let sh = csinh(eta);
        let ta = self.tau(side);
        let denom = csinh(phi) * ccosh(psi);
        Ok([
            sh * ccosh(ta) / denom,
            C64::new(0.0, 1.0) * sh * csinh(ta) / denom,
            sh * ccoth(phi) * psi.tanh(),
        ])
    }
}

// ---------------------------------------------------------------------------
// R- and K-matrices
// ---------------------------------------------------------------------------

/// 6-vertex trigonometric R-matrix on ℂ²⊗ℂ².
pub fn r_matrix(lambda: C64, eta: C64) -> CMat {
    let a = csinh(lambda + eta);
    let b = csinh(lambda);
    let c = csinh(eta);
    array![
        [a, ZERO, ZERO, ZERO],
        [ZERO, b, c, ZERO],
        [ZERO, c, b, ZERO],
        [ZERO, ZERO, ZERO, a],
    ]
}

/// R̄(λ) = −R(−λ), the R-matrix with η → −η.
pub fn r_bar_matrix(lambda: C64, eta: C64) -> CMat {
    r_matrix(-lambda, eta).mapv(|z| -z)
}

/// Scalar boundary matrix K(λ; ς, κ, τ). Equals the identity at λ = η/2.
pub fn k_matrix(lambda: C64, varsigma: C64, kappa: C64, tau: C64, eta: C64) -> Result<CMat> {
    let sv = csinh(varsigma);
    if sv.norm() < 1e-14 {
        return Err(Error::SingularBoundary);
    }
    let off = csinh(C64::new(2.0, 0.0) * lambda - eta);
    Ok(array![
        [
            csinh(lambda - eta * C64::new(0.5, 0.0) + varsigma) / sv,
            kappa * tau.exp() * off / sv
        ],
        [
            kappa * (-tau).exp() * off / sv,
            csinh(varsigma - lambda + eta * C64::new(0.5, 0.0)) / sv
        ],
    ])
}

/// K₋(λ) = K(λ; ς₊, κ₊, τ₊), the boundary matrix at site N.
pub fn k_minus(boundary: &BoundaryParams, lambda: C64, eta: C64) -> Result<CMat> {
    k_matrix(lambda, boundary.varsigma_p, boundary.kappa_p, boundary.tau_p, eta)
}

/// K₊(λ) = K(λ+η; ς₋, κ₋, τ₋), the boundary matrix at site 1.
pub fn k_plus(boundary: &BoundaryParams, lambda: C64, eta: C64) -> Result<CMat> {
    k_matrix(lambda + eta, boundary.varsigma_m, boundary.kappa_m, boundary.tau_m, eta)
}

// ---------------------------------------------------------------------------
// block matrices over the auxiliary space
// ---------------------------------------------------------------------------

/// A 2×2 matrix over the auxiliary space whose entries are dense operators
/// on the chain space (the A, B, C, D blocks of a monodromy matrix).
#[derive(Debug, Clone)]
pub struct BlockMatrix {
    pub blocks: [[CMat; 2]; 2],
}

impl BlockMatrix {
    pub fn dim(&self) -> usize {
        self.blocks[0][0].nrows()
    }

    pub fn a(&self) -> &CMat {
        &self.blocks[0][0]
    }
    pub fn b(&self) -> &CMat {
        &self.blocks[0][1]
    }
    pub fn c(&self) -> &CMat {
        &self.blocks[1][0]
    }
    pub fn d(&self) -> &CMat {
        &self.blocks[1][1]
    }

    /// Split a 4×4 matrix on aux⊗site into 2×2 site blocks.
    fn from_two_site(m: &CMat) -> [[CMat; 2]; 2] {
        let block = |a: usize, b: usize| -> CMat {
            Array2::from_shape_fn((2, 2), |(i, j)| m[(2 * a + i, 2 * b + j)])
        };
        [[block(0, 0), block(0, 1)], [block(1, 0), block(1, 1)]]
    }

    /// Block product with entries multiplied as operators.
    pub fn mul(&self, rhs: &BlockMatrix) -> BlockMatrix {
        let n = self.dim();
        let mut blocks: [[CMat; 2]; 2] = [
            [Array2::zeros((n, n)), Array2::zeros((n, n))],
            [Array2::zeros((n, n)), Array2::zeros((n, n))],
        ];
        for a in 0..2 {
            for b in 0..2 {
                let mut acc: CMat = Array2::zeros((n, n));
                for c in 0..2 {
                    acc = acc + self.blocks[a][c].dot(&rhs.blocks[c][b]);
                }
                blocks[a][b] = acc;
            }
        }
        BlockMatrix { blocks }
    }

    /// Left-multiply by a scalar 2×2 auxiliary-space matrix.
    pub fn scalar_mul_left(&self, k: &CMat) -> BlockMatrix {
        let n = self.dim();
        let mut blocks: [[CMat; 2]; 2] = [
            [Array2::zeros((n, n)), Array2::zeros((n, n))],
            [Array2::zeros((n, n)), Array2::zeros((n, n))],
        ];
        for a in 0..2 {
            for b in 0..2 {
                let mut acc: CMat = Array2::zeros((n, n));
                for c in 0..2 {
                    acc = acc + self.blocks[c][b].mapv(|z| z * k[(a, c)]);
                }
                blocks[a][b] = acc;
            }
        }
        BlockMatrix { blocks }
    }

    /// Conjugate by scalar auxiliary matrices: S_left · M · S_right.
    pub fn scalar_conjugate(&self, s_left: &CMat, s_right: &CMat) -> BlockMatrix {
        let n = self.dim();
        let mut blocks: [[CMat; 2]; 2] = [
            [Array2::zeros((n, n)), Array2::zeros((n, n))],
            [Array2::zeros((n, n)), Array2::zeros((n, n))],
        ];
        for a in 0..2 {
            for b in 0..2 {
                let mut acc: CMat = Array2::zeros((n, n));
                for c in 0..2 {
                    for d in 0..2 {
                        let coeff = s_left[(a, c)] * s_right[(d, b)];
                        if coeff != ZERO {
                            acc = acc + self.blocks[c][d].mapv(|z| z * coeff);
                        }
                    }
                }
                blocks[a][b] = acc;
            }
        }
        BlockMatrix { blocks }
    }

    /// tr₀[K · M] for a scalar 2×2 auxiliary matrix K.
    pub fn trace_with(&self, k: &CMat) -> CMat {
        let n = self.dim();
        let mut acc: CMat = Array2::zeros((n, n));
        for a in 0..2 {
            for b in 0..2 {
                acc = acc + self.blocks[b][a].mapv(|z| z * k[(a, b)]);
            }
        }
        acc
    }

    pub fn scale(&self, s: C64) -> BlockMatrix {
        BlockMatrix {
            blocks: [
                [self.blocks[0][0].mapv(|z| z * s), self.blocks[0][1].mapv(|z| z * s)],
                [self.blocks[1][0].mapv(|z| z * s), self.blocks[1][1].mapv(|z| z * s)],
            ],
        }
    }

    pub fn sub(&self, rhs: &BlockMatrix) -> BlockMatrix {
        BlockMatrix {
            blocks: [
                [
                    &self.blocks[0][0] - &rhs.blocks[0][0],
                    &self.blocks[0][1] - &rhs.blocks[0][1],
                ],
                [
                    &self.blocks[1][0] - &rhs.blocks[1][0],
                    &self.blocks[1][1] - &rhs.blocks[1][1],
                ],
            ],
        }
    }

    pub fn fro_norm(&self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .map(|m| m.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// Flatten to a dense matrix on aux⊗chain, aux index most significant.
    pub fn to_dense(&self) -> CMat {
        let n = self.dim();
        let mut out = Array2::zeros((2 * n, 2 * n));
        for a in 0..2 {
            for b in 0..2 {
                for i in 0..n {
                    for j in 0..n {
                        out[(a * n + i, b * n + j)] = self.blocks[a][b][(i, j)];
                    }
                }
            }
        }
        out
    }
}

/// Fold site factors in ascending site order (factor at site 1 leftmost in
/// the operator product). `mats[k]` is the 4×4 aux⊗site matrix for site k+1.
fn fold_ascending(mats: &[CMat]) -> BlockMatrix {
    let mut acc = BlockMatrix {
        blocks: BlockMatrix::from_two_site(&mats[0]),
    };
    for m in &mats[1..] {
        let b = BlockMatrix::from_two_site(m);
        let n = acc.dim() * 2;
        let mut blocks: [[CMat; 2]; 2] = [
            [Array2::zeros((n, n)), Array2::zeros((n, n))],
            [Array2::zeros((n, n)), Array2::zeros((n, n))],
        ];
        for i in 0..2 {
            for j in 0..2 {
                let mut s: CMat = Array2::zeros((n, n));
                for c in 0..2 {
                    s = s + kron(&acc.blocks[i][c], &b[c][j]);
                }
                blocks[i][j] = s;
            }
        }
        acc = BlockMatrix { blocks };
    }
    acc
}

/// Fold site factors with descending product order (factor at site N
/// leftmost), sites still laid out in ascending kron order.
fn fold_descending(mats: &[CMat]) -> BlockMatrix {
    let last = mats.len() - 1;
    let mut acc = BlockMatrix {
        blocks: BlockMatrix::from_two_site(&mats[last]),
    };
    for m in mats[..last].iter().rev() {
        let b = BlockMatrix::from_two_site(m);
        let n = acc.dim() * 2;
        let mut blocks: [[CMat; 2]; 2] = [
            [Array2::zeros((n, n)), Array2::zeros((n, n))],
            [Array2::zeros((n, n)), Array2::zeros((n, n))],
        ];
        for i in 0..2 {
            for j in 0..2 {
                let mut s: CMat = Array2::zeros((n, n));
                for c in 0..2 {
                    // acc (sites k+1..N) multiplies from the left in operator
                    // order, the new factor sits at the lower site index
                    s = s + kron(&b[c][j], &acc.blocks[i][c]);
                }
                blocks[i][j] = s;
            }
        }
        acc = BlockMatrix { blocks };
    }
    acc
}

/// Bulk monodromy T(λ) built from R.
pub fn t_monodromy(config: &ChainConfig, lambda: C64) -> BlockMatrix {
    let half = config.eta * C64::new(0.5, 0.0);
    let mats: Vec<CMat> = (1..=config.n_sites)
        .map(|n| r_matrix(lambda - config.xi[n - 1] - half, config.eta))
        .collect();
    fold_ascending(&mats)
}

/// T̂(λ), the reflected companion of T(λ).
pub fn t_hat_monodromy(config: &ChainConfig, lambda: C64) -> BlockMatrix {
    let half = config.eta * C64::new(0.5, 0.0);
    let mats: Vec<CMat> = (1..=config.n_sites)
        .map(|n| r_matrix(lambda + config.xi[n - 1] - half, config.eta))
        .collect();
    fold_descending(&mats)
}

/// Bulk monodromy M(λ) = R̄_{0N}(λ−ξ_N+η/2)⋯R̄_{01}(λ−ξ₁+η/2) with blocks
/// A, B, C, D. Satisfies M(λ) = (−1)^N T̂(−λ).
pub fn bulk_monodromy(config: &ChainConfig, lambda: C64) -> BlockMatrix {
    let half = config.eta * C64::new(0.5, 0.0);
    let mats: Vec<CMat> = (1..=config.n_sites)
        .map(|n| r_bar_matrix(lambda - config.xi[n - 1] + half, config.eta))
        .collect();
    fold_descending(&mats)
}

/// M̂(λ) = R̄_{01}(λ+ξ₁+η/2)⋯R̄_{0N}(λ+ξ_N+η/2) = (−1)^N T(−λ).
pub fn m_hat_monodromy(config: &ChainConfig, lambda: C64) -> BlockMatrix {
    let half = config.eta * C64::new(0.5, 0.0);
    let mats: Vec<CMat> = (1..=config.n_sites)
        .map(|n| r_bar_matrix(lambda + config.xi[n - 1] + half, config.eta))
        .collect();
    fold_ascending(&mats)
}

/// Boundary monodromy 𝒰₋(λ) = T(λ) K₋(λ) T̂(λ) with blocks 𝒜₋, ℬ₋, 𝒞₋, 𝒟₋.
pub fn boundary_monodromy(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    lambda: C64,
) -> Result<BlockMatrix> {
    let km = k_minus(boundary, lambda, config.eta)?;
    let t = t_monodromy(config, lambda);
    let that = t_hat_monodromy(config, lambda);
    Ok(t.mul(&that.scalar_mul_left(&km)))
}

/// Alternative factorization 𝒰₋(λ) = M̂(−λ) K₋(λ) M(−λ); agrees with
/// [`boundary_monodromy`] identically.
pub fn boundary_monodromy_alt(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    lambda: C64,
) -> Result<BlockMatrix> {
    let km = k_minus(boundary, lambda, config.eta)?;
    let mhat = m_hat_monodromy(config, -lambda);
    let m = bulk_monodromy(config, -lambda);
    Ok(mhat.mul(&m.scalar_mul_left(&km)))
}

/// Transfer matrix 𝒯(λ) = tr₀[K₊(λ) 𝒰₋(λ)].
pub fn transfer_matrix(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    lambda: C64,
) -> Result<CMat> {
    let kp = k_plus(boundary, lambda, config.eta)?;
    let u = boundary_monodromy(config, boundary, lambda)?;
    Ok(u.trace_with(&kp))
}

// ---------------------------------------------------------------------------
// Hamiltonian
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn pauli(axis: Axis) -> CMat {
    match axis {
        Axis::X => array![[ZERO, ONE], [ONE, ZERO]],
        Axis::Y => array![[ZERO, -crate::numerics::I], [crate::numerics::I, ZERO]],
        Axis::Z => array![[ONE, ZERO], [ZERO, -ONE]],
    }
}

/// Embed a single-site operator at `site` (1-based) in the N-site space.
pub fn site_op(n_sites: usize, site: usize, op: &CMat) -> CMat {
    let left = eye(1 << (site - 1));
    let right = eye(1 << (n_sites - site));
    kron(&kron(&left, op), &right)
}

/// Total S^z = ½ Σ σ^z_n.
pub fn sz_total(n_sites: usize) -> CMat {
    let mut acc: CMat = Array2::zeros((1 << n_sites, 1 << n_sites));
    for n in 1..=n_sites {
        acc = acc + site_op(n_sites, n, &pauli(Axis::Z)).mapv(|z| z * C64::new(0.5, 0.0));
    }
    acc
}

/// XXZ Hamiltonian with boundary fields, homogeneous couplings:
/// H = Σ_n [σˣσˣ + σʸσʸ + Δ σᶻσᶻ] + Σ_a h₋ᵃ σ₁ᵃ + h₊ᵃ σ_Nᵃ, Δ = cosh η.
pub fn hamiltonian(n_sites: usize, eta: C64, boundary: &BoundaryParams) -> CMat {
    let dim = 1 << n_sites;
    let delta = ccosh(eta);
    let mut h: CMat = Array2::zeros((dim, dim));
    for n in 1..n_sites {
        for (axis, w) in [(Axis::X, ONE), (Axis::Y, ONE), (Axis::Z, delta)] {
            let p = pauli(axis);
            let term = site_op(n_sites, n, &p).dot(&site_op(n_sites, n + 1, &p));
            h = h + term.mapv(|z| z * w);
        }
    }
    let hm = boundary.field(Side::Minus, eta);
    let hp = boundary.field(Side::Plus, eta);
    for (i, axis) in [Axis::X, Axis::Y, Axis::Z].into_iter().enumerate() {
        h = h + site_op(n_sites, 1, &pauli(axis)).mapv(|z| z * hm[i]);
        h = h + site_op(n_sites, n_sites, &pauli(axis)).mapv(|z| z * hp[i]);
    }
    h
}

/// H reconstructed from the transfer matrix through
/// H = 2 (sinh η)^{1−2N} / (tr K₊(η/2) tr K₋(η/2)) · d𝒯/dλ|_{η/2} + const.
/// The derivative is a central difference with one Richardson refinement;
/// the additive constant is not resolved, so callers compare traceless parts.
pub fn hamiltonian_from_transfer(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    fd_step: f64,
) -> Result<CMat> {
    let eta = config.eta;
    let half = eta * C64::new(0.5, 0.0);
    let diff = |h: f64| -> Result<CMat> {
        let tp = transfer_matrix(config, boundary, half + C64::new(h, 0.0))?;
        let tm = transfer_matrix(config, boundary, half - C64::new(h, 0.0))?;
        Ok((&tp - &tm).mapv(|z| z / C64::new(2.0 * h, 0.0)))
    };
    let d1 = diff(fd_step)?;
    let d2 = diff(fd_step / 2.0)?;
    // Richardson for the O(h²) error of the central difference
    let deriv = (&d2.mapv(|z| z * C64::new(4.0, 0.0)) - &d1).mapv(|z| z / C64::new(3.0, 0.0));
    let kp = k_plus(boundary, half, eta)?;
    let km = k_minus(boundary, half, eta)?;
    let tr_kp = kp[(0, 0)] + kp[(1, 1)];
    let tr_km = km[(0, 0)] + km[(1, 1)];
    let pref = C64::new(2.0, 0.0) * csinh(eta).powf(1.0 - 2.0 * config.n_sites as f64)
        / (tr_kp * tr_km);
    Ok(deriv.mapv(|z| z * pref))
}

/// Remove the trace part: A − tr(A)/dim · I.
pub fn traceless(a: &CMat) -> CMat {
    let n = a.nrows();
    let tr: C64 = (0..n).map(|i| a[(i, i)]).sum();
    let shift = tr / C64::new(n as f64, 0.0);
    let mut out = a.clone();
    for i in 0..n {
        out[(i, i)] -= shift;
    }
    out
}
