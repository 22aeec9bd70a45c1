//! Open XXZ spin-1/2 chain with non-longitudinal boundary fields.
//!
//! The chain lives on ℋ = ⊗_{n=1..N} ℂ², with Hamiltonian
//!
//!   H = Σ_{n<N} [σˣ_n σˣ_{n+1} + σʸ_n σʸ_{n+1} + Δ σᶻ_n σᶻ_{n+1}]
//!       + Σ_a [h₋ᵃ σ₁ᵃ + h₊ᵃ σ_Nᵃ],    Δ = cosh η,
//!
//! with boundary fields parameterized by (ς±, κ±, τ±) or equivalently
//! (φ±, ψ±, τ±). When the six boundary parameters satisfy one constraint,
//! part of the transfer-matrix spectrum is described by a homogeneous
//! TQ-equation and ordinary Bethe equations, and the corresponding
//! eigenstates are generalized (gauged) boundary Bethe states.
//!
//! The crate implements, end to end and at desk scale:
//!
//! - dense construction of R-matrices, K-matrices, bulk/boundary monodromy
//!   and transfer matrices ([`lattice`]),
//! - the Vertex-IRF gauge transformation, gauged operators, boundary Bethe
//!   states and their boundary-bulk decomposition ([`gauge`]),
//! - the constraint bookkeeping, TQ residuals and the constrained
//!   Bethe-equation solver ([`spectrum`]),
//! - the gauged local-operator basis on the first m sites and the action
//!   theorem on boundary Bethe states ([`local_ops`]),
//! - the finite-chain matrix-element formula with its determinant
//!   machinery ([`matel`]),
//! - ground-state densities and multiple-integral correlators of the
//!   half-infinite chain ([`thermo`]),
//! - a brute-force exact-diagonalization oracle used to verify all of the
//!   above at small N ([`oracle`]).
//!
//! Everything is dense complex double-precision linear algebra; the target
//! scale is N ≤ 12 sites.

pub mod numerics;
pub mod lattice;
pub mod gauge;
pub mod spectrum;
pub mod local_ops;
pub mod matel;
pub mod thermo;
pub mod oracle;

pub use num_complex::Complex64 as C64;

/// Crate-wide error type.
///
/// Variants mirror the failure modes of the individual modules; they are
/// deliberately flat so the CLI can map them onto exit codes in one place.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("eigendecomposition failed to converge: {0}")]
    ConvergenceFailure(String),
    #[error("Newton iteration hit a singular Jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("Newton iteration did not converge: residual {residual_inf:.3e} after {iterations} iterations")]
    NoConvergence {
        best: Vec<C64>,
        residual_inf: f64,
        iterations: usize,
    },
    #[error("singular boundary parametrization (sinh ς or κ vanishes)")]
    SingularBoundary,
    #[error("singular gauge: {0}")]
    SingularGauge(String),
    #[error("kinematic singularity (sinh 2λ = 0 at λ = {0})")]
    SingularKinematics(C64),
    #[error("gauge constraint violated: {0}")]
    GaugeConstraintViolated(String),
    #[error("Bethe roots collide (|sinh²λ_i − sinh²λ_j| below tolerance)")]
    RootCollision,
    #[error("boundary constraint does not hold for sector M={m}: residual {residual:.3e}")]
    ConstraintViolated { m: usize, residual: f64 },
    #[error("division by a near-zero quantity: {0}")]
    DivisionNearZero(String),
    #[error("denominator below tolerance ({0}); re-randomize inhomogeneities")]
    PoleHit(String),
    #[error("local-operator basis degenerate: sinh(η b_n) ≈ 0 at site {site}")]
    BasisDegenerate { site: usize },
    #[error("operator word does not conserve the B-operator number (m̃ = {m_tilde})")]
    NonConservingWord { m_tilde: i64 },
    #[error("matrix N is numerically singular (condition estimate {0:.3e})")]
    SingularN(f64),
    #[error("eigenvalue-branch matching is ambiguous: {0}")]
    AmbiguousMatch(String),
    #[error("transfer-matrix spectrum is numerically degenerate (min gap {0:.3e}); re-randomize inhomogeneities")]
    DegenerateSpectrum(f64),
    #[error("parameters are outside the Hermitian regime; ordering by real part is heuristic")]
    NonHermitianRegime,
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("pole of unresolved (non-simple) order near {0}")]
    UnresolvedPoleOrder(C64),
    #[error("quadrature did not converge: drift {0:.3e} under node doubling")]
    QuadratureNotConverged(f64),
    #[error("extrapolation sequence is not convergent: {0}")]
    NonConvergentSequence(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
