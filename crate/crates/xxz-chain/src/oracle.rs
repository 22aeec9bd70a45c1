//! Brute-force exact-diagonalization backbone.
//!
//! The transfer matrices form a commuting family, so a single
//! eigendecomposition at one generic spectral parameter yields a common
//! eigenbasis; branch eigenvalues at any other λ follow from the Rayleigh
//! quotients u_b 𝒯(λ) v_b / (u_b · v_b), which is exact up to numerics for
//! a simple spectrum. Branches are therefore labeled by eigenvectors, not
//! by eigenvalue ordering (eigenvalue curves cross freely in λ).

use crate::lattice::{hamiltonian, transfer_matrix, BoundaryParams, ChainConfig};
use crate::numerics::{bilinear, eig_dense, fro_norm, CMat, CVec};
use crate::{C64, Error, Result};

/// Eigen-branch table of the transfer-matrix family on a sample set.
pub struct SpectrumTable {
    pub lambda_samples: Vec<C64>,
    /// eigenvalues\[b\]\[i\] = τ_b(λ_i)
    pub eigenvalues: Vec<Vec<C64>>,
    /// right eigenvectors as columns of a 2^N × 2^N matrix
    pub right: CMat,
    /// left eigenvectors as rows
    pub left: CMat,
    /// u_b · v_b pairings (1 by construction, kept for diagnostics)
    pub pairings: Vec<C64>,
    pub min_gap: f64,
}

impl SpectrumTable {
    pub fn n_branches(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn right_vec(&self, branch: usize) -> CVec {
        self.right.column(branch).to_owned()
    }

    pub fn left_vec(&self, branch: usize) -> CVec {
        self.left.row(branch).to_owned()
    }

    /// τ_b(λ) for arbitrary λ through the Rayleigh quotient.
    pub fn branch_eigenvalue(
        &self,
        config: &ChainConfig,
        boundary: &BoundaryParams,
        branch: usize,
        lambda: C64,
    ) -> Result<C64> {
        let t = transfer_matrix(config, boundary, lambda)?;
        let v = self.right_vec(branch);
        let u = self.left_vec(branch);
        Ok(bilinear(&u, &t.dot(&v)) / self.pairings[branch])
    }

    /// Normalized matrix element u_b · W · v_b / (u_b · v_b).
    pub fn matel(&self, branch: usize, word_matrix: &CMat) -> C64 {
        let v = self.right_vec(branch);
        let u = self.left_vec(branch);
        bilinear(&u, &word_matrix.dot(&v)) / self.pairings[branch]
    }

    /// Match a candidate eigenvalue function to the unique branch agreeing
    /// at all samples within `tol` (relative). Ambiguity and absence are
    /// reported separately.
    pub fn match_branch(&self, tau: &dyn Fn(C64) -> Result<C64>, tol: f64) -> Result<usize> {
        let mut hits = Vec::new();
        for b in 0..self.n_branches() {
            let mut worst = 0.0f64;
            let mut ok = true;
            for (i, &lam) in self.lambda_samples.iter().enumerate() {
                let t = match tau(lam) {
                    Ok(t) => t,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                };
                let reference = self.eigenvalues[b][i];
                let dev = (t - reference).norm() / reference.norm().max(1.0);
                worst = worst.max(dev);
            }
            if ok && worst < tol {
                hits.push((b, worst));
            }
        }
        match hits.len() {
            0 => Err(Error::AmbiguousMatch(
                "no oracle branch matches the candidate eigenvalue".into(),
            )),
            1 => Ok(hits[0].0),
            _ => Err(Error::AmbiguousMatch(format!(
                "{} branches match within tolerance",
                hits.len()
            ))),
        }
    }
}

/// Diagonalize the commuting transfer family on the given samples.
///
/// Certifies commutativity of the family on the first two samples and the
/// simplicity of the spectrum (min gap ≥ 1e−8) before assembling branches.
pub fn build_spectrum_table(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    lambda_samples: &[C64],
) -> Result<SpectrumTable> {
    if config.n_sites > 10 {
        return Err(Error::InvalidInput(
            "oracle diagonalization is capped at N = 10".into(),
        ));
    }
    if lambda_samples.is_empty() {
        return Err(Error::InvalidInput("need at least one λ sample".into()));
    }
    let t0 = transfer_matrix(config, boundary, lambda_samples[0])?;
    if lambda_samples.len() > 1 {
        let t1 = transfer_matrix(config, boundary, lambda_samples[1])?;
        let comm = &t0.dot(&t1) - &t1.dot(&t0);
        let rel = fro_norm(&comm) / (fro_norm(&t0) * fro_norm(&t1));
        if rel > 1e-10 {
            return Err(Error::ConvergenceFailure(format!(
                "transfer matrices do not commute (relative commutator {rel:.3e})"
            )));
        }
    }
    let decomp = eig_dense(&t0)?;
    let gap = decomp.min_gap();
    if gap < 1e-8 {
        return Err(Error::DegenerateSpectrum(gap));
    }
    let dim = t0.nrows();
    let mut eigenvalues = vec![Vec::with_capacity(lambda_samples.len()); dim];
    let pairings: Vec<C64> = (0..dim)
        .map(|b| bilinear(&decomp.left_vec(b), &decomp.right_vec(b)))
        .collect();
    for (i, &lam) in lambda_samples.iter().enumerate() {
        let t = if i == 0 {
            t0.clone()
        } else {
            transfer_matrix(config, boundary, lam)?
        };
        for (b, evs) in eigenvalues.iter_mut().enumerate() {
            let v = decomp.right_vec(b);
            let u = decomp.left_vec(b);
            evs.push(bilinear(&u, &t.dot(&v)) / pairings[b]);
        }
    }
    Ok(SpectrumTable {
        lambda_samples: lambda_samples.to_vec(),
        eigenvalues,
        right: decomp.right,
        left: decomp.left,
        pairings,
        min_gap: gap,
    })
}

/// Ground branch of the Hamiltonian within the transfer eigenbasis.
///
/// The Hamiltonian here is the homogeneous-limit operator; the branch is
/// selected by minimizing the real part of ⟨H⟩ in the transfer eigenbasis
/// built at the (small, generic) inhomogeneities of `config`. For Hermitian
/// parameter regimes this is the ground state up to O(ξ²) mixing; outside
/// that regime the ordering is flagged as heuristic.
pub fn ground_branch(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    table: &SpectrumTable,
    hermitian: bool,
) -> Result<(usize, f64)> {
    if !hermitian {
        return Err(Error::NonHermitianRegime);
    }
    let h = hamiltonian(config.n_sites, config.eta, boundary);
    let mut best = (0usize, f64::INFINITY);
    for b in 0..table.n_branches() {
        let e = table.matel(b, &h);
        if e.re < best.1 {
            best = (b, e.re);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::k_matrix;
    use crate::numerics::{vec_norm, ZERO};
    use crate::spectrum::{eigenvalue_from_q, EpsilonChoice, QPolynomial};

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

    fn samples() -> Vec<C64> {
        vec![
            C64::new(0.31, 0.24),
            C64::new(-0.42, 0.17),
            C64::new(0.55, -0.39),
            C64::new(0.13, 0.61),
            C64::new(-0.27, -0.33),
        ]
    }

    #[test]
    fn branch_count_and_biorthogonality() {
        let eta = test_eta();
        let config = ChainConfig::with_default_xi(3, eta).unwrap();
        let b = generic_boundary();
        let table = build_spectrum_table(&config, &b, &samples()).unwrap();
        assert_eq!(table.n_branches(), 8);
        for j in 0..8 {
            for k in 0..8 {
                let p = bilinear(&table.left_vec(j), &table.right_vec(k));
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!(
                    (p - C64::new(expect, 0.0)).norm() < 1e-9,
                    "pairing ({j},{k})"
                );
            }
        }
    }

    #[test]
    fn branch_eigenvalues_are_even_in_lambda() {
        let eta = test_eta();
        let config = ChainConfig::with_default_xi(3, eta).unwrap();
        let b = generic_boundary();
        let table = build_spectrum_table(&config, &b, &samples()).unwrap();
        let lam = C64::new(0.47, 0.29);
        for branch in 0..table.n_branches() {
            let tp = table.branch_eigenvalue(&config, &b, branch, lam).unwrap();
            let tm = table.branch_eigenvalue(&config, &b, branch, -lam).unwrap();
            assert!(
                (tp - tm).norm() < 1e-10 * tp.norm().max(1.0),
                "branch {branch}"
            );
        }
    }

    #[test]
    fn diagonal_case_matches_tq_closed_form() {
        // κ± = 0: the ABA with Q ≡ 1 (M = 0) gives one eigenvalue branch
        // exactly: τ(λ) = 𝐀_ε(λ) + 𝐀_ε(−λ) with the diagonal 𝐚-factors.
        // In the diagonal case the (φ, ψ) parametrization degenerates, so we
        // evaluate 𝐀_ε through the diagonal K-entries directly:
        // with κ = 0 the boundary factor of the M = 0 eigenvalue is
        // a_diag(λ) = sinh(λ−η/2+ς₊) sinh(λ−η/2+ς₋) / (sinh ς₊ sinh ς₋)
        // up to the same bulk a·d factors; verify against the oracle.
        let eta = test_eta();
        let vs_p = C64::new(0.8, -0.3);
        let vs_m = C64::new(-0.6, 0.25);
        let b = BoundaryParams::from_varsigma(
            vs_p,
            ZERO,
            C64::new(0.4, 0.1),
            vs_m,
            ZERO,
            C64::new(0.2, -0.3),
        )
        .unwrap();
        let config = ChainConfig::with_default_xi(2, eta).unwrap();
        let table = build_spectrum_table(&config, &b, &samples()).unwrap();
        let tau_diag = |lam: C64| -> C64 {
            let two = C64::new(2.0, 0.0);
            let half = eta * C64::new(0.5, 0.0);
            let mut t = ZERO;
            for sgn in [1.0, -1.0] {
                let l = lam * C64::new(sgn, 0.0);
                let mut term = csinh(two * l + eta) / csinh(two * l)
                    * csinh(l - half + vs_p)
                    * csinh(l - half + vs_m)
                    / (csinh(vs_p) * csinh(vs_m));
                if config.n_sites % 2 == 1 {
                    term = -term;
                }
                let (a, _) = crate::spectrum::a_d(&config, l);
                let (_, d) = crate::spectrum::a_d(&config, -l);
                t += term * a * d;
            }
            t
        };
        use crate::numerics::csinh;
        let f = |lam: C64| -> Result<C64> { Ok(tau_diag(lam)) };
        let branch = table.match_branch(&f, 1e-9);
        assert!(branch.is_ok(), "no branch matches the diagonal closed form");
    }

    #[test]
    fn constrained_m1_q_matches_a_branch_n2() {
        // constrained sector: an M = 1 TQ solution must be an oracle branch
        let eta = test_eta();
        let n = 2usize;
        let eps = EpsilonChoice::phi_aligned(1, 1).unwrap();
        let (phi_p, psi_p) = (C64::new(0.41, -0.12), C64::new(0.27, 0.08));
        let (phi_m, psi_m) = (C64::new(-0.52, 0.17), C64::new(0.33, -0.26));
        let tau_m = C64::new(0.15, 0.34);
        let tau_p = crate::spectrum::tau_p_for_constraint(
            phi_p, psi_p, phi_m, psi_m, tau_m, &eps, n, 1, eta,
        );
        let b = BoundaryParams::from_phi_psi(phi_p, psi_p, tau_p, phi_m, psi_m, tau_m).unwrap();
        let config = ChainConfig::with_default_xi(n, eta).unwrap();
        let table = build_spectrum_table(&config, &b, &samples()).unwrap();
        // fit sector-1 Q against each of the four branches; count matches
        let mut matched = 0usize;
        for branch in 0..table.n_branches() {
            let mut tau_samples = Vec::new();
            for site in 1..=n {
                let t0 = table
                    .branch_eigenvalue(&config, &b, branch, config.xi_shift(site, 0))
                    .unwrap();
                let t1 = table
                    .branch_eigenvalue(&config, &b, branch, config.xi_shift(site, 1))
                    .unwrap();
                tau_samples.push((t0, t1));
            }
            let Ok((roots, rel)) = crate::spectrum::q_fit_from_tau(&config, &b, &eps, 1, &tau_samples)
            else {
                continue;
            };
            if rel > 1e-8 {
                continue;
            }
            let Ok(q) = QPolynomial::new(roots, &config) else {
                continue;
            };
            // verify the fitted Q reproduces the branch at fresh sample points
            let mut ok = true;
            for &lam in &samples()[..3] {
                let tq = eigenvalue_from_q(&config, &b, &eps, &q, lam);
                let tb = table.branch_eigenvalue(&config, &b, branch, lam).unwrap();
                match tq {
                    Ok(t) if (t - tb).norm() < 1e-7 * tb.norm().max(1.0) => {}
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                matched += 1;
            }
        }
        assert!(matched >= 1, "no oracle branch carries a sector-1 Q");
    }

    #[test]
    fn k_identity_consistency() {
        // sanity anchor used by several fixtures: K(η/2) = 1 means 𝒯 at η/2
        // reduces to a trace of the double-row product
        let eta = test_eta();
        let b = generic_boundary();
        let k = k_matrix(eta * C64::new(0.5, 0.0), b.varsigma_p, b.kappa_p, b.tau_p, eta).unwrap();
        assert!(fro_norm(&(&k - &crate::numerics::eye(2))) < 1e-13);
    }

    #[test]
    fn ground_branch_zero_field_like() {
        // Hermitian regime: η real, φ/ψ real, τ imaginary
        let eta = C64::new(-0.6, 0.0);
        let b = BoundaryParams::from_phi_psi(
            C64::new(-0.8, 0.0),
            C64::new(0.35, 0.0),
            C64::new(0.0, 0.4),
            C64::new(-0.75, 0.0),
            C64::new(-0.6, 0.0),
            C64::new(0.0, 0.4),
        )
        .unwrap();
        // branch energies carry O(ξ) basis mixing; extrapolate ξ → 0
        let scales = [1e-2, 5e-3, 2.5e-3];
        let mut energies = Vec::new();
        for &delta in &scales {
            let config = ChainConfig::with_scaled_xi(4, eta, delta).unwrap();
            let table = build_spectrum_table(&config, &b, &samples()).unwrap();
            let (branch, energy) = ground_branch(&config, &b, &table, true).unwrap();
            let v = table.right_vec(branch);
            assert!(vec_norm(&v) > 0.0);
            energies.push(C64::new(energy, 0.0));
        }
        let (e0, _) = crate::numerics::extrapolate_to_zero(&scales, &energies).unwrap();
        // the extrapolated ground energy must hit the dense H minimum
        let h = hamiltonian(4, eta, &b);
        let d = eig_dense(&h).unwrap();
        let min_e = d.values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        assert!(
            (e0.re - min_e).abs() < 1e-5 * min_e.abs().max(1.0),
            "extrapolated ⟨H⟩ = {}, dense minimum {min_e}",
            e0.re
        );
        // non-Hermitian regimes are refused
        let config = ChainConfig::with_scaled_xi(4, eta, 5e-3).unwrap();
        let table = build_spectrum_table(&config, &b, &samples()).unwrap();
        assert!(matches!(
            ground_branch(&config, &b, &table, false),
            Err(Error::NonHermitianRegime)
        ));
    }
}
