//! End-to-end eigenstate checks: constrained Bethe roots, fitted from or
//! polished against the exact-diagonalization oracle, must produce boundary
//! Bethe states that the transfer matrix reproduces with its TQ eigenvalue.

use num_complex::Complex64 as C64;
use xxz_chain::gauge::boundary_bethe_state;
use xxz_chain::lattice::{transfer_matrix, BoundaryParams, ChainConfig};
use xxz_chain::numerics::vec_norm;
use xxz_chain::oracle::build_spectrum_table;
use xxz_chain::spectrum::{
    bethe_solve, default_gauge, eigenvalue_from_q, q_fit_from_tau, tau_p_for_constraint,
    EpsilonChoice, QPolynomial,
};

fn test_eta() -> C64 {
    C64::new(0.73, 0.21)
}

fn constrained_boundary(n: usize, m: i64, eps: &EpsilonChoice) -> BoundaryParams {
    let (phi_p, psi_p) = (C64::new(0.41, -0.12), C64::new(0.27, 0.08));
    let (phi_m, psi_m) = (C64::new(-0.52, 0.17), C64::new(0.33, -0.26));
    let tau_m = C64::new(0.15, 0.34);
    let tau_p = tau_p_for_constraint(phi_p, psi_p, phi_m, psi_m, tau_m, eps, n, m, test_eta());
    BoundaryParams::from_phi_psi(phi_p, psi_p, tau_p, phi_m, psi_m, tau_m).unwrap()
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
fn constrained_sector_state_is_transfer_eigenstate_n2_m1() {
    let eta = test_eta();
    let n = 2usize;
    let m = 1usize;
    let eps = EpsilonChoice::phi_aligned(1, 1).unwrap();
    let boundary = constrained_boundary(n, m as i64, &eps);
    let config = ChainConfig::with_default_xi(n, eta).unwrap();
    let table = build_spectrum_table(&config, &boundary, &samples()).unwrap();

    let mut checked = 0usize;
    for branch in 0..table.n_branches() {
        let mut tau_samples = Vec::new();
        for site in 1..=n {
            let t0 = table
                .branch_eigenvalue(&config, &boundary, branch, config.xi_shift(site, 0))
                .unwrap();
            let t1 = table
                .branch_eigenvalue(&config, &boundary, branch, config.xi_shift(site, 1))
                .unwrap();
            tau_samples.push((t0, t1));
        }
        let Ok((roots, rel)) = q_fit_from_tau(&config, &boundary, &eps, m, &tau_samples) else {
            continue;
        };
        if rel > 1e-8 {
            continue;
        }
        let Ok(q) = QPolynomial::new(roots.clone(), &config) else {
            continue;
        };
        // confirm the fitted Q matches the branch off the fitting points
        let lam_check = C64::new(0.49, 0.18);
        let Ok(tq) = eigenvalue_from_q(&config, &boundary, &eps, &q, lam_check) else {
            continue;
        };
        let tb = table
            .branch_eigenvalue(&config, &boundary, branch, lam_check)
            .unwrap();
        if (tq - tb).norm() > 1e-7 * tb.norm().max(1.0) {
            continue;
        }
        // polish through the Bethe solver and build the state
        let sol = bethe_solve(&config, &boundary, &eps, m, &roots, 1e-12, 60).unwrap();
        assert!(sol.residual_inf < 1e-10, "Bethe residual {:.3e}", sol.residual_inf);
        let gauge = default_gauge(&boundary, &eps, eta).unwrap();
        let state = boundary_bethe_state(&config, &boundary, &sol.q.roots, gauge).unwrap();
        let vnorm = vec_norm(&state.vector);
        assert!(vnorm > 1e-12, "state vector collapsed");
        for &lam in &samples() {
            let t = transfer_matrix(&config, &boundary, lam).unwrap();
            let tau = sol.tau(&config, &boundary, lam).unwrap();
            let resid = &t.dot(&state.vector) - &state.vector.mapv(|z| z * tau);
            let rel = vec_norm(&resid) / (vec_norm(&state.vector) * tau.norm().max(1.0));
            assert!(
                rel < 1e-8,
                "branch {branch}: eigen-residual {rel:.3e} at λ = {lam}"
            );
        }
        checked += 1;
    }
    assert!(checked >= 1, "no sector-{m} branch produced an eigenstate");
    eprintln!("eigenstate check: {checked} branches verified in sector M={m}");
}
