//! Third diagnostic: m = 2 matrix elements against the oracle.

use num_complex::Complex64 as C64;
use xxz_chain::lattice::{BoundaryParams, ChainConfig};
use xxz_chain::local_ops::{build_e_word, OperatorWord};
use xxz_chain::matel::matel_finite;
use xxz_chain::oracle::build_spectrum_table;
use xxz_chain::spectrum::{
    bethe_solve, eigenvalue_from_q, q_fit_from_tau, tau_p_for_constraint, EpsilonChoice,
    QPolynomial,
};

fn run_case(n: usize, m_sector: usize, words: &[(Vec<u8>, Vec<u8>)]) {
    let eta = C64::new(0.73, 0.21);
    let eps = EpsilonChoice::phi_aligned(1, 1).unwrap();
    let (phi_p, psi_p) = (C64::new(0.41, -0.12), C64::new(0.27, 0.08));
    let (phi_m, psi_m) = (C64::new(-0.52, 0.17), C64::new(0.33, -0.26));
    let tau_m = C64::new(0.15, 0.34);
    let tau_p = tau_p_for_constraint(
        phi_p, psi_p, phi_m, psi_m, tau_m, &eps, n, m_sector as i64, eta,
    );
    let boundary = BoundaryParams::from_phi_psi(phi_p, psi_p, tau_p, phi_m, psi_m, tau_m).unwrap();
    let config = ChainConfig::with_default_xi(n, eta).unwrap();
    let samples = vec![
        C64::new(0.31, 0.24),
        C64::new(-0.42, 0.17),
        C64::new(0.55, -0.39),
        C64::new(0.13, 0.61),
        C64::new(-0.27, -0.33),
    ];
    let table = build_spectrum_table(&config, &boundary, &samples).unwrap();
    let mut found = 0usize;
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
        let Ok((roots, rel)) = q_fit_from_tau(&config, &boundary, &eps, m_sector, &tau_samples)
        else {
            continue;
        };
        if rel > 1e-8 {
            continue;
        }
        let Ok(qq) = QPolynomial::new(roots.clone(), &config) else {
            continue;
        };
        let lam_check = C64::new(0.49, 0.18);
        let Ok(tq) = eigenvalue_from_q(&config, &boundary, &eps, &qq, lam_check) else {
            continue;
        };
        let tb = table
            .branch_eigenvalue(&config, &boundary, branch, lam_check)
            .unwrap();
        if (tq - tb).norm() > 1e-7 * tb.norm().max(1.0) {
            continue;
        }
        let sol = match bethe_solve(&config, &boundary, &eps, m_sector, &roots, 1e-12, 60) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("  branch {branch}: bethe_solve failed: {e}");
                continue;
            }
        };
        for (we, wf) in words {
            let word = OperatorWord::new(we.clone(), wf.clone()).unwrap();
            let formula = match matel_finite(&config, &boundary, &eps, &sol, &word) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("  branch {branch} word {we:?}/{wf:?}: matel error {e}");
                    continue;
                }
            };
            let dense = build_e_word(&config, &word, &sol.gauge).unwrap();
            let oracle_val = table.matel(branch, &dense);
            let rel = (formula - oracle_val).norm() / oracle_val.norm().max(1e-30);
            eprintln!(
                "N={n} M={m_sector} branch {branch} word {we:?}/{wf:?}: rel {rel:.3e} (formula {formula:.6e}, oracle {oracle_val:.6e})"
            );
        }
        found += 1;
        if found >= 2 {
            break;
        }
    }
    assert!(found > 0);
}

#[test]
fn m2_words_n4() {
    run_case(
        4,
        2,
        &[
            (vec![2, 2], vec![2, 2]),
            (vec![1, 2], vec![2, 1]),
            (vec![2, 1], vec![1, 2]),
            (vec![1, 1], vec![1, 1]),
        ],
    );
}

#[test]
fn m1_words_n4_sector2() {
    run_case(4, 2, &[(vec![2], vec![2]), (vec![1], vec![1])]);
}

#[test]
fn m2_words_n5_sector2() {
    run_case(
        5,
        2,
        &[(vec![1, 2], vec![2, 1]), (vec![2, 2], vec![2, 2])],
    );
}
