//! Gauged local-operator basis on the first m sites and the action theorem
//! on generalized boundary Bethe states.
//!
//! A word is a pair of tuples (ε, ε′) ∈ {1,2}^m × {1,2}^m. The associated
//! operator is the Vertex-IRF conjugated product of elementary matrices
//!
//!   ∏ₙ Eₙ^{ε′ₙ,εₙ}(ξₙ|(aₙ,bₙ),(āₙ,b̄ₙ))
//!     = [∏ₖ S_k(−ξ_k|ā_k, b̄_k)] ∏ₙ Eₙ^{ε′ₙεₙ} [∏ₖ S_k(−ξ_k|a_k, b_k)]⁻¹,
//!
//! with per-site gauge sequences
//!
//!   aₙ = α+1,  bₙ = β − Σ_{r≤n} (−1)^{ε_r},
//!   āₙ = α−1,  b̄ₙ = bₙ + 2 m̃_{n+1},   m̃ₙ = Σ_{r≥n} (ε′_r − ε_r).
//!
//! Words with m̃₁ = 0 conserve the number of gauged B-operators and are the
//! ones whose matrix elements close among separate states.

use crate::gauge::{bhat_chain, s_inv, s_matrix, BoundaryBetheState, GaugePair};
use crate::lattice::{site_op, BoundaryParams, ChainConfig};
use crate::numerics::{csinh, eye, kron, CMat, CVec, ONE};
use crate::spectrum::{a_d, a_eps_plus, EpsilonChoice};
use crate::{C64, Error, Result};
use ndarray::Array2;

/// An m-site word (ε, ε′) of the gauged local-operator basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorWord {
    pub eps: Vec<u8>,
    pub eps_prime: Vec<u8>,
}

impl OperatorWord {
    pub fn new(eps: Vec<u8>, eps_prime: Vec<u8>) -> Result<Self> {
        if eps.len() != eps_prime.len() || eps.is_empty() {
            return Err(Error::InvalidInput(
                "word needs equal-length nonempty ε and ε′ tuples".into(),
            ));
        }
        if eps.iter().chain(eps_prime.iter()).any(|&e| e != 1 && e != 2) {
            return Err(Error::InvalidInput("word entries must be 1 or 2".into()));
        }
        Ok(Self { eps, eps_prime })
    }

    pub fn m_sites(&self) -> usize {
        self.eps.len()
    }

    /// m̃ₙ = Σ_{r=n}^m (ε′_r − ε_r), 1-based n, m̃_{m+1} = 0.
    pub fn m_tilde_from(&self, n: usize) -> i64 {
        (n..=self.m_sites())
            .map(|r| self.eps_prime[r - 1] as i64 - self.eps[r - 1] as i64)
            .sum()
    }

    pub fn m_tilde(&self) -> i64 {
        self.m_tilde_from(1)
    }

    pub fn conserving(&self) -> bool {
        self.m_tilde() == 0
    }

    /// Sites with ε_j = 2, ascending: the i_p for p = 1..s.
    pub fn s_sites(&self) -> Vec<usize> {
        (1..=self.m_sites()).filter(|&j| self.eps[j - 1] == 2).collect()
    }

    /// Sites with ε′_j = 1, descending: the i_p for p = s+1..s+s′.
    pub fn sprime_sites(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (1..=self.m_sites())
            .filter(|&j| self.eps_prime[j - 1] == 1)
            .collect();
        v.reverse();
        v
    }

    /// The concatenated site map p ↦ i_p, p = 1..s+s′.
    pub fn i_map(&self) -> Vec<usize> {
        let mut v = self.s_sites();
        v.extend(self.sprime_sites());
        v
    }

    /// bₙ = β − Σ_{r≤n} (−1)^{ε_r}.
    pub fn gauge_b(&self, n: usize, beta: C64) -> C64 {
        let shift: i64 = (1..=n)
            .map(|r| if self.eps[r - 1] == 2 { 1i64 } else { -1 })
            .sum();
        beta - C64::new(shift as f64, 0.0)
    }

    /// b̄ₙ = bₙ + 2 m̃_{n+1}.
    pub fn gauge_bbar(&self, n: usize, beta: C64) -> C64 {
        self.gauge_b(n, beta) + C64::new(2.0 * self.m_tilde_from(n + 1) as f64, 0.0)
    }
}

/// Elementary 2×2 matrix E^{ij} with a single 1 in row i, column j (1-based).
fn elementary(i: u8, j: u8) -> CMat {
    let mut e: CMat = Array2::zeros((2, 2));
    e[(i as usize - 1, j as usize - 1)] = ONE;
    e
}

/// Dense word operator on the full chain, identity on sites m+1..N.
pub fn build_e_word(config: &ChainConfig, word: &OperatorWord, gauge: &GaugePair) -> Result<CMat> {
    let m = word.m_sites();
    if m > config.n_sites {
        return Err(Error::InvalidInput("word longer than the chain".into()));
    }
    let eta = config.eta;
    let mut factor = eye(1);
    for n in 1..=m {
        let b_n = word.gauge_b(n, gauge.beta);
        if csinh(eta * b_n).norm() < 1e-8 {
            return Err(Error::BasisDegenerate { site: n });
        }
        let a_n = gauge.alpha + ONE;
        let abar_n = gauge.alpha - ONE;
        let bbar_n = word.gauge_bbar(n, gauge.beta);
        let left = s_matrix(-config.xi[n - 1], abar_n, bbar_n, eta);
        let right = s_inv(-config.xi[n - 1], a_n, b_n, eta)?;
        let e = elementary(word.eps_prime[n - 1], word.eps[n - 1]);
        let site = left.dot(&e).dot(&right);
        factor = kron(&factor, &site);
    }
    Ok(kron(&factor, &eye(1 << (config.n_sites - m))))
}

// ---------------------------------------------------------------------------
// action theorem
// ---------------------------------------------------------------------------

/// One admissible B-set with one sign assignment: the elementary summand of
/// the action theorem. The coefficient already carries all prefactors, so
/// the acted state is Σ terms of coefficient × 𝐁̂-product state.
#[derive(Debug, Clone)]
pub struct ActionTerm {
    /// Ordered tuple (b₁, …, b_{s+s′}) of removed μ-indices (1-based).
    pub b_set: Vec<usize>,
    /// Sign per tuple entry; forced +1 for indices above M.
    pub sigma: Vec<i8>,
    pub coefficient: C64,
    /// Kept roots {μ_i : i ∉ B} in ascending index order.
    pub resulting_roots: Vec<C64>,
}

/// Extended root list μ_1..μ_{M+m}: the state roots followed by
/// μ_{M+j} = ξ_{m+1−j}^{(1)}.
pub fn extended_roots(config: &ChainConfig, state_roots: &[C64], m_sites: usize) -> Vec<C64> {
    let mut mu = state_roots.to_vec();
    for j in 1..=m_sites {
        mu.push(config.xi_shift(m_sites + 1 - j, 1));
    }
    mu
}

fn enumerate_b_sets(
    m_roots: usize,
    m_sites: usize,
    i_map: &[usize],
    s: usize,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(
        p: usize,
        total: usize,
        m_roots: usize,
        m_sites: usize,
        i_map: &[usize],
        s: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if p == total {
            out.push(current.clone());
            return;
        }
        let hi = if p < s {
            m_roots
        } else {
            m_roots + m_sites + 1 - i_map[p]
        };
        for b in 1..=hi {
            if current.contains(&b) {
                continue;
            }
            current.push(b);
            rec(p + 1, total, m_roots, m_sites, i_map, s, current, out);
            current.pop();
        }
    }
    rec(
        0,
        i_map.len(),
        m_roots,
        m_sites,
        i_map,
        s,
        &mut current,
        &mut out,
    );
    out
}

struct CoeffContext<'a> {
    config: &'a ChainConfig,
    boundary: &'a BoundaryParams,
    eps_plus: i8,
    word: &'a OperatorWord,
    beta: C64,
    mu: Vec<C64>,
    m_roots: usize,
}

impl<'a> CoeffContext<'a> {
    fn xi0(&self, site: usize) -> C64 {
        self.config.xi_shift(site, 0)
    }
    fn xi1(&self, site: usize) -> C64 {
        self.config.xi_shift(site, 1)
    }

    /// The σ-resolved summand of 𝐅̄_B (without the B-independent prefactor).
    fn sigma_summand(&self, b_tuple: &[usize], sigma: &[i8]) -> Result<C64> {
        let eta = self.config.eta;
        let m_sites = self.word.m_sites();
        let i_map = self.word.i_map();
        let s = self.word.s_sites().len();
        let m_roots = self.m_roots;
        let signed = |idx: usize| -> C64 {
            let pos = b_tuple.iter().position(|&b| b == idx);
            match pos {
                Some(p) => self.mu[idx - 1] * C64::new(sigma[p] as f64, 0.0),
                None => self.mu[idx - 1],
            }
        };
        let alpha_plus: Vec<usize> = b_tuple.iter().copied().filter(|&b| b <= m_roots).collect();
        let alpha_minus: Vec<usize> = (1..=m_roots).filter(|i| !alpha_plus.contains(i)).collect();
        let gamma_minus: Vec<usize> = b_tuple
            .iter()
            .copied()
            .filter(|&b| b > m_roots)
            .map(|b| m_roots + m_sites + 1 - b)
            .collect();
        let gamma_plus: Vec<usize> = (1..=m_sites).filter(|c| !gamma_minus.contains(c)).collect();

        let near_zero = |z: C64, what: &str| -> Result<C64> {
            if z.norm() < 1e-12 {
                Err(Error::PoleHit(format!("{what} vanishes")))
            } else {
                Ok(z)
            }
        };

        let mut acc = ONE;
        // ∏ d(μ^σ_{b_j}) / ∏ d(ξ_j^{(1)})
        for (p, &b) in b_tuple.iter().enumerate() {
            let v = self.mu[b - 1] * C64::new(sigma[p] as f64, 0.0);
            let (_, d) = a_d(self.config, v);
            acc *= d;
        }
        for j in 1..=m_sites {
            let (_, d) = a_d(self.config, self.xi1(j));
            acc /= near_zero(d, "d(ξ^{(1)})")?;
        }
        // H_σ(α₊) / H_1(ξ^{(1)}_{γ₊})
        let ap_roots: Vec<C64> = alpha_plus.iter().map(|&i| self.mu[i - 1]).collect();
        let ap_sigma: Vec<i8> = alpha_plus
            .iter()
            .map(|&i| {
                let p = b_tuple.iter().position(|&b| b == i).unwrap();
                sigma[p]
            })
            .collect();
        acc *= crate::gauge::h_sigma(self.config, self.boundary, self.eps_plus, &ap_roots, &ap_sigma)?;
        let gp_roots: Vec<C64> = gamma_plus.iter().map(|&c| self.xi1(c)).collect();
        let gp_sigma = vec![1i8; gp_roots.len()];
        let h_ref =
            crate::gauge::h_sigma(self.config, self.boundary, self.eps_plus, &gp_roots, &gp_sigma)?;
        acc /= near_zero(h_ref, "H₁(ξ^{(1)}_{γ₊})")?;
        // α₋ factor
        for &i in &alpha_minus {
            let mu_i = self.mu[i - 1];
            for e in [1.0, -1.0] {
                let em = mu_i * C64::new(e, 0.0);
                for &j in &alpha_plus {
                    let mj = signed(j);
                    acc *= csinh(mj + em + eta) / near_zero(csinh(mj + em), "sinh(μ_j+εμ_i)")?;
                }
                for &j in &gamma_plus {
                    acc *= csinh(self.xi1(j) + em)
                        / near_zero(csinh(self.xi0(j) + em), "sinh(ξ⁰+εμ)")?;
                }
            }
        }
        // α₊ factor
        for &i in &alpha_plus {
            let mi = signed(i);
            for &j in &gamma_plus {
                acc *= csinh(self.xi1(j) - mi) / near_zero(csinh(self.xi0(j) - mi), "sinh(ξ⁰−μ)")?;
            }
            for &j in &alpha_plus {
                let mj = signed(j);
                acc *= csinh(mj - mi - eta);
                if j != i {
                    acc /= near_zero(csinh(mj - mi), "sinh(μ_j−μ_i)")?;
                }
            }
        }
        // interleaving factor over the b-tuple
        for i in 0..b_tuple.len() {
            for j in i + 1..b_tuple.len() {
                let vi = signed(b_tuple[i]);
                let vj = signed(b_tuple[j]);
                acc *= csinh(vi - vj) / near_zero(csinh(vi - vj - eta), "sinh(μ_i−μ_j−η)")?;
            }
        }
        // p ≤ s block
        for (p, &ip) in i_map.iter().enumerate().take(s) {
            let mb = signed(b_tuple[p]);
            let b_gauge = self.word.gauge_b(ip, self.beta);
            acc *= csinh(self.xi1(ip) - mb + eta * (ONE + b_gauge));
            for k in ip + 1..=m_sites {
                acc *= csinh(mb - self.xi1(k) - eta);
            }
            for k in ip..=m_sites {
                acc /= near_zero(csinh(mb - self.xi1(k)), "sinh(μ−ξ^{(1)})")?;
            }
        }
        // p > s block
        for (p, &ip) in i_map.iter().enumerate().skip(s) {
            let b_val = b_tuple[p];
            let mb = signed(b_val);
            let bbar = self.word.gauge_bbar(ip, self.beta);
            acc *= csinh(self.xi1(ip) - mb - eta * (ONE - bbar));
            for k in ip + 1..=m_sites {
                acc *= csinh(self.xi1(k) - mb - eta);
            }
            let skip = if b_val > m_roots {
                Some(m_roots + m_sites + 1 - b_val)
            } else {
                None
            };
            for k in ip..=m_sites {
                if Some(k) == skip {
                    continue;
                }
                acc /= near_zero(csinh(self.xi1(k) - mb), "sinh(ξ^{(1)}−μ)")?;
            }
        }
        Ok(acc)
    }
}

/// Full action-theorem coefficient 𝐅̄_B for one B-tuple: prefactor times the
/// sum over the α₊ sign assignments.
pub fn action_coefficient(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    eps_plus: i8,
    word: &OperatorWord,
    b_tuple: &[usize],
    state_roots: &[C64],
    beta: C64,
) -> Result<C64> {
    let terms = action_terms_for_b(config, boundary, eps_plus, word, b_tuple, state_roots, beta)?;
    Ok(terms.iter().map(|t| t.coefficient).sum())
}

fn b_prefactor(config: &ChainConfig, word: &OperatorWord, beta: C64) -> Result<C64> {
    let eta = config.eta;
    let m_tilde = word.m_tilde();
    let sign = if ((config.n_sites as i64 + 1) * m_tilde) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    let mut pref = C64::new(sign, 0.0)
        * (eta * C64::new(m_tilde as f64, 0.0) * (beta + C64::new(m_tilde as f64, 0.0))).exp();
    for n in 1..=word.m_sites() {
        let b_n = word.gauge_b(n, beta);
        let s = csinh(eta * b_n);
        if s.norm() < 1e-8 {
            return Err(Error::BasisDegenerate { site: n });
        }
        pref *= eta.exp() / s;
    }
    Ok(pref)
}

/// All (B, σ) summands for one B-tuple.
fn action_terms_for_b(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    eps_plus: i8,
    word: &OperatorWord,
    b_tuple: &[usize],
    state_roots: &[C64],
    beta: C64,
) -> Result<Vec<ActionTerm>> {
    let m_roots = state_roots.len();
    let mu = extended_roots(config, state_roots, word.m_sites());
    let ctx = CoeffContext {
        config,
        boundary,
        eps_plus,
        word,
        beta,
        mu: mu.clone(),
        m_roots,
    };
    let pref = b_prefactor(config, word, beta)?;
    let free: Vec<usize> = (0..b_tuple.len()).filter(|&p| b_tuple[p] <= m_roots).collect();
    let mut out = Vec::new();
    for mask in 0..(1u32 << free.len()) {
        let mut sigma = vec![1i8; b_tuple.len()];
        for (bit, &p) in free.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                sigma[p] = -1;
            }
        }
        let summand = ctx.sigma_summand(b_tuple, &sigma)?;
        let kept: Vec<C64> = (1..=mu.len())
            .filter(|i| !b_tuple.contains(i))
            .map(|i| mu[i - 1])
            .collect();
        out.push(ActionTerm {
            b_set: b_tuple.to_vec(),
            sigma,
            coefficient: pref * summand,
            resulting_roots: kept,
        });
    }
    Ok(out)
}

/// Action of a basis word on a boundary Bethe state: the finite sum over
/// admissible B-sets and sign assignments. The state's gauge must satisfy
/// the reference-matching constraint with ε₊ = ε_{φ+} of `eps_choice`.
pub fn act_on_state(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    eps_choice: &EpsilonChoice,
    word: &OperatorWord,
    state: &BoundaryBetheState,
) -> Result<Vec<ActionTerm>> {
    let eta = config.eta;
    let m_roots = state.roots.len();
    let (gamma, delta) = crate::gauge::internal_gauge(boundary, eps_choice.e_phi_p, eta)?;
    let x_state = state.gauge.sum()
        + C64::new(config.n_sites as f64 - 2.0 * m_roots as f64 - 1.0, 0.0);
    let mismatch = ((eta * (x_state - gamma - delta)).exp() - ONE).norm();
    if mismatch > 1e-8 {
        return Err(Error::GaugeConstraintViolated(format!(
            "state gauge violates the reference-matching condition (residual {mismatch:.3e})"
        )));
    }
    let i_map = word.i_map();
    let s = word.s_sites().len();
    let b_sets = enumerate_b_sets(m_roots, word.m_sites(), &i_map, s);
    let mut out = Vec::new();
    for b_tuple in &b_sets {
        let mut terms = action_terms_for_b(
            config,
            boundary,
            eps_choice.e_phi_p,
            word,
            b_tuple,
            &state.roots,
            state.gauge.beta,
        )?;
        out.append(&mut terms);
    }
    Ok(out)
}

/// Materialize the action-theorem sum as a dense vector:
/// Σ coeff · 𝐁̂_{M+m̃}(kept roots | α−β+1−2m̃) |η, α+β+N−1−2M⟩.
pub fn materialize_action(
    config: &ChainConfig,
    boundary: &BoundaryParams,
    word: &OperatorWord,
    state: &BoundaryBetheState,
    terms: &[ActionTerm],
) -> Result<CVec> {
    let m_roots = state.roots.len();
    let m_tilde = word.m_tilde();
    let u1 = state.gauge.diff() + ONE - C64::new(2.0 * m_tilde as f64, 0.0);
    let x = state.gauge.sum()
        + C64::new(config.n_sites as f64 - 1.0 - 2.0 * m_roots as f64, 0.0);
    let mut acc: CVec = ndarray::Array1::zeros(config.dim());
    // group identical root sets (σ-summands share their resulting state)
    let mut cache: Vec<(Vec<usize>, CVec)> = Vec::new();
    for t in terms {
        let key = t.b_set.clone();
        let hit = cache.iter().find(|(k, _)| *k == key);
        let v = match hit {
            Some((_, v)) => v.clone(),
            None => {
                let v = bhat_chain(config, boundary, &t.resulting_roots, u1, x)?;
                cache.push((key, v.clone()));
                v
            }
        };
        acc = acc + v.mapv(|z| z * t.coefficient);
    }
    Ok(acc)
}
