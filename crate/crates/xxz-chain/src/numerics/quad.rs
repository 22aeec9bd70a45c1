//! Gauss–Legendre quadrature along straight segments in the complex plane.

use crate::{C64, Result};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

fn node_cache() -> &'static Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss–Legendre nodes and weights on [−1, 1].
///
/// Newton iteration on P_n with the asymptotic cosine initial guess; nodes
/// are accurate to machine precision for the n used here (≤ a few hundred).
pub fn gauss_legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    if let Some(hit) = node_cache().lock().unwrap().get(&n) {
        return hit.clone();
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // initial guess (Abramowitz–Stegun 22.16.6)
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(x) and P_n'(x) by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    node_cache()
        .lock()
        .unwrap()
        .insert(n, (nodes.clone(), weights.clone()));
    (nodes, weights)
}

/// ∫_a^b f(z) dz along the straight segment from a to b, n-point Gauss–Legendre.
pub fn quad_segment(f: &dyn Fn(C64) -> C64, a: C64, b: C64, n: usize) -> C64 {
    let (nodes, weights) = gauss_legendre_nodes(n);
    let half = (b - a) * C64::new(0.5, 0.0);
    let mid = (a + b) * C64::new(0.5, 0.0);
    let mut acc = C64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights.iter()) {
        acc += f(mid + half * C64::new(*x, 0.0)) * C64::new(*w, 0.0);
    }
    acc * half
}

/// Quadrature along a polyline through the given vertices, n points per leg.
pub fn quad_polyline(f: &dyn Fn(C64) -> C64, vertices: &[C64], n: usize) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for pair in vertices.windows(2) {
        acc += quad_segment(f, pair[0], pair[1], n);
    }
    Ok(acc)
}
