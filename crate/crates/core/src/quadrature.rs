//! Gauss rules used by the integrators.
//!
//! Laguerre weights for several hundred nodes span more than a thousand
//! orders of magnitude, so the rule is stored as `(node, ln weight)` and
//! weights are only exponentiated after being combined with the integrand.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{invalid, Result};

/// Quadrature node for the measure `e^{-t} dt` on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialNode {
    pub t: f64,
    pub ln_weight: f64,
}

const RESCALE: f64 = 1e150;

/// `(L_n(t), L_{n-1}(t), ln scale)` with `L_k = value · e^{scale}`.
fn laguerre_pair(n: usize, t: f64) -> (f64, f64, f64) {
    let mut prev = 1.0;
    let mut cur = 1.0 - t;
    let mut ln_scale = 0.0;
    if n == 0 {
        return (1.0, 0.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - t) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            ln_scale += RESCALE.ln();
        }
    }
    (cur, prev, ln_scale)
}

/// Number of eigenvalues of the Laguerre Jacobi matrix below `x`
/// (Sturm count through the LDLᵀ pivots).
fn sturm_count(n: usize, x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0 - x;
    if d < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let a = 2.0 * i as f64 + 1.0;
        let b2 = (i * i) as f64;
        let denom = if d == 0.0 { f64::EPSILON } else { d };
        d = a - x - b2 / denom;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn compute_laguerre(n: usize) -> Vec<RadialNode> {
    let upper = 4.0 * n as f64 + 2.0;
    let mut nodes = Vec::with_capacity(n);
    let mut lo_bound = 0.0;
    for k in 0..n {
        // k-th eigenvalue by bisection on the Sturm count
        let (mut lo, mut hi) = (lo_bound, upper);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(n, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..4 {
            let (pn, pm, _) = laguerre_pair(n, t);
            let denom = n as f64 * (pn - pm);
            if denom == 0.0 {
                break;
            }
            let step = t * pn / denom;
            let next = t - step;
            if !(next > lo_bound) || !next.is_finite() {
                break;
            }
            t = next;
            if step.abs() <= 1e-16 * t {
                break;
            }
        }
        let (pn, pm, ln_scale) = laguerre_pair(n, t);
        // L_n'(t) = n (L_n − L_{n−1}) / t ; w = 1 / (t L_n'(t)²)
        let ln_deriv = (n as f64 * (pn - pm) / t).abs().ln() + ln_scale;
        let ln_weight = -t.ln() - 2.0 * ln_deriv;
        nodes.push(RadialNode { t, ln_weight });
        lo_bound = t;
    }
    nodes
}

/// Gauss–Laguerre rule with `n` nodes; cached per size.
pub fn gauss_laguerre(n: usize) -> Result<Arc<Vec<RadialNode>>> {
    if n == 0 {
        return Err(invalid("Gauss–Laguerre rule needs at least one node"));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<RadialNode>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("laguerre cache poisoned").get(&n) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(compute_laguerre(n));
    cache
        .lock()
        .expect("laguerre cache poisoned")
        .insert(n, rule.clone());
    Ok(rule)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 0 { 0.0 } else { p0 };
            dp = nf * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre rule over consecutive `breaks`.
#[derive(Debug, Clone)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(breaks: &[f64], order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order * breaks.len().saturating_sub(1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Breakpoints `0, 1, 2, 4, …` doubling up to `end`, with each panel split
/// further so that no subpanel is longer than `max_width`.
pub fn graded_breaks(end: f64, max_width: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut a = 0.0;
    let mut next = 1.0_f64.min(end);
    while a < end {
        let pieces = ((next - a) / max_width).ceil().max(1.0) as usize;
        let h = (next - a) / pieces as f64;
        for i in 1..pieces {
            breaks.push(a + h * i as f64);
        }
        breaks.push(next);
        a = next;
        next = (2.0 * next).min(end);
    }
    breaks
}

/// `ln k!` for `k = 0..n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    for k in 0..n {
        if k > 1 {
            acc += (k as f64).ln();
        }
        out.push(acc);
    }
    out
}
