//! Gauss-Legendre rules and an order-doubling adaptive wrapper.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Node cap for [`gauss_legendre_adaptive`].
pub const MAX_ADAPTIVE_NODES: usize = 4096;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Newton iteration on `P_n` from the Chebyshev-like initial guesses; the
/// rule is symmetric so only half the roots are solved for.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `n`-point Gauss-Legendre estimate of `∫_lo^hi f`.
pub fn gauss_legendre<F>(f: F, lo: f64, hi: f64, n: usize) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let (nodes, weights) = gauss_legendre_rule(n.max(2));
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    nodes
        .iter()
        .zip(&weights)
        .map(|(&t, &w)| f(mid + half * t) * (w * half))
        .sum()
}

/// Doubles the node count from `n_start` until two successive estimates
/// agree within `tol` (absolute, or relative for large values).
pub fn gauss_legendre_adaptive<F>(f: F, lo: f64, hi: f64, n_start: usize, tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let mut n = n_start.max(2);
    let mut prev = gauss_legendre(&f, lo, hi, n);
    while n < MAX_ADAPTIVE_NODES {
        n *= 2;
        let cur = gauss_legendre(&f, lo, hi, n);
        if (cur - prev).norm() <= tol * cur.norm().max(1.0) {
            return Ok(cur);
        }
        if n >= MAX_ADAPTIVE_NODES {
            return Err(Error::NonConvergence {
                what: format!("adaptive Gauss-Legendre on [{lo}, {hi}] at {n} nodes"),
                previous: prev,
                last: cur,
            });
        }
        prev = cur;
    }
    unreachable!("node cap reached inside the loop")
}

/// Real-valued convenience over [`gauss_legendre`].
pub fn gauss_legendre_real<F>(f: F, lo: f64, hi: f64, n: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    gauss_legendre(|x| Complex64::new(f(x), 0.0), lo, hi, n).re
}
