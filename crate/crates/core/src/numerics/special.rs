//! Special functions used by the Laguerre-Gauss basis and the analytic
//! perturbation coefficients.
//!
//! Bessel functions are evaluated for whole order ladders at once
//! (`*_orders`) because the coefficient integrands need every order up to
//! the sum cutoff at each radial node; the single-order entry points are thin
//! wrappers.

use crate::error::{Error, Result};

/// Largest argument accepted by [`bessel_j`].
pub const BESSEL_J_MAX_ARG: f64 = 200.0;
/// Largest argument accepted by [`bessel_i_mod`].
pub const BESSEL_I_MAX_ARG: f64 = 100.0;

const RESCALE_ABOVE: f64 = 1e250;

/// Generalized Laguerre polynomial `L_p^a(x)` by the three-term recurrence.
pub fn assoc_laguerre(p: usize, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..p {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[p] = L_p^a(x)` for `p < out.len()`.
pub fn assoc_laguerre_ladder(a: f64, x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = 1.0 + a - x;
    for k in 1..out.len() - 1 {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0 + a - x) * out[k] - (kf + a) * out[k - 1]) / (kf + 1.0);
    }
}

fn check_arg(name: &'static str, x: f64, max: f64) -> Result<()> {
    if !x.is_finite() || !(0.0..=max).contains(&x) {
        return Err(Error::Domain(format!(
            "{name}: argument {x} outside supported range [0, {max}]"
        )));
    }
    Ok(())
}

/// Starting order for Miller's downward recurrence.
fn miller_start(nmax: usize, x: f64) -> usize {
    let top = (nmax as f64).max(x);
    let start = top + 30.0 + (50.0 * top).sqrt();
    // even start keeps the normalization sums aligned
    (start as usize + 1) & !1
}

/// Bessel functions of the first kind `J_0(x) ..= J_nmax(x)`.
pub fn bessel_j_orders(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_arg("bessel_j", x, BESSEL_J_MAX_ARG)?;
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    if x < 4.0 {
        for (n, v) in out.iter_mut().enumerate() {
            *v = bessel_j_series(n, x);
        }
        return Ok(out);
    }
    // Miller: J_{k-1} = (2k/x) J_k - J_{k+1}, normalized by J_0 + 2 sum J_2k = 1.
    let start = miller_start(nmax, x);
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // cur now holds J_{k-1}, next holds J_k
        if k <= nmax {
            out[k] = next;
        }
        if k % 2 == 0 {
            norm += 2.0 * next;
        }
        if cur.abs() > RESCALE_ABOVE {
            cur /= RESCALE_ABOVE;
            next /= RESCALE_ABOVE;
            norm /= RESCALE_ABOVE;
            for v in out.iter_mut().skip(k) {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    Ok(out)
}

fn bessel_j_series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let q = -half * half;
    for k in 1..200 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Bessel function of the first kind `J_n(x)` for `0 <= x <= 200`.
pub fn bessel_j(n: usize, x: f64) -> Result<f64> {
    Ok(bessel_j_orders(n, x)?[n])
}

/// Signed-order Bessel function, `J_{-n}(x) = (-1)^n J_n(x)`.
pub fn bessel_j_signed(orders: &[f64], n: i64) -> f64 {
    let v = orders[n.unsigned_abs() as usize];
    if n < 0 && n % 2 != 0 {
        -v
    } else {
        v
    }
}

/// Exponentially scaled modified Bessel functions `e^{-x} I_n(x)` for
/// `n = 0 ..= nmax`.
pub fn bessel_i_scaled_orders(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_arg("bessel_i_mod", x, BESSEL_I_MAX_ARG)?;
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    if x <= 20.0 {
        let scale = (-x).exp();
        for (n, v) in out.iter_mut().enumerate() {
            *v = bessel_i_series(n, x) * scale;
        }
        return Ok(out);
    }
    // Miller: I_{k-1} = (2k/x) I_k + I_{k+1}, normalized by I_0 + 2 sum I_k = e^x.
    let start = miller_start(nmax, x);
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur + next;
        next = cur;
        cur = prev;
        if k <= nmax {
            out[k] = next;
        }
        norm += 2.0 * next;
        if cur > RESCALE_ABOVE {
            cur /= RESCALE_ABOVE;
            next /= RESCALE_ABOVE;
            norm /= RESCALE_ABOVE;
            for v in out.iter_mut().skip(k) {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    Ok(out)
}

fn bessel_i_series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let q = half * half;
    for k in 1..500 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Modified Bessel functions `I_0(x) ..= I_nmax(x)`.
pub fn bessel_i_orders(nmax: usize, x: f64) -> Result<Vec<f64>> {
    let scale = x.exp();
    let mut v = bessel_i_scaled_orders(nmax, x)?;
    v.iter_mut().for_each(|e| *e *= scale);
    Ok(v)
}

/// Modified Bessel function of the first kind `I_n(x)` for `0 <= x <= 100`.
pub fn bessel_i_mod(n: usize, x: f64) -> Result<f64> {
    Ok(bessel_i_orders(n, x)?[n])
}

/// `ln(n!)` by direct summation; exact enough for the small orders used here.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_closed_forms() {
        for &(a, x) in &[(0.0, 0.3), (1.0, 2.3), (3.5, 7.0)] {
            assert_eq!(assoc_laguerre(0, a, x), 1.0);
            assert!((assoc_laguerre(1, a, x) - (1.0 + a - x)).abs() < 1e-15);
            let l2 = 0.5 * (x * x - 2.0 * (a + 2.0) * x + (a + 1.0) * (a + 2.0));
            assert!((assoc_laguerre(2, a, x) - l2).abs() < 1e-13);
        }
    }

    #[test]
    fn laguerre_ladder_matches_single() {
        let mut ladder = [0.0; 10];
        assoc_laguerre_ladder(2.0, 1.7, &mut ladder);
        for (p, v) in ladder.iter().enumerate() {
            assert_eq!(*v, assoc_laguerre(p, 2.0, 1.7));
        }
    }

    #[test]
    fn bessel_trivial_values() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
        assert!(bessel_j(0, 2.404825557695773).unwrap().abs() < 1e-9);
        assert_eq!(bessel_i_mod(0, 0.0).unwrap(), 1.0);
        for n in 1..5 {
            assert_eq!(bessel_i_mod(n, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn bessel_domain_errors() {
        assert!(bessel_j(0, -1.0).is_err());
        assert!(bessel_j(0, 200.5).is_err());
        assert!(bessel_j(0, f64::NAN).is_err());
        assert!(bessel_i_mod(0, 100.5).is_err());
    }

    #[test]
    fn signed_order() {
        let j = bessel_j_orders(3, 1.3).unwrap();
        assert_eq!(bessel_j_signed(&j, -3), -j[3]);
        assert_eq!(bessel_j_signed(&j, -2), j[2]);
    }

    #[test]
    fn miller_agrees_with_series_at_crossover() {
        // both branches are valid around the switch points
        for n in 0..8 {
            let miller = bessel_j_orders(n, 4.0).unwrap()[n];
            assert!((miller - bessel_j_series(n, 4.0)).abs() < 1e-13, "J_{n}(4)");
            let i_miller = bessel_i_scaled_orders(n, 20.5).unwrap()[n];
            let i_series = bessel_i_series(n, 20.5) * (-20.5f64).exp();
            assert!(((i_miller - i_series) / i_series).abs() < 1e-13, "I_{n}(20.5)");
        }
    }
}
