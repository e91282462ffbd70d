//! Truncated power series arithmetic on complex coefficient vectors.
//!
//! A series is a `&[Complex64]` holding coefficients of `t^0..=t^m`. These
//! routines are shared by the cumulant recovery check and by test oracles
//! that Taylor-expand `log`/`exp` of formal moment series.

use num_complex::Complex64;

/// Product truncated to `len` coefficients.
pub fn mul_trunc(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; len];
    for (i, &ai) in a.iter().enumerate().take(len) {
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `exp` of a truncated series, via the recurrence
/// `n b_n = sum_{k=1}^{n} k a_k b_{n-k}`.
pub fn exp_trunc(a: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut b = vec![Complex64::ZERO; len];
    if len == 0 {
        return b;
    }
    b[0] = a[0].exp();
    for n in 1..len {
        let mut acc = Complex64::ZERO;
        for k in 1..=n {
            if k < a.len() {
                acc += a[k] * k as f64 * b[n - k];
            }
        }
        b[n] = acc / n as f64;
    }
    b
}

/// `log` of a truncated series with nonzero constant term, via
/// `n a_n = sum_{k=1}^{n} k b_k a_{n-k}` solved for `b_n`.
pub fn log_trunc(a: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut b = vec![Complex64::ZERO; len];
    if len == 0 {
        return b;
    }
    let a0 = a[0];
    assert!(a0.norm() > 0.0, "log of series with zero constant term");
    b[0] = a0.ln();
    for n in 1..len {
        let an = if n < a.len() { a[n] } else { Complex64::ZERO };
        let mut acc = an * n as f64;
        for k in 1..n {
            let ank = if n - k < a.len() { a[n - k] } else { Complex64::ZERO };
            acc -= b[k] * k as f64 * ank;
        }
        b[n] = acc / (n as f64 * a0);
    }
    b
}
