//! Quadrature rules: Gauss-Legendre, Gauss-Jacobi, Gauss-Hermite (all via
//! Golub-Welsch on the Jacobi matrix) and an adaptive Simpson rule for
//! general integrands.

use nalgebra::DMatrix;
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Nodes and weights of a quadrature rule.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn integrate_complex(&self, f: impl Fn(f64) -> Complex64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }

    /// Affine map of a `[-1, 1]` rule onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        Rule {
            nodes: self.nodes.iter().map(|&x| mid + half * x).collect(),
            weights: self.weights.iter().map(|&w| w * half).collect(),
        }
    }
}

/// Golub-Welsch: nodes are eigenvalues of the symmetric tridiagonal Jacobi
/// matrix with diagonal `a` and off-diagonal `sqrt(b)`, weights are
/// `mu0 * v[0]^2` per normalized eigenvector.
fn golub_welsch(a: &[f64], b_sqrt: &[f64], mu0: f64) -> Rule {
    let n = a.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = a[i];
        if i + 1 < n {
            m[(i, i + 1)] = b_sqrt[i];
            m[(i + 1, i)] = b_sqrt[i];
        }
    }
    let eig = m.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let v0 = eig.eigenvectors[(0, j)];
            (eig.eigenvalues[j], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Rule {
    let a = vec![0.0; n];
    let b_sqrt: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            (k * k / ((2.0 * k - 1.0) * (2.0 * k + 1.0))).sqrt()
        })
        .collect();
    golub_welsch(&a, &b_sqrt, 2.0)
}

/// Gauss-Hermite rule for the weight `e^{-x^2}` on the whole line.
pub fn gauss_hermite(n: usize) -> Rule {
    let a = vec![0.0; n];
    let b_sqrt: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    golub_welsch(&a, &b_sqrt, std::f64::consts::PI.sqrt())
}

/// Gauss-Jacobi rule for the weight `(1-x)^alpha (1+x)^beta` on `[-1, 1]`.
/// Requires `alpha, beta > -1`.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<Rule> {
    if alpha <= -1.0 || beta <= -1.0 {
        return Err(Error::Bounds(format!(
            "jacobi exponents must exceed -1, got ({alpha}, {beta})"
        )));
    }
    let ab = alpha + beta;
    let mut a = Vec::with_capacity(n);
    let mut b_sqrt = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        let kf = k as f64;
        let denom = (2.0 * kf + ab) * (2.0 * kf + ab + 2.0);
        let ak = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / denom
        };
        a.push(ak);
    }
    for k in 1..n {
        let kf = k as f64;
        let bk = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0))
        } else {
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab)
                / ((2.0 * kf + ab).powi(2) * (2.0 * kf + ab + 1.0) * (2.0 * kf + ab - 1.0))
        };
        b_sqrt.push(bk.sqrt());
    }
    // mu0 = 2^{a+b+1} B(a+1, b+1)
    let lnb = ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0) - ln_gamma(ab + 2.0);
    let mu0 = (2f64).powf(ab + 1.0) * lnb.exp();
    Ok(golub_welsch(&a, &b_sqrt, mu0))
}

/// Rule for `int_0^1 f(u) (1-u)^alpha du` with `alpha > -1`: the weight factor
/// is absorbed into the weights, so `f` is evaluated without the singularity.
pub fn gauss_jacobi_unit_upper(n: usize, alpha: f64) -> Result<Rule> {
    // map x in [-1,1] with weight (1-x)^alpha to u = (x+1)/2 in [0,1]:
    // (1-x)^alpha dx = (2(1-u))^alpha * 2 du
    let base = gauss_jacobi(n, alpha, 0.0)?;
    let scale = 0.5f64.powf(alpha + 1.0);
    Ok(Rule {
        nodes: base.nodes.iter().map(|&x| 0.5 * (x + 1.0)).collect(),
        weights: base.weights.iter().map(|&w| w * scale).collect(),
    })
}

/// Rule for `int_0^1 f(u) u^alpha du` with `alpha > -1`.
pub fn gauss_jacobi_unit_lower(n: usize, alpha: f64) -> Result<Rule> {
    let upper = gauss_jacobi_unit_upper(n, alpha)?;
    Ok(Rule {
        nodes: upper.nodes.iter().map(|&u| 1.0 - u).collect(),
        weights: upper.weights,
    })
}

const SIMPSON_MAX_DEPTH: u32 = 50;

/// Adaptive Simpson quadrature of a complex integrand on `[a, b]`.
pub fn adaptive_simpson_complex(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Complex64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(fa, fm, fb, b - a);
    step(f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

/// Adaptive Simpson quadrature of a real integrand on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let g = |x: f64| Complex64::new(f(x), 0.0);
    Ok(adaptive_simpson_complex(&g, a, b, tol)?.re)
}

fn simpson(fa: Complex64, fm: Complex64, fb: Complex64, h: f64) -> Complex64 {
    (fa + fm * 4.0 + fb) * (h / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn step(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Result<Complex64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if delta.norm() <= 15.0 * tol || (b - a) < 1e-14 * (1.0 + a.abs() + b.abs()) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numeric(format!(
            "adaptive Simpson failed to converge on [{a}, {b}] (residual {:.3e})",
            delta.norm()
        )));
    }
    let l = step(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1)?;
    let r = step(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1)?;
    Ok(l + r)
}
