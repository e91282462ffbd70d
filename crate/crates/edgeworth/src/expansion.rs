//! Edgeworth expansion polynomials P_k and a_k, density corrections q_k,
//! the approximants phi_m / u_m / e_m, and the projection fixed-point check.

use num_complex::Complex64;

use crate::combinatorics::{enumerate_weighted_partitions, factorial_u128};
use crate::cumulants::{hermite, CumulantVector};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::series::{exp_trunc, log_trunc, mul_trunc};

/// Tolerance for the mean-0 / variance-1 precondition on cumulant input.
pub const STANDARDIZED_TOL: f64 = 1e-8;

const SQRT_2PI: f64 = 2.5066282746310002;

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Moment order `s` split into integer part `m` and fractional part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionOrder {
    pub s: f64,
    pub m: usize,
    pub alpha_frac: f64,
}

impl ExpansionOrder {
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() || s < 2.0 {
            return Err(Error::Precondition(format!("order s must be >= 2, got {s}")));
        }
        let m = s.floor() as usize;
        Ok(ExpansionOrder {
            s,
            m,
            alpha_frac: s - m as f64,
        })
    }
}

/// Shared partition sum behind P_k and a_k: for each weighted partition
/// (p_1, ..., p_k) of k (optionally restricted to parts <= max_part), add
/// `prod_j (1/p_j!) (gamma_{j+2}/(j+2)!)^{p_j}` times `t^{k+2 sum p_j}`.
fn partition_poly(k: usize, max_part: Option<usize>, cumulants: &CumulantVector) -> Result<Poly> {
    let mut coeffs = vec![Complex64::ZERO; 3 * k + 1];
    for part in enumerate_weighted_partitions(k)? {
        if let Some(cap) = max_part {
            if part.max_part() > cap {
                continue;
            }
        }
        let mut c = 1.0;
        for (idx, &pj) in part.counts().iter().enumerate() {
            let j = idx + 1;
            if pj > 0 {
                let base = cumulants.gamma(j + 2) / factorial_u128(j + 2) as f64;
                c *= base.powi(pj as i32) / factorial_u128(pj as usize) as f64;
            }
        }
        let power = k + 2 * part.total_parts() as usize;
        coeffs[power] += Complex64::new(c, 0.0);
    }
    Ok(Poly::new(coeffs))
}

fn require_standardized(cumulants: &CumulantVector) -> Result<()> {
    if !cumulants.is_standardized(STANDARDIZED_TOL) {
        return Err(Error::Precondition(
            "cumulant vector must be standardized (gamma_1 = 0, gamma_2 = 1)".into(),
        ));
    }
    Ok(())
}

/// P_k of Def 6.1: the partition sum over all weighted partitions of k.
/// Requires `1 <= k <= cumulants.order() - 2` and standardized input.
pub fn pk_polynomial(k: usize, cumulants: &CumulantVector) -> Result<Poly> {
    require_standardized(cumulants)?;
    if k < 1 || k + 2 > cumulants.order() {
        return Err(Error::Bounds(format!(
            "pk index {k} out of range for cumulant order {}",
            cumulants.order()
        )));
    }
    partition_poly(k, None, cumulants)
}

/// a_k of Eq (6.4): the same partition sum restricted to parts <= m-2, so
/// only gamma_3..gamma_m enter. For k <= m-2 this coincides with P_k.
pub fn ak_polynomial(k: usize, m: usize, cumulants: &CumulantVector) -> Result<Poly> {
    require_standardized(cumulants)?;
    if k < 1 {
        return Err(Error::Bounds("ak index must be >= 1".into()));
    }
    if m < 3 || m > cumulants.order() {
        return Err(Error::Bounds(format!(
            "need 3 <= m <= cumulant order, got m={m}, order={}",
            cumulants.order()
        )));
    }
    partition_poly(k, Some(m - 2), cumulants)
}

/// Density correction q_k of Eq (1.2): `q_k(x) = phi(x) * combo(x)` where
/// `combo` is the Hermite-polynomial combination with the P_k partition
/// coefficients.
#[derive(Debug, Clone)]
pub struct QkTerm {
    combo: Poly,
}

impl QkTerm {
    pub fn eval(&self, x: f64) -> f64 {
        phi(x) * self.combo.eval_real(x).re
    }

    /// The polynomial factor multiplying phi(x).
    pub fn combo(&self) -> &Poly {
        &self.combo
    }
}

pub fn qk_density_term(k: usize, cumulants: &CumulantVector) -> Result<QkTerm> {
    require_standardized(cumulants)?;
    if k < 1 || k + 2 > cumulants.order() {
        return Err(Error::Bounds(format!(
            "qk index {k} out of range for cumulant order {}",
            cumulants.order()
        )));
    }
    let mut combo = Poly::zero();
    for part in enumerate_weighted_partitions(k)? {
        let mut c = 1.0;
        for (idx, &pj) in part.counts().iter().enumerate() {
            let j = idx + 1;
            if pj > 0 {
                let base = cumulants.gamma(j + 2) / factorial_u128(j + 2) as f64;
                c *= base.powi(pj as i32) / factorial_u128(pj as usize) as f64;
            }
        }
        let h = hermite(k + 2 * part.total_parts() as usize)?;
        combo = combo.add(&h.scale(Complex64::new(c, 0.0)));
    }
    Ok(QkTerm { combo })
}

/// Order-m Edgeworth approximant for sample count n:
/// `phi_m(x) = phi(x) + sum_{k=1}^{m-2} q_k(x) n^{-k/2}` on the density side,
/// `u_m(t,z) = e^{-t^2/2}(1 + sum P_k(it) z^k)` on the Fourier side.
#[derive(Debug, Clone)]
pub struct EdgeworthApproximant {
    order: ExpansionOrder,
    n: u64,
    q_terms: Vec<QkTerm>,
    p_polys: Vec<Poly>,
}

impl EdgeworthApproximant {
    pub fn new(order: ExpansionOrder, cumulants: &CumulantVector, n: u64) -> Result<Self> {
        require_standardized(cumulants)?;
        if n == 0 {
            return Err(Error::Precondition("sample count n must be positive".into()));
        }
        if cumulants.order() < order.m {
            return Err(Error::Precondition(format!(
                "need cumulants up to order m={}, got {}",
                order.m,
                cumulants.order()
            )));
        }
        let upper = order.m.saturating_sub(2);
        let mut q_terms = Vec::with_capacity(upper);
        let mut p_polys = Vec::with_capacity(upper);
        for k in 1..=upper {
            q_terms.push(qk_density_term(k, cumulants)?);
            p_polys.push(pk_polynomial(k, cumulants)?);
        }
        Ok(EdgeworthApproximant {
            order,
            n,
            q_terms,
            p_polys,
        })
    }

    pub fn order(&self) -> ExpansionOrder {
        self.order
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Pointwise value of the signed approximant phi_m at x.
    pub fn phi_m(&self, x: f64) -> f64 {
        let root_n = (self.n as f64).sqrt();
        let mut sum = phi(x);
        let mut scale = 1.0;
        for q in &self.q_terms {
            scale /= root_n;
            sum += q.eval(x) * scale;
        }
        sum
    }

    /// `u_m(t, z) = e^{-t^2/2} (1 + sum_{k=1}^{m-2} P_k(it) z^k)`.
    pub fn u_m(&self, t: f64, z: f64) -> Complex64 {
        let it = Complex64::new(0.0, t);
        let mut bracket = Complex64::new(1.0, 0.0);
        let mut zk = 1.0;
        for p in &self.p_polys {
            zk *= z;
            bracket += p.eval(it) * zk;
        }
        bracket * (-0.5 * t * t).exp()
    }

    /// Fourier transform of phi_m: `u_m(t, n^{-1/2})`.
    pub fn fourier(&self, t: f64) -> Complex64 {
        self.u_m(t, 1.0 / (self.n as f64).sqrt())
    }

    /// `e_m(t) = u_m(t, 1)`.
    pub fn e_m(&self, t: f64) -> Complex64 {
        self.u_m(t, 1.0)
    }
}

/// Cumulants of `e_m(t) = e^{-t^2/2}(1 + sum_{k=1}^{m-2} P_k(it))`, computed
/// by Taylor-expanding log e_m at the origin to order m. The projection T_m
/// is a fixed point: the result must equal the input gamma_1..gamma_m.
pub fn tm_projection_check(cumulants: &CumulantVector, m: usize) -> Result<CumulantVector> {
    require_standardized(cumulants)?;
    if m < 3 || m > cumulants.order() {
        return Err(Error::Bounds(format!(
            "need 3 <= m <= cumulant order, got m={m}, order={}",
            cumulants.order()
        )));
    }
    let len = m + 1;
    // e^{-t^2/2} as a truncated series in t
    let mut gauss_exponent = vec![Complex64::ZERO; len];
    if len > 2 {
        gauss_exponent[2] = Complex64::new(-0.5, 0.0);
    }
    let gauss = exp_trunc(&gauss_exponent, len);
    // 1 + sum P_k(it), coefficients in powers of t
    let mut bracket = vec![Complex64::ZERO; len];
    bracket[0] = Complex64::new(1.0, 0.0);
    for k in 1..=m - 2 {
        let p_it = pk_polynomial(k, cumulants)?.compose_it();
        for (d, &c) in p_it.coeffs().iter().enumerate() {
            if d < len {
                bracket[d] += c;
            }
        }
    }
    let e_m = mul_trunc(&gauss, &bracket, len);
    let log_e_m = log_trunc(&e_m, len);
    let i = Complex64::new(0.0, 1.0);
    let gamma: Vec<f64> = (1..=m)
        .map(|p| (log_e_m[p] * factorial_u128(p) as f64 / i.powu(p as u32)).re)
        .collect();
    Ok(CumulantVector::new(gamma))
}

/// Lemma 7.1 tail bound: returns
/// `(lhs, rhs) = (sum_{k=m-1}^{K} |a_k(it) z^k|, (e^{C(z)}-1)|t|^{m+1})`
/// with `C(z) = sum_{k=3}^{m} (|gamma_k|/k!) |z|^{k-2}`. The truncated sum
/// stands in for the infinite tail; the truncation must look geometric
/// (ratio of the last two retained nonzero terms < 1/2), otherwise the
/// partial sum says nothing and a numeric error is raised.
pub fn tail_bound_check(
    cumulants: &CumulantVector,
    m: usize,
    z: Complex64,
    t: Complex64,
    k_max: usize,
) -> Result<(f64, f64)> {
    require_standardized(cumulants)?;
    if m < 3 || m > cumulants.order() {
        return Err(Error::Bounds(format!(
            "need 3 <= m <= cumulant order, got m={m}, order={}",
            cumulants.order()
        )));
    }
    if t.norm() > 1.0 {
        return Err(Error::Precondition(format!("|t| must be <= 1, got {}", t.norm())));
    }
    if k_max + 1 < m {
        return Err(Error::Precondition(format!(
            "truncation K={k_max} must be >= m-1 = {}",
            m - 1
        )));
    }
    let it = Complex64::new(0.0, 1.0) * t;
    let mut terms = Vec::new();
    for k in (m - 1)..=k_max {
        let ak = ak_polynomial(k, m, cumulants)?;
        terms.push(ak.eval(it).norm() * z.norm().powi(k as i32));
    }
    let nonzero: Vec<f64> = terms.iter().copied().filter(|&v| v > 0.0).collect();
    if nonzero.len() >= 2 {
        let ratio = nonzero[nonzero.len() - 1] / nonzero[nonzero.len() - 2];
        if ratio >= 0.5 {
            return Err(Error::Numeric(format!(
                "tail truncation at K={k_max} is not geometric (last ratio {ratio:.3})"
            )));
        }
    }
    let lhs: f64 = terms.iter().sum();
    let mut c_z = 0.0;
    for k in 3..=m {
        c_z += cumulants.gamma(k).abs() / factorial_u128(k) as f64 * z.norm().powi(k as i32 - 2);
    }
    let rhs = (c_z.exp() - 1.0) * t.norm().powi(m as i32 + 1);
    Ok((lhs, rhs))
}
