//! Moment/cumulant conversion and Chebyshev-Hermite polynomials.

use num_complex::Complex64;

use crate::combinatorics::{enumerate_weighted_partitions, factorial_u128, partition_weight};
use crate::error::{Error, Result};
use crate::poly::Poly;

/// Raw moments `alpha_k = E X^k`, stored for `k = 1..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    alpha: Vec<f64>,
}

impl MomentVector {
    /// `alpha[0]` is the first moment.
    pub fn new(alpha: Vec<f64>) -> Self {
        MomentVector { alpha }
    }

    pub fn order(&self) -> usize {
        self.alpha.len()
    }

    /// `alpha_k`, 1-based.
    pub fn alpha(&self, k: usize) -> f64 {
        self.alpha[k - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }

    pub fn variance(&self) -> f64 {
        self.alpha(2) - self.alpha(1) * self.alpha(1)
    }

    /// Mean 0 and variance 1 within `tol`.
    pub fn is_standardized(&self, tol: f64) -> bool {
        self.order() >= 2 && self.alpha(1).abs() < tol && (self.alpha(2) - 1.0).abs() < tol
    }
}

/// Cumulants `gamma_k`, stored for `k = 1..=m`.
///
/// High-order cumulants of order-8 moment vectors reach ~1e6, so a single
/// f64 would round them to ~1e-9 absolute and spoil the moment round trip.
/// A compensation limb `lo` keeps the extra bits; accessors return the
/// rounded value, `moments_from_cumulants` consumes both limbs.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantVector {
    gamma: Vec<f64>,
    lo: Vec<f64>,
}

impl CumulantVector {
    pub fn new(gamma: Vec<f64>) -> Self {
        let lo = vec![0.0; gamma.len()];
        CumulantVector { gamma, lo }
    }

    /// Standardized vector from higher cumulants only: `gamma_1 = 0`,
    /// `gamma_2 = 1`, then `gamma_3, gamma_4, ...` as given.
    pub fn standardized(higher: &[f64]) -> Self {
        let mut gamma = vec![0.0, 1.0];
        gamma.extend_from_slice(higher);
        CumulantVector::new(gamma)
    }

    pub fn order(&self) -> usize {
        self.gamma.len()
    }

    /// `gamma_k`, 1-based; zero beyond the stored order.
    pub fn gamma(&self, k: usize) -> f64 {
        if k == 0 || k > self.gamma.len() {
            0.0
        } else {
            self.gamma[k - 1]
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gamma
    }

    pub fn is_standardized(&self, tol: f64) -> bool {
        self.order() >= 2 && self.gamma(1).abs() < tol && (self.gamma(2) - 1.0).abs() < tol
    }

    fn gamma_dd(&self, k: usize) -> Dd {
        if k == 0 || k > self.gamma.len() {
            Dd::new(0.0)
        } else {
            Dd {
                hi: self.gamma[k - 1],
                lo: self.lo[k - 1],
            }
        }
    }
}

/// Double-f64 value for the partition sums: heavy cancellation between terms
/// of magnitude up to ~1e4 would otherwise cost a few ulps at order 8.
#[derive(Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn mul_f64(self, f: f64) -> Self {
        let p = self.hi * f;
        let e = self.hi.mul_add(f, -p);
        let lo = self.lo.mul_add(f, e);
        let hi = p + lo;
        Dd {
            hi,
            lo: (p - hi) + lo,
        }
    }

    fn mul(self, o: Dd) -> Self {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + self.hi * o.lo + self.lo * o.hi;
        let hi = p + e;
        Dd {
            hi,
            lo: (p - hi) + e,
        }
    }

    fn add(self, o: Dd) -> Self {
        let s = self.hi + o.hi;
        let v = s - self.hi;
        let e = (self.hi - (s - v)) + (o.hi - v);
        let lo = e + self.lo + o.lo;
        let hi = s + lo;
        Dd {
            hi,
            lo: (s - hi) + lo,
        }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Cumulants from moments by the partition identity
/// `gamma_p = p! sum (-1)^{j-1} (j-1)! prod_r (1/k_r!) (alpha_r/r!)^{k_r}`.
pub fn cumulants_from_moments(moments: &MomentVector) -> Result<CumulantVector> {
    let m = moments.order();
    if m < 1 {
        return Err(Error::Arity("need at least one moment".into()));
    }
    let mut gamma = Vec::with_capacity(m);
    for p in 1..=m {
        let mut acc = Dd::new(0.0);
        for part in enumerate_weighted_partitions(p)? {
            let j = part.total_parts() as usize;
            let sign = if (j - 1) % 2 == 0 { 1.0 } else { -1.0 };
            // exact integer p!/prod(k_r! (r!)^{k_r}), then (j-1)! separately
            let base = partition_weight(p, &part) as f64;
            let mut term = Dd::new(sign * base * factorial_u128(j - 1) as f64);
            for (i, &kr) in part.counts().iter().enumerate() {
                let r = i + 1;
                for _ in 0..kr {
                    term = term.mul_f64(moments.alpha(r));
                }
            }
            acc = acc.add(term);
        }
        gamma.push(acc);
    }
    let hi: Vec<f64> = gamma.iter().map(|d| d.hi).collect();
    let lo: Vec<f64> = gamma.iter().map(|d| d.lo).collect();
    Ok(CumulantVector { gamma: hi, lo })
}

/// Moments from cumulants (exact inverse map):
/// `alpha_p = p! sum prod_r (1/k_r!) (gamma_r/r!)^{k_r}`.
pub fn moments_from_cumulants(cumulants: &CumulantVector) -> Result<MomentVector> {
    let m = cumulants.order();
    if m < 1 {
        return Err(Error::Arity("need at least one cumulant".into()));
    }
    let mut alpha = Vec::with_capacity(m);
    for p in 1..=m {
        let mut acc = Dd::new(0.0);
        for part in enumerate_weighted_partitions(p)? {
            let mut term = Dd::new(partition_weight(p, &part) as f64);
            for (i, &kr) in part.counts().iter().enumerate() {
                let r = i + 1;
                for _ in 0..kr {
                    term = term.mul(cumulants.gamma_dd(r));
                }
            }
            acc = acc.add(term);
        }
        alpha.push(acc.value());
    }
    Ok(MomentVector::new(alpha))
}

/// Largest Hermite index supported.
pub const MAX_HERMITE: usize = 64;

/// Probabilists' Chebyshev-Hermite polynomial `H_k`, defined by
/// `H_k(x) e^{-x^2/2} = (-1)^k d^k/dx^k e^{-x^2/2}`, via the recurrence
/// `H_{k+1} = x H_k - k H_{k-1}`.
pub fn hermite(k: usize) -> Result<Poly> {
    if k > MAX_HERMITE {
        return Err(Error::Bounds(format!("hermite index {k} > {MAX_HERMITE}")));
    }
    let mut prev = Poly::one();
    if k == 0 {
        return Ok(prev);
    }
    let x = Poly::from_real(&[0.0, 1.0]);
    let mut cur = x.clone();
    for j in 1..k {
        let next = x.mul(&cur).add(&prev.scale(Complex64::new(-(j as f64), 0.0)));
        prev = cur;
        cur = next;
    }
    Ok(cur)
}
