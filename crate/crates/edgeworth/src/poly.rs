//! Dense univariate polynomials with complex coefficients.

use num_complex::Complex64;
use std::fmt;

/// Dense polynomial; `coeffs[d]` multiplies the `d`-th power of the variable.
/// Trailing (near-)zero coefficients are trimmed on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

const TRIM_EPS: f64 = 0.0; // exact zeros only; numeric noise is kept

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while let Some(&last) = coeffs.last() {
            if last.norm() <= TRIM_EPS && coeffs.len() > 0 {
                coeffs.pop();
            } else {
                break;
            }
        }
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::from_real(&[1.0])
    }

    /// Monomial `c * x^d`.
    pub fn monomial(c: Complex64, d: usize) -> Self {
        let mut coeffs = vec![Complex64::ZERO; d + 1];
        coeffs[d] = c;
        Poly::new(coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// Smallest power with a nonzero coefficient, or `None` for zero.
    pub fn min_power(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| c.norm() > 0.0)
    }

    pub fn coeff(&self, d: usize) -> Complex64 {
        self.coeffs.get(d).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_real(&self, x: f64) -> Complex64 {
        self.eval(Complex64::new(x, 0.0))
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Complex64::ZERO; n];
        for (d, slot) in out.iter_mut().enumerate() {
            *slot = self.coeff(d) + other.coeff(d);
        }
        Poly::new(out)
    }

    pub fn scale(&self, c: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Coefficients of `q(t) = p(i t)` as a polynomial in `t`:
    /// each `c_d` becomes `c_d * i^d`.
    pub fn compose_it(&self) -> Poly {
        let i = Complex64::new(0.0, 1.0);
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(d, &c)| c * i.powu(d as u32))
                .collect(),
        )
    }

    /// Max coefficient-wise distance to `other`.
    pub fn coeff_distance(&self, other: &Poly) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|d| (self.coeff(d) - other.coeff(d)).norm())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, c) in self.coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            match d {
                0 => {}
                1 => write!(f, "*t")?,
                _ => write!(f, "*t^{d}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_degree() {
        let p = Poly::from_real(&[1.0, 0.0, -3.0]); // 1 - 3x^2
        assert_eq!(p.degree(), Some(2));
        assert!((p.eval_real(2.0).re + 11.0).abs() < 1e-15);
    }

    #[test]
    fn zero_trimming() {
        let p = Poly::from_real(&[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(p.min_power(), Some(1));
    }

    #[test]
    fn mul_add() {
        let p = Poly::from_real(&[1.0, 1.0]);
        let q = p.mul(&p); // (1+x)^2
        assert_eq!(q.coeffs().len(), 3);
        assert!((q.coeff(1).re - 2.0).abs() < 1e-15);
        let r = q.add(&Poly::from_real(&[-1.0]));
        assert!((r.coeff(0).norm()) < 1e-15);
    }

    #[test]
    fn compose_it_powers() {
        // x^3 -> (it)^3 = -i t^3
        let p = Poly::monomial(Complex64::new(1.0, 0.0), 3);
        let q = p.compose_it();
        assert!((q.coeff(3) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }
}
