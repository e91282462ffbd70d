//! Distribution model zoo and characteristic-function-side quantities:
//! v_n(t), psi_z(t), W_z(t), and numeric probes of the residual bounds.

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::cumulants::{moments_from_cumulants, CumulantVector, MomentVector};
use crate::error::{Error, Result};
use crate::expansion::{EdgeworthApproximant, ExpansionOrder};
use crate::quad::adaptive_simpson;

const SQRT3: f64 = 1.7320508075688772;
const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Student-t degrees of freedom used by the zoo.
const STUDENT_NU: f64 = 4.5;
/// Variance of the raw Student-t with nu = 4.5: nu/(nu-2).
const STUDENT_VAR: f64 = STUDENT_NU / (STUDENT_NU - 2.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ModelKind {
    Gaussian,
    Uniform,
    Exp1,
    Student45,
    ChiSq1,
}

/// A standardized distribution with exact moments, density, characteristic
/// function, and (where closed-form) distribution function.
#[derive(Debug, Clone)]
pub struct DistributionModel {
    kind: ModelKind,
    pub name: &'static str,
    /// Largest s with E|X|^s finite (infinity allowed).
    pub s_max: f64,
    pub bounded_density: bool,
    pub standardized: bool,
    /// Support interval; infinite endpoints allowed.
    pub support: (f64, f64),
    moments: MomentVector,
    cumulants: CumulantVector,
}

impl DistributionModel {
    pub fn moments(&self) -> &MomentVector {
        &self.moments
    }

    pub fn cumulants(&self) -> &CumulantVector {
        &self.cumulants
    }

    /// Cumulant vector truncated to the first `m` orders.
    pub fn cumulants_to(&self, m: usize) -> Result<CumulantVector> {
        if m > self.cumulants.order() {
            return Err(Error::Precondition(format!(
                "model {} has cumulants only up to order {}, requested {m}",
                self.name,
                self.cumulants.order()
            )));
        }
        Ok(CumulantVector::new(
            self.cumulants.as_slice()[..m].to_vec(),
        ))
    }

    pub fn density(&self, x: f64) -> f64 {
        match self.kind {
            ModelKind::Gaussian => crate::expansion::phi(x),
            ModelKind::Uniform => {
                if x.abs() <= SQRT3 {
                    1.0 / (2.0 * SQRT3)
                } else {
                    0.0
                }
            }
            ModelKind::Exp1 => {
                if x >= -1.0 {
                    (-(x + 1.0)).exp()
                } else {
                    0.0
                }
            }
            ModelKind::Student45 => {
                let scale = STUDENT_VAR.sqrt();
                scale * student_pdf(scale * x)
            }
            ModelKind::ChiSq1 => {
                // Y = (X - 1)/sqrt(2), X ~ chi^2_1; 1 + sqrt(2) y = x
                let x = 1.0 + SQRT2 * x;
                if x <= 0.0 {
                    0.0
                } else {
                    SQRT2 * (-0.5 * x).exp() / (x.sqrt() * (2.0 * std::f64::consts::PI).sqrt())
                }
            }
        }
    }

    /// Distribution function, closed form for every zoo member.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.kind {
            ModelKind::Gaussian => normal_cdf(x),
            ModelKind::Uniform => ((x + SQRT3) / (2.0 * SQRT3)).clamp(0.0, 1.0),
            ModelKind::Exp1 => {
                if x < -1.0 {
                    0.0
                } else {
                    1.0 - (-(x + 1.0)).exp()
                }
            }
            ModelKind::Student45 => student_cdf(STUDENT_VAR.sqrt() * x),
            ModelKind::ChiSq1 => {
                let arg = 1.0 + SQRT2 * x;
                if arg <= 0.0 {
                    0.0
                } else {
                    // P(chi^2_1 <= arg) = erf(sqrt(arg/2))
                    statrs::function::erf::erf((0.5 * arg).sqrt())
                }
            }
        }
    }

    /// Characteristic function, analytic for every zoo member.
    pub fn charfn(&self, t: f64) -> Complex64 {
        match self.kind {
            ModelKind::Gaussian => Complex64::new((-0.5 * t * t).exp(), 0.0),
            ModelKind::Uniform => {
                let a = SQRT3 * t;
                let v = if a.abs() < 1e-8 {
                    1.0 - a * a / 6.0
                } else {
                    a.sin() / a
                };
                Complex64::new(v, 0.0)
            }
            ModelKind::Exp1 => {
                Complex64::new(0.0, -t).exp() / Complex64::new(1.0, -t)
            }
            ModelKind::Student45 => {
                Complex64::new(student_charfn(t / STUDENT_VAR.sqrt()), 0.0)
            }
            ModelKind::ChiSq1 => {
                // e^{-it/sqrt2} (1 - i sqrt2 t)^{-1/2}, principal branch
                let log_factor = Complex64::new(1.0, -SQRT2 * t).ln() * -0.5;
                (Complex64::new(0.0, -t / SQRT2) + log_factor).exp()
            }
        }
    }

    /// Characteristic function by quadrature of the density (cross-check
    /// path; the analytic form is authoritative).
    pub fn charfn_by_quadrature(&self, t: f64) -> Result<Complex64> {
        let (lo, hi) = self.quadrature_range();
        let mut singular = Complex64::ZERO;
        let mut lo = lo;
        if self.kind == ModelKind::ChiSq1 {
            // density ~ (x - lo)^{-1/2} at the left endpoint; peel off one
            // unit with a Gauss-Jacobi rule, u = x - lo
            let edge = -1.0 / SQRT2;
            let rule = crate::quad::gauss_jacobi_unit_lower(64, -0.5)?;
            singular = rule.integrate_complex(|u| {
                let smooth = SQRT2 * (-0.5 * SQRT2 * u).exp()
                    / (SQRT2.sqrt() * (2.0 * std::f64::consts::PI).sqrt());
                Complex64::new(0.0, t * (edge + u)).exp() * smooth
            });
            lo = edge + 1.0;
        }
        let re = adaptive_simpson(&|x| (t * x).cos() * self.density(x), lo, hi, 1e-11)?;
        let im = adaptive_simpson(&|x| (t * x).sin() * self.density(x), lo, hi, 1e-11)?;
        Ok(singular + Complex64::new(re, im))
    }

    /// Finite interval outside which the density is below 1e-14.
    fn quadrature_range(&self) -> (f64, f64) {
        match self.kind {
            ModelKind::Gaussian => (-9.0, 9.0),
            ModelKind::Uniform => (-SQRT3, SQRT3),
            ModelKind::Exp1 => (-1.0, 35.0),
            ModelKind::Student45 => (-500.0, 500.0),
            ModelKind::ChiSq1 => (-1.0 / SQRT2 + 1e-12, 50.0),
        }
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + statrs::function::erf::erf(x / SQRT2))
}

fn student_pdf(x: f64) -> f64 {
    let nu = STUDENT_NU;
    let norm = gamma((nu + 1.0) / 2.0) / ((nu * std::f64::consts::PI).sqrt() * gamma(nu / 2.0));
    norm * (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0)
}

fn student_cdf(x: f64) -> f64 {
    let nu = STUDENT_NU;
    let ib = statrs::function::beta::beta_reg(nu / 2.0, 0.5, nu / (nu + x * x));
    if x >= 0.0 {
        1.0 - 0.5 * ib
    } else {
        0.5 * ib
    }
}

/// Characteristic function of the raw (unit-scale) Student-t:
/// `K_{nu/2}(sqrt(nu)|t|) (sqrt(nu)|t|)^{nu/2} / (Gamma(nu/2) 2^{nu/2-1})`.
fn student_charfn(t: f64) -> f64 {
    let nu = STUDENT_NU;
    let x = nu.sqrt() * t.abs();
    if x < 1e-10 {
        return 1.0;
    }
    let half_nu = nu / 2.0;
    let k = bessel_k(half_nu, x);
    k * x.powf(half_nu) / (gamma(half_nu) * 2f64.powf(half_nu - 1.0))
}

/// Modified Bessel function of the second kind via the integral
/// representation `K_nu(x) = int_0^inf e^{-x cosh u} cosh(nu u) du` (x > 0).
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    if x >= 700.0 {
        return 0.0;
    }
    // beyond u_max the integrand is below e^{-730} * cosh term
    let u_max = (730.0 / x).acosh();
    let scale = if x < 2.0 * nu {
        // small-x magnitude estimate to set an absolute tolerance
        0.5 * gamma(nu) * (2.0 / x).powf(nu)
    } else {
        1.0
    };
    let f = |u: f64| (-x * u.cosh()).exp() * (nu * u).cosh();
    adaptive_simpson(&f, 0.0, u_max, 1e-13 * scale).expect("bessel quadrature")
}

/// The model corpus exercised by the paper's theorems.
pub fn zoo() -> Vec<DistributionModel> {
    let gaussian_cum = CumulantVector::new(vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let uniform_moments = MomentVector::new(vec![
        0.0,
        1.0,
        0.0,
        9.0 / 5.0,
        0.0,
        27.0 / 7.0,
        0.0,
        27.0 / 3.0,
    ]);
    let exp_cum = CumulantVector::new(vec![0.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0]);
    // chi^2_1 cumulants 2^{k-1}(k-1)!, standardized by variance 2
    let chisq_cum = CumulantVector::new(
        (1..=8u32)
            .map(|k| match k {
                1 => 0.0,
                _ => {
                    let kf = k as f64;
                    2f64.powf(kf - 1.0) * crate::combinatorics::factorial_u128(k as usize - 1) as f64
                        / 2f64.powf(kf / 2.0)
                }
            })
            .collect(),
    );
    let student_cum = CumulantVector::new(vec![0.0, 1.0, 0.0, 12.0]);

    let make = |kind, name, s_max, bounded, support, cumulants: CumulantVector| {
        let moments = moments_from_cumulants(&cumulants).expect("zoo moments");
        DistributionModel {
            kind,
            name,
            s_max,
            bounded_density: bounded,
            standardized: true,
            support,
            moments,
            cumulants,
        }
    };

    vec![
        make(
            ModelKind::Gaussian,
            "gaussian",
            f64::INFINITY,
            true,
            (f64::NEG_INFINITY, f64::INFINITY),
            gaussian_cum,
        ),
        {
            let cumulants =
                crate::cumulants::cumulants_from_moments(&uniform_moments).expect("zoo cumulants");
            DistributionModel {
                kind: ModelKind::Uniform,
                name: "uniform",
                s_max: f64::INFINITY,
                bounded_density: true,
                standardized: true,
                support: (-SQRT3, SQRT3),
                moments: uniform_moments,
                cumulants,
            }
        },
        make(
            ModelKind::Exp1,
            "exp1",
            f64::INFINITY,
            true,
            (-1.0, f64::INFINITY),
            exp_cum,
        ),
        make(
            ModelKind::Student45,
            "student45",
            STUDENT_NU,
            true,
            (f64::NEG_INFINITY, f64::INFINITY),
            student_cum,
        ),
        make(
            ModelKind::ChiSq1,
            "chisq1",
            f64::INFINITY,
            false,
            (-1.0 / SQRT2, f64::INFINITY),
            chisq_cum,
        ),
    ]
}

/// Look up a zoo model by name.
pub fn model_by_name(name: &str) -> Result<DistributionModel> {
    zoo().into_iter()
        .find(|m| m.name == name)
        .ok_or_else(|| Error::Config(format!("unknown model '{name}'")))
}

/// `v_n(t) = v(t/sqrt(n))^n`, the characteristic function of the normalized
/// sum S_n.
pub fn v_n(model: &DistributionModel, t: f64, n: u64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    if !model.standardized {
        return Err(Error::Precondition("model must be standardized".into()));
    }
    let v = model.charfn(t / (n as f64).sqrt());
    Ok(v.powu(n as u32))
}

/// `psi_z(t) = t^2/2 + (1/z^2) log v(tz)` with the branch of log tracked by
/// continuity from t = 0.
pub fn psi_z(model: &DistributionModel, t: f64, z: f64) -> Result<Complex64> {
    if z == 0.0 {
        return Err(Error::Precondition("z must be nonzero".into()));
    }
    let log_v = tracked_log_charfn(model, t * z)?;
    Ok(Complex64::new(0.5 * t * t, 0.0) + log_v / (z * z))
}

/// log v(u) continued from log v(0) = 0 along the segment [0, u], stepping
/// finely enough that the argument of v moves by less than pi/4 per step.
fn tracked_log_charfn(model: &DistributionModel, u: f64) -> Result<Complex64> {
    if u == 0.0 {
        return Ok(Complex64::ZERO);
    }
    let mut steps = 16.max((8.0 * u.abs()).ceil() as usize);
    'outer: loop {
        let mut arg = 0.0;
        let mut prev = Complex64::new(1.0, 0.0);
        for j in 1..=steps {
            let uj = u * j as f64 / steps as f64;
            let vj = model.charfn(uj);
            if vj.norm() < 1e-13 {
                return Err(Error::Numeric(format!(
                    "characteristic function vanishes near t = {uj}; branch of log undefined"
                )));
            }
            let d = (vj / prev).arg();
            if d.abs() >= std::f64::consts::FRAC_PI_4 {
                if steps > 1 << 20 {
                    return Err(Error::Numeric(format!(
                        "branch tracking failed near t = {uj} (arg step {d:.3})"
                    )));
                }
                steps *= 2;
                continue 'outer;
            }
            arg += d;
            prev = vj;
        }
        return Ok(Complex64::new(prev.norm().ln(), arg));
    }
}

/// `W_z(t) = sum_{k=1}^{m-2} (gamma_{k+2}/(k+2)!) (it)^{k+2} z^k`.
pub fn w_z(cumulants: &CumulantVector, t: f64, z: f64, m: usize) -> Result<Complex64> {
    if m > cumulants.order() {
        return Err(Error::Precondition(format!(
            "m = {m} exceeds cumulant order {}",
            cumulants.order()
        )));
    }
    let it = Complex64::new(0.0, t);
    let mut acc = Complex64::ZERO;
    for k in 1..=m.saturating_sub(2) {
        acc += it.powu((k + 2) as u32) * cumulants.gamma(k + 2)
            / crate::combinatorics::factorial_u128(k + 2) as f64
            * z.powi(k as i32);
    }
    Ok(acc)
}

/// Probe of Prop 9.1 / Theorem 1.3 at derivative order p = 0.
#[derive(Debug, Clone)]
pub struct ResidualProbeReport {
    pub n_list: Vec<u64>,
    pub t_grid: Vec<f64>,
    /// Derivative order probed (always 0).
    pub p: usize,
    /// R(n): max over the grid of |v_n - u_m| / ((|t|^{m'} + |t|^{m''}) e^{-t^2/2}).
    pub max_normalized: Vec<f64>,
    /// R(n) * n^{(s-2)/2}.
    pub scaled: Vec<f64>,
    /// Log-log slope of R(n) against n.
    pub slope: f64,
    /// Max over the grid of |r_n| / ((1 + |t|^{4m^2}) e^{-t^2/2}) per n.
    pub remainder_norm: Vec<f64>,
}

/// Least-squares slope of log(y) against log(x).
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.max(1e-300).ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        num += (a - mx) * (b - my);
        den += (a - mx) * (a - mx);
    }
    num / den
}

pub fn residual_probe(
    model: &DistributionModel,
    order: ExpansionOrder,
    n_list: &[u64],
    t_grid: &[f64],
) -> Result<ResidualProbeReport> {
    let cumulants = model.cumulants_to(order.m)?;
    let m = order.m;
    let s = order.s;
    let m_prime = s;
    let m_second = s + 3.0 * (m as f64 - 2.0);
    let exponent_4m2 = (4 * m * m) as i32;

    let mut max_normalized = Vec::with_capacity(n_list.len());
    let mut scaled = Vec::with_capacity(n_list.len());
    let mut remainder_norm = Vec::with_capacity(n_list.len());

    for &n in n_list {
        let window = (n as f64).powf(1.0 / 6.0);
        if let Some(&bad) = t_grid.iter().find(|t| t.abs() > window * (1.0 + 1e-12)) {
            return Err(Error::Precondition(format!(
                "t = {bad} outside the window |t| <= n^(1/6) = {window:.4} for n = {n}"
            )));
        }
        let approx = EdgeworthApproximant::new(order, &cumulants, n)?;
        let root_n = (n as f64).sqrt();
        let mut r_max: f64 = 0.0;
        let mut rem_max: f64 = 0.0;
        for &t in t_grid {
            if t.abs() < 1e-8 {
                continue;
            }
            let vn = v_n(model, t, n)?;
            let um = approx.fourier(t);
            let gauss = (-0.5 * t * t).exp();
            let denom = (t.abs().powf(m_prime) + t.abs().powf(m_second)) * gauss;
            r_max = r_max.max((vn - um).norm() / denom);

            let tn = t / root_n;
            let bracket = (model.charfn(tn) - approx.e_m(tn)) * gauss;
            let rn = (vn - um) - bracket * n as f64;
            let rem_denom = (1.0 + t.abs().powi(exponent_4m2)) * gauss;
            rem_max = rem_max.max(rn.norm() / rem_denom);
        }
        max_normalized.push(r_max);
        scaled.push(r_max * (n as f64).powf((s - 2.0) / 2.0));
        remainder_norm.push(rem_max);
    }

    let n_f: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let slope = if n_list.len() >= 2 {
        loglog_slope(&n_f, &max_normalized)
    } else {
        f64::NAN
    };
    Ok(ResidualProbeReport {
        n_list: n_list.to_vec(),
        t_grid: t_grid.to_vec(),
        p: 0,
        max_normalized,
        scaled,
        slope,
        remainder_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::ak_polynomial;
    use crate::quad::{gauss_jacobi_unit_lower, gauss_legendre};

    fn model(name: &str) -> DistributionModel {
        model_by_name(name).unwrap()
    }

    /// Mass, mean and second moment by quadrature, handling the chi-square
    /// endpoint singularity with a Gauss-Jacobi rule.
    fn first_moments(m: &DistributionModel) -> (f64, f64, f64) {
        let (lo, hi) = match m.name {
            "student45" => (-3000.0, 3000.0),
            "exp1" => (-1.0, 40.0),
            "chisq1" => (-1.0 / SQRT2, 45.0),
            "uniform" => (-SQRT3, SQRT3),
            _ => (-9.0, 9.0),
        };
        if m.name == "chisq1" {
            // split off [lo, lo+1] where density ~ (x-lo)^{-1/2}
            let rule = gauss_jacobi_unit_lower(48, -0.5).unwrap();
            let weight_free = |u: f64, pow: u32| {
                let x = lo + u;
                // density * u^{1/2}, smooth at u = 0
                let x_raw = 1.0 + SQRT2 * x;
                let smooth = SQRT2 * (-0.5 * x_raw).exp()
                    / ((SQRT2).sqrt() * (2.0 * std::f64::consts::PI).sqrt());
                smooth * x.powi(pow as i32)
            };
            let tail = |pow: u32| {
                adaptive_simpson(
                    &|x: f64| m.density(x) * x.powi(pow as i32),
                    lo + 1.0,
                    hi,
                    1e-11,
                )
                .unwrap()
            };
            let moment =
                |pow: u32| rule.integrate(|u| weight_free(u, pow)) + tail(pow);
            (moment(0), moment(1), moment(2))
        } else {
            let moment = |pow: u32| {
                adaptive_simpson(&|x: f64| m.density(x) * x.powi(pow as i32), lo, hi, 1e-11)
                    .unwrap()
            };
            (moment(0), moment(1), moment(2))
        }
    }

    #[test]
    fn zoo_densities_standardized() {
        for m in zoo() {
            let (mass, mean, second) = first_moments(&m);
            assert!((mass - 1.0).abs() < 1e-8, "{}: mass {mass}", m.name);
            assert!(mean.abs() < 1e-8, "{}: mean {mean}", m.name);
            assert!((second - 1.0).abs() < 1e-7, "{}: second {second}", m.name);
        }
    }

    #[test]
    fn zoo_pinned_cumulants() {
        let u = model("uniform");
        assert!(u.cumulants().gamma(3).abs() < 1e-12);
        assert!((u.cumulants().gamma(4) + 6.0 / 5.0).abs() < 1e-12);
        assert!((u.moments().alpha(4) - 9.0 / 5.0).abs() < 1e-12);

        let e = model("exp1");
        assert!((e.cumulants().gamma(3) - 2.0).abs() < 1e-12);
        assert!((e.cumulants().gamma(4) - 6.0).abs() < 1e-12);

        let s = model("student45");
        assert!((s.moments().alpha(4) - 15.0).abs() < 1e-12);
        assert!((s.cumulants().gamma(4) - 12.0).abs() < 1e-12);
        assert!((s.s_max - 4.5).abs() < 1e-15);

        let c = model("chisq1");
        assert!((c.cumulants().gamma(3) - 2.0 * SQRT2).abs() < 1e-12);
        assert!((c.cumulants().gamma(4) - 12.0).abs() < 1e-12);
        assert!(!c.bounded_density);
    }

    #[test]
    fn charfn_at_zero_and_modulus() {
        for m in zoo() {
            assert!((m.charfn(0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-12, "{}", m.name);
            for i in 0..40 {
                let t = -10.0 + 0.5 * i as f64;
                assert!(m.charfn(t).norm() <= 1.0 + 1e-10, "{} t={t}", m.name);
            }
        }
    }

    #[test]
    fn charfn_hermitian() {
        for m in zoo() {
            for i in 0..=40 {
                let t = 0.25 * i as f64;
                let diff = (m.charfn(-t) - m.charfn(t).conj()).norm();
                assert!(diff < 1e-10, "{} t={t}: {diff:.3e}", m.name);
            }
        }
    }

    #[test]
    fn charfn_matches_quadrature() {
        for m in zoo() {
            for &t in &[0.3, 1.0, 2.5] {
                let analytic = m.charfn(t);
                let quad = m.charfn_by_quadrature(t).unwrap();
                let tol = if m.name == "student45" { 1e-7 } else { 1e-8 };
                assert!(
                    (analytic - quad).norm() < tol,
                    "{} t={t}: {analytic} vs {quad}",
                    m.name
                );
            }
        }
    }

    #[test]
    fn bessel_k_half_closed_form() {
        // K_{1/2}(x) = sqrt(pi/(2x)) e^{-x}
        for &x in &[0.1, 0.5, 1.0, 3.0, 10.0] {
            let want = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp();
            let got = bessel_k(0.5, x);
            assert!((got - want).abs() / want < 1e-10, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn student_cdf_matches_density_integral() {
        let m = model("student45");
        for &x in &[-1.5, 0.0, 0.8, 2.0] {
            let direct =
                adaptive_simpson(&|y: f64| m.density(y), -2000.0, x, 1e-11).unwrap();
            assert!((m.cdf(x) - direct).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn chisq_cdf_matches_density_integral() {
        let m = model("chisq1");
        let lo = -1.0 / SQRT2;
        let rule = gauss_jacobi_unit_lower(48, -0.5).unwrap();
        for &x in &[-0.5, 0.0, 1.0, 3.0] {
            // integrate density from the singular endpoint: u = y - lo on [0, x-lo]
            let len = x - lo;
            let smooth = |u: f64| {
                let y = 1.0 + SQRT2 * (lo + u);
                SQRT2 * (-0.5 * y).exp()
                    / ((SQRT2).sqrt() * (2.0 * std::f64::consts::PI).sqrt())
            };
            // scale the unit-interval rule for int_0^len g(u) u^{-1/2} du
            let direct: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&u, &w)| w * len.sqrt() * smooth(len * u))
                .sum();
            assert!((m.cdf(x) - direct).abs() < 1e-9, "x={x}: {} vs {direct}", m.cdf(x));
        }
    }

    #[test]
    fn v_n_basics() {
        let u = model("uniform");
        assert!((v_n(&u, 0.0, 7).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let t = 1.3;
        let direct = (SQRT3 * t).sin() / (SQRT3 * t);
        assert!((v_n(&u, t, 1).unwrap().re - direct).abs() < 1e-14);
        for m in zoo() {
            for i in 0..20 {
                let t = -5.0 + 0.5 * i as f64;
                assert!(v_n(&m, t, 9).unwrap().norm() <= 1.0 + 1e-10, "{}", m.name);
            }
        }
    }

    #[test]
    fn psi_z_trivial_cases() {
        let g = model("gaussian");
        for &(t, z) in &[(0.5, 0.3), (2.0, 1.0), (4.0, 0.1)] {
            let psi = psi_z(&g, t, z).unwrap();
            assert!(psi.norm() < 1e-10, "t={t} z={z}: {psi}");
        }
        let u = model("uniform");
        assert!(psi_z(&u, 0.0, 0.5).unwrap().norm() < 1e-15);
        assert!(psi_z(&u, 1.0, 0.0).is_err());
    }

    #[test]
    fn psi_z_small_parameter_decay() {
        // uniform has gamma_3 = 0, so |psi_z(t)| / (|t|^3 |z|) -> 0 as z -> 0
        let u = model("uniform");
        let t = 0.8;
        let mut prev = f64::INFINITY;
        for &z in &[0.5, 0.25, 0.125, 0.0625] {
            let ratio = psi_z(&u, t, z).unwrap().norm() / (t.powi(3) * z);
            assert!(ratio < prev, "z={z}: {ratio} vs {prev}");
            prev = ratio;
        }
        assert!(prev < 0.01);
    }

    #[test]
    fn psi_z_branch_continuity() {
        // walk a grid and require adjacent psi values to move smoothly
        let e = model("exp1");
        let z = 0.4;
        let mut prev = Complex64::ZERO;
        for i in 1..=60 {
            let t = 0.1 * i as f64;
            let psi = psi_z(&e, t, z).unwrap();
            if i > 1 {
                let jump = ((psi - prev) / (z * z)).im.abs();
                assert!(jump < std::f64::consts::FRAC_PI_2, "t={t}: jump {jump}");
            }
            prev = psi;
        }
    }

    #[test]
    fn w_z_forms() {
        let c = CumulantVector::standardized(&[0.9]);
        assert!(w_z(&c, 0.0, 0.7, 3).unwrap().norm() < 1e-15);
        let t = 0.8;
        let z = 0.5;
        let it = Complex64::new(0.0, t);
        let want = it.powu(3) * 0.9 / 6.0 * z;
        assert!((w_z(&c, t, z, 3).unwrap() - want).norm() < 1e-15);
    }

    #[test]
    fn identity_6_5_residual() {
        let c = CumulantVector::standardized(&[0.9, -0.6, 0.4]);
        let m = 5;
        let mut worst: f64 = 0.0;
        for i in 0..10 {
            for j in 0..10 {
                let t = -1.0 + 0.2 * i as f64 + 0.1;
                let z = -1.0 + 0.2 * j as f64 + 0.1;
                let it = Complex64::new(0.0, t);
                let lhs = w_z(&c, t, z, m).unwrap().exp();
                let mut partial = Complex64::new(1.0, 0.0);
                for k in 1..=15 {
                    partial += ak_polynomial(k, m, &c).unwrap().eval(it) * z.powi(k as i32);
                }
                worst = worst.max((lhs - partial).norm());
            }
        }
        assert!(worst < 1e-9, "residual {worst:.3e}");
    }

    #[test]
    fn residual_probe_gaussian_machine_zero() {
        let g = model("gaussian");
        let order = ExpansionOrder::new(4.0).unwrap();
        // keep t away from 0: the |t|^s normalizer amplifies f64 rounding there
        let t_grid: Vec<f64> = (0..=15).map(|i| 0.5 + 0.05 * i as f64).collect();
        let report = residual_probe(&g, order, &[4, 16, 64], &t_grid).unwrap();
        for &r in &report.max_normalized {
            assert!(r < 1e-12, "residual {r:.3e}");
        }
    }

    #[test]
    fn residual_probe_uniform_scaled_trend() {
        let u = model("uniform");
        let order = ExpansionOrder::new(4.0).unwrap();
        let t_grid: Vec<f64> = (1..=25).map(|i| 0.05 * i as f64).collect();
        let n_list = [4u64, 8, 16, 32, 64, 128, 256];
        let report = residual_probe(&u, order, &n_list, &t_grid).unwrap();
        // upper half of the n range: scaled residual should not increase
        let tail = &report.scaled[n_list.len() / 2..];
        for w in tail.windows(2) {
            assert!(w[1] <= w[0] * 1.05, "scaled {:?}", report.scaled);
        }
    }

    #[test]
    fn residual_probe_remainder_bounded() {
        let e = model("exp1");
        let order = ExpansionOrder::new(3.0).unwrap();
        let t_grid: Vec<f64> = (1..=25).map(|i| 0.05 * i as f64).collect();
        let n_list = [4u64, 16, 64, 256];
        let report = residual_probe(&e, order, &n_list, &t_grid).unwrap();
        let first = report.remainder_norm[0];
        for &r in &report.remainder_norm {
            assert!(r.is_finite());
            assert!(r < first * 10.0 + 1.0, "remainder {r}");
        }
    }

    #[test]
    fn residual_probe_window_precondition() {
        let u = model("uniform");
        let order = ExpansionOrder::new(4.0).unwrap();
        let err = residual_probe(&u, order, &[2], &[1.9]);
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn v_n_uniform_n2_matches_triangular_convolution() {
        // S_2 = (X_1 + X_2)/sqrt(2): density is the triangular convolution
        // rescaled; check v_2 against direct quadrature of that density.
        let u = model("uniform");
        let rule = gauss_legendre(200);
        for &t in &[0.4, 1.1, 2.7] {
            // density of X_1 + X_2 on [-2 sqrt3, 2 sqrt3]: (2 sqrt3 - |y|)/12
            let half = 2.0 * SQRT3;
            // split at the kink of the triangular density
            let ft = [rule.mapped(-half, 0.0), rule.mapped(0.0, half)]
                .iter()
                .map(|part| {
                    part.integrate_complex(|y| {
                        let dens = (half - y.abs()) / 12.0;
                        Complex64::new(0.0, t * y / SQRT2).exp() * dens
                    })
                })
                .sum::<Complex64>();
            let direct = v_n(&u, t, 2).unwrap();
            assert!((ft - direct).norm() < 1e-10, "t={t}: {ft} vs {direct}");
        }
    }
}
