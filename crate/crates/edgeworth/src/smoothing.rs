//! Binomial smoothing decomposition for unbounded densities: split the base
//! density at a threshold, drop the binomial terms with too few bounded
//! factors, and renormalize. The modified density is bounded while staying
//! within total-variation distance 2 beta_n of the true normalized sum
//! density.

use crate::charfun::{v_n, DistributionModel};
use crate::error::{Error, Result};
use crate::grid::{convolve_pair, self_convolve_with_budget, GridDensity, DEFAULT_MASS_BUDGET};
use crate::quad::gauss_legendre;

/// Hard cap on n for the term-by-term binomial convolutions.
pub const MODIFIED_N_CAP: u64 = 64;

/// Split of a grid density at threshold M into bounded part `p` (where
/// `rho <= M`, mass `a`) and peak part `q` (where `rho > M`, mass `b`),
/// both normalized to probability densities.
#[derive(Debug, Clone)]
pub struct SmoothingDecomposition {
    threshold: f64,
    a: f64,
    b: f64,
    c: f64,
    trivial: bool,
    base: GridDensity,
    p_part: GridDensity,
    q_part: GridDensity,
}

impl SmoothingDecomposition {
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// True when the density never exceeded the chosen threshold (b = 0) and
    /// the whole construction degenerates to the identity.
    pub fn is_trivial(&self) -> bool {
        self.trivial
    }

    /// The unit-mass base density the split reproduces as `a p + b q`.
    pub fn base(&self) -> &GridDensity {
        &self.base
    }

    pub fn p_part(&self) -> &GridDensity {
        &self.p_part
    }

    pub fn q_part(&self) -> &GridDensity {
        &self.q_part
    }
}

/// Chooses the smallest grid-representable threshold M with
/// `b = int_{rho > M} rho < c/2` and returns the normalized split parts.
pub fn threshold_split(rho: &GridDensity, c: f64) -> Result<SmoothingDecomposition> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Precondition(format!(
            "rate parameter c must lie in (0, 1), got {c}"
        )));
    }
    let mass = rho.mass();
    if (mass - 1.0).abs() > 1e-3 {
        return Err(Error::Precondition(format!(
            "input grid mass {mass} is not a probability density"
        )));
    }
    let h = rho.h();
    let values: Vec<f64> = rho.values().iter().map(|&v| v / mass).collect();
    let mut sorted = values.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("finite grid values"));
    sorted.dedup();
    // mass above a candidate is a decreasing step function of the threshold;
    // take the smallest candidate that leaves less than c/2 above it
    let above = |m: f64| -> f64 { h * values.iter().filter(|&&v| v > m).sum::<f64>() };
    let threshold = match sorted.iter().find(|&&m| above(m) < 0.5 * c) {
        Some(&m) => m,
        None => {
            return Err(Error::Config(format!(
                "no grid threshold achieves mass above it below c/2 = {}",
                0.5 * c
            )));
        }
    };
    let b = above(threshold);
    let a = 1.0 - b;
    let trivial = b == 0.0;
    let p_values: Vec<f64> = values
        .iter()
        .map(|&v| if v <= threshold { v / a } else { 0.0 })
        .collect();
    let q_values: Vec<f64> = values
        .iter()
        .map(|&v| {
            if v > threshold && !trivial {
                v / b
            } else {
                0.0
            }
        })
        .collect();
    Ok(SmoothingDecomposition {
        threshold,
        a,
        b,
        c,
        trivial,
        base: GridDensity::new(rho.half_width(), h, values)?,
        p_part: GridDensity::new(rho.half_width(), h, p_values)?,
        q_part: GridDensity::new(rho.half_width(), h, q_values)?,
    })
}

fn binomial(n: u64, k: u64) -> f64 {
    let mut out = 1.0;
    for j in 0..k.min(n - k) {
        out *= (n - j) as f64 / (j + 1) as f64;
    }
    out
}

/// `beta_n = sum_{k=0}^{m+1} C(n,k) a^k b^{n-k}`, the binomial mass of the
/// dropped terms.
pub fn beta_n(a: f64, b: f64, n: u64, m: usize) -> f64 {
    (0..=(m + 1) as u64)
        .map(|k| binomial(n, k) * a.powi(k as i32) * b.powi((n - k) as i32))
        .sum()
}

/// Smallest n0 <= cap such that `beta_n < c^n/2` for every n in
/// `[max(n0, m+2), cap]`; None when no such n0 exists below the cap.
pub fn smallest_valid_n(a: f64, b: f64, c: f64, m: usize) -> Option<u64> {
    let start = (m + 2) as u64;
    let mut first = None;
    for n in start..=MODIFIED_N_CAP {
        if beta_n(a, b, n, m) < 0.5 * c.powi(n as i32) {
            first.get_or_insert(n);
        } else {
            first = None;
        }
    }
    first
}

/// The modified density and its distance to the true normalized sum density.
#[derive(Debug, Clone)]
pub struct ModifiedDensityReport {
    pub n: u64,
    pub beta_n: f64,
    pub tv_gap: f64,
    pub bound_2beta: f64,
    /// rho-tilde_n on the normalized (x = S_n/sqrt(n)) scale.
    pub density: GridDensity,
}

impl ModifiedDensityReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e}",
            self.n, self.beta_n, self.tv_gap, self.bound_2beta
        )
    }
}

fn add_scaled(acc: &mut [f64], acc_half: f64, g: &GridDensity, coeff: f64) {
    let offset = ((acc_half - g.half_width()) / g.h()).round() as usize;
    for (i, &v) in g.values().iter().enumerate() {
        acc[offset + i] += coeff * v;
    }
}

/// Builds `p_n = sum_{k=m+2}^n C(n,k) a^k b^{n-k} p^{*k} * q^{*(n-k)}` and
/// the report of `rho_tilde_n = p_n/(1-beta_n)` (rescaled by sqrt(n))
/// against the true `rho_n`.
pub fn modified_density(
    decomp: &SmoothingDecomposition,
    n: u64,
    m: usize,
) -> Result<ModifiedDensityReport> {
    if n < (m + 2) as u64 {
        return Err(Error::Precondition(format!(
            "n = {n} below the minimum m+2 = {}",
            m + 2
        )));
    }
    if n > MODIFIED_N_CAP {
        return Err(Error::Bounds(format!(
            "n = {n} exceeds the convolution budget cap {MODIFIED_N_CAP}"
        )));
    }
    let (a, b) = (decomp.a, decomp.b);
    let h = decomp.base.h();
    let beta = beta_n(a, b, n, m);

    let l_max = 64.0;
    let acc_half = 2.0 * l_max;
    let acc_len = 2 * (acc_half / h).round() as usize + 1;
    let mut acc = vec![0.0; acc_len];
    for k in (m + 2) as u64..=n {
        let coeff = binomial(n, k) * a.powi(k as i32) * b.powi((n - k) as i32);
        if coeff == 0.0 {
            continue;
        }
        let (pk, _) = self_convolve_with_budget(&decomp.p_part, k, l_max, DEFAULT_MASS_BUDGET)?;
        let term = if k < n {
            let (qj, _) =
                self_convolve_with_budget(&decomp.q_part, n - k, l_max, DEFAULT_MASS_BUDGET)?;
            convolve_pair(&pk, &qj)?
        } else {
            pk
        };
        add_scaled(&mut acc, acc_half, &term, coeff);
    }
    let p_n = GridDensity::new(acc_half, h, acc)?;
    let scale = 1.0 / (1.0 - beta);
    let mass = p_n.mass() * scale;
    if (mass - 1.0).abs() > 1e-6 {
        return Err(Error::Numeric(format!(
            "modified density mass {mass} deviates from 1"
        )));
    }

    let (rho_n, _) = self_convolve_with_budget(&decomp.base, n, l_max, DEFAULT_MASS_BUDGET)?;
    // total variation is invariant under the sqrt(n) rescale, so compare on
    // the convolution grid directly
    let offset = ((acc_half - rho_n.half_width()) / h).round() as usize;
    let mut tv = 0.0;
    for (i, &v) in p_n.values().iter().enumerate() {
        let r = if (offset..offset + rho_n.values().len()).contains(&i) {
            rho_n.values()[i - offset]
        } else {
            0.0
        };
        tv += (v * scale - r).abs();
    }
    let tv_gap = h * tv;

    let root_n = (n as f64).sqrt();
    let out_half = (decomp.base.half_width().min(p_n.half_width() / root_n) / h).floor() * h;
    let density = GridDensity::from_fn(
        |x| root_n * scale * p_n.value_at(x * root_n),
        out_half,
        h,
    )?;
    Ok(ModifiedDensityReport {
        n,
        beta_n: beta,
        tv_gap,
        bound_2beta: 2.0 * beta,
        density,
    })
}

/// Tail integrals of `|v_n|` beyond each probe radius and their
/// log-quadratic fits.
#[derive(Debug, Clone)]
pub struct TailProbeReport {
    /// (n, T, tail integral) per probed pair.
    pub rows: Vec<(u64, f64, f64)>,
    /// (n, fitted sigma^2, relative fit residual) per n.
    pub fits: Vec<(u64, f64, f64)>,
}

/// `int_{|t| >= T} |v_n(t)| dt` by panels doubling outward from T.
fn charfn_tail_integral(model: &DistributionModel, n: u64, t_from: f64) -> Result<f64> {
    let gl = gauss_legendre(24);
    let mut total = 0.0;
    let mut t0 = t_from;
    let mut len = 0.5f64;
    loop {
        let chunks = len.ceil().max(1.0) as usize;
        let step = len / chunks as f64;
        let mut c = 0.0;
        for j in 0..chunks {
            let rule = gl.mapped(t0 + j as f64 * step, t0 + (j + 1) as f64 * step);
            for (&node, &w) in rule.nodes.iter().zip(&rule.weights) {
                c += w * v_n(model, node, n)?.norm();
            }
        }
        total += c;
        if len >= 8.0 && c <= 1e-12 * (1.0 + total) {
            break;
        }
        if t0 > 1e5 {
            return Err(Error::Numeric(
                "characteristic function tail integral does not converge".into(),
            ));
        }
        t0 += len;
        len *= 2.0;
    }
    Ok(2.0 * total)
}

/// Probes Gaussian-type decay of the characteristic function tail: fits
/// `log integral ~ log A - sigma^2 T^2` per n over the probe radii.
pub fn tail_integral_probe(
    model: &DistributionModel,
    n_list: &[u64],
    t_list: &[f64],
) -> Result<TailProbeReport> {
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &n in n_list {
        let root_n = (n as f64).sqrt();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &t in t_list {
            if !(0.0..=root_n).contains(&t) {
                return Err(Error::Precondition(format!(
                    "probe radius T = {t} outside [0, sqrt(n)] for n = {n}"
                )));
            }
            let integral = charfn_tail_integral(model, n, t)?;
            rows.push((n, t, integral));
            if integral > 0.0 {
                xs.push(t * t);
                ys.push(integral.ln());
            }
        }
        if xs.len() >= 2 {
            let len = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / len;
            let my = ys.iter().sum::<f64>() / len;
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            let slope = sxy / sxx;
            let spread = ys
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
                    (lo.min(y), hi.max(y))
                });
            let resid = xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| (y - (my + slope * (x - mx))).abs())
                .fold(0.0f64, f64::max);
            let rel = resid / (spread.1 - spread.0).max(1e-300);
            fits.push((n, -slope, rel));
        }
    }
    Ok(TailProbeReport { rows, fits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfun::model_by_name;
    use crate::grid::normalized_sum_density;

    fn chisq_grid() -> GridDensity {
        let model = model_by_name("chisq1").unwrap();
        GridDensity::from_cdf(&model, 18.0, 1.0 / 256.0).unwrap()
    }

    fn uniform_grid() -> GridDensity {
        let model = model_by_name("uniform").unwrap();
        GridDensity::from_cdf(&model, 16.0, 1.0 / 256.0).unwrap()
    }

    #[test]
    fn bounded_density_splits_trivially() {
        let d = threshold_split(&uniform_grid(), 0.5).unwrap();
        assert!(d.is_trivial());
        assert_eq!(d.b(), 0.0);
        assert_eq!(d.a(), 1.0);
    }

    #[test]
    fn chisq_split_obeys_contracts() {
        let d = threshold_split(&chisq_grid(), 0.5).unwrap();
        assert!(!d.is_trivial());
        assert!(d.b() > 0.0 && d.b() < 0.25, "b = {}", d.b());
        assert!((d.a() + d.b() - 1.0).abs() < 1e-12);
        assert!((d.p_part().mass() - 1.0).abs() < 1e-8);
        assert!((d.q_part().mass() - 1.0).abs() < 1e-8);
        let bound = d.threshold() / d.a();
        for &v in d.p_part().values() {
            assert!(v <= bound + 1e-12);
        }
        // reconstruction a p + b q = rho on the grid
        for i in 0..d.base().values().len() {
            let rebuilt = d.a() * d.p_part().values()[i] + d.b() * d.q_part().values()[i];
            assert!((rebuilt - d.base().values()[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn smaller_threshold_fails_only_below_resolution() {
        // picking the smallest candidate means the next smaller unique grid
        // value must violate b < c/2
        let d = threshold_split(&chisq_grid(), 0.5).unwrap();
        let g = chisq_grid();
        let mass = g.mass();
        let below: Vec<f64> = g
            .values()
            .iter()
            .map(|&v| v / mass)
            .filter(|&v| v < d.threshold())
            .collect();
        if let Some(next) = below.iter().cloned().fold(None::<f64>, |acc, v| {
            Some(acc.map_or(v, |a| a.max(v)))
        }) {
            let b_next: f64 = g.h()
                * g.values()
                    .iter()
                    .map(|&v| v / mass)
                    .filter(|&v| v > next)
                    .sum::<f64>();
            assert!(b_next >= 0.25);
        }
    }

    #[test]
    fn beta_formula_matches_direct_sum() {
        let (a, b) = (0.9f64, 0.1f64);
        let direct = b.powi(10)
            + 10.0 * a * b.powi(9)
            + 45.0 * a * a * b.powi(8)
            + 120.0 * a.powi(3) * b.powi(7);
        assert!((beta_n(a, b, 10, 2) - direct).abs() < 1e-15);
    }

    #[test]
    fn trivial_split_passes_through() {
        let d = threshold_split(&uniform_grid(), 0.5).unwrap();
        let report = modified_density(&d, 6, 2).unwrap();
        assert_eq!(report.beta_n, 0.0);
        assert!(report.tv_gap < 1e-10, "tv {}", report.tv_gap);
        let direct =
            normalized_sum_density(&model_by_name("uniform").unwrap(), 6, 8.0, 1.0 / 256.0)
                .unwrap();
        let mut sup: f64 = 0.0;
        for (i, &v) in direct.values().iter().enumerate() {
            sup = sup.max((v - report.density.value_at(direct.x(i))).abs());
        }
        assert!(sup < 2e-3, "sup {sup}");
    }

    #[test]
    fn tv_gap_bounded_by_twice_beta() {
        let d = threshold_split(&chisq_grid(), 0.5).unwrap();
        for n in [4u64, 8, 12] {
            let report = modified_density(&d, n, 2).unwrap();
            assert!(
                report.tv_gap <= report.bound_2beta + 1e-12,
                "n={n}: tv {} vs 2beta {}",
                report.tv_gap,
                report.bound_2beta
            );
            assert!(report.tv_gap > 0.0);
        }
    }

    #[test]
    fn valid_n_threshold_reported() {
        let d = threshold_split(&chisq_grid(), 0.5).unwrap();
        let n1 = smallest_valid_n(d.a(), d.b(), 0.5, 2).expect("n1 below cap");
        for n in n1..=MODIFIED_N_CAP {
            assert!(beta_n(d.a(), d.b(), n, 2) < 0.5 * 0.5f64.powi(n as i32));
        }
    }

    #[test]
    fn preconditions_enforced() {
        let d = threshold_split(&chisq_grid(), 0.5).unwrap();
        assert!(matches!(
            modified_density(&d, 3, 2),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(modified_density(&d, 65, 2), Err(Error::Bounds(_))));
        assert!(threshold_split(&chisq_grid(), 1.5).is_err());
    }

    #[test]
    fn gaussian_tail_probe_fits_half() {
        let model = model_by_name("gaussian").unwrap();
        let report = tail_integral_probe(&model, &[4], &[0.5, 1.0, 1.5, 2.0]).unwrap();
        let (_, sigma2, resid) = report.fits[0];
        assert!((0.4..0.7).contains(&sigma2), "sigma2 {sigma2}");
        assert!(resid < 0.1, "residual {resid}");
        for w in report.rows.windows(2) {
            assert!(w[1].2 < w[0].2);
        }
    }

    #[test]
    fn uniform_tail_probe_decreasing_and_quadratic() {
        let model = model_by_name("uniform").unwrap();
        let report = tail_integral_probe(&model, &[16], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let (_, sigma2, resid) = report.fits[0];
        assert!(sigma2 > 0.0);
        assert!(resid < 0.1, "residual {resid}");
        for w in report.rows.windows(2) {
            assert!(w[1].2 < w[0].2);
        }
        // T = 0 gives the full finite integral
        let full = charfn_tail_integral(&model, 16, 0.0).unwrap();
        assert!(full.is_finite() && full > 0.0);
    }

    #[test]
    fn probe_radius_outside_window_rejected() {
        let model = model_by_name("uniform").unwrap();
        assert!(matches!(
            tail_integral_probe(&model, &[4], &[3.0]),
            Err(Error::Precondition(_))
        ));
    }
}
