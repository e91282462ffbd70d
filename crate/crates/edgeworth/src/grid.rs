//! Ground-truth densities of normalized sums on uniform grids, by n-fold
//! convolution and by Fourier inversion, plus the non-uniform error
//! functionals used in the rate experiments.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::io::{BufRead, Write};

use crate::charfun::{v_n, DistributionModel};
use crate::error::{Error, Result};
use crate::expansion::EdgeworthApproximant;

/// Default grid spacing for experiments.
pub const DEFAULT_H: f64 = 1.0 / 256.0;
/// Default half-width of the base (pre-normalization) grid.
pub const DEFAULT_L: f64 = 16.0;
/// Cap on the half-width of intermediate convolution grids.
pub const DEFAULT_L_MAX: f64 = 64.0;
/// Mass-loss budget for convolution truncation and inversion tails.
pub const DEFAULT_MASS_BUDGET: f64 = 1e-6;

/// Density samples on the uniform grid `x_i = -L + i h`, `i = 0..=2L/h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    half_width: f64,
    h: f64,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(half_width: f64, h: f64, values: Vec<f64>) -> Result<Self> {
        if !(h > 0.0) || !(half_width > 0.0) {
            return Err(Error::Precondition(format!(
                "grid needs positive h and half-width, got h={h}, L={half_width}"
            )));
        }
        let cells = (half_width / h).round() as usize;
        if ((half_width / h) - cells as f64).abs() > 1e-9 {
            return Err(Error::Precondition(format!(
                "half-width {half_width} must be a multiple of h={h}"
            )));
        }
        if values.len() != 2 * cells + 1 {
            return Err(Error::Precondition(format!(
                "expected {} grid values, got {}",
                2 * cells + 1,
                values.len()
            )));
        }
        Ok(GridDensity {
            half_width,
            h,
            values,
        })
    }

    /// Sample a model density as exact cell averages of the CDF. This keeps
    /// mass exact even across jump points of the density.
    pub fn from_cdf(model: &DistributionModel, half_width: f64, h: f64) -> Result<Self> {
        let cells = (half_width / h).round() as usize;
        let values = (0..=2 * cells)
            .map(|i| {
                let x = -half_width + i as f64 * h;
                (model.cdf(x + 0.5 * h) - model.cdf(x - 0.5 * h)) / h
            })
            .collect();
        GridDensity::new(half_width, h, values)
    }

    /// Pointwise sampling of an arbitrary function (test helper and signed
    /// difference grids).
    pub fn from_fn(f: impl Fn(f64) -> f64, half_width: f64, h: f64) -> Result<Self> {
        let cells = (half_width / h).round() as usize;
        let values = (0..=2 * cells)
            .map(|i| f(-half_width + i as f64 * h))
            .collect();
        GridDensity::new(half_width, h, values)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h
    }

    /// Riemann-sum mass `h * sum(values)`.
    pub fn mass(&self) -> f64 {
        self.h * self.values.iter().sum::<f64>()
    }

    pub fn second_moment(&self) -> f64 {
        self.h
            * self
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let x = self.x(i);
                    x * x * v
                })
                .sum::<f64>()
    }

    /// Probability-density invariants: unit mass within `tol`, values not
    /// below -1e-12.
    pub fn check_probability(&self, tol: f64) -> Result<()> {
        let mass = self.mass();
        if (mass - 1.0).abs() > tol {
            return Err(Error::Numeric(format!(
                "grid mass {mass} deviates from 1 beyond {tol}"
            )));
        }
        if let Some(&bad) = self.values.iter().find(|&&v| v < -1e-12) {
            return Err(Error::Numeric(format!("negative density value {bad}")));
        }
        Ok(())
    }

    /// Max |self - other| over the common grid (grids must share h; the
    /// comparison runs over the overlap).
    pub fn sup_diff(&self, other: &GridDensity) -> Result<f64> {
        if (self.h - other.h).abs() > 1e-12 {
            return Err(Error::Precondition("grids have different spacing".into()));
        }
        let overlap = self.half_width.min(other.half_width);
        let cells = (overlap / self.h).round() as usize;
        let a0 = ((self.half_width - overlap) / self.h).round() as usize;
        let b0 = ((other.half_width - overlap) / other.h).round() as usize;
        Ok((0..=2 * cells)
            .map(|i| (self.values[a0 + i] - other.values[b0 + i]).abs())
            .fold(0.0, f64::max))
    }

    /// Max asymmetry |f(x) - f(-x)| over the grid.
    pub fn asymmetry(&self) -> f64 {
        let n = self.values.len();
        (0..n)
            .map(|i| (self.values[i] - self.values[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }

    /// Cubic (4-point Lagrange) interpolation; zero outside the grid.
    pub fn value_at(&self, x: f64) -> f64 {
        let pos = (x + self.half_width) / self.h;
        let n = self.values.len();
        if pos < 0.0 || pos > (n - 1) as f64 {
            return 0.0;
        }
        let i1 = (pos.floor() as usize).clamp(1, n.saturating_sub(3).max(1)) as i64;
        let base = (i1 - 1) as usize;
        if base + 3 >= n {
            return self.values[n - 1];
        }
        let u = pos - i1 as f64;
        let f = &self.values[base..base + 4];
        // Lagrange weights at nodes -1, 0, 1, 2 relative to i1
        let w0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
        let w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
        let w2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
        let w3 = (u + 1.0) * u * (u - 1.0) / 6.0;
        w0 * f[0] + w1 * f[1] + w2 * f[2] + w3 * f[3]
    }

    /// CSV serialization: header row, two columns, 17 significant digits.
    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "x,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.x(i), v)?;
        }
        Ok(())
    }

    /// Parse the CSV form back into a grid, validating uniform spacing,
    /// symmetric extent, and finite values.
    pub fn read_csv(input: &mut dyn BufRead) -> Result<GridDensity> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty grid CSV".into()))?
            .map_err(|e| Error::Config(format!("read failure: {e}")))?;
        if header.trim() != "x,value" {
            return Err(Error::Config(format!("bad grid CSV header '{header}'")));
        }
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Config(format!("read failure: {e}")))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let x: f64 = parts
                .next()
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad x at data line {}", lineno + 1)))?;
            let v: f64 = parts
                .next()
                .ok_or_else(|| Error::Config(format!("missing value at data line {}", lineno + 1)))?
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad value at data line {}", lineno + 1)))?;
            if parts.next().is_some() {
                return Err(Error::Config(format!(
                    "too many columns at data line {}",
                    lineno + 1
                )));
            }
            if !x.is_finite() || !v.is_finite() {
                return Err(Error::Config(format!(
                    "non-finite entry at data line {}",
                    lineno + 1
                )));
            }
            xs.push(x);
            values.push(v);
        }
        if xs.len() < 3 {
            return Err(Error::Config("grid CSV needs at least 3 rows".into()));
        }
        let h = xs[1] - xs[0];
        if !(h > 0.0) {
            return Err(Error::Config("grid x column must be increasing".into()));
        }
        for w in xs.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * (1.0 + h) {
                return Err(Error::Config("grid spacing is not uniform".into()));
            }
        }
        let half_width = -xs[0];
        if (xs[xs.len() - 1] - half_width).abs() > 1e-9 || half_width <= 0.0 {
            return Err(Error::Config("grid must be symmetric about 0".into()));
        }
        GridDensity::new(half_width, h, values)
    }
}

/// Linear convolution of two aligned grids, `h * (a * b)`; the result lives
/// on the sum interval `[-(La+Lb), La+Lb]`.
pub fn convolve_pair(a: &GridDensity, b: &GridDensity) -> Result<GridDensity> {
    if (a.h - b.h).abs() > 1e-12 {
        return Err(Error::Precondition("grids have different spacing".into()));
    }
    let la = a.values.len();
    let lb = b.values.len();
    let out_len = la + lb - 1;
    let size = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(size);
    let ifft = planner.plan_fft_inverse(size);
    let mut fa: Vec<Complex64> = a
        .values
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(std::iter::repeat(Complex64::ZERO))
        .take(size)
        .collect();
    let mut fb: Vec<Complex64> = b
        .values
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(std::iter::repeat(Complex64::ZERO))
        .take(size)
        .collect();
    fft.process(&mut fa);
    fft.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    ifft.process(&mut fa);
    let scale = a.h / size as f64;
    let values: Vec<f64> = fa[..out_len].iter().map(|c| c.re * scale).collect();
    GridDensity::new(a.half_width + b.half_width, a.h, values)
}

/// Drop grid cells beyond `l_max`, returning the truncated grid and the
/// discarded mass.
fn truncate(f: GridDensity, l_max: f64) -> Result<(GridDensity, f64)> {
    if f.half_width <= l_max + 1e-12 {
        return Ok((f, 0.0));
    }
    let drop = ((f.half_width - l_max) / f.h).round() as usize;
    let lost: f64 = f.values[..drop]
        .iter()
        .chain(&f.values[f.values.len() - drop..])
        .sum::<f64>()
        * f.h;
    let values = f.values[drop..f.values.len() - drop].to_vec();
    Ok((GridDensity::new(l_max, f.h, values)?, lost))
}

/// n-fold self-convolution by binary powering, truncating intermediate
/// grids at `l_max` and accounting the lost mass against `budget`.
pub fn self_convolve_with_budget(
    f: &GridDensity,
    n: u64,
    l_max: f64,
    budget: f64,
) -> Result<(GridDensity, f64)> {
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    let mut lost_total = 0.0;
    let mut acc: Option<GridDensity> = None;
    let mut power = f.clone();
    let mut remaining = n;
    loop {
        if remaining & 1 == 1 {
            let next = match &acc {
                None => power.clone(),
                Some(a) => convolve_pair(a, &power)?,
            };
            let (t, lost) = truncate(next, l_max)?;
            lost_total += lost;
            acc = Some(t);
        }
        remaining >>= 1;
        if remaining == 0 {
            break;
        }
        let squared = convolve_pair(&power, &power)?;
        let (t, lost) = truncate(squared, l_max)?;
        // a truncated intermediate loses this mass in every later use;
        // charge it against the worst case of remaining doublings
        lost_total += lost * remaining as f64;
        power = t;
    }
    if lost_total > budget {
        return Err(Error::Numeric(format!(
            "convolution truncation lost mass {lost_total:.3e}, budget {budget:.3e}"
        )));
    }
    Ok((acc.expect("n >= 1"), lost_total))
}

pub fn self_convolve(f: &GridDensity, n: u64) -> Result<(GridDensity, f64)> {
    self_convolve_with_budget(f, n, DEFAULT_L_MAX, DEFAULT_MASS_BUDGET)
}

/// `rho_n(x) = sqrt(n) rho^{*n}(x sqrt(n))` by grid convolution. The rescale
/// happens first: the summands `X_i/sqrt(n)` are cell-averaged (via the CDF)
/// on a grid 16 times finer than the output and convolved in normalized
/// units, then the output nodes are read off directly. Skipping the final
/// interpolation keeps kinks of the exact density at O(h/16) accuracy, and
/// the accumulating grid stays standardized, so the `l_max` truncation never
/// touches real mass.
pub fn normalized_sum_density(
    model: &DistributionModel,
    n: u64,
    half_width: f64,
    h: f64,
) -> Result<GridDensity> {
    normalized_sum_density_budget(model, n, half_width, h, DEFAULT_MASS_BUDGET)
}

pub fn normalized_sum_density_budget(
    model: &DistributionModel,
    n: u64,
    half_width: f64,
    h: f64,
    budget: f64,
) -> Result<GridDensity> {
    const REFINE: usize = 16;
    let hf = h / REFINE as f64;
    let root_n = (n as f64).sqrt();
    let cells = (half_width / hf).round() as usize;
    let base = GridDensity::new(
        half_width,
        hf,
        (0..=2 * cells)
            .map(|i| {
                let y = -half_width + i as f64 * hf;
                (model.cdf(root_n * (y + 0.5 * hf)) - model.cdf(root_n * (y - 0.5 * hf))) / hf
            })
            .collect(),
    )?;
    let (conv, _lost) = self_convolve_with_budget(&base, n, DEFAULT_L_MAX, budget)?;
    let out_half = ((half_width.min(conv.half_width())) / h).floor() * h;
    let out_cells = (out_half / h).round() as usize;
    let offset = ((conv.half_width() - out_half) / hf).round() as usize;
    let values = (0..=2 * out_cells)
        .map(|i| conv.values[offset + i * REFINE])
        .collect();
    GridDensity::new(out_half, h, values)
}

/// Same pipeline starting from an explicit base grid (used by the smoothing
/// module, whose modified density has no model behind it).
pub fn normalized_sum_density_from_grid(
    base: &GridDensity,
    n: u64,
    half_width: f64,
    h: f64,
) -> Result<GridDensity> {
    let (conv, _lost) = self_convolve(base, n)?;
    let root_n = (n as f64).sqrt();
    let out_half = {
        let natural = (conv.half_width() / root_n).min(half_width);
        (natural / h).floor() * h
    };
    GridDensity::from_fn(|x| root_n * conv.value_at(x * root_n), out_half, h)
}

/// Power-law fit of the decay of `|v_n|` over the octave `[t/2, t]` versus
/// `[t/4, t/2]`, returning (peak on last octave, decay exponent).
fn octave_decay(model: &DistributionModel, n: u64, t: f64) -> Result<(f64, f64)> {
    let samples = 96;
    let max_on = |lo: f64, hi: f64| -> Result<f64> {
        let mut m: f64 = 0.0;
        for i in 0..=samples {
            let t = lo + (hi - lo) * i as f64 / samples as f64;
            m = m.max(v_n(model, t, n)?.norm());
        }
        Ok(m)
    };
    let a1 = max_on(0.5 * t, t)?;
    let a2 = max_on(0.25 * t, 0.5 * t)?;
    let beta = if a1 > 0.0 && a2 > 0.0 {
        (a2 / a1).log2()
    } else {
        f64::INFINITY
    };
    Ok((a1, beta))
}

/// Estimated integral `(1/pi) int_T^inf |v_n|`, extrapolating the last
/// octave's power-law decay. Infinite when the observed decay is too slow
/// to be integrable.
fn tail_estimate(model: &DistributionModel, n: u64, t_cutoff: f64) -> Result<f64> {
    let (a1, beta) = octave_decay(model, n, t_cutoff)?;
    if a1 == 0.0 {
        return Ok(0.0);
    }
    if beta <= 1.05 {
        return Ok(f64::INFINITY);
    }
    // the octave max sits near t/2; anchor the fitted power law there
    Ok(a1 * t_cutoff * 2f64.powf(-beta) / (std::f64::consts::PI * (beta - 1.0)))
}

/// Smallest power-of-two cutoff (from 16) whose estimated tail is below the
/// budget; configuration error when no admissible cutoff exists (e.g. |v_n|
/// not integrable).
pub fn choose_cutoff(model: &DistributionModel, n: u64, budget: f64) -> Result<f64> {
    let mut t = 16.0;
    while t <= 4.2e6 {
        let tail = tail_estimate(model, n, t)?;
        if tail < budget {
            return Ok(t);
        }
        t *= 2.0;
    }
    Err(Error::Config(format!(
        "no admissible inversion cutoff for model {} at n = {n}: |v_n| tail does not decay integrably",
        model.name
    )))
}

/// Fourier inversion oracle:
/// `rho_n(x) = (1/2pi) int_{|t| <= T} e^{-itx} v_n(t) dt` on a uniform grid,
/// computed with one FFT over the t-window and cubic interpolation in x.
/// The tail beyond T is estimated by power-law extrapolation and must fit
/// the mass budget.
pub fn invert_charfn(
    model: &DistributionModel,
    n: u64,
    t_cutoff: f64,
    half_width: f64,
    h: f64,
) -> Result<GridDensity> {
    let tail = tail_estimate(model, n, t_cutoff)?;
    if !(tail < DEFAULT_MASS_BUDGET) {
        return Err(Error::Config(format!(
            "inversion cutoff {t_cutoff} too small for model {} at n = {n} (estimated tail {tail:.3e})",
            model.name
        )));
    }
    // dt fixes the x-periodization at 2pi/dt ~ 25; the zoo densities carry
    // < 1e-9 mass that far out
    // dt is held near 0.25 and the window extended to a power-of-two size:
    // shrinking dt instead would coarsen the output spacing 2pi/(N dt)
    let dt = 0.25;
    let size = ((2.0 * t_cutoff / dt).ceil() as usize)
        .next_power_of_two()
        .max(4096);
    if size > 1 << 24 {
        return Err(Error::Config(format!(
            "inversion grid would need {size} points; cutoff {t_cutoff} too large"
        )));
    }
    let t_cutoff = size as f64 * dt / 2.0;
    let mut data: Vec<Complex64> = Vec::with_capacity(size);
    for j in 0..size {
        let t = -t_cutoff + j as f64 * dt;
        data.push(v_n(model, t, n)?);
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(size).process(&mut data);
    // rho(x_k) = (dt/2pi) e^{i T x_k} V_k at x_k = 2pi k/(size dt), wrapped
    let dx = 2.0 * std::f64::consts::PI / (size as f64 * dt);
    let period = size as f64 * dx;
    let scale = dt / (2.0 * std::f64::consts::PI);
    let mut xs = vec![0.0f64; size];
    let mut rho = vec![0.0f64; size];
    for (k, v) in data.iter().enumerate() {
        let mut x = k as f64 * dx;
        if x >= period / 2.0 {
            x -= period;
        }
        let phase = Complex64::new(0.0, t_cutoff * x).exp();
        let idx = (k + size / 2) % size;
        xs[idx] = x;
        rho[idx] = (phase * v).re * scale;
    }
    // xs now ascends from -period/2; interpolate onto the requested grid
    let interp = InterpGrid {
        x0: xs[0],
        dx,
        values: rho,
    };
    let out_half = (half_width / h).round() * h;
    GridDensity::from_fn(|x| interp.value_at(x), out_half, h)
}

/// Minimal uniform-grid cubic interpolant (the inversion output starts at
/// -period/2, not at a multiple of the target spacing).
struct InterpGrid {
    x0: f64,
    dx: f64,
    values: Vec<f64>,
}

impl InterpGrid {
    fn value_at(&self, x: f64) -> f64 {
        let pos = (x - self.x0) / self.dx;
        let n = self.values.len();
        if pos < 1.0 || pos > (n - 3) as f64 {
            return 0.0;
        }
        let i1 = pos.floor() as usize;
        let u = pos - i1 as f64;
        let f = &self.values[i1 - 1..i1 + 3];
        let w0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
        let w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
        let w2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
        let w3 = (u + 1.0) * u * (u - 1.0) / 6.0;
        w0 * f[0] + w1 * f[1] + w2 * f[2] + w3 * f[3]
    }
}

/// Weighted sup-norm error of Theorem 1.1.
#[derive(Debug, Clone, Copy)]
pub struct NonuniformError {
    /// max over the grid of (1 + |x|^w) |rho_n(x) - phi_m(x)|
    pub value: f64,
    /// true when the weighted error is still rising at the grid boundary,
    /// i.e. the grid is too narrow to certify the sup
    pub boundary_rising: bool,
}

pub fn nonuniform_error(
    rho_n: &GridDensity,
    approx: &EdgeworthApproximant,
    weight_power: f64,
) -> Result<NonuniformError> {
    if !(weight_power >= 0.0) {
        return Err(Error::Precondition(format!(
            "weight power must be nonnegative, got {weight_power}"
        )));
    }
    let n = rho_n.values.len();
    let weighted: Vec<f64> = (0..n)
        .map(|i| {
            let x = rho_n.x(i);
            (1.0 + x.abs().powf(weight_power)) * (rho_n.values[i] - approx.phi_m(x)).abs()
        })
        .collect();
    let value = weighted.iter().fold(0.0f64, |a, &b| a.max(b));
    let edge = weighted[0].max(weighted[n - 1]);
    // compare the boundary against the level a little inside
    let inner = n / 8;
    let near_edge = weighted[..inner]
        .iter()
        .chain(&weighted[n - inner..])
        .fold(0.0f64, |a, &b| a.max(b));
    let boundary_rising = edge > 0.0 && edge >= 0.9 * near_edge && edge >= 0.5 * value;
    Ok(NonuniformError {
        value,
        boundary_rising,
    })
}

/// Total-variation error `h * sum |rho_n - phi_m|` of Eq (1.7).
pub fn tv_error(rho_n: &GridDensity, approx: &EdgeworthApproximant) -> f64 {
    rho_n.h
        * rho_n
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| (v - approx.phi_m(rho_n.x(i))).abs())
            .sum::<f64>()
}
