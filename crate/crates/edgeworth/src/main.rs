//! Command-line driver: expansion tables, rate experiments, invariant
//! suites, the smoothing demo, and the fractional-operator checks.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use edgeworth::charfun::{model_by_name, residual_probe};
use edgeworth::config::{hash_json, CutoffRule, ExperimentConfig};
use edgeworth::cumulants::{
    cumulants_from_moments, hermite, moments_from_cumulants, CumulantVector, MomentVector,
};
use edgeworth::error::Error;
use edgeworth::expansion::{
    ak_polynomial, phi, pk_polynomial, qk_density_term, tail_bound_check, tm_projection_check,
    EdgeworthApproximant, ExpansionOrder,
};
use edgeworth::fractional::{
    fractional_fourier_check, fractional_parts_identity_check, liouville_derivative,
    liouville_integral, scaled_decay_check, FractionalOrder, Side, SignedMeasureSpec,
};
use edgeworth::grid::{
    choose_cutoff, invert_charfn, nonuniform_error, normalized_sum_density,
    normalized_sum_density_budget, tv_error, GridDensity, DEFAULT_MASS_BUDGET,
};
use edgeworth::poly::Poly;
use edgeworth::quad::gauss_hermite;
use edgeworth::smoothing::{beta_n, modified_density, smallest_valid_n, threshold_split};

#[derive(Parser)]
#[command(
    name = "edgeworth",
    about = "Edgeworth-type density expansions: tables, rate experiments, invariant suites"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print cumulants, P_k coefficient tables, and q_k in Hermite form
    Expand {
        #[arg(long)]
        model: String,
        #[arg(long)]
        m: usize,
    },
    /// Rate experiment: rho_n vs phi_m error columns with fitted slopes
    Rates {
        /// JSON config file; overrides all other flags
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<u64>>,
        #[arg(long, default_value_t = 8.0)]
        half_width: f64,
        #[arg(long, default_value_t = 1.0 / 256.0)]
        h: f64,
        /// Fixed inversion cutoff; omitted means automatic tail-budget search
        #[arg(long)]
        cutoff: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        weight_powers: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an invariant suite: cumulants, edgeworth, fractional, smoothing, oracle, or all
    Verify { suite: String },
    /// Binomial smoothing demo on the standardized chi-square(1) model
    SmoothDemo {
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [4u64, 6, 8, 10, 12, 14, 16, 18, 20])]
        n_list: Vec<u64>,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fractional operator identity checks (Eq 11.1 - 11.5)
    FractionalCheck {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum AppError {
    Invariant(String),
    Lib(Error),
}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        AppError::Lib(e)
    }
}

impl AppError {
    fn exit_code(&self) -> i32 {
        match self {
            AppError::Invariant(_) => 1,
            AppError::Lib(Error::Numeric(_)) => 3,
            AppError::Lib(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            AppError::Invariant(m) => format!("invariant failure: {m}"),
            AppError::Lib(e) => e.to_string(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("{}", e.message());
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cmd: Cmd) -> Result<(), AppError> {
    match cmd {
        Cmd::Expand { model, m } => cmd_expand(&model, m),
        Cmd::Rates {
            config,
            model,
            s,
            m,
            n_list,
            half_width,
            h,
            cutoff,
            weight_powers,
            out,
        } => {
            let cfg = match config {
                Some(path) => ExperimentConfig::from_path(&path)?,
                None => ExperimentConfig {
                    model: model
                        .ok_or_else(|| Error::Config("--model required without --config".into()))?,
                    s: s.ok_or_else(|| Error::Config("--s required without --config".into()))?,
                    m,
                    n_list: n_list
                        .ok_or_else(|| Error::Config("--n-list required without --config".into()))?,
                    half_width,
                    h,
                    cutoff: match cutoff {
                        Some(t) => CutoffRule::Fixed(t),
                        None => CutoffRule::Auto,
                    },
                    weight_powers: weight_powers.unwrap_or_default(),
                    out: out.map(|p| p.display().to_string()),
                },
            };
            cmd_rates(cfg)
        }
        Cmd::Verify { suite } => cmd_verify(&suite),
        Cmd::SmoothDemo { c, n_list, m, out } => cmd_smooth_demo(c, &n_list, m, out),
        Cmd::FractionalCheck { alpha, out } => cmd_fractional_check(alpha, out),
    }
}

fn emit(out: Option<&str>, text: &str) -> Result<(), AppError> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .map_err(|e| Error::Config(format!("cannot write {path}: {e}")))?;
            f.write_all(text.as_bytes())
                .map_err(|e| Error::Config(format!("cannot write {path}: {e}")))?;
            Ok(())
        }
    }
}

fn format_poly(p: &Poly, var: &str) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (d, c) in p.coeffs().iter().enumerate() {
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let coeff = if c.im.abs() > 1e-14 * c.norm() {
            format!("({} + {}i)", c.re, c.im)
        } else {
            format!("{}", c.re)
        };
        let term = match d {
            0 => coeff,
            1 => format!("{coeff} {var}"),
            _ => format!("{coeff} {var}^{d}"),
        };
        parts.push(term);
    }
    parts.join(" + ")
}

/// Rewrites a polynomial in the monic Hermite basis H_0, H_1, ...
fn hermite_form(p: &Poly) -> Result<Vec<(usize, f64)>, AppError> {
    let mut rem = p.clone();
    let mut out = Vec::new();
    while let Some(d) = rem.degree() {
        let c = rem.coeff(d).re;
        out.push((d, c));
        rem = rem.add(&hermite(d)?.scale(Complex64::new(-c, 0.0)));
        if rem.degree().is_some_and(|nd| nd >= d) {
            return Err(AppError::Lib(Error::Numeric(
                "hermite reduction did not lower the degree".into(),
            )));
        }
    }
    out.reverse();
    Ok(out)
}

fn cmd_expand(model_name: &str, m: usize) -> Result<(), AppError> {
    let model = model_by_name(model_name)?;
    let cumulants = model.cumulants_to(m)?;
    let mut text = format!("model {model_name}, m = {m}\n");
    for k in 3..=m {
        text += &format!("gamma_{k} = {}\n", cumulants.gamma(k));
    }
    for k in 1..=m.saturating_sub(2) {
        let pk = pk_polynomial(k, &cumulants)?;
        text += &format!("P_{k}(t) = {}\n", format_poly(&pk, "t"));
        let qk = qk_density_term(k, &cumulants)?;
        let terms: Vec<String> = hermite_form(qk.combo())?
            .iter()
            .rev()
            .map(|&(d, c)| format!("{c} H_{d}(x)"))
            .collect();
        let inner = if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        };
        text += &format!("q_{k}(x) = phi(x) * ({inner})\n");
    }
    emit(None, &text)
}

/// Least-squares slope of log y against log n with its standard error.
fn fit_slope(ns: &[f64], ys: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.max(1e-300).ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let r = y - (my + slope * (x - mx));
            r * r
        })
        .sum();
    let stderr = if lx.len() > 2 {
        (ssr / (k - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, stderr)
}

const NOISE_FLOOR: f64 = 1e-9;

fn cmd_rates(cfg: ExperimentConfig) -> Result<(), AppError> {
    let (model, order) = cfg.resolve()?;
    let weights = cfg.effective_weights(order);
    let cumulants = model.cumulants_to(order.m)?;
    let heavy = model.name == "student45";
    let conv_budget = if heavy { 1e-3 } else { DEFAULT_MASS_BUDGET };
    let gap_budget = if heavy { 5e-3 } else { 1e-4 };

    let mut text = format!("# config sha256 {}\n", cfg.hash());
    let weight_cols: Vec<String> = weights
        .iter()
        .map(|w| format!("sup_err_w{w}"))
        .collect();
    text += &format!("n,{},tv_err,oracle_gap\n", weight_cols.join(","));

    let mut sup_series: Vec<Vec<f64>> = vec![Vec::new(); weights.len()];
    let mut tv_series = Vec::new();
    for &n in &cfg.n_list {
        let approx = EdgeworthApproximant::new(order, &cumulants, n)?;
        let cutoff = match cfg.cutoff {
            CutoffRule::Auto => choose_cutoff(&model, n, DEFAULT_MASS_BUDGET)?,
            CutoffRule::Fixed(t) => t,
        };
        let inv = invert_charfn(&model, n, cutoff, cfg.half_width, cfg.h)?;
        let conv = normalized_sum_density_budget(&model, n, cfg.half_width, cfg.h, conv_budget)?;
        let gap = inv.sup_diff(&conv)?;
        if gap > gap_budget {
            return Err(AppError::Invariant(format!(
                "oracle disagreement {gap:.3e} beyond budget {gap_budget:.1e} at n = {n} \
                 (model {}, cutoff {cutoff})",
                model.name
            )));
        }
        let mut row = format!("{n}");
        for (i, &w) in weights.iter().enumerate() {
            let e = nonuniform_error(&inv, &approx, w)?;
            sup_series[i].push(e.value);
            row += &format!(",{:.8e}", e.value);
        }
        let tv = tv_error(&inv, &approx);
        tv_series.push(tv);
        row += &format!(",{tv:.8e},{gap:.8e}\n");
        text += &row;
    }

    // asymptotic fit over the upper half of the n range only
    let half = cfg.n_list.len() / 2;
    let ns: Vec<f64> = cfg.n_list[half..].iter().map(|&n| n as f64).collect();
    for (i, &w) in weights.iter().enumerate() {
        let ys = &sup_series[i][half..];
        if ys.iter().all(|&y| y < NOISE_FLOOR) {
            text += &format!("# slope sup_w{w} undefined (errors at grid-noise level)\n");
        } else {
            let (slope, se) = fit_slope(&ns, ys);
            text += &format!("# slope sup_w{w} = {slope:.4} (stderr {se:.4})\n");
        }
    }
    let tv_tail = &tv_series[half..];
    if tv_tail.iter().all(|&y| y < NOISE_FLOOR) {
        text += "# slope tv undefined (errors at grid-noise level)\n";
    } else {
        let (slope, se) = fit_slope(&ns, tv_tail);
        text += &format!("# slope tv = {slope:.4} (stderr {se:.4})\n");
    }
    emit(cfg.out.as_deref(), &text)
}

fn cmd_smooth_demo(c: f64, n_list: &[u64], m: usize, out: Option<PathBuf>) -> Result<(), AppError> {
    let model = model_by_name("chisq1")?;
    let grid = GridDensity::from_cdf(&model, 18.0, 1.0 / 256.0)?;
    let decomp = threshold_split(&grid, c)?;
    let params = serde_json::json!({"command": "smooth-demo", "c": c, "m": m, "n_list": n_list});
    let mut text = format!("# config sha256 {}\n", hash_json(&params));
    text += &format!(
        "# split: M = {}, a = {}, b = {}\n",
        decomp.threshold(),
        decomp.a(),
        decomp.b()
    );
    match smallest_valid_n(decomp.a(), decomp.b(), c, m) {
        Some(n1) => text += &format!("# beta_n < c^n/2 for all n >= n_1 = {n1}\n"),
        None => text += "# no n_1 below the cap satisfies beta_n < c^n/2\n",
    }
    text += "n,beta_n,tv_gap,c_pow_n\n";
    for &n in n_list {
        if n < (m + 2) as u64 {
            text += &format!("# n = {n} skipped (below m+2 = {})\n", m + 2);
            continue;
        }
        let report = modified_density(&decomp, n, m)?;
        if report.tv_gap > report.bound_2beta + 1e-12 {
            return Err(AppError::Invariant(format!(
                "tv gap {:.3e} exceeds 2 beta_n = {:.3e} at n = {n}",
                report.tv_gap, report.bound_2beta
            )));
        }
        text += &format!(
            "{n},{:.8e},{:.8e},{:.8e}\n",
            report.beta_n,
            report.tv_gap,
            c.powi(n as i32)
        );
    }
    emit(out.as_deref().map(|p| p.to_str().unwrap_or("")), &text)
}

fn cmd_fractional_check(alpha_val: f64, out: Option<PathBuf>) -> Result<(), AppError> {
    let alpha = FractionalOrder::new(alpha_val)?;
    let params = serde_json::json!({"command": "fractional-check", "alpha": alpha_val});
    let mut text = format!("# config sha256 {}\n", hash_json(&params));
    text += "check,label,value\n";
    let mut worst_eigen: f64 = 0.0;
    for &lambda in &[0.5, 1.0, 2.0] {
        for &x in &[0.5, 1.0, 3.0] {
            let y = move |t: f64| (-lambda * t).exp();
            let i_want = lambda.powf(-alpha_val) * (-lambda * x).exp();
            let i_got = liouville_integral(Side::Right, &y, alpha, x)?;
            let d_want = lambda.powf(alpha_val) * (-lambda * x).exp();
            let d_got = liouville_derivative(Side::Right, &y, alpha, x)?;
            let rel = ((i_got - i_want) / i_want)
                .abs()
                .max(((d_got - d_want) / d_want).abs());
            worst_eigen = worst_eigen.max(rel);
            text += &format!("eigen_rel_err,lambda={lambda};x={x},{rel:.3e}\n");
        }
    }
    if worst_eigen > 1e-6 {
        return Err(AppError::Invariant(format!(
            "eigen identity relative error {worst_eigen:.3e} above 1e-6"
        )));
    }
    let f = |x: f64| (-x).exp();
    let g = |x: f64| x * x * (-x).exp();
    let (lhs, rhs) = fractional_parts_identity_check(&f, &g, alpha)?;
    text += &format!("parts_identity_gap,exp_pair,{:.3e}\n", (lhs - rhs).abs());
    if (lhs - rhs).abs() > 1e-6 * (1.0 + lhs.abs()) {
        return Err(AppError::Invariant(format!(
            "integration by parts mismatch: {lhs} vs {rhs}"
        )));
    }
    let odd = SignedMeasureSpec::from_atoms(vec![(1.0, 1.0), (-1.0, -1.0)], 10.0)?;
    let three = SignedMeasureSpec::from_atoms(vec![(1.0, 1.0), (0.0, -2.0), (-1.0, 1.0)], 10.0)?;
    for (label, v, m) in [("odd_pair", &odd, 0usize), ("second_difference", &three, 1)] {
        let report = fractional_fourier_check(v, alpha, m, &[0.5, 1.0, 3.0])?;
        text += &format!(
            "fourier_max_rel,{label},{:.3e}\n",
            report.max_rel_discrepancy
        );
        if report.max_rel_discrepancy > 1e-5 {
            return Err(AppError::Invariant(format!(
                "Fourier relation discrepancy {:.3e} above 1e-5 for {label}",
                report.max_rel_discrepancy
            )));
        }
        let decay = scaled_decay_check(v, alpha, m, &[1.0, 0.5, 0.25, 0.125], &[0.5, 1.0, 2.0, 4.0])?;
        for &(z, e) in &decay.eps_hat {
            text += &format!("decay_eps,{label};z={z},{e:.6e}\n");
        }
        if decay.eps_hat.windows(2).any(|w| w[1].1 >= w[0].1) {
            return Err(AppError::Invariant(format!(
                "eps_hat(z) not decreasing for {label}"
            )));
        }
    }
    emit(out.as_deref().map(|p| p.to_str().unwrap_or("")), &text)
}

type Check = (
    &'static str,
    Box<dyn Fn() -> Result<(), String>>,
);

fn random_standardized_cumulants(rng: &mut ChaCha8Rng, order: usize) -> CumulantVector {
    let higher: Vec<f64> = (3..=order).map(|_| rng.gen_range(-0.4..0.4)).collect();
    CumulantVector::standardized(&higher)
}

fn checks_cumulants() -> Vec<Check> {
    vec![
        (
            "moment-cumulant roundtrip (100 random vectors)",
            Box::new(|| {
                let mut rng = ChaCha8Rng::seed_from_u64(42);
                for _ in 0..100 {
                    let mut alpha: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
                    alpha[1] = alpha[1].abs() + 1.0;
                    let m = MomentVector::new(alpha.clone());
                    let c = cumulants_from_moments(&m).map_err(|e| e.to_string())?;
                    let back = moments_from_cumulants(&c).map_err(|e| e.to_string())?;
                    for k in 1..=8 {
                        let diff = (back.alpha(k) - m.alpha(k)).abs();
                        if diff > 1e-12 * (1.0 + m.alpha(k).abs()) {
                            return Err(format!("roundtrip alpha_{k} off by {diff:.3e}"));
                        }
                    }
                }
                Ok(())
            }),
        ),
        (
            "partition cumulants match series-log oracle",
            Box::new(|| {
                let mut rng = ChaCha8Rng::seed_from_u64(7);
                for _ in 0..20 {
                    let alpha: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.5..1.5)).collect();
                    let m = MomentVector::new(alpha.clone());
                    let c = cumulants_from_moments(&m).map_err(|e| e.to_string())?;
                    // log of the moment generating series, coefficient-wise
                    let mut series = vec![Complex64::new(1.0, 0.0)];
                    let mut fact = 1.0;
                    for (k, &a) in alpha.iter().enumerate() {
                        fact *= (k + 1) as f64;
                        series.push(Complex64::new(a / fact, 0.0));
                    }
                    let logs = edgeworth::series::log_trunc(&series, 9);
                    let mut fact = 1.0;
                    for k in 1..=8 {
                        fact *= k as f64;
                        let oracle = logs[k].re * fact;
                        let diff = (c.gamma(k) - oracle).abs();
                        if diff > 1e-10 * (1.0 + oracle.abs()) {
                            return Err(format!("gamma_{k}: partition {} vs oracle {oracle}", c.gamma(k)));
                        }
                    }
                }
                Ok(())
            }),
        ),
        (
            "hermite recurrence",
            Box::new(|| {
                for k in 1..20 {
                    let (h0, h1, h2) = (
                        hermite(k - 1).map_err(|e| e.to_string())?,
                        hermite(k).map_err(|e| e.to_string())?,
                        hermite(k + 1).map_err(|e| e.to_string())?,
                    );
                    for i in 0..10 {
                        let x = Complex64::new(-2.0 + 0.45 * i as f64, 0.0);
                        let lhs = h2.eval(x);
                        let rhs = x * h1.eval(x) - Complex64::new(k as f64, 0.0) * h0.eval(x);
                        if (lhs - rhs).norm() > 1e-9 * (1.0 + lhs.norm()) {
                            return Err(format!("recurrence broken at k={k}"));
                        }
                    }
                }
                Ok(())
            }),
        ),
    ]
}

fn checks_edgeworth() -> Vec<Check> {
    vec![
        (
            "golden P1/P2 coefficients",
            Box::new(|| {
                let mut rng = ChaCha8Rng::seed_from_u64(11);
                for _ in 0..20 {
                    let g3: f64 = rng.gen_range(-1.0..1.0);
                    let g4: f64 = rng.gen_range(-1.0..1.0);
                    let cum = CumulantVector::standardized(&[g3, g4]);
                    let p1 = pk_polynomial(1, &cum).map_err(|e| e.to_string())?;
                    let p2 = pk_polynomial(2, &cum).map_err(|e| e.to_string())?;
                    let want1 = Poly::from_real(&[0.0, 0.0, 0.0, g3 / 6.0]);
                    let want2 =
                        Poly::from_real(&[0.0, 0.0, 0.0, 0.0, g4 / 24.0, 0.0, g3 * g3 / 72.0]);
                    if p1.coeff_distance(&want1) > 1e-14 || p2.coeff_distance(&want2) > 1e-14 {
                        return Err("P1/P2 coefficients off".into());
                    }
                }
                Ok(())
            }),
        ),
        (
            "fourier duality q_k vs P_k",
            Box::new(|| {
                let cum = CumulantVector::standardized(&[0.3, -0.2, 0.1, 0.25]);
                let rule = gauss_hermite(96);
                let root2 = 2.0f64.sqrt();
                for k in 1..=4 {
                    let q = qk_density_term(k, &cum).map_err(|e| e.to_string())?;
                    let p = pk_polynomial(k, &cum).map_err(|e| e.to_string())?;
                    for i in 0..=20 {
                        let t = -5.0 + 0.5 * i as f64;
                        let transform = rule.integrate_complex(|u| {
                            let x = root2 * u;
                            Complex64::new(0.0, t * x).exp()
                                * q.combo().eval_real(x)
                                * (1.0 / (2.0 * std::f64::consts::PI).sqrt())
                        }) * root2;
                        let want = (-0.5 * t * t).exp() * p.eval(Complex64::new(0.0, t));
                        if (transform - want).norm() > 1e-8 {
                            return Err(format!("duality gap at k={k}, t={t}"));
                        }
                    }
                }
                Ok(())
            }),
        ),
        (
            "projection fixed point (m = 3..6)",
            Box::new(|| {
                let mut rng = ChaCha8Rng::seed_from_u64(23);
                for m in 3..=6 {
                    for _ in 0..20 {
                        let cum = random_standardized_cumulants(&mut rng, m);
                        let back = tm_projection_check(&cum, m).map_err(|e| e.to_string())?;
                        for k in 1..=m {
                            if (back.gamma(k) - cum.gamma(k)).abs() > 1e-10 {
                                return Err(format!("fixed point broken at m={m}, k={k}"));
                            }
                        }
                    }
                }
                Ok(())
            }),
        ),
        (
            "perturbed gamma_4 fixture breaks the fixed point",
            Box::new(|| {
                let cum = CumulantVector::standardized(&[0.3, -0.2]);
                let back = tm_projection_check(&cum, 4).map_err(|e| e.to_string())?;
                if (back.gamma(4) - cum.gamma(4)).abs() > 1e-10 {
                    return Err("clean fixture failed".into());
                }
                // a 1e-3 perturbation of the INPUT cumulants must be detected
                // when checked against the unperturbed fixture
                let perturbed = CumulantVector::standardized(&[0.3, -0.2 + 1e-3]);
                let back = tm_projection_check(&perturbed, 4).map_err(|e| e.to_string())?;
                let drift = (back.gamma(4) - cum.gamma(4)).abs();
                if drift < 1e-6 {
                    return Err(format!("mutation not detected (drift {drift:.3e})"));
                }
                Ok(())
            }),
        ),
        (
            "identity (6.5) truncation against Lemma 7.1 bound",
            Box::new(|| {
                let mut rng = ChaCha8Rng::seed_from_u64(31);
                let m = 5;
                let cum = random_standardized_cumulants(&mut rng, m);
                for _ in 0..25 {
                    let t = Complex64::new(rng.gen_range(-1.0..1.0), 0.0) * 0.9;
                    let z = Complex64::new(rng.gen_range(-1.0..1.0), 0.0) * 0.9;
                    let (lhs, rhs) =
                        tail_bound_check(&cum, m, z, t, 15).map_err(|e| e.to_string())?;
                    if lhs > rhs * 1.01 + 1e-14 {
                        return Err(format!("tail sum {lhs:.3e} above bound {rhs:.3e}"));
                    }
                }
                Ok(())
            }),
        ),
        (
            "a_k vanish below k+2 and cap at degree 3k",
            Box::new(|| {
                let cum = CumulantVector::standardized(&[0.4, -0.3, 0.2]);
                for m in 3..=5 {
                    for k in 1..=6 {
                        let ak = ak_polynomial(k, m, &cum).map_err(|e| e.to_string())?;
                        if let Some(lo) = ak.min_power() {
                            if lo < k + 2 {
                                return Err(format!("a_{k} has power {lo} < k+2"));
                            }
                        }
                        if let Some(d) = ak.degree() {
                            if d > 3 * k {
                                return Err(format!("a_{k} degree {d} > 3k"));
                            }
                        }
                    }
                }
                Ok(())
            }),
        ),
    ]
}

fn checks_fractional() -> Vec<Check> {
    vec![
        (
            "exponential eigen identities (11.1)",
            Box::new(|| {
                for &lambda in &[0.5, 1.0, 2.0] {
                    for &a in &[0.25, 0.5, 0.75] {
                        let alpha = FractionalOrder::new(a).map_err(|e| e.to_string())?;
                        for &x in &[0.5, 1.0, 3.0] {
                            let y = move |t: f64| (-lambda * t).exp();
                            let got = liouville_integral(Side::Right, &y, alpha, x)
                                .map_err(|e| e.to_string())?;
                            let want = lambda.powf(-a) * (-lambda * x).exp();
                            if (got - want).abs() > 1e-6 * want {
                                return Err(format!("I: lambda={lambda} a={a} x={x}"));
                            }
                            let got = liouville_derivative(Side::Right, &y, alpha, x)
                                .map_err(|e| e.to_string())?;
                            let want = lambda.powf(a) * (-lambda * x).exp();
                            if (got - want).abs() > 1e-6 * want {
                                return Err(format!("D: lambda={lambda} a={a} x={x}"));
                            }
                        }
                    }
                }
                Ok(())
            }),
        ),
        (
            "D I roundtrip (Prop 11.1)",
            Box::new(|| {
                let alpha = FractionalOrder::new(0.5).map_err(|e| e.to_string())?;
                let y = |t: f64| (-0.5 * ((t - 2.0) / 0.5f64).powi(2)).exp();
                let iy = move |t: f64| {
                    liouville_integral(Side::Left, &y, alpha, t).unwrap_or(f64::NAN)
                };
                for &x in &[1.5, 2.5] {
                    let got =
                        liouville_derivative(Side::Left, &iy, alpha, x).map_err(|e| e.to_string())?;
                    if (got - y(x)).abs() > 1e-4 {
                        return Err(format!("roundtrip off at x={x}"));
                    }
                }
                Ok(())
            }),
        ),
        (
            "integration by parts (11.2)",
            Box::new(|| {
                let alpha = FractionalOrder::new(0.5).map_err(|e| e.to_string())?;
                let f = |x: f64| (-x).exp();
                let g = |x: f64| x * x * (-x).exp();
                let (lhs, rhs) =
                    fractional_parts_identity_check(&f, &g, alpha).map_err(|e| e.to_string())?;
                if (lhs - rhs).abs() > 1e-6 * (1.0 + lhs.abs()) {
                    return Err(format!("{lhs} vs {rhs}"));
                }
                Ok(())
            }),
        ),
        (
            "fourier relation (11.4)",
            Box::new(|| {
                let alpha = FractionalOrder::new(0.5).map_err(|e| e.to_string())?;
                let odd = SignedMeasureSpec::from_atoms(vec![(1.0, 1.0), (-1.0, -1.0)], 10.0)
                    .map_err(|e| e.to_string())?;
                let report =
                    fractional_fourier_check(&odd, alpha, 0, &[1.0]).map_err(|e| e.to_string())?;
                if report.max_rel_discrepancy > 1e-5 {
                    return Err(format!("discrepancy {:.3e}", report.max_rel_discrepancy));
                }
                Ok(())
            }),
        ),
        (
            "scaled decay (11.5)",
            Box::new(|| {
                let alpha = FractionalOrder::new(0.5).map_err(|e| e.to_string())?;
                let odd = SignedMeasureSpec::from_atoms(vec![(1.0, 1.0), (-1.0, -1.0)], 10.0)
                    .map_err(|e| e.to_string())?;
                let report = scaled_decay_check(
                    &odd,
                    alpha,
                    0,
                    &[1.0, 0.5, 0.25, 0.125],
                    &[0.5, 1.0, 2.0, 4.0],
                )
                .map_err(|e| e.to_string())?;
                if report.eps_hat.windows(2).any(|w| w[1].1 >= w[0].1) {
                    return Err("eps_hat not decreasing".into());
                }
                Ok(())
            }),
        ),
    ]
}

fn checks_smoothing() -> Vec<Check> {
    vec![
        (
            "chi-square split contracts",
            Box::new(|| {
                let model = model_by_name("chisq1").map_err(|e| e.to_string())?;
                let grid =
                    GridDensity::from_cdf(&model, 18.0, 1.0 / 256.0).map_err(|e| e.to_string())?;
                let d = threshold_split(&grid, 0.5).map_err(|e| e.to_string())?;
                if !(d.b() > 0.0 && d.b() < 0.25) {
                    return Err(format!("b = {}", d.b()));
                }
                for i in 0..d.base().values().len() {
                    let rebuilt = d.a() * d.p_part().values()[i] + d.b() * d.q_part().values()[i];
                    if (rebuilt - d.base().values()[i]).abs() > 1e-10 {
                        return Err("reconstruction off".into());
                    }
                }
                Ok(())
            }),
        ),
        (
            "Lemma 13.1 tv gap (n = 4, 6, 8)",
            Box::new(|| {
                let model = model_by_name("chisq1").map_err(|e| e.to_string())?;
                let grid =
                    GridDensity::from_cdf(&model, 18.0, 1.0 / 256.0).map_err(|e| e.to_string())?;
                let d = threshold_split(&grid, 0.5).map_err(|e| e.to_string())?;
                for n in [4u64, 6, 8] {
                    let report = modified_density(&d, n, 2).map_err(|e| e.to_string())?;
                    if report.tv_gap > report.bound_2beta + 1e-12 {
                        return Err(format!("n={n}: {} > {}", report.tv_gap, report.bound_2beta));
                    }
                }
                Ok(())
            }),
        ),
        (
            "bounded density passes through",
            Box::new(|| {
                let model = model_by_name("uniform").map_err(|e| e.to_string())?;
                let grid =
                    GridDensity::from_cdf(&model, 16.0, 1.0 / 256.0).map_err(|e| e.to_string())?;
                let d = threshold_split(&grid, 0.5).map_err(|e| e.to_string())?;
                if !d.is_trivial() {
                    return Err("expected trivial split".into());
                }
                let report = modified_density(&d, 6, 2).map_err(|e| e.to_string())?;
                if report.tv_gap > 1e-10 || report.beta_n != 0.0 {
                    return Err(format!("tv {} beta {}", report.tv_gap, report.beta_n));
                }
                Ok(())
            }),
        ),
        (
            "beta_n below c^n/2 from reported n_1",
            Box::new(|| {
                let model = model_by_name("chisq1").map_err(|e| e.to_string())?;
                let grid =
                    GridDensity::from_cdf(&model, 18.0, 1.0 / 256.0).map_err(|e| e.to_string())?;
                let d = threshold_split(&grid, 0.5).map_err(|e| e.to_string())?;
                let n1 = smallest_valid_n(d.a(), d.b(), 0.5, 2).ok_or("no n_1 below cap")?;
                for n in n1..=64 {
                    if beta_n(d.a(), d.b(), n, 2) >= 0.5 * 0.5f64.powi(n as i32) {
                        return Err(format!("beta_{n} above c^n/2"));
                    }
                }
                Ok(())
            }),
        ),
    ]
}

fn checks_oracle() -> Vec<Check> {
    vec![
        (
            "inversion recovers the gaussian density",
            Box::new(|| {
                let model = model_by_name("gaussian").map_err(|e| e.to_string())?;
                let inv =
                    invert_charfn(&model, 4, 16.0, 8.0, 1.0 / 256.0).map_err(|e| e.to_string())?;
                let mut sup: f64 = 0.0;
                for (i, &v) in inv.values().iter().enumerate() {
                    sup = sup.max((v - phi(inv.x(i))).abs());
                }
                if sup > 1e-8 {
                    return Err(format!("sup {sup:.3e}"));
                }
                Ok(())
            }),
        ),
        (
            "oracle agreement exp1 n=2",
            Box::new(|| {
                let model = model_by_name("exp1").map_err(|e| e.to_string())?;
                let cutoff =
                    choose_cutoff(&model, 2, DEFAULT_MASS_BUDGET).map_err(|e| e.to_string())?;
                let inv = invert_charfn(&model, 2, cutoff, 8.0, 1.0 / 256.0)
                    .map_err(|e| e.to_string())?;
                let conv =
                    normalized_sum_density(&model, 2, 8.0, 1.0 / 256.0).map_err(|e| e.to_string())?;
                let gap = inv.sup_diff(&conv).map_err(|e| e.to_string())?;
                if gap > 1e-4 {
                    return Err(format!("gap {gap:.3e}"));
                }
                Ok(())
            }),
        ),
        (
            "oracle agreement uniform n=8",
            Box::new(|| {
                let model = model_by_name("uniform").map_err(|e| e.to_string())?;
                let cutoff =
                    choose_cutoff(&model, 8, DEFAULT_MASS_BUDGET).map_err(|e| e.to_string())?;
                let inv = invert_charfn(&model, 8, cutoff, 8.0, 1.0 / 256.0)
                    .map_err(|e| e.to_string())?;
                let conv =
                    normalized_sum_density(&model, 8, 8.0, 1.0 / 256.0).map_err(|e| e.to_string())?;
                let gap = inv.sup_diff(&conv).map_err(|e| e.to_string())?;
                if gap > 1e-4 {
                    return Err(format!("gap {gap:.3e}"));
                }
                Ok(())
            }),
        ),
        (
            "gaussian residual probe at machine level",
            Box::new(|| {
                let model = model_by_name("gaussian").map_err(|e| e.to_string())?;
                let order = ExpansionOrder::new(4.0).map_err(|e| e.to_string())?;
                let t_grid: Vec<f64> = (0..7).map(|i| 0.5 + 0.125 * i as f64).collect();
                let report = residual_probe(&model, order, &[4, 16, 64], &t_grid)
                    .map_err(|e| e.to_string())?;
                if report.max_normalized.iter().any(|&r| r > 1e-12) {
                    return Err(format!("residuals {:?}", report.max_normalized));
                }
                Ok(())
            }),
        ),
    ]
}

fn cmd_verify(suite: &str) -> Result<(), AppError> {
    let checks: Vec<Check> = match suite {
        "cumulants" => checks_cumulants(),
        "edgeworth" => checks_edgeworth(),
        "fractional" => checks_fractional(),
        "smoothing" => checks_smoothing(),
        "oracle" => checks_oracle(),
        "all" => checks_cumulants()
            .into_iter()
            .chain(checks_edgeworth())
            .chain(checks_fractional())
            .chain(checks_smoothing())
            .chain(checks_oracle())
            .collect(),
        other => {
            return Err(AppError::Lib(Error::Config(format!(
                "unknown suite '{other}' (expected cumulants, edgeworth, fractional, smoothing, oracle, all)"
            ))));
        }
    };
    let mut first_failure: Option<String> = None;
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("PASS {name}"),
            Err(detail) => {
                println!("FAIL {name}");
                first_failure.get_or_insert(format!("{name}: {detail}"));
            }
        }
    }
    match first_failure {
        None => Ok(()),
        Some(detail) => Err(AppError::Invariant(detail)),
    }
}
