//! Acceptance battery: one test per criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them on success).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use edgeworth::charfun::{model_by_name, residual_probe};
use edgeworth::cumulants::{cumulants_from_moments, CumulantVector, MomentVector};
use edgeworth::expansion::{
    pk_polynomial, qk_density_term, tail_bound_check, tm_projection_check, EdgeworthApproximant,
    ExpansionOrder,
};
use edgeworth::fractional::{
    fractional_fourier_check, fractional_parts_identity_check, liouville_derivative,
    liouville_integral, scaled_decay_check, FractionalOrder, Side, SignedMeasureSpec,
};
use edgeworth::grid::{
    choose_cutoff, invert_charfn, nonuniform_error, normalized_sum_density, tv_error, GridDensity,
    DEFAULT_MASS_BUDGET,
};
use edgeworth::poly::Poly;
use edgeworth::quad::gauss_hermite;
use edgeworth::smoothing::{beta_n, modified_density, smallest_valid_n, threshold_split};

fn report(n: usize, label: &str, body: impl FnOnce() -> Result<(), String>) {
    match body() {
        Ok(()) => println!("PASS criterion {n}: {label}"),
        Err(detail) => {
            println!("FAIL criterion {n}: {label}: {detail}");
            panic!("criterion {n} failed: {detail}");
        }
    }
}

fn fit_slope(ns: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.max(1e-300).ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / sxx
}

#[test]
fn criterion_01_symbolic_golden_p1_p2() {
    report(1, "symbolic golden P_1/P_2", || {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..50 {
            let g3: f64 = rng.gen_range(-1.5..1.5);
            let g4: f64 = rng.gen_range(-1.5..1.5);
            let cum = CumulantVector::standardized(&[g3, g4]);
            let p1 = pk_polynomial(1, &cum).map_err(|e| e.to_string())?;
            let p2 = pk_polynomial(2, &cum).map_err(|e| e.to_string())?;
            let want1 = Poly::from_real(&[0.0, 0.0, 0.0, g3 / 6.0]);
            let want2 = Poly::from_real(&[0.0, 0.0, 0.0, 0.0, g4 / 24.0, 0.0, g3 * g3 / 72.0]);
            let d1 = p1.coeff_distance(&want1);
            let d2 = p2.coeff_distance(&want2);
            if d1 > 1e-14 || d2 > 1e-14 {
                return Err(format!(
                    "coefficient distance {:.3e} at gamma_3={g3}, gamma_4={g4}",
                    d1.max(d2)
                ));
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_02_cumulant_oracle_equivalence() {
    report(2, "partition cumulants vs series-log oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(202);
        for _ in 0..100 {
            let alpha: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let m = MomentVector::new(alpha.clone());
            let c = cumulants_from_moments(&m).map_err(|e| e.to_string())?;
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
                    return Err(format!(
                        "gamma_{k}: partition {} vs oracle {oracle}",
                        c.gamma(k)
                    ));
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_03_fourier_duality() {
    report(3, "fourier duality q_k vs P_k (k <= 4)", || {
        let cum = CumulantVector::standardized(&[0.3, -0.2, 0.1, 0.25]);
        let rule = gauss_hermite(96);
        let root2 = 2.0f64.sqrt();
        let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        for k in 1..=4 {
            let q = qk_density_term(k, &cum).map_err(|e| e.to_string())?;
            let p = pk_polynomial(k, &cum).map_err(|e| e.to_string())?;
            for i in 0..=40 {
                let t = -5.0 + 0.25 * i as f64;
                let transform = rule.integrate_complex(|u| {
                    let x = root2 * u;
                    Complex64::new(0.0, t * x).exp() * q.combo().eval_real(x) * norm
                }) * root2;
                let want = (-0.5 * t * t).exp() * p.eval(Complex64::new(0.0, t));
                let gap = (transform - want).norm();
                if gap > 1e-8 {
                    return Err(format!("gap {gap:.3e} at k={k}, t={t}"));
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_04_projection_fixed_point() {
    report(4, "T_m projection fixed point, m = 3..6", || {
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        for m in 3..=6 {
            for _ in 0..20 {
                let higher: Vec<f64> = (3..=m).map(|_| rng.gen_range(-0.4..0.4)).collect();
                let cum = CumulantVector::standardized(&higher);
                let back = tm_projection_check(&cum, m).map_err(|e| e.to_string())?;
                for k in 1..=m {
                    let diff = (back.gamma(k) - cum.gamma(k)).abs();
                    if diff > 1e-10 {
                        return Err(format!("gamma_{k} drift {diff:.3e} at m={m}"));
                    }
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_05_identity_65_tail_bound() {
    report(5, "identity (6.5) truncation within Lemma 7.1 bound", || {
        let mut rng = ChaCha8Rng::seed_from_u64(505);
        let cum = CumulantVector::standardized(&[0.35, -0.25, 0.15]);
        let m = 5;
        for _ in 0..100 {
            let t = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
            let z = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
            let (lhs, rhs) = tail_bound_check(&cum, m, z, t, 15).map_err(|e| e.to_string())?;
            if lhs > rhs * 1.01 + 1e-14 {
                return Err(format!(
                    "tail sum {lhs:.3e} above bound {rhs:.3e} at t={}, z={}",
                    t.re, z.re
                ));
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_06_oracle_agreement() {
    report(6, "convolution vs inversion oracles, sup < 1e-4", || {
        for name in ["uniform", "exp1"] {
            let model = model_by_name(name).map_err(|e| e.to_string())?;
            for n in [2u64, 4, 8, 16] {
                let cutoff =
                    choose_cutoff(&model, n, DEFAULT_MASS_BUDGET).map_err(|e| e.to_string())?;
                let inv = invert_charfn(&model, n, cutoff, 8.0, 1.0 / 256.0)
                    .map_err(|e| e.to_string())?;
                let conv = normalized_sum_density(&model, n, 8.0, 1.0 / 256.0)
                    .map_err(|e| e.to_string())?;
                let gap = inv.sup_diff(&conv).map_err(|e| e.to_string())?;
                if gap > 1e-4 {
                    return Err(format!("gap {gap:.3e} for {name} at n={n}"));
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_07_theorem_11_uniform_rate() {
    report(7, "uniform s=m=4 rate slopes within -1 +/- 0.2", || {
        let model = model_by_name("uniform").map_err(|e| e.to_string())?;
        let order = ExpansionOrder::new(4.0).map_err(|e| e.to_string())?;
        let cum = model.cumulants_to(4).map_err(|e| e.to_string())?;
        let n_list = [4u64, 8, 16, 32, 64, 128, 256];
        let mut sup_w4 = Vec::new();
        let mut tv = Vec::new();
        for &n in &n_list {
            let approx = EdgeworthApproximant::new(order, &cum, n).map_err(|e| e.to_string())?;
            let cutoff =
                choose_cutoff(&model, n, DEFAULT_MASS_BUDGET).map_err(|e| e.to_string())?;
            let inv =
                invert_charfn(&model, n, cutoff, 8.0, 1.0 / 256.0).map_err(|e| e.to_string())?;
            sup_w4.push(
                nonuniform_error(&inv, &approx, 4.0)
                    .map_err(|e| e.to_string())?
                    .value,
            );
            tv.push(tv_error(&inv, &approx));
        }
        let half = n_list.len() / 2;
        let ns: Vec<f64> = n_list[half..].iter().map(|&n| n as f64).collect();
        let sup_slope = fit_slope(&ns, &sup_w4[half..]);
        let tv_slope = fit_slope(&ns, &tv[half..]);
        if (sup_slope + 1.0).abs() > 0.2 || (tv_slope + 1.0).abs() > 0.2 {
            return Err(format!(
                "sup_w4 slope {sup_slope:.4}, tv slope {tv_slope:.4}, required -1 +/- 0.2"
            ));
        }
        Ok(())
    });
}

#[test]
fn criterion_08_fractional_s_student_rate() {
    report(8, "student-t(4.5) s=4.2 weighted slope <= -0.85", || {
        let model = model_by_name("student45").map_err(|e| e.to_string())?;
        let order = ExpansionOrder::new(4.2).map_err(|e| e.to_string())?;
        let cum = model.cumulants_to(4).map_err(|e| e.to_string())?;
        let n_list = [8u64, 16, 32, 64, 128, 256];
        let mut errs = Vec::new();
        for &n in &n_list {
            let approx = EdgeworthApproximant::new(order, &cum, n).map_err(|e| e.to_string())?;
            let cutoff =
                choose_cutoff(&model, n, DEFAULT_MASS_BUDGET).map_err(|e| e.to_string())?;
            let inv =
                invert_charfn(&model, n, cutoff, 8.0, 1.0 / 256.0).map_err(|e| e.to_string())?;
            errs.push(
                nonuniform_error(&inv, &approx, 4.0)
                    .map_err(|e| e.to_string())?
                    .value,
            );
        }
        let half = n_list.len() / 2;
        let ns: Vec<f64> = n_list[half..].iter().map(|&n| n as f64).collect();
        let slope = fit_slope(&ns, &errs[half..]);
        if slope > -0.85 {
            return Err(format!("slope {slope:.4} above -0.85"));
        }
        Ok(())
    });
}

#[test]
fn criterion_09_fractional_operator_identities() {
    report(9, "fractional operator identities (11.1)-(11.5)", || {
        for &lambda in &[0.5, 1.0, 2.0] {
            for &a in &[0.25, 0.5, 0.75] {
                let alpha = FractionalOrder::new(a).map_err(|e| e.to_string())?;
                for &x in &[0.5, 1.0, 3.0] {
                    let y = move |t: f64| (-lambda * t).exp();
                    let got =
                        liouville_integral(Side::Right, &y, alpha, x).map_err(|e| e.to_string())?;
                    let want = lambda.powf(-a) * (-lambda * x).exp();
                    if (got - want).abs() > 1e-6 * want {
                        return Err(format!("(11.1) I at lambda={lambda}, a={a}, x={x}"));
                    }
                }
            }
        }
        let alpha = FractionalOrder::new(0.5).map_err(|e| e.to_string())?;
        for (c, w) in [(2.0f64, 0.5f64), (2.5, 0.7), (3.5, 0.4)] {
            let y = move |t: f64| (-0.5 * ((t - c) / w).powi(2)).exp();
            let iy = move |t: f64| liouville_integral(Side::Left, &y, alpha, t).unwrap_or(f64::NAN);
            for &x in &[c - w, c + w] {
                let got =
                    liouville_derivative(Side::Left, &iy, alpha, x).map_err(|e| e.to_string())?;
                if (got - y(x)).abs() > 1e-4 {
                    return Err(format!("(Prop 11.1) roundtrip off at x={x}, bump c={c}"));
                }
            }
        }
        for (f, g) in [
            (
                Box::new(|x: f64| (-x).exp()) as Box<dyn Fn(f64) -> f64>,
                Box::new(|x: f64| x * x * (-x).exp()) as Box<dyn Fn(f64) -> f64>,
            ),
            (
                Box::new(|x: f64| x * (-x).exp()),
                Box::new(|x: f64| x.powi(3) * (-2.0 * x).exp()),
            ),
        ] {
            let (lhs, rhs) =
                fractional_parts_identity_check(&f, &g, alpha).map_err(|e| e.to_string())?;
            if (lhs - rhs).abs() > 1e-6 * (1.0 + lhs.abs()) {
                return Err(format!("(11.2) parts identity: {lhs} vs {rhs}"));
            }
        }
        let odd = SignedMeasureSpec::from_atoms(vec![(1.0, 1.0), (-1.0, -1.0)], 10.0)
            .map_err(|e| e.to_string())?;
        let three = SignedMeasureSpec::from_atoms(vec![(1.0, 1.0), (0.0, -2.0), (-1.0, 1.0)], 10.0)
            .map_err(|e| e.to_string())?;
        for (label, v, m) in [("odd pair", &odd, 0usize), ("second difference", &three, 1)] {
            let rep =
                fractional_fourier_check(v, alpha, m, &[0.5, 1.0, 3.0]).map_err(|e| e.to_string())?;
            if rep.max_rel_discrepancy > 1e-5 {
                return Err(format!(
                    "(11.4) discrepancy {:.3e} for {label}",
                    rep.max_rel_discrepancy
                ));
            }
            let decay = scaled_decay_check(
                v,
                alpha,
                m,
                &[1.0, 0.5, 0.25, 0.125],
                &[0.5, 1.0, 2.0, 4.0],
            )
            .map_err(|e| e.to_string())?;
            if decay.eps_hat.windows(2).any(|w| w[1].1 >= w[0].1) {
                return Err(format!("(11.5) eps_hat not decreasing for {label}"));
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_10_smoothing_lemma_131() {
    report(10, "binomial smoothing, chi-square(1), c = 0.5", || {
        let model = model_by_name("chisq1").map_err(|e| e.to_string())?;
        let grid = GridDensity::from_cdf(&model, 18.0, 1.0 / 256.0).map_err(|e| e.to_string())?;
        let d = threshold_split(&grid, 0.5).map_err(|e| e.to_string())?;
        for n in 4u64..=20 {
            let rep = modified_density(&d, n, 2).map_err(|e| e.to_string())?;
            if rep.tv_gap > rep.bound_2beta + 1e-12 {
                return Err(format!(
                    "tv gap {:.3e} above 2 beta_n = {:.3e} at n={n}",
                    rep.tv_gap, rep.bound_2beta
                ));
            }
        }
        let n1 = smallest_valid_n(d.a(), d.b(), 0.5, 2).ok_or("no n_1 below cap")?;
        for n in n1..=64 {
            if beta_n(d.a(), d.b(), n, 2) >= 0.5 * 0.5f64.powi(n as i32) {
                return Err(format!("beta_{n} above c^n/2 (n_1 = {n1})"));
            }
        }
        let bounded = model_by_name("uniform").map_err(|e| e.to_string())?;
        let bgrid =
            GridDensity::from_cdf(&bounded, 16.0, 1.0 / 256.0).map_err(|e| e.to_string())?;
        let bd = threshold_split(&bgrid, 0.5).map_err(|e| e.to_string())?;
        if !bd.is_trivial() {
            return Err("bounded density did not pass through".into());
        }
        let rep = modified_density(&bd, 6, 2).map_err(|e| e.to_string())?;
        if rep.beta_n != 0.0 || rep.tv_gap > 1e-10 {
            return Err(format!(
                "bounded passthrough: beta {} tv {}",
                rep.beta_n, rep.tv_gap
            ));
        }
        Ok(())
    });
}

#[test]
fn criterion_11_residual_probe() {
    report(11, "Theorem 1.3 residual probe", || {
        let t_grid: Vec<f64> = (0..7).map(|i| 0.5 + 0.125 * i as f64).collect();
        let gauss = model_by_name("gaussian").map_err(|e| e.to_string())?;
        let order = ExpansionOrder::new(4.0).map_err(|e| e.to_string())?;
        let rep = residual_probe(&gauss, order, &[4, 16, 64, 256], &t_grid)
            .map_err(|e| e.to_string())?;
        if let Some(&r) = rep.max_normalized.iter().find(|&&r| r > 1e-12) {
            return Err(format!("gaussian residual {r:.3e} above 1e-12"));
        }
        let uniform = model_by_name("uniform").map_err(|e| e.to_string())?;
        let n_list: Vec<u64> = (2..=8).map(|p| 1u64 << p).collect();
        let rep =
            residual_probe(&uniform, order, &n_list, &t_grid).map_err(|e| e.to_string())?;
        let half = n_list.len() / 2;
        let tail = &rep.scaled[half..];
        if let Some(w) = tail.windows(2).find(|w| w[1] > w[0] * (1.0 + 1e-9)) {
            return Err(format!(
                "scaled residual increased on the upper half: {:.6e} -> {:.6e}",
                w[0], w[1]
            ));
        }
        Ok(())
    });
}
