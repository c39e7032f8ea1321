use std::fs;

use odm_core::mapping::{compose_mapped_series, eval_approximant_on_side, strong_coupling_estimate, Side};
use odm_core::oracles::{instanton_im_e0, schrodinger_e0, z0_closed_form};
use odm_core::precision::{cabs, fmt_float};
use odm_core::rho::{auto_schedule, fit_schedule, reference_oscillator_fit, Criterion, FitMode, FitOptions};
use odm_core::saddle::{balanced_mu, critical_mu, SADDLE_PREC};
use odm_core::series::{gen_ix3_energy_series, gen_ix3_integral_series};
use odm_core::OdmError;
use rug::{Complex, Float, Rational};
use serde_json::json;

use crate::args::ReportCmd;
use crate::output::{num, parts, usage, CliResult, Table};

/// Couplings of the oscillator table; negative ones are taken just above the cut.
const OSCILLATOR_COUPLINGS: [(i64, u64); 7] = [(1, 10), (1, 1), (5, 1), (288, 49), (50, 1), (-1, 2), (-1, 1)];

pub fn run(c: ReportCmd, prec: u32) -> CliResult<()> {
    if c.integral_order < 5 || c.oscillator_order < 1 {
        return Err(usage("report needs --integral-order >= 5 and --oscillator-order >= 1"));
    }
    fs::create_dir_all(&c.out)?;
    let d = c.digits;
    let mut summary = serde_json::Map::new();

    let mut crit = Table::new("critical", &["alpha", "mu_c", "lambda_c", "saddle_residual", "rate_residual"]);
    let mut crit_json = Vec::new();
    for alpha in [Rational::from((3, 2)), Rational::from(2), Rational::from((5, 2)), Rational::from(3), Rational::from(4)] {
        let p = critical_mu(&alpha, prec.max(SADDLE_PREC))?;
        crit.push(vec![
            alpha.to_string(),
            num(&p.mu, d),
            num(&p.lambda, d),
            format!("{:e}", p.residuals.0),
            format!("{:e}", p.residuals.1),
        ]);
        crit_json.push(json!({"alpha": alpha.to_string(), "mu_c": num(&p.mu, d), "lambda_c": num(&p.lambda, d)}));
    }
    fs::write(c.out.join("critical.csv"), crit.to_csv()?)?;
    summary.insert("critical".into(), json!(crit_json));
    let balanced = balanced_mu(&Rational::from(3), prec.max(SADDLE_PREC))?;
    summary.insert(
        "balanced".into(),
        json!({"alpha": "3", "mu": num(&balanced.mu, d), "rate": num(&balanced.rate, 8)}),
    );

    let k = c.integral_order;
    let z0 = z0_closed_form(prec);
    let m = compose_mapped_series(&gen_ix3_integral_series(k + 1), k + 1)?;
    let schedule = auto_schedule(&m, k, Criterion::ZeroOfDerivative, prec)?;
    let mut sched = Table::new(
        "integral-schedule",
        &["k", "tau_re", "tau_im", "criterion", "estimate", "delta", "delta_root"],
    );
    let mut low = Table::new("integral-low-orders", &["k", "rho_re", "rho_im", "estimate"]);
    let mut last_delta = 0.0;
    for e in &schedule.entries {
        let est = strong_coupling_estimate(&m, &e.rho, e.k)?;
        let delta = Float::with_val(prec, est.real() - &z0).abs();
        let root = delta.to_f64().powf(1.0 / e.k as f64);
        last_delta = delta.to_f64();
        sched.push(vec![
            e.k.to_string(),
            format!("{:.6}", e.tau(m.action())),
            format!("{:.6}", e.tau_im(m.action())),
            e.criterion.tag().to_string(),
            num(est.real(), d),
            num(&delta, 6),
            format!("{root:.6}"),
        ]);
        if e.k <= 4 {
            let [rr, ri] = parts(&e.rho, 10);
            low.push(vec![e.k.to_string(), rr, ri, num(est.real(), 12)]);
        }
    }
    fs::write(c.out.join("integral_schedule.csv"), sched.to_csv()?)?;
    fs::write(c.out.join("integral_low_orders.csv"), low.to_csv()?)?;
    let mut o = FitOptions::new(FitMode::FreeMu, Rational::from(1));
    o.odd_even = true;
    o.k_min = 10;
    let fit_json = match fit_schedule(&schedule, &o) {
        Ok(f) => json!({"mu": f.mu.to_f64(), "mu_stderr": f.mu_stderr, "c": f.c.to_f64(), "c_stderr": f.c_stderr}),
        Err(OdmError::InvalidArgument(_)) => serde_json::Value::Null,
        Err(e) => return Err(e.into()),
    };
    summary.insert(
        "integral".into(),
        json!({
            "order": k,
            "z0_closed_form": fmt_float(&z0, d),
            "estimate": sched.rows.last().map(|r| r[4].clone()),
            "delta": last_delta,
            "fit": fit_json,
        }),
    );

    let k = c.oscillator_order;
    let m = compose_mapped_series(&gen_ix3_energy_series(0, k + 1)?, k + 1)?;
    let fit = reference_oscillator_fit();
    let rho = fit.rho_at(k, prec);
    let mut energies = Table::new(
        "oscillator-energies",
        &["g", "odm_re", "odm_im", "oracle_re", "oracle_im", "oracle_method", "abs_diff"],
    );
    for (num_g, den) in OSCILLATOR_COUPLINGS {
        let g = Rational::from((num_g, den));
        let gz = Complex::with_val(prec, &g);
        let side = (g < 0).then_some(Side::Above);
        let a = eval_approximant_on_side(&m, &rho, k, &gz, side)?;
        let [vr, vi] = parts(&a.value, d);
        let row = if g > 0 {
            let o = schrodinger_e0(&g, 100)?;
            let diff = cabs(&Complex::with_val(prec, &a.value - &o.value));
            let [or, oi] = parts(&o.value, d);
            vec![g.to_string(), vr, vi, or, oi, o.method.to_string(), num(&diff, 6)]
        } else {
            let im = instanton_im_e0(&Float::with_val(prec, &g))?;
            let diff = Float::with_val(prec, Float::with_val(prec, a.value.imag().abs_ref()) - &im).abs();
            vec![g.to_string(), vr, vi, String::new(), num(&im, d), "instanton".into(), num(&diff, 6)]
        };
        energies.push(row);
    }
    fs::write(c.out.join("oscillator_energies.csv"), energies.to_csv()?)?;
    let eps0 = strong_coupling_estimate(&m, &rho, k)?;
    summary.insert(
        "oscillator".into(),
        json!({
            "order": k,
            "rho_re": num(rho.real(), d),
            "strong_coupling": num(eps0.real(), d),
            "fit": {"mu": fit.mu.to_string(), "c": fit.c.to_string(), "exponent": fit.exponent.to_string()},
        }),
    );

    summary.insert(
        "files".into(),
        json!(["critical.csv", "integral_schedule.csv", "integral_low_orders.csv", "oscillator_energies.csv"]),
    );
    let mut doc = serde_json::Map::new();
    doc.insert("kind".into(), json!("report"));
    doc.insert("precision_bits".into(), json!(prec));
    doc.extend(summary);
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(doc)).expect("json rendering is infallible");
    fs::write(c.out.join("report.json"), text + "\n")?;
    Ok(())
}
