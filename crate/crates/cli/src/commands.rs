use odm_core::mapping::{
    compose_mapped_series, eval_approximant_on_side, strong_coupling_error, strong_coupling_estimate, MappedSeries,
    Side,
};
use odm_core::oracles::{pade_eval, schrodinger_e0, z_exact, OracleResult};
use odm_core::precision::{cabs, parse_coupling, parse_rational_or_decimal, ParsedCoupling};
use odm_core::rho::{
    auto_schedule, fit_schedule, reference_oscillator_fit, scan_profile, tau_of, Criterion, FitMode, FitOptions,
    RhoSchedule,
};
use odm_core::saddle::{balanced_mu, convergence_domain, critical_mu, saddle_points, sigma, real_saddle, SADDLE_PREC};
use odm_core::series::{
    gen_ix3_energy_series, gen_ix3_integral_series, load_series, series_to_json, PowerSeries, IX3_INTEGRAL, IX3_QM,
};
use rayon::prelude::*;
use rug::{Complex, Float, Rational};
use serde_json::json;

use crate::args::{
    Cli, Command, CompareCmd, CutSide, FitCmd, FitKind, Format, Model, SaddleCmd, ScanCmd, ScheduleArgs,
    ScheduleMode, SeriesCmd, SourceArgs, StrongCmd, Strategy, SumCmd,
};
use crate::output::{emit, num, parts, usage, CliResult, Table};
use crate::report;

pub fn run(cli: Cli) -> CliResult<()> {
    let prec = cli.prec;
    if prec < 64 {
        return Err(usage(format!("precision must be at least 64 bits, got {prec}")));
    }
    match cli.command {
        Command::Series(c) => series(c),
        Command::Sum(c) => sum(c, prec),
        Command::Strong(c) => strong(c, prec),
        Command::ScanRho(c) => scan(c, prec),
        Command::Saddle(c) => saddle(c, prec),
        Command::FitRho(c) => fit(c, prec),
        Command::Compare(c) => compare(c, prec),
        Command::Report(c) => report::run(c, prec),
    }
}

/// The series up to `order`, or as far as a series file goes when it stops between `min` and `order`.
fn load_source(src: &SourceArgs, order: usize, min: usize) -> CliResult<PowerSeries> {
    if min == 0 {
        return Err(usage("order must be at least 1"));
    }
    match (src.model, &src.series_file) {
        (Some(Model::Integral), _) => Ok(gen_ix3_integral_series(order)),
        (Some(Model::Oscillator), _) => Ok(gen_ix3_energy_series(0, order)?),
        (None, Some(path)) => {
            let s = load_series(path)?;
            if s.order() < min {
                return Err(usage(format!("{} stops at order {}, order {min} is needed", path.display(), s.order())));
            }
            Ok(s.truncated(order))
        }
        (None, None) => Err(usage("pass --model or --series-file")),
    }
}

fn mapped(src: &SourceArgs, order: usize, min: usize) -> CliResult<MappedSeries> {
    let s = load_source(src, order, min)?;
    let k = s.order();
    Ok(compose_mapped_series(&s, k)?)
}

fn criterion(s: Strategy) -> Criterion {
    match s {
        Strategy::ZeroOfDerivative => Criterion::ZeroOfDerivative,
        Strategy::ZeroOfP => Criterion::ZeroOfP,
        Strategy::Mixed => Criterion::Mixed,
    }
}

fn side(s: Option<CutSide>) -> Option<Side> {
    s.map(|s| match s {
        CutSide::Above => Side::Above,
        CutSide::Below => Side::Below,
    })
}

/// Default correction power of the schedule fit.
fn default_exponent(model: &str) -> Rational {
    if model == IX3_QM {
        Rational::from((2, 5))
    } else {
        Rational::from(1)
    }
}

/// Scales `rho_1..rho_k_max` chosen according to `args`.
pub fn build_schedule(m: &MappedSeries, k_max: usize, args: &ScheduleArgs, prec: u32) -> CliResult<RhoSchedule> {
    let model = m.source().model.as_str();
    let mode = args.schedule.unwrap_or(if model == IX3_QM { ScheduleMode::Fitted } else { ScheduleMode::Auto });
    let schedule = match mode {
        ScheduleMode::Auto => auto_schedule(m, k_max, criterion(args.strategy), prec)?,
        ScheduleMode::Fitted if model == IX3_QM => RhoSchedule::from_fit(model, reference_oscillator_fit(), k_max, prec),
        ScheduleMode::Fitted => {
            let auto = auto_schedule(m, k_max, criterion(args.strategy), prec)?;
            let mut opts = FitOptions::new(FitMode::FreeMu, default_exponent(model));
            opts.odd_even = true;
            opts.k_min = 10;
            let f = fit_schedule(&auto, &opts)?;
            RhoSchedule::from_fit(model, f, k_max, prec)
        }
        ScheduleMode::File => {
            let path = args.schedule_file.as_ref().ok_or_else(|| usage("--schedule file needs --schedule-file"))?;
            RhoSchedule::load(path, prec)?
        }
    };
    Ok(schedule)
}

fn rho_at(s: &RhoSchedule, k: usize, prec: u32) -> CliResult<Complex> {
    s.rho(k, prec).ok_or_else(|| usage(format!("the schedule has no scale for order {k}")))
}

fn series(c: SeriesCmd) -> CliResult<()> {
    let s = load_source(&c.source, c.order, c.order)?;
    let text = match c.output.format {
        Format::Json => series_to_json(&s) + "\n",
        Format::Csv => {
            let mut t = Table::new("series", &["k", "numerator", "denominator", "value"]);
            for (k, q) in s.coeffs.iter().enumerate() {
                let v = Float::with_val(256.max(4 * c.output.digits as u32), q);
                t.push(vec![k.to_string(), q.numer().to_string(), q.denom().to_string(), num(&v, c.output.digits)]);
            }
            t.to_csv()?
        }
    };
    emit(c.output.out.as_deref(), &text)
}

fn coupling(text: &str) -> CliResult<ParsedCoupling> {
    parse_coupling(text).map_err(|e| usage(format!("bad coupling `{text}`: {e}")))
}

fn sum(c: SumCmd, prec: u32) -> CliResult<()> {
    let m = mapped(&c.source, c.order + 1, c.order)?;
    let schedule = build_schedule(&m, c.order, &c.schedule, prec)?;
    let rho = rho_at(&schedule, c.order, prec)?;
    let gs: Vec<ParsedCoupling> = c.g.iter().map(|g| coupling(g)).collect::<CliResult<_>>()?;
    let side = side(c.side);
    let results: Vec<_> = gs
        .par_iter()
        .map(|g| eval_approximant_on_side(&m, &rho, c.order, &g.to_complex(prec), side))
        .collect();
    let d = c.output.digits;
    let mut t = Table::new(
        "sum",
        &["g_re", "g_im", "order", "rho_re", "rho_im", "lambda_re", "lambda_im", "value_re", "value_im", "err_est"],
    )
    .with_meta("model", json!(m.source().model));
    for r in results {
        let a = r?;
        let [gr, gi] = parts(&a.g, d);
        let [rr, ri] = parts(&a.rho, d);
        let [lr, li] = parts(&a.lambda, d);
        let [vr, vi] = parts(&a.value, d);
        t.push(vec![gr, gi, a.order.to_string(), rr, ri, lr, li, vr, vi, num(&a.err_est, 6)]);
    }
    emit(c.output.out.as_deref(), &t.render(c.output.format)?)
}

fn strong(c: StrongCmd, prec: u32) -> CliResult<()> {
    let m = mapped(&c.source, c.order + 1, c.order)?;
    let schedule = build_schedule(&m, c.order, &c.schedule, prec)?;
    let action = m.action().clone();
    let d = c.output.digits;
    let mut t = Table::new(
        "strong",
        &["k", "rho_re", "rho_im", "tau_re", "tau_im", "criterion", "estimate_re", "estimate_im", "err_est"],
    )
    .with_meta("model", json!(m.source().model));
    let rows: Vec<CliResult<Vec<String>>> = (1..=c.order)
        .into_par_iter()
        .map(|k| {
            let rho = rho_at(&schedule, k, prec)?;
            let tag = schedule.entries.iter().find(|e| e.k == k).map_or(Criterion::Fitted, |e| e.criterion).tag();
            let est = strong_coupling_estimate(&m, &rho, k)?;
            let err = if k < m.order() { num(&strong_coupling_error(&m, &rho, k)?, 6) } else { String::new() };
            let tau = Complex::with_val(prec, &rho * Float::with_val(prec, k as u32)) / Float::with_val(prec, &action);
            let [rr, ri] = parts(&rho, d);
            let [tr, ti] = parts(&tau, d.min(12));
            let [er, ei] = parts(&est, d);
            Ok(vec![k.to_string(), rr, ri, tr, ti, tag.to_string(), er, ei, err])
        })
        .collect();
    for r in rows {
        t.push(r?);
    }
    emit(c.output.out.as_deref(), &t.render(c.output.format)?)
}

fn scan(c: ScanCmd, prec: u32) -> CliResult<()> {
    let top = *c.order.iter().max().expect("clap requires at least one order");
    if c.order.contains(&0) {
        return Err(usage("scan orders start at 1"));
    }
    if !(c.tau_min < c.tau_max) {
        return Err(usage("--tau-min must be below --tau-max"));
    }
    let m = mapped(&c.source, top, top)?;
    let mut t = Table::new("scan-rho", &["k", "tau", "p", "dp_scaled"]).with_meta("model", json!(m.source().model));
    for &k in &c.order {
        for row in scan_profile(&m, k, c.tau_min, c.tau_max, c.samples, prec)? {
            t.push(vec![k.to_string(), row.tau.to_string(), format!("{:e}", row.p), format!("{:e}", row.dp_scaled)]);
        }
    }
    emit(c.output.out.as_deref(), &t.render(c.output.format)?)
}

fn saddle(c: SaddleCmd, prec: u32) -> CliResult<()> {
    let alpha = parse_rational_or_decimal(&c.alpha).map_err(|e| usage(format!("bad alpha `{}`: {e}", c.alpha)))?;
    let p = prec.max(SADDLE_PREC);
    let d = c.output.digits;
    let crit = critical_mu(&alpha, p)?;
    let mut t = Table::new("saddle", &["quantity", "re", "im"]).with_meta("alpha", json!(alpha.to_string()));
    t.push(vec!["mu_c".into(), num(&crit.mu, d), "0".into()]);
    t.push(vec!["lambda_c".into(), num(&crit.lambda, d), "0".into()]);
    if let Some(mu) = &c.mu {
        let mu = parse_rational_or_decimal(mu).map_err(|e| usage(format!("bad mu `{mu}`: {e}")))?;
        let mu = Float::with_val(p, &mu);
        t.push(vec!["mu".into(), num(&mu, d), "0".into()]);
        let real = real_saddle(&alpha, &mu)?;
        let s = sigma(&alpha, &mu, &real)?;
        t.push(vec!["sigma".into(), num(s.real(), d), num(s.imag(), d)]);
        for (i, z) in saddle_points(&alpha, &mu)?.iter().enumerate() {
            let [re, im] = parts(z, d);
            t.push(vec![format!("saddle_{i}"), re, im]);
        }
    }
    if c.balanced {
        let b = balanced_mu(&alpha, p)?;
        t.push(vec!["balanced_mu".into(), num(&b.mu, d), "0".into()]);
        t.push(vec!["balanced_rate".into(), num(&b.rate, d), "0".into()]);
    }
    if let (Some(r), Some(k)) = (c.radius, c.rate_constant) {
        let dom = convergence_domain(&alpha, r, k)?;
        t.push(vec!["boundary_constant".into(), dom.boundary_constant.to_string(), "0".into()]);
        t.push(vec!["reduced_threshold".into(), dom.reduced_threshold.to_string(), "0".into()]);
        if let Some(a) = dom.sector_half_angle {
            t.push(vec!["sector_half_angle".into(), a.to_string(), "0".into()]);
        }
    }
    emit(c.output.out.as_deref(), &t.render(c.output.format)?)
}

fn fit(c: FitCmd, prec: u32) -> CliResult<()> {
    let m = mapped(&c.source, c.order, c.order)?;
    let model = m.source().model.clone();
    let mut schedule = auto_schedule(&m, c.order, criterion(c.strategy), prec)?;
    let exponent = match &c.exponent {
        Some(e) => parse_rational_or_decimal(e).map_err(|err| usage(format!("bad exponent `{e}`: {err}")))?,
        None => default_exponent(&model),
    };
    let mode = match c.mode {
        FitKind::Free => FitMode::FreeMu,
        FitKind::Fixed => {
            let mu = c.mu_c.as_deref().ok_or_else(|| usage("--mode fixed needs --mu-c"))?;
            FitMode::FixedMu(parse_rational_or_decimal(mu).map_err(|e| usage(format!("bad mu_c `{mu}`: {e}")))?)
        }
    };
    let mut opts = FitOptions::new(mode, exponent);
    opts.odd_even = c.odd_even;
    opts.k_min = c.k_min;
    let f = fit_schedule(&schedule, &opts)?;
    let text = match c.format {
        Format::Json => {
            schedule.fit = Some(f);
            schedule.to_json(c.digits) + "\n"
        }
        Format::Csv => {
            let mut t = Table::new("fit-rho", &["k", "rho_re", "rho_im", "tau_re", "tau_im", "criterion", "fitted_tau"]);
            let action = m.action();
            for e in &schedule.entries {
                let [rr, ri] = parts(&e.rho, c.digits);
                t.push(vec![
                    e.k.to_string(),
                    rr,
                    ri,
                    tau_of(e.k, &e.rho, action).to_string(),
                    e.tau_im(action).to_string(),
                    e.criterion.tag().to_string(),
                    num(&f.tau_at(e.k, prec), 12),
                ]);
            }
            t.to_csv()?
        }
    };
    emit(c.out.as_deref(), &text)
}

/// `L/M` or the near-diagonal split of `order + 1` coefficients.
fn pade_degrees(degrees: Option<&str>, order: usize) -> CliResult<(usize, usize)> {
    match degrees {
        None => Ok((order.div_ceil(2), order / 2)),
        Some(s) => {
            let (l, m) = s.split_once('/').ok_or_else(|| usage(format!("--pade expects L/M, got `{s}`")))?;
            let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| usage(format!("--pade expects L/M, got `{s}`")));
            Ok((parse(l)?, parse(m)?))
        }
    }
}

fn oracle(model: &str, g: &ParsedCoupling, basis: usize) -> CliResult<Option<OracleResult>> {
    if !g.is_real() || g.re <= 0 {
        return Ok(None);
    }
    Ok(match model {
        IX3_INTEGRAL => Some(z_exact(&g.re)?),
        IX3_QM => Some(schrodinger_e0(&g.re, basis)?),
        _ => None,
    })
}

fn compare(c: CompareCmd, prec: u32) -> CliResult<()> {
    let (l, mdeg) = pade_degrees(c.pade.as_deref(), c.order)?;
    let need = c.order.max(l + mdeg);
    let m = mapped(&c.source, need + 1, need)?;
    let schedule = build_schedule(&m, c.order, &c.schedule, prec)?;
    let rho = rho_at(&schedule, c.order, prec)?;
    let model = m.source().model.clone();
    let d = c.output.digits;
    let mut t = Table::new("compare", &["g_re", "g_im", "method", "value_re", "value_im", "abs_diff", "digits"])
        .with_meta("model", json!(model));
    for text in &c.g {
        let g = coupling(text)?;
        let gz = g.to_complex(prec);
        let odm = eval_approximant_on_side(&m, &rho, c.order, &gz, None)?.value;
        let pade = pade_eval(&m.source().truncated(l + mdeg), &gz, l, mdeg)?;
        let reference = oracle(&model, &g, c.basis)?;
        let [gr, gi] = parts(&gz, d);
        let mut row = |method: &str, v: &Complex, digits: String| {
            let diff = reference.as_ref().map(|o| cabs(&Complex::with_val(prec, v - &o.value)));
            let [vr, vi] = parts(v, d);
            let diff_text = match &diff {
                Some(x) if method != "oracle" => num(x, 6),
                _ => String::new(),
            };
            let digits = if digits.is_empty() {
                match (&diff, &reference) {
                    (Some(x), Some(o)) if !x.is_zero() => format!("{:.1}", -(x.to_f64() / cabs(&o.value).to_f64()).log10()),
                    _ => String::new(),
                }
            } else {
                digits
            };
            t.push(vec![gr.clone(), gi.clone(), method.to_string(), vr, vi, diff_text, digits]);
        };
        row("odm", &odm, String::new());
        row(&format!("pade[{l}/{mdeg}]"), &pade, String::new());
        if let Some(o) = &reference {
            row("oracle", &o.value, format!("{:.1}", o.est_accuracy));
        }
    }
    emit(c.output.out.as_deref(), &t.render(c.output.format)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pade_degrees_default_to_near_diagonal() {
        assert_eq!(pade_degrees(None, 55).unwrap(), (28, 27));
        assert_eq!(pade_degrees(None, 10).unwrap(), (5, 5));
        assert_eq!(pade_degrees(Some("3/4"), 10).unwrap(), (3, 4));
        assert!(pade_degrees(Some("3"), 10).is_err());
        assert!(pade_degrees(Some("a/b"), 10).is_err());
    }

    #[test]
    fn fitted_schedule_for_the_oscillator_uses_the_reference_fit() {
        let m = compose_mapped_series(&gen_ix3_energy_series(0, 6).unwrap(), 6).unwrap();
        let args = ScheduleArgs { schedule: None, schedule_file: None, strategy: Strategy::ZeroOfDerivative };
        let s = build_schedule(&m, 5, &args, 128).unwrap();
        assert_eq!(s.rho(5, 128).unwrap(), reference_oscillator_fit().rho_at(5, 128));
    }

    #[test]
    fn file_schedule_requires_a_path() {
        let m = compose_mapped_series(&gen_ix3_integral_series(4), 4).unwrap();
        let args = ScheduleArgs { schedule: Some(ScheduleMode::File), schedule_file: None, strategy: Strategy::Mixed };
        assert_eq!(build_schedule(&m, 3, &args, 128).unwrap_err().exit_code(), 2);
    }
}
