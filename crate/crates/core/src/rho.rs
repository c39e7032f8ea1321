//! Choice of the mapping parameter `rho_k` per order, profile scans, and
//! asymptotic fits of the resulting schedule.
//!
//! Orders are compared in the rescaled variable `tau = k Re(rho) / A`, which
//! stays of order one as `k` grows.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Assign, Complex, Float, Rational};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{OdmError, Result};
use crate::mapping::MappedSeries;
use crate::poly::RationalPoly;
use crate::precision::{cabs, digits_tolerance, fmt_float, parse_rational_or_decimal};
use crate::roots::{certified_residual, polynomial_roots};
use crate::series::{parse_pair, rational_pair, schema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    #[serde(rename = "zero-of-P")]
    ZeroOfP,
    #[serde(rename = "zero-of-P'")]
    ZeroOfDerivative,
    #[serde(rename = "mixed")]
    Mixed,
    #[serde(rename = "fitted")]
    Fitted,
}

impl Criterion {
    pub fn tag(self) -> &'static str {
        match self {
            Criterion::ZeroOfP => "zero-of-P",
            Criterion::ZeroOfDerivative => "zero-of-P'",
            Criterion::Mixed => "mixed",
            Criterion::Fitted => "fitted",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Criterion> {
        [Criterion::ZeroOfP, Criterion::ZeroOfDerivative, Criterion::Mixed, Criterion::Fitted]
            .into_iter()
            .find(|c| c.tag() == tag)
    }
}

/// Closed interval in `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauWindow {
    pub lo: f64,
    pub hi: f64,
}

impl TauWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(OdmError::InvalidArgument(format!("invalid tau window [{lo}, {hi}]")));
        }
        Ok(TauWindow { lo, hi })
    }

    pub fn contains(&self, tau: f64) -> bool {
        (self.lo..=self.hi).contains(&tau)
    }

    fn distance(&self, tau: f64) -> f64 {
        if tau < self.lo {
            self.lo - tau
        } else if tau > self.hi {
            tau - self.hi
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoEntry {
    pub k: usize,
    pub rho: Complex,
    pub criterion: Criterion,
    /// Every root considered for this order, after conjugate folding to `Im >= 0`.
    pub root_pool: Vec<Complex>,
}

impl RhoEntry {
    pub fn tau(&self, action: &Rational) -> f64 {
        tau_of(self.k, &self.rho, action)
    }

    pub fn tau_im(&self, action: &Rational) -> f64 {
        let a = Float::with_val(self.rho.prec().0, action);
        (Float::with_val(self.rho.prec().0, self.rho.imag() * self.k as u32) / a).to_f64()
    }
}

pub fn tau_of(k: usize, rho: &Complex, action: &Rational) -> f64 {
    let prec = rho.prec().0;
    let a = Float::with_val(prec, action);
    (Float::with_val(prec, rho.real() * k as u32) / a).to_f64()
}

/// `rho = A tau / k` as a real complex number.
pub fn rho_from_tau(k: usize, tau: &Float, action: &Rational) -> Complex {
    let prec = tau.prec();
    let r = Float::with_val(prec, tau * action) / k as u32;
    Complex::with_val(prec, (r, 0))
}

/// The polynomial whose zeros are candidates under `strategy`.
fn candidate_poly(m: &MappedSeries, k: usize, strategy: Criterion) -> Result<RationalPoly> {
    match strategy {
        Criterion::ZeroOfP => Ok(m.poly(k).clone()),
        Criterion::ZeroOfDerivative | Criterion::Mixed => Ok(m.poly(k).derivative()),
        Criterion::Fitted => Err(OdmError::InvalidArgument("fitted values come from fit_schedule, not root selection".into())),
    }
}

/// Roots folded onto the upper half plane, with imaginary parts below the
/// working accuracy set to zero. Sorted by decreasing real part, then imaginary part.
pub fn root_pool(m: &MappedSeries, k: usize, strategy: Criterion, prec: u32) -> Result<Vec<Complex>> {
    if k == 0 || k > m.order() {
        return Err(OdmError::InvalidArgument(format!("order {k} outside 1..={}", m.order())));
    }
    let p = candidate_poly(m, k, strategy)?;
    if p.degree() == 0 {
        return Err(OdmError::EmptyWindow { k, lo: f64::NEG_INFINITY, hi: f64::INFINITY, nearest: Vec::new() });
    }
    let roots = polynomial_roots(&p, prec)?;
    let tiny = digits_tolerance(prec, crate::precision::decimal_digits(prec) / 2.0);
    let mut pool: Vec<Complex> = roots
        .into_iter()
        .map(|mut z| {
            let scale = cabs(&z).max(&Float::with_val(prec, 1));
            if Float::with_val(prec, z.imag().abs_ref()) <= Float::with_val(prec, &tiny * &scale) {
                z.mut_imag().assign(0);
            } else if z.imag().is_sign_negative() {
                z = z.conj();
            }
            z
        })
        .collect();
    pool.sort_by(|a, b| {
        b.real()
            .partial_cmp(a.real())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.imag().partial_cmp(a.imag()).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(pool)
}

/// Picks `rho_k` from the zeros of `P_k` or `P'_k` whose `tau` lies in `window`.
///
/// `ZeroOfP` and `ZeroOfDerivative` take the largest real part; `Mixed` takes
/// the zero of `P'_k` where `|P_k|` is smallest relative to its coefficient scale.
pub fn select_rho(m: &MappedSeries, k: usize, strategy: Criterion, window: &TauWindow, prec: u32) -> Result<RhoEntry> {
    let pool = root_pool(m, k, strategy, prec)?;
    select_from_pool(m, k, strategy, window, pool)
}

fn select_from_pool(m: &MappedSeries, k: usize, strategy: Criterion, window: &TauWindow, pool: Vec<Complex>) -> Result<RhoEntry> {
    let action = m.action();
    let inside: Vec<&Complex> = pool
        .iter()
        .filter(|z| z.real().is_sign_positive() && !z.real().is_zero() && window.contains(tau_of(k, z, action)))
        .collect();
    let chosen = match strategy {
        Criterion::Mixed => inside
            .iter()
            .map(|z| (*z, certified_residual(m.poly(k), z)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(z, _)| z.clone()),
        // pool is already ordered by real part, then imaginary part
        _ => inside.first().map(|z| (*z).clone()),
    };
    match chosen {
        Some(rho) => Ok(RhoEntry { k, rho, criterion: strategy, root_pool: pool }),
        None => {
            let mut near: Vec<(f64, &Complex)> = pool.iter().map(|z| (window.distance(tau_of(k, z, action)), z)).collect();
            near.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            Err(OdmError::EmptyWindow {
                k,
                lo: window.lo,
                hi: window.hi,
                nearest: near.iter().take(3).map(|(_, z)| crate::precision::fmt_complex(z, 12)).collect(),
            })
        }
    }
}

/// Window used when the caller gives none: a wide bracket around the previous
/// choice for the first few orders, then the previous `tau` plus or minus 20%.
pub fn default_window(k: usize, previous: &RhoEntry, action: &Rational) -> TauWindow {
    if k <= 4 {
        let base = tau_of(k, &previous.rho, action);
        TauWindow { lo: 0.1 * base, hi: 2.0 * base }
    } else {
        let tau = previous.tau(action);
        TauWindow { lo: 0.8 * tau, hi: 1.2 * tau }
    }
}

/// Selections for orders `1..=k_max`: the zero of `P_1` at `k = 1`, then
/// `strategy` with [`default_window`] tracking. Root pools are computed in parallel.
pub fn auto_schedule(m: &MappedSeries, k_max: usize, strategy: Criterion, prec: u32) -> Result<RhoSchedule> {
    if k_max == 0 || k_max > m.order() {
        return Err(OdmError::InvalidArgument(format!("k_max {k_max} outside 1..={}", m.order())));
    }
    if strategy == Criterion::Fitted {
        return Err(OdmError::InvalidArgument("automatic schedules select zeros; use fit_schedule for fitted values".into()));
    }
    let pools: Vec<Result<Vec<Complex>>> = (1..=k_max)
        .into_par_iter()
        .map(|k| root_pool(m, k, if k == 1 { Criterion::ZeroOfP } else { strategy }, prec))
        .collect();
    let mut entries: Vec<RhoEntry> = Vec::with_capacity(k_max);
    for (idx, pool) in pools.into_iter().enumerate() {
        let k = idx + 1;
        let pool = pool?;
        let entry = if k == 1 {
            let everywhere = TauWindow { lo: f64::MIN_POSITIVE, hi: f64::INFINITY };
            select_from_pool(m, 1, Criterion::ZeroOfP, &everywhere, pool)?
        } else {
            let window = default_window(k, entries.last().expect("k = 1 entry exists"), m.action());
            select_from_pool(m, k, strategy, &window, pool)?
        };
        entries.push(entry);
    }
    Ok(RhoSchedule { model: m.source().model.clone(), action: m.action().clone(), entries, fit: None })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub tau: f64,
    pub p: f64,
    /// `A P'_k / k`, the derivative with respect to `tau`.
    pub dp_scaled: f64,
}

/// `P_k` and its `tau`-derivative on an evenly spaced real `tau` grid.
pub fn scan_profile(m: &MappedSeries, k: usize, tau_lo: f64, tau_hi: f64, samples: usize, prec: u32) -> Result<Vec<ScanRow>> {
    if samples < 2 {
        return Err(OdmError::InvalidArgument("a scan needs at least 2 samples".into()));
    }
    if k > m.order() {
        return Err(OdmError::InvalidArgument(format!("order {k} outside 0..={}", m.order())));
    }
    let action = m.action();
    let a = Float::with_val(prec, action);
    let p = m.poly(k);
    Ok((0..samples)
        .map(|i| {
            let t = tau_lo + (tau_hi - tau_lo) * i as f64 / (samples - 1) as f64;
            let rho = rho_from_tau(k.max(1), &Float::with_val(prec, t), action);
            let (v, d) = p.eval_with_derivative(&rho);
            let scaled = Float::with_val(prec, d.real() * &a) / k.max(1) as u32;
            ScanRow { tau: t, p: v.real().to_f64(), dp_scaled: scaled.to_f64() }
        })
        .collect())
}

/// Pairwise means `(x_i + x_{i-1}) / 2`.
pub fn odd_even_average(seq: &[f64]) -> Result<Vec<f64>> {
    if seq.len() < 2 {
        return Err(OdmError::InvalidArgument("odd-even averaging needs at least 2 values".into()));
    }
    Ok(seq.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum FitMode {
    FreeMu,
    FixedMu(Rational),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub mode: FitMode,
    /// Power `p` of the correction `c / k^p`.
    pub exponent: Rational,
    pub odd_even: bool,
    /// Orders below this are ignored.
    pub k_min: usize,
}

impl FitOptions {
    pub fn new(mode: FitMode, exponent: Rational) -> Self {
        FitOptions { mode, exponent, odd_even: false, k_min: 1 }
    }
}

/// `tau(k) = mu - c / k^exponent`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleFit {
    pub mu: Rational,
    pub c: Rational,
    pub exponent: Rational,
    pub action: Rational,
    pub mu_stderr: f64,
    pub c_stderr: f64,
    pub points: usize,
}

impl ScheduleFit {
    /// A schedule given by its constants, with no fit statistics.
    pub fn from_constants(mu: Rational, c: Rational, exponent: Rational, action: Rational) -> Self {
        ScheduleFit { mu, c, exponent, action, mu_stderr: 0.0, c_stderr: 0.0, points: 0 }
    }

    pub fn tau_at(&self, k: usize, prec: u32) -> Float {
        let kp = Float::with_val(prec, k as u32).pow(Float::with_val(prec, &self.exponent));
        Float::with_val(prec, &self.mu) - Float::with_val(prec, &self.c) / kp
    }

    pub fn rho_at(&self, k: usize, prec: u32) -> Complex {
        rho_from_tau(k, &self.tau_at(k, prec), &self.action)
    }

    pub fn entry(&self, k: usize, prec: u32) -> RhoEntry {
        RhoEntry { k, rho: self.rho_at(k, prec), criterion: Criterion::Fitted, root_pool: Vec::new() }
    }
}

/// Least-squares fit of `k Re(rho_k) / A` against `mu - c / k^exponent`.
pub fn fit_schedule(schedule: &RhoSchedule, opts: &FitOptions) -> Result<ScheduleFit> {
    let p = Rational::from(&opts.exponent).to_f64();
    let mut pts: Vec<(usize, f64, f64)> = schedule
        .entries
        .iter()
        .filter(|e| e.k >= opts.k_min)
        .map(|e| (e.k, (e.k as f64).powf(-p), e.tau(&schedule.action)))
        .collect();
    pts.sort_by_key(|t| t.0);
    if pts.len() < 10 {
        return Err(OdmError::InvalidArgument(format!("a schedule fit needs at least 10 entries, got {}", pts.len())));
    }
    let (mut xs, mut ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|t| (t.1, t.2)).unzip();
    if opts.odd_even {
        xs = odd_even_average(&xs)?;
        ys = odd_even_average(&ys)?;
    }
    let n = xs.len() as f64;
    let (mu, c, mu_se, c_se) = match &opts.mode {
        FitMode::FreeMu => {
            let (mu, slope) = crate::series::linear_fit(&xs, &ys)?;
            let c = -slope;
            let mx = xs.iter().sum::<f64>() / n;
            let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - (mu - c * x)).powi(2)).sum();
            let s = (ssr / (n - 2.0).max(1.0)).sqrt();
            (mu, c, s * (1.0 / n + mx * mx / sxx).sqrt(), s / sxx.sqrt())
        }
        FitMode::FixedMu(mu_c) => {
            let mu = mu_c.to_f64();
            let sxx: f64 = xs.iter().map(|x| x * x).sum();
            if sxx == 0.0 {
                return Err(OdmError::RankDeficient("correction term vanishes at every order".into()));
            }
            let c = xs.iter().zip(&ys).map(|(x, y)| x * (mu - y)).sum::<f64>() / sxx;
            let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - (mu - c * x)).powi(2)).sum();
            let s = (ssr / (n - 1.0).max(1.0)).sqrt();
            (mu, c, 0.0, s / sxx.sqrt())
        }
    };
    let mu = match &opts.mode {
        FitMode::FixedMu(mu_c) => mu_c.clone(),
        FitMode::FreeMu => Rational::from_f64(mu).ok_or_else(|| OdmError::Domain("fitted mu is not finite".into()))?,
    };
    let c = Rational::from_f64(c).ok_or_else(|| OdmError::Domain("fitted correction is not finite".into()))?;
    Ok(ScheduleFit {
        mu,
        c,
        exponent: opts.exponent.clone(),
        action: schedule.action.clone(),
        mu_stderr: mu_se,
        c_stderr: c_se,
        points: xs.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoSchedule {
    pub model: String,
    pub action: Rational,
    pub entries: Vec<RhoEntry>,
    pub fit: Option<ScheduleFit>,
}

impl RhoSchedule {
    /// Entries `1..=k_max` generated from a fit.
    pub fn from_fit(model: &str, fit: ScheduleFit, k_max: usize, prec: u32) -> Self {
        let entries = (1..=k_max).map(|k| fit.entry(k, prec)).collect();
        RhoSchedule { model: model.to_string(), action: fit.action.clone(), entries, fit: Some(fit) }
    }

    /// `rho_k` from the entry list, falling back to the fit.
    pub fn rho(&self, k: usize, prec: u32) -> Option<Complex> {
        self.entries
            .iter()
            .find(|e| e.k == k)
            .map(|e| Complex::with_val(prec, &e.rho))
            .or_else(|| self.fit.as_ref().map(|f| f.rho_at(k, prec)))
    }

    pub fn to_json(&self, digits: usize) -> String {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|e| {
                json!({
                    "k": e.k,
                    "rho": [fmt_float(e.rho.real(), digits), fmt_float(e.rho.imag(), digits)],
                    "criterion": e.criterion.tag(),
                })
            })
            .collect();
        let fit = self.fit.as_ref().map(|f| {
            json!({
                "mu": rational_pair(&f.mu),
                "c": rational_pair(&f.c),
                "exponent": rational_pair(&f.exponent),
                "mu_stderr": f.mu_stderr,
                "c_stderr": f.c_stderr,
            })
        });
        let doc = json!({
            "model": self.model,
            "A": rational_pair(&self.action),
            "entries": entries,
            "fit": fit,
        });
        serde_json::to_string_pretty(&doc).expect("schedule serialization is infallible")
    }

    pub fn parse_json(text: &str, prec: u32) -> Result<RhoSchedule> {
        let doc: Value = serde_json::from_str(text).map_err(|e| OdmError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let model = doc.get("model").and_then(Value::as_str).ok_or_else(|| schema("model", "missing"))?.to_string();
        let action = parse_pair(doc.get("A").ok_or_else(|| schema("A", "missing"))?, "A")?;
        let raw = doc.get("entries").and_then(Value::as_array).ok_or_else(|| schema("entries", "expected an array"))?;
        let mut entries = Vec::with_capacity(raw.len());
        for (i, e) in raw.iter().enumerate() {
            let field = |name: &str| format!("entries[{i}].{name}");
            let k = e.get("k").and_then(Value::as_u64).ok_or_else(|| schema(&field("k"), "expected a positive integer"))? as usize;
            let pair = e.get("rho").and_then(Value::as_array).filter(|a| a.len() == 2);
            let pair = pair.ok_or_else(|| schema(&field("rho"), "expected [re, im] decimal strings"))?;
            let part = |v: &Value| -> Result<Rational> {
                let s = v.as_str().ok_or_else(|| schema(&field("rho"), "expected decimal strings"))?;
                parse_rational_or_decimal(s).map_err(|_| schema(&field("rho"), format!("`{s}` is not a decimal")))
            };
            let rho = Complex::with_val(prec, (part(&pair[0])?, part(&pair[1])?));
            let tag = e.get("criterion").and_then(Value::as_str).ok_or_else(|| schema(&field("criterion"), "missing"))?;
            let criterion = Criterion::from_tag(tag).ok_or_else(|| schema(&field("criterion"), format!("unknown criterion `{tag}`")))?;
            entries.push(RhoEntry { k, rho, criterion, root_pool: Vec::new() });
        }
        let fit = match doc.get("fit") {
            None | Some(Value::Null) => None,
            Some(f) => Some(ScheduleFit {
                mu: parse_pair(f.get("mu").ok_or_else(|| schema("fit.mu", "missing"))?, "fit.mu")?,
                c: parse_pair(f.get("c").ok_or_else(|| schema("fit.c", "missing"))?, "fit.c")?,
                exponent: parse_pair(f.get("exponent").ok_or_else(|| schema("fit.exponent", "missing"))?, "fit.exponent")?,
                action: action.clone(),
                mu_stderr: f.get("mu_stderr").and_then(Value::as_f64).unwrap_or(0.0),
                c_stderr: f.get("c_stderr").and_then(Value::as_f64).unwrap_or(0.0),
                points: 0,
            }),
        };
        Ok(RhoSchedule { model, action, entries, fit })
    }

    pub fn write(&self, path: impl AsRef<Path>, digits: usize) -> Result<()> {
        fs::write(path, self.to_json(digits) + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, prec: u32) -> Result<RhoSchedule> {
        RhoSchedule::parse_json(&fs::read_to_string(path)?, prec)
    }
}

/// The oscillator schedule `tau = 4.895690188 - 3.02 / k^(2/5)`.
pub fn reference_oscillator_fit() -> ScheduleFit {
    ScheduleFit::from_constants(
        parse_rational_or_decimal("4.895690188").expect("literal"),
        parse_rational_or_decimal("3.02").expect("literal"),
        Rational::from((2, 5)),
        Rational::from((24, 5)),
    )
}
