//! Exact perturbative coefficients of the two built-in models, the JSON
//! series-exchange format, and large-order diagnostics.
//!
//! Both models are expansions in integer powers of the coupling `g` with
//! rational coefficients. The metadata carried with a series (`alpha`, `beta`,
//! the instanton action `A` and the optional large-order exponent `b`) is what
//! the order-dependent mapping needs downstream.

use std::fs;
use std::path::Path;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{OdmError, Result};

pub const IX3_INTEGRAL: &str = "ix3-integral";
pub const IX3_QM: &str = "ix3-qm";

/// Limits on exact coefficient generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesBudget {
    pub max_order: usize,
    /// Largest admissible bit length of any numerator or denominator.
    pub max_bits: u32,
}

impl Default for SeriesBudget {
    fn default() -> Self {
        SeriesBudget { max_order: 200, max_bits: 1 << 22 }
    }
}

/// Exact Taylor coefficients `E_0..E_K` of a model function together with its
/// analytic metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSeries {
    pub model: String,
    pub coeffs: Vec<Rational>,
    /// Mapping exponent in `g = rho lambda / (1 - lambda)^alpha`.
    pub alpha: Rational,
    /// Strong-coupling exponent: `E(g) ~ eps_0 g^beta`.
    pub beta: Rational,
    /// Instanton action `A` in `E_k ~ (-A)^-k Gamma(k + b + 1)`.
    pub action: Rational,
    pub b: Option<Rational>,
}

impl PowerSeries {
    /// Highest available order `K`.
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn truncated(&self, k: usize) -> PowerSeries {
        let mut s = self.clone();
        s.coeffs.truncate(k + 1);
        s
    }

    pub fn alpha_beta(&self) -> Rational {
        Rational::from(&self.alpha * &self.beta)
    }
}

/// Coefficients of `Z(g) = (2 pi)^-1/2 \int dx exp(-x^2/2 - i sqrt(g) x^3/6)`:
/// `E_m = (-1)^m (6m-1)!! / (36^m (2m)!)`, for `m = 0..=k`.
pub fn gen_ix3_integral_series(k: usize) -> PowerSeries {
    let mut coeffs = Vec::with_capacity(k + 1);
    let mut e = Rational::from(1);
    coeffs.push(e.clone());
    for m in 1..=k as u64 {
        let num = Integer::from((6 * m - 1) * (6 * m - 3)) * (6 * m - 5);
        let den = Integer::from(36 * 2 * m) * (2 * m - 1);
        e *= Rational::from((num, den));
        e = -e;
        coeffs.push(e.clone());
    }
    PowerSeries {
        model: IX3_INTEGRAL.to_string(),
        coeffs,
        alpha: Rational::from(3),
        beta: Rational::from((-1, 6)),
        action: Rational::from((2, 3)),
        b: None,
    }
}

/// Rayleigh-Schrödinger coefficients of level `level` of
/// `H = p^2/2 + x^2/2 + i sqrt(g) x^3 / 6`, orders `g^0..g^k`.
///
/// The recursion runs in `eta = i sqrt(g)/6` on the polynomial part of
/// `psi = exp(-x^2/2) sum_j eta^j P_j(x)` with `P_j` carrying no `x^level`
/// component for `j >= 1`. Odd orders in `eta` vanish identically and the even
/// ones give `E_m = e_{2m} (-1/36)^m`.
pub fn gen_ix3_energy_series(level: usize, k: usize) -> Result<PowerSeries> {
    gen_ix3_energy_series_with_budget(level, k, SeriesBudget::default())
}

pub fn gen_ix3_energy_series_with_budget(level: usize, k: usize, budget: SeriesBudget) -> Result<PowerSeries> {
    if k > budget.max_order {
        return Err(OdmError::ResourceLimit(format!(
            "requested order {k} exceeds the budget of {} orders",
            budget.max_order
        )));
    }
    let n = level;
    let eta_orders = 2 * k;
    // a[j][i]: coefficient of x^i in P_j; degree of P_j is n + 3j
    let mut a: Vec<Vec<Rational>> = Vec::with_capacity(eta_orders + 1);
    let mut e: Vec<Rational> = vec![Rational::from(n as u64) + Rational::from((1, 2))];

    // unperturbed polynomial: (L - n) P_0 = 0 with L x^i = i x^i - i(i-1)/2 x^{i-2}
    let mut p0 = vec![Rational::new(); n + 1];
    p0[n] = Rational::from(1);
    let mut i = n;
    while i >= 2 {
        // (i-2 - n) A_{i-2} = (i)(i-1)/2 A_i
        let factor = Rational::from((Integer::from(i * (i - 1)), Integer::from(2) * (Integer::from(i) - 2 - n as u64)));
        p0[i - 2] = Rational::from(&p0[i] * &factor);
        i -= 2;
    }
    a.push(p0);

    for j in 1..=eta_orders {
        let top = n + 3 * j;
        let mut aj = vec![Rational::new(); top + 1];
        // everything in the x^i equation except (i - n) A_{j,i} and e_j A_{0,i}
        let rhs = |aj: &[Rational], i: usize, e: &[Rational], a: &[Vec<Rational>]| -> Rational {
            let mut v = Rational::new();
            if let Some(up) = aj.get(i + 2) {
                v += Rational::from(up * Rational::from((((i + 2) * (i + 1)) as u64, 2u64)));
            }
            if let Some(down) = i.checked_sub(3).and_then(|idx| a[j - 1].get(idx)) {
                v -= down;
            }
            for (l, el) in e.iter().enumerate().take(j).skip(1) {
                if *el != 0 {
                    if let Some(x) = a[j - l].get(i) {
                        v += Rational::from(el * x);
                    }
                }
            }
            v
        };
        // degrees above the level, from the top down; P_j has the parity of n + j
        for i in (n + 1..=top).rev().filter(|i| (i + n + j) % 2 == 0) {
            let v = rhs(&aj, i, &e, &a);
            aj[i] = v / Rational::from((i - n) as u64);
        }
        // the x^n equation fixes e_j
        let mut ej = Rational::new();
        if let Some(down) = n.checked_sub(3).and_then(|idx| a[j - 1].get(idx)) {
            ej += down;
        }
        if let Some(up) = aj.get(n + 2) {
            ej -= Rational::from(up * Rational::from((((n + 2) * (n + 1)) as u64, 2u64)));
        }
        e.push(ej);
        // below the level the e_j A_{0,i} term enters
        for i in (0..n).rev().filter(|i| (i + n + j) % 2 == 0) {
            let v = rhs(&aj, i, &e, &a) + Rational::from(&e[j] * &a[0][i]);
            aj[i] = v / Rational::from(-((n - i) as i64));
        }
        check_budget(&e[j], budget)?;
        a.push(aj);
    }

    let mut coeffs = Vec::with_capacity(k + 1);
    let minus_inv36 = Rational::from((-1, 36));
    let mut scale = Rational::from(1);
    for m in 0..=k {
        if m > 0 && e[2 * m - 1] != 0 {
            return Err(OdmError::Domain(format!("odd eta-order coefficient e_{} does not vanish", 2 * m - 1)));
        }
        coeffs.push(Rational::from(&e[2 * m] * &scale));
        scale *= &minus_inv36;
    }
    Ok(PowerSeries {
        model: IX3_QM.to_string(),
        coeffs,
        alpha: Rational::from((5, 2)),
        beta: Rational::from((1, 5)),
        action: Rational::from((24, 5)),
        b: None,
    })
}

fn check_budget(q: &Rational, budget: SeriesBudget) -> Result<()> {
    let bits = q.numer().significant_bits().max(q.denom().significant_bits());
    if bits > budget.max_bits {
        return Err(OdmError::ResourceLimit(format!(
            "rational coefficient needs {bits} bits, budget is {}",
            budget.max_bits
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// JSON series exchange

#[derive(Serialize)]
struct SeriesFileOut<'a> {
    model: &'a str,
    alpha: [String; 2],
    beta: [String; 2],
    #[serde(rename = "A")]
    action: [String; 2],
    b: Option<[String; 2]>,
    coeffs: Vec<[String; 2]>,
}

#[derive(Deserialize)]
struct SeriesFileIn {
    model: Option<String>,
    alpha: Option<Value>,
    beta: Option<Value>,
    #[serde(rename = "A")]
    action: Option<Value>,
    #[serde(default)]
    b: Option<Value>,
    coeffs: Option<Vec<Value>>,
}

pub(crate) fn rational_pair(q: &Rational) -> [String; 2] {
    [q.numer().to_string(), q.denom().to_string()]
}

pub fn series_to_json(s: &PowerSeries) -> String {
    let out = SeriesFileOut {
        model: &s.model,
        alpha: rational_pair(&s.alpha),
        beta: rational_pair(&s.beta),
        action: rational_pair(&s.action),
        b: s.b.as_ref().map(rational_pair),
        coeffs: s.coeffs.iter().map(rational_pair).collect(),
    };
    serde_json::to_string_pretty(&out).expect("series serialization is infallible")
}

pub fn write_series(s: &PowerSeries, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, series_to_json(s) + "\n")?;
    Ok(())
}

pub fn load_series(path: impl AsRef<Path>) -> Result<PowerSeries> {
    let text = fs::read_to_string(path)?;
    parse_series_json(&text)
}

pub(crate) fn schema(field: &str, message: impl Into<String>) -> OdmError {
    OdmError::Schema { field: field.to_string(), message: message.into() }
}

fn parse_integer(v: &Value, field: &str) -> Result<Integer> {
    let text = match v {
        Value::String(s) => s.trim().to_string(),
        Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
        _ => return Err(schema(field, "expected a decimal integer string")),
    };
    Integer::from_str_radix(&text, 10).map_err(|_| schema(field, format!("`{text}` is not a decimal integer")))
}

pub(crate) fn parse_pair(v: &Value, field: &str) -> Result<Rational> {
    let arr = v.as_array().ok_or_else(|| schema(field, "expected [num, den]"))?;
    if arr.len() != 2 {
        return Err(schema(field, format!("expected 2 entries, found {}", arr.len())));
    }
    let num = parse_integer(&arr[0], field)?;
    let den = parse_integer(&arr[1], field)?;
    if den == 0 {
        return Err(schema(field, "zero denominator"));
    }
    Ok(Rational::from((num, den)))
}

pub fn parse_series_json(text: &str) -> Result<PowerSeries> {
    let raw: SeriesFileIn = serde_json::from_str(text).map_err(|e| OdmError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let model = raw.model.ok_or_else(|| schema("model", "missing"))?;
    let alpha = parse_pair(raw.alpha.as_ref().ok_or_else(|| schema("alpha", "missing"))?, "alpha")?;
    let beta = parse_pair(raw.beta.as_ref().ok_or_else(|| schema("beta", "missing"))?, "beta")?;
    let action = parse_pair(raw.action.as_ref().ok_or_else(|| schema("A", "missing"))?, "A")?;
    let b = match &raw.b {
        None | Some(Value::Null) => None,
        Some(v) => Some(parse_pair(v, "b")?),
    };
    let raw_coeffs = raw.coeffs.ok_or_else(|| schema("coeffs", "missing"))?;
    if raw_coeffs.is_empty() {
        return Err(schema("coeffs", "at least one coefficient is required"));
    }
    let coeffs = raw_coeffs
        .iter()
        .enumerate()
        .map(|(i, v)| parse_pair(v, &format!("coeffs[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerSeries { model, coeffs, alpha, beta, action, b })
}

// ---------------------------------------------------------------------------
// Large-order diagnostics

#[derive(Debug, Clone, PartialEq)]
pub struct LargeOrderReport {
    pub orders: Vec<usize>,
    /// `r_k = -A E_{k+1} / ((k + b + 1) E_k)`.
    pub ratios: Vec<f64>,
    pub b_used: Rational,
    /// Least-squares estimate of `b` (before snapping), when `b` was not supplied.
    pub b_fit: Option<f64>,
}

/// Ratio test of `E_k ~ C (-A)^-k Gamma(k + b + 1)` over `window` (inclusive).
///
/// When `b` is `None`, it is estimated by fitting `-A E_{k+1}/E_k - (k + 1) = b + d/k`
/// over the window and snapped to the nearest half-integer.
pub fn large_order_check(
    s: &PowerSeries,
    window: std::ops::RangeInclusive<usize>,
    b: Option<Rational>,
) -> Result<LargeOrderReport> {
    let (lo, hi) = (*window.start(), *window.end());
    if hi < lo || hi - lo + 1 < 5 {
        return Err(OdmError::InvalidArgument("large-order window must span at least 5 orders".into()));
    }
    if hi + 1 > s.order() {
        return Err(OdmError::InvalidArgument(format!(
            "window end {hi} needs E_{} but the series stops at order {}",
            hi + 1,
            s.order()
        )));
    }
    if let Some(k) = (lo..=hi + 1).find(|&k| s.coeffs[k] == 0) {
        return Err(OdmError::Domain(format!("E_{k} vanishes inside the ratio window")));
    }
    let scaled_ratio = |k: usize| -> Rational {
        let r = Rational::from(&s.coeffs[k + 1] / &s.coeffs[k]);
        -(r * &s.action)
    };
    let (b_used, b_fit) = match b {
        Some(b) => (b, None),
        None => {
            let xs: Vec<f64> = (lo..=hi).map(|k| 1.0 / k as f64).collect();
            let ys: Vec<f64> = (lo..=hi).map(|k| scaled_ratio(k).to_f64() - (k as f64 + 1.0)).collect();
            let (intercept, _) = linear_fit(&xs, &ys)?;
            let snapped = Rational::from(((2.0 * intercept).round() as i64, 2));
            (snapped, Some(intercept))
        }
    };
    let mut ratios = Vec::with_capacity(hi - lo + 1);
    for k in lo..=hi {
        let denom = Rational::from(k as u64 + 1) + &b_used;
        if denom == 0 {
            return Err(OdmError::Domain(format!("k + b + 1 vanishes at k = {k}")));
        }
        ratios.push(Rational::from(scaled_ratio(k) / denom).to_f64());
    }
    Ok(LargeOrderReport { orders: (lo..=hi).collect(), ratios, b_used, b_fit })
}

/// Ordinary least squares for `y = c0 + c1 x`, returning `(c0, c1)`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= f64::EPSILON * xs.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE) {
        return Err(OdmError::RankDeficient("abscissae are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((my - slope * mx, slope))
}
