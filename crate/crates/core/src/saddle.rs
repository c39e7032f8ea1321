//! Saddle-point analysis of the mapped polynomials: the rate `sigma`, the
//! critical mapping scale, the balanced scale for models whose complex saddles
//! compete with the real one, and convergence domains in the coupling.

use rug::ops::Pow;
use rug::{Assign, Complex, Float, Rational};

use crate::error::{OdmError, Result};
use crate::precision::{cabs, cpow_real, is_zero};
use crate::roots::{complex_polynomial_roots, RootOptions};

pub const SADDLE_PREC: u32 = 256;

fn alpha_float(alpha: &Rational, prec: u32) -> Float {
    Float::with_val(prec, alpha)
}

fn check_alpha(alpha: &Rational) -> Result<()> {
    if *alpha <= 1 {
        return Err(OdmError::InvalidArgument(format!("alpha must exceed 1, got {alpha}")));
    }
    Ok(())
}

/// Left side of the saddle equation, `(1-l)^(a-1) (1 + (a-1) l) + l mu`.
pub fn saddle_residual(alpha: &Rational, mu: &Float, lambda: &Complex) -> Result<Complex> {
    let prec = lambda.prec().0;
    let a = alpha_float(alpha, prec);
    let one_minus = Complex::with_val(prec, 1 - lambda);
    let pw = cpow_real(&one_minus, &Float::with_val(prec, &a - 1u32))?;
    let lin = Complex::with_val(prec, lambda * Float::with_val(prec, &a - 1u32)) + 1u32;
    Ok(pw * lin + Complex::with_val(prec, lambda * mu))
}

/// All saddle points of `sigma` in the principal sheet, real ones first.
///
/// With `alpha = p/q` and `1 - lambda = t^q` the equation becomes the
/// polynomial `t^(p-q) (alpha + (1 - alpha) t^q) + mu (1 - t^q)`. Roots with
/// `arg t` in `(-pi/q, pi/q]` are mapped back and kept when they satisfy the
/// original equation to `1e-10`.
pub fn saddle_points(alpha: &Rational, mu: &Float) -> Result<Vec<Complex>> {
    check_alpha(alpha)?;
    if *mu <= 0 {
        return Err(OdmError::InvalidArgument("mu must be positive".into()));
    }
    let prec = mu.prec().max(SADDLE_PREC);
    let p = alpha.numer().to_usize().ok_or_else(|| OdmError::InvalidArgument("alpha numerator too large".into()))?;
    let q = alpha.denom().to_usize().ok_or_else(|| OdmError::InvalidArgument("alpha denominator too large".into()))?;
    let a = alpha_float(alpha, prec);
    let mut coeffs = vec![Complex::with_val(prec, 0); p + 1];
    coeffs[p - q] += &a;
    coeffs[p] += Float::with_val(prec, 1 - &a);
    coeffs[0] += mu;
    coeffs[q] -= mu;
    let ts = complex_polynomial_roots(&coeffs, RootOptions::new(prec))?;

    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let half_width = Float::with_val(prec, &pi / q as u32);
    let slack = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2));
    let tol = Float::with_val(prec, 1e-10);
    let mut out = Vec::new();
    for t in ts {
        let arg = Float::with_val(prec, t.arg_ref());
        let lo = Float::with_val(prec, -&half_width) + &slack;
        let hi = Float::with_val(prec, &half_width) + &slack;
        if arg <= lo || arg > hi {
            continue;
        }
        let mut lambda = Complex::with_val(prec, 1) - t.pow(q as u32);
        let scale = cabs(&lambda).max(&Float::with_val(prec, 1));
        if Float::with_val(prec, lambda.imag().abs_ref()) <= Float::with_val(prec, &slack * &scale) {
            lambda.mut_imag().assign(0);
        }
        let res = cabs(&saddle_residual(alpha, mu, &lambda)?);
        let norm = Float::with_val(prec, &scale * mu) + 1u32;
        if res / norm <= tol {
            out.push(lambda);
        }
    }
    if out.is_empty() {
        return Err(OdmError::NonConvergence {
            context: "saddle branch filtering".into(),
            iterations: 0,
            last_iterate: "no candidate satisfied the saddle equation".into(),
            residual: f64::NAN,
        });
    }
    out.sort_by(|x, y| {
        let key = |z: &Complex| (!z.imag().is_zero(), z.real().to_f64(), z.imag().to_f64());
        key(x).partial_cmp(&key(y)).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

/// The real saddle in `(1/(1-alpha), 0)`.
pub fn real_saddle(alpha: &Rational, mu: &Float) -> Result<Complex> {
    let prec = mu.prec().max(SADDLE_PREC);
    let lower = Float::with_val(prec, 1u32) / Float::with_val(prec, 1 - alpha_float(alpha, prec));
    saddle_points(alpha, mu)?
        .into_iter()
        .find(|z| z.imag().is_zero() && *z.real() < 0 && *z.real() > lower)
        .ok_or_else(|| OdmError::Domain(format!("no real negative saddle for alpha = {alpha}")))
}

/// `sigma = (1-l)^alpha / (l mu) - ln l`, principal branch.
pub fn sigma(alpha: &Rational, mu: &Float, lambda: &Complex) -> Result<Complex> {
    let prec = lambda.prec().0;
    if is_zero(lambda) || (*lambda.real() == 1 && lambda.imag().is_zero()) {
        return Err(OdmError::Domain("sigma is singular at lambda = 0 and lambda = 1".into()));
    }
    let one_minus = Complex::with_val(prec, 1 - lambda);
    let num = cpow_real(&one_minus, &alpha_float(alpha, prec))?;
    let den = Complex::with_val(prec, lambda * mu);
    Ok(num / den - Complex::with_val(prec, lambda.ln_ref()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub mu: Float,
    pub lambda: Float,
    /// Residuals of the saddle equation and of `Re sigma = 0`.
    pub residuals: (f64, f64),
}

/// The scale `mu_c` at which the real saddle has `Re sigma = 0`.
///
/// Eliminating `mu` through the saddle equation leaves
/// `h(l) = -(1-l)/(1+(alpha-1) l) - ln(-l)`, strictly increasing on
/// `(1/(1-alpha), 0)` from `-inf` to `+inf`. A coarse scan brackets the zero and
/// safeguarded Newton refines it.
pub fn critical_mu(alpha: &Rational, prec: u32) -> Result<CriticalPoint> {
    check_alpha(alpha)?;
    let a = alpha_float(alpha, prec);
    let am1 = Float::with_val(prec, &a - 1u32);
    let left = Float::with_val(prec, -1i32) / &am1;
    let h = |l: &Float| -> (Float, Float) {
        let lin = Float::with_val(prec, l * &am1) + 1u32;
        let om = Float::with_val(prec, 1 - l);
        let neg = Float::with_val(prec, -l);
        let val = -Float::with_val(prec, &om / &lin) - neg.ln();
        let der = Float::with_val(prec, &a / Float::with_val(prec, lin.square_ref())) - Float::with_val(prec, 1u32) / l;
        (val, der)
    };
    // bracket by scanning the open interval
    let n = 64u32;
    let mut lo = Float::with_val(prec, &left);
    let mut hi = Float::with_val(prec, 0);
    let mut prev: Option<(Float, bool)> = None;
    for i in 1..n {
        let l = Float::with_val(prec, &left * (n - i)) / n;
        let positive = h(&l).0.is_sign_positive();
        if let Some((pl, pp)) = &prev {
            if *pp != positive {
                lo = pl.clone();
                hi = l.clone();
                break;
            }
        }
        prev = Some((l, positive));
    }
    let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 8));
    let mut x = Float::with_val(prec, &lo + &hi) / 2u32;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let (v, d) = h(&x);
        if v.is_sign_positive() {
            hi.assign(&x);
        } else {
            lo.assign(&x);
        }
        let mut next = Float::with_val(prec, &x - Float::with_val(prec, &v / &d));
        if !(next > lo && next < hi) {
            next = Float::with_val(prec, &lo + &hi) / 2u32;
        }
        let step = Float::with_val(prec, &next - &x).abs();
        x = next;
        if step <= tol || iterations > 400 {
            break;
        }
    }
    let lin = Float::with_val(prec, &x * &am1) + 1u32;
    let om = Float::with_val(prec, 1 - &x);
    let mu = Float::with_val(prec, -om.pow(&am1) * lin) / &x;
    let lambda_c = Complex::with_val(prec, (&x, 0));
    let r1 = cabs(&saddle_residual(alpha, &mu, &lambda_c)?).to_f64();
    let r2 = sigma(alpha, &mu, &lambda_c)?.real().to_f64().abs();
    if !(r1 <= 1e-12 && r2 <= 1e-12) {
        return Err(OdmError::NonConvergence {
            context: format!("critical scale for alpha = {alpha}"),
            iterations,
            last_iterate: x.to_string(),
            residual: r1.max(r2),
        });
    }
    Ok(CriticalPoint { mu, lambda: x, residuals: (r1, r2) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalancedSaddle {
    pub mu: Float,
    /// Common modulus `|e^sigma|` of the competing contributions.
    pub rate: Float,
    pub saddles: Vec<Complex>,
}

/// Real-saddle rate minus the largest complex-saddle rate.
fn rate_gap(alpha: &Rational, mu: &Float) -> Result<Float> {
    let prec = mu.prec();
    let pts = saddle_points(alpha, mu)?;
    let real = real_saddle(alpha, mu)?;
    let s_real = sigma(alpha, mu, &real)?.real().clone();
    let mut best: Option<Float> = None;
    for z in pts.iter().filter(|z| !z.imag().is_zero()) {
        let s = sigma(alpha, mu, z)?.real().clone();
        if best.as_ref().is_none_or(|b| s > *b) {
            best = Some(s);
        }
    }
    let best = best.ok_or_else(|| OdmError::NoCrossing(format!("no complex saddles at mu = {}", mu.to_f64())))?;
    Ok(Float::with_val(prec, s_real - best))
}

/// The scale at which the real saddle and the leading complex saddles give
/// contributions of equal modulus, found on `(0, mu_c)`.
pub fn balanced_mu(alpha: &Rational, prec: u32) -> Result<BalancedSaddle> {
    let crit = critical_mu(alpha, prec)?;
    let top = crit.mu.to_f64();
    let samples = 80;
    let mut bracket = None;
    let mut prev: Option<(Float, Float)> = None;
    for i in 1..=samples {
        let mu = Float::with_val(prec, top * i as f64 / samples as f64);
        let gap = match rate_gap(alpha, &mu) {
            Ok(g) => g,
            Err(OdmError::NoCrossing(_)) => {
                prev = None;
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some((pm, pg)) = &prev {
            if pg.is_sign_negative() != gap.is_sign_negative() {
                bracket = Some((pm.clone(), mu.clone(), pg.clone()));
            }
        }
        prev = Some((mu, gap));
    }
    let (mut lo, mut hi, lo_gap) = bracket.ok_or_else(|| {
        OdmError::NoCrossing(format!("saddle moduli never equalize for alpha = {alpha} below mu_c = {top}"))
    })?;
    let lo_negative = lo_gap.is_sign_negative();
    let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 16));
    for _ in 0..(prec + 16) {
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        if rate_gap(alpha, &mid)?.is_sign_negative() == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
        if Float::with_val(prec, &hi - &lo) <= tol {
            break;
        }
    }
    let mu = Float::with_val(prec, &lo + &hi) / 2u32;
    let real = real_saddle(alpha, &mu)?;
    let rate = sigma(alpha, &mu, &real)?.real().clone().exp();
    Ok(BalancedSaddle { saddles: saddle_points(alpha, &mu)?, mu, rate })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaFactor {
    /// `Re((R/g)^(1/alpha))`.
    pub coefficient: f64,
    /// `coefficient * k^(1 - 1/alpha)`.
    pub exponent: f64,
    /// `exp(-exponent)`, the size of `|lambda^k|`.
    pub factor: f64,
}

/// Damping `|lambda^k| ~ exp(-k^(1-1/alpha) Re((R/g)^(1/alpha)))` at large order.
///
/// `arg_g` places `g` on the Riemann surface of `g^(-1/alpha)`, so it may lie
/// outside `(-pi, pi]`.
pub fn lambda_factor(g_modulus: f64, arg_g: f64, r: f64, alpha: &Rational, k: usize) -> Result<LambdaFactor> {
    if g_modulus <= 0.0 || r <= 0.0 {
        return Err(OdmError::InvalidArgument("lambda factor needs g != 0 and R > 0".into()));
    }
    let a = alpha.to_f64();
    let coefficient = (r / g_modulus).powf(1.0 / a) * (arg_g / a).cos();
    let exponent = coefficient * (k as f64).powf(1.0 - 1.0 / a);
    Ok(LambdaFactor { coefficient, exponent, factor: (-exponent).exp() })
}

/// Region where `exp(C k^(1-1/alpha)) |lambda^k|` decays, i.e.
/// `Re((R/g)^(1/alpha)) > C`, with `g = |g| e^{i arg}` on the Riemann surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceDomain {
    pub alpha: f64,
    pub r: f64,
    pub c: f64,
    /// `R |C|^-alpha`.
    pub boundary_constant: f64,
    /// `C / R^(1/alpha)`: the domain is `Re(g^(-1/alpha))` above this value.
    pub reduced_threshold: f64,
    /// For `C < 0`, every `|arg g|` below this belongs to the domain.
    pub sector_half_angle: Option<f64>,
}

impl ConvergenceDomain {
    pub fn contains(&self, g_modulus: f64, arg_g: f64) -> bool {
        if g_modulus <= 0.0 {
            return self.c < 0.0;
        }
        (self.r / g_modulus).powf(1.0 / self.alpha) * (arg_g / self.alpha).cos() > self.c
    }

    /// Modulus of the boundary at `arg_g`; `None` where the ray lies entirely inside or outside.
    pub fn boundary(&self, arg_g: f64) -> Option<f64> {
        let cos = (arg_g / self.alpha).cos();
        if self.c > 0.0 && cos > 0.0 {
            Some(self.boundary_constant * cos.powf(self.alpha))
        } else if self.c < 0.0 && cos < 0.0 {
            Some(self.boundary_constant * (-cos).powf(self.alpha))
        } else {
            None
        }
    }

    /// `(arg g, |g|)` boundary points over `|arg g| <= pi alpha`.
    pub fn boundary_samples(&self, n: usize) -> Vec<(f64, f64)> {
        let span = std::f64::consts::PI * self.alpha;
        (0..n)
            .map(|i| -span + 2.0 * span * i as f64 / (n.max(2) - 1) as f64)
            .filter_map(|t| self.boundary(t).map(|m| (t, m)))
            .collect()
    }
}

pub fn convergence_domain(alpha: &Rational, r: f64, c: f64) -> Result<ConvergenceDomain> {
    if c == 0.0 || !c.is_finite() {
        return Err(OdmError::InvalidArgument("the large-order constant C must be finite and nonzero".into()));
    }
    if r <= 0.0 {
        return Err(OdmError::InvalidArgument("R must be positive".into()));
    }
    let a = alpha.to_f64();
    Ok(ConvergenceDomain {
        alpha: a,
        r,
        c,
        boundary_constant: r * c.abs().powf(-a),
        reduced_threshold: c / r.powf(1.0 / a),
        sector_half_angle: (c < 0.0).then_some(std::f64::consts::PI * a / 2.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleReport {
    pub alpha: Rational,
    pub mu: Float,
    pub lambda_saddles: Vec<Complex>,
    /// `Re sigma` at the real saddle.
    pub sigma: Float,
    pub mu_c: Float,
    pub lambda_c: Float,
    pub domain: Option<ConvergenceDomain>,
}

/// Saddles and rate at `mu`, the critical point, and optionally the domain for `(R, C)`.
pub fn saddle_report(alpha: &Rational, mu: &Float, domain: Option<(f64, f64)>) -> Result<SaddleReport> {
    let prec = mu.prec().max(SADDLE_PREC);
    let mu = Float::with_val(prec, mu);
    let crit = critical_mu(alpha, prec)?;
    let real = real_saddle(alpha, &mu)?;
    Ok(SaddleReport {
        alpha: alpha.clone(),
        sigma: sigma(alpha, &mu, &real)?.real().clone(),
        lambda_saddles: saddle_points(alpha, &mu)?,
        mu,
        mu_c: crit.mu,
        lambda_c: crit.lambda,
        domain: domain.map(|(r, c)| convergence_domain(alpha, r, c)).transpose()?,
    })
}
