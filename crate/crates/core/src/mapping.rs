//! The order-dependent mapping `g = rho lambda / (1 - lambda)^alpha`, the
//! re-expansion of a series into `rho`-polynomials, and approximant evaluation.
//!
//! With `phi(lambda) = (1 - lambda)^{alpha beta} E(g(lambda)) = sum_l P_l(rho) lambda^l`,
//! the coefficient of `rho^m` in `P_l` is `E_m (m alpha - alpha beta)_{l-m} / (l-m)!`
//! (rising factorial), i.e. the binomial series of `(1 - lambda)^{alpha beta - m alpha}`
//! multiplying `E_m g^m`.

use rug::ops::Pow;
use rug::{Complex, Float, Rational};

use crate::error::{OdmError, Result};
use crate::poly::RationalPoly;
use crate::precision::{cabs, cpow_real, is_zero};
use crate::series::{PowerSeries, SeriesBudget};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappedSeries {
    source: PowerSeries,
    polys: Vec<RationalPoly>,
    pub alpha: Rational,
    pub beta: Rational,
}

impl MappedSeries {
    pub fn source(&self) -> &PowerSeries {
        &self.source
    }

    /// Highest order `K` with a polynomial available.
    pub fn order(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn poly(&self, l: usize) -> &RationalPoly {
        &self.polys[l]
    }

    pub fn polys(&self) -> &[RationalPoly] {
        &self.polys
    }

    pub fn action(&self) -> &Rational {
        &self.source.action
    }

    pub fn alpha_beta(&self) -> Rational {
        Rational::from(&self.alpha * &self.beta)
    }

    /// `P_0(rho), .., P_upto(rho)`.
    pub fn poly_values(&self, rho: &Complex, upto: usize) -> Vec<Complex> {
        self.polys[..=upto].iter().map(|p| p.eval_complex(rho)).collect()
    }

    fn check_order(&self, k: usize) -> Result<()> {
        if k > self.order() {
            return Err(OdmError::InvalidArgument(format!(
                "order {k} requested but the mapped series stops at {}",
                self.order()
            )));
        }
        Ok(())
    }
}

pub fn compose_mapped_series(s: &PowerSeries, k: usize) -> Result<MappedSeries> {
    compose_mapped_series_with_budget(s, k, SeriesBudget::default())
}

pub fn compose_mapped_series_with_budget(s: &PowerSeries, k: usize, budget: SeriesBudget) -> Result<MappedSeries> {
    if k > s.order() {
        return Err(OdmError::InvalidArgument(format!(
            "order {k} requested but the series stops at {}",
            s.order()
        )));
    }
    if k > budget.max_order {
        return Err(OdmError::ResourceLimit(format!("order {k} exceeds the budget of {}", budget.max_order)));
    }
    let ab = s.alpha_beta();
    // columns[m][j] = E_m (m alpha - alpha beta)_j / j!
    let mut columns: Vec<Vec<Rational>> = Vec::with_capacity(k + 1);
    for m in 0..=k {
        let shift = Rational::from(&s.alpha * Rational::from(m as u64)) - &ab;
        let mut col = Vec::with_capacity(k + 1 - m);
        let mut c = s.coeffs[m].clone();
        col.push(c.clone());
        for j in 1..=(k - m) {
            let factor = (Rational::from(&shift + Rational::from(j as u64 - 1))) / Rational::from(j as u64);
            c *= factor;
            col.push(c.clone());
        }
        if let Some(last) = col.last() {
            let bits = last.numer().significant_bits().max(last.denom().significant_bits());
            if bits > budget.max_bits {
                return Err(OdmError::ResourceLimit(format!(
                    "mapped coefficient needs {bits} bits, budget is {}",
                    budget.max_bits
                )));
            }
        }
        columns.push(col);
    }
    let polys = (0..=k)
        .map(|l| RationalPoly::new((0..=l).map(|m| columns[m][l - m].clone()).collect()))
        .collect();
    Ok(MappedSeries { source: s.clone(), polys, alpha: s.alpha.clone(), beta: s.beta.clone() })
}

/// `rho lambda (1 - lambda)^-alpha` on the principal branch.
pub fn map_g(rho: &Complex, lambda: &Complex, alpha: &Rational) -> Result<Complex> {
    let prec = rho.prec().0.max(lambda.prec().0);
    let one_minus = Complex::with_val(prec, 1) - lambda;
    if is_zero(&one_minus) {
        return Err(OdmError::Domain("the mapping is singular at lambda = 1".into()));
    }
    let pow = cpow_real(&one_minus, &Float::with_val(prec, -Rational::from(alpha)))?;
    Ok(Complex::with_val(prec, rho * lambda) * pow)
}

/// Which side of the cut a negative real coupling is approached from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `g + i0`
    Above,
    /// `g - i0`
    Below,
}

/// The branch of `lambda(g)` with `lambda(0) = 0`, continued along the straight ray from 0.
pub fn invert_map(g: &Complex, rho: &Complex, alpha: &Rational) -> Result<Complex> {
    invert_map_on_side(g, rho, alpha, None)
}

/// As [`invert_map`]; for `g` on the negative real axis, `side` selects `g +- i0`
/// and the continuation detours around the critical value of the mapping.
pub fn invert_map_on_side(g: &Complex, rho: &Complex, alpha: &Rational, side: Option<Side>) -> Result<Complex> {
    let prec = g.prec().0.max(rho.prec().0);
    if is_zero(g) {
        return Ok(Complex::with_val(prec, 0));
    }
    if is_zero(rho) {
        return Err(OdmError::Domain("rho = 0 maps every lambda to g = 0".into()));
    }
    let g = Complex::with_val(prec, g);
    let rho = Complex::with_val(prec, rho);
    let alpha_f = Float::with_val(prec, alpha);
    let on_negative_axis = g.imag().is_zero() && g.real().is_sign_negative();

    let mut waypoints = Vec::new();
    match side {
        Some(side) if on_negative_axis => {
            let sign = if side == Side::Above { 1 } else { -1 };
            let lift = Complex::with_val(prec, (0, Float::with_val(prec, g.real().abs_ref()) * sign / 4));
            waypoints.push(Complex::with_val(prec, &g + &lift));
        }
        _ => {
            if let Some(gc) = critical_value(&rho, &alpha_f) {
                if segment_passes_near(&Complex::with_val(prec, 0), &g, &gc) {
                    return Err(OdmError::BranchAmbiguity(format!(
                        "the ray from 0 to g = {} crosses the critical value g_c = {} of the mapping; pass a side",
                        g.to_string_radix(10, Some(12)),
                        gc.to_string_radix(10, Some(12))
                    )));
                }
            }
        }
    }
    waypoints.push(g.clone());
    // approach a large first waypoint by doubling so every segment is short relative to its endpoint
    let first = waypoints[0].clone();
    let mut approach = Vec::new();
    let mut w = first;
    while cabs(&w) > 1 {
        w /= 2;
        approach.push(w.clone());
    }
    approach.reverse();
    approach.append(&mut waypoints);
    let waypoints = approach;

    let mut lambda = Complex::with_val(prec, 0);
    let mut start = Complex::with_val(prec, 0);
    for target in &waypoints {
        lambda = continue_segment(&start, target, lambda, &rho, &alpha_f)?;
        start = target.clone();
    }
    Ok(lambda)
}

/// `g_c = rho lambda_c (1 - lambda_c)^-alpha` at `lambda_c = 1/(1 - alpha)`.
fn critical_value(rho: &Complex, alpha: &Float) -> Option<Complex> {
    let prec = rho.prec().0;
    let denom = Float::with_val(prec, 1 - alpha.clone());
    if denom.is_zero() {
        return None;
    }
    let lc = Float::with_val(prec, 1 / denom);
    let one_minus = Float::with_val(prec, 1 - &lc);
    let pow = one_minus.pow(Float::with_val(prec, -alpha.clone()));
    Some(Complex::with_val(prec, rho * (lc * pow)))
}

fn segment_passes_near(a: &Complex, b: &Complex, p: &Complex) -> bool {
    let (ax, ay) = (a.real().to_f64(), a.imag().to_f64());
    let (bx, by) = (b.real().to_f64(), b.imag().to_f64());
    let (px, py) = (p.real().to_f64(), p.imag().to_f64());
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0);
    let (cx, cy) = (ax + t * dx - px, ay + t * dy - py);
    let dist = (cx * cx + cy * cy).sqrt();
    dist <= 1e-9 * (px * px + py * py).sqrt()
}

/// `(f, f')` with `f(lambda) = rho lambda (1 - lambda)^-alpha - g`.
fn residual(lambda: &Complex, g: &Complex, rho: &Complex, alpha: &Float) -> Result<(Complex, Complex)> {
    let prec = lambda.prec().0;
    let one_minus = Complex::with_val(prec, 1 - lambda.clone());
    if is_zero(&one_minus) {
        return Err(OdmError::Domain("continuation reached lambda = 1".into()));
    }
    let pow = cpow_real(&one_minus, &Float::with_val(prec, -alpha.clone()))?;
    let f = Complex::with_val(prec, rho * lambda) * &pow - g;
    // f' = rho (1 - lambda)^{-alpha-1} (1 + (alpha - 1) lambda)
    let am1 = Float::with_val(prec, alpha - 1u32);
    let df = Complex::with_val(prec, rho * pow) / &one_minus * (Complex::with_val(prec, lambda * am1) + 1u32);
    Ok((f, df))
}

fn newton(
    mut lambda: Complex,
    g: &Complex,
    rho: &Complex,
    alpha: &Float,
    tol: &Float,
    max_iter: usize,
) -> Result<Option<(Complex, usize)>> {
    for it in 0..max_iter {
        let (f, df) = residual(&lambda, g, rho, alpha)?;
        if is_zero(&df) {
            return Ok(None);
        }
        let step = f / df;
        lambda -= &step;
        let scale = cabs(&lambda).max(&Float::with_val(lambda.prec().0, 1));
        if cabs(&step) <= Float::with_val(lambda.prec().0, tol * scale) {
            return Ok(Some((lambda, it + 1)));
        }
    }
    Ok(None)
}

fn continue_segment(a: &Complex, b: &Complex, mut lambda: Complex, rho: &Complex, alpha: &Float) -> Result<Complex> {
    let prec = b.prec().0;
    let coarse_tol = Float::with_val(prec, 1e-12);
    let fine_tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 6));
    let delta = Complex::with_val(prec, b - a);
    let mut t = Float::with_val(prec, 0);
    let mut h = Float::with_val(prec, 0.125);
    let min_h = Float::with_val(prec, 1e-14);
    let mut steps = 0usize;
    while t < 1 {
        steps += 1;
        if h < min_h || steps > 100_000 {
            return Err(OdmError::NonConvergence {
                context: "lambda continuation".into(),
                iterations: steps,
                last_iterate: lambda.to_string_radix(10, Some(20)),
                residual: h.to_f64(),
            });
        }
        let next_t = Float::with_val(prec, &t + &h).min(&Float::with_val(prec, 1));
        let dt = Float::with_val(prec, &next_t - &t);
        let g_next = Complex::with_val(prec, a + Complex::with_val(prec, &delta * &next_t));
        // tangent predictor
        let g_here = Complex::with_val(prec, a + Complex::with_val(prec, &delta * &t));
        let (_, df) = residual(&lambda, &g_here, rho, alpha)?;
        let predicted = Complex::with_val(prec, &lambda + Complex::with_val(prec, &delta * &dt) / df);
        match newton(predicted.clone(), &g_next, rho, alpha, &coarse_tol, 8)? {
            Some((corrected, iters)) => {
                let jump = cabs(&Complex::with_val(prec, &corrected - &lambda));
                let correction = cabs(&Complex::with_val(prec, &corrected - &predicted));
                let scale = Float::with_val(prec, cabs(&lambda).max(&Float::with_val(prec, 1e-3)));
                if correction > Float::with_val(prec, &jump * 0.2) + Float::with_val(prec, &scale * 1e-10)
                    || jump > Float::with_val(prec, &scale * 0.5) + 1e-2
                {
                    h /= 2;
                    continue;
                }
                lambda = corrected;
                t = next_t;
                if iters <= 4 {
                    h *= 1.5;
                    if h > 0.25 {
                        h = Float::with_val(prec, 0.25);
                    }
                }
            }
            None => {
                h /= 2;
            }
        }
    }
    match newton(lambda.clone(), b, rho, alpha, &fine_tol, 60)? {
        Some((polished, _)) => Ok(polished),
        None => {
            let (f, _) = residual(&lambda, b, rho, alpha)?;
            Err(OdmError::NonConvergence {
                context: "lambda polish".into(),
                iterations: 60,
                last_iterate: lambda.to_string_radix(10, Some(20)),
                residual: cabs(&f).to_f64(),
            })
        }
    }
}

/// One order-`k` evaluation of the resummed function.
#[derive(Debug, Clone)]
pub struct Approximant {
    pub order: usize,
    pub rho: Complex,
    pub g: Complex,
    pub lambda: Complex,
    pub value: Complex,
    pub err_est: Float,
}

/// `E^(k)(g) = (1 - lambda)^{-alpha beta} sum_{l <= k} P_l(rho_k) lambda^l`.
pub fn eval_approximant(m: &MappedSeries, rho_k: &Complex, k: usize, g: &Complex) -> Result<Approximant> {
    eval_approximant_on_side(m, rho_k, k, g, None)
}

pub fn eval_approximant_on_side(
    m: &MappedSeries,
    rho_k: &Complex,
    k: usize,
    g: &Complex,
    side: Option<Side>,
) -> Result<Approximant> {
    m.check_order(k)?;
    let prec = rho_k.prec().0.max(g.prec().0);
    let rho = Complex::with_val(prec, rho_k);
    let lambda = invert_map_on_side(g, &rho, &m.alpha, side)?;
    let upto = (k + 1).min(m.order());
    let values = m.poly_values(&rho, upto);
    let mut sum = Complex::with_val(prec, 0);
    let mut power = Complex::with_val(prec, 1);
    for v in values.iter().take(k + 1) {
        sum += Complex::with_val(prec, v * &power);
        power *= &lambda;
    }
    let one_minus = Complex::with_val(prec, 1 - lambda.clone());
    let prefactor = cpow_real(&one_minus, &Float::with_val(prec, -m.alpha_beta()))?;
    let value = sum * &prefactor;
    // next term if available, otherwise the last retained one
    let (tail_index, tail_power) = if k < m.order() {
        (k + 1, power)
    } else {
        (k, Complex::with_val(prec, &power / &lambda))
    };
    let err_est = if is_zero(&lambda) {
        Float::with_val(prec, 0)
    } else {
        term_magnitude(&values[tail_index], &tail_power, &one_minus, &m.alpha_beta())
    };
    Ok(Approximant { order: k, rho, g: Complex::with_val(prec, g), lambda, value, err_est })
}

fn term_magnitude(p: &Complex, lambda_power: &Complex, one_minus: &Complex, ab: &Rational) -> Float {
    let prec = p.prec().0;
    let mut mag = cabs(p) * cabs(lambda_power);
    let scale = cabs(one_minus).pow(Float::with_val(prec, -Rational::from(ab)));
    mag *= scale;
    mag
}

/// `|P_{k+1}(rho_k) lambda^{k+1}| |1 - lambda|^{-Re(alpha beta)}`.
pub fn error_estimate(m: &MappedSeries, rho_k: &Complex, k: usize, g: &Complex) -> Result<Float> {
    error_estimate_on_side(m, rho_k, k, g, None)
}

pub fn error_estimate_on_side(
    m: &MappedSeries,
    rho_k: &Complex,
    k: usize,
    g: &Complex,
    side: Option<Side>,
) -> Result<Float> {
    m.check_order(k + 1)?;
    let prec = rho_k.prec().0.max(g.prec().0);
    let rho = Complex::with_val(prec, rho_k);
    let lambda = invert_map_on_side(g, &rho, &m.alpha, side)?;
    if is_zero(&lambda) {
        return Ok(Float::with_val(prec, 0));
    }
    let p = m.poly(k + 1).eval_complex(&rho);
    let power = lambda.clone().pow(k as u32 + 1);
    let one_minus = Complex::with_val(prec, 1 - lambda);
    Ok(term_magnitude(&p, &power, &one_minus, &m.alpha_beta()))
}

/// `rho_k^{-beta} sum_{l <= k} P_l(rho_k)`: the order-`k` estimate of the leading
/// strong-coupling coefficient of `E(g) ~ eps_0 g^beta`.
pub fn strong_coupling_estimate(m: &MappedSeries, rho_k: &Complex, k: usize) -> Result<Complex> {
    m.check_order(k)?;
    let prec = rho_k.prec().0;
    let sum = m
        .poly_values(rho_k, k)
        .into_iter()
        .fold(Complex::with_val(prec, 0), |acc, v| acc + v);
    let scale = cpow_real(rho_k, &Float::with_val(prec, -m.beta.clone()))?;
    Ok(sum * scale)
}

/// Strong-coupling counterpart of [`error_estimate`]: `|P_{k+1}(rho_k)| |rho_k|^{-Re beta}`.
pub fn strong_coupling_error(m: &MappedSeries, rho_k: &Complex, k: usize) -> Result<Float> {
    m.check_order(k + 1)?;
    let prec = rho_k.prec().0;
    let p = m.poly(k + 1).eval_complex(rho_k);
    let scale = cabs(rho_k).pow(Float::with_val(prec, -m.beta.clone()));
    Ok(cabs(&p) * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::gen_ix3_integral_series;

    const PREC: u32 = 256;

    fn c(re: f64, im: f64) -> Complex {
        Complex::with_val(PREC, (re, im))
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn integral_first_polynomials() {
        let m = compose_mapped_series(&gen_ix3_integral_series(4), 4).unwrap();
        assert_eq!(m.poly(0).coeffs(), &[q(1, 1)]);
        assert_eq!(m.poly(1).coeffs(), &[q(1, 2), q(-5, 24)]);
        assert_eq!(m.poly(2).coeffs(), &[q(3, 8), q(-35, 48), q(385, 1152)]);
        for l in 0..=4 {
            assert_eq!(m.poly(l).degree(), l);
        }
    }

    #[test]
    fn rho_zero_gives_binomial_series() {
        // (1 - lambda)^{-1/2} for the integral: (1/2)_l / l!
        let m = compose_mapped_series(&gen_ix3_integral_series(6), 6).unwrap();
        let mut c = q(1, 1);
        for l in 0..=6 {
            assert_eq!(m.poly(l).eval_rational(&Rational::new()), c);
            c *= Rational::from((2 * l as i64 + 1, 2 * (l as i64 + 1)));
        }
    }

    #[test]
    fn forward_map_examples() {
        let three = q(3, 1);
        assert!(is_zero(&map_g(&c(1.0, 0.0), &c(0.0, 0.0), &three).unwrap()));
        let g = map_g(&c(2.4, 0.0), &c(0.5, 0.0), &three).unwrap();
        assert!((g.real().to_f64() - 9.6).abs() < 1e-13);
        assert!(matches!(map_g(&c(1.0, 0.0), &c(1.0, 0.0), &three), Err(OdmError::Domain(_))));
    }

    #[test]
    fn inverse_map_examples() {
        let three = q(3, 1);
        assert!(is_zero(&invert_map(&c(0.0, 0.0), &c(0.7, 0.1), &three).unwrap()));
        let l = invert_map(&c(9.6, 0.0), &c(2.4, 0.0), &three).unwrap();
        assert!((l.real().to_f64() - 0.5).abs() < 1e-14 && l.imag().to_f64().abs() < 1e-14);
    }

    #[test]
    fn negative_axis_requires_side_beyond_critical_value() {
        let five_halves = q(5, 2);
        let rho = c(0.37, 0.0);
        let g = c(-1.0, 0.0);
        assert!(matches!(invert_map(&g, &rho, &five_halves), Err(OdmError::BranchAmbiguity(_))));
        let above = invert_map_on_side(&g, &rho, &five_halves, Some(Side::Above)).unwrap();
        let below = invert_map_on_side(&g, &rho, &five_halves, Some(Side::Below)).unwrap();
        assert!((above.real().to_f64() - below.real().to_f64()).abs() < 1e-30);
        assert!((above.imag().to_f64() + below.imag().to_f64()).abs() < 1e-30);
        assert!(above.imag().to_f64().abs() > 1e-3);
        let back = map_g(&rho, &above, &five_halves).unwrap();
        assert!((back.real().to_f64() + 1.0).abs() < 1e-60_f64.max(1e-70));
        // inside the critical value the real segment is fine without a side
        let near = invert_map(&c(-0.01, 0.0), &rho, &five_halves).unwrap();
        assert!(near.imag().is_zero() || near.imag().to_f64().abs() < 1e-60);
    }

    #[test]
    fn approximant_at_zero_coupling_is_leading_coefficient() {
        let m = compose_mapped_series(&gen_ix3_integral_series(6), 6).unwrap();
        let a = eval_approximant(&m, &c(0.4, 0.1), 5, &c(0.0, 0.0)).unwrap();
        assert_eq!(a.value.real().to_f64(), 1.0);
        assert!(a.value.imag().is_zero());
        assert!(a.err_est.is_zero());
        assert!(error_estimate(&m, &c(0.4, 0.1), 5, &c(0.0, 0.0)).unwrap().is_zero());
    }

    #[test]
    fn first_strong_coupling_estimate() {
        let m = compose_mapped_series(&gen_ix3_integral_series(2), 2).unwrap();
        let est = strong_coupling_estimate(&m, &c(2.4, 0.0), 1).unwrap();
        assert!((est.real().to_f64() - 1.157_093_73).abs() < 5e-9);
        assert!(matches!(strong_coupling_estimate(&m, &c(2.4, 0.0), 3), Err(OdmError::InvalidArgument(_))));
    }
}
