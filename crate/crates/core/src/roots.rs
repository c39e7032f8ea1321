//! Simultaneous polynomial root finding at extended precision.
//!
//! Aberth-Ehrlich iteration started from Newton-polygon radii: the upper convex
//! hull of `(i, log|a_i|)` gives one circle per hull edge, populated with as many
//! starting points as the edge spans. This matters for the ODM polynomials, whose
//! coefficients span hundreds of orders of magnitude.

use rug::ops::Pow;
use rug::{Complex, Float};

use crate::error::{OdmError, Result};
use crate::poly::RationalPoly;
use crate::precision::{cabs, digits_tolerance, is_zero};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    pub prec: u32,
    pub max_iter: usize,
    /// Digits allowed to be lost in the certified residual bound.
    pub lost_digits: f64,
}

impl RootOptions {
    pub fn new(prec: u32) -> Self {
        RootOptions { prec, max_iter: 1000, lost_digits: 8.0 }
    }
}

/// All `deg p` complex roots of an exact rational polynomial.
///
/// Every root satisfies `|p(r)| / sum_i |a_i| |r|^i <= 10^-(P - 8)` at `P` decimal digits.
pub fn polynomial_roots(p: &RationalPoly, prec: u32) -> Result<Vec<Complex>> {
    if p.degree() == 0 || p.is_zero() {
        return Err(OdmError::InvalidArgument("root finding needs a polynomial of degree >= 1".into()));
    }
    complex_polynomial_roots(&p.to_complex_coeffs(prec), RootOptions::new(prec))
}

/// Roots of `sum_i coeffs[i] x^i` with complex coefficients.
pub fn complex_polynomial_roots(coeffs: &[Complex], opts: RootOptions) -> Result<Vec<Complex>> {
    let prec = opts.prec;
    let mut coeffs: Vec<Complex> = coeffs.iter().map(|c| Complex::with_val(prec, c)).collect();
    while coeffs.len() > 1 && is_zero(coeffs.last().unwrap()) {
        coeffs.pop();
    }
    if coeffs.len() < 2 {
        return Err(OdmError::InvalidArgument("root finding needs a polynomial of degree >= 1".into()));
    }
    // exact zero roots
    let zeros = coeffs.iter().take_while(|c| is_zero(c)).count();
    let reduced: Vec<Complex> = coeffs[zeros..].to_vec();
    let mut roots: Vec<Complex> = (0..zeros).map(|_| Complex::with_val(prec, 0)).collect();
    let n = reduced.len() - 1;
    if n == 0 {
        return Ok(roots);
    }
    if n == 1 {
        roots.push(-Complex::with_val(prec, &reduced[0] / &reduced[1]));
        return Ok(roots);
    }

    let abs_coeffs: Vec<Float> = reduced.iter().map(cabs).collect();
    let mut z = initial_guesses(&abs_coeffs, prec);
    let step_tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 12));
    // residuals this small are rounding noise
    let noise = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 8));
    let mut converged = vec![false; n];
    let mut iterations = 0;
    while iterations < opts.max_iter && converged.iter().any(|c| !c) {
        iterations += 1;
        for i in 0..n {
            if converged[i] {
                continue;
            }
            let (pv, dpv) = horner(&reduced, &z[i]);
            if is_zero(&pv) || cabs(&pv) <= Float::with_val(prec, &noise * abs_horner(&abs_coeffs, &cabs(&z[i]))) {
                converged[i] = true;
                continue;
            }
            let newton = Complex::with_val(prec, &pv / &dpv);
            let mut repulsion = Complex::with_val(prec, 0);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    let diff = Complex::with_val(prec, &z[i] - zj);
                    if !is_zero(&diff) {
                        repulsion += diff.recip();
                    }
                }
            }
            let denom = Complex::with_val(prec, 1) - Complex::with_val(prec, &newton * &repulsion);
            let w = if is_zero(&denom) { newton } else { newton / denom };
            z[i] -= &w;
            let scale = cabs(&z[i]).max(&Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2)));
            if cabs(&w) <= Float::with_val(prec, &step_tol * &scale) {
                converged[i] = true;
            }
        }
    }

    let bound = digits_tolerance(prec, opts.lost_digits);
    let mut worst = Float::with_val(prec, 0);
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (pv, dpv) = horner(&reduced, zi);
            if is_zero(&pv) || is_zero(&dpv) {
                break;
            }
            let step = Complex::with_val(prec, &pv / &dpv);
            if cabs(&step) <= Float::with_val(prec, &step_tol * cabs(zi)) {
                break;
            }
            *zi -= step;
        }
        let r = relative_residual(&reduced, zi);
        if r > worst {
            worst = r;
        }
    }
    if worst > bound {
        return Err(OdmError::NonConvergence {
            context: format!("Aberth iteration on a degree-{n} polynomial"),
            iterations,
            last_iterate: format!("{} roots", z.len()),
            residual: worst.to_f64(),
        });
    }
    roots.extend(z);
    Ok(roots)
}

fn horner(coeffs: &[Complex], x: &Complex) -> (Complex, Complex) {
    let prec = x.prec().0;
    let mut p = Complex::with_val(prec, 0);
    let mut dp = Complex::with_val(prec, 0);
    for c in coeffs.iter().rev() {
        dp *= x;
        dp += &p;
        p *= x;
        p += c;
    }
    (p, dp)
}

fn abs_horner(abs_coeffs: &[Float], radius: &Float) -> Float {
    let mut acc = Float::with_val(radius.prec(), 0);
    for c in abs_coeffs.iter().rev() {
        acc *= radius;
        acc += c;
    }
    acc
}

/// `|p(r)| / sum_i |a_i| |r|^i`.
pub fn relative_residual(coeffs: &[Complex], r: &Complex) -> Float {
    let (pv, _) = horner(coeffs, r);
    let abs_coeffs: Vec<Float> = coeffs.iter().map(cabs).collect();
    let scale = abs_horner(&abs_coeffs, &cabs(r));
    if scale.is_zero() {
        return cabs(&pv);
    }
    cabs(&pv) / scale
}

/// Residual certificate of a root of an exact polynomial.
pub fn certified_residual(p: &RationalPoly, r: &Complex) -> Float {
    relative_residual(&p.to_complex_coeffs(r.prec().0), r)
}

/// The residual bound `10^-(P - lost)` used by [`polynomial_roots`].
pub fn residual_bound(prec: u32, lost: f64) -> Float {
    digits_tolerance(prec, lost)
}

fn initial_guesses(abs_coeffs: &[Float], prec: u32) -> Vec<Complex> {
    let n = abs_coeffs.len() - 1;
    // log2 |a_i| for the Newton polygon; zero coefficients are left off the hull
    let logs: Vec<Option<f64>> = abs_coeffs
        .iter()
        .map(|a| if a.is_zero() { None } else { Some(Float::with_val(prec, a.log2_ref()).to_f64()) })
        .collect();
    let pts: Vec<(usize, f64)> = logs.iter().enumerate().filter_map(|(i, l)| l.map(|v| (i, v))).collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut guesses = Vec::with_capacity(n);
    let two_pi = Float::with_val(prec, rug::float::Constant::Pi) * 2u32;
    let sigma = 0.7_f64;
    for w in hull.windows(2) {
        let ((i0, l0), (i1, l1)) = (w[0], w[1]);
        let count = i1 - i0;
        let log_radius = (l0 - l1) / count as f64;
        let radius = Float::with_val(prec, 2u32).pow(Float::with_val(prec, log_radius));
        for j in 0..count {
            let angle = Float::with_val(prec, &two_pi * j as u32) / count as u32 + two_pi.clone() * (i1 as f64) / n as f64 + sigma;
            let (s, c) = angle.sin_cos(Float::new(prec));
            guesses.push(Complex::with_val(prec, (Float::with_val(prec, &radius * c), Float::with_val(prec, &radius * s))));
        }
    }
    debug_assert_eq!(guesses.len(), n);
    guesses
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn unit_quadratic() {
        let p = RationalPoly::new(vec![q(-1, 1), q(0, 1), q(1, 1)]);
        let mut r: Vec<f64> = polynomial_roots(&p, 256).unwrap().iter().map(|z| z.real().to_f64()).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((r[0] + 1.0).abs() < 1e-60 && (r[1] - 1.0).abs() < 1e-60);
    }

    #[test]
    fn linear_root() {
        let p = RationalPoly::new(vec![q(1, 2), q(-5, 24)]);
        let r = polynomial_roots(&p, 128).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].real().to_f64() - 2.4).abs() < 1e-30);
    }

    #[test]
    fn wide_dynamic_range_and_zero_roots() {
        // x^2 (x - 1e-30)(x - 1e30)(x - 3)
        let a = Rational::from(rug::Integer::from(10).pow(30));
        let b = Rational::from((1, rug::Integer::from(10).pow(30)));
        let mut p = vec![q(1, 1)];
        for r in [a.clone(), b.clone(), q(3, 1)] {
            let mut next = vec![Rational::new(); p.len() + 1];
            for (i, c) in p.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= Rational::from(c * &r);
            }
            p = next;
        }
        p.insert(0, Rational::new());
        p.insert(0, Rational::new());
        let poly = RationalPoly::new(p);
        let roots = polynomial_roots(&poly, 512).unwrap();
        assert_eq!(roots.len(), 5);
        assert_eq!(roots.iter().filter(|z| is_zero(z)).count(), 2);
        for z in &roots {
            assert!(certified_residual(&poly, z) <= residual_bound(512, 8.0));
        }
        let mut mags: Vec<f64> = roots.iter().map(|z| cabs(z).to_f64()).collect();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((mags[2] / 1e-30 - 1.0).abs() < 1e-12);
        assert!((mags[3] - 3.0).abs() < 1e-12);
        assert!((mags[4] / 1e30 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_constants() {
        assert!(polynomial_roots(&RationalPoly::new(vec![q(2, 1)]), 128).is_err());
    }
}
