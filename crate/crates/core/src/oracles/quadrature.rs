//! `Z(g) = (2 pi)^{-1/2} \int exp(-x^2/2 - i sqrt(g) x^3 / 6) dx` by
//! double-exponential quadrature on the rotated ray `x = s e^{-i pi/6}`, where the
//! cubic term becomes `-sqrt(g) s^3 / 6` and the integrand decays monotonically.

use std::collections::BTreeMap;

use rug::float::Constant;
use rug::{Complex, Float, Rational};

use super::{agreement_digits, OracleResult};
use crate::error::{OdmError, Result};
use crate::precision::{cabs, decimal_digits};

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub prec: u32,
    pub target_digits: f64,
    pub max_levels: u32,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { prec: 192, target_digits: 20.0, max_levels: 12 }
    }
}

/// `6^{1/3} sqrt(2 pi) / (3 Gamma(2/3))`, the limit of `g^{1/6} Z(g)`.
pub fn z0_closed_form(prec: u32) -> Float {
    let p = prec + 16;
    let cbrt6 = Float::with_val(p, 6).cbrt();
    let two_pi = Float::with_val(p, Constant::Pi) * 2u32;
    let gamma = Float::with_val(p, Float::with_val(p, 2) / 3u32).gamma();
    let z = cbrt6 * two_pi.sqrt() / (gamma * 3u32);
    Float::with_val(prec, z)
}

pub fn z_exact(g: &Rational) -> Result<OracleResult> {
    z_exact_with(g, QuadratureOptions::default())
}

pub fn z_exact_with(g: &Rational, opts: QuadratureOptions) -> Result<OracleResult> {
    if *g <= 0 {
        return Err(OdmError::InvalidArgument("the quadrature oracle needs g > 0".into()));
    }
    let prec = opts.prec;
    let pi = Float::with_val(prec, Constant::Pi);
    let half_pi = Float::with_val(prec, &pi / 2u32);
    let sqrt_g = Float::with_val(prec, g).sqrt();
    let cubic = Float::with_val(prec, &sqrt_g / 6u32);
    // e^{-i pi/3} / 2
    let third = Float::with_val(prec, &pi / 3u32);
    let (s3, c3) = third.sin_cos(Float::new(prec));
    let quad = Complex::with_val(prec, (c3, -s3)) / 2u32;
    // length scale where the integrand has decayed
    let scale = {
        let cubic_len = Float::with_val(prec, Float::with_val(prec, 6u32) / &sqrt_g).cbrt();
        if cubic_len < 1 { cubic_len } else { Float::with_val(prec, 1) }
    };
    let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32) - 8));

    let term = |t: &Float| -> Complex {
        let sh = Float::with_val(prec, t.sinh_ref());
        let ch = Float::with_val(prec, t.cosh_ref());
        let s = Float::with_val(prec, Float::with_val(prec, &half_pi * &sh).exp() * &scale);
        let s2 = Float::with_val(prec, s.square_ref());
        let s3 = Float::with_val(prec, &s2 * &s);
        let expo = -(Complex::with_val(prec, &quad * &s2) + Float::with_val(prec, &cubic * &s3));
        let weight = Float::with_val(prec, &s * &half_pi) * ch;
        expo.exp() * weight
    };
    // truncation points where terms fall below eps
    let limit = |sign: i32| -> f64 {
        let mut t = 0.0;
        loop {
            t += 0.25;
            let v = cabs(&term(&Float::with_val(prec, sign as f64 * t)));
            if v < eps || t > 12.0 {
                return t;
            }
        }
    };
    let (t_lo, t_hi) = (limit(-1), limit(1));

    let mut h = Float::with_val(prec, 0.5);
    let mut sum = Complex::with_val(prec, 0);
    let mut j = -((t_lo / 0.5).ceil() as i64);
    while (j as f64) * 0.5 <= t_hi {
        sum += term(&Float::with_val(prec, j as f64 * 0.5));
        j += 1;
    }
    let mut estimate = Complex::with_val(prec, &sum * &h);
    let cap = decimal_digits(prec) - 4.0;
    let mut digits = 0.0;
    let mut level = 0;
    while level < opts.max_levels {
        level += 1;
        let fine = Float::with_val(prec, &h / 2u32);
        // new abscissae are the odd multiples of the finer step
        let n_lo = (t_lo / fine.to_f64()).ceil() as i64;
        let n_hi = (t_hi / fine.to_f64()).ceil() as i64;
        let mut i = -n_lo;
        if i % 2 == 0 {
            i += 1;
        }
        while i <= n_hi {
            sum += term(&Float::with_val(prec, &fine * i));
            i += 2;
        }
        h = fine;
        let next = Complex::with_val(prec, &sum * &h);
        digits = agreement_digits(&estimate, &next, cap);
        estimate = next;
        if digits >= opts.target_digits.min(cap) && level >= 3 {
            break;
        }
    }
    if digits < opts.target_digits.min(cap) {
        return Err(OdmError::AccuracyNotReached { target: opts.target_digits, achieved: digits });
    }
    // Z = sqrt(2/pi) Re(e^{-i pi/6} I)
    let sixth = Float::with_val(prec, &pi / 6u32);
    let (s6, c6) = sixth.sin_cos(Float::new(prec));
    let rotated = Complex::with_val(prec, (c6, -s6)) * estimate;
    let norm = Float::with_val(prec, Float::with_val(prec, 2u32) / &pi).sqrt();
    let z = Float::with_val(prec, rotated.real() * &norm);
    let mut params = BTreeMap::new();
    params.insert("step".to_string(), h.to_f64().to_string());
    params.insert("t_range".to_string(), format!("[{}, {}]", -t_lo, t_hi));
    params.insert("prec_bits".to_string(), prec.to_string());
    Ok(OracleResult { value: Complex::with_val(prec, (z, 0)), method: "double-exponential-quadrature", est_accuracy: digits, params })
}
