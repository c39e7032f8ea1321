//! Working-precision helpers around MPFR floats and MPC complexes.

use rug::float::Round;
use rug::ops::Pow;
use rug::{Complex, Float, Rational};

use crate::error::{OdmError, Result};

/// Default working precision in bits.
pub const DEFAULT_PREC: u32 = 512;

/// Number of decimal digits carried by `prec` bits.
pub fn decimal_digits(prec: u32) -> f64 {
    f64::from(prec) * std::f64::consts::LOG10_2
}

/// `10^-(P - lost)` where `P` is the decimal precision of `prec` bits.
pub fn digits_tolerance(prec: u32, lost: f64) -> Float {
    let exponent = -(decimal_digits(prec) - lost);
    Float::with_val(prec, 10).pow(Float::with_val(prec, exponent))
}

pub fn float(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

pub fn rational_to_float(prec: u32, q: &Rational) -> Float {
    Float::with_val(prec, q)
}

pub fn complex(prec: u32, re: f64, im: f64) -> Complex {
    Complex::with_val(prec, (re, im))
}

pub fn real_complex(x: &Float) -> Complex {
    Complex::with_val(x.prec(), (x, 0))
}

/// `|z|` as a float at the precision of `z`.
pub fn cabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

pub fn is_zero(z: &Complex) -> bool {
    z.real().is_zero() && z.imag().is_zero()
}

/// Principal branch of `z^e` for a real exponent. Returns an error at `z = 0` for `e <= 0`.
pub fn cpow_real(z: &Complex, e: &Float) -> Result<Complex> {
    if is_zero(z) {
        if e.is_sign_positive() && !e.is_zero() {
            return Ok(Complex::with_val(z.prec().0, 0));
        }
        return Err(OdmError::Domain("zero raised to a non-positive power".into()));
    }
    let ln = Complex::with_val(z.prec().0, z.ln_ref());
    Ok((ln * e).exp())
}

/// Signed decimal rendering with `digits` significant digits in positional notation
/// (scientific notation outside 1e-30..1e30).
pub fn fmt_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let (neg, mantissa, exp) = x.to_sign_string_exp_round(10, Some(digits.max(1)), Round::Nearest);
    let exp = exp.unwrap_or(0);
    let sign = if neg { "-" } else { "" };
    let body = if (-30..=30).contains(&exp) {
        if exp <= 0 {
            format!("0.{}{}", "0".repeat((-exp) as usize), mantissa)
        } else if (exp as usize) >= mantissa.len() {
            format!("{}{}", mantissa, "0".repeat(exp as usize - mantissa.len()))
        } else {
            let (a, b) = mantissa.split_at(exp as usize);
            format!("{a}.{b}")
        }
    } else {
        let (a, b) = mantissa.split_at(1);
        format!("{a}.{b}e{}", exp - 1)
    };
    format!("{sign}{body}")
}

pub fn fmt_complex(z: &Complex, digits: usize) -> String {
    let im = z.imag();
    let sign = if im.is_sign_negative() { "-" } else { "+" };
    let im_abs = Float::with_val(im.prec(), im.abs_ref());
    format!("{}{}{}i", fmt_float(z.real(), digits), sign, fmt_float(&im_abs, digits))
}

/// Parses a real number written as a decimal (`1.5`, `-2e3`) or an exact ratio (`288/49`).
pub fn parse_rational_or_decimal(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(OdmError::InvalidArgument("empty number".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_rational_or_decimal(num)?;
        let den = parse_rational_or_decimal(den)?;
        if den == 0 {
            return Err(OdmError::InvalidArgument(format!("zero denominator in `{s}`")));
        }
        return Ok(num / den);
    }
    parse_decimal_exact(s)
}

fn parse_decimal_exact(s: &str) -> Result<Rational> {
    let bad = || OdmError::InvalidArgument(format!("cannot parse `{s}` as a number"));
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all = format!("{int_part}{frac_part}");
    let int = rug::Integer::from_str_radix(if all.is_empty() { "0" } else { &all }, 10).map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = rug::Integer::from(10);
    let mut q = Rational::from(int);
    if scale >= 0 {
        q *= Rational::from(ten.pow(scale as u32));
    } else {
        q /= Rational::from(ten.pow((-scale) as u32));
    }
    if neg {
        q = -q;
    }
    Ok(q)
}

/// A coupling value as given on a command line: exact when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCoupling {
    pub re: Rational,
    pub im: Rational,
}

impl ParsedCoupling {
    pub fn to_complex(&self, prec: u32) -> Complex {
        Complex::with_val(prec, (&self.re, &self.im))
    }

    pub fn is_real(&self) -> bool {
        self.im == 0
    }
}

/// Parses `a`, `p/q`, `a+bi`, `a-bi`, `bi` or `i`.
pub fn parse_coupling(s: &str) -> Result<ParsedCoupling> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(OdmError::InvalidArgument("empty coupling".into()));
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return Ok(ParsedCoupling { re: parse_rational_or_decimal(&t)?, im: Rational::new() });
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let mut split = None;
    for idx in (1..bytes.len()).rev() {
        let c = bytes[idx];
        if (c == b'+' || c == b'-') && !matches!(bytes[idx - 1], b'e' | b'E' | b'/') {
            split = Some(idx);
            break;
        }
    }
    let (re_str, im_str) = match split {
        Some(idx) => (&body[..idx], &body[idx..]),
        None => ("", body),
    };
    let im = match im_str {
        "" | "+" => Rational::from(1),
        "-" => Rational::from(-1),
        other => parse_rational_or_decimal(other)?,
    };
    let re = if re_str.is_empty() { Rational::new() } else { parse_rational_or_decimal(re_str)? };
    Ok(ParsedCoupling { re, im })
}
