//! `[L/M]` Padé approximants of a power series with exact rational coefficients.

use rug::{Complex, Rational};

use crate::error::{OdmError, Result};
use crate::poly::RationalPoly;
use crate::precision::is_zero;
use crate::series::PowerSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct PadeApproximant {
    pub numerator: RationalPoly,
    /// Normalized to a unit constant term.
    pub denominator: RationalPoly,
}

/// Solves `sum_{j=0}^{M} q_j c_{L+i-j} = 0` for `i = 1..=M` with `q_0 = 1`.
pub fn pade_coefficients(s: &PowerSeries, l: usize, m: usize) -> Result<PadeApproximant> {
    let c = &s.coeffs;
    if l + m + 1 > c.len() {
        return Err(OdmError::InvalidArgument(format!(
            "[{l}/{m}] needs {} coefficients, the series has {}",
            l + m + 1,
            c.len()
        )));
    }
    let coef = |n: i64| -> Rational { if n < 0 { Rational::new() } else { c[n as usize].clone() } };
    // augmented system for q_1..q_m
    let mut a: Vec<Vec<Rational>> = (1..=m)
        .map(|i| {
            let mut row: Vec<Rational> = (1..=m).map(|j| coef(l as i64 + i as i64 - j as i64)).collect();
            row.push(-coef(l as i64 + i as i64));
            row
        })
        .collect();
    for col in 0..m {
        let pivot = (col..m).find(|&r| a[r][col] != 0).ok_or(OdmError::SingularPade { l, m })?;
        a.swap(col, pivot);
        let inv = Rational::from(a[col][col].recip_ref());
        for v in a[col].iter_mut().skip(col) {
            *v *= &inv;
        }
        for r in 0..m {
            if r != col && a[r][col] != 0 {
                let factor = a[r][col].clone();
                for j in col..=m {
                    let sub = Rational::from(&factor * &a[col][j]);
                    a[r][j] -= sub;
                }
            }
        }
    }
    let mut q = vec![Rational::from(1)];
    q.extend(a.iter().map(|row| row[m].clone()));
    let p: Vec<Rational> = (0..=l)
        .map(|i| {
            let mut acc = Rational::new();
            for (j, qj) in q.iter().enumerate().take(i.min(m) + 1) {
                acc += Rational::from(qj * &c[i - j]);
            }
            acc
        })
        .collect();
    Ok(PadeApproximant { numerator: RationalPoly::new(p), denominator: RationalPoly::new(q) })
}

pub fn pade_eval(s: &PowerSeries, g: &Complex, l: usize, m: usize) -> Result<Complex> {
    let pa = pade_coefficients(s, l, m)?;
    let den = pa.denominator.eval_complex(g);
    if is_zero(&den) {
        return Err(OdmError::PadePole { l, m });
    }
    Ok(pa.numerator.eval_complex(g) / den)
}
