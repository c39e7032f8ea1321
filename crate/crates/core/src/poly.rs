//! Dense univariate polynomials with exact rational coefficients.

use rug::{Complex, Float, Rational};

/// Coefficients in ascending powers: `coeffs[i]` multiplies `x^i`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RationalPoly {
    coeffs: Vec<Rational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }

    pub fn derivative(&self) -> RationalPoly {
        if self.coeffs.len() <= 1 {
            return RationalPoly::new(vec![Rational::new()]);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| Rational::from(c * Rational::from(i as u64)))
            .collect();
        RationalPoly::new(coeffs)
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_complex(&self, x: &Complex) -> Complex {
        let prec = x.prec().0;
        let mut acc = Complex::with_val(prec, 0);
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += Float::with_val(prec, c);
        }
        acc
    }

    /// `(p(x), p'(x))` by a single Horner pass.
    pub fn eval_with_derivative(&self, x: &Complex) -> (Complex, Complex) {
        let prec = x.prec().0;
        let mut p = Complex::with_val(prec, 0);
        let mut dp = Complex::with_val(prec, 0);
        for c in self.coeffs.iter().rev() {
            dp *= x;
            dp += &p;
            p *= x;
            p += Float::with_val(prec, c);
        }
        (p, dp)
    }

    /// `sum |a_i| r^i`, the scale against which evaluation residuals are certified.
    pub fn abs_eval(&self, r: &Float) -> Float {
        let mut acc = Float::with_val(r.prec(), 0);
        for c in self.coeffs.iter().rev() {
            acc *= r;
            acc += Float::with_val(r.prec(), c).abs();
        }
        acc
    }

    pub fn to_complex_coeffs(&self, prec: u32) -> Vec<Complex> {
        self.coeffs.iter().map(|c| Complex::with_val(prec, (c, 0))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn trims_trailing_zeros() {
        let p = RationalPoly::new(vec![q(1, 1), q(2, 1), q(0, 1)]);
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn derivative_and_eval() {
        // 1/2 - 5x/24 + x^3
        let p = RationalPoly::new(vec![q(1, 2), q(-5, 24), q(0, 1), q(1, 1)]);
        let dp = p.derivative();
        assert_eq!(dp.coeffs(), &[q(-5, 24), q(0, 1), q(3, 1)]);
        assert_eq!(p.eval_rational(&q(2, 1)), q(1, 2) - q(10, 24) + q(8, 1));
        let x = Complex::with_val(128, (2, 0));
        let (v, d) = p.eval_with_derivative(&x);
        assert!((v.real().to_f64() - (0.5 - 10.0 / 24.0 + 8.0)).abs() < 1e-15);
        assert!((d.real().to_f64() - (-5.0 / 24.0 + 12.0)).abs() < 1e-15);
    }
}
