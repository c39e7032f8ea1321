//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use odm_core::mapping::MappedSeries;
use rug::{Integer, Rational};

/// Gaussian rational `re + i im`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussQ {
    pub re: Rational,
    pub im: Rational,
}

impl GaussQ {
    pub fn real(x: Rational) -> Self {
        GaussQ { re: x, im: Rational::new() }
    }

    pub fn mul(&self, o: &GaussQ) -> GaussQ {
        GaussQ {
            re: Rational::from(&self.re * &o.re) - Rational::from(&self.im * &o.im),
            im: Rational::from(&self.re * &o.im) + Rational::from(&self.im * &o.re),
        }
    }
}

fn double_factorial(n: i64) -> Integer {
    let mut acc = Integer::from(1);
    let mut k = n;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    acc
}

/// Coefficients of `(2 pi)^{-1/2} \int exp(-x^2/2 - i t x^3 / 6) dx` in powers of
/// `t = sqrt(g)`, by expanding the exponential against the Gaussian moments
/// `<x^{2j}> = (2j-1)!!`. Returns the coefficients of `g^m`, asserting that odd
/// powers of `t` and all imaginary parts vanish.
pub fn moment_integral_series(k: usize) -> Vec<Rational> {
    let minus_i_sixth = GaussQ { re: Rational::new(), im: Rational::from((-1, 6)) };
    let mut power = GaussQ::real(Rational::from(1));
    let mut factorial = Integer::from(1);
    let mut out = Vec::new();
    for n in 0..=(2 * k) {
        if n > 0 {
            power = power.mul(&minus_i_sixth);
            factorial *= n as u64;
        }
        let moment = if (3 * n) % 2 == 1 { Integer::new() } else { double_factorial(3 * n as i64 - 1) };
        let term = GaussQ {
            re: Rational::from(&power.re * &moment) / &factorial,
            im: Rational::from(&power.im * &moment) / &factorial,
        };
        assert_eq!(term.im, 0, "imaginary part at t^{n}");
        if n % 2 == 1 {
            assert_eq!(term.re, 0, "odd power t^{n}");
        } else {
            out.push(term.re);
        }
    }
    out
}

/// Ground-state coefficients of `p^2/2 + x^2/2 + eta x^3` from the hypervirial
/// relations and Hellmann-Feynman, mapped to `g` through `eta^2 = -g/36`.
pub fn hypervirial_series(k: usize) -> Vec<Rational> {
    let top = 2 * k;
    // x[j][n] = coefficient of eta^j in <x^n>
    let width = top + 6;
    let mut x: Vec<Vec<Rational>> = Vec::with_capacity(top + 1);
    let mut e: Vec<Rational> = vec![Rational::from((1, 2))];
    for j in 0..=top {
        if j > 0 {
            e.push(Rational::from(&x[j - 1][3] / j as u64));
        }
        let mut row = vec![Rational::new(); width + top];
        if j == 0 {
            row[0] = Rational::from(1);
        }
        let n_max = width + top - j - 4;
        for n in 0..n_max {
            // (n+1) X_{n+1} = 2n sum_i e_i X_{n-1} - (2n+3) X_{n+2}^{(j-1)} + n(n-1)(n-2)/4 X_{n-3}
            let mut rhs = Rational::new();
            if n >= 1 {
                for i in 0..=j {
                    let lower = if i == 0 { &row[n - 1] } else { &x[j - i][n - 1] };
                    if e[i] != 0 && *lower != 0 {
                        rhs += Rational::from(&e[i] * lower) * (2 * n as u64);
                    }
                }
            }
            if j > 0 {
                rhs -= Rational::from(&x[j - 1][n + 2] * (2 * n as u64 + 3));
            }
            if n >= 3 {
                let c = (n * (n - 1) * (n - 2)) as u64;
                rhs += Rational::from(&row[n - 3] * c) / 4u32;
            }
            row[n + 1] = rhs / (n as u64 + 1);
        }
        x.push(row);
    }
    let mut out = Vec::new();
    let mut factor = Rational::from(1);
    for m in 0..=k {
        out.push(Rational::from(&e[2 * m] * &factor));
        factor *= Rational::from((-1, 36));
        if 2 * m + 1 <= top {
            assert_eq!(e[2 * m + 1], 0, "odd order {} survives", 2 * m + 1);
        }
    }
    out
}

fn mul_trunc(a: &[Rational], b: &[Rational], n: usize) -> Vec<Rational> {
    let mut out = vec![Rational::new(); n + 1];
    for (i, x) in a.iter().enumerate().take(n + 1) {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] += Rational::from(x * y);
        }
    }
    out
}

fn binomial(a: &Rational, n: usize) -> Rational {
    let mut acc = Rational::from(1);
    for i in 0..n {
        acc *= Rational::from(a - i as u64);
        acc /= (i + 1) as u64;
    }
    acc
}

/// Re-expands `(1-lambda)^{-alpha beta} sum_l P_l(rho) lambda^l` in powers of `g`
/// using the Lagrange series `[g^n] lambda = (-1)^{n-1} C(alpha n, n-1) / (n rho^n)`.
pub fn back_substitute(m: &MappedSeries, rho: &Rational, k: usize) -> Vec<Rational> {
    let alpha = &m.alpha;
    let mut lam = vec![Rational::new(); k + 1];
    for n in 1..=k {
        let an = Rational::from(alpha * n as u64);
        let mut c = binomial(&an, n - 1) / n as u64;
        let rho_n = Rational::from(rug::ops::Pow::pow(rho, n as i32));
        c /= rho_n;
        if n % 2 == 0 {
            c = -c;
        }
        lam[n] = c;
    }
    // sum_l P_l(rho) lambda^l
    let mut total = vec![Rational::new(); k + 1];
    let mut power = vec![Rational::new(); k + 1];
    power[0] = Rational::from(1);
    for l in 0..=k {
        let p = m.poly(l).eval_rational(rho);
        for (t, q) in total.iter_mut().zip(&power) {
            *t += Rational::from(&p * q);
        }
        power = mul_trunc(&power, &lam, k);
    }
    // (1 - lambda)^c = sum_j C(c, j) (-lambda)^j
    let c = -m.alpha_beta();
    let mut pre = vec![Rational::new(); k + 1];
    let neg: Vec<Rational> = lam.iter().map(|v| Rational::from(-v)).collect();
    let mut power = vec![Rational::new(); k + 1];
    power[0] = Rational::from(1);
    for j in 0..=k {
        let b = binomial(&c, j);
        for (t, q) in pre.iter_mut().zip(&power) {
            *t += Rational::from(&b * q);
        }
        power = mul_trunc(&power, &neg, k);
    }
    mul_trunc(&pre, &total, k)
}
