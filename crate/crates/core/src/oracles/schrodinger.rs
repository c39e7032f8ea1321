//! Ground state of `H = p^2/2 + x^2/2 + i sqrt(g) x^3 / 6` in a truncated
//! harmonic-oscillator basis of frequency `omega`.
//!
//! The matrix is complex symmetric with half-bandwidth 3. The level is followed
//! from `g = 0` by stepping `sqrt(g)` and refining with Rayleigh quotient
//! iteration (bilinear quotient `v^T H v / v^T v`, banded LU with partial pivoting).

use std::collections::BTreeMap;

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Rational};

use super::{agreement_digits, OracleResult};
use crate::error::{OdmError, Result};
use crate::precision::{cabs, decimal_digits, is_zero};

const BAND: usize = 3;

#[derive(Debug, Clone, Copy)]
pub struct SchrodingerOptions {
    pub prec: u32,
    pub basis_size: usize,
    /// Basis frequency; `None` picks `1 + sqrt(g) / 2`.
    pub omega: Option<f64>,
    /// Continuation step in `sqrt(g)`.
    pub step: f64,
}

impl SchrodingerOptions {
    pub fn new(basis_size: usize) -> Self {
        SchrodingerOptions { prec: 192, basis_size, omega: None, step: 0.1 }
    }
}

/// Diagonals `0..=3` of the symmetric band.
struct BandMatrix {
    diags: [Vec<Complex>; BAND + 1],
}

impl BandMatrix {
    fn hamiltonian(n: usize, g: &Float, omega: &Float) -> BandMatrix {
        let prec = g.prec();
        let quarter_w = Float::with_val(prec, omega / 4u32);
        let quarter_inv = Float::with_val(prec, Float::with_val(prec, 4u32) * omega).recip();
        let kappa = Float::with_val(prec, g.sqrt_ref()) / 6u32;
        // x^3 = (2 omega)^{-3/2} (a + a^dagger)^3
        let x3 = Float::with_val(prec, Float::with_val(prec, omega * 2u32).pow(Float::with_val(prec, -1.5))) * kappa;
        let sq = |v: u64| Float::with_val(prec, v).sqrt();
        let mut diags: [Vec<Complex>; BAND + 1] = Default::default();
        diags[0] = (0..n)
            .map(|i| {
                let f = Float::with_val(prec, 2 * i as u64 + 1) * Float::with_val(prec, &quarter_w + &quarter_inv);
                Complex::with_val(prec, (f, 0))
            })
            .collect();
        diags[1] = (0..n.saturating_sub(1))
            .map(|i| {
                let k = i as u64 + 1;
                let im = sq(k) * Float::with_val(prec, k) * 3u32 * &x3;
                Complex::with_val(prec, (0, im))
            })
            .collect();
        diags[2] = (0..n.saturating_sub(2))
            .map(|i| {
                let k = i as u64;
                let f = sq((k + 1) * (k + 2)) * Float::with_val(prec, &quarter_inv - &quarter_w);
                Complex::with_val(prec, (f, 0))
            })
            .collect();
        diags[3] = (0..n.saturating_sub(3))
            .map(|i| {
                let k = i as u64;
                let im = sq((k + 1) * (k + 2) * (k + 3)) * &x3;
                Complex::with_val(prec, (0, im))
            })
            .collect();
        BandMatrix { diags }
    }

    fn size(&self) -> usize {
        self.diags[0].len()
    }

    fn get(&self, i: usize, j: usize) -> Option<&Complex> {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        self.diags.get(hi - lo).and_then(|d| d.get(lo))
    }

    fn mul(&self, v: &[Complex]) -> Vec<Complex> {
        let n = self.size();
        let prec = v[0].prec().0;
        (0..n)
            .map(|i| {
                let mut acc = Complex::with_val(prec, 0);
                for j in i.saturating_sub(BAND)..(i + BAND + 1).min(n) {
                    if let Some(a) = self.get(i, j) {
                        acc += Complex::with_val(prec, a * &v[j]);
                    }
                }
                acc
            })
            .collect()
    }

    /// Solves `(H - shift) x = b` by banded Gaussian elimination with partial pivoting.
    fn solve_shifted(&self, shift: &Complex, b: &[Complex]) -> Vec<Complex> {
        let n = self.size();
        let prec = shift.prec().0;
        // each row is (first column, dense values)
        let mut rows: Vec<(usize, Vec<Complex>)> = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(BAND);
                let hi = (i + BAND + 1).min(n);
                let vals = (lo..hi)
                    .map(|j| {
                        let mut a = Complex::with_val(prec, self.get(i, j).expect("inside band"));
                        if i == j {
                            a -= shift;
                        }
                        a
                    })
                    .collect();
                (lo, vals)
            })
            .collect();
        let mut rhs: Vec<Complex> = b.iter().map(|x| Complex::with_val(prec, x)).collect();
        let at = |row: &(usize, Vec<Complex>), j: usize| -> Option<Complex> {
            if j < row.0 {
                None
            } else {
                row.1.get(j - row.0).cloned()
            }
        };
        let tiny = Float::with_val(prec, Float::i_exp(1, -(prec as i32)));
        for i in 0..n {
            let last = (i + BAND + 1).min(n);
            let mut best = i;
            let mut best_abs = Float::with_val(prec, -1);
            for r in i..last {
                if let Some(v) = at(&rows[r], i) {
                    let a = cabs(&v);
                    if a > best_abs {
                        best_abs = a;
                        best = r;
                    }
                }
            }
            rows.swap(i, best);
            rhs.swap(i, best);
            let mut pivot = at(&rows[i], i).unwrap_or_else(|| Complex::with_val(prec, 0));
            if is_zero(&pivot) {
                pivot = Complex::with_val(prec, (&tiny, 0));
                let off = i - rows[i].0;
                rows[i].1[off] = pivot.clone();
            }
            let (head, tail) = rows.split_at_mut(i + 1);
            let prow = &head[i];
            for (r_off, row) in tail.iter_mut().take(last - i - 1).enumerate() {
                let Some(v) = at(row, i) else { continue };
                if is_zero(&v) {
                    continue;
                }
                let m = Complex::with_val(prec, &v / &pivot);
                let end = prow.0 + prow.1.len();
                let row_end = row.0 + row.1.len();
                if end > row_end {
                    row.1.extend((row_end..end).map(|_| Complex::with_val(prec, 0)));
                }
                for j in (i + 1)..end {
                    let pv = &prow.1[j - prow.0];
                    row.1[j - row.0] -= Complex::with_val(prec, &m * pv);
                }
                // drop the eliminated leading entries
                let drop = i + 1 - row.0;
                row.1.drain(..drop);
                row.0 = i + 1;
                let delta = Complex::with_val(prec, &m * &rhs[i]);
                rhs[i + 1 + r_off] -= delta;
            }
        }
        let mut x: Vec<Complex> = (0..n).map(|_| Complex::with_val(prec, 0)).collect();
        for i in (0..n).rev() {
            let (start, vals) = &rows[i];
            let mut acc = Complex::with_val(prec, &rhs[i]);
            for (off, a) in vals.iter().enumerate() {
                let j = start + off;
                if j > i {
                    acc -= Complex::with_val(prec, a * &x[j]);
                }
            }
            x[i] = acc / &vals[i - start];
        }
        x
    }
}

fn bilinear(a: &[Complex], b: &[Complex]) -> Complex {
    let prec = a[0].prec().0;
    let mut acc = Complex::with_val(prec, 0);
    for (x, y) in a.iter().zip(b) {
        acc += Complex::with_val(prec, x * y);
    }
    acc
}

fn norm2(v: &[Complex]) -> Float {
    let prec = v[0].prec().0;
    let mut acc = Float::with_val(prec, 0);
    for x in v {
        acc += Float::with_val(prec, x.norm_ref());
    }
    acc.sqrt()
}

/// `|<a, b>| / (|a| |b|)` with the Hermitian product.
fn overlap(a: &[Complex], b: &[Complex]) -> f64 {
    let prec = a[0].prec().0;
    let mut acc = Complex::with_val(prec, 0);
    for (x, y) in a.iter().zip(b) {
        acc += Complex::with_val(prec, x.conj_ref()) * y;
    }
    (cabs(&acc) / norm2(a) / norm2(b)).to_f64()
}

fn rayleigh(h: &BandMatrix, mut sigma: Complex, mut v: Vec<Complex>, g: f64) -> Result<(Complex, Vec<Complex>)> {
    let prec = sigma.prec().0;
    let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 12));
    for it in 0..60 {
        let y = h.solve_shifted(&sigma, &v);
        let nrm = norm2(&y);
        v = y.into_iter().map(|x| x / &nrm).collect();
        let hv = h.mul(&v);
        let next = bilinear(&v, &hv) / bilinear(&v, &v);
        let change = cabs(&Complex::with_val(prec, &next - &sigma));
        sigma = next;
        if it > 0 && change <= Float::with_val(prec, &tol * cabs(&sigma)) {
            return Ok((sigma, v));
        }
    }
    Err(OdmError::NonConvergence {
        context: format!("Rayleigh quotient iteration at g = {g}"),
        iterations: 60,
        last_iterate: crate::precision::fmt_complex(&sigma, 20),
        residual: f64::NAN,
    })
}

/// Ground-state energy in a basis of `opts.basis_size` states.
fn ground_state(g: &Rational, opts: &SchrodingerOptions) -> Result<Complex> {
    let prec = opts.prec;
    let n = opts.basis_size;
    let target = Float::with_val(prec, g).sqrt();
    let omega = Float::with_val(prec, opts.omega.unwrap_or(1.0 + target.to_f64() / 2.0));
    let steps = ((target.to_f64() / opts.step).ceil() as usize).max(1);
    let h0 = BandMatrix::hamiltonian(n, &Float::with_val(prec, 0), &omega);
    let mut v: Vec<Complex> = (0..n).map(|i| Complex::with_val(prec, if i == 0 { 1 } else { 0 })).collect();
    let (mut sigma, vec0) = rayleigh(&h0, Complex::with_val(prec, h0.get(0, 0).unwrap()), v, 0.0)?;
    v = vec0;
    for s in 1..=steps {
        let root_g = Float::with_val(prec, &target * s as u32) / steps as u32;
        let gs = Float::with_val(prec, root_g.square_ref());
        let h = BandMatrix::hamiltonian(n, &gs, &omega);
        let (next_sigma, next_v) = rayleigh(&h, sigma, v.clone(), gs.to_f64())?;
        let ov = overlap(&v, &next_v);
        if ov < 0.5 {
            return Err(OdmError::TrackingAmbiguity { g: gs.to_f64(), overlap: ov });
        }
        sigma = next_sigma;
        v = next_v;
    }
    Ok(sigma)
}

pub fn schrodinger_e0(g: &Rational, basis_size: usize) -> Result<OracleResult> {
    schrodinger_e0_with(g, SchrodingerOptions::new(basis_size))
}

/// Ground state at `basis_size` and `2 basis_size`; the accuracy estimate is
/// their agreement and the value is the larger-basis one.
pub fn schrodinger_e0_with(g: &Rational, opts: SchrodingerOptions) -> Result<OracleResult> {
    if *g <= 0 {
        return Err(OdmError::InvalidArgument("the Schrodinger oracle needs g > 0".into()));
    }
    if opts.basis_size < 16 {
        return Err(OdmError::InvalidArgument("basis size must be at least 16".into()));
    }
    let coarse = ground_state(g, &opts)?;
    let fine_opts = SchrodingerOptions { basis_size: 2 * opts.basis_size, ..opts };
    let fine = ground_state(g, &fine_opts)?;
    let digits = agreement_digits(&coarse, &fine, decimal_digits(opts.prec) - 6.0);
    let mut params = BTreeMap::new();
    params.insert("basis_size".to_string(), fine_opts.basis_size.to_string());
    params.insert("compared_with".to_string(), opts.basis_size.to_string());
    let omega = opts.omega.unwrap_or(1.0 + Float::with_val(64, g).sqrt().to_f64() / 2.0);
    params.insert("omega".to_string(), omega.to_string());
    params.insert("prec_bits".to_string(), opts.prec.to_string());
    Ok(OracleResult { value: fine, method: "oscillator-basis-eigensolver", est_accuracy: digits, params })
}

/// Two-term semiclassical `Im E_0` just above the negative axis:
/// `6/sqrt(pi) e^{24/(5g)} / sqrt(-g) (1 + 169 g / 576)`.
pub fn instanton_im_e0(g: &Float) -> Result<Float> {
    if !g.is_sign_negative() || g.is_zero() {
        return Err(OdmError::InvalidArgument("the instanton formula needs g < 0".into()));
    }
    let prec = g.prec();
    let pre = Float::with_val(prec, 6u32) / Float::with_val(prec, Constant::Pi).sqrt();
    let expo = Float::with_val(prec, Float::with_val(prec, 24u32) / Float::with_val(prec, g * 5u32)).exp();
    let root = Float::with_val(prec, -g).sqrt();
    let corr = Float::with_val(prec, g * 169u32) / 576u32 + 1u32;
    Ok(pre * expo / root * corr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_limit() {
        let r = schrodinger_e0_with(&Rational::from((1, 1_000_000)), SchrodingerOptions::new(16)).unwrap();
        assert!((r.value.real().to_f64() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn instanton_formula() {
        let g = Float::with_val(128, -0.5);
        let v = instanton_im_e0(&g).unwrap().to_f64();
        let want = 6.0 / std::f64::consts::PI.sqrt() * (-48.0f64 / 5.0).exp() / 0.5f64.sqrt() * (1.0 - 169.0 / 1152.0);
        assert!((v / want - 1.0).abs() < 1e-14);
        assert!(instanton_im_e0(&Float::with_val(64, -1e-3)).unwrap() >= 0);
        assert!(instanton_im_e0(&Float::with_val(64, 1)).is_err());
    }

    #[test]
    fn small_basis_rejected() {
        assert!(schrodinger_e0(&Rational::from(1), 8).is_err());
    }
}
