//! Reference values computed without the ODM machinery.

mod pade;
mod quadrature;
mod schrodinger;

use std::collections::BTreeMap;

use rug::Complex;

pub use pade::{pade_coefficients, pade_eval, PadeApproximant};
pub use quadrature::{z0_closed_form, z_exact, z_exact_with, QuadratureOptions};
pub use schrodinger::{instanton_im_e0, schrodinger_e0, schrodinger_e0_with, SchrodingerOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: Complex,
    pub method: &'static str,
    /// Estimated number of correct decimal digits.
    pub est_accuracy: f64,
    pub params: BTreeMap<String, String>,
}

/// `-log10 |a - b| / max(|b|, 1e-300)`, clipped to `[0, cap]`.
pub(crate) fn agreement_digits(a: &Complex, b: &Complex, cap: f64) -> f64 {
    let prec = a.prec().0;
    let diff = crate::precision::cabs(&Complex::with_val(prec, a - b)).to_f64();
    let scale = crate::precision::cabs(b).to_f64().max(1e-300);
    if diff == 0.0 {
        return cap;
    }
    (-(diff / scale).log10()).clamp(0.0, cap)
}
