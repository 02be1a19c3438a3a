//! Gauss hypergeometric function 2F1(a, b; c; z).
//!
//! The power series is used inside the unit disc; outside (and near its
//! rim) the Pfaff transformation `(1-z)^{-a} 2F1(a, c-b; c; z/(z-1))`
//! provides the analytic continuation for `Re z < 1/2`, which covers the
//! negative-real arguments produced by the interference MGF. Once the
//! Pfaff image approaches the rim in turn (|z| large), the 1/z inversion
//! expansion takes over.

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::{Error, Result};

const MAX_TERMS: usize = 2000;
const TERM_TOL: f64 = 1e-16;
const SERIES_RADIUS: f64 = 0.9;

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && (x - x.round()).abs() < 1e-12
}

/// Real-argument 2F1.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let v = gauss_2f1_complex(a, b, c, Complex64::new(z, 0.0))?;
    Ok(v.re)
}

/// 2F1 at a complex argument with real parameters.
pub fn gauss_2f1_complex(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(c) {
        return Err(Error::Domain(format!(
            "2F1: c must not be a nonpositive integer, got {c}"
        )));
    }
    if z.norm() < SERIES_RADIUS {
        return series(a, b, c, z);
    }
    let w = z / (z - 1.0);
    if w.norm() < SERIES_RADIUS {
        return pfaff(a, b, c, z);
    }
    if z.re < 0.5 && z.norm() > 1.5 {
        return inversion(a, b, c, z);
    }
    pfaff(a, b, c, z)
}

/// Direct power-series summation; converges for |z| < 1.
pub(crate) fn series(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let ratio = (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0));
        term *= ratio * z;
        sum += term;
        if term.norm() < TERM_TOL * sum.norm().max(1.0) {
            return Ok(sum);
        }
    }
    Err(Error::Accuracy(format!(
        "2F1 series did not converge for a={a}, b={b}, c={c}, z={z}"
    )))
}

/// Pfaff transformation, valid for Re z < 1/2 (maps to |z/(z-1)| < 1).
pub(crate) fn pfaff(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    let w = z / (z - 1.0);
    if w.norm() >= 1.0 - 1e-12 {
        return Err(Error::Domain(format!(
            "2F1: argument z={z} outside the series and Pfaff domains"
        )));
    }
    let factor = (Complex64::new(1.0, 0.0) - z).powf(-a);
    Ok(factor * series(a, c - b, c, w)?)
}

/// Large-argument expansion in powers of 1/z, for `Re z < 1/2`, `|z| > 1`,
/// and non-integer `a - b`.
pub(crate) fn inversion(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    let diff = a - b;
    if (diff - diff.round()).abs() < 1e-8 {
        return Err(Error::Domain(format!(
            "2F1: 1/z expansion requires non-integer a-b, got a={a}, b={b}"
        )));
    }
    let inv = z.inv();
    let neg_z = -z;
    let coeff_a = gamma(c) * gamma(b - a) / (gamma(b) * gamma(c - a));
    let coeff_b = gamma(c) * gamma(a - b) / (gamma(a) * gamma(c - b));
    let term_a = coeff_a * neg_z.powf(-a) * series(a, a - c + 1.0, a - b + 1.0, inv)?;
    let term_b = coeff_b * neg_z.powf(-b) * series(b, b - c + 1.0, b - a + 1.0, inv)?;
    let sum = term_a + term_b;
    if !sum.re.is_finite() || !sum.im.is_finite() {
        return Err(Error::Domain(format!(
            "2F1: 1/z expansion hit a gamma pole for a={a}, b={b}, c={c}"
        )));
    }
    Ok(sum)
}
