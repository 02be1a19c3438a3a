//! Real roots of a cubic polynomial, by radicals and by companion matrix.
//!
//! Both paths are public so closed-form density solutions can be
//! cross-checked against an independent eigenvalue route.

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::{Error, Result};

const IMAG_TOL: f64 = 1e-7;

fn check_leading(a3: f64) -> Result<()> {
    if a3 == 0.0 || !a3.is_finite() {
        return Err(Error::Parameter(format!(
            "cubic: leading coefficient must be finite and nonzero, got {a3}"
        )));
    }
    Ok(())
}

fn eval(a3: f64, a2: f64, a1: f64, a0: f64, x: f64) -> f64 {
    ((a3 * x + a2) * x + a1) * x + a0
}

fn polish(a3: f64, a2: f64, a1: f64, a0: f64, mut x: f64) -> f64 {
    for _ in 0..3 {
        let p = eval(a3, a2, a1, a0, x);
        let dp = (3.0 * a3 * x + 2.0 * a2) * x + a1;
        if dp == 0.0 {
            break;
        }
        let step = p / dp;
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

fn accept_real(roots: impl IntoIterator<Item = Complex64>) -> Vec<f64> {
    let mut real: Vec<f64> = roots
        .into_iter()
        .filter(|r| r.im.abs() < IMAG_TOL * (1.0 + r.re.abs()))
        .map(|r| r.re)
        .collect();
    real.sort_by(f64::total_cmp);
    // merge near-duplicates from conjugate pairs collapsing onto the axis
    real.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * (1.0 + a.abs()));
    real
}

/// All real roots via the radical (Cardano) formulas evaluated in complex
/// arithmetic with principal cube roots; roots with negligible imaginary
/// part are accepted as real and Newton-polished.
pub fn solve_cubic_radical(a3: f64, a2: f64, a1: f64, a0: f64) -> Result<Vec<f64>> {
    check_leading(a3)?;
    let (b, c, d) = (a2 / a3, a1 / a3, a0 / a3);
    let d0 = b * b - 3.0 * c;
    let d1 = 2.0 * b * b * b - 9.0 * b * c + 27.0 * d;
    let disc = Complex64::new(d1 * d1 - 4.0 * d0 * d0 * d0, 0.0);
    let sq = disc.sqrt();
    let mut base = (Complex64::new(d1, 0.0) + sq) / 2.0;
    if base.norm() < 1e-300 {
        base = (Complex64::new(d1, 0.0) - sq) / 2.0;
    }
    let roots = if base.norm() < 1e-300 {
        // triple root
        let r = Complex64::new(-b / 3.0, 0.0);
        [r, r, r]
    } else {
        let cbrt = base.powf(1.0 / 3.0);
        let omega = Complex64::new(-0.5, 0.75f64.sqrt());
        let mut roots = [Complex64::default(); 3];
        let mut u = cbrt;
        for root in &mut roots {
            *root = -(Complex64::new(b, 0.0) + u + d0 / u) / 3.0;
            u *= omega;
        }
        roots
    };
    Ok(accept_real(roots)
        .into_iter()
        .map(|x| polish(a3, a2, a1, a0, x))
        .collect())
}

/// All real roots via eigenvalues of the companion matrix.
pub fn solve_cubic_companion(a3: f64, a2: f64, a1: f64, a0: f64) -> Result<Vec<f64>> {
    check_leading(a3)?;
    let companion = Matrix3::new(
        0.0,
        0.0,
        -a0 / a3,
        1.0,
        0.0,
        -a1 / a3,
        0.0,
        1.0,
        -a2 / a3,
    );
    let eigen = companion.complex_eigenvalues();
    Ok(accept_real(eigen.iter().copied())
        .into_iter()
        .map(|x| polish(a3, a2, a1, a0, x))
        .collect())
}

/// Real roots of `a3 x^3 + a2 x^2 + a1 x + a0`, radical path with a
/// residual check against the companion-matrix route.
pub fn solve_cubic(a3: f64, a2: f64, a1: f64, a0: f64) -> Result<Vec<f64>> {
    let roots = solve_cubic_radical(a3, a2, a1, a0)?;
    let scale = a0.abs().max(1.0);
    for &x in &roots {
        let residual = eval(a3, a2, a1, a0, x).abs();
        if residual >= 1e-9 * scale {
            return Err(Error::Numerical(format!(
                "cubic root {x} has residual {residual} above tolerance"
            )));
        }
    }
    Ok(roots)
}
