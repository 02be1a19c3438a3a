//! Upper incomplete gamma function `Γ(s, x) = ∫_x^∞ t^{s-1} e^{-t} dt`.

use statrs::function::gamma::{gamma, ln_gamma};

use crate::{Error, Result};

const MAX_ITER: usize = 500;
const EPS: f64 = 1e-15;

/// Unregularized upper incomplete gamma function.
///
/// Uses the regularized series for `x < s + 1` and the Lentz continued
/// fraction otherwise; for integer `s` it agrees with the finite-sum
/// identity `Γ(s,x) = (s-1)! e^{-x} Σ_{k<s} x^k/k!`.
pub fn upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Parameter(format!(
            "incomplete gamma: shape must be positive, got {s}"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::Parameter(format!(
            "incomplete gamma: argument must be nonnegative, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(gamma(s));
    }
    if x < s + 1.0 {
        // Γ(s,x) = Γ(s)(1 - P(s,x)) with P by its power series.
        Ok(gamma(s) * (1.0 - lower_regularized_series(s, x)?))
    } else {
        upper_continued_fraction(s, x)
    }
}

fn lower_regularized_series(s: f64, x: f64) -> Result<f64> {
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut a = s;
    for _ in 0..MAX_ITER {
        a += 1.0;
        term *= x / a;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            let ln_front = s * x.ln() - x - ln_gamma(s);
            return Ok(sum * ln_front.exp());
        }
    }
    Err(Error::Accuracy(format!(
        "incomplete gamma series did not converge for s={s}, x={x}"
    )))
}

fn upper_continued_fraction(s: f64, x: f64) -> Result<f64> {
    // Modified Lentz on Γ(s,x) = e^{-x} x^s / (x+1-s - 1(1-s)/(x+3-s - ...))
    let tiny = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            let ln_front = s * x.ln() - x;
            return Ok(h * ln_front.exp());
        }
    }
    Err(Error::Accuracy(format!(
        "incomplete gamma continued fraction did not converge for s={s}, x={x}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Adaptive Simpson oracle for ∫_x^∞ t^{s-1} e^{-t} dt, independent of the
    /// series/continued-fraction implementation above.
    pub fn oracle_upper_gamma(s: f64, x: f64) -> f64 {
        // integrate on [x, x + cutoff] where the tail is below 1e-16 relative
        let integrand = |t: f64| t.powf(s - 1.0) * (-t).exp();
        let upper = (x + s.max(1.0) * 50.0 + 50.0).max(60.0);
        adaptive_simpson(&integrand, x.max(1e-300), upper, 1e-13, 40)
    }

    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let fa = f(a);
        let fm = f(m);
        let fb = f(b);
        simpson_step(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, depth)
    }

    fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)]
    fn simpson_step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol * (1.0 + whole.abs()) {
            left + right + (left + right - whole) / 15.0
        } else {
            simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }

    #[test]
    fn complete_gamma_at_zero() {
        assert!((upper_incomplete_gamma(1.0, 0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((upper_incomplete_gamma(3.0, 0.0).unwrap() - 2.0).abs() < 1e-14);
        let mut factorial = 1.0;
        for s in 1..=10u32 {
            if s > 1 {
                factorial *= (s - 1) as f64;
            }
            let got = upper_incomplete_gamma(s as f64, 0.0).unwrap();
            assert!((got - factorial).abs() / factorial < 1e-12, "s={s}");
        }
    }

    #[test]
    fn agrees_with_quadrature_oracle() {
        let got = upper_incomplete_gamma(2.5, 1.3).unwrap();
        let want = oracle_upper_gamma(2.5, 1.3);
        assert!(
            ((got - want) / want).abs() < 1e-10,
            "got {got}, oracle {want}"
        );
    }

    #[test]
    fn integer_shape_finite_sum_identity() {
        // Γ(n,x) = (n-1)! e^{-x} Σ_{k=0}^{n-1} x^k/k!
        for n in 1..=8u32 {
            for &x in &[0.1, 0.631, 1.0, 2.5, 7.0, 20.0] {
                let mut fact = 1.0;
                let mut sum = 0.0;
                let mut xk = 1.0;
                let mut kfact = 1.0;
                for k in 0..n {
                    if k > 0 {
                        xk *= x;
                        kfact *= k as f64;
                    }
                    sum += xk / kfact;
                }
                for k in 1..n {
                    fact *= k as f64;
                }
                let want = fact * (-x as f64).exp() * sum;
                let got = upper_incomplete_gamma(n as f64, x).unwrap();
                assert!(
                    ((got - want) / want).abs() < 1e-12,
                    "n={n}, x={x}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn random_arguments_vs_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let s: f64 = rng.random_range(0.2..8.0);
            let x: f64 = rng.random_range(0.0..15.0);
            let got = upper_incomplete_gamma(s, x).unwrap();
            let want = oracle_upper_gamma(s, x);
            let rel = ((got - want) / want.max(1e-300)).abs();
            assert!(rel < 1e-9, "s={s}, x={x}: rel {rel}");
        }
    }

    #[test]
    fn rejects_bad_domain() {
        assert!(upper_incomplete_gamma(0.0, 1.0).is_err());
        assert!(upper_incomplete_gamma(-1.0, 1.0).is_err());
        assert!(upper_incomplete_gamma(1.0, -0.5).is_err());
    }
}
