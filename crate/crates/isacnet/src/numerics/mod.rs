//! Special functions and quadrature primitives shared by the closed-form
//! engines: Gauss-Laguerre rules, the upper incomplete gamma function, the
//! Gauss hypergeometric function 2F1, and cubic root solvers.

mod cubic;
mod gamma;
mod hyp2f1;
mod quadrature;

pub use cubic::{solve_cubic, solve_cubic_companion, solve_cubic_radical};
pub use gamma::upper_incomplete_gamma;
pub use hyp2f1::{gauss_2f1, gauss_2f1_complex};
pub use quadrature::{gauss_laguerre, QuadratureRule};

/// Accuracy-control parameters of the Euler-series (Bromwich) CDF inversion.
///
/// `a` trades discretization error (`~e^{-a}`) against round-off; `n_terms`
/// partial-sum terms are binomially averaged over `q_avg` extra terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerInversionParams {
    pub a: f64,
    pub n_terms: u32,
    pub q_avg: u32,
}

impl Default for EulerInversionParams {
    fn default() -> Self {
        Self {
            a: 18.4,
            n_terms: 15,
            q_avg: 15,
        }
    }
}

impl EulerInversionParams {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.a > 0.0) {
            return Err(crate::Error::Parameter(
                "euler inversion: a must be positive".into(),
            ));
        }
        if self.n_terms == 0 || self.q_avg == 0 {
            return Err(crate::Error::Parameter(
                "euler inversion: n_terms and q_avg must be positive".into(),
            ));
        }
        Ok(())
    }
}
