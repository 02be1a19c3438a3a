//! Gauss-Laguerre quadrature via Golub-Welsch.
//!
//! A rule of order `n` satisfies `∫_0^∞ f(x) e^{-x} dx ≈ Σ_i H_i f(r_i)`
//! exactly for `f` polynomial of degree ≤ 2n-1.

use nalgebra::DMatrix;

use crate::{Error, Result};

pub const MAX_ORDER: usize = 64;

/// Nodes `r_i` and weights `H_i` of a Gauss-Laguerre rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Nodes in strictly increasing order, all positive.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights, positive, summing to 1.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ_i H_i f(r_i)`, approximating `∫_0^∞ f(x) e^{-x} dx`.
    pub fn integrate_weighted<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&r, &h)| h * f(r))
            .sum()
    }

    /// `Σ_i H_i e^{r_i} f(r_i)`, approximating `∫_0^∞ f(x) dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&r, &h)| h * r.exp() * f(r))
            .sum()
    }
}

/// Builds the Gauss-Laguerre rule of the given order.
///
/// Nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix of
/// the Laguerre recurrence (diagonal `2k+1`, off-diagonal `k`); weights are
/// the squared first components of the normalized eigenvectors.
pub fn gauss_laguerre(order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::Parameter(format!(
            "quadrature order must be in 1..={MAX_ORDER}, got {order}"
        )));
    }
    let n = order;
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jacobi[(k, k)] = (2 * k + 1) as f64;
        if k + 1 < n {
            let b = (k + 1) as f64;
            jacobi[(k, k + 1)] = b;
            jacobi[(k + 1, k)] = b;
        }
    }
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            (node, v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();

    let rule = QuadratureRule {
        order,
        nodes,
        weights,
    };
    debug_assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(rule.nodes[0] > 0.0);
    debug_assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn order_one_is_exact() {
        let rule = gauss_laguerre(1).unwrap();
        assert_abs_diff_eq!(rule.nodes()[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rule.weights()[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn order_two_matches_radicals() {
        // roots of x^2 - 4x + 2, weights by exactness on cubics
        let rule = gauss_laguerre(2).unwrap();
        let s2 = 2f64.sqrt();
        assert_abs_diff_eq!(rule.nodes()[0], 2.0 - s2, epsilon = 1e-12);
        assert_abs_diff_eq!(rule.nodes()[1], 2.0 + s2, epsilon = 1e-12);
        assert_abs_diff_eq!(rule.weights()[0], (2.0 + s2) / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rule.weights()[1], (2.0 - s2) / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn order_twenty_first_moment() {
        // ∫_0^∞ x e^{-x} dx = 1
        let rule = gauss_laguerre(20).unwrap();
        assert_abs_diff_eq!(rule.integrate_weighted(|x| x), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn weights_sum_to_one_all_orders() {
        for order in 1..=MAX_ORDER {
            let rule = gauss_laguerre(order).unwrap();
            let sum: f64 = rule.weights().iter().sum();
            assert!(
                (sum - 1.0).abs() < 1e-12,
                "order {order}: weight sum {sum}"
            );
            assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(rule.nodes()[0] > 0.0);
        }
    }

    #[test]
    fn exact_on_low_degree_polynomials() {
        // degree <= 2n-1 integrated to machine precision; ∫ x^k e^{-x} = k!
        let rule = gauss_laguerre(8).unwrap();
        let mut factorial = 1.0;
        for k in 0..=15u32 {
            if k > 0 {
                factorial *= k as f64;
            }
            let got = rule.integrate_weighted(|x| x.powi(k as i32));
            assert!(
                (got - factorial).abs() / factorial < 1e-10,
                "k={k}: {got} vs {factorial}"
            );
        }
    }

    #[test]
    fn rejects_out_of_range_order() {
        assert!(gauss_laguerre(0).is_err());
        assert!(gauss_laguerre(MAX_ORDER + 1).is_err());
    }
}
