//! Composite Newton-Cotes rules on parameter boxes.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{ParamDomain, ThetaPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    Trapezoid,
    Simpson,
}

/// Nodes and weights of a one-dimensional composite rule with `n` nodes.
pub fn rule_1d(rule: QuadratureRule, n: usize, lo: f64, hi: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(lo < hi) {
        return Err(Error::domain(format!("empty interval [{lo}, {hi}]")));
    }
    match rule {
        QuadratureRule::Trapezoid if n < 2 => {
            return Err(Error::domain("trapezoid rule needs at least 2 nodes"))
        }
        QuadratureRule::Simpson if n < 3 || n % 2 == 0 => {
            return Err(Error::domain(format!(
                "simpson rule needs an odd node count >= 3, got {n}"
            )))
        }
        _ => {}
    }
    let h = (hi - lo) / (n - 1) as f64;
    let nodes = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + i as f64 * h })
        .collect();
    let weights = (0..n)
        .map(|i| {
            let end = i == 0 || i == n - 1;
            match rule {
                QuadratureRule::Trapezoid if end => h / 2.0,
                QuadratureRule::Trapezoid => h,
                QuadratureRule::Simpson if end => h / 3.0,
                QuadratureRule::Simpson if i % 2 == 1 => 4.0 * h / 3.0,
                QuadratureRule::Simpson => 2.0 * h / 3.0,
            }
        })
        .collect();
    Ok((nodes, weights))
}

/// Composite Simpson on `[lo, hi]` with an even number of intervals.
pub fn simpson_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2 + 1;
    let (x, w) = rule_1d(QuadratureRule::Simpson, n, lo, hi).expect("valid simpson rule");
    x.iter().zip(&w).map(|(xi, wi)| wi * f(*xi)).sum()
}

/// Tensor-product grid over a parameter box. Node order is fixed (first
/// coordinate fastest) and all accumulation follows it.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    rule: Option<QuadratureRule>,
    n: usize,
    nodes: Vec<ThetaPoint>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(rule: QuadratureRule, n: usize, domain: &ParamDomain) -> Result<Self> {
        let axes = domain
            .bounds()
            .iter()
            .map(|&(lo, hi)| rule_1d(rule, n, lo, hi))
            .collect::<Result<Vec<_>>>()?;
        let k = axes.len();
        let total = n.pow(k as u32);
        let mut nodes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut coords = Vec::with_capacity(k);
            let mut w = 1.0;
            for (x, wx) in &axes {
                let j = idx % n;
                idx /= n;
                coords.push(x[j]);
                w *= wx[j];
            }
            nodes.push(ThetaPoint::new(coords));
            weights.push(w);
        }
        Ok(QuadratureGrid {
            rule: Some(rule),
            n,
            nodes,
            weights,
        })
    }

    /// One node carrying the whole box volume.
    pub fn single_node(point: ThetaPoint, domain: &ParamDomain) -> Result<Self> {
        domain.check_dim(&point)?;
        Ok(QuadratureGrid {
            rule: None,
            n: 1,
            nodes: vec![point],
            weights: vec![domain.volume()],
        })
    }

    pub fn rule(&self) -> Option<QuadratureRule> {
        self.rule
    }

    /// Nodes per dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[ThetaPoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate_scalar(&self, f: impl Fn(&ThetaPoint) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(t)?;
        }
        Ok(acc)
    }

    pub fn integrate_matrix(
        &self,
        dim: usize,
        f: impl Fn(&ThetaPoint) -> Result<DMatrix<f64>>,
    ) -> Result<DMatrix<f64>> {
        let mut acc = DMatrix::zeros(dim, dim);
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(t)? * *w;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_sum_to_volume() {
        let d = ParamDomain::new(vec![(0.1, 0.9), (-1.0, 2.0)]).unwrap();
        for (rule, n) in [(QuadratureRule::Simpson, 21), (QuadratureRule::Trapezoid, 10)] {
            let g = QuadratureGrid::new(rule, n, &d).unwrap();
            assert_eq!(g.nodes().len(), n * n);
            assert!(g.weights().iter().all(|w| *w > 0.0));
            assert_abs_diff_eq!(g.total_weight(), 2.4, epsilon = 1e-12);
        }
    }

    #[test]
    fn simpson_needs_odd_count() {
        let d = ParamDomain::interval(0.0, 1.0).unwrap();
        assert!(QuadratureGrid::new(QuadratureRule::Simpson, 4, &d).is_err());
        assert!(QuadratureGrid::new(QuadratureRule::Trapezoid, 1, &d).is_err());
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson_1d(|x| x * x * x - 2.0 * x + 1.0, 0.1, 0.9, 2);
        let exact = (0.9f64.powi(4) - 0.1f64.powi(4)) / 4.0 - (0.81 - 0.01) + 0.8;
        assert_abs_diff_eq!(v, exact, epsilon = 1e-15);
    }

    #[test]
    fn single_node_grid() {
        let d = ParamDomain::interval(0.1, 0.9).unwrap();
        let g = QuadratureGrid::single_node(ThetaPoint::scalar(0.3), &d).unwrap();
        assert_abs_diff_eq!(g.integrate_scalar(|_| Ok(2.0)).unwrap(), 1.6, epsilon = 1e-15);
    }
}
