use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ParamDomain, ThetaPoint};
use crate::error::{Error, Result};
use crate::quadrature::simpson_1d;

/// Density `lambda(theta)` and its log-gradient.
pub trait PriorModel: Send + Sync + fmt::Debug {
    fn density(&self, theta: &[f64]) -> f64;

    fn log_gradient(&self, theta: &[f64]) -> Vec<f64>;

    /// False where the density has a kink within `h` of `theta`.
    fn is_smooth_at(&self, _theta: &[f64], _h: f64) -> bool {
        true
    }
}

/// Built-in priors, as they appear in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorSpec {
    UniformBox {
        domain: Vec<[f64; 2]>,
    },
    /// `prod_i theta_i^(a-1) (1 - theta_i)^(b-1)`, renormalized on the box.
    TruncBeta {
        a: f64,
        b: f64,
        domain: Vec<[f64; 2]>,
    },
    /// One-dimensional piecewise-linear density through `(knots, values)`;
    /// the box is `[knots[0], knots[last]]`.
    Tabulated { knots: Vec<f64>, values: Vec<f64> },
}

impl PriorSpec {
    pub fn domain(&self) -> Result<ParamDomain> {
        match self {
            PriorSpec::UniformBox { domain } | PriorSpec::TruncBeta { domain, .. } => {
                ParamDomain::new(domain.iter().map(|[lo, hi]| (*lo, *hi)).collect())
                    .map_err(|e| Error::config("prior.domain", e.to_string()))
            }
            PriorSpec::Tabulated { knots, .. } => match (knots.first(), knots.last()) {
                (Some(&lo), Some(&hi)) => ParamDomain::interval(lo, hi)
                    .map_err(|e| Error::config("prior.knots", e.to_string())),
                _ => Err(Error::config("prior.knots", "no knots given")),
            },
        }
    }
}

/// A probability density on the parameter box.
#[derive(Clone)]
pub struct Prior {
    name: String,
    domain: ParamDomain,
    model: Arc<dyn PriorModel>,
    uniform: bool,
}

impl fmt::Debug for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Prior")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish()
    }
}

impl Prior {
    pub fn new(name: impl Into<String>, domain: ParamDomain, model: Arc<dyn PriorModel>) -> Self {
        Prior {
            name: name.into(),
            domain,
            model,
            uniform: false,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &ParamDomain {
        &self.domain
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn density(&self, t: &ThetaPoint) -> Result<f64> {
        self.domain.check_dim(t)?;
        let l = self.model.density(t.coords());
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Prior(format!(
                "`{}` has density {l} at {:?}",
                self.name,
                t.coords()
            )));
        }
        Ok(l)
    }

    /// `d/d theta_i ln lambda(theta)`
    pub fn log_gradient(&self, t: &ThetaPoint) -> Result<Vec<f64>> {
        self.domain.check_dim(t)?;
        let g = self.model.log_gradient(t.coords());
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Prior(format!(
                "`{}` has a non-finite log-gradient at {:?}",
                self.name,
                t.coords()
            )));
        }
        Ok(g)
    }

    pub fn is_smooth_at(&self, t: &ThetaPoint, h: f64) -> bool {
        self.model.is_smooth_at(t.coords(), h)
    }
}

#[derive(Debug)]
struct Uniform {
    k: usize,
    level: f64,
}

impl PriorModel for Uniform {
    fn density(&self, _: &[f64]) -> f64 {
        self.level
    }

    fn log_gradient(&self, _: &[f64]) -> Vec<f64> {
        vec![0.0; self.k]
    }
}

#[derive(Debug)]
struct TruncBeta {
    a: f64,
    b: f64,
    // per-coordinate normalizers
    norms: Vec<f64>,
}

impl PriorModel for TruncBeta {
    fn density(&self, t: &[f64]) -> f64 {
        t.iter()
            .zip(&self.norms)
            .map(|(x, n)| x.powf(self.a - 1.0) * (1.0 - x).powf(self.b - 1.0) / n)
            .product()
    }

    fn log_gradient(&self, t: &[f64]) -> Vec<f64> {
        t.iter()
            .map(|x| (self.a - 1.0) / x - (self.b - 1.0) / (1.0 - x))
            .collect()
    }
}

#[derive(Debug)]
struct Tabulated {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl Tabulated {
    fn segment(&self, x: f64) -> usize {
        let last = self.knots.len() - 2;
        match self.knots.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }

    fn slope(&self, s: usize) -> f64 {
        (self.values[s + 1] - self.values[s]) / (self.knots[s + 1] - self.knots[s])
    }
}

impl PriorModel for Tabulated {
    fn density(&self, t: &[f64]) -> f64 {
        let s = self.segment(t[0]);
        self.values[s] + self.slope(s) * (t[0] - self.knots[s])
    }

    fn log_gradient(&self, t: &[f64]) -> Vec<f64> {
        vec![self.slope(self.segment(t[0])) / self.density(t)]
    }

    fn is_smooth_at(&self, t: &[f64], h: f64) -> bool {
        self.knots[1..self.knots.len() - 1]
            .iter()
            .all(|k| (k - t[0]).abs() > h)
    }
}

const BETA_NORMALIZER_INTERVALS: usize = 4000;

/// Builds a built-in prior, normalized to unit mass on its box.
pub fn prior_from_spec(spec: &PriorSpec) -> Result<Prior> {
    let domain = spec.domain()?;
    let k = domain.dim();
    let (name, model, uniform): (String, Arc<dyn PriorModel>, bool) = match spec {
        PriorSpec::UniformBox { .. } => (
            "uniform_box".into(),
            Arc::new(Uniform {
                k,
                level: 1.0 / domain.volume(),
            }),
            true,
        ),
        PriorSpec::TruncBeta { a, b, .. } => {
            if !(*a > 0.0 && a.is_finite()) {
                return Err(Error::config("prior.a", "must be positive"));
            }
            if !(*b > 0.0 && b.is_finite()) {
                return Err(Error::config("prior.b", "must be positive"));
            }
            let mut norms = Vec::with_capacity(k);
            for (i, &(lo, hi)) in domain.bounds().iter().enumerate() {
                if !(lo > 0.0 && hi < 1.0) {
                    return Err(Error::config(
                        format!("prior.domain[{i}]"),
                        "trunc_beta needs a box strictly inside (0, 1)",
                    ));
                }
                norms.push(simpson_1d(
                    |x| x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0),
                    lo,
                    hi,
                    BETA_NORMALIZER_INTERVALS,
                ));
            }
            (
                format!("trunc_beta({a},{b})"),
                Arc::new(TruncBeta { a: *a, b: *b, norms }),
                false,
            )
        }
        PriorSpec::Tabulated { knots, values } => {
            if knots.len() < 2 || knots.len() != values.len() {
                return Err(Error::config(
                    "prior.values",
                    "need at least two knots and one value per knot",
                ));
            }
            if knots.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::config("prior.knots", "must be strictly increasing"));
            }
            if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::Prior(format!(
                    "tabulated density is {} at knot {i}",
                    values[i]
                )));
            }
            // exact integral of the interpolant
            let mass: f64 = knots
                .windows(2)
                .zip(values.windows(2))
                .map(|(k, v)| 0.5 * (k[1] - k[0]) * (v[0] + v[1]))
                .sum();
            (
                "tabulated".into(),
                Arc::new(Tabulated {
                    knots: knots.clone(),
                    values: values.iter().map(|v| v / mass).collect(),
                }),
                false,
            )
        }
    };
    let mut prior = Prior::new(name, domain, model);
    prior.uniform = uniform;
    Ok(prior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_level() {
        let p = prior_from_spec(&PriorSpec::UniformBox {
            domain: vec![[0.1, 0.9]],
        })
        .unwrap();
        let t = ThetaPoint::scalar(0.37);
        assert_abs_diff_eq!(p.density(&t).unwrap(), 1.25, epsilon = 1e-15);
        assert_eq!(p.log_gradient(&t).unwrap(), vec![0.0]);
        assert!(p.is_uniform());
    }

    #[test]
    fn trunc_beta_fixture() {
        let p = prior_from_spec(&PriorSpec::TruncBeta {
            a: 2.0,
            b: 2.0,
            domain: vec![[0.1, 0.9]],
        })
        .unwrap();
        let t = ThetaPoint::scalar(0.2);
        // int_{0.1}^{0.9} x(1-x) dx = 0.1573333...
        assert_abs_diff_eq!(p.density(&t).unwrap(), 0.16 / (0.472 / 3.0), epsilon = 1e-13);
        assert_abs_diff_eq!(p.density(&t).unwrap(), 1.016949, epsilon = 1e-6);
        assert_abs_diff_eq!(p.log_gradient(&t).unwrap()[0], 3.75, epsilon = 1e-13);
    }

    #[test]
    fn trunc_beta_rejects_box_touching_zero() {
        let r = prior_from_spec(&PriorSpec::TruncBeta {
            a: 2.0,
            b: 2.0,
            domain: vec![[0.0, 0.9]],
        });
        assert!(matches!(r, Err(Error::Config { .. })));
    }

    #[test]
    fn tabulated_interpolates_and_normalizes() {
        let p = prior_from_spec(&PriorSpec::Tabulated {
            knots: vec![0.0, 1.0, 2.0],
            values: vec![1.0, 3.0, 1.0],
        })
        .unwrap();
        // mass 4 before normalization
        assert_abs_diff_eq!(p.density(&ThetaPoint::scalar(0.5)).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            p.log_gradient(&ThetaPoint::scalar(1.5)).unwrap()[0],
            -0.5 / 0.5,
            epsilon = 1e-15
        );
        assert!(!p.is_smooth_at(&ThetaPoint::scalar(1.0), 1e-3));
        assert!(matches!(
            prior_from_spec(&PriorSpec::Tabulated {
                knots: vec![0.0, 1.0],
                values: vec![1.0, 0.0],
            }),
            Err(Error::Prior(_))
        ));
    }
}
