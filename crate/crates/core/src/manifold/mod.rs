//! Parametric families, priors and tangent representations.
//!
//! A [`BayesianModel`] pairs a [`ParametricFamily`] `theta -> p_theta` with a
//! [`Prior`] density `lambda(theta)` on the same parameter box; together they
//! describe the positive measures `p~_theta = lambda(theta) p_theta`.

mod family;
mod prior;
mod score;
mod tangent;
mod validate;

pub use family::{family_from_spec, FamilyModel, FamilySpec, ParametricFamily};
pub use prior::{prior_from_spec, Prior, PriorModel, PriorSpec};
pub use score::{alpha_score_matrix, score_matrix, score_matrix_fd, AlphaScoreMatrix, ScoreMatrix};
pub use tangent::{alpha_representation, TangentVector};
pub use validate::{validate_model, CheckResult, ValidationReport};

use crate::error::{Error, Result};
use crate::measures::FinitePmf;

/// Central-difference step for scores and other first derivatives.
pub const SCORE_STEP: f64 = 1e-5;
/// Step for the mixed second-order Eguchi stencil.
pub const METRIC_STEP: f64 = 1e-3;
/// Step for the third-order Christoffel stencils.
pub const CHRISTOFFEL_STEP: f64 = 1e-2;

/// Closed parameter box `prod_i [lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamDomain {
    bounds: Vec<(f64, f64)>,
}

impl ParamDomain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::domain("parameter box has no coordinates"));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::domain(format!(
                    "interval {i} = [{lo}, {hi}] is empty or not finite"
                )));
            }
        }
        Ok(ParamDomain { bounds })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        ParamDomain::new(vec![(lo, hi)])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).product()
    }

    /// Distance from `coords` to the nearest face; negative outside.
    pub fn margin(&self, coords: &[f64]) -> f64 {
        self.bounds
            .iter()
            .zip(coords)
            .map(|(&(lo, hi), &x)| (x - lo).min(hi - x))
            .fold(f64::INFINITY, f64::min)
    }

    /// True when the point is in the closed box (up to a few ulps).
    pub fn contains(&self, coords: &[f64]) -> bool {
        coords.len() == self.dim() && self.margin(coords) >= -1e-13
    }

    /// Fails unless every face is at least `margin` away.
    pub fn require_margin(&self, t: &ThetaPoint, margin: f64) -> Result<()> {
        self.check_dim(t)?;
        let m = self.margin(t.coords());
        if m < margin {
            return Err(Error::domain(format!(
                "point {:?} is {m:.3e} from the box boundary; stencil needs {margin:.3e}",
                t.coords()
            )));
        }
        Ok(())
    }

    pub fn check_dim(&self, t: &ThetaPoint) -> Result<()> {
        if t.dim() != self.dim() {
            return Err(Error::domain(format!(
                "point has {} coordinates, box has {}",
                t.dim(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// The `2^k` corners of the box widened by `pad` on every side.
    pub fn corners(&self, pad: f64) -> Vec<Vec<f64>> {
        let k = self.dim();
        (0..1usize << k)
            .map(|mask| {
                (0..k)
                    .map(|i| {
                        let (lo, hi) = self.bounds[i];
                        if mask >> i & 1 == 1 {
                            hi + pad
                        } else {
                            lo - pad
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Tensor grid of `n` cell-centred points per axis (never on a face).
    pub fn interior_grid(&self, n: usize) -> Vec<ThetaPoint> {
        let k = self.dim();
        let total = n.pow(k as u32);
        (0..total)
            .map(|mut idx| {
                let coords = (0..k)
                    .map(|i| {
                        let j = idx % n;
                        idx /= n;
                        let (lo, hi) = self.bounds[i];
                        lo + (hi - lo) * (j as f64 + 0.5) / n as f64
                    })
                    .collect();
                ThetaPoint::new(coords)
            })
            .collect()
    }
}

/// A parameter vector `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaPoint {
    coords: Vec<f64>,
}

impl ThetaPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        ThetaPoint { coords }
    }

    pub fn scalar(x: f64) -> Self {
        ThetaPoint { coords: vec![x] }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// `theta + step * e_i`
    pub fn shifted(&self, i: usize, step: f64) -> ThetaPoint {
        let mut c = self.coords.clone();
        c[i] += step;
        ThetaPoint { coords: c }
    }
}

impl From<Vec<f64>> for ThetaPoint {
    fn from(coords: Vec<f64>) -> Self {
        ThetaPoint::new(coords)
    }
}

/// A family together with a prior over its parameter box.
#[derive(Debug, Clone)]
pub struct BayesianModel {
    family: ParametricFamily,
    prior: Prior,
}

impl BayesianModel {
    pub fn new(family: ParametricFamily, prior: Prior) -> Result<Self> {
        if family.domain() != prior.domain() {
            return Err(Error::domain(format!(
                "family box {:?} differs from prior box {:?}",
                family.domain().bounds(),
                prior.domain().bounds()
            )));
        }
        Ok(BayesianModel { family, prior })
    }

    pub fn family(&self) -> &ParametricFamily {
        &self.family
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    pub fn domain(&self) -> &ParamDomain {
        self.family.domain()
    }

    /// `(p_theta, lambda(theta))`
    pub fn weighted_pmf(&self, t: &ThetaPoint) -> Result<(FinitePmf, f64)> {
        Ok((self.family.pmf(t)?, self.prior.density(t)?))
    }

    /// The same family under the uniform prior on its box.
    pub fn with_uniform_prior(&self) -> Result<BayesianModel> {
        let prior = prior_from_spec(&PriorSpec::UniformBox {
            domain: self
                .domain()
                .bounds()
                .iter()
                .map(|&(lo, hi)| [lo, hi])
                .collect(),
        })?;
        BayesianModel::new(self.family.clone(), prior)
    }
}
