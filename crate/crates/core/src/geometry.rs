//! Metrics and connections on parametric families.
//!
//! Two independent routes are provided for every metric: closed-form escort
//! covariances ([`alpha_fim`], [`prior_matrix`], [`bayesian_alpha_metric`])
//! and the finite-difference Eguchi construction
//! `g_ij = -d/d theta'_j d/d theta_i D(theta, theta')` at `theta' = theta`
//! applied to an arbitrary divergence ([`eguchi_metric_fd`]).
//! The same stencils give the Christoffel coefficients of the induced dual
//! connections and a check of `d_k g_ij = Gamma_ki,j + Gamma*_kj,i`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::manifold::{score_matrix, BayesianModel, ParamDomain, ParametricFamily, Prior, ThetaPoint};
use crate::measures::{bayesian_relative_alpha_entropy_parts, escort, relative_alpha_entropy, AlphaOrder};

/// Symmetric positive semidefinite `k x k` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix(pub DMatrix<f64>);

impl MetricMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.0)
    }

    /// Min eigenvalue no lower than `-1e-8 * trace`, and symmetric.
    pub fn is_psd(&self) -> bool {
        let tr = self.0.trace().abs();
        linalg::asymmetry(&self.0) <= 1e-8 && self.min_eigenvalue() >= -1e-8 * tr.max(1e-300)
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        linalg::inverse_symmetric(&self.0)
    }
}

/// `Gamma[(i, j, k)]`, stored row-major over `k^3` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelTensor {
    k: usize,
    data: Vec<f64>,
}

impl ChristoffelTensor {
    fn zeros(k: usize) -> Self {
        ChristoffelTensor {
            k,
            data: vec![0.0; k * k * k],
        }
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize, l: usize) -> f64 {
        self.data[(i * self.k + j) * self.k + l]
    }

    fn set(&mut self, i: usize, j: usize, l: usize, v: f64) {
        self.data[(i * self.k + j) * self.k + l] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Largest violation of the symmetry in the first index pair.
    pub fn pair_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.k {
            for j in 0..self.k {
                for l in 0..self.k {
                    worst = worst.max((self.get(i, j, l) - self.get(j, i, l)).abs());
                }
            }
        }
        worst
    }
}

/// A real observable `A: X -> R`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableTable {
    values: Vec<f64>,
}

impl ObservableTable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("observable has non-finite entries"));
        }
        Ok(ObservableTable { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `G^(alpha)_ij = Cov_{p^(alpha)}[d_i ln p, d_j ln p]`, by enumeration.
pub fn alpha_fim(fam: &ParametricFamily, t: &ThetaPoint, a: AlphaOrder) -> Result<MetricMatrix> {
    let p = fam.pmf(t)?;
    let s = score_matrix(fam, t)?;
    let e = escort(&p, a)?;
    let mean = s.mean_under(&e);
    let k = fam.k();
    let g = DMatrix::from_fn(k, k, |i, j| {
        e.probs()
            .iter()
            .enumerate()
            .map(|(x, w)| w * (s.0[(i, x)] - mean[i]) * (s.0[(j, x)] - mean[j]))
            .sum()
    });
    Ok(MetricMatrix(linalg::symmetrize(&g)))
}

/// Classical Fisher information `E_p[s_i s_j]`, coded without escorts.
pub fn classical_fim(fam: &ParametricFamily, t: &ThetaPoint) -> Result<MetricMatrix> {
    let p = fam.pmf(t)?;
    let s = score_matrix(fam, t)?;
    let k = fam.k();
    let mut g = DMatrix::zeros(k, k);
    for (x, px) in p.probs().iter().enumerate() {
        let col = s.0.column(x);
        g += col * col.transpose() * *px;
    }
    Ok(MetricMatrix(g))
}

/// `J_ij = d_i ln lambda . d_j ln lambda`, rank one.
pub fn prior_matrix(pr: &Prior, t: &ThetaPoint) -> Result<MetricMatrix> {
    let g = pr.log_gradient(t)?;
    let k = g.len();
    Ok(MetricMatrix(DMatrix::from_fn(k, k, |i, j| g[i] * g[j])))
}

/// `lambda(theta) (G^(alpha) + J)`
pub fn bayesian_alpha_metric(
    m: &BayesianModel,
    t: &ThetaPoint,
    a: AlphaOrder,
) -> Result<MetricMatrix> {
    let l = m.prior().density(t)?;
    let g = alpha_fim(m.family(), t, a)?;
    let j = prior_matrix(m.prior(), t)?;
    Ok(MetricMatrix((g.0 + j.0) * l))
}

/// Eguchi metric of the plain relative alpha-entropy, `alpha G^(alpha)`.
///
/// Under a constant prior `c` the Bayesian divergence is `(c / alpha) I_alpha`,
/// so this differs from [`bayesian_alpha_metric`] by the factor `alpha / c`.
pub fn relative_alpha_entropy_metric(
    fam: &ParametricFamily,
    t: &ThetaPoint,
    a: AlphaOrder,
) -> Result<MetricMatrix> {
    let g = alpha_fim(fam, t, a)?;
    Ok(MetricMatrix(g.0 * a.value()))
}

/// A two-point function `D(theta, theta')` on the parameter box.
pub type DivergenceFn<'a> = dyn Fn(&ThetaPoint, &ThetaPoint) -> Result<f64> + 'a;

/// The Bayesian relative alpha-entropy of a model as a two-point function.
pub fn bayesian_divergence(
    m: &BayesianModel,
    a: AlphaOrder,
) -> impl Fn(&ThetaPoint, &ThetaPoint) -> Result<f64> + '_ {
    move |t, t2| {
        let p = m.family().pmf_unchecked(t)?;
        let q = m.family().pmf_unchecked(t2)?;
        let l = m.prior().density(t)?;
        let l2 = m.prior().density(t2)?;
        bayesian_relative_alpha_entropy_parts(&p, l, &q, l2, a)
    }
}

/// `I_alpha(p_theta, p_theta')` of a family as a two-point function.
pub fn family_divergence(
    fam: &ParametricFamily,
    a: AlphaOrder,
) -> impl Fn(&ThetaPoint, &ThetaPoint) -> Result<f64> + '_ {
    move |t, t2| relative_alpha_entropy(&fam.pmf_unchecked(t)?, &fam.pmf_unchecked(t2)?, a)
}

/// Finite-difference Eguchi metric.
#[derive(Debug, Clone, PartialEq)]
pub struct EguchiMetric {
    /// `(M + M^T) / 2`
    pub metric: MetricMatrix,
    /// The unsymmetrized stencil output.
    pub raw: DMatrix<f64>,
    /// `max |M - M^T| / max(1, max |M|)`
    pub asymmetry: f64,
    /// Set when the asymmetry exceeds [`EGUCHI_ASYMMETRY_WARN`].
    pub warning: bool,
}

pub const EGUCHI_ASYMMETRY_WARN: f64 = 1e-4;

fn mixed_second(
    div: &DivergenceFn,
    t: &ThetaPoint,
    t2: &ThetaPoint,
    i: usize,
    j: usize,
    h: f64,
) -> Result<f64> {
    let pp = div(&t.shifted(i, h), &t2.shifted(j, h))?;
    let pm = div(&t.shifted(i, h), &t2.shifted(j, -h))?;
    let mp = div(&t.shifted(i, -h), &t2.shifted(j, h))?;
    let mm = div(&t.shifted(i, -h), &t2.shifted(j, -h))?;
    Ok((pp - pm - mp + mm) / (4.0 * h * h))
}

/// `-d'_j d_i D` at the diagonal by the four-point central stencil.
pub fn eguchi_metric_fd(
    div: &DivergenceFn,
    domain: &ParamDomain,
    t: &ThetaPoint,
    h: f64,
) -> Result<EguchiMetric> {
    domain.require_margin(t, 2.0 * h)?;
    let k = t.dim();
    let mut raw = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            raw[(i, j)] = -mixed_second(div, t, t, i, j, h)?;
        }
    }
    let asymmetry = linalg::asymmetry(&raw);
    let warning = asymmetry > EGUCHI_ASYMMETRY_WARN;
    if warning {
        log::warn!(
            "Eguchi stencil asymmetry {asymmetry:.3e} at {:?} (h = {h:e})",
            t.coords()
        );
    }
    Ok(EguchiMetric {
        metric: MetricMatrix(linalg::symmetrize(&raw)),
        raw,
        asymmetry,
        warning,
    })
}

/// Christoffel coefficients of the dual pair of connections induced by `div`:
/// `Gamma_ij,k = -d_i d_j d'_k D` and `Gamma*_ij,k = -d_k d'_i d'_j D`.
pub fn christoffel_fd(
    div: &DivergenceFn,
    domain: &ParamDomain,
    t: &ThetaPoint,
    h: f64,
) -> Result<(ChristoffelTensor, ChristoffelTensor)> {
    domain.require_margin(t, 3.0 * h)?;
    let k = t.dim();
    let mut gamma = ChristoffelTensor::zeros(k);
    let mut dual = ChristoffelTensor::zeros(k);
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                // second mixed derivative in the first argument, central in the second
                let second_first = |t2: &ThetaPoint| -> Result<f64> {
                    let pp = div(&t.shifted(i, h).shifted(j, h), t2)?;
                    let pm = div(&t.shifted(i, h).shifted(j, -h), t2)?;
                    let mp = div(&t.shifted(i, -h).shifted(j, h), t2)?;
                    let mm = div(&t.shifted(i, -h).shifted(j, -h), t2)?;
                    Ok((pp - pm - mp + mm) / (4.0 * h * h))
                };
                let g = (second_first(&t.shifted(l, h))? - second_first(&t.shifted(l, -h))?)
                    / (2.0 * h);
                gamma.set(i, j, l, -g);

                let second_second = |t1: &ThetaPoint| -> Result<f64> {
                    let pp = div(t1, &t.shifted(i, h).shifted(j, h))?;
                    let pm = div(t1, &t.shifted(i, h).shifted(j, -h))?;
                    let mp = div(t1, &t.shifted(i, -h).shifted(j, h))?;
                    let mm = div(t1, &t.shifted(i, -h).shifted(j, -h))?;
                    Ok((pp - pm - mp + mm) / (4.0 * h * h))
                };
                let g = (second_second(&t.shifted(l, h))? - second_second(&t.shifted(l, -h))?)
                    / (2.0 * h);
                dual.set(i, j, l, -g);
            }
        }
    }
    Ok((gamma, dual))
}

/// Residual of `d_k g_ij = Gamma_ki,j + Gamma*_kj,i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualisticCheck {
    pub max_residual: f64,
    /// Largest magnitude among `g`, `d_k g`, `Gamma` and `Gamma*`; `g` keeps
    /// the ratio meaningful at symmetric points where the rest vanish.
    pub scale: f64,
    pub relative: f64,
}

pub fn dualistic_check(
    div: &DivergenceFn,
    domain: &ParamDomain,
    t: &ThetaPoint,
    h: f64,
) -> Result<DualisticCheck> {
    domain.require_margin(t, 3.0 * h)?;
    let (gamma, dual) = christoffel_fd(div, domain, t, h)?;
    let k = t.dim();
    let mut max_residual: f64 = 0.0;
    let g0 = eguchi_metric_fd(div, domain, t, h)?.raw;
    let mut scale = gamma.max_abs().max(dual.max_abs()).max(g0.abs().max());
    for l in 0..k {
        let up = eguchi_metric_fd(div, domain, &t.shifted(l, h), h)?.raw;
        let dn = eguchi_metric_fd(div, domain, &t.shifted(l, -h), h)?.raw;
        for i in 0..k {
            for j in 0..k {
                let dg = (up[(i, j)] - dn[(i, j)]) / (2.0 * h);
                scale = scale.max(dg.abs());
                let rhs = gamma.get(l, i, j) + dual.get(l, j, i);
                max_residual = max_residual.max((dg - rhs).abs());
            }
        }
    }
    Ok(DualisticCheck {
        max_residual,
        scale,
        relative: max_residual / scale.max(f64::MIN_POSITIVE),
    })
}

/// `Var_{p^(alpha)}[w (A - E_p~[A])]` with `w = p~ / p^(alpha)`.
pub fn weighted_variance(
    m: &BayesianModel,
    t: &ThetaPoint,
    a: AlphaOrder,
    obs: &ObservableTable,
) -> Result<f64> {
    let (p, l) = m.weighted_pmf(t)?;
    check_len(obs, p.len())?;
    let e = escort(&p, a)?;
    let c = l * p.expect(obs.values());
    let u: Vec<f64> = (0..p.len())
        .map(|x| l * p.probs()[x] / e.probs()[x] * (obs.values()[x] - c))
        .collect();
    let mean = e.expect(&u);
    Ok(e.probs()
        .iter()
        .zip(&u)
        .map(|(w, v)| w * (v - mean) * (v - mean))
        .sum())
}

/// `d_i E_p~[A] = d_i lambda . E_p[A] + lambda sum_x d_i p(x) A(x)`
pub fn expectation_gradient(
    m: &BayesianModel,
    t: &ThetaPoint,
    obs: &ObservableTable,
) -> Result<Vec<f64>> {
    let (p, l) = m.weighted_pmf(t)?;
    check_len(obs, p.len())?;
    let s = score_matrix(m.family(), t)?;
    let lg = m.prior().log_gradient(t)?;
    let mean = p.expect(obs.values());
    Ok((0..m.family().k())
        .map(|i| {
            let dp: f64 = (0..p.len())
                .map(|x| p.probs()[x] * s.0[(i, x)] * obs.values()[x])
                .sum();
            l * lg[i] * mean + l * dp
        })
        .collect())
}

/// `||d E[A]||^2 = grad^T (lambda (G^(alpha) + J))^-1 grad`
pub fn differential_norm_sq(
    m: &BayesianModel,
    t: &ThetaPoint,
    a: AlphaOrder,
    obs: &ObservableTable,
) -> Result<f64> {
    let grad = expectation_gradient(m, t, obs)?;
    let g = bayesian_alpha_metric(m, t, a)?;
    linalg::inverse_quadratic_form(&g.0, &grad)
}

fn check_len(obs: &ObservableTable, d: usize) -> Result<()> {
    if obs.values().len() != d {
        return Err(Error::domain(format!(
            "observable has {} entries, alphabet has {d}",
            obs.values().len()
        )));
    }
    Ok(())
}
