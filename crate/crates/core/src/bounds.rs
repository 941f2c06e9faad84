//! Bayesian alpha-Cramer-Rao pipeline.
//!
//! The bound compares
//!
//! ```text
//! LHS = int Cov_{p^(alpha)}[ (p~ / p^(alpha)) (theta_hat - theta) ] d theta
//! RHS = { int lambda (G^(alpha) + J) d theta }^-1
//! ```
//!
//! in Loewner order. [`verify_bound`] also records the per-node step
//! (`Cov >= [lambda (G + J)]^-1`) and the matrix-Jensen step
//! (`int [lambda (G + J)]^-1 d theta >= RHS`) separately; either can fail
//! while the end-to-end inequality holds, and the report carries the sign
//! instead of raising.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{alpha_fim, bayesian_alpha_metric, classical_fim, prior_matrix};
use crate::linalg;
use crate::manifold::{BayesianModel, FamilySpec, ParametricFamily, ThetaPoint};
use crate::measures::{escort, AlphaOrder};
use crate::quadrature::QuadratureGrid;

/// Largest admissible `|E_theta[theta_hat] - theta|`.
pub const UNBIASED_TOL: f64 = 1e-9;
/// Loewner gaps above `-GAP_TOL` count as holding.
pub const GAP_TOL: f64 = 1e-8;
/// Agreement required between the two reduction pipelines.
pub const REDUCTION_TOL: f64 = 1e-9;

/// `values[(i, x)]` is the estimate of `theta_i` when `x` is observed.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorTable(DMatrix<f64>);

impl EstimatorTable {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        let d = rows.first().map_or(0, |r| r.len());
        if k == 0 || d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::domain("estimator table must be a non-empty k x d array"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain("estimator table has non-finite entries"));
        }
        Ok(EstimatorTable(DMatrix::from_fn(k, d, |i, x| rows[i][x])))
    }

    /// The natural unbiased estimator of a built-in family, if it has one:
    /// `x` for bernoulli, indicators for categorical, `x / n` for binomial.
    pub fn builtin(spec: &FamilySpec) -> Result<Self> {
        match spec {
            FamilySpec::Bernoulli => EstimatorTable::new(vec![vec![0.0, 1.0]]),
            FamilySpec::Categorical { d } => EstimatorTable::new(
                (0..d - 1)
                    .map(|i| (0..*d).map(|x| if x == i { 1.0 } else { 0.0 }).collect())
                    .collect(),
            ),
            FamilySpec::Binomial { n } => EstimatorTable::new(vec![(0..=*n)
                .map(|x| x as f64 / *n as f64)
                .collect()]),
            FamilySpec::Tilted { .. } => Err(Error::config(
                "estimator",
                "tilted families have no built-in unbiased estimator; give an explicit table",
            )),
        }
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.nrows()
    }

    pub fn d(&self) -> usize {
        self.0.ncols()
    }

    fn check_shape(&self, fam: &ParametricFamily) -> Result<()> {
        if self.k() != fam.k() || self.d() != fam.d() {
            return Err(Error::domain(format!(
                "estimator is {}x{}, family needs {}x{}",
                self.k(),
                self.d(),
                fam.k(),
                fam.d()
            )));
        }
        Ok(())
    }

    /// `E_p[theta_hat_i]`
    fn mean(&self, p: &[f64]) -> Vec<f64> {
        (0..self.k())
            .map(|i| (0..self.d()).map(|x| p[x] * self.0[(i, x)]).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnbiasednessReport {
    pub max_abs_bias: f64,
    pub worst_node: Option<ThetaPoint>,
    pub passed: bool,
}

/// Largest `|E_theta[theta_hat_i] - theta_i|` over the grid nodes.
pub fn check_unbiased(
    est: &EstimatorTable,
    fam: &ParametricFamily,
    grid: &QuadratureGrid,
) -> UnbiasednessReport {
    if est.check_shape(fam).is_err() {
        return UnbiasednessReport {
            max_abs_bias: f64::INFINITY,
            worst_node: None,
            passed: false,
        };
    }
    let mut worst = 0.0;
    let mut worst_node = None;
    for t in grid.nodes() {
        let bias = match fam.pmf(t) {
            Ok(p) => est
                .mean(p.probs())
                .iter()
                .zip(t.coords())
                .map(|(m, th)| (m - th).abs())
                .fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        };
        if !(bias <= worst) {
            worst = bias;
            worst_node = Some(t.clone());
        }
    }
    UnbiasednessReport {
        max_abs_bias: worst,
        worst_node,
        passed: worst <= UNBIASED_TOL,
    }
}

/// `Cov_{p^(alpha)}[w (theta_hat - theta)]` with `w = lambda p / p^(alpha)`.
pub fn weighted_estimator_covariance(
    m: &BayesianModel,
    t: &ThetaPoint,
    a: AlphaOrder,
    est: &EstimatorTable,
) -> Result<DMatrix<f64>> {
    est.check_shape(m.family())?;
    let (p, l) = m.weighted_pmf(t)?;
    let e = escort(&p, a)?;
    let k = est.k();
    let d = p.len();
    let u = DMatrix::from_fn(k, d, |i, x| {
        l * p.probs()[x] / e.probs()[x] * (est.0[(i, x)] - t.coords()[i])
    });
    let mean: Vec<f64> = (0..k)
        .map(|i| (0..d).map(|x| e.probs()[x] * u[(i, x)]).sum())
        .collect();
    let cov = DMatrix::from_fn(k, k, |i, j| {
        (0..d)
            .map(|x| e.probs()[x] * (u[(i, x)] - mean[i]) * (u[(j, x)] - mean[j]))
            .sum()
    });
    Ok(linalg::symmetrize(&cov))
}

/// `int Cov_{p^(alpha)}[...] d theta` (plain Lebesgue measure, no prior weight).
pub fn integrated_covariance(
    m: &BayesianModel,
    a: AlphaOrder,
    est: &EstimatorTable,
    grid: &QuadratureGrid,
) -> Result<DMatrix<f64>> {
    grid.integrate_matrix(m.family().k(), |t| {
        weighted_estimator_covariance(m, t, a, est)
    })
}

/// `E_lambda[G^(alpha) + J] = int lambda (G^(alpha) + J) d theta`
pub fn expected_information(
    m: &BayesianModel,
    a: AlphaOrder,
    grid: &QuadratureGrid,
) -> Result<DMatrix<f64>> {
    grid.integrate_matrix(m.family().k(), |t| Ok(bayesian_alpha_metric(m, t, a)?.0))
}

/// `{E_lambda[G^(alpha) + J]}^-1`
pub fn bayesian_alpha_crlb(
    m: &BayesianModel,
    a: AlphaOrder,
    grid: &QuadratureGrid,
) -> Result<DMatrix<f64>> {
    linalg::inverse_symmetric(&expected_information(m, a, grid)?)
}

/// `int [lambda (G^(alpha) + J)]^-1 d theta`, the intermediate quantity of
/// the matrix-Jensen step.
pub fn inverse_metric_integral(
    m: &BayesianModel,
    a: AlphaOrder,
    grid: &QuadratureGrid,
) -> Result<DMatrix<f64>> {
    grid.integrate_matrix(m.family().k(), |t| bayesian_alpha_metric(m, t, a)?.inverse())
}

/// Everything [`verify_bound`] measures. Negative gaps are data.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub alpha: f64,
    /// Integrated weighted covariance.
    pub lhs: DMatrix<f64>,
    /// `{E_lambda[G^(alpha) + J]}^-1`
    pub rhs: DMatrix<f64>,
    /// `E_lambda[G^(alpha) + J]`
    pub information: DMatrix<f64>,
    /// Min eigenvalue of `lhs - rhs`.
    pub gap_min_eig: f64,
    /// Worst node min eigenvalue of `Cov(theta) - [lambda (G + J)]^-1`.
    pub pointwise_min_gap: f64,
    pub pointwise_worst_node: Option<ThetaPoint>,
    /// `int [lambda (G + J)]^-1 d theta`
    pub step21_integral: DMatrix<f64>,
    /// Min eigenvalue of `step21_integral - rhs`.
    pub jensen_gap_min_eig: f64,
    pub unbiasedness: UnbiasednessReport,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.gap_min_eig >= -GAP_TOL
    }

    pub fn step21_violated(&self) -> bool {
        self.jensen_gap_min_eig < -GAP_TOL
    }

    pub fn pointwise_violated(&self) -> bool {
        self.pointwise_min_gap < -GAP_TOL
    }

    /// `HOLDS`, `VIOLATED`, or `BIASED_ESTIMATOR` when the precondition fails.
    pub fn status(&self) -> &'static str {
        if !self.unbiasedness.passed {
            "BIASED_ESTIMATOR"
        } else if self.holds() {
            "HOLDS"
        } else {
            "VIOLATED"
        }
    }

    /// `STEP21_OK` or `STEP21_VIOLATED`.
    pub fn step_status(&self) -> &'static str {
        if self.step21_violated() {
            "STEP21_VIOLATED"
        } else {
            "STEP21_OK"
        }
    }
}

/// Runs the full pipeline at one order. Only singular information matrices
/// are errors.
pub fn verify_bound(
    m: &BayesianModel,
    a: AlphaOrder,
    est: &EstimatorTable,
    grid: &QuadratureGrid,
) -> Result<BoundReport> {
    let unbiasedness = check_unbiased(est, m.family(), grid);
    let k = m.family().k();
    let mut lhs = DMatrix::zeros(k, k);
    let mut information = DMatrix::zeros(k, k);
    let mut step21 = DMatrix::zeros(k, k);
    let mut pointwise_min_gap = f64::INFINITY;
    let mut pointwise_worst_node = None;
    for (t, w) in grid.nodes().iter().zip(grid.weights()) {
        let cov = weighted_estimator_covariance(m, t, a, est)?;
        let metric = bayesian_alpha_metric(m, t, a)?;
        let inv = metric.inverse()?;
        let gap = linalg::min_eigenvalue(&(&cov - &inv));
        if !(gap >= pointwise_min_gap) {
            pointwise_min_gap = gap;
            pointwise_worst_node = Some(t.clone());
        }
        lhs += cov * *w;
        information += metric.0 * *w;
        step21 += inv * *w;
    }
    let rhs = linalg::inverse_symmetric(&information)?;
    Ok(BoundReport {
        alpha: a.value(),
        gap_min_eig: linalg::min_eigenvalue(&(&lhs - &rhs)),
        jensen_gap_min_eig: linalg::min_eigenvalue(&(&step21 - &rhs)),
        lhs,
        rhs,
        information,
        pointwise_min_gap,
        pointwise_worst_node,
        step21_integral: step21,
        unbiasedness,
    })
}

/// `(Cov_theta[theta_hat], FIM(theta)^-1)`: the deterministic Cramer-Rao pair.
pub fn deterministic_crlb(
    fam: &ParametricFamily,
    t: &ThetaPoint,
    est: &EstimatorTable,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    est.check_shape(fam)?;
    let p = fam.pmf(t)?;
    let mean = est.mean(p.probs());
    let k = est.k();
    let var = DMatrix::from_fn(k, k, |i, j| {
        p.probs()
            .iter()
            .enumerate()
            .map(|(x, px)| px * (est.0[(i, x)] - mean[i]) * (est.0[(j, x)] - mean[j]))
            .sum()
    });
    let crlb = classical_fim(fam, t)?.inverse()?;
    Ok((var, crlb))
}

/// Outcome of the three limit reductions.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    /// alpha = 1 pipeline vs the classical Bayesian pipeline: max abs
    /// difference of the RHS and of the LHS.
    pub classical_rhs_diff: f64,
    pub classical_lhs_diff: f64,
    /// Largest `|J|` entry at any node under the uniform prior on the box.
    pub uniform_prior_j_max: f64,
    /// Max over orders of `|RHS_uniform - {int lambda G^(alpha)}^-1|`.
    pub uniform_rhs_diff: f64,
    /// Max over nodes of `|Var_theta[theta_hat] - FIM^-1|`.
    pub deterministic_max_diff: f64,
    /// Min over nodes of the min eigenvalue of `Var - FIM^-1`.
    pub deterministic_min_gap: f64,
}

impl ReductionReport {
    pub fn classical_ok(&self) -> bool {
        self.classical_rhs_diff <= REDUCTION_TOL && self.classical_lhs_diff <= REDUCTION_TOL
    }

    pub fn uniform_ok(&self) -> bool {
        self.uniform_prior_j_max == 0.0 && self.uniform_rhs_diff <= REDUCTION_TOL
    }

    pub fn deterministic_ok(&self) -> bool {
        self.deterministic_min_gap >= -REDUCTION_TOL
    }

    pub fn passed(&self) -> bool {
        self.classical_ok() && self.uniform_ok() && self.deterministic_ok()
    }
}

/// Checks the alpha = 1, uniform-prior and deterministic reductions.
///
/// The alpha = 1 comparison uses a separately written pipeline built from
/// `E_p[s s^T]` and `lambda^2 Cov_p[theta_hat]`, without escorts.
pub fn reduction_suite(
    m: &BayesianModel,
    est: &EstimatorTable,
    grid: &QuadratureGrid,
    alphas: &[AlphaOrder],
) -> Result<ReductionReport> {
    let fam = m.family();
    let k = fam.k();
    let one = AlphaOrder::new(1.0)?;

    let classical_info = grid.integrate_matrix(k, |t| {
        let l = m.prior().density(t)?;
        let lg = m.prior().log_gradient(t)?;
        let j = DMatrix::from_fn(k, k, |i, jj| lg[i] * lg[jj]);
        Ok((classical_fim(fam, t)?.0 + j) * l)
    })?;
    let classical_rhs = linalg::inverse_symmetric(&classical_info)?;
    let classical_lhs = grid.integrate_matrix(k, |t| {
        let (p, l) = m.weighted_pmf(t)?;
        let mut acc = DMatrix::zeros(k, k);
        for (x, px) in p.probs().iter().enumerate() {
            let dev = DMatrix::from_fn(k, 1, |i, _| est.0[(i, x)] - t.coords()[i]);
            acc += &dev * dev.transpose() * *px;
        }
        Ok(acc * (l * l))
    })?;
    let rhs1 = bayesian_alpha_crlb(m, one, grid)?;
    let lhs1 = integrated_covariance(m, one, est, grid)?;
    let scale = |a: &DMatrix<f64>| a.abs().max().max(1.0);
    let classical_rhs_diff = (&rhs1 - &classical_rhs).abs().max() / scale(&classical_rhs);
    let classical_lhs_diff = (&lhs1 - &classical_lhs).abs().max() / scale(&classical_lhs);

    let flat = m.with_uniform_prior()?;
    let mut uniform_prior_j_max: f64 = 0.0;
    for t in grid.nodes() {
        uniform_prior_j_max =
            uniform_prior_j_max.max(prior_matrix(flat.prior(), t)?.0.abs().max());
    }
    let mut uniform_rhs_diff: f64 = 0.0;
    for &a in alphas {
        let rhs = bayesian_alpha_crlb(&flat, a, grid)?;
        let direct = linalg::inverse_symmetric(&grid.integrate_matrix(k, |t| {
            Ok(alpha_fim(fam, t, a)?.0 * flat.prior().density(t)?)
        })?)?;
        uniform_rhs_diff = uniform_rhs_diff.max((&rhs - &direct).abs().max() / scale(&direct));
    }

    let mut deterministic_max_diff: f64 = 0.0;
    let mut deterministic_min_gap = f64::INFINITY;
    for t in grid.nodes() {
        let (var, crlb) = deterministic_crlb(fam, t, est)?;
        deterministic_max_diff = deterministic_max_diff.max((&var - &crlb).abs().max());
        deterministic_min_gap = deterministic_min_gap.min(linalg::min_eigenvalue(&(&var - &crlb)));
    }

    Ok(ReductionReport {
        classical_rhs_diff,
        classical_lhs_diff,
        uniform_prior_j_max,
        uniform_rhs_diff,
        deterministic_max_diff,
        deterministic_min_gap,
    })
}
