//! Probability vectors, escort distributions and the entropy / divergence
//! family built on them.
//!
//! Everything here works in nats. Orders with `|alpha - 1| < 1e-6` are
//! treated as the Shannon / Kullback-Leibler limit and dispatched to the
//! exact limit formulas instead of evaluating the `1 / (1 - alpha)` terms.

use crate::error::{Error, Result};
use crate::manifold::{BayesianModel, ThetaPoint};

/// Smallest admissible probability or mass.
pub const PROB_FLOOR: f64 = 1e-12;
/// Tolerance on `sum(probs) == 1`.
pub const SUM_TOL: f64 = 1e-12;
/// Half-width of the band around 1 that selects the limit branch.
pub const LIMIT_BAND: f64 = 1e-6;

/// A strictly positive probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePmf {
    probs: Vec<f64>,
}

impl FinitePmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_masses(&probs)?;
        let total: f64 = probs.iter().sum();
        // accumulated rounding grows with the alphabet size
        let tol = SUM_TOL.max(probs.len() as f64 * f64::EPSILON);
        if (total - 1.0).abs() > tol {
            return Err(Error::domain(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(FinitePmf { probs })
    }

    /// Normalizes a vector of positive weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        check_masses(weights)?;
        let total: f64 = weights.iter().sum();
        FinitePmf::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::domain("alphabet size must be at least 2"));
        }
        FinitePmf::new(vec![1.0 / d as f64; d])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `sum_x p(x)^alpha`
    pub fn power_sum(&self, alpha: f64) -> f64 {
        self.probs.iter().map(|p| p.powf(alpha)).sum()
    }

    /// Expectation of a table of values under this pmf.
    pub fn expect(&self, values: &[f64]) -> f64 {
        self.probs.iter().zip(values).map(|(p, v)| p * v).sum()
    }
}

/// An unnormalized, strictly positive mass vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveMeasure {
    masses: Vec<f64>,
}

impl PositiveMeasure {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        check_masses(&masses)?;
        Ok(PositiveMeasure { masses })
    }

    /// `scale * p`, e.g. `lambda(theta) * p_theta`.
    pub fn scaled(p: &FinitePmf, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain(format!("scale {scale} must be positive")));
        }
        PositiveMeasure::new(p.probs().iter().map(|x| x * scale).collect())
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn normalized(&self) -> Result<FinitePmf> {
        FinitePmf::from_weights(&self.masses)
    }
}

fn check_masses(v: &[f64]) -> Result<()> {
    if v.len() < 2 {
        return Err(Error::domain(format!(
            "alphabet size {} is below 2",
            v.len()
        )));
    }
    if let Some((i, x)) = v
        .iter()
        .enumerate()
        .find(|(_, x)| !(x.is_finite() && **x >= PROB_FLOOR))
    {
        return Err(Error::domain(format!(
            "entry {i} = {x:e} is below the floor {PROB_FLOOR:e}"
        )));
    }
    Ok(())
}

fn same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::domain(format!("length mismatch: {a} vs {b}")));
    }
    Ok(())
}

/// Order of the Renyi / relative alpha-entropy family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaOrder {
    alpha: f64,
}

impl AlphaOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain(format!("alpha = {alpha} must be positive")));
        }
        Ok(AlphaOrder { alpha })
    }

    pub fn value(self) -> f64 {
        self.alpha
    }

    pub fn is_limit(self) -> bool {
        (self.alpha - 1.0).abs() < LIMIT_BAND
    }
}

/// Renyi entropy `H_alpha(p)`; Shannon entropy on the limit branch.
pub fn entropy(p: &FinitePmf, a: AlphaOrder) -> f64 {
    if a.is_limit() {
        -p.probs().iter().map(|x| x * x.ln()).sum::<f64>()
    } else {
        p.power_sum(a.value()).ln() / (1.0 - a.value())
    }
}

/// Kullback-Leibler divergence `sum p ln(p/q)`.
pub fn kld(p: &FinitePmf, q: &FinitePmf) -> Result<f64> {
    same_len(p.len(), q.len())?;
    Ok(p.probs()
        .iter()
        .zip(q.probs())
        .map(|(x, y)| x * (x / y).ln())
        .sum())
}

/// Relative entropy between positive measures,
/// `sum pt ln(pt/qt) - sum pt + sum qt`.
pub fn kld_positive_measures(pt: &PositiveMeasure, qt: &PositiveMeasure) -> Result<f64> {
    same_len(pt.masses().len(), qt.masses().len())?;
    let cross: f64 = pt
        .masses()
        .iter()
        .zip(qt.masses())
        .map(|(x, y)| x * (x / y).ln())
        .sum();
    Ok(cross - pt.total_mass() + qt.total_mass())
}

/// The alpha-escort `p^alpha / sum p^alpha`.
///
/// The floor applies to inputs only: escorts of admissible pmfs at large
/// orders can sit far below it, and are accepted while strictly positive.
pub fn escort(p: &FinitePmf, a: AlphaOrder) -> Result<FinitePmf> {
    if a.is_limit() {
        return Ok(p.clone());
    }
    let w: Vec<f64> = p.probs().iter().map(|x| x.powf(a.value())).collect();
    let total: f64 = w.iter().sum();
    let probs: Vec<f64> = w.iter().map(|x| x / total).collect();
    if let Some((i, x)) = probs.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::domain(format!(
            "escort entry {i} = {x:e} underflows at alpha = {}",
            a.value()
        )));
    }
    Ok(FinitePmf { probs })
}

/// Relative alpha-entropy (Sundaresan divergence) `I_alpha(p, q)`:
///
/// `alpha/(1-alpha) ln sum p q^(alpha-1) - 1/(1-alpha) ln sum p^alpha + ln sum q^alpha`.
///
/// Evaluated as `(alpha A - B) / (1 - alpha)` with
/// `A = ln(1 + sum q^(alpha-1) (p - q) / sum q^alpha)` and
/// `B = ln(1 + sum (p^alpha - q^alpha) / sum q^alpha)`, so the value is
/// exactly zero at `p = q`. Falls back to [`kld`] on the limit branch.
pub fn relative_alpha_entropy(p: &FinitePmf, q: &FinitePmf, a: AlphaOrder) -> Result<f64> {
    same_len(p.len(), q.len())?;
    if a.is_limit() {
        return kld(p, q);
    }
    let al = a.value();
    let sq = q.power_sum(al);
    let (mut da, mut db) = (0.0, 0.0);
    for (x, y) in p.probs().iter().zip(q.probs()) {
        da += y.powf(al - 1.0) * (x - y);
        db += x.powf(al) - y.powf(al);
    }
    Ok((al * (da / sq).ln_1p() - (db / sq).ln_1p()) / (1.0 - al))
}

/// Csiszar f-divergence `D_f(p^(alpha), q^(alpha))` with
/// `f(u) = sgn(1-alpha) (u^(1/alpha) - 1)`.
///
/// Undefined on the limit branch, where `f` degenerates to zero.
pub fn csiszar_f_divergence(p: &FinitePmf, q: &FinitePmf, a: AlphaOrder) -> Result<f64> {
    same_len(p.len(), q.len())?;
    if a.is_limit() {
        return Err(Error::domain(
            "csiszar form is degenerate at alpha = 1 (sgn(1 - alpha) = 0)",
        ));
    }
    let al = a.value();
    let sign = (1.0 - al).signum();
    let pe = escort(p, a)?;
    let qe = escort(q, a)?;
    Ok(pe
        .probs()
        .iter()
        .zip(qe.probs())
        .map(|(x, y)| y * sign * ((x / y).powf(1.0 / al) - 1.0))
        .sum())
}

/// Recovers `I_alpha` from the Csiszar form:
/// `alpha/(1-alpha) ln(sgn(1-alpha) D_f + 1)`.
pub fn relative_alpha_entropy_from_csiszar(d_f: f64, a: AlphaOrder) -> f64 {
    let al = a.value();
    al / (1.0 - al) * ((1.0 - al).signum() * d_f + 1.0).ln()
}

/// Renyi divergence `1/(order-1) ln sum p^order q^(1-order)`; KLD when the
/// order sits in the limit band.
pub fn renyi_divergence(p: &FinitePmf, q: &FinitePmf, order: f64) -> Result<f64> {
    same_len(p.len(), q.len())?;
    if !(order > 0.0 && order.is_finite()) {
        return Err(Error::domain(format!("order {order} must be positive")));
    }
    if (order - 1.0).abs() < LIMIT_BAND {
        return kld(p, q);
    }
    let s: f64 = p
        .probs()
        .iter()
        .zip(q.probs())
        .map(|(x, y)| x.powf(order) * y.powf(1.0 - order))
        .sum();
    Ok(s.ln() / (order - 1.0))
}

/// Bayesian relative alpha-entropy between `lambda * p` and `lambda2 * q`.
///
/// Implements
///
/// ```text
/// lambda/(1-alpha) ln sum p (lambda2 q)^(alpha-1) - lambda ln(sum p^alpha)/(alpha(1-alpha))
///     + lambda ln lambda - lambda + lambda2 + (lambda/alpha) ln sum q^alpha
/// ```
///
/// which vanishes on the diagonal and tends to the unnormalized KLD as
/// `alpha -> 1` (the limit branch returns that KLD directly). The first
/// three terms equal `(lambda/alpha) I_alpha(p, q) - lambda ln lambda2`, which
/// is how the value is computed.
pub fn bayesian_relative_alpha_entropy_parts(
    p: &FinitePmf,
    lambda: f64,
    q: &FinitePmf,
    lambda2: f64,
    a: AlphaOrder,
) -> Result<f64> {
    same_len(p.len(), q.len())?;
    for (name, l) in [("lambda(theta)", lambda), ("lambda(theta')", lambda2)] {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Prior(format!("{name} = {l} must be positive")));
        }
    }
    if a.is_limit() {
        return kld_positive_measures(
            &PositiveMeasure::scaled(p, lambda)?,
            &PositiveMeasure::scaled(q, lambda2)?,
        );
    }
    let mass = -lambda * ((lambda2 - lambda) / lambda).ln_1p() + (lambda2 - lambda);
    Ok(lambda / a.value() * relative_alpha_entropy(p, q, a)? + mass)
}

/// Variant with the uncorrected constant term, i.e. the value above plus
/// `2 lambda(theta)`. Diagnostics only; it does not vanish on the diagonal.
pub fn bayesian_relative_alpha_entropy_as_printed_parts(
    p: &FinitePmf,
    lambda: f64,
    q: &FinitePmf,
    lambda2: f64,
    a: AlphaOrder,
) -> Result<f64> {
    if a.is_limit() {
        return Err(Error::domain(
            "the uncorrected form has no separate limit branch",
        ));
    }
    Ok(bayesian_relative_alpha_entropy_parts(p, lambda, q, lambda2, a)? + 2.0 * lambda)
}

/// Bayesian relative alpha-entropy of `p~_theta` w.r.t. `p~_theta2` for a model.
pub fn bayesian_relative_alpha_entropy(
    model: &BayesianModel,
    theta: &ThetaPoint,
    theta2: &ThetaPoint,
    a: AlphaOrder,
) -> Result<f64> {
    let (p, l) = model.weighted_pmf(theta)?;
    let (q, l2) = model.weighted_pmf(theta2)?;
    bayesian_relative_alpha_entropy_parts(&p, l, &q, l2, a)
}

/// Diagnostic twin of [`bayesian_relative_alpha_entropy`] using the uncorrected constant.
pub fn bayesian_relative_alpha_entropy_as_printed(
    model: &BayesianModel,
    theta: &ThetaPoint,
    theta2: &ThetaPoint,
    a: AlphaOrder,
) -> Result<f64> {
    let (p, l) = model.weighted_pmf(theta)?;
    let (q, l2) = model.weighted_pmf(theta2)?;
    bayesian_relative_alpha_entropy_as_printed_parts(&p, l, &q, l2, a)
}
