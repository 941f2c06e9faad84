use nalgebra::DMatrix;

use super::{ParametricFamily, ThetaPoint, SCORE_STEP};
use crate::error::{Error, Result};
use crate::measures::{escort, AlphaOrder, FinitePmf};

/// `entries[(i, x)] = d/d theta_i ln p_theta(x)`, shape `k x d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix(pub DMatrix<f64>);

impl ScoreMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.nrows()
    }

    pub fn d(&self) -> usize {
        self.0.ncols()
    }

    /// `d/d theta_i p_theta(x) = p(x) score[i][x]`
    pub fn pmf_derivatives(&self, p: &FinitePmf) -> DMatrix<f64> {
        let mut m = self.0.clone();
        for (x, px) in p.probs().iter().enumerate() {
            m.column_mut(x).scale_mut(*px);
        }
        m
    }

    /// `E_q[score_i]` for each row.
    pub fn mean_under(&self, q: &FinitePmf) -> Vec<f64> {
        (0..self.k())
            .map(|i| q.probs().iter().enumerate().map(|(x, w)| w * self.0[(i, x)]).sum())
            .collect()
    }
}

/// `entries[(i, x)] = d_i^(alpha)(p_theta(x))`, shape `k x d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaScoreMatrix(pub DMatrix<f64>);

impl AlphaScoreMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Scores at `t`: closed form when the family provides one, otherwise
/// central differences of `ln p_theta` (which need `2 SCORE_STEP` of margin).
pub fn score_matrix(fam: &ParametricFamily, t: &ThetaPoint) -> Result<ScoreMatrix> {
    fam.domain().check_dim(t)?;
    match fam.raw_score(t) {
        Some(rows) => {
            if !fam.domain().contains(t.coords()) {
                return Err(Error::domain(format!(
                    "point {:?} lies outside the parameter box",
                    t.coords()
                )));
            }
            if rows.len() != fam.k() || rows.iter().any(|r| r.len() != fam.d()) {
                return Err(Error::domain("analytic score has the wrong shape"));
            }
            Ok(ScoreMatrix(DMatrix::from_fn(fam.k(), fam.d(), |i, x| {
                rows[i][x]
            })))
        }
        None => score_matrix_fd(fam, t, SCORE_STEP),
    }
}

/// Five-point central-difference scores with step `h` (needs `2h` of margin).
pub fn score_matrix_fd(fam: &ParametricFamily, t: &ThetaPoint, h: f64) -> Result<ScoreMatrix> {
    fam.domain().require_margin(t, 2.0 * h)?;
    let mut m = DMatrix::zeros(fam.k(), fam.d());
    for i in 0..fam.k() {
        let p2 = fam.pmf_unchecked(&t.shifted(i, 2.0 * h))?;
        let p1 = fam.pmf_unchecked(&t.shifted(i, h))?;
        let m1 = fam.pmf_unchecked(&t.shifted(i, -h))?;
        let m2 = fam.pmf_unchecked(&t.shifted(i, -2.0 * h))?;
        for x in 0..fam.d() {
            let ln = |q: &crate::measures::FinitePmf| q.probs()[x].ln();
            m[(i, x)] = (8.0 * (ln(&p1) - ln(&m1)) - (ln(&p2) - ln(&m2))) / (12.0 * h);
        }
    }
    Ok(ScoreMatrix(m))
}

/// `(p^(alpha)(x) / p(x)) (score_i(x) - E_{p^(alpha)}[score_i])`
pub fn alpha_score_matrix(
    fam: &ParametricFamily,
    t: &ThetaPoint,
    a: AlphaOrder,
) -> Result<AlphaScoreMatrix> {
    let p = fam.pmf(t)?;
    let s = score_matrix(fam, t)?;
    let e = escort(&p, a)?;
    let means = s.mean_under(&e);
    let m = DMatrix::from_fn(s.k(), s.d(), |i, x| {
        e.probs()[x] / p.probs()[x] * (s.0[(i, x)] - means[i])
    });
    Ok(AlphaScoreMatrix(m))
}
