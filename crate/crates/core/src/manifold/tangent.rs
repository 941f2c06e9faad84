use super::{score_matrix, ParametricFamily, ThetaPoint};
use crate::error::{Error, Result};
use crate::measures::{escort, AlphaOrder, PositiveMeasure};

/// A tangent vector stored in its mixture (m) representation: a signed
/// mass vector over the alphabet summing to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    rep_m: Vec<f64>,
}

impl TangentVector {
    pub fn new(rep_m: Vec<f64>) -> Result<Self> {
        let scale: f64 = rep_m.iter().map(|x| x.abs()).sum();
        let total: f64 = rep_m.iter().sum();
        if rep_m.iter().any(|x| !x.is_finite()) || total.abs() > 1e-12 * (1.0 + scale) {
            return Err(Error::domain(format!(
                "m-representation sums to {total}, not 0"
            )));
        }
        Ok(TangentVector { rep_m })
    }

    /// `sum_i coeffs[i] d_i p_theta`, a tangent of the family at `t`.
    pub fn along_family(fam: &ParametricFamily, t: &ThetaPoint, coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() != fam.k() {
            return Err(Error::domain(format!(
                "{} coefficients for a {}-parameter family",
                coeffs.len(),
                fam.k()
            )));
        }
        let p = fam.pmf(t)?;
        let dp = score_matrix(fam, t)?.pmf_derivatives(&p);
        let rep_m = (0..fam.d())
            .map(|x| coeffs.iter().enumerate().map(|(i, c)| c * dp[(i, x)]).sum())
            .collect();
        TangentVector::new(rep_m)
    }

    pub fn rep_m(&self) -> &[f64] {
        &self.rep_m
    }

    /// Exponential representation `X^(m) / p~`.
    pub fn rep_e(&self, pt: &PositiveMeasure) -> Result<Vec<f64>> {
        if pt.masses().len() != self.rep_m.len() {
            return Err(Error::domain("tangent and measure lengths differ"));
        }
        Ok(self
            .rep_m
            .iter()
            .zip(pt.masses())
            .map(|(m, q)| m / q)
            .collect())
    }
}

/// `X^(alpha)(x) = (p^(alpha)(x) / p(x)) (X^(e)(x) - E_{p^(alpha)}[X^(e)])`
/// where `p` normalizes `pt`.
pub fn alpha_representation(
    v: &TangentVector,
    pt: &PositiveMeasure,
    a: AlphaOrder,
) -> Result<Vec<f64>> {
    let xe = v.rep_e(pt)?;
    let p = pt.normalized()?;
    let e = escort(&p, a)?;
    let mean = e.expect(&xe);
    Ok(xe
        .iter()
        .zip(e.probs())
        .zip(p.probs())
        .map(|((x, ex), px)| ex / px * (x - mean))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_tangent() {
        let v = TangentVector::new(vec![0.0; 3]).unwrap();
        let pt = PositiveMeasure::new(vec![0.2, 0.5, 0.6]).unwrap();
        let r = alpha_representation(&v, &pt, AlphaOrder::new(2.0).unwrap()).unwrap();
        assert_eq!(r, vec![0.0; 3]);
        assert!(TangentVector::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn uniform_measure_centres_the_e_rep() {
        let v = TangentVector::new(vec![0.3, -0.1, -0.2]).unwrap();
        let pt = PositiveMeasure::new(vec![0.5; 3]).unwrap();
        let xe = v.rep_e(&pt).unwrap();
        let mean = xe.iter().sum::<f64>() / 3.0;
        for a in [0.5, 3.0] {
            let r = alpha_representation(&v, &pt, AlphaOrder::new(a).unwrap()).unwrap();
            for (ri, xi) in r.iter().zip(&xe) {
                assert_abs_diff_eq!(*ri, xi - mean, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn limit_is_centred_e_rep_and_mean_free() {
        let v = TangentVector::new(vec![0.3, -0.1, -0.2]).unwrap();
        let pt = PositiveMeasure::new(vec![0.2, 0.5, 0.6]).unwrap();
        let xe = v.rep_e(&pt).unwrap();
        let p = pt.normalized().unwrap();
        let r = alpha_representation(&v, &pt, AlphaOrder::new(1.0).unwrap()).unwrap();
        let m = p.expect(&xe);
        for (ri, xi) in r.iter().zip(&xe) {
            assert_abs_diff_eq!(*ri, xi - m, epsilon = 1e-14);
        }
        for a in [0.5, 1.0, 2.0] {
            let r = alpha_representation(&v, &pt, AlphaOrder::new(a).unwrap()).unwrap();
            let e: f64 = r.iter().zip(pt.masses()).map(|(x, q)| x * q).sum();
            assert_abs_diff_eq!(e, 0.0, epsilon = 1e-14);
        }
    }
}
