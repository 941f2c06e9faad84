//! Small dense symmetric-matrix helpers (k <= 4 in practice).

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Inversion is refused above this eigenvalue ratio.
pub const CONDITION_LIMIT: f64 = 1e12;

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// `max |m - m^T|`, scaled by `max(1, max |m|)`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.abs().max().max(1.0);
    (m - m.transpose()).abs().max() / scale
}

/// Eigenvalues of the symmetric part, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(symmetrize(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m)[0]
}

/// `max |lambda| / min |lambda|` of the symmetric part.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let ev = symmetric_eigenvalues(m);
    let hi = ev.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let lo = ev.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Inverse of a symmetric matrix through its eigendecomposition.
pub fn inverse_symmetric(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let hi = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let lo = eig
        .eigenvalues
        .iter()
        .map(|v| v.abs())
        .fold(f64::INFINITY, f64::min);
    let condition = if lo == 0.0 { f64::INFINITY } else { hi / lo };
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::SingularInformation { condition });
    }
    let q = &eig.eigenvectors;
    let inv_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v));
    Ok(symmetrize(&(q * inv_diag * q.transpose())))
}

/// `v^T m^-1 v`
pub fn inverse_quadratic_form(m: &DMatrix<f64>, v: &[f64]) -> Result<f64> {
    let inv = inverse_symmetric(m)?;
    let n = v.len();
    Ok((0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| v[i] * inv[(i, j)] * v[j])
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let inv = inverse_symmetric(&m).unwrap();
        let id = &m * &inv;
        assert!((id - DMatrix::identity(2, 2)).abs().max() < 1e-14);
        assert!((inverse_quadratic_form(&m, &[1.0, 0.0]).unwrap() - 3.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn singular_is_refused() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            inverse_symmetric(&m),
            Err(Error::SingularInformation { .. })
        ));
    }

    #[test]
    fn eigen_helpers() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -1.0]);
        assert_eq!(symmetric_eigenvalues(&m), vec![-1.0, 2.0]);
        assert_eq!(condition_number(&m), 2.0);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert_eq!(asymmetry(&a), 1.0);
    }
}
