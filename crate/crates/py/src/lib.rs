//! Python bindings. Matrices cross the boundary as lists of rows.

use alphageo::bounds::{verify_bound, EstimatorTable};
use alphageo::geometry::{self, bayesian_divergence, eguchi_metric_fd};
use alphageo::manifold::{family_from_spec, prior_from_spec, FamilySpec, PriorSpec};
use alphageo::measures;
use alphageo::quadrature::{QuadratureGrid, QuadratureRule};
use alphageo::{AlphaOrder, BayesianModel, Error, FinitePmf, ThetaPoint};
use nalgebra::DMatrix;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::SingularInformation { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn pmf(p: Vec<f64>) -> PyResult<FinitePmf> {
    FinitePmf::new(p).map_err(py_err)
}

fn order(a: f64) -> PyResult<AlphaOrder> {
    AlphaOrder::new(a).map_err(py_err)
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[pyfunction]
fn entropy(p: Vec<f64>, alpha: f64) -> PyResult<f64> {
    Ok(measures::entropy(&pmf(p)?, order(alpha)?))
}

#[pyfunction]
fn kld(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    measures::kld(&pmf(p)?, &pmf(q)?).map_err(py_err)
}

#[pyfunction]
fn escort(p: Vec<f64>, alpha: f64) -> PyResult<Vec<f64>> {
    Ok(measures::escort(&pmf(p)?, order(alpha)?).map_err(py_err)?.probs().to_vec())
}

#[pyfunction]
fn relative_alpha_entropy(p: Vec<f64>, q: Vec<f64>, alpha: f64) -> PyResult<f64> {
    measures::relative_alpha_entropy(&pmf(p)?, &pmf(q)?, order(alpha)?).map_err(py_err)
}

#[pyfunction]
fn renyi_divergence(p: Vec<f64>, q: Vec<f64>, order: f64) -> PyResult<f64> {
    measures::renyi_divergence(&pmf(p)?, &pmf(q)?, order).map_err(py_err)
}

#[pyfunction]
fn bayesian_relative_alpha_entropy(
    p: Vec<f64>,
    lam: f64,
    q: Vec<f64>,
    lam2: f64,
    alpha: f64,
) -> PyResult<f64> {
    measures::bayesian_relative_alpha_entropy_parts(&pmf(p)?, lam, &pmf(q)?, lam2, order(alpha)?)
        .map_err(py_err)
}

/// A family with a prior, built from the same JSON objects used in configs.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: BayesianModel,
    spec: FamilySpec,
}

#[pymethods]
impl PyModel {
    #[new]
    fn new(family: &str, prior: &str) -> PyResult<Self> {
        let spec: FamilySpec =
            serde_json::from_str(family).map_err(|e| PyValueError::new_err(format!("family: {e}")))?;
        let pspec: PriorSpec =
            serde_json::from_str(prior).map_err(|e| PyValueError::new_err(format!("prior: {e}")))?;
        let pr = prior_from_spec(&pspec).map_err(py_err)?;
        let fam = family_from_spec(&spec, pr.domain().clone()).map_err(py_err)?;
        let inner = BayesianModel::new(fam, pr).map_err(py_err)?;
        Ok(PyModel { inner, spec })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.family().k()
    }

    fn pmf(&self, theta: Vec<f64>) -> PyResult<Vec<f64>> {
        let p = self.inner.family().pmf(&ThetaPoint::new(theta)).map_err(py_err)?;
        Ok(p.probs().to_vec())
    }

    fn prior_density(&self, theta: Vec<f64>) -> PyResult<f64> {
        self.inner.prior().density(&ThetaPoint::new(theta)).map_err(py_err)
    }

    fn divergence(&self, theta: Vec<f64>, theta2: Vec<f64>, alpha: f64) -> PyResult<f64> {
        measures::bayesian_relative_alpha_entropy(
            &self.inner,
            &ThetaPoint::new(theta),
            &ThetaPoint::new(theta2),
            order(alpha)?,
        )
        .map_err(py_err)
    }

    fn alpha_fim(&self, theta: Vec<f64>, alpha: f64) -> PyResult<Vec<Vec<f64>>> {
        let g = geometry::alpha_fim(self.inner.family(), &ThetaPoint::new(theta), order(alpha)?)
            .map_err(py_err)?;
        Ok(rows(g.entries()))
    }

    fn bayesian_metric(&self, theta: Vec<f64>, alpha: f64) -> PyResult<Vec<Vec<f64>>> {
        let g = geometry::bayesian_alpha_metric(&self.inner, &ThetaPoint::new(theta), order(alpha)?)
            .map_err(py_err)?;
        Ok(rows(g.entries()))
    }

    /// Finite-difference metric of the Bayesian divergence.
    #[pyo3(signature = (theta, alpha, h = 1e-3))]
    fn eguchi_metric(&self, theta: Vec<f64>, alpha: f64, h: f64) -> PyResult<Vec<Vec<f64>>> {
        let a = order(alpha)?;
        let div = bayesian_divergence(&self.inner, a);
        let e = eguchi_metric_fd(&div, self.inner.domain(), &ThetaPoint::new(theta), h)
            .map_err(py_err)?;
        Ok(rows(e.metric.entries()))
    }

    /// Integrated bound check with the family's built-in estimator.
    #[pyo3(signature = (alpha, rule = "simpson", n = 201))]
    fn verify_bound<'py>(
        &self,
        py: Python<'py>,
        alpha: f64,
        rule: &str,
        n: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let rule = match rule {
            "simpson" => QuadratureRule::Simpson,
            "trapezoid" => QuadratureRule::Trapezoid,
            other => return Err(PyValueError::new_err(format!("unknown rule {other:?}"))),
        };
        let grid = QuadratureGrid::new(rule, n, self.inner.domain()).map_err(py_err)?;
        let est = EstimatorTable::builtin(&self.spec).map_err(py_err)?;
        let r = verify_bound(&self.inner, order(alpha)?, &est, &grid).map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("alpha", r.alpha)?;
        d.set_item("lhs", rows(&r.lhs))?;
        d.set_item("rhs", rows(&r.rhs))?;
        d.set_item("gap_min_eig", r.gap_min_eig)?;
        d.set_item("pointwise_min_gap", r.pointwise_min_gap)?;
        d.set_item("jensen_gap_min_eig", r.jensen_gap_min_eig)?;
        d.set_item("status", r.status())?;
        d.set_item("step_status", r.step_status())?;
        Ok(d)
    }
}

#[pymodule]
#[pyo3(name = "alphageo")]
fn alphageo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(kld, m)?)?;
    m.add_function(wrap_pyfunction!(escort, m)?)?;
    m.add_function(wrap_pyfunction!(relative_alpha_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(renyi_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(bayesian_relative_alpha_entropy, m)?)?;
    m.add_class::<PyModel>()?;
    Ok(())
}
