use serde::Serialize;

use super::config::{Task, ValidatedConfig};
use super::output::{fmt_coords, fmt_f64, fmt_matrix, CsvTable};
use crate::bounds::{reduction_suite, verify_bound, BoundReport, REDUCTION_TOL};
use crate::error::Result;
use crate::fuzz::{fuzz_bayesian, fuzz_divergences};
use crate::geometry::{
    alpha_fim, bayesian_alpha_metric, bayesian_divergence, dualistic_check, eguchi_metric_fd,
    prior_matrix, relative_alpha_entropy_metric,
};
use crate::measures::{
    bayesian_relative_alpha_entropy, bayesian_relative_alpha_entropy_as_printed,
    relative_alpha_entropy, AlphaOrder,
};

pub const DIVERGENCE_TOL: f64 = 1e-10;
pub const SELF_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const FD_REL_TOL: f64 = 1e-4;
pub const DUALISTIC_TOL: f64 = 1e-2;
pub const CONTINUITY_TOL: f64 = 5e-3;
const FUZZ_MAX_D: usize = 6;

/// What a task produced: its table, the invariants that failed, and any
/// bound reports (for the JSON summary).
#[derive(Debug, Clone)]
pub struct TaskOutcome {
    pub task: Task,
    pub table: CsvTable,
    pub failures: Vec<String>,
    pub bounds: Vec<BoundReport>,
}

impl TaskOutcome {
    fn new(task: Task, header: &[&'static str]) -> Self {
        TaskOutcome {
            task,
            table: CsvTable::new(header),
            failures: Vec::new(),
            bounds: Vec::new(),
        }
    }

    fn status(&mut self, ok: bool, what: impl FnOnce() -> String) -> String {
        if ok {
            "PASS".into()
        } else {
            self.failures.push(what());
            "FAIL".into()
        }
    }
}

pub fn run_task(task: Task, v: &ValidatedConfig) -> Result<TaskOutcome> {
    match task {
        Task::Divergence => divergence(v),
        Task::Metric => metric(v),
        Task::MetricFdCheck => metric_fd_check(v),
        Task::Bound => bound(v, &v.alphas),
        Task::Reductions => reductions(v),
        Task::Fuzz => fuzz(v),
    }
}

fn divergence(v: &ValidatedConfig) -> Result<TaskOutcome> {
    let mut out = TaskOutcome::new(
        Task::Divergence,
        &["task", "alpha", "theta", "theta2", "bayesian", "bayesian_as_printed", "relative_alpha_entropy", "status"],
    );
    let m = &v.model;
    for &a in &v.alphas {
        for t in &v.points {
            for t2 in &v.points {
                let b = bayesian_relative_alpha_entropy(m, t, t2, a)?;
                let printed = if a.is_limit() {
                    String::new()
                } else {
                    fmt_f64(bayesian_relative_alpha_entropy_as_printed(m, t, t2, a)?)
                };
                let fam = relative_alpha_entropy(&m.family().pmf(t)?, &m.family().pmf(t2)?, a)?;
                let ok = b >= -DIVERGENCE_TOL && (t != t2 || b.abs() <= SELF_TOL);
                let status = out.status(ok, || {
                    format!("divergence {b:e} at alpha={} {:?} {:?}", a.value(), t.coords(), t2.coords())
                });
                out.table.push(vec![
                    "divergence".into(),
                    fmt_f64(a.value()),
                    fmt_coords(t.coords()),
                    fmt_coords(t2.coords()),
                    fmt_f64(b),
                    printed,
                    fmt_f64(fam),
                    status,
                ]);
            }
        }
    }
    Ok(out)
}

fn metric(v: &ValidatedConfig) -> Result<TaskOutcome> {
    let mut out = TaskOutcome::new(
        Task::Metric,
        &["task", "alpha", "theta", "alpha_fim", "prior_matrix", "bayesian_metric", "relative_alpha_entropy_metric", "min_eig", "status"],
    );
    let m = &v.model;
    for &a in &v.alphas {
        for t in &v.points {
            let g = alpha_fim(m.family(), t, a)?;
            let j = prior_matrix(m.prior(), t)?;
            let b = bayesian_alpha_metric(m, t, a)?;
            let r = relative_alpha_entropy_metric(m.family(), t, a)?;
            let min_eig = [&g, &j, &b, &r]
                .iter()
                .map(|x| x.min_eigenvalue())
                .fold(f64::INFINITY, f64::min);
            let status = out.status(min_eig >= -PSD_TOL, || {
                format!("metric not PSD ({min_eig:e}) at alpha={} {:?}", a.value(), t.coords())
            });
            out.table.push(vec![
                "metric".into(),
                fmt_f64(a.value()),
                fmt_coords(t.coords()),
                fmt_matrix(&g.0),
                fmt_matrix(&j.0),
                fmt_matrix(&b.0),
                fmt_matrix(&r.0),
                fmt_f64(min_eig),
                status,
            ]);
        }
    }
    Ok(out)
}

fn metric_fd_check(v: &ValidatedConfig) -> Result<TaskOutcome> {
    let mut out = TaskOutcome::new(
        Task::MetricFdCheck,
        &["task", "alpha", "theta", "h", "fd_max_abs_err", "tolerance", "asymmetry", "dualistic_rel", "status"],
    );
    let m = &v.model;
    let h = v.config.fd.metric;
    let hc = v.config.fd.christoffel;
    for &a in &v.alphas {
        let div = bayesian_divergence(m, a);
        for t in &v.points {
            let fd = eguchi_metric_fd(&div, m.domain(), t, h)?;
            let an = bayesian_alpha_metric(m, t, a)?;
            let err = (&fd.metric.0 - &an.0).abs().max();
            let tol = FD_REL_TOL * (1.0 + an.0.abs().max());
            let dual = dualistic_check(&div, m.domain(), t, hc)?;
            let ok = err <= tol && dual.relative <= DUALISTIC_TOL;
            let status = out.status(ok, || {
                format!(
                    "fd check at alpha={} {:?}: err {err:e} (tol {tol:e}), dualistic {:e}",
                    a.value(),
                    t.coords(),
                    dual.relative
                )
            });
            out.table.push(vec![
                "metric_fd_check".into(),
                fmt_f64(a.value()),
                fmt_coords(t.coords()),
                fmt_f64(h),
                fmt_f64(err),
                fmt_f64(tol),
                fmt_f64(fd.asymmetry),
                fmt_f64(dual.relative),
                status,
            ]);
        }
    }
    Ok(out)
}

pub const BOUND_HEADER: &[&str] = &[
    "task",
    "alpha",
    "lhs",
    "rhs",
    "gap_min_eig",
    "pointwise_min_gap",
    "jensen_gap_min_eig",
    "step21_integral",
    "max_bias",
    "status",
    "step_status",
];

pub fn bound(v: &ValidatedConfig, alphas: &[AlphaOrder]) -> Result<TaskOutcome> {
    let mut out = TaskOutcome::new(Task::Bound, BOUND_HEADER);
    for &a in alphas {
        let r = verify_bound(&v.model, a, &v.estimator, &v.grid)?;
        if r.status() != "HOLDS" {
            out.failures.push(format!(
                "bound at alpha={}: {} (gap {:e}, max bias {:e})",
                a.value(),
                r.status(),
                r.gap_min_eig,
                r.unbiasedness.max_abs_bias
            ));
        }
        out.table.push(vec![
            "bound".into(),
            fmt_f64(a.value()),
            fmt_matrix(&r.lhs),
            fmt_matrix(&r.rhs),
            fmt_f64(r.gap_min_eig),
            fmt_f64(r.pointwise_min_gap),
            fmt_f64(r.jensen_gap_min_eig),
            fmt_matrix(&r.step21_integral),
            fmt_f64(r.unbiasedness.max_abs_bias),
            r.status().into(),
            r.step_status().into(),
        ]);
        out.bounds.push(r);
    }
    Ok(out)
}

fn check_rows(out: &mut TaskOutcome, name: &'static str, rows: Vec<(&'static str, f64, f64, bool)>) {
    for (check, value, tol, ok) in rows {
        let status = out.status(ok, || format!("{check} = {value:e} (tolerance {tol:e})"));
        out.table.push(vec![name.into(), check.into(), fmt_f64(value), fmt_f64(tol), status]);
    }
}

fn reductions(v: &ValidatedConfig) -> Result<TaskOutcome> {
    let mut out = TaskOutcome::new(Task::Reductions, &["task", "check", "value", "tolerance", "status"]);
    let r = reduction_suite(&v.model, &v.estimator, &v.grid, &v.alphas)?;
    check_rows(
        &mut out,
        "reductions",
        vec![
            ("classical_rhs_diff", r.classical_rhs_diff, REDUCTION_TOL, r.classical_rhs_diff <= REDUCTION_TOL),
            ("classical_lhs_diff", r.classical_lhs_diff, REDUCTION_TOL, r.classical_lhs_diff <= REDUCTION_TOL),
            ("uniform_prior_j_max", r.uniform_prior_j_max, 0.0, r.uniform_prior_j_max == 0.0),
            ("uniform_rhs_diff", r.uniform_rhs_diff, REDUCTION_TOL, r.uniform_rhs_diff <= REDUCTION_TOL),
            ("deterministic_max_diff", r.deterministic_max_diff, REDUCTION_TOL, r.deterministic_max_diff <= REDUCTION_TOL),
            ("deterministic_min_gap", r.deterministic_min_gap, -REDUCTION_TOL, r.deterministic_min_gap >= -REDUCTION_TOL),
        ],
    );
    Ok(out)
}

fn fuzz(v: &ValidatedConfig) -> Result<TaskOutcome> {
    let mut out = TaskOutcome::new(Task::Fuzz, &["task", "check", "value", "tolerance", "status"]);
    let n = v.fuzz_samples();
    let seed = v.config.seed;
    let d = fuzz_divergences(seed, n, FUZZ_MAX_D, &v.alphas)?;
    let b = fuzz_bayesian(&v.model, seed ^ 0x9e37_79b9_7f4a_7c15, n)?;
    check_rows(
        &mut out,
        "fuzz",
        vec![
            ("min_relative_alpha_entropy", d.min_value, -DIVERGENCE_TOL, d.min_value >= -DIVERGENCE_TOL),
            ("max_value_at_equal_pair", d.max_value_at_equal, DIVERGENCE_TOL, d.max_value_at_equal < DIVERGENCE_TOL),
            ("min_value_at_distinct_pair", d.min_value_at_distinct, DIVERGENCE_TOL, d.min_value_at_distinct >= DIVERGENCE_TOL),
            ("csiszar_identity_residual", d.max_csiszar_residual, DIVERGENCE_TOL, d.max_csiszar_residual <= DIVERGENCE_TOL),
            ("renyi_identity_residual", d.max_renyi_residual, DIVERGENCE_TOL, d.max_renyi_residual <= DIVERGENCE_TOL),
            ("uniform_identity_residual", d.max_uniform_residual, SELF_TOL, d.max_uniform_residual <= SELF_TOL),
            ("order_one_continuity_gap", d.max_continuity_gap, CONTINUITY_TOL, d.max_continuity_gap <= CONTINUITY_TOL),
            ("min_bayesian_divergence", b.min_value, -DIVERGENCE_TOL, b.min_value >= -DIVERGENCE_TOL),
            ("max_bayesian_self_divergence", b.max_self_value, SELF_TOL, b.max_self_value <= SELF_TOL),
            ("bayesian_continuity_gap", b.max_continuity_gap, CONTINUITY_TOL, b.max_continuity_gap <= CONTINUITY_TOL),
        ],
    );
    Ok(out)
}

/// `BoundReport` in JSON form.
#[derive(Debug, Clone, Serialize)]
pub struct BoundSummary {
    pub alpha: f64,
    pub lhs: Vec<Vec<f64>>,
    pub rhs: Vec<Vec<f64>>,
    pub information: Vec<Vec<f64>>,
    pub gap_min_eig: f64,
    pub pointwise_min_gap: f64,
    pub pointwise_worst_node: Option<Vec<f64>>,
    pub step21_integral: Vec<Vec<f64>>,
    pub jensen_gap_min_eig: f64,
    pub max_bias: f64,
    pub unbiased: bool,
    pub status: String,
    pub step_status: String,
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl From<&BoundReport> for BoundSummary {
    fn from(r: &BoundReport) -> Self {
        BoundSummary {
            alpha: r.alpha,
            lhs: rows(&r.lhs),
            rhs: rows(&r.rhs),
            information: rows(&r.information),
            gap_min_eig: r.gap_min_eig,
            pointwise_min_gap: r.pointwise_min_gap,
            pointwise_worst_node: r.pointwise_worst_node.as_ref().map(|t| t.coords().to_vec()),
            step21_integral: rows(&r.step21_integral),
            jensen_gap_min_eig: r.jensen_gap_min_eig,
            max_bias: r.unbiasedness.max_abs_bias,
            unbiased: r.unbiasedness.passed,
            status: r.status().into(),
            step_status: r.step_status().into(),
        }
    }
}

/// `(alpha, trace lhs, trace rhs, gap_min_eig)` per order.
pub fn plotdata(reports: &[BoundReport]) -> CsvTable {
    let mut t = CsvTable::new(&["alpha", "lhs_trace", "rhs_trace", "gap_min_eig"]);
    for r in reports {
        t.push(vec![
            fmt_f64(r.alpha),
            fmt_f64(r.lhs.trace()),
            fmt_f64(r.rhs.trace()),
            fmt_f64(r.gap_min_eig),
        ]);
    }
    t
}
