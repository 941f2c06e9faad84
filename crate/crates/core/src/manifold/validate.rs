use super::{score_matrix, score_matrix_fd, BayesianModel, ThetaPoint, SCORE_STEP};
use crate::measures::PROB_FLOOR;
use crate::quadrature::{QuadratureGrid, QuadratureRule};

const ZERO_MEAN_TOL: f64 = 1e-10;
const FD_AGREEMENT_TOL: f64 = 1e-6;
const NORMALIZATION_TOL: f64 = 1e-6;
const POINTS_PER_AXIS: usize = 9;

/// Outcome of a single model check; `worst_residual` is the largest
/// violation seen (0 when nothing was measured).
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub worst_residual: f64,
    pub tolerance: f64,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Tracker {
    name: &'static str,
    tolerance: f64,
    worst: f64,
    failed: bool,
    detail: Option<String>,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tracker {
            name,
            tolerance,
            worst: 0.0,
            failed: false,
            detail: None,
        }
    }

    fn residual(&mut self, r: f64, at: &[f64]) {
        if r.is_nan() || r > self.worst {
            self.worst = if r.is_nan() { f64::INFINITY } else { r };
        }
        if !(r <= self.tolerance) && !self.failed {
            self.failed = true;
            self.detail = Some(format!("residual {r:e} at {at:?}"));
        }
    }

    fn fail(&mut self, msg: String) {
        if !self.failed {
            self.failed = true;
            self.detail = Some(msg);
        }
        self.worst = f64::INFINITY;
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            passed: !self.failed,
            worst_residual: self.worst,
            tolerance: self.tolerance,
            detail: self.detail,
        }
    }
}

/// Runs every model invariant on a grid over the parameter box and reports
/// worst-case residuals. Never fails; failures are recorded in the report.
pub fn validate_model(m: &BayesianModel) -> ValidationReport {
    let fam = m.family();
    let prior = m.prior();
    let dom = m.domain();

    let mut closed: Vec<ThetaPoint> = dom.corners(0.0).into_iter().map(ThetaPoint::new).collect();
    let interior = dom.interior_grid(POINTS_PER_AXIS);
    closed.extend(interior.iter().cloned());

    let mut validity = Tracker::new("pmf_validity", 1e-12);
    for t in &closed {
        let raw = fam.raw_masses(t);
        if raw.len() != fam.d() {
            validity.fail(format!("{} masses at {:?}", raw.len(), t.coords()));
            continue;
        }
        let low = raw.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(low >= PROB_FLOOR) {
            validity.fail(format!("mass {low} below floor at {:?}", t.coords()));
            continue;
        }
        validity.residual((raw.iter().sum::<f64>() - 1.0).abs(), t.coords());
    }

    let mut zero_mean = Tracker::new("score_zero_mean", ZERO_MEAN_TOL);
    let mut fd = Tracker::new("score_fd_agreement", FD_AGREEMENT_TOL);
    let analytic = fam.has_analytic_score();
    for t in &interior {
        let (p, s) = match (fam.pmf(t), score_matrix(fam, t)) {
            (Ok(p), Ok(s)) => (p, s),
            (Err(e), _) | (_, Err(e)) => {
                zero_mean.fail(e.to_string());
                continue;
            }
        };
        for mean in s.mean_under(&p) {
            zero_mean.residual(mean.abs(), t.coords());
        }
        if analytic && dom.margin(t.coords()) >= 2.0 * SCORE_STEP {
            match score_matrix_fd(fam, t, SCORE_STEP) {
                Ok(n) => fd.residual((&s.0 - &n.0).abs().max(), t.coords()),
                Err(e) => fd.fail(e.to_string()),
            }
        }
    }
    if !analytic {
        fd.detail = Some("no analytic score; scores are finite differences".into());
    }

    let mut positive = Tracker::new("prior_positive", 0.0);
    for t in &closed {
        if let Err(e) = prior.density(t) {
            positive.fail(e.to_string());
        }
    }

    let mut norm = Tracker::new("prior_normalization", NORMALIZATION_TOL);
    let n = match dom.dim() {
        1 => 4001,
        2 => 401,
        _ => 41,
    };
    match QuadratureGrid::new(QuadratureRule::Simpson, n, dom)
        .and_then(|g| g.integrate_scalar(|t| prior.density(t)))
    {
        Ok(mass) => norm.residual((mass - 1.0).abs(), &[]),
        Err(e) => norm.fail(e.to_string()),
    }

    let mut grad = Tracker::new("prior_log_gradient_fd", FD_AGREEMENT_TOL);
    for t in &interior {
        if dom.margin(t.coords()) < SCORE_STEP || !prior.is_smooth_at(t, 2.0 * SCORE_STEP) {
            continue;
        }
        let g = match prior.log_gradient(t) {
            Ok(g) => g,
            Err(e) => {
                grad.fail(e.to_string());
                continue;
            }
        };
        for (i, gi) in g.iter().enumerate() {
            let up = prior.density(&t.shifted(i, SCORE_STEP));
            let dn = prior.density(&t.shifted(i, -SCORE_STEP));
            match (up, dn) {
                (Ok(u), Ok(d)) => {
                    let num = (u.ln() - d.ln()) / (2.0 * SCORE_STEP);
                    grad.residual((num - gi).abs(), t.coords());
                }
                (Err(e), _) | (_, Err(e)) => grad.fail(e.to_string()),
            }
        }
    }

    ValidationReport {
        checks: vec![
            validity.finish(),
            zero_mean.finish(),
            fd.finish(),
            positive.finish(),
            norm.finish(),
            grad.finish(),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{
        family_from_spec, prior_from_spec, FamilyModel, FamilySpec, ParamDomain,
        ParametricFamily, PriorSpec,
    };
    use std::sync::Arc;

    fn uniform(lo: f64, hi: f64) -> crate::manifold::Prior {
        prior_from_spec(&PriorSpec::UniformBox {
            domain: vec![[lo, hi]],
        })
        .unwrap()
    }

    #[test]
    fn builtin_model_passes() {
        let dom = ParamDomain::interval(0.1, 0.9).unwrap();
        let m = BayesianModel::new(
            family_from_spec(&FamilySpec::Bernoulli, dom).unwrap(),
            uniform(0.1, 0.9),
        )
        .unwrap();
        let r = validate_model(&m);
        assert!(r.passed(), "{r:#?}");
        for c in &r.checks {
            assert!(c.worst_residual < 1e-8, "{c:?}");
        }
    }

    #[derive(Debug)]
    struct Broken;
    impl FamilyModel for Broken {
        fn masses(&self, t: &[f64]) -> Vec<f64> {
            vec![1.2 - t[0], t[0] - 0.2]
        }
    }

    #[test]
    fn negative_mass_is_flagged() {
        let dom = ParamDomain::interval(0.1, 0.9).unwrap();
        let fam = ParametricFamily::new("broken", 1, 2, dom, Arc::new(Broken)).unwrap();
        let r = validate_model(&BayesianModel::new(fam, uniform(0.1, 0.9)).unwrap());
        assert!(!r.check("pmf_validity").unwrap().passed);
    }

    #[derive(Debug)]
    struct OffScore;
    impl FamilyModel for OffScore {
        fn masses(&self, t: &[f64]) -> Vec<f64> {
            vec![1.0 - t[0], t[0]]
        }
        fn analytic_score(&self, t: &[f64]) -> Option<Vec<Vec<f64>>> {
            Some(vec![vec![-1.0 / (1.0 - t[0]) + 1e-3, 1.0 / t[0] + 1e-3]])
        }
    }

    #[test]
    fn wrong_analytic_score_is_flagged() {
        let dom = ParamDomain::interval(0.1, 0.9).unwrap();
        let fam = ParametricFamily::new("off", 1, 2, dom, Arc::new(OffScore)).unwrap();
        let r = validate_model(&BayesianModel::new(fam, uniform(0.1, 0.9)).unwrap());
        let c = r.check("score_fd_agreement").unwrap();
        assert!(!c.passed);
        assert!((c.worst_residual - 1e-3).abs() < 1e-6);
    }
}
