use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ParamDomain, ThetaPoint};
use crate::error::{Error, Result};
use crate::measures::{FinitePmf, PROB_FLOOR};

/// Evaluator behind a [`ParametricFamily`].
///
/// `masses` returns the raw (possibly invalid) mass vector so that model
/// validation can report bad evaluators instead of failing on them.
pub trait FamilyModel: Send + Sync + fmt::Debug {
    fn masses(&self, theta: &[f64]) -> Vec<f64>;

    /// `score[i][x] = d/d theta_i ln p_theta(x)`, when known in closed form.
    fn analytic_score(&self, _theta: &[f64]) -> Option<Vec<Vec<f64>>> {
        None
    }
}

/// Built-in families, as they appear in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `p_theta = (1 - theta, theta)`.
    Bernoulli,
    /// Full simplex on `d` points; coordinates are the first `d - 1` masses.
    Categorical { d: usize },
    /// Binomial(n, theta) on `{0, ..., n}`.
    Binomial { n: usize },
    /// `q0(x) exp(theta . T(x)) / Z(theta)`; `features[x]` is `T(x)`.
    Tilted {
        base: Vec<f64>,
        features: Vec<Vec<f64>>,
    },
}

/// A smooth map `theta -> p_theta` from a parameter box into the simplex.
#[derive(Clone)]
pub struct ParametricFamily {
    name: String,
    k: usize,
    d: usize,
    domain: ParamDomain,
    model: Arc<dyn FamilyModel>,
    spec: Option<FamilySpec>,
}

impl fmt::Debug for ParametricFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricFamily")
            .field("name", &self.name)
            .field("k", &self.k)
            .field("d", &self.d)
            .field("domain", &self.domain)
            .finish()
    }
}

impl ParametricFamily {
    pub fn new(
        name: impl Into<String>,
        k: usize,
        d: usize,
        domain: ParamDomain,
        model: Arc<dyn FamilyModel>,
    ) -> Result<Self> {
        if domain.dim() != k {
            return Err(Error::domain(format!(
                "family has {k} parameters but the box has {}",
                domain.dim()
            )));
        }
        if d < 2 {
            return Err(Error::domain("alphabet size must be at least 2"));
        }
        Ok(ParametricFamily {
            name: name.into(),
            k,
            d,
            domain,
            model,
            spec: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Parameter dimension.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Alphabet size.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn domain(&self) -> &ParamDomain {
        &self.domain
    }

    pub fn spec(&self) -> Option<&FamilySpec> {
        self.spec.as_ref()
    }

    pub fn has_analytic_score(&self) -> bool {
        let probe = self.domain.interior_grid(1);
        self.model.analytic_score(probe[0].coords()).is_some()
    }

    pub fn raw_masses(&self, t: &ThetaPoint) -> Vec<f64> {
        self.model.masses(t.coords())
    }

    pub(crate) fn raw_score(&self, t: &ThetaPoint) -> Option<Vec<Vec<f64>>> {
        self.model.analytic_score(t.coords())
    }

    /// Evaluates `p_theta`; the point must lie in the closed box.
    pub fn pmf(&self, t: &ThetaPoint) -> Result<FinitePmf> {
        self.domain.check_dim(t)?;
        if !self.domain.contains(t.coords()) {
            return Err(Error::domain(format!(
                "point {:?} lies outside the parameter box",
                t.coords()
            )));
        }
        self.pmf_unchecked(t)
    }

    /// Evaluates `p_theta` without the box check (finite-difference stencils).
    pub(crate) fn pmf_unchecked(&self, t: &ThetaPoint) -> Result<FinitePmf> {
        let m = self.model.masses(t.coords());
        if m.len() != self.d {
            return Err(Error::domain(format!(
                "evaluator returned {} masses, expected {}",
                m.len(),
                self.d
            )));
        }
        FinitePmf::new(m)
    }

    /// Checks that the family is a valid pmf on the box widened by `pad`.
    ///
    /// Exact for the built-ins, whose smallest mass over a box is attained
    /// at a corner.
    pub fn check_box_safe(&self, pad: f64) -> Result<()> {
        for c in self.domain.corners(pad) {
            let m = self.model.masses(&c);
            let bad = m.iter().any(|x| !(x.is_finite() && *x >= PROB_FLOOR));
            if bad || (m.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::domain(format!(
                    "family `{}` is not a valid pmf at {c:?} (box must keep a margin of {pad:e})",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug)]
struct Bernoulli;

impl FamilyModel for Bernoulli {
    fn masses(&self, t: &[f64]) -> Vec<f64> {
        vec![1.0 - t[0], t[0]]
    }

    fn analytic_score(&self, t: &[f64]) -> Option<Vec<Vec<f64>>> {
        Some(vec![vec![-1.0 / (1.0 - t[0]), 1.0 / t[0]]])
    }
}

#[derive(Debug)]
struct Categorical {
    d: usize,
}

impl FamilyModel for Categorical {
    fn masses(&self, t: &[f64]) -> Vec<f64> {
        let mut m = t.to_vec();
        m.push(1.0 - t.iter().sum::<f64>());
        m
    }

    fn analytic_score(&self, t: &[f64]) -> Option<Vec<Vec<f64>>> {
        let last = 1.0 - t.iter().sum::<f64>();
        Some(
            (0..self.d - 1)
                .map(|i| {
                    let mut row = vec![0.0; self.d];
                    row[i] = 1.0 / t[i];
                    row[self.d - 1] = -1.0 / last;
                    row
                })
                .collect(),
        )
    }
}

#[derive(Debug)]
struct Binomial {
    n: usize,
    ln_choose: Vec<f64>,
}

impl Binomial {
    fn new(n: usize) -> Self {
        let mut ln_choose = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        for x in 0..=n {
            if x > 0 {
                acc += ((n - x + 1) as f64).ln() - (x as f64).ln();
            }
            ln_choose.push(acc);
        }
        Binomial { n, ln_choose }
    }
}

impl FamilyModel for Binomial {
    fn masses(&self, t: &[f64]) -> Vec<f64> {
        let th = t[0];
        if !(th > 0.0 && th < 1.0) {
            // outside the natural parameter range: mark as invalid
            return vec![f64::NAN; self.n + 1];
        }
        (0..=self.n)
            .map(|x| {
                (self.ln_choose[x] + x as f64 * th.ln() + (self.n - x) as f64 * (1.0 - th).ln())
                    .exp()
            })
            .collect()
    }

    fn analytic_score(&self, t: &[f64]) -> Option<Vec<Vec<f64>>> {
        let th = t[0];
        Some(vec![(0..=self.n)
            .map(|x| x as f64 / th - (self.n - x) as f64 / (1.0 - th))
            .collect()])
    }
}

#[derive(Debug)]
struct Tilted {
    base: Vec<f64>,
    features: Vec<Vec<f64>>,
}

impl Tilted {
    fn weights(&self, t: &[f64]) -> Vec<f64> {
        let logits: Vec<f64> = self
            .base
            .iter()
            .zip(&self.features)
            .map(|(q, f)| q.ln() + f.iter().zip(t).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let mx = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logits.iter().map(|l| (l - mx).exp()).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    }
}

impl FamilyModel for Tilted {
    fn masses(&self, t: &[f64]) -> Vec<f64> {
        self.weights(t)
    }

    fn analytic_score(&self, t: &[f64]) -> Option<Vec<Vec<f64>>> {
        let p = self.weights(t);
        let k = t.len();
        Some(
            (0..k)
                .map(|i| {
                    let mean: f64 = p.iter().zip(&self.features).map(|(px, f)| px * f[i]).sum();
                    self.features.iter().map(|f| f[i] - mean).collect()
                })
                .collect(),
        )
    }
}

/// Builds a built-in family on the given parameter box.
pub fn family_from_spec(spec: &FamilySpec, domain: ParamDomain) -> Result<ParametricFamily> {
    let (name, k, d, model): (String, usize, usize, Arc<dyn FamilyModel>) = match spec {
        FamilySpec::Bernoulli => ("bernoulli".into(), 1, 2, Arc::new(Bernoulli)),
        FamilySpec::Categorical { d } => {
            if *d < 2 {
                return Err(Error::config("family.d", "categorical needs d >= 2"));
            }
            (format!("categorical({d})"), d - 1, *d, Arc::new(Categorical { d: *d }))
        }
        FamilySpec::Binomial { n } => {
            if *n < 1 {
                return Err(Error::config("family.n", "binomial needs n >= 1"));
            }
            (format!("binomial({n})"), 1, n + 1, Arc::new(Binomial::new(*n)))
        }
        FamilySpec::Tilted { base, features } => {
            let d = base.len();
            if d < 2 {
                return Err(Error::config("family.base", "needs at least 2 entries"));
            }
            if let Some(i) = base.iter().position(|q| !(q.is_finite() && *q > 0.0)) {
                return Err(Error::config(format!("family.base[{i}]"), "must be positive"));
            }
            if features.len() != d {
                return Err(Error::config(
                    "family.features",
                    format!("expected {d} rows, one per outcome"),
                ));
            }
            let k = features[0].len();
            if k == 0 {
                return Err(Error::config("family.features[0]", "empty feature vector"));
            }
            for (x, row) in features.iter().enumerate() {
                if row.len() != k || row.iter().any(|v| !v.is_finite()) {
                    return Err(Error::config(
                        format!("family.features[{x}]"),
                        format!("expected {k} finite values"),
                    ));
                }
            }
            let total: f64 = base.iter().sum();
            let model = Tilted {
                base: base.iter().map(|q| q / total).collect(),
                features: features.clone(),
            };
            ("tilted".into(), k, d, Arc::new(model))
        }
    };
    if domain.dim() != k {
        return Err(Error::config(
            "prior.domain",
            format!("family `{name}` has {k} parameters but the box has {}", domain.dim()),
        ));
    }
    let mut fam = ParametricFamily::new(name, k, d, domain, model)?;
    fam.spec = Some(spec.clone());
    Ok(fam)
}
