//! Seeded random inputs for property checks and the `fuzz` task.

use rand::{Rng, SeedableRng};
use rand_distr::Exp1;
use rand_xoshiro::SplitMix64;

use crate::error::Result;
use crate::manifold::{BayesianModel, ParamDomain, ThetaPoint};
use crate::measures::{
    bayesian_relative_alpha_entropy, csiszar_f_divergence, entropy, escort, kld,
    kld_positive_measures, relative_alpha_entropy, relative_alpha_entropy_from_csiszar,
    renyi_divergence, AlphaOrder, FinitePmf, PositiveMeasure,
};

/// Entries below this are redrawn.
pub const MIN_ENTRY: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct FuzzRng(SplitMix64);

impl FuzzRng {
    pub fn new(seed: u64) -> Self {
        FuzzRng(SplitMix64::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.0.random::<f64>()
    }

    /// Normalized i.i.d. exponentials, redrawn until every entry is at least
    /// [`MIN_ENTRY`].
    pub fn random_pmf(&mut self, d: usize) -> FinitePmf {
        loop {
            let w: Vec<f64> = (0..d).map(|_| self.0.sample::<f64, _>(Exp1)).collect();
            let s: f64 = w.iter().sum();
            let p: Vec<f64> = w.iter().map(|v| v / s).collect();
            if p.iter().all(|v| *v >= MIN_ENTRY) {
                if let Ok(pmf) = FinitePmf::new(p) {
                    return pmf;
                }
            }
        }
    }

    /// Uniform point of the box shrunk by `margin` on every side.
    pub fn random_point(&mut self, domain: &ParamDomain, margin: f64) -> ThetaPoint {
        ThetaPoint::new(
            domain
                .bounds()
                .iter()
                .map(|&(lo, hi)| self.uniform(lo + margin, hi - margin))
                .collect(),
        )
    }

    /// Uniform point of a box shrunk by `margin` that also satisfies `keep`.
    pub fn random_point_where(
        &mut self,
        domain: &ParamDomain,
        margin: f64,
        keep: impl Fn(&ThetaPoint) -> bool,
    ) -> ThetaPoint {
        loop {
            let t = self.random_point(domain, margin);
            if keep(&t) {
                return t;
            }
        }
    }
}

/// Worst residuals of the divergence identities over a random set of pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceFuzzSummary {
    pub samples: usize,
    pub min_value: f64,
    /// Largest value among pairs with `max |p - q| < 1e-9` (identical pairs).
    pub max_value_at_equal: f64,
    /// Smallest value among pairs with `max |p - q| >= 1e-9`.
    pub min_value_at_distinct: f64,
    pub max_csiszar_residual: f64,
    pub max_renyi_residual: f64,
    pub max_uniform_residual: f64,
    pub max_continuity_gap: f64,
}

/// Draws `samples` pairs of pmfs on random alphabets of size 2..=`max_d` and
/// checks every divergence identity at each order in `alphas`. One pair in
/// ten is a pmf with itself.
pub fn fuzz_divergences(
    seed: u64,
    samples: usize,
    max_d: usize,
    alphas: &[AlphaOrder],
) -> Result<DivergenceFuzzSummary> {
    let mut rng = FuzzRng::new(seed);
    let mut s = DivergenceFuzzSummary {
        samples,
        min_value: f64::INFINITY,
        max_value_at_equal: 0.0,
        min_value_at_distinct: f64::INFINITY,
        max_csiszar_residual: 0.0,
        max_renyi_residual: 0.0,
        max_uniform_residual: 0.0,
        max_continuity_gap: 0.0,
    };
    let hi = AlphaOrder::new(1.0 + 1e-3)?;
    let lo = AlphaOrder::new(1.0 - 1e-3)?;
    for n in 0..samples {
        let d = 2 + (rng.uniform(0.0, (max_d - 1) as f64) as usize).min(max_d - 2);
        let p = rng.random_pmf(d);
        let q = if n % 10 == 0 { p.clone() } else { rng.random_pmf(d) };
        let dist = p
            .probs()
            .iter()
            .zip(q.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let u = FinitePmf::uniform(d)?;
        let k = kld(&p, &q)?;
        s.max_continuity_gap = s
            .max_continuity_gap
            .max((relative_alpha_entropy(&p, &q, hi)? - k).abs())
            .max((relative_alpha_entropy(&p, &q, lo)? - k).abs());
        for &a in alphas {
            let v = relative_alpha_entropy(&p, &q, a)?;
            s.min_value = s.min_value.min(v);
            if dist < 1e-9 {
                s.max_value_at_equal = s.max_value_at_equal.max(v);
            } else {
                s.min_value_at_distinct = s.min_value_at_distinct.min(v);
            }
            if !a.is_limit() {
                let via = relative_alpha_entropy_from_csiszar(csiszar_f_divergence(&p, &q, a)?, a);
                s.max_csiszar_residual = s.max_csiszar_residual.max((via - v).abs());
            }
            let r = renyi_divergence(&escort(&p, a)?, &escort(&q, a)?, 1.0 / a.value())?;
            s.max_renyi_residual = s.max_renyi_residual.max((r - v).abs());
            let ru = relative_alpha_entropy(&p, &u, a)?;
            s.max_uniform_residual = s
                .max_uniform_residual
                .max((ru - ((d as f64).ln() - entropy(&p, a))).abs());
        }
    }
    Ok(s)
}

/// Worst-case checks of the Bayesian divergence over random parameter pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesianFuzzSummary {
    pub samples: usize,
    pub min_value: f64,
    /// Largest `|D(theta, theta)|`.
    pub max_self_value: f64,
    /// Largest gap between the value at `1 +- 1e-3` and the unnormalized KLD.
    pub max_continuity_gap: f64,
}

/// Random `(theta, theta', alpha)` triples with `alpha` log-uniform on
/// `[0.2, 5]`, plus the self-divergence and the order-one continuity gap at
/// each pair.
pub fn fuzz_bayesian(m: &BayesianModel, seed: u64, samples: usize) -> Result<BayesianFuzzSummary> {
    let mut rng = FuzzRng::new(seed);
    let dom = m.domain();
    let mut s = BayesianFuzzSummary {
        samples,
        min_value: f64::INFINITY,
        max_self_value: 0.0,
        max_continuity_gap: 0.0,
    };
    let hi = AlphaOrder::new(1.0 + 1e-3)?;
    let lo = AlphaOrder::new(1.0 - 1e-3)?;
    for _ in 0..samples {
        let t = rng.random_point(dom, 0.0);
        let t2 = rng.random_point(dom, 0.0);
        let a = AlphaOrder::new(rng.uniform(0.2f64.ln(), 5f64.ln()).exp())?;
        s.min_value = s.min_value.min(bayesian_relative_alpha_entropy(m, &t, &t2, a)?);
        s.max_self_value = s
            .max_self_value
            .max(bayesian_relative_alpha_entropy(m, &t, &t, a)?.abs());
        let (p, l) = m.weighted_pmf(&t)?;
        let (q, l2) = m.weighted_pmf(&t2)?;
        let limit = kld_positive_measures(&PositiveMeasure::scaled(&p, l)?, &PositiveMeasure::scaled(&q, l2)?)?;
        for b in [hi, lo] {
            s.max_continuity_gap = s
                .max_continuity_gap
                .max((bayesian_relative_alpha_entropy(m, &t, &t2, b)? - limit).abs());
        }
    }
    Ok(s)
}
