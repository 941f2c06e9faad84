#![allow(dead_code)]

use alphageo::manifold::{family_from_spec, prior_from_spec, FamilySpec, PriorSpec};
use alphageo::{AlphaOrder, BayesianModel};

pub fn al(x: f64) -> AlphaOrder {
    AlphaOrder::new(x).unwrap()
}

pub fn model(f: FamilySpec, p: PriorSpec) -> BayesianModel {
    let p = prior_from_spec(&p).unwrap();
    let f = family_from_spec(&f, p.domain().clone()).unwrap();
    BayesianModel::new(f, p).unwrap()
}

pub fn unit_box(k: usize, lo: f64, hi: f64) -> Vec<[f64; 2]> {
    vec![[lo, hi]; k]
}

pub fn bern_uniform() -> BayesianModel {
    model(FamilySpec::Bernoulli, PriorSpec::UniformBox { domain: unit_box(1, 0.1, 0.9) })
}

pub fn bern_beta() -> BayesianModel {
    model(
        FamilySpec::Bernoulli,
        PriorSpec::TruncBeta { a: 2.0, b: 2.0, domain: unit_box(1, 0.1, 0.9) },
    )
}

pub fn cat_uniform() -> BayesianModel {
    model(FamilySpec::Categorical { d: 3 }, PriorSpec::UniformBox { domain: unit_box(2, 0.1, 0.4) })
}

pub fn cat_beta() -> BayesianModel {
    model(
        FamilySpec::Categorical { d: 3 },
        PriorSpec::TruncBeta { a: 2.0, b: 2.0, domain: unit_box(2, 0.1, 0.4) },
    )
}

/// Density 1 on [0.2, 0.8], rising linearly to 3 at both ends.
pub fn bern_bathtub() -> BayesianModel {
    model(
        FamilySpec::Bernoulli,
        PriorSpec::Tabulated { knots: vec![0.1, 0.2, 0.8, 0.9], values: vec![3.0, 1.0, 1.0, 3.0] },
    )
}

pub fn metric_configs() -> Vec<(&'static str, BayesianModel)> {
    vec![
        ("bernoulli/uniform", bern_uniform()),
        ("bernoulli/trunc_beta", bern_beta()),
        ("categorical/uniform", cat_uniform()),
        ("categorical/trunc_beta", cat_beta()),
    ]
}

// Direct sums, written independently of the library.

pub fn lit_rae(p: &[f64], q: &[f64], a: f64) -> f64 {
    let s = |f: &dyn Fn(usize) -> f64| (0..p.len()).map(f).sum::<f64>();
    a / (1.0 - a) * s(&|x| p[x] * q[x].powf(a - 1.0)).ln()
        - s(&|x| p[x].powf(a)).ln() / (1.0 - a)
        + s(&|x| q[x].powf(a)).ln()
}

pub fn lit_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * (a / b).ln()).sum()
}

pub fn lit_bayesian(p: &[f64], l: f64, q: &[f64], l2: f64, a: f64) -> f64 {
    let s = |f: &dyn Fn(usize) -> f64| (0..p.len()).map(f).sum::<f64>();
    l / (1.0 - a) * s(&|x| p[x] * (l2 * q[x]).powf(a - 1.0)).ln()
        - l * s(&|x| p[x].powf(a)).ln() / (a * (1.0 - a))
        + l * l.ln()
        - l
        + l2
        + l / a * s(&|x| q[x].powf(a)).ln()
}

pub fn lit_unnormalized_kl(p: &[f64], l: f64, q: &[f64], l2: f64) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| l * a * (l * a / (l2 * b)).ln() - l * a + l2 * b)
        .sum()
}
