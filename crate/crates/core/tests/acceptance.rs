//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero on any FAIL.

mod common;

use std::path::Path;
use std::process::Command;

use alphageo::bounds::*;
use alphageo::fuzz::{fuzz_bayesian, fuzz_divergences, FuzzRng};
use alphageo::geometry::*;
use alphageo::manifold::{alpha_representation, TangentVector};
use alphageo::measures::*;
use alphageo::quadrature::{QuadratureGrid, QuadratureRule};
use alphageo::{BayesianModel, Result, ThetaPoint};
use common::*;

type Outcome = Result<(bool, String)>;

fn pmf(v: &[f64]) -> FinitePmf {
    FinitePmf::new(v.to_vec()).unwrap()
}

fn simpson201(m: &BayesianModel) -> Result<QuadratureGrid> {
    QuadratureGrid::new(QuadratureRule::Simpson, 201, m.domain())
}

fn identity_estimator(m: &BayesianModel) -> Result<EstimatorTable> {
    EstimatorTable::builtin(m.family().spec().expect("built-in family"))
}

fn divergence_fixtures() -> Outcome {
    let v = relative_alpha_entropy(&pmf(&[0.5, 0.5]), &pmf(&[0.25, 0.75]), al(2.0))?;
    let fixture = (v - 1.25f64.ln()).abs();
    let s = fuzz_divergences(20240611, 10_000, 6, &[al(0.3), al(0.5), al(2.0), al(5.0)])?;
    let ok = fixture <= 1e-12 && s.max_csiszar_residual <= 1e-10 && s.max_renyi_residual <= 1e-10;
    Ok((
        ok,
        format!(
            "|I_2 - ln 1.25| = {fixture:.1e}; csiszar {:.1e}, renyi {:.1e} over {} pairs",
            s.max_csiszar_residual, s.max_renyi_residual, s.samples
        ),
    ))
}

fn bayesian_divergence_properties() -> Outcome {
    let mut min: f64 = f64::INFINITY;
    let mut self_max: f64 = 0.0;
    let mut cont: f64 = 0.0;
    let mut n = 0;
    for (i, (_, m)) in metric_configs().into_iter().enumerate() {
        let s = fuzz_bayesian(&m, 1000 + i as u64, 2500)?;
        min = min.min(s.min_value);
        self_max = self_max.max(s.max_self_value);
        cont = cont.max(s.max_continuity_gap);
        n += s.samples;
    }
    let m = bern_uniform();
    let (t, t2) = (ThetaPoint::scalar(0.3), ThetaPoint::scalar(0.6));
    let mut fixture: f64 = 0.0;
    for a in [1.0 - 1e-3, 1.0 + 1e-3] {
        fixture = fixture.max((bayesian_relative_alpha_entropy(&m, &t, &t2, al(a))? - 0.229609).abs());
    }
    let ok = min >= -1e-10 && self_max <= 1e-12 && cont <= 5e-3 && fixture <= 5e-3;
    Ok((
        ok,
        format!(
            "{n} triples: min {min:.2e}, self {self_max:.1e}, order-one gap {cont:.1e}, fixture gap {fixture:.1e}"
        ),
    ))
}

fn metric_cross_validation() -> Outcome {
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for (_, m) in metric_configs() {
        for a in [0.5, 2.0] {
            let div = bayesian_divergence(&m, al(a));
            let mut rng = FuzzRng::new(42);
            for _ in 0..25 {
                let t = rng.random_point(m.domain(), 2.0 * h);
                let fd = eguchi_metric_fd(&div, m.domain(), &t, h)?;
                let an = bayesian_alpha_metric(&m, &t, al(a))?;
                worst = worst.max((&fd.metric.0 - &an.0).abs().max() / (1.0 + an.0.abs().max()));
            }
        }
    }
    let b = bern_beta();
    let t = ThetaPoint::scalar(0.2);
    let fd = eguchi_metric_fd(&bayesian_divergence(&b, al(2.0)), b.domain(), &t, h)?.metric.0[(0, 0)];
    let an = bayesian_alpha_metric(&b, &t, al(2.0))?.0[(0, 0)];
    let fixture = (fd / 16.5002 - 1.0).abs().max((an / 16.5002 - 1.0).abs());
    Ok((
        worst <= 1e-4 && fixture <= 1e-3,
        format!("worst relative FD error {worst:.2e} over 200 points; fixture fd {fd:.6} analytic {an:.6}"),
    ))
}

fn bound_fixtures() -> Outcome {
    let u = bern_uniform();
    let g = simpson201(&u)?;
    let est = identity_estimator(&u)?;
    let r1 = verify_bound(&u, al(1.0), &est, &g)?;
    let r2 = verify_bound(&u, al(2.0), &est, &g)?;
    let b = bern_beta();
    let rb = verify_bound(&b, al(1.0), &est, &simpson201(&b)?)?;
    let near = |x: f64, y: f64, tol: f64| (x - y).abs() <= tol;
    let ok = near(r1.lhs[(0, 0)], 0.2458333, 1e-6)
        && near(r1.rhs[(0, 0)], 0.1820478, 1e-6)
        && r1.gap_min_eig > 0.0
        && near(r2.lhs[(0, 0)], 0.4714333, 1e-6)
        && near(r2.rhs[(0, 0)], 0.3440722, 1e-6)
        && r2.gap_min_eig > 0.0
        && near(rb.rhs[(0, 0)], 1.0 / 12.676678, 1e-5)
        && rb.gap_min_eig > 0.0;
    Ok((
        ok,
        format!(
            "uniform a=1 {:.7}/{:.7}, a=2 {:.7}/{:.7}, trunc_beta a=1 rhs {:.7} gap {:.2e}",
            r1.lhs[(0, 0)],
            r1.rhs[(0, 0)],
            r2.lhs[(0, 0)],
            r2.rhs[(0, 0)],
            rb.rhs[(0, 0)],
            rb.gap_min_eig
        ),
    ))
}

fn proof_step_audit() -> Outcome {
    let u = bern_uniform();
    let r = verify_bound(&u, al(1.0), &identity_estimator(&u)?, &simpson201(&u)?)?;
    let step = r.step21_integral[(0, 0)];
    let ok = (step - 0.1258667).abs() <= 1e-6
        && step < r.rhs[(0, 0)]
        && r.step_status() == "STEP21_VIOLATED"
        && r.gap_min_eig > 0.0;
    Ok((
        ok,
        format!(
            "intermediate {step:.7} < rhs {:.7}: {}, end-to-end gap {:.4e} ({})",
            r.rhs[(0, 0)],
            r.step_status(),
            r.gap_min_eig,
            r.status()
        ),
    ))
}

fn reductions() -> Outcome {
    let mut ok = true;
    let mut classical: f64 = 0.0;
    let mut j: f64 = 0.0;
    for m in [bern_uniform(), bern_beta()] {
        let g = simpson201(&m)?;
        let est = identity_estimator(&m)?;
        let s = reduction_suite(&m, &est, &g, &[al(0.5), al(2.0)])?;
        ok &= s.passed();
        j = j.max(s.uniform_prior_j_max);
        // classical Bayesian pipeline for bernoulli, written out by hand
        let (mut info, mut lhs) = (0.0, 0.0);
        for (t, w) in g.nodes().iter().zip(g.weights()) {
            let th = t.coords()[0];
            let l = m.prior().density(t)?;
            let dl = m.prior().log_gradient(t)?[0];
            info += w * l * (1.0 / (th * (1.0 - th)) + dl * dl);
            lhs += w * l * l * th * (1.0 - th);
        }
        let r = verify_bound(&m, al(1.0), &est, &g)?;
        classical = classical
            .max((r.rhs[(0, 0)] - 1.0 / info).abs())
            .max((r.lhs[(0, 0)] - lhs).abs());
    }
    let c = cat_uniform();
    let cg = QuadratureGrid::new(QuadratureRule::Trapezoid, 31, c.domain())?;
    let cs = reduction_suite(&c, &identity_estimator(&c)?, &cg, &[al(2.0)])?;
    ok &= cs.passed();
    classical = classical.max(cs.classical_rhs_diff).max(cs.classical_lhs_diff);
    let u = bern_uniform();
    let est = identity_estimator(&u)?;
    let mut det: f64 = 0.0;
    for i in 0..10 {
        let th = 0.1 + 0.8 * (i as f64 + 0.5) / 10.0;
        let (var, crlb) = deterministic_crlb(u.family(), &ThetaPoint::scalar(th), &est)?;
        let want = th * (1.0 - th);
        det = det.max((var[(0, 0)] - want).abs()).max((crlb[(0, 0)] - want).abs());
    }
    ok &= classical <= 1e-9 && j == 0.0 && det <= 1e-12;
    Ok((
        ok,
        format!("classical pipeline diff {classical:.1e}, max |J| under uniform {j:e}, deterministic {det:.1e}"),
    ))
}

fn flat_part(t: &ThetaPoint) -> bool {
    t.coords()[0] > 0.2 && t.coords()[0] < 0.8
}

fn variance_differential() -> Outcome {
    let m = bern_bathtub();
    let mut slack = f64::INFINITY;
    let mut eq: f64 = 0.0;
    for a in [0.5, 1.0, 2.0] {
        let mut rng = FuzzRng::new(11);
        for _ in 0..100 {
            let t = rng.random_point_where(m.domain(), 0.0, flat_part);
            let obs = ObservableTable::new(vec![rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)])?;
            slack = slack.min(weighted_variance(&m, &t, al(a), &obs)? - differential_norm_sq(&m, &t, al(a), &obs)?);
        }
        for _ in 0..20 {
            let t = rng.random_point_where(m.domain(), 0.0, flat_part);
            let (p, l) = m.weighted_pmf(&t)?;
            let y = TangentVector::along_family(m.family(), &t, &[rng.uniform(-2.0, 2.0)])?;
            let obs = ObservableTable::new(alpha_representation(&y, &PositiveMeasure::scaled(&p, l)?, al(a))?)?;
            eq = eq.max((weighted_variance(&m, &t, al(a), &obs)? - differential_norm_sq(&m, &t, al(a), &obs)?).abs());
        }
    }
    Ok((
        slack >= -1e-8 && eq <= 1e-8,
        format!("bernoulli, unit prior on (0.2, 0.8), a in {{0.5, 1, 2}}: min slack {slack:.2e}, equality residual {eq:.1e}"),
    ))
}

fn dualistic() -> Outcome {
    let h = 1e-2;
    let mut worst: f64 = 0.0;
    for m in [bern_uniform(), bern_beta()] {
        for a in [0.5, 2.0] {
            let div = bayesian_divergence(&m, al(a));
            let mut rng = FuzzRng::new(3);
            for _ in 0..10 {
                let t = rng.random_point(m.domain(), 4.0 * h);
                worst = worst.max(dualistic_check(&div, m.domain(), &t, h)?.relative);
            }
        }
    }
    Ok((worst <= 1e-2, format!("worst relative residual {worst:.2e} at 40 points")))
}

fn quadrature_order() -> Outcome {
    let m = bern_uniform();
    let exact = 1.25 * 2.0 * 9f64.ln();
    let rate = |rule| -> Result<f64> {
        let err = |n| -> Result<f64> {
            let g = QuadratureGrid::new(rule, n, m.domain())?;
            Ok((expected_information(&m, al(1.0), &g)?[(0, 0)] - exact).abs())
        };
        Ok((err(101)? / err(201)?).log2())
    };
    let (s, t) = (rate(QuadratureRule::Simpson)?, rate(QuadratureRule::Trapezoid)?);
    Ok((s >= 3.8 && t >= 1.9, format!("simpson {s:.3}, trapezoid {t:.3}")))
}

fn determinism() -> Outcome {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = tempfile::tempdir().map_err(|e| alphageo::Error::Io(e.to_string()))?;
    let mut names: Vec<_> = std::fs::read_dir(&configs)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
    names.sort();
    let mut files = 0;
    let mut ok = true;
    for p in names.iter().filter(|p| p.extension().is_some_and(|x| x == "json")) {
        let stem = p.file_stem().unwrap().to_string_lossy().to_string();
        let mut outs = Vec::new();
        for rep in 0..2 {
            let d = tmp.path().join(format!("{stem}{rep}"));
            let st = Command::new(env!("CARGO_BIN_EXE_alphageo"))
                .arg("run")
                .arg(p)
                .arg("--out")
                .arg(&d)
                .env("RUST_LOG", "off")
                .output()?;
            ok &= st.status.success();
            outs.push(d);
        }
        for e in std::fs::read_dir(&outs[0])? {
            let name = e?.file_name();
            if name.to_string_lossy().ends_with(".csv") {
                files += 1;
                ok &= std::fs::read(outs[0].join(&name))? == std::fs::read(outs[1].join(&name))?;
            }
        }
    }
    Ok((ok && files > 0, format!("{files} CSV files compared across {} configs", names.len())))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("divergence fixtures and identities", divergence_fixtures),
        ("bayesian divergence nonnegativity and limit", bayesian_divergence_properties),
        ("FD metric vs analytic metric", metric_cross_validation),
        ("bound fixtures", bound_fixtures),
        ("intermediate step audit", proof_step_audit),
        ("reductions", reductions),
        ("variance vs squared differential", variance_differential),
        ("dualistic structure", dualistic),
        ("quadrature order", quadrature_order),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!("criterion {:>2} {}: {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
