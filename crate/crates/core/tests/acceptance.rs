//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

use std::process::Command;
use std::time::{Duration, Instant};

use lfsgeo::bounds::{self, BoundId};
use lfsgeo::manifolds::Manifold;
use lfsgeo::pointcloud::{self, PointCloud};
use lfsgeo::verify::{self, ProjectionConfig, VerifyConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let e = start.elapsed();
    (e <= limit, format!("{:.2}s of {}s", e.as_secs_f64(), limit.as_secs()))
}

fn zoo_surfaces() -> Vec<Manifold> {
    vec![
        Manifold::sphere(3, 1.0).unwrap(),
        Manifold::torus(2.0, 0.5).unwrap(),
        Manifold::ellipsoid(1.5, 1.25, 1.0).unwrap(),
    ]
}

fn c1_shape_function() -> Outcome {
    let start = Instant::now();
    let f0 = bounds::f_of_t(0.0).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for k in 1..=10_000 {
        worst = worst.max(bounds::f_of_t(k as f64 * 1e-5).unwrap());
    }
    let (fast, time) = within(start, Duration::from_secs(1));
    outcome(f0 == 4.5 && worst < 6.0 && fast, format!("f(0) = {f0}, max f on grid = {worst:.12}, {time}"))
}

fn c2_slopes() -> Outcome {
    let t = 1e-6;
    let cases = [
        ("thm1i", bounds::bound_thm1i(t).unwrap() / t, 4.5),
        ("thm1ii", bounds::bound_thm1ii(t).unwrap() / t, 3.0),
        ("bsw", bounds::bound_bsw(t).unwrap() / t, 2.0),
        ("ad", bounds::bound_amenta_dey(t).unwrap() / t, 1.0),
    ];
    let pass = cases.iter().all(|(_, got, want)| (got - want).abs() <= 1e-4);
    let detail = cases.iter().map(|(n, g, _)| format!("{n} {g:.8}")).collect::<Vec<_>>().join(", ");
    outcome(pass, detail)
}

fn c3_sphere_exactness() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [2, 3, 8, 16] {
        let m = Manifold::sphere(n, 1.0).unwrap();
        let rep = verify::verify_tangent_bounds(&m, &VerifyConfig::new(10_000, (0.0, 1.0), 3, vec![BoundId::SphereLower])).unwrap();
        let s = rep.stats(BoundId::SphereLower).unwrap();
        pass &= s.evaluated == 10_000 && s.max_abs_gap <= 1e-9;
        parts.push(format!("N={n} max gap {:.1e}", s.max_abs_gap));
    }
    let (fast, time) = within(start, Duration::from_secs(30));
    outcome(pass && fast, format!("{}, {time}", parts.join(", ")))
}

fn c4_zero_violations() -> Outcome {
    let start = Instant::now();
    let runs = [
        (BoundId::Thm1i, 0.25),
        (BoundId::Thm1ii, 0.095),
        (BoundId::Lem1, 1.0 - 1e-12),
        (BoundId::Lem2, 0.25),
        (BoundId::Lem2imp, 0.095),
        (BoundId::Eq4, 0.25),
    ];
    let mut pass = true;
    let mut violations = 0;
    let mut least_evaluated = u64::MAX;
    let mut failures = 0;
    for m in zoo_surfaces() {
        for (seed, &(id, hi)) in runs.iter().enumerate() {
            let rep = verify::verify_tangent_bounds(&m, &VerifyConfig::new(100_000, (0.0, hi), seed as u64, vec![id])).unwrap();
            let s = rep.stats(id).unwrap();
            violations += s.violations;
            failures += rep.sampling_failures;
            least_evaluated = least_evaluated.min(s.evaluated);
            if s.violations > 0 {
                pass = false;
                println!("      {} {}: {} violations, max tightness {}", m.name(), id, s.violations, s.max_tightness);
            }
        }
    }
    let (fast, time) = within(start, Duration::from_secs(300));
    // Pairs whose measured t drifts past the domain edge are not evaluated;
    // require nearly all of them to land inside.
    let coverage = least_evaluated >= 99_000;
    outcome(
        pass && fast && coverage,
        format!("{violations} violations over 18 runs of 1e5 pairs, min evaluated {least_evaluated}, {failures} sampling failures, {time}"),
    )
}

fn c5_tightness_anchors() -> Outcome {
    let circle = Manifold::circle(1.0).unwrap();
    let rep = verify::verify_tangent_bounds(&circle, &VerifyConfig::new(10_000, (0.0, 1.0 - 1e-12), 5, vec![BoundId::Lem1])).unwrap();
    let lem1 = rep.stats(BoundId::Lem1).unwrap().max_tightness;
    let sphere = Manifold::sphere(3, 1.0).unwrap();
    let p = sphere.sample_point(&mut verify::batch_rng(5, 0)).unwrap();
    let proj = verify::verify_projection_lemma(&sphere, &p, &ProjectionConfig::new(10_000, 5)).unwrap();
    let h = &proj.height;
    let pass = (lem1 - 1.0).abs() <= 1e-9
        && (h.max_tightness - 1.0).abs() <= 1e-9
        && (h.min_tightness - 1.0).abs() <= 1e-9
        && h.violations == 0;
    outcome(
        pass,
        format!(
            "lem1 max tightness on circle {lem1:.15}, sphere lift tightness in [{:.15}, {:.15}] over {} resolvable probes",
            h.min_tightness,
            h.max_tightness,
            h.checked - h.unresolved
        ),
    )
}

fn c6_sandwich() -> Outcome {
    let mut zoo = vec![Manifold::circle(1.0).unwrap()];
    zoo.extend(zoo_surfaces());
    let mut pass = true;
    let mut parts = Vec::new();
    for m in &zoo {
        let rep = verify::verify_lipschitz_sandwich(m, 10_000, 0.99, 6, None).unwrap();
        pass &= rep.total_violations() == 0 && rep.evaluated >= 9_900;
        parts.push(format!("{} {}", m.name(), rep.total_violations()));
    }
    outcome(pass, format!("violations: {}", parts.join(", ")))
}

fn c7_projection_lemma() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [Manifold::sphere(3, 1.0).unwrap(), Manifold::torus(2.0, 0.5).unwrap()] {
        let p = m.sample_point(&mut verify::batch_rng(7, 0)).unwrap();
        let rep = verify::verify_projection_lemma(&m, &p, &ProjectionConfig::new(10_000, 7)).unwrap();
        pass &= rep.all_pass() && rep.injectivity.pairs == 10_000 && rep.coverage.covered == 10_000;
        parts.push(format!(
            "{}: {} (min ratio {:.3}), coverage {}/{}, height violations {}",
            m.name(),
            rep.injectivity.verdict,
            rep.injectivity.min_ratio,
            rep.coverage.covered,
            rep.coverage.probes,
            rep.height.violations
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c8_lower_bound_witness() -> Outcome {
    let grid: Vec<f64> = (1..=25).map(|k| k as f64 / 100.0).collect();
    let w = verify::lower_bound_witness(&Manifold::sphere(3, 1.0).unwrap(), &grid, 200, 8).unwrap();
    outcome(w >= 0.96, format!("min sin/t = {w:.6}"))
}

fn c9_point_cloud() -> Outcome {
    let circle = Manifold::circle(1.0).unwrap();
    let queries = 2000;
    let mut medians = Vec::new();
    for n in [1000, 4000, 16000] {
        let cloud = PointCloud::sample(&circle, n, 9).unwrap();
        let idx: Vec<usize> = (0..n).step_by(n / queries.min(n)).collect();
        let est = pointcloud::point_estimates_at(&cloud, &idx, 12, 10.0, Some(&circle)).unwrap();
        medians.push(pointcloud::summarize(&est).median_lfs_relative_error.unwrap());
    }
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let sphere = Manifold::sphere(3, 1.0).unwrap();
    let cloud = PointCloud::sample(&sphere, 50_000, 9).unwrap();
    let mut errs: Vec<f64> = (0..cloud.len())
        .map(|i| {
            let est = pointcloud::estimate_tangent(&cloud, i, 20, Some(2)).unwrap();
            let exact = sphere.tangent_at(&cloud.position(i)).unwrap();
            lfsgeo::subspace::sin_angle_between(&est.basis, &exact).unwrap().asin()
        })
        .collect();
    let tangent_median = pointcloud::median(&mut errs).unwrap();
    outcome(
        decreasing && medians[2] < 0.05 && tangent_median < 0.01,
        format!(
            "circle median |lfs-1| at n=1k,4k,16k ({queries} strided queries): {:.2e}, {:.2e}, {:.2e}; sphere n=50k median tangent error {tangent_median:.2e} rad",
            medians[0], medians[1], medians[2]
        ),
    )
}

fn c10_negative_control() -> Outcome {
    let mut cfg = VerifyConfig::new(2000, (0.0, 0.25), 10, BoundId::ALL.to_vec());
    cfg.bound_scale = 0.5;
    let rep = verify::verify_tangent_bounds(&Manifold::sphere(3, 1.0).unwrap(), &cfg).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lfsgeo"))
        .args(["verify", "--manifold", "sphere", "--n", "2000", "--seed", "10", "--bound-scale", "0.5"])
        .output()
        .expect("binary runs");
    let code = out.status.code();
    outcome(
        rep.total_violations() > 0 && code == Some(1),
        format!("{} violations in-process, CLI exit {:?}", rep.total_violations(), code),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("shape function f", c1_shape_function),
        ("asymptotic slopes", c2_slopes),
        ("sphere exactness", c3_sphere_exactness),
        ("zero violations", c4_zero_violations),
        ("tightness anchors", c5_tightness_anchors),
        ("lipschitz sandwich", c6_sandwich),
        ("projection lemma", c7_projection_lemma),
        ("lower-bound witness", c8_lower_bound_witness),
        ("point-cloud convergence", c9_point_cloud),
        ("negative control", c10_negative_control),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
