//! Probes of the tangent-projection lemma at a single point `p`: the
//! orthogonal projection `π_p` of `M ∩ B̄(p, r)` onto `T_pM`, with
//! `r = lfs(p)/10`, does not collapse, covers the tangent ball of radius
//! `r' = 19 lfs(p)/200`, and lifts tangent points by at most
//! `t² lfs(p) / (1 + √(1 - t²))`.
//!
//! Injectivity is only probed on finitely many pairs. A clean run means no
//! collapse was observed, nothing more.

use nalgebra::DVector;
use rand::Rng;
use serde::Serialize;

use super::{batch_rng, default_tolerance, sample_t, ABS_FLOOR, RESOLVABLE_BOUND};
use crate::bounds::improved_tangent_to_manifold;
use crate::error::{GeoError, Result};
use crate::manifolds::{Manifold, ManifoldPoint};

/// Residual target for preimages, relative to `lfs(p)`.
pub const PREIMAGE_RESIDUAL: f64 = 1e-12;
const NEWTON_ITERS: usize = 60;
const BISECTION_ITERS: usize = 200;
const SCAN_STEPS: usize = 64;

/// `sin ∠([x, y], T_pM) <= r/(lfs(p) - r) + 6r/lfs(p)` for `x, y` within
/// `r = lfs(p)/10` of `p`.
pub fn chord_angle_sine_bound() -> f64 {
    1.0 / 9.0 + 6.0 / 10.0
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionConfig {
    pub n_probe: usize,
    pub seed: u64,
    pub tolerance: Option<f64>,
    /// Ball radius over `lfs(p)`; 1/10 in the lemma.
    pub ball_factor: f64,
    /// Coverage radius over `lfs(p)`; 19/200 in the lemma.
    pub coverage_factor: f64,
}

impl ProjectionConfig {
    pub fn new(n_probe: usize, seed: u64) -> Self {
        ProjectionConfig {
            n_probe,
            seed,
            tolerance: None,
            ball_factor: 0.1,
            coverage_factor: 19.0 / 200.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InjectivityProbe {
    pub pairs: usize,
    pub collapses: usize,
    /// `min ‖π_p(x) - π_p(y)‖ / ‖x - y‖`.
    pub min_ratio: f64,
    /// Ratio asserted: one minus the chord-angle sine bound.
    pub required_ratio: f64,
    /// Cosine of the chord-angle bound, the sharper ratio the same chain
    /// implies; reported for comparison.
    pub cosine_ratio: f64,
    pub verdict: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageProbe {
    pub probes: usize,
    pub covered: usize,
    /// Preimages not found, or found outside `B̄(p, r)`.
    pub failures: usize,
    /// Largest `dist(preimage, M) / lfs(p)`.
    pub max_residual: f64,
    /// Largest `‖preimage - p‖ / r`.
    pub max_preimage_radius: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HeightCheck {
    pub checked: usize,
    pub violations: usize,
    pub unresolved: usize,
    pub max_tightness: f64,
    pub min_tightness: f64,
    /// Largest `|height - bound| / lfs(p)`.
    pub max_abs_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionReport {
    pub manifold: String,
    pub position: Vec<f64>,
    pub lfs_p: f64,
    pub r: f64,
    pub r_prime: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub injectivity: InjectivityProbe,
    pub coverage: CoverageProbe,
    pub height: HeightCheck,
    pub no_collapse_observed: bool,
    pub full_coverage: bool,
    pub height_bound_holds: bool,
}

impl ProjectionReport {
    pub fn all_pass(&self) -> bool {
        self.no_collapse_observed && self.full_coverage && self.height_bound_holds
    }
}

fn tangent_offset(p: &ManifoldPoint, x: &DVector<f64>) -> DVector<f64> {
    p.tangent.project(&(x - &p.position))
}

/// Point of `M` on the normal line through the tangent point `z`, closest
/// to `z` among the roots found within `max_offset`.
pub fn lift_to_manifold(
    m: &Manifold,
    p: &ManifoldPoint,
    z: &DVector<f64>,
    max_offset: f64,
) -> Result<DVector<f64>> {
    let n = m.normal_at(&p.position);
    let phi = |h: f64| m.implicit(&(z + &n * h));
    let target = PREIMAGE_RESIDUAL * p.lfs;
    let accept = |h: f64| {
        let x = z + &n * h;
        (h.abs() <= max_offset && m.distance_to(&x) <= target).then_some(x)
    };

    // Damped Newton from the tangent plane.
    let mut h = 0.0;
    let mut value = phi(h);
    for _ in 0..NEWTON_ITERS {
        if value == 0.0 {
            break;
        }
        let slope = m.implicit_gradient(&(z + &n * h)).dot(&n);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let step = value / slope;
        let mut lambda = 1.0;
        let mut next = phi(h - step);
        while next.abs() >= value.abs() && lambda > 1e-8 {
            lambda *= 0.5;
            next = phi(h - lambda * step);
        }
        if next.abs() >= value.abs() {
            break;
        }
        h -= lambda * step;
        value = next;
        if (lambda * step).abs() <= f64::EPSILON * p.lfs {
            break;
        }
    }
    if let Some(x) = accept(h) {
        return Ok(x);
    }

    // Fallback: bracket a sign change along the normal, nearest first.
    let mut brackets = Vec::new();
    for side in [1.0, -1.0] {
        let mut a = 0.0;
        let mut fa = phi(0.0);
        for k in 1..=SCAN_STEPS {
            let b = side * max_offset * k as f64 / SCAN_STEPS as f64;
            let fb = phi(b);
            if fa == 0.0 || fa.signum() != fb.signum() {
                brackets.push((a, b, fa));
                break;
            }
            a = b;
            fa = fb;
        }
    }
    brackets.sort_by(|x, y| x.1.abs().total_cmp(&y.1.abs()));
    for (mut a, mut b, fa) in brackets {
        for _ in 0..BISECTION_ITERS {
            let mid = 0.5 * (a + b);
            if mid == a || mid == b {
                break;
            }
            if phi(mid).signum() == fa.signum() {
                a = mid;
            } else {
                b = mid;
            }
        }
        if let Some(x) = accept(0.5 * (a + b)) {
            return Ok(x);
        }
    }
    Err(GeoError::PreimageNotFound)
}

fn uniform_in_ball<R: Rng + ?Sized>(m: &Manifold, p: &ManifoldPoint, radius: f64, rng: &mut R) -> DVector<f64> {
    let dim = p.tangent.dim() as f64;
    let rho = radius * rng.random::<f64>().powf(1.0 / dim);
    &p.position + m.random_tangent_direction(p, rng) * rho
}

pub fn verify_projection_lemma(
    m: &Manifold,
    p: &ManifoldPoint,
    config: &ProjectionConfig,
) -> Result<ProjectionReport> {
    if config.n_probe == 0 {
        return Err(GeoError::InvalidParameter("n_probe must be at least 1".into()));
    }
    let tol = config.tolerance.unwrap_or_else(|| default_tolerance(m));
    let lfs = p.lfs;
    let r = config.ball_factor * lfs;
    let r_prime = config.coverage_factor * lfs;

    // (i) Pairs in the manifold ball: first point at a random chord from p,
    // second at a random chord from p as well.
    let mut rng = batch_rng(config.seed, 0);
    let s = chord_angle_sine_bound();
    let required = 1.0 - s;
    let mut inj = InjectivityProbe {
        pairs: 0,
        collapses: 0,
        min_ratio: f64::INFINITY,
        required_ratio: required,
        cosine_ratio: (1.0 - s * s).sqrt(),
        verdict: String::new(),
    };
    let mut attempts = 0;
    while inj.pairs < config.n_probe && attempts < 4 * config.n_probe {
        attempts += 1;
        let tx = sample_t(&mut rng, 0.0, config.ball_factor);
        let ty = sample_t(&mut rng, 0.0, config.ball_factor);
        let (Ok(x), Ok(y)) = (
            m.sample_pair_at_t(p, tx, &mut rng),
            m.sample_pair_at_t(p, ty, &mut rng),
        ) else {
            continue;
        };
        let chord = (&x.position - &y.position).norm();
        if chord <= 1e-9 * lfs {
            continue;
        }
        let image = (tangent_offset(p, &x.position) - tangent_offset(p, &y.position)).norm();
        let ratio = image / chord;
        inj.pairs += 1;
        inj.min_ratio = inj.min_ratio.min(ratio);
        if ratio < required * (1.0 - tol) {
            inj.collapses += 1;
        }
    }
    inj.verdict = if inj.collapses == 0 {
        format!("no collapse observed over {} pairs", inj.pairs)
    } else {
        format!("{} of {} pairs below the required ratio", inj.collapses, inj.pairs)
    };

    // (ii) and (iii) on the same tangent samples; the first probe is p itself.
    let mut rng = batch_rng(config.seed, 1);
    let mut cov = CoverageProbe {
        probes: 0,
        covered: 0,
        failures: 0,
        max_residual: 0.0,
        max_preimage_radius: 0.0,
    };
    let mut height = HeightCheck {
        checked: 0,
        violations: 0,
        unresolved: 0,
        max_tightness: 0.0,
        min_tightness: f64::INFINITY,
        max_abs_gap: 0.0,
    };
    for k in 0..config.n_probe {
        let z = if k == 0 { p.position.clone() } else { uniform_in_ball(m, p, r_prime, &mut rng) };
        cov.probes += 1;
        let x = match lift_to_manifold(m, p, &z, r) {
            Ok(x) => x,
            Err(GeoError::PreimageNotFound) => {
                cov.failures += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let radius = (&x - &p.position).norm();
        cov.max_residual = cov.max_residual.max(m.distance_to(&x) / lfs);
        cov.max_preimage_radius = cov.max_preimage_radius.max(radius / r);
        if radius > r * (1.0 + tol) {
            cov.failures += 1;
            continue;
        }
        cov.covered += 1;

        let t = (&z - &p.position).norm() / lfs;
        if t > crate::bounds::THM1II_T_MAX {
            continue;
        }
        let lifted = (&z - &x).norm() / lfs;
        let bound = improved_tangent_to_manifold(t)?;
        height.checked += 1;
        height.max_abs_gap = height.max_abs_gap.max((lifted - bound).abs());
        if lifted > bound * (1.0 + tol) + ABS_FLOOR {
            height.violations += 1;
        }
        if bound < RESOLVABLE_BOUND {
            height.unresolved += 1;
        } else {
            let ratio = lifted / bound;
            height.max_tightness = height.max_tightness.max(ratio);
            height.min_tightness = height.min_tightness.min(ratio);
        }
    }

    Ok(ProjectionReport {
        manifold: m.name().to_string(),
        position: p.position.iter().copied().collect(),
        lfs_p: lfs,
        r,
        r_prime,
        tolerance: tol,
        seed: config.seed,
        no_collapse_observed: inj.collapses == 0 && inj.pairs > 0,
        full_coverage: cov.failures == 0,
        height_bound_holds: height.violations == 0,
        injectivity: inj,
        coverage: cov,
        height,
    })
}
