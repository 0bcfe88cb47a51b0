//! Seeded Monte-Carlo certification of the bounds on the manifold zoo.
//!
//! Pairs `(p, q)` are drawn with `p` uniform on the manifold and
//! `|p - q| = t·lfs(p)` for `t` uniform in the requested range. For every
//! pair the harness measures the tangent variation `sin ∠(T_p, T_q)`, the
//! height of `q` over `T_p`, the distance to the manifold of a tangent point
//! at the same normalized distance, and the probe-point distance from the
//! first bound's proof, then checks each bound whose hypothesis holds.
//!
//! Work is split into fixed-size batches, each driven by its own ChaCha
//! stream derived from the seed, so results do not depend on the number of
//! worker threads.

mod projection;
mod sandwich;

use std::io::Write;
use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use projection::{
    lift_to_manifold, verify_projection_lemma, CoverageProbe, HeightCheck, InjectivityProbe, ProjectionConfig,
    ProjectionReport, PREIMAGE_RESIDUAL,
};
pub use sandwich::{verify_lipschitz_sandwich, SandwichReport};

use crate::bounds::{BoundId, BoundKind, BoundSpec, Normalization};
use crate::error::{GeoError, Result};
use crate::manifolds::{LfsSource, Manifold, ManifoldPoint, Shape};
use crate::subspace::{distance_to_subspace, sin_angle_between};

/// Relative tolerance for bound checks when lfs is closed-form.
pub const ANALYTIC_TOLERANCE: f64 = 1e-9;
/// Relative tolerance when lfs comes from the sampled medial axis.
pub const ORACLE_TOLERANCE: f64 = 1e-3;
/// Absolute slack on dimensionless comparisons, a few ulps of the unit scale.
pub const ABS_FLOOR: f64 = 64.0 * f64::EPSILON;
/// Bound values below this are too small for a relative tightness reading
/// at double precision; such checks are still tested for satisfaction.
pub const RESOLVABLE_BOUND: f64 = 1e-6;
pub const HISTOGRAM_BUCKETS: usize = 32;
/// Pairs per RNG stream.
pub const BATCH_SIZE: usize = 256;
/// Share of pair constructions allowed to fail before the run is aborted.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

/// Default tolerance for a manifold's lfs source.
pub fn default_tolerance(m: &Manifold) -> f64 {
    match m.lfs_source() {
        LfsSource::Analytic => ANALYTIC_TOLERANCE,
        LfsSource::Oracle => ORACLE_TOLERANCE,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyConfig {
    pub n_pairs: usize,
    /// Half-open range `(lo, hi]` for the normalized distance.
    pub t_range: (f64, f64),
    pub seed: u64,
    pub bounds: Vec<BoundId>,
    /// Overrides [`default_tolerance`].
    pub tolerance: Option<f64>,
    /// Multiplies every bound value. Anything below 1 deliberately weakens
    /// the claim and exists only as a negative control.
    pub bound_scale: f64,
}

impl VerifyConfig {
    pub fn new(n_pairs: usize, t_range: (f64, f64), seed: u64, bounds: Vec<BoundId>) -> Self {
        VerifyConfig {
            n_pairs,
            t_range,
            seed,
            bounds,
            tolerance: None,
            bound_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub id: BoundId,
    /// Normalized distance the bound was evaluated at (by reach for the
    /// reach-normalized baselines).
    pub t: f64,
    pub measured: f64,
    pub bound_value: f64,
    pub satisfied: bool,
    pub tightness: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairObservation {
    pub t: f64,
    pub sin_angle: f64,
    /// `dist(q, T_pM)`, in length units.
    pub dist_q_to_tp: f64,
    /// `dist(x, M)` for `x = p + t·lfs(p)·w`, `w` a unit tangent at `p`.
    pub dist_x_to_m: Option<f64>,
    /// `dist(q_u, T_pM)` for the probe point `q_u = q + t·lfs(q)·u`.
    pub dist_probe_to_tp: Option<f64>,
    pub lfs_p: f64,
    pub lfs_q: f64,
    pub checks: Vec<BoundCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundStats {
    pub id: BoundId,
    pub kind: BoundKind,
    pub reconstructed: bool,
    /// In-domain observations.
    pub evaluated: u64,
    pub violations: u64,
    /// Observations whose bound value was below [`RESOLVABLE_BOUND`].
    pub unresolved: u64,
    /// Extremes of the tightness ratio over resolvable observations.
    pub max_tightness: f64,
    pub min_tightness: f64,
    /// Largest `|measured - bound|` over all observations.
    pub max_abs_gap: f64,
    /// Tightness histogram on `[0, 1]`, 32 equal buckets; ratios above one
    /// land in the last bucket.
    pub histogram: Vec<u64>,
}

impl BoundStats {
    fn new(spec: &BoundSpec) -> Self {
        BoundStats {
            id: spec.id,
            kind: spec.kind,
            reconstructed: spec.reconstructed,
            evaluated: 0,
            violations: 0,
            unresolved: 0,
            max_tightness: 0.0,
            min_tightness: f64::INFINITY,
            max_abs_gap: 0.0,
            histogram: vec![0; HISTOGRAM_BUCKETS],
        }
    }

    fn record(&mut self, check: &BoundCheck) {
        self.evaluated += 1;
        if !check.satisfied {
            self.violations += 1;
        }
        self.max_abs_gap = self.max_abs_gap.max((check.measured - check.bound_value).abs());
        if check.bound_value < RESOLVABLE_BOUND {
            self.unresolved += 1;
        } else {
            self.max_tightness = self.max_tightness.max(check.tightness);
            self.min_tightness = self.min_tightness.min(check.tightness);
        }
        let bucket = ((check.tightness.max(0.0) * HISTOGRAM_BUCKETS as f64) as usize)
            .min(HISTOGRAM_BUCKETS - 1);
        self.histogram[bucket] += 1;
    }

    /// Associative merge of two partial aggregates.
    pub fn merge(&mut self, other: &BoundStats) {
        debug_assert_eq!(self.id, other.id);
        self.evaluated += other.evaluated;
        self.violations += other.violations;
        self.unresolved += other.unresolved;
        self.max_tightness = self.max_tightness.max(other.max_tightness);
        self.min_tightness = self.min_tightness.min(other.min_tightness);
        self.max_abs_gap = self.max_abs_gap.max(other.max_abs_gap);
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedBound {
    pub id: BoundId,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub manifold: String,
    pub shape: Shape,
    pub lfs_source: LfsSource,
    pub tolerance: f64,
    pub n_pairs: usize,
    pub t_range: (f64, f64),
    pub seed: u64,
    pub bound_scale: f64,
    pub sampling_failures: usize,
    pub per_bound: Vec<BoundStats>,
    pub skipped: Vec<SkippedBound>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    #[serde(skip)]
    pub observations: Vec<PairObservation>,
}

impl VerificationReport {
    pub fn total_violations(&self) -> u64 {
        self.per_bound.iter().map(|b| b.violations).sum()
    }

    pub fn stats(&self, id: BoundId) -> Option<&BoundStats> {
        self.per_bound.iter().find(|b| b.id == id)
    }

    /// Writes one CSV row per bound check:
    /// `t,sin_angle,bound_id,bound_value,tightness,satisfied`.
    pub fn write_observations_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,sin_angle,bound_id,bound_value,tightness,satisfied")?;
        for obs in &self.observations {
            for c in &obs.checks {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    fmt_f64(c.t),
                    fmt_f64(obs.sin_angle),
                    c.id,
                    fmt_f64(c.bound_value),
                    fmt_f64(c.tightness),
                    c.satisfied
                )?;
            }
        }
        Ok(())
    }
}

/// Round-trip-exact decimal rendering with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Why a bound cannot be tested on `m`, if it cannot.
pub fn inapplicable_reason(spec: &BoundSpec, m: &Manifold) -> Option<String> {
    if let Some((intrinsic, ambient)) = spec.requires_dims {
        if m.intrinsic_dim() != intrinsic || m.ambient_dim() != ambient {
            return Some(format!(
                "needs a {intrinsic}-dimensional manifold in R^{ambient}"
            ));
        }
    }
    if spec.normalization == Normalization::ReachGlobal && m.reach().is_none() {
        return Some("reach unknown".into());
    }
    if spec.kind == BoundKind::LowerBound && !m.is_round() {
        return Some("closed-form lower bound holds on round spheres only".into());
    }
    None
}

/// RNG for batch `batch` of a run seeded with `seed`.
pub fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Uniform draw from `(lo, hi]`.
pub(crate) fn sample_t<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    hi - rng.random::<f64>() * (hi - lo)
}

fn check(spec: &BoundSpec, t: f64, measured: f64, scale: f64, tol: f64) -> Option<BoundCheck> {
    if !spec.t_domain.contains(t) {
        return None;
    }
    let bound_value = spec.evaluate(t).ok()? * scale;
    let (satisfied, tightness) = if spec.is_upper() {
        let ok = measured <= bound_value * (1.0 + tol) + ABS_FLOOR;
        let ratio = if bound_value > 0.0 { measured / bound_value } else { 0.0 };
        (ok, ratio)
    } else {
        let ok = measured >= bound_value * (1.0 - tol) - ABS_FLOOR;
        let ratio = if measured > 0.0 { bound_value / measured } else { 0.0 };
        (ok, ratio)
    };
    Some(BoundCheck {
        id: spec.id,
        t,
        measured,
        bound_value,
        satisfied,
        tightness,
    })
}

struct PairContext<'a> {
    manifold: &'a Manifold,
    specs: &'a [BoundSpec],
    tolerance: f64,
    scale: f64,
    need_tangent_point: bool,
    need_probe: bool,
}

impl PairContext<'_> {
    fn observe<R: Rng + ?Sized>(
        &self,
        p: &ManifoldPoint,
        q: &ManifoldPoint,
        t_target: f64,
        rng: &mut R,
    ) -> Result<PairObservation> {
        let m = self.manifold;
        let lfs_p = p.lfs;
        let chord = (&q.position - &p.position).norm();
        let t = chord / lfs_p;
        let sin_angle = sin_angle_between(&p.tangent, &q.tangent)?;
        let dist_q_to_tp = distance_to_subspace(&q.position, &p.position, &p.tangent)?;

        let tangent_point = if self.need_tangent_point {
            let w = m.random_tangent_direction(p, rng);
            let x: DVector<f64> = &p.position + w * (t_target * lfs_p);
            let t_x = (&x - &p.position).norm() / lfs_p;
            Some((t_x, m.distance_to(&x)))
        } else {
            None
        };
        let dist_probe_to_tp = if self.need_probe {
            let u = m.random_tangent_direction(q, rng);
            let probe = &q.position + u * (t * q.lfs);
            Some(distance_to_subspace(&probe, &p.position, &p.tangent)?)
        } else {
            None
        };

        let mut checks = Vec::with_capacity(self.specs.len());
        for spec in self.specs {
            let (t_b, measured) = match spec.kind {
                BoundKind::TangentVariation | BoundKind::LowerBound => {
                    let t_b = match spec.normalization {
                        Normalization::LfsLocal => t,
                        Normalization::ReachGlobal => chord / m.reach().expect("checked"),
                    };
                    (t_b, sin_angle)
                }
                BoundKind::PointToTangent if spec.id == BoundId::Eq4 => {
                    (t, dist_probe_to_tp.expect("probe requested") / lfs_p)
                }
                BoundKind::PointToTangent => (t, dist_q_to_tp / lfs_p),
                BoundKind::TangentToManifold => {
                    let (t_x, d) = tangent_point.expect("tangent point requested");
                    (t_x, d / lfs_p)
                }
            };
            if let Some(c) = check(spec, t_b, measured, self.scale, self.tolerance) {
                checks.push(c);
            }
        }
        Ok(PairObservation {
            t,
            sin_angle,
            dist_q_to_tp,
            dist_x_to_m: tangent_point.map(|(_, d)| d),
            dist_probe_to_tp,
            lfs_p,
            lfs_q: q.lfs,
            checks,
        })
    }
}

fn validate_range(t_range: (f64, f64)) -> Result<()> {
    let (lo, hi) = t_range;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
        return Err(GeoError::InvalidParameter(format!(
            "t range ({lo}, {hi}] is empty or invalid"
        )));
    }
    Ok(())
}

/// Checks every requested bound on `n_pairs` random pairs of `m`.
pub fn verify_tangent_bounds(m: &Manifold, config: &VerifyConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    validate_range(config.t_range)?;
    if config.n_pairs == 0 {
        return Err(GeoError::InvalidParameter("n_pairs must be at least 1".into()));
    }
    if config.bounds.is_empty() {
        return Err(GeoError::InvalidParameter("no bounds requested".into()));
    }
    let tolerance = config.tolerance.unwrap_or_else(|| default_tolerance(m));

    let mut specs = Vec::new();
    let mut skipped = Vec::new();
    for id in &config.bounds {
        let spec = id.spec();
        if specs.iter().any(|s: &BoundSpec| s.id == *id) {
            continue;
        }
        match inapplicable_reason(&spec, m) {
            Some(reason) => skipped.push(SkippedBound { id: *id, reason }),
            None => specs.push(spec),
        }
    }
    let widest = specs.iter().map(|s| s.t_domain.hi).fold(0.0, f64::max);
    let lo = config.t_range.0;
    let hi = config.t_range.1.min(widest);
    if !specs.is_empty() && hi <= lo {
        return Err(GeoError::InvalidParameter(format!(
            "t range ({lo}, {}] misses the domains of every requested bound",
            config.t_range.1
        )));
    }

    let ctx = PairContext {
        manifold: m,
        specs: &specs,
        tolerance,
        scale: config.bound_scale,
        need_tangent_point: specs.iter().any(|s| s.kind == BoundKind::TangentToManifold),
        need_probe: specs.iter().any(|s| s.id == BoundId::Eq4),
    };

    let n_batches = config.n_pairs.div_ceil(BATCH_SIZE);
    let batches: Vec<Result<(Vec<PairObservation>, usize)>> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(config.seed, b as u64);
            let count = BATCH_SIZE.min(config.n_pairs - b * BATCH_SIZE);
            let mut out = Vec::with_capacity(count);
            let mut failures = 0;
            if specs.is_empty() {
                return Ok((out, failures));
            }
            for _ in 0..count {
                let p = m.sample_point(&mut rng)?;
                let t = sample_t(&mut rng, lo, hi);
                match m.sample_pair_at_t(&p, t, &mut rng) {
                    Ok(q) => out.push(ctx.observe(&p, &q, t, &mut rng)?),
                    Err(GeoError::Unreachable { .. }) => failures += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok((out, failures))
        })
        .collect();

    let mut per_bound: Vec<BoundStats> = specs.iter().map(BoundStats::new).collect();
    let mut observations = Vec::with_capacity(config.n_pairs);
    let mut sampling_failures = 0;
    for batch in batches {
        let (obs, failures) = batch?;
        sampling_failures += failures;
        for o in &obs {
            for c in &o.checks {
                let stats = per_bound.iter_mut().find(|s| s.id == c.id).expect("registered");
                stats.record(c);
            }
        }
        observations.extend(obs);
    }
    if sampling_failures as f64 > MAX_FAILURE_FRACTION * config.n_pairs as f64 {
        return Err(GeoError::TooManyFailures {
            failures: sampling_failures,
            attempts: config.n_pairs,
        });
    }

    let mut notes = Vec::new();
    if specs.iter().any(|s| s.reconstructed) {
        notes.push(
            "thm1ii uses a reconstructed closed form; only its 3t + O(t^2) \
             asymptotics are established"
                .to_string(),
        );
    }
    if m.lfs_source() == LfsSource::Oracle {
        notes.push(format!(
            "lfs from sampled medial axis at resolution {:e}",
            m.oracle_resolution()
        ));
    }
    if config.bound_scale != 1.0 {
        notes.push(format!(
            "bound values multiplied by {} (negative control)",
            config.bound_scale
        ));
    }

    Ok(VerificationReport {
        manifold: m.name().to_string(),
        shape: m.shape().clone(),
        lfs_source: m.lfs_source(),
        tolerance,
        n_pairs: config.n_pairs,
        t_range: config.t_range,
        seed: config.seed,
        bound_scale: config.bound_scale,
        sampling_failures,
        per_bound,
        skipped,
        notes,
        wall_time_s: Some(start.elapsed().as_secs_f64()),
        observations,
    })
}

/// Checks the probe-point inequality from the proof of the first bound,
/// `dist(q_u, T_pM) <= (t²/2)((2 + 3t + 2t²)² + 4(1 + t)) lfs(p)`, with
/// `q_u = q + t·lfs(q)·u` for a random unit `u ∈ T_qM`, on `t ∈ (0, 1/4]`.
pub fn eq4_intermediate_check(m: &Manifold, n_pairs: usize, seed: u64) -> Result<VerificationReport> {
    verify_tangent_bounds(
        m,
        &VerifyConfig::new(n_pairs, (0.0, crate::bounds::THM1I_T_MAX), seed, vec![BoundId::Eq4]),
    )
}

/// Smallest `sin ∠(T_p, T_q) / t` over pairs drawn at each `t` of a grid,
/// `pairs_per_t` pairs per grid value. A positive floor certifies that the
/// tangent variation grows linearly in `t`.
pub fn lower_bound_witness(m: &Manifold, t_grid: &[f64], pairs_per_t: usize, seed: u64) -> Result<f64> {
    let mut rng = batch_rng(seed, 0);
    let mut worst = f64::INFINITY;
    for &t in t_grid {
        for _ in 0..pairs_per_t {
            let p = m.sample_point(&mut rng)?;
            let q = m.sample_pair_at_t(&p, t, &mut rng)?;
            let t_meas = (&q.position - &p.position).norm() / p.lfs;
            worst = worst.min(sin_angle_between(&p.tangent, &q.tangent)? / t_meas);
        }
    }
    Ok(worst)
}
