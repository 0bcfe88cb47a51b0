use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{batch_rng, default_tolerance, sample_t, validate_range, ABS_FLOOR, BATCH_SIZE, MAX_FAILURE_FRACTION};
use crate::error::{GeoError, Result};
use crate::manifolds::{LfsSource, Manifold};

/// Outcome of the 1-Lipschitz and sandwich checks on `lfs`:
/// `|lfs(p) - lfs(q)| <= |p - q|` and
/// `(1 - t) lfs(p) <= lfs(q) <= (1 + t) lfs(p)` for `|p - q| = t lfs(p)`.
///
/// Slacks are normalized by `lfs(p)`; on a round sphere both equal `t`.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub manifold: String,
    pub lfs_source: LfsSource,
    pub tolerance: f64,
    pub n_pairs: usize,
    pub t_max: f64,
    pub seed: u64,
    pub evaluated: u64,
    pub sampling_failures: usize,
    pub lipschitz_violations: u64,
    pub lower_violations: u64,
    pub upper_violations: u64,
    pub min_lower_slack: f64,
    pub max_lower_slack: f64,
    pub min_upper_slack: f64,
    pub max_upper_slack: f64,
    /// Largest `|lfs(p) - lfs(q)| / |p - q|`.
    pub max_lipschitz_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl SandwichReport {
    pub fn total_violations(&self) -> u64 {
        self.lipschitz_violations + self.lower_violations + self.upper_violations
    }
}

#[derive(Default)]
struct Partial {
    evaluated: u64,
    failures: usize,
    lipschitz: u64,
    lower: u64,
    upper: u64,
    lower_slack: (f64, f64),
    upper_slack: (f64, f64),
    ratio: f64,
}

impl Partial {
    fn empty() -> Self {
        Partial {
            lower_slack: (f64::INFINITY, f64::NEG_INFINITY),
            upper_slack: (f64::INFINITY, f64::NEG_INFINITY),
            ..Default::default()
        }
    }

    fn merge(&mut self, o: &Partial) {
        self.evaluated += o.evaluated;
        self.failures += o.failures;
        self.lipschitz += o.lipschitz;
        self.lower += o.lower;
        self.upper += o.upper;
        self.lower_slack = (self.lower_slack.0.min(o.lower_slack.0), self.lower_slack.1.max(o.lower_slack.1));
        self.upper_slack = (self.upper_slack.0.min(o.upper_slack.0), self.upper_slack.1.max(o.upper_slack.1));
        self.ratio = self.ratio.max(o.ratio);
    }
}

/// Samples `n_pairs` pairs with `t` uniform in `(0, t_max]`, `t_max < 1`.
pub fn verify_lipschitz_sandwich(
    m: &Manifold,
    n_pairs: usize,
    t_max: f64,
    seed: u64,
    tolerance: Option<f64>,
) -> Result<SandwichReport> {
    let start = Instant::now();
    validate_range((0.0, t_max))?;
    if t_max >= 1.0 {
        return Err(GeoError::DomainError { what: "sandwich t_max", value: t_max });
    }
    if n_pairs == 0 {
        return Err(GeoError::InvalidParameter("n_pairs must be at least 1".into()));
    }
    let tol = tolerance.unwrap_or_else(|| default_tolerance(m));

    let n_batches = n_pairs.div_ceil(BATCH_SIZE);
    let partials: Vec<Result<Partial>> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b as u64);
            let mut acc = Partial::empty();
            for _ in 0..BATCH_SIZE.min(n_pairs - b * BATCH_SIZE) {
                let p = m.sample_point(&mut rng)?;
                let t_target = sample_t(&mut rng, 0.0, t_max);
                let q = match m.sample_pair_at_t(&p, t_target, &mut rng) {
                    Ok(q) => q,
                    Err(GeoError::Unreachable { .. }) => {
                        acc.failures += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let chord = (&q.position - &p.position).norm();
                let t = chord / p.lfs;
                let (lp, lq) = (p.lfs, q.lfs);
                acc.evaluated += 1;
                // Oracle error enters both lfs values, hence the factor 2.
                let slack = 2.0 * tol * lp.max(lq) + ABS_FLOOR * lp;
                if (lp - lq).abs() > chord + slack {
                    acc.lipschitz += 1;
                }
                if lq < (1.0 - t) * lp - slack {
                    acc.lower += 1;
                }
                if lq > (1.0 + t) * lp + slack {
                    acc.upper += 1;
                }
                let lower = (lq - (1.0 - t) * lp) / lp;
                let upper = ((1.0 + t) * lp - lq) / lp;
                acc.lower_slack = (acc.lower_slack.0.min(lower), acc.lower_slack.1.max(lower));
                acc.upper_slack = (acc.upper_slack.0.min(upper), acc.upper_slack.1.max(upper));
                if chord > 0.0 {
                    acc.ratio = acc.ratio.max((lp - lq).abs() / chord);
                }
            }
            Ok(acc)
        })
        .collect();

    let mut total = Partial::empty();
    for p in partials {
        total.merge(&p?);
    }
    if total.failures as f64 > MAX_FAILURE_FRACTION * n_pairs as f64 {
        return Err(GeoError::TooManyFailures { failures: total.failures, attempts: n_pairs });
    }
    Ok(SandwichReport {
        manifold: m.name().to_string(),
        lfs_source: m.lfs_source(),
        tolerance: tol,
        n_pairs,
        t_max,
        seed,
        evaluated: total.evaluated,
        sampling_failures: total.failures,
        lipschitz_violations: total.lipschitz,
        lower_violations: total.lower,
        upper_violations: total.upper,
        min_lower_slack: total.lower_slack.0,
        max_lower_slack: total.lower_slack.1,
        min_upper_slack: total.upper_slack.0,
        max_upper_slack: total.upper_slack.1,
        max_lipschitz_ratio: total.ratio,
        wall_time_s: Some(start.elapsed().as_secs_f64()),
    })
}
