//! Tangent-variation and distance bounds as functions of the normalized
//! distance `t = |p - q| / lfs(p)`.
//!
//! Every bound is dimensionless. The distance lemmas are stated relative to
//! `lfs(p)`; callers multiply by the local feature size themselves. The
//! reach-normalized baselines (`nsw`, `bsw`) take `t = |p - q| / rch(M)`.
//!
//! Evaluators accept `t ∈ [0, hi]` (`t = 0` is the degenerate pair `p = q`
//! and every bound vanishes there) and return [`GeoError::DomainError`]
//! outside, never a clamped value.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};

fn check(what: &'static str, t: f64, hi: f64, hi_inclusive: bool) -> Result<()> {
    let ok = t.is_finite() && t >= 0.0 && if hi_inclusive { t <= hi } else { t < hi };
    if ok {
        Ok(())
    } else {
        Err(GeoError::DomainError { what, value: t })
    }
}

/// `f(t) = ((2 + 3t + 2t²)² + 4t + 5) / (2 - 2t)` on `[0, 1)`.
pub fn f_of_t(t: f64) -> Result<f64> {
    check("f_of_t", t, 1.0, false)?;
    let a = 2.0 + 3.0 * t + 2.0 * t * t;
    Ok((a * a + 4.0 * t + 5.0) / (2.0 - 2.0 * t))
}

/// `t²/(1 + √(1 - t²))`, the cancellation-free form of `1 - √(1 - t²)`.
fn cap_height(t: f64) -> f64 {
    t * t / (1.0 + (1.0 - t * t).sqrt())
}

/// Slope function of the improved tangent-variation bound, `bound = t·F(t)`.
///
/// Re-running the chain behind [`f_of_t`] with the improved
/// tangent-to-manifold estimate `g(t) = t²/(1 + √(1 - t²))` in place of
/// `2t²` gives
///
/// ```text
/// s(t)   = t + (t + g)(1 + t)                       (|p - q'_u| / lfs(p))
/// bound  = [t²/2 + s²/2 + g(1 + t)] / (t(1 - t))
///        = t · [1/2 + σ²/2 + (1 + t)/(1 + √(1 - t²))] / (1 - t),
/// σ(t)   = s/t = 1 + (1 + t/(1 + √(1 - t²)))(1 + t).
/// ```
///
/// `F(0) = 1/2 + 2 + 1/2 = 3`. Substituting `2t²` back for `g` reproduces
/// `f(t)` term by term.
pub fn f_improved_of_t(t: f64) -> Result<f64> {
    check("f_improved_of_t", t, 1.0, false)?;
    let root = 1.0 + (1.0 - t * t).sqrt();
    let sigma = 1.0 + (1.0 + t / root) * (1.0 + t);
    Ok((0.5 + 0.5 * sigma * sigma + (1.0 + t) / root) / (1.0 - t))
}

pub const THM1I_T_MAX: f64 = 0.25;
pub const THM1II_T_MAX: f64 = 19.0 / 200.0;
pub const AMENTA_DEY_T_MAX: f64 = 1.0 / 3.0;
pub const REACH_BOUND_T_MAX: f64 = 0.5;

/// `sin ∠(T_p, T_q) <= t f(t)` for `t <= 1/4`.
pub fn bound_thm1i(t: f64) -> Result<f64> {
    check("thm1i", t, THM1I_T_MAX, true)?;
    Ok(t * f_of_t(t)?)
}

/// Improved bound with asymptotic constant 3, valid for `t <= 19/200`.
/// The closed form is reconstructed; see [`f_improved_of_t`].
pub fn bound_thm1ii(t: f64) -> Result<f64> {
    check("thm1ii", t, THM1II_T_MAX, true)?;
    Ok(t * f_improved_of_t(t)?)
}

/// Two-dimensional surfaces in R³: `t / (1 - t)` for `t <= 1/3`.
pub fn bound_amenta_dey(t: f64) -> Result<f64> {
    check("ad", t, AMENTA_DEY_T_MAX, true)?;
    Ok(t / (1.0 - t))
}

/// Reach-normalized: `2√(t(1 - t))` for `t <= 1/2`.
pub fn bound_nsw(t: f64) -> Result<f64> {
    check("nsw", t, REACH_BOUND_T_MAX, true)?;
    Ok(2.0 * (t * (1.0 - t)).sqrt())
}

/// Reach-normalized cosine-law refinement: `2t√(1 - t²)` for `t <= 1/2`.
pub fn bound_bsw(t: f64) -> Result<f64> {
    check("bsw", t, REACH_BOUND_T_MAX, true)?;
    Ok(2.0 * t * (1.0 - t * t).sqrt())
}

/// `dist(q, T_pM) / lfs(p) <= t²/2` for `t < 1`.
pub fn lemma1_point_to_tangent(t: f64) -> Result<f64> {
    check("lem1", t, 1.0, false)?;
    Ok(t * t / 2.0)
}

/// `dist(x, M) / lfs(p) <= 2t²` for `x ∈ T_pM`, `|p - x| <= t lfs(p)`, `t <= 1/4`.
pub fn lemma2_tangent_to_manifold(t: f64) -> Result<f64> {
    check("lem2", t, THM1I_T_MAX, true)?;
    Ok(2.0 * t * t)
}

/// Improved tangent-to-manifold distance `1 - √(1 - t²)` for `t <= 19/200`.
pub fn improved_tangent_to_manifold(t: f64) -> Result<f64> {
    check("lem2imp", t, THM1II_T_MAX, true)?;
    Ok(cap_height(t))
}

/// Probe-point inequality from the proof of the first bound:
/// `dist(q_u, T_pM) / lfs(p) <= (t²/2)((2 + 3t + 2t²)² + 4(1 + t))`, `t <= 1/4`.
pub fn eq4_probe_to_tangent(t: f64) -> Result<f64> {
    check("eq4", t, THM1I_T_MAX, true)?;
    let a = 2.0 + 3.0 * t + 2.0 * t * t;
    Ok(t * t / 2.0 * (a * a + 4.0 * (1.0 + t)))
}

/// Exact tangent variation on a round sphere at chord `t` (radius units):
/// `sin ∠ = t √(1 - t²/4)`.
pub fn sphere_exact_variation(t: f64) -> Result<f64> {
    check("sphere_exact_variation", t, 2.0, true)?;
    Ok((t * (1.0 - t * t / 4.0).sqrt()).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    Thm1i,
    Thm1ii,
    Ad,
    Nsw,
    Bsw,
    Lem1,
    Lem2,
    Lem2imp,
    SphereLower,
    Eq4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    TangentVariation,
    PointToTangent,
    TangentToManifold,
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    LfsLocal,
    ReachGlobal,
}

/// Valid `t` range `[0, hi]` or `[0, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TDomain {
    pub hi: f64,
    pub hi_inclusive: bool,
}

impl TDomain {
    pub fn contains(&self, t: f64) -> bool {
        t >= 0.0 && if self.hi_inclusive { t <= self.hi } else { t < self.hi }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundSpec {
    pub id: BoundId,
    pub kind: BoundKind,
    pub t_domain: TDomain,
    pub normalization: Normalization,
    /// Needed hypothesis on the manifold's dimensions: `(intrinsic, ambient)`.
    pub requires_dims: Option<(usize, usize)>,
    /// The closed form is our reconstruction of an asymptotic statement.
    pub reconstructed: bool,
    #[serde(skip)]
    evaluate: fn(f64) -> Result<f64>,
}

impl BoundSpec {
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        (self.evaluate)(t)
    }

    pub fn is_upper(&self) -> bool {
        self.kind != BoundKind::LowerBound
    }
}

const fn closed(hi: f64) -> TDomain {
    TDomain { hi, hi_inclusive: true }
}

const fn open(hi: f64) -> TDomain {
    TDomain { hi, hi_inclusive: false }
}

impl BoundId {
    pub const ALL: [BoundId; 10] = [
        BoundId::Thm1i,
        BoundId::Thm1ii,
        BoundId::Ad,
        BoundId::Nsw,
        BoundId::Bsw,
        BoundId::Lem1,
        BoundId::Lem2,
        BoundId::Lem2imp,
        BoundId::SphereLower,
        BoundId::Eq4,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundId::Thm1i => "thm1i",
            BoundId::Thm1ii => "thm1ii",
            BoundId::Ad => "ad",
            BoundId::Nsw => "nsw",
            BoundId::Bsw => "bsw",
            BoundId::Lem1 => "lem1",
            BoundId::Lem2 => "lem2",
            BoundId::Lem2imp => "lem2imp",
            BoundId::SphereLower => "sphere_lower",
            BoundId::Eq4 => "eq4",
        }
    }

    pub fn spec(&self) -> BoundSpec {
        use BoundKind::*;
        use Normalization::*;
        let (kind, t_domain, normalization, evaluate): (_, _, _, fn(f64) -> Result<f64>) =
            match self {
                BoundId::Thm1i => (TangentVariation, closed(THM1I_T_MAX), LfsLocal, bound_thm1i),
                BoundId::Thm1ii => (TangentVariation, closed(THM1II_T_MAX), LfsLocal, bound_thm1ii),
                BoundId::Ad => (TangentVariation, closed(AMENTA_DEY_T_MAX), LfsLocal, bound_amenta_dey),
                BoundId::Nsw => (TangentVariation, closed(REACH_BOUND_T_MAX), ReachGlobal, bound_nsw),
                BoundId::Bsw => (TangentVariation, closed(REACH_BOUND_T_MAX), ReachGlobal, bound_bsw),
                BoundId::Lem1 => (PointToTangent, open(1.0), LfsLocal, lemma1_point_to_tangent),
                BoundId::Lem2 => (TangentToManifold, closed(THM1I_T_MAX), LfsLocal, lemma2_tangent_to_manifold),
                BoundId::Lem2imp => (
                    TangentToManifold,
                    closed(THM1II_T_MAX),
                    LfsLocal,
                    improved_tangent_to_manifold,
                ),
                BoundId::SphereLower => (LowerBound, closed(2.0), LfsLocal, sphere_exact_variation),
                BoundId::Eq4 => (PointToTangent, closed(THM1I_T_MAX), LfsLocal, eq4_probe_to_tangent),
            };
        BoundSpec {
            id: *self,
            kind,
            t_domain,
            normalization,
            requires_dims: (*self == BoundId::Ad).then_some((2, 3)),
            reconstructed: *self == BoundId::Thm1ii,
            evaluate,
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundId {
    type Err = GeoError;

    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .iter()
            .copied()
            .find(|b| b.as_str() == s.trim())
            .ok_or_else(|| GeoError::InvalidParameter(format!("unknown bound id '{s}'")))
    }
}

/// All registered bounds.
pub fn registry() -> Vec<BoundSpec> {
    BoundId::ALL.iter().map(BoundId::spec).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Expected values below were computed independently at 30 digits
    // (mpmath) from the displayed formulas.

    #[test]
    fn f_values() {
        assert_eq!(f_of_t(0.0).unwrap(), 4.5);
        let f01 = f_of_t(0.1).unwrap();
        assert_abs_diff_eq!(f01, 5.990_222_222_222_222, epsilon = 1e-14);
        assert!(f01 < 6.0);
        assert_abs_diff_eq!(f_of_t(0.25).unwrap(), 9.510_416_666_666_667, epsilon = 1e-14);
        assert!(matches!(f_of_t(1.0), Err(GeoError::DomainError { .. })));
        assert!(f_of_t(-0.1).is_err());
        assert!(f_of_t(f64::NAN).is_err());
    }

    #[test]
    fn thm1i_values() {
        assert_abs_diff_eq!(bound_thm1i(0.1).unwrap(), 0.599_022_222_222_222_2, epsilon = 1e-15);
        // vacuous (> 1) near the domain edge, still evaluated
        assert_abs_diff_eq!(bound_thm1i(0.25).unwrap(), 2.377_604_166_666_667, epsilon = 1e-14);
        assert!(bound_thm1i(0.2500001).is_err());
        assert_eq!(bound_thm1i(0.0).unwrap(), 0.0);
    }

    #[test]
    fn thm1ii_values() {
        assert_abs_diff_eq!(f_improved_of_t(0.0).unwrap(), 3.0, epsilon = 1e-15);
        let b = bound_thm1ii(0.05).unwrap();
        assert_abs_diff_eq!(b, 0.167_408_930_173_985_13, epsilon = 1e-15);
        assert!(b > 0.15 && b < bound_thm1i(0.05).unwrap());
        let edge = bound_thm1ii(0.095).unwrap();
        assert_abs_diff_eq!(edge, 0.352_059_014_591_889_25, epsilon = 1e-15);
        assert!(edge <= bound_thm1i(0.095).unwrap());
        assert!(bound_thm1ii(0.0951).is_err());
    }

    #[test]
    fn thm1ii_matches_unsimplified_chain() {
        // the chain written out literally, independent of the t·F(t) form
        for i in 1..=95 {
            let t = i as f64 * 1e-3;
            let g = 1.0 - (1.0 - t * t).sqrt();
            let s = t + (t + g) * (1.0 + t);
            let literal = (t * t / 2.0 + s * s / 2.0 + g * (1.0 + t)) / (t * (1.0 - t));
            assert_abs_diff_eq!(bound_thm1ii(t).unwrap(), literal, epsilon = 1e-12);
        }
        // and the same chain with 2t² gives the first bound
        for i in 1..=250 {
            let t = i as f64 * 1e-3;
            let g = 2.0 * t * t;
            let s = t + (t + g) * (1.0 + t);
            let literal = (t * t / 2.0 + s * s / 2.0 + g * (1.0 + t)) / (t * (1.0 - t));
            assert_abs_diff_eq!(bound_thm1i(t).unwrap(), literal, epsilon = 1e-12);
        }
    }

    #[test]
    fn baseline_values() {
        assert_abs_diff_eq!(bound_amenta_dey(1.0 / 3.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(bound_amenta_dey(0.25).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(bound_nsw(0.5).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(bound_nsw(0.0).unwrap(), 0.0);
        let t = 1e-8;
        assert_abs_diff_eq!(bound_nsw(t).unwrap() / t.sqrt(), 2.0, epsilon = 1e-7);
        assert_abs_diff_eq!(bound_bsw(0.5).unwrap(), 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_eq!(bound_bsw(0.0).unwrap(), 0.0);
        assert!(bound_nsw(0.6).is_err());
        assert!(bound_amenta_dey(0.34).is_err());
    }

    #[test]
    fn lemma_values() {
        assert_eq!(lemma1_point_to_tangent(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(lemma1_point_to_tangent(0.2).unwrap(), 0.02, epsilon = 1e-17);
        assert_eq!(lemma1_point_to_tangent(1.0).unwrap_err().kind(), "DomainError");
        assert_eq!(lemma2_tangent_to_manifold(0.25).unwrap(), 0.125);
        assert_abs_diff_eq!(
            improved_tangent_to_manifold(0.095).unwrap(),
            0.004_522_727_532_165_102,
            epsilon = 1e-17
        );
        assert_eq!(improved_tangent_to_manifold(0.0).unwrap(), 0.0);
    }

    #[test]
    fn improved_forms_agree() {
        for i in 0..=9500 {
            let t = i as f64 * 1e-5;
            let direct = 1.0 - (1.0 - t * t).sqrt();
            assert!((direct - improved_tangent_to_manifold(t).unwrap()).abs() <= 1e-14);
        }
    }

    #[test]
    fn original_lemma_dominates_improved() {
        for i in 0..=950 {
            let t = i as f64 * 1e-4;
            assert!(lemma2_tangent_to_manifold(t).unwrap() >= improved_tangent_to_manifold(t).unwrap());
        }
    }

    #[test]
    fn f_strictly_increasing() {
        let mut prev = f_of_t(0.0).unwrap();
        for i in 1..=2500 {
            let cur = f_of_t(i as f64 * 1e-4).unwrap();
            assert!(cur > prev);
            prev = cur;
        }
    }

    #[test]
    fn sphere_variation_values_and_dominance() {
        assert_eq!(sphere_exact_variation(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(sphere_exact_variation(2f64.sqrt()).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sphere_exact_variation(1.0).unwrap(), 0.866_025_403_784_438_6, epsilon = 1e-15);
        assert!(sphere_exact_variation(2.1).is_err());
        for i in 1..=5000 {
            let t = i as f64 * 1e-4;
            let lower = sphere_exact_variation(t).unwrap();
            assert!(lower <= bound_bsw(t).unwrap());
            if t <= 0.25 {
                assert!(lower <= bound_thm1i(t).unwrap());
            }
        }
    }

    #[test]
    fn asymptotic_slopes() {
        let t = 1e-6;
        assert_abs_diff_eq!(bound_thm1i(t).unwrap() / t, 4.5, epsilon = 1e-4);
        assert_abs_diff_eq!(bound_thm1ii(t).unwrap() / t, 3.0, epsilon = 1e-4);
        assert_abs_diff_eq!(bound_bsw(t).unwrap() / t, 2.0, epsilon = 1e-4);
        assert_abs_diff_eq!(bound_amenta_dey(t).unwrap() / t, 1.0, epsilon = 1e-4);
    }

    #[test]
    fn registry_ids_round_trip() {
        for spec in registry() {
            assert_eq!(spec.id.as_str().parse::<BoundId>().unwrap(), spec.id);
            let hi = spec.t_domain.hi;
            let probe = if spec.t_domain.hi_inclusive { hi } else { hi * (1.0 - 1e-12) };
            let v = spec.evaluate(probe).unwrap();
            assert!(v.is_finite() && v >= 0.0);
            assert!(spec.evaluate(hi * 1.01).is_err());
        }
        assert!("thm3".parse::<BoundId>().is_err());
        assert!(BoundId::Thm1ii.spec().reconstructed);
        assert_eq!(BoundId::Nsw.spec().normalization, Normalization::ReachGlobal);
    }
}
