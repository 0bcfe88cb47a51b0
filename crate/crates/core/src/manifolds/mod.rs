//! Analytic manifold zoo: round spheres (the circle is `S¹ ⊂ R²`), tori of
//! revolution in R³ and triaxial ellipsoids in R³.
//!
//! Each shape provides exact points, tangent spaces and unit normals. The
//! local feature size is closed-form for spheres and tori. For the ellipsoid
//! it comes from a sampled medial axis ([`MedialSample`]), which is also
//! available for every other shape as an independent check.

pub mod ellipsoid;
mod medial;

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, OnceLock};

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

pub use medial::MedialSample;

use crate::error::{GeoError, Result};
use crate::subspace::SubspaceBasis;

/// Largest ambient dimension accepted for `S^{N-1}`.
pub const MAX_SPHERE_DIM: usize = 16;

/// Default medial-axis sampling step for the oracle.
pub const DEFAULT_ORACLE_RESOLUTION: f64 = 1e-3;

/// Bisection iterations on chordal distance during pair construction.
pub const PAIR_BISECTION_ITERS: usize = 80;

/// Directions tried before pair construction reports `Unreachable`.
pub const PAIR_RETRY_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LfsSource {
    Analytic,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Circle { radius: f64 },
    Sphere { ambient_dim: usize, radius: f64 },
    Torus { major: f64, minor: f64 },
    Ellipsoid { semi_axes: [f64; 3] },
}

/// A point of a manifold with its exact tangent space and local feature size.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint {
    pub position: DVector<f64>,
    pub tangent: SubspaceBasis,
    pub lfs: f64,
    pub lfs_source: LfsSource,
}

#[derive(Debug, Clone)]
pub struct Manifold {
    name: String,
    shape: Shape,
    oracle_resolution: f64,
    medial: OnceLock<Arc<MedialSample>>,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(GeoError::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl Manifold {
    fn new(name: &str, shape: Shape) -> Self {
        Manifold {
            name: name.to_string(),
            shape,
            oracle_resolution: DEFAULT_ORACLE_RESOLUTION,
            medial: OnceLock::new(),
        }
    }

    pub fn circle(radius: f64) -> Result<Self> {
        Ok(Self::new("circle", Shape::Circle { radius: positive("radius", radius)? }))
    }

    /// `S^{N-1} ⊂ R^N` of the given radius, `2 <= N <= 16`.
    pub fn sphere(ambient_dim: usize, radius: f64) -> Result<Self> {
        if !(2..=MAX_SPHERE_DIM).contains(&ambient_dim) {
            return Err(GeoError::InvalidParameter(format!(
                "sphere ambient dimension must be in 2..={MAX_SPHERE_DIM}, got {ambient_dim}"
            )));
        }
        let radius = positive("radius", radius)?;
        Ok(Self::new("sphere", Shape::Sphere { ambient_dim, radius }))
    }

    /// Torus of revolution about the z-axis with spine radius `major` and
    /// tube radius `minor`, `major > minor`.
    pub fn torus(major: f64, minor: f64) -> Result<Self> {
        let (major, minor) = (positive("R", major)?, positive("r", minor)?);
        if major <= minor {
            return Err(GeoError::InvalidParameter(format!(
                "torus needs R > r, got R = {major}, r = {minor}"
            )));
        }
        Ok(Self::new("torus", Shape::Torus { major, minor }))
    }

    /// Axis-aligned ellipsoid with pairwise distinct semi-axes.
    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self> {
        let axes = [positive("a", a)?, positive("b", b)?, positive("c", c)?];
        if axes[0] == axes[1] || axes[1] == axes[2] || axes[0] == axes[2] {
            return Err(GeoError::InvalidParameter(
                "ellipsoid semi-axes must be pairwise distinct".into(),
            ));
        }
        Ok(Self::new("ellipsoid", Shape::Ellipsoid { semi_axes: axes }))
    }

    /// Builds a registered shape from its name and a parameter map.
    ///
    /// | name      | parameters (defaults)            |
    /// |-----------|----------------------------------|
    /// | circle    | radius (1)                       |
    /// | sphere    | n (3), radius (1)                |
    /// | torus     | R (2), r (0.5)                   |
    /// | ellipsoid | a (1.5), b (1.25), c (1)         |
    ///
    /// Every shape also accepts `resolution`, the oracle sampling step.
    pub fn from_spec(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "circle" => &["radius"],
            "sphere" => &["n", "radius"],
            "torus" => &["R", "r"],
            "ellipsoid" => &["a", "b", "c"],
            other => return Err(GeoError::UnsupportedShape(other.to_string())),
        };
        if let Some(bad) = params
            .keys()
            .find(|k| k.as_str() != "resolution" && !allowed.contains(&k.as_str()))
        {
            return Err(GeoError::InvalidParameter(format!(
                "unknown parameter '{bad}' for {name}"
            )));
        }
        let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
        let mut m = match name {
            "circle" => Self::circle(get("radius", 1.0))?,
            "sphere" => {
                let n = get("n", 3.0);
                if n.fract() != 0.0 || n < 0.0 {
                    return Err(GeoError::InvalidParameter(format!("n must be an integer, got {n}")));
                }
                Self::sphere(n as usize, get("radius", 1.0))?
            }
            "torus" => Self::torus(get("R", 2.0), get("r", 0.5))?,
            _ => Self::ellipsoid(get("a", 1.5), get("b", 1.25), get("c", 1.0))?,
        };
        if let Some(&h) = params.get("resolution") {
            m = m.with_oracle_resolution(h)?;
        }
        Ok(m)
    }

    pub fn with_oracle_resolution(mut self, h: f64) -> Result<Self> {
        self.oracle_resolution = positive("resolution", h)?;
        self.medial = OnceLock::new();
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn oracle_resolution(&self) -> f64 {
        self.oracle_resolution
    }

    pub fn ambient_dim(&self) -> usize {
        match self.shape {
            Shape::Circle { .. } => 2,
            Shape::Sphere { ambient_dim, .. } => ambient_dim,
            Shape::Torus { .. } | Shape::Ellipsoid { .. } => 3,
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.ambient_dim() - 1
    }

    /// Round spheres and circles, where the tangent variation has a closed form.
    pub fn is_round(&self) -> bool {
        matches!(self.shape, Shape::Circle { .. } | Shape::Sphere { .. })
    }

    /// Infimum of the local feature size over the manifold.
    pub fn reach(&self) -> Option<f64> {
        Some(match self.shape {
            Shape::Circle { radius } | Shape::Sphere { radius, .. } => radius,
            Shape::Torus { major, minor } => minor.min(major - minor),
            // smallest principal radius of curvature, c²/a at the long-axis tips
            Shape::Ellipsoid { semi_axes } => {
                let max = semi_axes.iter().cloned().fold(f64::MIN, f64::max);
                let min = semi_axes.iter().cloned().fold(f64::MAX, f64::min);
                min * min / max
            }
        })
    }

    pub fn lfs_source(&self) -> LfsSource {
        match self.shape {
            Shape::Ellipsoid { .. } => LfsSource::Oracle,
            _ => LfsSource::Analytic,
        }
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() == self.ambient_dim() {
            Ok(())
        } else {
            Err(GeoError::DimensionMismatch {
                expected: self.ambient_dim(),
                got: x.len(),
            })
        }
    }

    /// Implicit function vanishing on the manifold: signed distance for
    /// spheres and tori, `Σ x_i²/a_i² - 1` for the ellipsoid.
    pub fn implicit(&self, x: &DVector<f64>) -> f64 {
        match self.shape {
            Shape::Circle { radius } | Shape::Sphere { radius, .. } => x.norm() - radius,
            Shape::Torus { major, minor } => {
                let rho = x[0].hypot(x[1]);
                (rho - major).hypot(x[2]) - minor
            }
            Shape::Ellipsoid { semi_axes } => {
                x.iter().zip(semi_axes).map(|(v, a)| (v / a).powi(2)).sum::<f64>() - 1.0
            }
        }
    }

    pub fn implicit_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match self.shape {
            Shape::Circle { .. } | Shape::Sphere { .. } => x / x.norm(),
            Shape::Torus { major, .. } => {
                let rho = x[0].hypot(x[1]);
                let (c, s) = if rho > 0.0 { (x[0] / rho, x[1] / rho) } else { (1.0, 0.0) };
                let dr = rho - major;
                let len = dr.hypot(x[2]);
                DVector::from_vec(vec![c * dr / len, s * dr / len, x[2] / len])
            }
            Shape::Ellipsoid { semi_axes } => DVector::from_iterator(
                3,
                x.iter().zip(semi_axes).map(|(v, a)| 2.0 * v / (a * a)),
            ),
        }
    }

    /// Outward unit normal at a manifold point.
    pub fn normal_at(&self, x: &DVector<f64>) -> DVector<f64> {
        self.implicit_gradient(x).normalize()
    }

    pub fn tangent_at(&self, x: &DVector<f64>) -> Result<SubspaceBasis> {
        self.check_dim(x)?;
        SubspaceBasis::complement_of_normal(&self.normal_at(x))
    }

    /// Euclidean distance from an arbitrary point to the manifold.
    pub fn distance_to(&self, x: &DVector<f64>) -> f64 {
        match self.shape {
            Shape::Ellipsoid { semi_axes } => ellipsoid::distance(&semi_axes, x.as_slice()),
            _ => self.implicit(x).abs(),
        }
    }

    /// Closed-form local feature size, when one is registered.
    pub fn lfs_analytic(&self, x: &DVector<f64>) -> Option<f64> {
        match self.shape {
            Shape::Circle { radius } | Shape::Sphere { radius, .. } => Some(radius),
            // medial axis = spine circle ∪ rotation axis
            Shape::Torus { minor, .. } => Some(minor.min(x[0].hypot(x[1]))),
            Shape::Ellipsoid { .. } => None,
        }
    }

    /// Medial sample at the manifold's configured resolution, built once.
    pub fn medial_sample(&self) -> Arc<MedialSample> {
        self.medial
            .get_or_init(|| Arc::new(self.build_medial_sample(self.oracle_resolution)))
            .clone()
    }

    /// Builds a fresh medial sample at spacing `h`.
    pub fn build_medial_sample(&self, h: f64) -> MedialSample {
        match self.shape {
            Shape::Circle { .. } | Shape::Sphere { .. } => MedialSample::center(self.ambient_dim()),
            Shape::Torus { major, minor } => MedialSample::torus(major, minor, h),
            Shape::Ellipsoid { semi_axes } => MedialSample::ellipsoid(semi_axes, h),
        }
    }

    /// Brute-force local feature size: distance to the sampled medial axis.
    pub fn lfs_oracle(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.medial_sample().distance(x.as_slice()))
    }

    /// Local feature size from the shape's registered source.
    pub fn lfs(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        match self.lfs_analytic(x) {
            Some(v) => Ok(v),
            None => self.lfs_oracle(x),
        }
    }

    /// Bundles a point on the manifold with its tangent space and lfs.
    pub fn point(&self, position: DVector<f64>) -> Result<ManifoldPoint> {
        let tangent = self.tangent_at(&position)?;
        let lfs = self.lfs(&position)?;
        Ok(ManifoldPoint {
            position,
            tangent,
            lfs,
            lfs_source: self.lfs_source(),
        })
    }

    /// Point drawn uniformly with respect to surface measure.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ManifoldPoint> {
        let position = match self.shape {
            Shape::Circle { radius } | Shape::Sphere { radius, .. } => {
                gaussian_unit(self.ambient_dim(), rng) * radius
            }
            Shape::Torus { major, minor } => {
                let u = rng.random_range(0.0..TAU);
                // area element ∝ R + r cos v
                let v = loop {
                    let v = rng.random_range(0.0..TAU);
                    if rng.random::<f64>() * (major + minor) <= major + minor * v.cos() {
                        break v;
                    }
                };
                torus_point(major, minor, u, v)
            }
            Shape::Ellipsoid { semi_axes: [a, b, c] } => loop {
                // sphere point mapped by the axes, accepted with probability
                // proportional to the area stretch of that map
                let n = gaussian_unit(3, rng);
                let stretch =
                    ((b * c * n[0]).powi(2) + (a * c * n[1]).powi(2) + (a * b * n[2]).powi(2)).sqrt();
                let max = (a * b).max(a * c).max(b * c);
                if rng.random::<f64>() * max <= stretch {
                    let x = DVector::from_vec(vec![a * n[0], b * n[1], c * n[2]]);
                    break project_radially(&x, &[a, b, c]);
                }
            },
        };
        self.point(position)
    }

    /// Uniform random unit vector in the tangent space at `p`.
    pub fn random_tangent_direction<R: Rng + ?Sized>(
        &self,
        p: &ManifoldPoint,
        rng: &mut R,
    ) -> DVector<f64> {
        let coeffs = gaussian_unit(p.tangent.dim(), rng);
        p.tangent.combine(&coeffs).normalize()
    }

    /// Point on the curve leaving `p` along tangent direction `direction`
    /// whose chordal distance to `p` first reaches `distance`.
    pub fn point_at_chord(
        &self,
        p: &DVector<f64>,
        direction: &DVector<f64>,
        distance: f64,
    ) -> Option<DVector<f64>> {
        if distance == 0.0 {
            return Some(p.clone());
        }
        let curve = self.curve(p, direction);
        let chord = |s: f64| (curve(s) - p).norm();
        let (step, s_max) = match self.shape {
            Shape::Circle { radius } | Shape::Sphere { radius, .. } => (distance / 4.0, PI * radius),
            Shape::Torus { major, minor } => (distance / 4.0, 2.0 * TAU * (major + minor)),
            Shape::Ellipsoid { semi_axes } => {
                let max = semi_axes.iter().cloned().fold(0.0, f64::max);
                (distance / 4.0, 64.0 * max)
            }
        };
        let step = step.max(s_max * 1e-5);
        let mut lo = 0.0;
        loop {
            let hi = (lo + step).min(s_max);
            if chord(hi) >= distance {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..PAIR_BISECTION_ITERS {
                    let mid = 0.5 * (a + b);
                    if chord(mid) < distance {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                let (qa, qb) = (curve(a), curve(b));
                let (da, db) = ((&qa - p).norm(), (&qb - p).norm());
                return Some(if (da - distance).abs() <= (db - distance).abs() { qa } else { qb });
            }
            if hi >= s_max {
                return None;
            }
            lo = hi;
        }
    }

    fn curve<'a>(&'a self, p: &'a DVector<f64>, w: &'a DVector<f64>) -> Box<dyn Fn(f64) -> DVector<f64> + 'a> {
        match self.shape {
            Shape::Circle { radius } | Shape::Sphere { radius, .. } => {
                let u = p / p.norm();
                Box::new(move |s: f64| (&u * (s / radius).cos() + w * (s / radius).sin()) * radius)
            }
            Shape::Torus { major, minor } => {
                let u0 = p[1].atan2(p[0]);
                let rho = p[0].hypot(p[1]);
                let v0 = p[2].atan2(rho - major);
                let xu = DVector::from_vec(vec![-u0.sin(), u0.cos(), 0.0]);
                let xv = DVector::from_vec(vec![-v0.sin() * u0.cos(), -v0.sin() * u0.sin(), v0.cos()]);
                let du = w.dot(&xu) / (major + minor * v0.cos());
                let dv = w.dot(&xv) / minor;
                Box::new(move |s: f64| torus_point(major, minor, u0 + s * du, v0 + s * dv))
            }
            Shape::Ellipsoid { semi_axes } => {
                Box::new(move |s: f64| project_radially(&(p + w * s), &semi_axes))
            }
        }
    }

    /// A second point `q` with `|p - q| = t · lfs(p)`, reached along a
    /// random tangent direction by bisection on the chordal distance.
    pub fn sample_pair_at_t<R: Rng + ?Sized>(
        &self,
        p: &ManifoldPoint,
        t: f64,
        rng: &mut R,
    ) -> Result<ManifoldPoint> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(GeoError::DomainError { what: "sample_pair_at_t", value: t });
        }
        let target = t * p.lfs;
        for _ in 0..PAIR_RETRY_CAP {
            let w = self.random_tangent_direction(p, rng);
            if let Some(q) = self.point_at_chord(&p.position, &w, target) {
                return self.point(q);
            }
        }
        Err(GeoError::Unreachable { distance: target })
    }
}

fn gaussian_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = DVector::from_iterator(dim, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

fn torus_point(major: f64, minor: f64, u: f64, v: f64) -> DVector<f64> {
    let ring = major + minor * v.cos();
    DVector::from_vec(vec![ring * u.cos(), ring * u.sin(), minor * v.sin()])
}

/// Central projection onto the ellipsoid surface.
fn project_radially(x: &DVector<f64>, semi_axes: &[f64; 3]) -> DVector<f64> {
    let scale = x
        .iter()
        .zip(semi_axes)
        .map(|(v, a)| (v / a).powi(2))
        .sum::<f64>()
        .sqrt();
    x / scale
}
