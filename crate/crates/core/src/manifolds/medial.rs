//! Sampled medial axes used as a brute-force local-feature-size oracle.
//!
//! `lfs(x)` is the distance from `x` to the medial axis. The oracle stores a
//! finite subset of the medial axis and returns the distance to it, so its
//! value converges to `lfs` from above as the sampling is refined.

use super::ellipsoid;
use crate::spatial::KdTree;

#[derive(Debug, Clone)]
pub struct MedialSample {
    resolution: f64,
    kind: MedialKind,
}

#[derive(Debug, Clone)]
enum MedialKind {
    /// Explicit point samples in the ambient space.
    Points(KdTree),
    /// Planar medial sheet of a triaxial ellipsoid: the sheet lies in the
    /// coordinate plane orthogonal to the shortest axis. Membership is
    /// decided by nearest-point multiplicity; the sheet boundary is sampled
    /// by bisection along every grid row and column.
    Planar {
        semi_axes: [f64; 3],
        plane: [usize; 2],
        normal_axis: usize,
        boundary: KdTree,
    },
}

impl MedialSample {
    /// Center of a round sphere or circle.
    pub fn center(ambient_dim: usize) -> Self {
        MedialSample {
            resolution: 0.0,
            kind: MedialKind::Points(KdTree::new(ambient_dim, vec![0.0; ambient_dim])),
        }
    }

    /// Spine circle of radius `major` plus the rotation axis over the
    /// height range reachable from the torus, both sampled at spacing `h`.
    pub fn torus(major: f64, minor: f64, h: f64) -> Self {
        let mut coords = Vec::new();
        let n_spine = (std::f64::consts::TAU * major / h).ceil() as usize;
        for i in 0..n_spine {
            let th = std::f64::consts::TAU * i as f64 / n_spine as f64;
            coords.extend_from_slice(&[major * th.cos(), major * th.sin(), 0.0]);
        }
        let n_axis = (2.0 * minor / h).ceil() as usize;
        for i in 0..=n_axis {
            let z = -minor + 2.0 * minor * i as f64 / n_axis as f64;
            coords.extend_from_slice(&[0.0, 0.0, z]);
        }
        MedialSample {
            resolution: h,
            kind: MedialKind::Points(KdTree::new(3, coords)),
        }
    }

    /// Medial sheet of a triaxial ellipsoid found on a grid of step `h`
    /// over the bounding rectangle of the ellipsoid's two longest axes.
    pub fn ellipsoid(semi_axes: [f64; 3], h: f64) -> Self {
        let normal_axis = (0..3)
            .min_by(|&i, &j| semi_axes[i].total_cmp(&semi_axes[j]))
            .unwrap();
        let plane: Vec<usize> = (0..3).filter(|&i| i != normal_axis).collect();
        let plane = [plane[0], plane[1]];
        let is_medial = |u: f64, v: f64| {
            let mut q = [0.0; 3];
            q[plane[0]] = u;
            q[plane[1]] = v;
            ellipsoid::has_multiple_nearest(&semi_axes, &q)
        };
        let bisect = |mut inside: f64, mut outside: f64, along: &dyn Fn(f64) -> bool| {
            for _ in 0..64 {
                let mid = 0.5 * (inside + outside);
                if mid == inside || mid == outside {
                    break;
                }
                if along(mid) {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            inside
        };

        let extent = [semi_axes[plane[0]], semi_axes[plane[1]]];
        let steps = [(extent[0] / h).ceil() as i64, (extent[1] / h).ceil() as i64];
        let mut coords = Vec::new();
        // rows (fixed second coordinate), then columns (fixed first)
        for (axis, other) in [(0usize, 1usize), (1, 0)] {
            for j in -steps[other]..=steps[other] {
                let fixed = j as f64 * h;
                let at = |s: f64| {
                    if axis == 0 {
                        is_medial(s, fixed)
                    } else {
                        is_medial(fixed, s)
                    }
                };
                let mut prev: Option<(f64, bool)> = None;
                for i in -steps[axis]..=steps[axis] {
                    let s = i as f64 * h;
                    let here = at(s);
                    if let Some((ps, pm)) = prev {
                        if pm != here {
                            let (inside, outside) = if pm { (ps, s) } else { (s, ps) };
                            let edge = bisect(inside, outside, &at);
                            let (u, v) = if axis == 0 { (edge, fixed) } else { (fixed, edge) };
                            coords.extend_from_slice(&[u, v]);
                        }
                    }
                    prev = Some((s, here));
                }
            }
        }
        MedialSample {
            resolution: h,
            kind: MedialKind::Planar {
                semi_axes,
                plane,
                normal_axis,
                boundary: KdTree::new(2, coords),
            },
        }
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Number of stored medial samples (boundary samples for a planar sheet).
    pub fn len(&self) -> usize {
        match &self.kind {
            MedialKind::Points(tree) => tree.len(),
            MedialKind::Planar { boundary, .. } => boundary.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Distance from `x` to the sampled medial set.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match &self.kind {
            MedialKind::Points(tree) => tree.nearest(x).map_or(f64::INFINITY, |(_, d)| d),
            MedialKind::Planar {
                semi_axes,
                plane,
                normal_axis,
                boundary,
            } => {
                let height = x[*normal_axis].abs();
                let mut q = [0.0; 3];
                q[plane[0]] = x[plane[0]];
                q[plane[1]] = x[plane[1]];
                if ellipsoid::has_multiple_nearest(semi_axes, &q) {
                    return height;
                }
                let planar = boundary
                    .nearest(&[x[plane[0]], x[plane[1]]])
                    .map_or(f64::INFINITY, |(_, d)| d);
                height.hypot(planar)
            }
        }
    }

    /// Whether `x` (a point of the medial plane for ellipsoids) is detected
    /// as having more than one nearest point on the surface.
    pub fn detects_medial(&self, x: &[f64]) -> Option<bool> {
        match &self.kind {
            MedialKind::Planar { semi_axes, .. } => {
                Some(ellipsoid::has_multiple_nearest(semi_axes, x))
            }
            MedialKind::Points(_) => None,
        }
    }
}
