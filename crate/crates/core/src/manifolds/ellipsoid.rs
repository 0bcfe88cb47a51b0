//! Nearest points on an axis-aligned ellipsoid.
//!
//! For a query `y` the nearest point `x` satisfies `x_i = e_i² y_i / (λ + e_i²)`
//! for a Lagrange multiplier `λ`. When `y` has a nonzero coordinate along
//! the smallest axis, `λ` is the unique root of a monotone secular equation
//! and is found by bisection. When that coordinate is zero the query lies
//! in the symmetry plane; either the nearest points leave the plane as a
//! mirrored pair (the query is then a medial point) or the problem reduces
//! to the ellipse one dimension down.

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;

type Coords = [f64; MAX_DIM];

/// Nearest points of the ellipsoid `Σ x_i²/e_i² = 1` to `query`.
///
/// Returns one point, or the two mirror-image points when the query has
/// two nearest neighbours on the surface. Queries at the exact center of a
/// one-dimensional reduction also report two points.
pub fn nearest_points(semi_axes: &[f64], query: &[f64]) -> Vec<Vec<f64>> {
    let d = semi_axes.len();
    let (first, mirror) = nearest(semi_axes, query);
    let first = first[..d].to_vec();
    match mirror {
        Some(axis) => {
            let mut second = first.clone();
            second[axis] = -second[axis];
            vec![first, second]
        }
        None => vec![first],
    }
}

/// Whether `query` has more than one nearest point on the surface.
///
/// Only the branch analysis of the nearest-point solver is needed here, so
/// no secular equation is solved.
pub fn has_multiple_nearest(semi_axes: &[f64], query: &[f64]) -> bool {
    let d = semi_axes.len();
    assert!((1..=MAX_DIM).contains(&d) && query.len() == d);
    let mut order = [0usize, 1, 2];
    order[..d].sort_by(|&i, &j| semi_axes[j].total_cmp(&semi_axes[i]));
    let mut e = [0.0; MAX_DIM];
    let mut y = [0.0; MAX_DIM];
    for k in 0..d {
        e[k] = semi_axes[order[k]];
        y[k] = query[order[k]].abs();
    }
    let mut d = d;
    loop {
        let last = d - 1;
        if y[last] > 0.0 {
            return false;
        }
        if d == 1 {
            return true;
        }
        if plane_candidate(&e[..d], &y[..d]).is_some() {
            return true;
        }
        d -= 1;
    }
}

/// Off-plane nearest point for a query with zero coordinate along the
/// smallest axis, if it exists.
fn plane_candidate(e: &[f64], y: &[f64]) -> Option<Coords> {
    let last = e.len() - 1;
    let el2 = e[last] * e[last];
    let mut x = [0.0; MAX_DIM];
    let mut s = 0.0;
    for i in 0..last {
        let denom = e[i] * e[i] - el2;
        if denom <= 0.0 {
            // equal axes: the plane candidate does not exist
            if y[i] != 0.0 {
                return None;
            }
            continue;
        }
        x[i] = e[i] * e[i] * y[i] / denom;
        s += (x[i] / e[i]).powi(2);
    }
    if s < 1.0 {
        x[last] = e[last] * (1.0 - s).sqrt();
        Some(x)
    } else {
        None
    }
}

/// Distance from `query` to the ellipsoid surface.
pub fn distance(semi_axes: &[f64], query: &[f64]) -> f64 {
    let (x, _) = nearest(semi_axes, query);
    query
        .iter()
        .zip(x)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// One nearest point plus, when it has a mirrored twin, the original axis
/// index of the reflection.
fn nearest(semi_axes: &[f64], query: &[f64]) -> (Coords, Option<usize>) {
    let d = semi_axes.len();
    assert!((1..=MAX_DIM).contains(&d) && query.len() == d);
    let mut order = [0usize, 1, 2];
    order[..d].sort_by(|&i, &j| semi_axes[j].total_cmp(&semi_axes[i]));
    let mut e = [0.0; MAX_DIM];
    let mut y = [0.0; MAX_DIM];
    for k in 0..d {
        e[k] = semi_axes[order[k]];
        y[k] = query[order[k]].abs();
    }
    let (x, mirror) = nearest_sorted(&e[..d], &y[..d]);
    let mut out = [0.0; MAX_DIM];
    for k in 0..d {
        let i = order[k];
        out[i] = if query[i] < 0.0 { -x[k] } else { x[k] };
    }
    (out, mirror.map(|k| order[k]))
}

/// `e` sorted descending, `y >= 0`. Returns the nearest point in the
/// positive orthant and, if a mirrored twin exists, the axis of reflection.
fn nearest_sorted(e: &[f64], y: &[f64]) -> (Coords, Option<usize>) {
    let d = e.len();
    let last = d - 1;
    if y[last] > 0.0 {
        return (secular_root(e, y), None);
    }
    if d == 1 {
        return ([e[0], 0.0, 0.0], Some(0));
    }
    if let Some(x) = plane_candidate(e, y) {
        return (x, Some(last));
    }
    let (sub, mirror) = nearest_sorted(&e[..last], &y[..last]);
    let mut x = sub;
    x[last] = 0.0;
    (x, mirror)
}

fn secular_root(e: &[f64], y: &[f64]) -> Coords {
    let last = e.len() - 1;
    let g = |t: f64| -> f64 {
        e.iter()
            .zip(y)
            .map(|(&ei, &yi)| {
                let r = ei * yi / (t + ei * ei);
                r * r
            })
            .sum::<f64>()
            - 1.0
    };
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut lo = -e[last] * e[last] + e[last] * y[last];
    let mut hi = e[0] * norm;
    for _ in 0..256 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let mut x = [0.0; MAX_DIM];
    for (k, (&ei, &yi)) in e.iter().zip(y).enumerate() {
        x[k] = ei * ei * yi / (t + ei * ei);
    }
    x
}
