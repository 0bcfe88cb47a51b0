//! Linear subspaces of R^N carried by orthonormal bases.
//!
//! The angle between subspaces `U` and `V` (with `dim U <= dim V`) is the
//! largest principal angle
//!
//! ```text
//! ∠(U, V) = max_{u ∈ U, |u| = 1} min_{v ∈ V, |v| = 1} ∠(u, v)
//! ```
//!
//! Every bound in this crate is stated on `sin ∠`, so [`sin_angle_between`]
//! is the primary quantity. It is the largest singular value of the
//! residual `(I - P_V) Q_U` and stays accurate for nearly parallel
//! subspaces, where `arccos` of the cross-Gram singular value loses digits.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeoError, Result};

/// Gram-matrix deviation accepted for an orthonormal basis.
pub const ORTHONORMAL_TOL: f64 = 1e-12;

/// Relative singular-value threshold used for numerical rank.
pub const RANK_TOL: f64 = 1e-10;

/// Spanning sets whose vectors all have norm at or below this are rejected.
pub const ZERO_NORM: f64 = 1e-14;

/// Orthonormal basis of a `k`-dimensional subspace of `R^N`, stored as the
/// `N × k` matrix of its basis vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    columns: DMatrix<f64>,
}

impl SubspaceBasis {
    /// Wraps an `N × k` matrix whose columns are already orthonormal.
    pub fn from_orthonormal_columns(columns: DMatrix<f64>) -> Result<Self> {
        let (n, k) = columns.shape();
        if k == 0 || k > n {
            return Err(GeoError::InvalidParameter(format!(
                "subspace dimension {k} must be in 1..={n}"
            )));
        }
        let deviation = gram_deviation(&columns);
        if deviation > ORTHONORMAL_TOL {
            return Err(GeoError::NotOrthonormal { deviation });
        }
        Ok(SubspaceBasis { columns })
    }

    /// Orthonormal basis of the orthogonal complement of a single unit
    /// normal vector. Built from a Householder reflector, so the result is
    /// orthonormal to working precision.
    pub fn complement_of_normal(normal: &DVector<f64>) -> Result<Self> {
        let n = normal.len();
        if n < 2 {
            return Err(GeoError::InvalidParameter(
                "complement needs ambient dimension >= 2".into(),
            ));
        }
        let norm = normal.norm();
        if norm <= ZERO_NORM {
            return Err(GeoError::ZeroSpan);
        }
        let unit = normal / norm;
        let pivot = unit.iamax();
        let sign = if unit[pivot] >= 0.0 { 1.0 } else { -1.0 };
        let mut w = unit.clone();
        w[pivot] += sign;
        let w2 = w.norm_squared();
        // H = I - 2 w wᵀ / |w|² maps e_pivot to -sign·unit; its other
        // columns span the complement.
        let mut columns = DMatrix::zeros(n, n - 1);
        let mut col = 0;
        for j in 0..n {
            if j == pivot {
                continue;
            }
            for i in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                columns[(i, col)] = delta - 2.0 * w[i] * w[j] / w2;
            }
            col += 1;
        }
        Self::from_orthonormal_columns(columns)
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.columns.column(i).into_owned()
    }

    /// Coordinates of `v` in this basis, `Qᵀ v`.
    pub fn coordinates(&self, v: &DVector<f64>) -> DVector<f64> {
        self.columns.tr_mul(v)
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.columns * self.coordinates(v)
    }

    /// Linear combination `Q c`.
    pub fn combine(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        &self.columns * coeffs
    }

    /// Applies a common linear map to every basis vector.
    pub fn transformed(&self, map: &DMatrix<f64>) -> Result<Self> {
        if map.ncols() != self.ambient_dim() {
            return Err(GeoError::DimensionMismatch {
                expected: self.ambient_dim(),
                got: map.ncols(),
            });
        }
        Self::from_orthonormal_columns(map * &self.columns)
    }
}

fn gram_deviation(columns: &DMatrix<f64>) -> f64 {
    let gram = columns.tr_mul(columns);
    let k = gram.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

/// Orthonormal basis of the span of `vectors`.
///
/// The numerical rank `r` counts singular values of the stacked matrix at or
/// above `RANK_TOL` times the largest one. The basis is then extracted by
/// column-pivoted Gram-Schmidt with re-orthogonalization, so a rank-one span
/// returns its dominant input direction (not an arbitrary sign).
pub fn orthonormalize(vectors: &[DVector<f64>]) -> Result<SubspaceBasis> {
    let first = vectors.first().ok_or(GeoError::ZeroSpan)?;
    let n = first.len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
        return Err(GeoError::DimensionMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    if vectors.iter().all(|v| v.norm() <= ZERO_NORM) {
        return Err(GeoError::ZeroSpan);
    }
    let stacked = DMatrix::from_columns(vectors);
    let sv = stacked.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let rank = sv.iter().filter(|&&s| s >= RANK_TOL * smax).count().min(n);

    let mut residuals: Vec<DVector<f64>> = vectors.to_vec();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(rank);
    let mut used = vec![false; residuals.len()];
    for _ in 0..rank {
        let (pick, _) = residuals
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, r)| (i, r.norm()))
            .fold((usize::MAX, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        used[pick] = true;
        let mut q = residuals[pick].clone();
        for b in &basis {
            let c = b.dot(&q);
            q.axpy(-c, b, 1.0);
        }
        let norm = q.norm();
        if norm <= ZERO_NORM * smax.max(1.0) {
            break;
        }
        q /= norm;
        for (i, r) in residuals.iter_mut().enumerate() {
            if used[i] {
                continue;
            }
            for _ in 0..2 {
                let c = q.dot(r);
                r.axpy(-c, &q, 1.0);
            }
        }
        basis.push(q);
    }
    SubspaceBasis::from_orthonormal_columns(DMatrix::from_columns(&basis))
}

fn check_pair(u: &SubspaceBasis, v: &SubspaceBasis) -> Result<()> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(GeoError::DimensionMismatch {
            expected: u.ambient_dim(),
            got: v.ambient_dim(),
        });
    }
    if u.dim() > v.dim() {
        return Err(GeoError::InvalidOrder {
            dim_u: u.dim(),
            dim_v: v.dim(),
        });
    }
    Ok(())
}

/// `sin ∠(U, V)`: largest singular value of `(I - P_V) Q_U`, clamped to `[0, 1]`.
pub fn sin_angle_between(u: &SubspaceBasis, v: &SubspaceBasis) -> Result<f64> {
    check_pair(u, v)?;
    let qu = u.columns();
    let qv = v.columns();
    let residual = qu - qv * qv.tr_mul(qu);
    let s = if residual.ncols() == 1 {
        residual.norm()
    } else {
        residual.svd(false, false).singular_values.max()
    };
    Ok(s.clamp(0.0, 1.0))
}

/// Largest principal angle `∠(U, V)` in `[0, π/2]`.
///
/// Computed as `arccos σ_min` of the cross-Gram matrix `Q_Uᵀ Q_V`; when the
/// subspaces are closer than 45° the arcsine of [`sin_angle_between`] is
/// returned instead, which is the same angle without the cancellation.
pub fn angle_between(u: &SubspaceBasis, v: &SubspaceBasis) -> Result<f64> {
    let s = sin_angle_between(u, v)?;
    if s < std::f64::consts::FRAC_1_SQRT_2 {
        return Ok(s.asin());
    }
    let gram = u.columns().tr_mul(v.columns());
    let sigma_min = gram.svd(false, false).singular_values.min();
    Ok(sigma_min.clamp(0.0, 1.0).acos())
}

/// Distance from `x` to the affine subspace `base_point + span(A)`.
pub fn distance_to_subspace(
    x: &DVector<f64>,
    base_point: &DVector<f64>,
    a: &SubspaceBasis,
) -> Result<f64> {
    let n = a.ambient_dim();
    for len in [x.len(), base_point.len()] {
        if len != n {
            return Err(GeoError::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let d = x - base_point;
    Ok((&d - a.project(&d)).norm())
}
