//! Tangent-space and local-feature-size estimation from finite samples.
//!
//! Tangents come from local PCA on k-nearest neighborhoods, corrected by a
//! polynomial fit of the normal coordinates. lfs uses the
//! shrinking-ball method: a ball tangent at the query along its normal is
//! shrunk until no other sample lies inside; the final radius approximates
//! the distance to the medial axis on that side. A normal tilted by the
//! sample spacing would bias the empty-ball radius by O(1), which is why the
//! polynomial correction matters here.

use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{bound_thm1i, THM1I_T_MAX};
use crate::error::{GeoError, Result};
use crate::manifolds::Manifold;
use crate::spatial::KdTree;
use crate::subspace::{orthonormalize, sin_angle_between, SubspaceBasis};
use crate::verify::{batch_rng, BATCH_SIZE};

/// `λ_m / λ_{m+1}` must reach this for an m-dimensional estimate to count
/// as reliable.
pub const RELIABLE_GAP_RATIO: f64 = 10.0;
pub const MAX_SHRINK_ITERS: usize = 100;
/// Share of unreliable neighborhoods above which a cloud is flagged.
pub const UNRELIABLE_FRACTION: f64 = 0.1;

pub struct PointCloud {
    dim: usize,
    index: KdTree,
    centroid: DVector<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(GeoError::Cloud("ambient dimension must be positive".into()));
        }
        if points.len() < dim + 1 {
            return Err(GeoError::Cloud(format!(
                "{} points cannot span R^{dim}; need at least {}",
                points.len(),
                dim + 1
            )));
        }
        let mut flat = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(GeoError::DimensionMismatch { expected: dim, got: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(GeoError::Cloud(format!("point {i} has a non-finite coordinate")));
            }
            flat.extend_from_slice(p);
        }
        let mut centroid = DVector::zeros(dim);
        for p in &points {
            centroid += DVector::from_column_slice(p);
        }
        centroid /= points.len() as f64;
        Ok(PointCloud { dim, index: KdTree::new(dim, flat), centroid })
    }

    /// `n` points drawn uniformly from `m`.
    pub fn sample(m: &Manifold, n: usize, seed: u64) -> Result<Self> {
        let chunks: Vec<Result<Vec<Vec<f64>>>> = (0..n.div_ceil(BATCH_SIZE))
            .into_par_iter()
            .map(|b| {
                let mut rng = batch_rng(seed, b as u64);
                (0..BATCH_SIZE.min(n - b * BATCH_SIZE))
                    .map(|_| Ok(m.sample_point(&mut rng)?.position.iter().copied().collect()))
                    .collect()
            })
            .collect();
        let mut points = Vec::with_capacity(n);
        for c in chunks {
            points.extend(c?);
        }
        PointCloud::new(m.ambient_dim(), points)
    }

    /// Plain text, one point per line, whitespace-separated; an optional
    /// `# dim N` header fixes the dimension, other `#` lines are comments.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut dim = None;
        let mut points = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| GeoError::Cloud(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let mut words = comment.split_whitespace();
                if words.next() == Some("dim") {
                    let n = words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| GeoError::Cloud(format!("line {}: bad dim header", lineno + 1)))?;
                    dim = Some(n);
                }
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|w| w.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| GeoError::Cloud(format!("line {}: {e}", lineno + 1)))?;
            points.push(row);
        }
        let dim = match dim.or_else(|| points.first().map(Vec::len)) {
            Some(d) => d,
            None => return Err(GeoError::Cloud("empty cloud".into())),
        };
        PointCloud::new(dim, points)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| GeoError::Cloud(format!("{}: {e}", path.display())))?;
        PointCloud::read(std::io::BufReader::new(file))
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# dim {}", self.dim)?;
        for i in 0..self.len() {
            let row: Vec<String> = self.point(i).iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.index.point(i)
    }

    pub fn position(&self, i: usize) -> DVector<f64> {
        DVector::from_column_slice(self.point(i))
    }

    /// The `k` nearest samples to `q`, nearest first, as `(index, distance)`.
    pub fn knn(&self, q: &[f64], k: usize) -> Vec<(usize, f64)> {
        self.index.knn(q, k)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(GeoError::InvalidParameter(format!(
                "query index {i} out of range for {} points",
                self.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TangentEstimate {
    pub basis: SubspaceBasis,
    /// Orthonormal complement of `basis`.
    pub normals: Vec<DVector<f64>>,
    /// Covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// `λ_m / λ_{m+1}`; infinite when `λ_{m+1}` vanishes.
    pub gap_ratio: f64,
    pub reliable: bool,
    /// Degree of the polynomial fit applied on top of PCA, 0 for none.
    pub jet_degree: usize,
}

impl TangentEstimate {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}

/// Local PCA at sample `query` over its `k` nearest neighbors, including
/// itself. With `m = None` the dimension is the one at the largest
/// eigenvalue ratio.
///
/// PCA alone tilts by about half the neighborhood's extent times the
/// curvature when the neighbors sit mostly on one side. When `k` allows it,
/// the PCA frame is corrected by fitting the normal coordinates as
/// polynomials of the tangent coordinates and reading off their gradients
/// at the query.
pub fn estimate_tangent(cloud: &PointCloud, query: usize, k: usize, m: Option<usize>) -> Result<TangentEstimate> {
    let mut est = pca_tangent(cloud, query, k, m)?;
    let degree = jet_degree(est.dim(), k);
    if degree > 0 && !est.normals.is_empty() {
        if let Some(refined) = jet_refine(cloud, query, k, &est, degree) {
            est.basis = refined;
            est.normals = complement(&est.basis, &est.normals)?;
            est.jet_degree = degree;
        }
    }
    Ok(est)
}

/// Plain local PCA, without the polynomial correction.
pub fn pca_tangent(cloud: &PointCloud, query: usize, k: usize, m: Option<usize>) -> Result<TangentEstimate> {
    cloud.check_index(query)?;
    let n_dim = cloud.ambient_dim();
    if let Some(m) = m {
        if m == 0 || m >= n_dim {
            return Err(GeoError::InvalidParameter(format!(
                "tangent dimension {m} must lie in 1..{n_dim}"
            )));
        }
    }
    let need = m.unwrap_or(1) + 1;
    if k < need || k > cloud.len() {
        return Err(GeoError::InvalidParameter(format!(
            "k = {k} must lie in {need}..={}",
            cloud.len()
        )));
    }
    let nbrs = cloud.knn(cloud.point(query), k);
    let mut mean = DVector::zeros(n_dim);
    for &(j, _) in &nbrs {
        mean += cloud.position(j);
    }
    mean /= k as f64;
    let mut cov = DMatrix::zeros(n_dim, n_dim);
    for &(j, _) in &nbrs {
        let d = cloud.position(j) - &mean;
        cov += &d * d.transpose();
    }
    cov /= k as f64;

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..n_dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let ratio = |i: usize| {
        if eigenvalues[i] > 0.0 {
            eigenvalues[i - 1] / eigenvalues[i]
        } else if eigenvalues[i - 1] > 0.0 {
            f64::INFINITY
        } else {
            1.0
        }
    };
    let m = m.unwrap_or_else(|| {
        (1..n_dim)
            .max_by(|&a, &b| ratio(a).total_cmp(&ratio(b)).then(b.cmp(&a)))
            .unwrap_or(1)
    });
    let top = eigenvalues[0];
    let rank = eigenvalues.iter().filter(|&&l| l > top * 1e-12 && l > 0.0).count();
    if rank < m {
        return Err(GeoError::DegenerateNeighborhood { rank, required: m });
    }
    let gap_ratio = ratio(m);
    let columns: Vec<DVector<f64>> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    let basis = SubspaceBasis::from_orthonormal_columns(DMatrix::from_columns(&columns[..m]))?;
    Ok(TangentEstimate {
        basis,
        normals: columns[m..].to_vec(),
        eigenvalues,
        gap_ratio,
        reliable: gap_ratio >= RELIABLE_GAP_RATIO,
        jet_degree: 0,
    })
}

fn monomial_exponents(m: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == m - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(m, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for d in 1..=degree {
        rec(m, d, &mut Vec::new(), &mut out);
    }
    out
}

/// Highest fit degree (3 or 2) with at least twice as many neighbors as
/// unknowns, or 0.
fn jet_degree(m: usize, k: usize) -> usize {
    [3, 2]
        .into_iter()
        .find(|&d| k > 2 * monomial_exponents(m, d).len())
        .unwrap_or(0)
}

fn jet_refine(cloud: &PointCloud, query: usize, k: usize, est: &TangentEstimate, degree: usize) -> Option<SubspaceBasis> {
    let m = est.dim();
    let exps = monomial_exponents(m, degree);
    let p = cloud.position(query);
    let nbrs = cloud.knn(cloud.point(query), k);
    let scale = nbrs.last().map(|n| n.1).filter(|&s| s > 0.0)?;
    let mut a = DMatrix::zeros(k, exps.len());
    let mut heights = DMatrix::zeros(k, est.normals.len());
    for (row, &(j, _)) in nbrs.iter().enumerate() {
        let d = (cloud.position(j) - &p) / scale;
        let u = est.basis.coordinates(&d);
        for (col, e) in exps.iter().enumerate() {
            a[(row, col)] = e.iter().enumerate().map(|(i, &ei)| u[i].powi(ei as i32)).product();
        }
        for (c, n) in est.normals.iter().enumerate() {
            heights[(row, c)] = n.dot(&d);
        }
    }
    let coeffs = a.svd(true, true).solve(&heights, 1e-12).ok()?;
    // Rows 0..m of the solution are the linear monomials: the gradients of
    // each height function at the query.
    let tangents: Vec<DVector<f64>> = (0..m)
        .map(|i| {
            let mut v = est.basis.vector(i);
            for (c, n) in est.normals.iter().enumerate() {
                v += n * coeffs[(i, c)];
            }
            v
        })
        .collect();
    let basis = orthonormalize(&tangents).ok()?;
    (basis.dim() == m).then_some(basis)
}

fn complement(basis: &SubspaceBasis, normals: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    let residuals: Vec<DVector<f64>> = normals.iter().map(|n| n - basis.project(n)).collect();
    let q = orthonormalize(&residuals)?;
    Ok((0..q.dim()).map(|i| q.vector(i)).collect())
}

/// Unit normal at a codimension-one sample.
pub fn refined_normal(cloud: &PointCloud, query: usize, k: usize) -> Result<DVector<f64>> {
    let n_dim = cloud.ambient_dim();
    if n_dim < 2 {
        return Err(GeoError::CodimensionUnsupported(0));
    }
    let est = estimate_tangent(cloud, query, k, Some(n_dim - 1))?;
    Ok(est.normals[0].clone())
}

fn default_normal_k(cloud: &PointCloud) -> usize {
    let m = cloud.ambient_dim().saturating_sub(1).max(1);
    (2 * monomial_exponents(m, 3).len() + 6).min(cloud.len())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LfsEstimate {
    pub lfs: f64,
    /// Radius of the empty tangent ball on each side of the oriented normal.
    pub inner: f64,
    pub outer: f64,
}

/// Shrinking-ball lfs at sample `query` with default neighborhood size.
pub fn estimate_lfs(cloud: &PointCloud, query: usize, initial_radius: f64) -> Result<f64> {
    Ok(estimate_lfs_detailed(cloud, query, initial_radius, default_normal_k(cloud))?.lfs)
}

pub fn estimate_lfs_detailed(cloud: &PointCloud, query: usize, initial_radius: f64, normal_k: usize) -> Result<LfsEstimate> {
    cloud.check_index(query)?;
    let n_dim = cloud.ambient_dim();
    if n_dim < 2 {
        return Err(GeoError::CodimensionUnsupported(0));
    }
    if !(initial_radius.is_finite() && initial_radius > 0.0) {
        return Err(GeoError::DomainError { what: "initial_radius", value: initial_radius });
    }
    let mut normal = refined_normal(cloud, query, normal_k)?;
    let p = cloud.position(query);
    // Outward means away from the cloud centroid, which suits star-shaped
    // clouds. Only the reported sides depend on it; the minimum does not.
    if normal.dot(&(&p - &cloud.centroid)) < 0.0 {
        normal = -normal;
    }
    let inner = shrink(cloud, query, &p, &(-&normal), initial_radius)?;
    let outer = shrink(cloud, query, &p, &normal, initial_radius)?;
    Ok(LfsEstimate { lfs: inner.min(outer), inner, outer })
}

fn shrink(cloud: &PointCloud, query: usize, p: &DVector<f64>, dir: &DVector<f64>, r0: f64) -> Result<f64> {
    let mut r = r0;
    let coincident = 1e-12 * r0;
    for _ in 0..MAX_SHRINK_ITERS {
        let c = p + dir * r;
        let inside = cloud
            .index
            .knn(c.as_slice(), 3)
            .into_iter()
            .find(|&(j, _)| j != query && (cloud.position(j) - p).norm() > coincident);
        let Some((j, dist)) = inside else { return Ok(r) };
        if dist >= r * (1.0 - 1e-12) {
            return Ok(r);
        }
        let d = cloud.position(j) - p;
        let along = d.dot(dir);
        if along <= 0.0 {
            return Ok(r);
        }
        let next = d.norm_squared() / (2.0 * along);
        if next >= r {
            return Ok(r);
        }
        r = next;
    }
    Err(GeoError::NoConvergence(MAX_SHRINK_ITERS))
}

#[derive(Debug, Clone, Serialize)]
pub struct PointEstimate {
    pub index: usize,
    pub lfs: f64,
    pub gap_ratio: f64,
    pub reliable: bool,
    /// Filled in when the generating manifold is known.
    pub true_lfs: Option<f64>,
    pub tangent_error: Option<f64>,
}

/// Tangent and lfs estimates at every sample.
pub fn point_estimates(
    cloud: &PointCloud,
    k: usize,
    initial_radius: f64,
    truth: Option<&Manifold>,
) -> Result<Vec<PointEstimate>> {
    let all: Vec<usize> = (0..cloud.len()).collect();
    point_estimates_at(cloud, &all, k, initial_radius, truth)
}

/// Tangent and lfs estimates at the listed samples, with errors against
/// `truth` when given.
pub fn point_estimates_at(
    cloud: &PointCloud,
    indices: &[usize],
    k: usize,
    initial_radius: f64,
    truth: Option<&Manifold>,
) -> Result<Vec<PointEstimate>> {
    let normal_k = default_normal_k(cloud);
    let m = cloud.ambient_dim().saturating_sub(1).max(1);
    indices
        .par_iter()
        .map(|&i| {
            let t = estimate_tangent(cloud, i, k, Some(m))?;
            let lfs = estimate_lfs_detailed(cloud, i, initial_radius, normal_k)?.lfs;
            let (true_lfs, tangent_error) = match truth {
                Some(man) => {
                    let x = cloud.position(i);
                    let exact = man.tangent_at(&x)?;
                    let sin = sin_angle_between(&t.basis, &exact)?;
                    (Some(man.lfs(&x)?), Some(sin.asin()))
                }
                None => (None, None),
            };
            Ok(PointEstimate { index: i, lfs, gap_ratio: t.gap_ratio, reliable: t.reliable, true_lfs, tangent_error })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateSummary {
    pub count: usize,
    pub reliable_fraction: f64,
    pub median_lfs: f64,
    /// Present when the generating manifold is known.
    pub median_lfs_relative_error: Option<f64>,
    pub median_tangent_error: Option<f64>,
    pub max_tangent_error: Option<f64>,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) })
}

pub fn summarize(estimates: &[PointEstimate]) -> EstimateSummary {
    let mut lfs: Vec<f64> = estimates.iter().map(|e| e.lfs).collect();
    let mut rel: Vec<f64> = estimates
        .iter()
        .filter_map(|e| e.true_lfs.map(|t| (e.lfs - t).abs() / t))
        .collect();
    let mut tan: Vec<f64> = estimates.iter().filter_map(|e| e.tangent_error).collect();
    let max_tan = tan.iter().copied().reduce(f64::max);
    EstimateSummary {
        count: estimates.len(),
        reliable_fraction: estimates.iter().filter(|e| e.reliable).count() as f64 / estimates.len().max(1) as f64,
        median_lfs: median(&mut lfs).unwrap_or(f64::NAN),
        median_lfs_relative_error: median(&mut rel),
        median_tangent_error: median(&mut tan),
        max_tangent_error: max_tan,
    }
}

pub fn write_estimates_csv<W: Write>(estimates: &[PointEstimate], mut w: W) -> std::io::Result<()> {
    let opt = |v: Option<f64>| v.map(crate::verify::fmt_f64).unwrap_or_default();
    writeln!(w, "index,lfs_est,gap_ratio,reliable,lfs_true,tangent_error")?;
    for e in estimates {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            e.index,
            crate::verify::fmt_f64(e.lfs),
            crate::verify::fmt_f64(e.gap_ratio),
            e.reliable,
            opt(e.true_lfs),
            opt(e.tangent_error)
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct AuditOptions<'a> {
    pub k: usize,
    pub n_pairs: usize,
    pub seed: u64,
    pub t_range: (f64, f64),
    pub initial_radius: f64,
    pub tolerance: f64,
    /// Generating manifold, if known. Needed for the overrides below.
    pub truth: Option<&'a Manifold>,
    pub exact_tangents: bool,
    pub exact_lfs: bool,
}

impl<'a> AuditOptions<'a> {
    pub fn new(k: usize, n_pairs: usize, seed: u64) -> Self {
        AuditOptions {
            k,
            n_pairs,
            seed,
            t_range: (0.05, THM1I_T_MAX),
            initial_radius: 10.0,
            tolerance: crate::verify::ANALYTIC_TOLERANCE,
            truth: None,
            exact_tangents: false,
            exact_lfs: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub n_points: usize,
    pub k: usize,
    pub n_pairs: usize,
    pub seed: u64,
    pub t_range: (f64, f64),
    pub exact_tangents: bool,
    pub exact_lfs: bool,
    pub evaluated: u64,
    /// Anchors with no partner at a normalized distance inside `t_range`.
    pub skipped: u64,
    pub apparent_violations: u64,
    pub violation_rate: f64,
    pub max_tightness: f64,
    /// Share of anchor neighborhoods failing the spectral-gap test.
    pub unreliable_fraction: f64,
    pub estimates_unreliable: bool,
    pub notes: Vec<String>,
}

struct Partial {
    evaluated: u64,
    skipped: u64,
    violations: u64,
    unreliable: u64,
    anchors: u64,
    max_tightness: f64,
}

/// Audits the first tangent-variation bound using estimated tangents and
/// lfs, reporting how estimator noise shows up as apparent violations.
pub fn empirical_bound_audit(cloud: &PointCloud, opts: &AuditOptions) -> Result<AuditReport> {
    let (lo, hi) = opts.t_range;
    if !(lo >= 0.0 && hi > lo && hi <= THM1I_T_MAX) {
        return Err(GeoError::InvalidParameter(format!("audit t range ({lo}, {hi}] outside (0, 1/4]")));
    }
    if (opts.exact_tangents || opts.exact_lfs) && opts.truth.is_none() {
        return Err(GeoError::InvalidParameter("exact overrides need the generating manifold".into()));
    }
    let m = cloud.ambient_dim() - 1;
    let normal_k = default_normal_k(cloud);
    let tangent = |i: usize| -> Result<(SubspaceBasis, bool)> {
        match (opts.exact_tangents, opts.truth) {
            (true, Some(man)) => Ok((man.tangent_at(&cloud.position(i))?, true)),
            _ => {
                let t = estimate_tangent(cloud, i, opts.k, Some(m))?;
                Ok((t.basis, t.reliable))
            }
        }
    };
    let lfs = |i: usize| -> Result<f64> {
        match (opts.exact_lfs, opts.truth) {
            (true, Some(man)) => man.lfs(&cloud.position(i)),
            _ => Ok(estimate_lfs_detailed(cloud, i, opts.initial_radius, normal_k)?.lfs),
        }
    };

    let partials: Vec<Result<Partial>> = (0..opts.n_pairs.div_ceil(BATCH_SIZE))
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(opts.seed, b as u64);
            let mut acc = Partial { evaluated: 0, skipped: 0, violations: 0, unreliable: 0, anchors: 0, max_tightness: 0.0 };
            for _ in 0..BATCH_SIZE.min(opts.n_pairs - b * BATCH_SIZE) {
                let i = rng.random_range(0..cloud.len());
                let (tp, reliable) = tangent(i)?;
                acc.anchors += 1;
                if !reliable {
                    acc.unreliable += 1;
                }
                let lfs_p = lfs(i)?;
                let candidates: Vec<(usize, f64)> = cloud
                    .index
                    .within_radius(cloud.point(i), hi * lfs_p)
                    .into_iter()
                    .filter(|&(_, d)| d > lo * lfs_p)
                    .collect();
                let Some(&(j, dist)) = candidates.choose(&mut rng) else {
                    acc.skipped += 1;
                    continue;
                };
                let (tq, _) = tangent(j)?;
                let t = dist / lfs_p;
                let bound = bound_thm1i(t)?;
                let sin = sin_angle_between(&tp, &tq)?;
                acc.evaluated += 1;
                acc.max_tightness = acc.max_tightness.max(sin / bound);
                if sin > bound * (1.0 + opts.tolerance) + crate::verify::ABS_FLOOR {
                    acc.violations += 1;
                }
            }
            Ok(acc)
        })
        .collect();

    let mut total = Partial { evaluated: 0, skipped: 0, violations: 0, unreliable: 0, anchors: 0, max_tightness: 0.0 };
    for p in partials {
        let p = p?;
        total.evaluated += p.evaluated;
        total.skipped += p.skipped;
        total.violations += p.violations;
        total.unreliable += p.unreliable;
        total.anchors += p.anchors;
        total.max_tightness = total.max_tightness.max(p.max_tightness);
    }
    let unreliable_fraction = total.unreliable as f64 / total.anchors.max(1) as f64;
    let estimates_unreliable = unreliable_fraction > UNRELIABLE_FRACTION;
    let mut notes = Vec::new();
    if estimates_unreliable {
        notes.push(format!(
            "estimates unreliable: {:.1}% of neighborhoods fail the spectral-gap test",
            100.0 * unreliable_fraction
        ));
    }
    Ok(AuditReport {
        n_points: cloud.len(),
        k: opts.k,
        n_pairs: opts.n_pairs,
        seed: opts.seed,
        t_range: opts.t_range,
        exact_tangents: opts.exact_tangents,
        exact_lfs: opts.exact_lfs,
        evaluated: total.evaluated,
        skipped: total.skipped,
        apparent_violations: total.violations,
        violation_rate: total.violations as f64 / total.evaluated.max(1) as f64,
        max_tightness: total.max_tightness,
        unreliable_fraction,
        estimates_unreliable,
        notes,
    })
}

#[cfg(test)]
mod tests;
