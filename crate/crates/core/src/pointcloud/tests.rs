use super::*;
use crate::manifolds::Manifold;

fn fraction_within(cloud: &PointCloud, m: &Manifold, queries: usize, rel: f64) -> f64 {
    let step = (cloud.len() / queries).max(1);
    let idx: Vec<usize> = (0..cloud.len()).step_by(step).collect();
    let ok = idx
        .par_iter()
        .filter(|&&i| {
            let est = estimate_lfs(cloud, i, 10.0).unwrap();
            let truth = m.lfs(&cloud.position(i)).unwrap();
            (est - truth).abs() <= rel * truth
        })
        .count();
    ok as f64 / idx.len() as f64
}

#[test]
fn collinear_points_give_the_line() {
    let cloud = PointCloud::new(2, vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
    let est = estimate_tangent(&cloud, 1, 3, Some(1)).unwrap();
    let v = est.basis.vector(0);
    assert!((v[0].abs() - 0.5f64.sqrt()).abs() < 1e-12 && (v[0] - v[1]).abs() < 1e-12);
    assert!(est.gap_ratio.is_infinite() && est.reliable);
}

#[test]
fn dimension_is_picked_by_the_largest_gap() {
    let m = Manifold::sphere(3, 1.0).unwrap();
    let cloud = PointCloud::sample(&m, 5000, 1).unwrap();
    let est = estimate_tangent(&cloud, 0, 20, None).unwrap();
    assert_eq!(est.dim(), 2);
}

#[test]
fn degenerate_neighborhood_is_reported() {
    let pts = vec![vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]];
    let cloud = PointCloud::new(3, pts).unwrap();
    let err = estimate_tangent(&cloud, 0, 3, Some(2)).unwrap_err();
    assert!(matches!(err, GeoError::DegenerateNeighborhood { rank: 0, required: 2 }), "{err:?}");
}

#[test]
fn too_few_points_rejected() {
    assert!(PointCloud::new(3, vec![vec![0.0; 3]; 3]).is_err());
}

#[test]
fn text_round_trip() {
    let m = Manifold::torus(2.0, 0.5).unwrap();
    let cloud = PointCloud::sample(&m, 50, 3).unwrap();
    let mut buf = Vec::new();
    cloud.write(&mut buf).unwrap();
    let back = PointCloud::read(&buf[..]).unwrap();
    assert_eq!(back.len(), 50);
    for i in 0..50 {
        assert_eq!(back.point(i), cloud.point(i));
    }
    let headerless = PointCloud::read("1 0\n0 1\n-1 0\n\n".as_bytes()).unwrap();
    assert_eq!(headerless.ambient_dim(), 2);
    assert!(PointCloud::read("# dim 3\n1 0\n0 1\n-1 0\n0 0\n".as_bytes()).is_err());
}

#[test]
fn knn_matches_brute_force() {
    let m = Manifold::sphere(3, 1.0).unwrap();
    let cloud = PointCloud::sample(&m, 300, 5).unwrap();
    let q = [0.3, -0.2, 0.9];
    let mut brute: Vec<(usize, f64)> = (0..300)
        .map(|i| {
            let p = cloud.point(i);
            (i, p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        })
        .collect();
    brute.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    assert_eq!(cloud.knn(&q, 10), brute[..10].to_vec());
}

#[test]
fn circle_tangents_within_a_hundredth() {
    let m = Manifold::circle(1.0).unwrap();
    let cloud = PointCloud::sample(&m, 2000, 7).unwrap();
    let est = point_estimates(&cloud, 12, 10.0, Some(&m)).unwrap();
    let worst = est.iter().map(|e| e.tangent_error.unwrap()).fold(0.0, f64::max);
    assert!(worst < 0.01, "{worst}");
}

#[test]
fn sphere_tangents_mean_error() {
    let m = Manifold::sphere(3, 1.0).unwrap();
    let cloud = PointCloud::sample(&m, 20000, 8).unwrap();
    let errs: Vec<f64> = (0..cloud.len())
        .step_by(10)
        .map(|i| {
            let est = estimate_tangent(&cloud, i, 20, Some(2)).unwrap();
            sin_angle_between(&est.basis, &m.tangent_at(&cloud.position(i)).unwrap()).unwrap().asin()
        })
        .collect();
    let mean = errs.iter().sum::<f64>() / errs.len() as f64;
    assert!(mean < 0.01, "{mean}");
}

#[test]
fn circle_lfs_within_five_percent() {
    let m = Manifold::circle(1.0).unwrap();
    let cloud = PointCloud::sample(&m, 5000, 9).unwrap();
    assert_eq!(fraction_within(&cloud, &m, 5000, 0.05), 1.0);
}

#[test]
fn sphere_lfs_within_ten_percent() {
    let m = Manifold::sphere(3, 1.0).unwrap();
    let cloud = PointCloud::sample(&m, 50000, 10).unwrap();
    let f = fraction_within(&cloud, &m, 600, 0.10);
    assert!(f >= 0.99, "{f}");
}

#[test]
fn torus_lfs_within_fifteen_percent() {
    let m = Manifold::torus(2.0, 0.5).unwrap();
    let cloud = PointCloud::sample(&m, 100_000, 11).unwrap();
    let f = fraction_within(&cloud, &m, 800, 0.15);
    assert!(f >= 0.95, "{f}");
}

#[test]
fn lfs_needs_codimension_one() {
    let cloud = PointCloud::new(1, vec![vec![0.0], vec![1.0]]).unwrap();
    assert!(matches!(estimate_lfs(&cloud, 0, 1.0), Err(GeoError::CodimensionUnsupported(_))));
}

#[test]
fn circle_lfs_error_shrinks_with_density() {
    let m = Manifold::circle(1.0).unwrap();
    let medians: Vec<f64> = [1000, 2000, 4000, 8000, 16000]
        .iter()
        .map(|&n| {
            let cloud = PointCloud::sample(&m, n, 12).unwrap();
            let mut errs: Vec<f64> = (0..cloud.len())
                .into_par_iter()
                .map(|i| (estimate_lfs(&cloud, i, 10.0).unwrap() - 1.0).abs())
                .collect();
            errs.sort_by(f64::total_cmp);
            errs[errs.len() / 2]
        })
        .collect();
    let inversions = medians.windows(2).filter(|w| w[1] >= w[0]).count();
    assert!(inversions <= 1, "{medians:?}");
    assert!(medians[4] < 0.05, "{medians:?}");
}

#[test]
fn audit_with_exact_estimates_has_no_violations() {
    let m = Manifold::sphere(3, 1.0).unwrap();
    let cloud = PointCloud::sample(&m, 5000, 13).unwrap();
    let mut opts = AuditOptions::new(20, 500, 1);
    opts.truth = Some(&m);
    opts.exact_tangents = true;
    opts.exact_lfs = true;
    let rep = empirical_bound_audit(&cloud, &opts).unwrap();
    assert_eq!(rep.apparent_violations, 0);
    assert!(rep.evaluated > 450);
    assert!(!rep.estimates_unreliable);
}

#[test]
fn audit_on_dense_sphere_cloud() {
    let m = Manifold::sphere(3, 1.0).unwrap();
    let cloud = PointCloud::sample(&m, 50000, 14).unwrap();
    let rep = empirical_bound_audit(&cloud, &AuditOptions::new(20, 800, 2)).unwrap();
    assert!(rep.violation_rate < 0.01, "{rep:#?}");
}

#[test]
fn tiny_cloud_is_flagged_unreliable() {
    let m = Manifold::sphere(3, 1.0).unwrap();
    let cloud = PointCloud::sample(&m, 50, 15).unwrap();
    let mut opts = AuditOptions::new(20, 200, 3);
    opts.t_range = (0.0, 0.25);
    let rep = empirical_bound_audit(&cloud, &opts).unwrap();
    assert!(rep.estimates_unreliable, "{rep:#?}");
    assert!(rep.notes[0].starts_with("estimates unreliable"));
}

#[test]
fn jet_correction_beats_plain_pca_on_one_sided_neighborhoods() {
    // Query at the end of an arc: every neighbor lies on one side.
    let pts: Vec<Vec<f64>> = (0..40).map(|i| {
        let a = 0.01 * i as f64;
        vec![a.cos(), a.sin()]
    }).collect();
    let cloud = PointCloud::new(2, pts).unwrap();
    let exact = Manifold::circle(1.0).unwrap().tangent_at(&cloud.position(0)).unwrap();
    let pca = pca_tangent(&cloud, 0, 12, Some(1)).unwrap();
    let jet = estimate_tangent(&cloud, 0, 12, Some(1)).unwrap();
    let e_pca = sin_angle_between(&pca.basis, &exact).unwrap();
    let e_jet = sin_angle_between(&jet.basis, &exact).unwrap();
    assert_eq!(jet.jet_degree, 3);
    assert!(e_pca > 0.04, "{e_pca}");
    assert!(e_jet < 1e-4, "{e_jet}");
}
