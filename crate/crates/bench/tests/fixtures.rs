use stipbow_bench::{blob_volume, clustered_points, random_plane};

#[test]
fn fixtures_are_deterministic() {
    assert_eq!(random_plane(5, 4, 9), random_plane(5, 4, 9));
    assert_ne!(random_plane(5, 4, 9), random_plane(5, 4, 10));
    assert_eq!(clustered_points(3, 4, 2, 1), clustered_points(3, 4, 2, 1));
    assert_eq!(blob_volume(32, 32, 32).dims(), (32, 32, 32));
}

#[test]
fn clusters_have_the_requested_shape() {
    let pts = clustered_points(3, 5, 4, 2);
    assert_eq!(pts.len(), 15);
    assert!(pts.iter().all(|p| p.len() == 4));
    // first coordinate of cluster c sits within 0.5 of 10c
    for (i, p) in pts.iter().enumerate() {
        assert!((p[0] - 10.0 * (i / 5) as f64).abs() <= 0.5);
    }
}
