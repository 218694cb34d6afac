mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use stipbow_core::classify::{chi2_distance, smo_solve, stratified_folds, rbf_kernel, KnnModel};
use stipbow_core::codebook::{bow_encode, kmeans_fit, kmeans_fit_report, Codebook, KmeansParams};
use stipbow_core::descriptor::{decode_descriptors, encode_descriptors};
use stipbow_core::detector::{detect_interest_points, is_strict_local_max, response_function, DetectorParams};
use stipbow_core::gradient::{cog_from_gradients, gradient3d_grid, hog_from_gradients, RatioParams};
use stipbow_core::grid::{Grid2, Grid3};
use stipbow_core::metrics::ConfusionMatrix;
use stipbow_core::pca::pca_fit;
use stipbow_core::shape_context::{
    projected_sc_descriptors, sc3d_point_descriptors, shape_context_2d, kernel_radius, ShapeContextParams,
};
use stipbow_core::transform::{dct2, dft2, dwt2, idwt2_periodic, Daubechies, Extension};
use stipbow_core::video_io::VideoVolume;

fn energy(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn int_cloud(seed: u64, n: usize) -> Vec<[f64; 3]> {
    let mut r = rng(seed);
    (0..n).map(|_| [r.gen_range(0..30) as f64, r.gen_range(0..30) as f64, r.gen_range(0..40) as f64]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn response_is_non_negative(seed in any::<u64>()) {
        let v = random_volume(8, 7, 10, seed);
        let r = response_function(&v, &DetectorParams { sigma: 1.0, tau: 1.0, n_points: 5 }).unwrap();
        prop_assert!(r.data().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn detections_are_sorted_bordered_strict_maxima(seed in any::<u64>(), n in 1usize..20) {
        let params = DetectorParams { sigma: 1.0, tau: 1.0, n_points: n };
        let v = random_volume(14, 13, 12, seed);
        let r = response_function(&v, &params).unwrap();
        let cloud = detect_interest_points(&r, &params);
        prop_assert!(cloud.len() <= n);
        let (sh, th) = (params.spatial_half(), params.temporal_half());
        for p in &cloud.points {
            prop_assert!(p.x >= sh && p.x + sh < 14 && p.y >= sh && p.y + sh < 13 && p.t >= th && p.t + th < 12);
            prop_assert!(p.response > 0.0 && is_strict_local_max(&r, p.x, p.y, p.t));
        }
        prop_assert!(cloud.points.windows(2).all(|w| w[0].response >= w[1].response));
        prop_assert_eq!(&cloud, &detect_interest_points(&r, &params));
    }

    #[test]
    fn detections_follow_a_spatial_shift(seed in any::<u64>(), dx in 0usize..4, dy in 0usize..4) {
        let params = DetectorParams { sigma: 1.0, tau: 1.0, n_points: 50 };
        let mut r = rng(seed);
        let patch: Vec<f64> = (0..5 * 5 * 12).map(|_| r.gen::<f64>()).collect();
        // random patch on a zero background, far enough from the frame edge
        let place = |ox: usize, oy: usize| {
            VideoVolume::from_fn(28, 28, 12, |x, y, t| {
                if (ox..ox + 5).contains(&x) && (oy..oy + 5).contains(&y) {
                    patch[(t * 5 + y - oy) * 5 + x - ox]
                } else {
                    0.0
                }
            })
            .unwrap()
        };
        let a = stipbow_core::detect(&place(8, 8), &params).unwrap().0;
        let b = stipbow_core::detect(&place(8 + dx, 8 + dy), &params).unwrap().0;
        prop_assert_eq!(a.len(), b.len());
        for (p, q) in a.points.iter().zip(&b.points) {
            prop_assert_eq!((p.x + dx, p.y + dy, p.t), (q.x, q.y, q.t));
            prop_assert_eq!(p.response, q.response);
        }
    }

    #[test]
    fn shape_contexts_ignore_translation_and_scale(
        seed in any::<u64>(),
        n in 3usize..20,
        shift in (-50i32..50, -50i32..50, -50i32..50),
        scale in 2u32..4,
    ) {
        let params = ShapeContextParams::default();
        let cloud = int_cloud(seed, n);
        let moved: Vec<[f64; 3]> = cloud
            .iter()
            .map(|p| [p[0] + f64::from(shift.0), p[1] + f64::from(shift.1), p[2] + f64::from(shift.2)])
            .collect();
        let scaled: Vec<[f64; 3]> = cloud.iter().map(|p| p.map(|c| c * f64::from(scale))).collect();
        if kernel_radius(&cloud).is_err() {
            return Ok(());
        }
        let base = sc3d_point_descriptors(&cloud, &params).unwrap();
        prop_assert_eq!(&base, &sc3d_point_descriptors(&moved, &params).unwrap());
        prop_assert_eq!(&base, &sc3d_point_descriptors(&scaled, &params).unwrap());
        if let Ok(proj) = projected_sc_descriptors(&cloud, &params) {
            prop_assert_eq!(&proj, &projected_sc_descriptors(&moved, &params).unwrap());
            prop_assert_eq!(&proj, &projected_sc_descriptors(&scaled, &params).unwrap());
        }
        for d in &base {
            prop_assert_eq!(d.values.iter().sum::<f64>(), (n - 1) as f64);
        }
    }

    #[test]
    fn sc2d_counts_points_within_radius(seed in any::<u64>(), n in 2usize..25, frac in 0.1f64..1.5) {
        let mut r = rng(seed);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0)]).collect();
        let radius = frac * max_pairwise(&pts);
        prop_assume!(radius > 0.0);
        for i in 0..n {
            let h = shape_context_2d(&pts, i, &ShapeContextParams::default(), radius).unwrap();
            let within = (0..n)
                .filter(|&j| j != i && ((pts[j][0] - pts[i][0]).powi(2) + (pts[j][1] - pts[i][1]).powi(2)).sqrt() <= radius)
                .count();
            prop_assert_eq!(h.total(), within as u64);
        }
    }

    #[test]
    fn dft_and_dct_are_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (f, g) = (random_plane(9, 6, seed), random_plane(9, 6, seed ^ 1));
        let mix = Grid2::from_fn(9, 6, |x, y| a * f.get(x, y) + b * g.get(x, y));
        let (tf, tg, tm) = (dft2(&f), dft2(&g), dft2(&mix));
        for i in 0..tm.data.len() {
            let want = tf.data[i] * a + tg.data[i] * b;
            prop_assert!((tm.data[i] - want).norm() < 1e-9);
        }
        let (cf, cg, cm) = (dct2(&f), dct2(&g), dct2(&mix));
        for i in 0..cm.len() {
            prop_assert!((cm.data()[i] - (a * cf.data()[i] + b * cg.data()[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn dct_preserves_energy(seed in any::<u64>(), w in 1usize..20, h in 1usize..20) {
        let p = random_plane(w, h, seed);
        prop_assert!((energy(dct2(&p).data()) - energy(p.data())).abs() < 1e-9);
    }

    #[test]
    fn dft_magnitude_ignores_circular_shift(seed in any::<u64>(), sx in 0usize..17, sy in 0usize..11) {
        let p = random_plane(17, 11, seed);
        let shifted = Grid2::from_fn(17, 11, |x, y| p.get((x + sx) % 17, (y + sy) % 11));
        for (a, b) in dft2(&p).magnitudes().iter().zip(dft2(&shifted).magnitudes()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn periodic_dwt_round_trips_and_preserves_energy(
        seed in any::<u64>(),
        levels in 1usize..3,
        family in prop::sample::select(vec![Daubechies::D2, Daubechies::D4, Daubechies::D6, Daubechies::D8]),
    ) {
        let p = random_plane(16, 16, seed);
        let bands = dwt2(&p, levels, family, Extension::Periodic).unwrap();
        prop_assert!((energy(&bands.flatten()) - energy(p.data())).abs() < 1e-9);
        let back = idwt2_periodic(&bands, family);
        for (a, b) in back.data().iter().zip(p.data()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn affine_intensity_has_constant_interior_gradient(
        a in -4i32..4, b in -4i32..4, c in -4i32..4, d in -10i32..10,
    ) {
        let g = Grid3::from_fn((6, 5, 7), |x, y, t| {
            f64::from(a) * x as f64 + f64::from(b) * y as f64 + f64::from(c) * t as f64 + f64::from(d)
        });
        let f = gradient3d_grid(&g).unwrap();
        for t in 1..6 {
            for y in 1..4 {
                for x in 1..5 {
                    prop_assert_eq!(f.gx.get(x, y, t), f64::from(a));
                    prop_assert_eq!(f.gy.get(x, y, t), f64::from(b));
                    prop_assert_eq!(f.gt.get(x, y, t), f64::from(c));
                }
            }
        }
    }

    #[test]
    fn gradient_descriptors_ignore_intensity_offset(seed in any::<u64>(), offset in -64i32..64) {
        // intensities on a 1/256 lattice keep every difference exact
        let mut r = rng(seed);
        let base = Grid3::from_fn((5, 5, 5), |_, _, _| f64::from(r.gen_range(0u8..=255)) / 256.0);
        let lifted = Grid3::from_fn((5, 5, 5), |x, y, t| base.get(x, y, t) + f64::from(offset) / 256.0);
        let p = RatioParams::default();
        let (f0, f1) = (gradient3d_grid(&base).unwrap(), gradient3d_grid(&lifted).unwrap());
        prop_assert_eq!(hog_from_gradients(&f0, &p).unwrap(), hog_from_gradients(&f1, &p).unwrap());
        prop_assert_eq!(cog_from_gradients(&f0, &p).unwrap(), cog_from_gradients(&f1, &p).unwrap());
    }

    #[test]
    fn pca_reconstruction_error_shrinks_with_components(seed in any::<u64>()) {
        let mut r = rng(seed);
        let samples: Vec<Vec<f64>> = (0..25).map(|_| (0..6).map(|_| normal(&mut r)).collect()).collect();
        let mut last = f64::INFINITY;
        for k in 1..=6 {
            let m = pca_fit(&samples, k).unwrap();
            prop_assert!(m.explained_variance.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(m.project(&m.mean).unwrap().iter().all(|v| v.abs() < 1e-12));
            for i in 0..k {
                for j in 0..k {
                    let dot: f64 = m.components[i].iter().zip(&m.components[j]).map(|(a, b)| a * b).sum();
                    prop_assert!((dot - f64::from(u8::from(i == j))).abs() < 1e-8);
                }
            }
            let err: f64 = samples
                .iter()
                .map(|s| {
                    let back = m.reconstruct(&m.project(s).unwrap()).unwrap();
                    back.iter().zip(s).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
                })
                .sum();
            prop_assert!(err <= last + 1e-9);
            last = err;
        }
        // all six components reconstruct exactly
        prop_assert!(last < 1e-9);
    }

    #[test]
    fn kmeans_objective_never_rises_and_is_seed_deterministic(seed in any::<u64>(), k in 1usize..6) {
        let mut r = rng(seed);
        let data: Vec<Vec<f64>> = (0..40).map(|_| (0..3).map(|_| r.gen_range(-5.0..5.0)).collect()).collect();
        let params = KmeansParams::new(k, seed);
        let report = kmeans_fit_report(&data, &params).unwrap();
        prop_assert!(report.objective_history.windows(2).all(|w| w[1] <= w[0]));
        let again = kmeans_fit(&data, &params).unwrap();
        prop_assert_eq!(&report.codebook.centroids, &again.centroids);
        let h = bow_encode(&again, &data).unwrap();
        prop_assert_eq!(h.total(), data.len() as u64);
        prop_assert_eq!(h.counts.len(), k);
    }

    #[test]
    fn chi2_is_a_symmetric_premetric(seed in any::<u64>(), len in 1usize..30) {
        let mut r = rng(seed);
        let p: Vec<f64> = (0..len).map(|_| f64::from(r.gen_range(0u8..6))).collect();
        let q: Vec<f64> = (0..len).map(|_| f64::from(r.gen_range(0u8..6))).collect();
        let d = chi2_distance(&p, &q).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert_eq!(d, chi2_distance(&q, &p).unwrap());
        prop_assert_eq!(chi2_distance(&p, &p).unwrap(), 0.0);
        prop_assert_eq!(d == 0.0, p == q);
    }

    #[test]
    fn knn_ignores_common_integer_scaling(seed in any::<u64>(), c in 2u32..9, k in 1usize..6) {
        let mut r = rng(seed);
        let train: Vec<Vec<f64>> = (0..16).map(|_| (0..6).map(|_| f64::from(r.gen_range(0u8..5))).collect()).collect();
        let labels: Vec<String> = (0..16).map(|i| ["a", "b", "c"][i % 3].to_string()).collect();
        let tests: Vec<Vec<f64>> = (0..8).map(|_| (0..6).map(|_| f64::from(r.gen_range(0u8..5))).collect()).collect();
        let scale = |v: &Vec<f64>| v.iter().map(|x| x * f64::from(c)).collect::<Vec<f64>>();
        let m1 = KnnModel::new(train.clone(), labels.clone(), k).unwrap();
        let m2 = KnnModel::new(train.iter().map(scale).collect(), labels, k).unwrap();
        for t in &tests {
            prop_assert_eq!(m1.predict(t).unwrap(), m2.predict(&scale(t)).unwrap());
        }
    }

    #[test]
    fn row_normalized_confusion_rows_sum_to_one(counts in prop::collection::vec(prop::collection::vec(0u64..50, 4), 4)) {
        let m = ConfusionMatrix { classes: ["a", "b", "c", "d"].map(String::from).to_vec(), counts };
        for (row, norm) in m.counts.iter().zip(m.row_normalized()) {
            if row.iter().sum::<u64>() > 0 {
                prop_assert!((norm.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn descriptor_and_codebook_bytes_round_trip(seed in any::<u64>(), rows in 1usize..10, dim in 1usize..12) {
        let mut r = rng(seed);
        let data: Vec<Vec<f64>> = (0..rows).map(|_| (0..dim).map(|_| r.gen::<f64>() * 1e3 - 5e2).collect()).collect();
        let (d, back) = decode_descriptors(&encode_descriptors(dim, &data).unwrap()).unwrap();
        prop_assert_eq!(d, dim);
        prop_assert_eq!(&back, &data);
        let cb = Codebook { centroids: data.clone(), seed: 0 };
        prop_assert_eq!(Codebook::from_bytes(&cb.to_bytes().unwrap()).unwrap(), cb);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn smo_solution_satisfies_kkt(seed in any::<u64>(), c in prop::sample::select(vec![0.5, 2.0, 10.0]), gamma in 0.1f64..2.0) {
        let mut r = rng(seed);
        // overlapping classes so some multipliers hit the box bound
        let x: Vec<Vec<f64>> = (0..30).map(|i| {
            let cx = if i % 2 == 0 { -0.7 } else { 0.7 };
            vec![cx + normal(&mut r), normal(&mut r)]
        }).collect();
        let y: Vec<f64> = (0..30).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let kernel: Vec<Vec<f64>> = x.iter().map(|a| x.iter().map(|b| rbf_kernel(a, b, gamma)).collect()).collect();
        let tol = 1e-3;
        let sol = smo_solve(&kernel, &y, c, tol).unwrap();
        let balance: f64 = sol.alpha.iter().zip(&y).map(|(a, yi)| a * yi).sum();
        prop_assert!(balance.abs() < 1e-6);
        for i in 0..30 {
            let a = sol.alpha[i];
            prop_assert!((0.0..=c).contains(&a));
            let f: f64 = (0..30).map(|j| sol.alpha[j] * y[j] * kernel[i][j]).sum::<f64>() + sol.bias;
            let margin = y[i] * f;
            if a == 0.0 {
                prop_assert!(margin >= 1.0 - tol, "alpha=0, margin {margin}");
            } else if a < c {
                prop_assert!((margin - 1.0).abs() <= tol, "free, margin {margin}");
            } else {
                prop_assert!(margin <= 1.0 + tol, "alpha=C, margin {margin}");
            }
        }
    }

    #[test]
    fn folds_are_stratified_and_seed_deterministic(seed in any::<u64>(), folds in 2usize..6) {
        let labels: Vec<usize> = (0..37).map(|i| i % 3).collect();
        let f = stratified_folds(&labels, folds, seed);
        prop_assert_eq!(&f, &stratified_folds(&labels, folds, seed));
        for class in 0..3 {
            let mut per = vec![0usize; folds];
            for (l, fold) in labels.iter().zip(&f) {
                if *l == class {
                    per[*fold] += 1;
                }
            }
            prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
        }
    }
}
