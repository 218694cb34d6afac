//! Independent reference implementations used by the integration tests.
//!
//! These are written from the mathematical definitions with plain loops and
//! share no code with the library beyond its public data types.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stipbow_core::grid::{Grid2, Grid3};
use stipbow_core::video_io::{DatasetManifest, ManifestEntry, Split, VideoVolume};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_volume(w: usize, h: usize, f: usize, seed: u64) -> VideoVolume {
    let mut r = rng(seed);
    VideoVolume::from_fn(w, h, f, |_, _, _| r.gen::<f64>()).unwrap()
}

pub fn random_plane(w: usize, h: usize, seed: u64) -> Grid2 {
    let mut r = rng(seed);
    Grid2::from_fn(w, h, |_, _| r.gen_range(-1.0..1.0))
}

pub fn random_grid3(dims: (usize, usize, usize), seed: u64) -> Grid3 {
    let mut r = rng(seed);
    Grid3::from_fn(dims, |_, _, _| r.gen::<f64>())
}

pub fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// (even, odd) temporal taps at offsets -R..=R.
pub fn gabor_taps(tau: f64) -> (Vec<f64>, Vec<f64>) {
    let r = (3.0 * tau).ceil() as i64;
    let w = 4.0 / tau;
    let env = |t: f64| (-(t * t) / (tau * tau)).exp();
    let ev = (-r..=r).map(|t| -(2.0 * PI * t as f64 * w).cos() * env(t as f64)).collect();
    let od = (-r..=r).map(|t| -(2.0 * PI * t as f64 * w).sin() * env(t as f64)).collect();
    (ev, od)
}

/// Response by direct triple summation over the separable kernel support,
/// with edge replication. Returned x-fastest.
pub fn direct_response(v: &VideoVolume, sigma: f64, tau: f64) -> Vec<f64> {
    let g = gaussian_taps(sigma);
    let (ev, od) = gabor_taps(tau);
    let rs = (g.len() / 2) as i64;
    let rt = (ev.len() / 2) as i64;
    let (w, h, f) = v.dims();
    let clamp = |i: i64, n: usize| i.clamp(0, n as i64 - 1) as usize;
    let mut out = Vec::with_capacity(w * h * f);
    for t in 0..f as i64 {
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let (mut a, mut b) = (0.0, 0.0);
                for k in -rt..=rt {
                    for j in -rs..=rs {
                        for i in -rs..=rs {
                            let s = v.get(clamp(x - i, w), clamp(y - j, h), clamp(t - k, f))
                                * g[(i + rs) as usize]
                                * g[(j + rs) as usize];
                            a += s * ev[(k + rt) as usize];
                            b += s * od[(k + rt) as usize];
                        }
                    }
                }
                out.push(a * a + b * b);
            }
        }
    }
    out
}

/// F(u,v) = Σ f(x,y) e^{-2πi(ux/W + vy/H)} as (re, im), row-major in (u, v).
pub fn naive_dft(p: &Grid2) -> Vec<(f64, f64)> {
    let (w, h) = (p.width(), p.height());
    let mut out = Vec::with_capacity(w * h);
    for v in 0..h {
        for u in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let a = -2.0 * PI * ((u * x) as f64 / w as f64 + (v * y) as f64 / h as f64);
                    re += p.get(x, y) * a.cos();
                    im += p.get(x, y) * a.sin();
                }
            }
            out.push((re, im));
        }
    }
    out
}

/// Orthonormal DCT-II: C(u,v) = α(u)α(v) Σ f(x,y) cos(π(2x+1)u/2W) cos(π(2y+1)v/2H).
pub fn naive_dct(p: &Grid2) -> Vec<f64> {
    let (w, h) = (p.width(), p.height());
    let alpha = |k: usize, n: usize| if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
    let mut out = Vec::with_capacity(w * h);
    for v in 0..h {
        for u in 0..w {
            let mut s = 0.0;
            for y in 0..h {
                for x in 0..w {
                    s += p.get(x, y)
                        * (PI * (2 * x + 1) as f64 * u as f64 / (2 * w) as f64).cos()
                        * (PI * (2 * y + 1) as f64 * v as f64 / (2 * h) as f64).cos();
                }
            }
            out.push(alpha(u, w) * alpha(v, h) * s);
        }
    }
    out
}

/// D4 analysis low-pass from the closed form.
pub fn d4_lowpass() -> Vec<f64> {
    let s3 = 3f64.sqrt();
    let d = 4.0 * 2f64.sqrt();
    vec![(1.0 - s3) / d, (3.0 - s3) / d, (3.0 + s3) / d, (1.0 + s3) / d]
}

/// Quadrature mirror high-pass of a low-pass filter.
pub fn qmf_highpass(lo: &[f64]) -> Vec<f64> {
    let n = lo.len();
    (0..n).map(|k| if k % 2 == 0 { -lo[n - 1 - k] } else { lo[n - 1 - k] }).collect()
}

/// Half-sample symmetric extension: pad `n` samples each side.
fn sym_pad(x: &[f64], n: usize) -> Vec<f64> {
    let len = x.len() as i64;
    (-(n as i64)..len + n as i64)
        .map(|j| {
            let mut j = j;
            while j < 0 || j >= len {
                j = if j < 0 { -1 - j } else { 2 * len - 1 - j };
            }
            x[j as usize]
        })
        .collect()
}

/// Full convolution of the extended signal followed by keeping odd samples.
pub fn filter_downsample(x: &[f64], filter: &[f64]) -> Vec<f64> {
    let l = filter.len();
    let pad = sym_pad(x, l);
    let conv: Vec<f64> = (0..pad.len())
        .map(|n| (0..l).filter(|&k| n >= k).map(|k| filter[k] * pad[n - k]).sum())
        .collect();
    let keep = (x.len() + l - 1) / 2;
    // conv index n corresponds to signal index n - l
    (0..keep).map(|i| conv[2 * i + 1 + l]).collect()
}

/// One 2D level: filter `fx` along rows, then `fy` along columns.
pub fn dwt_level_oracle(p: &Grid2, fx: &[f64], fy: &[f64]) -> Grid2 {
    let rows: Vec<Vec<f64>> = (0..p.height()).map(|y| filter_downsample(p.row(y), fx)).collect();
    let w = rows[0].len();
    let cols: Vec<Vec<f64>> = (0..w)
        .map(|x| filter_downsample(&rows.iter().map(|r| r[x]).collect::<Vec<_>>(), fy))
        .collect();
    Grid2::from_fn(w, cols[0].len(), |x, y| cols[x][y])
}

/// Brute-force 2D shape context: explicit scan of every (radial, angular)
/// bin for each point, radial bins (lo, hi] with the innermost reaching 0.
pub fn sc2d_oracle(points: &[[f64; 2]], reference: usize, n_r: usize, n_a: usize, radius: f64) -> Vec<u32> {
    let mut bins = vec![0u32; n_r * n_a];
    let o = points[reference];
    for (i, q) in points.iter().enumerate() {
        if i == reference {
            continue;
        }
        let (dx, dy) = (q[0] - o[0], q[1] - o[1]);
        let d = (dx * dx + dy * dy).sqrt();
        let mut theta = dy.atan2(dx);
        if theta < 0.0 {
            theta += 2.0 * PI;
        }
        for rb in 0..n_r {
            let hi = radius / 2f64.powi((n_r - 1 - rb) as i32);
            let lo = if rb == 0 { -1.0 } else { radius / 2f64.powi((n_r - rb) as i32) };
            if d > lo && d <= hi {
                let ab = ((n_a as f64 * theta / (2.0 * PI)).floor() as usize).min(n_a - 1);
                bins[rb * n_a + ab] += 1;
            }
        }
    }
    bins
}

pub fn sc3d_oracle(points: &[[f64; 3]], reference: usize, n_r: usize, n_a: usize, radius: f64) -> Vec<u32> {
    let mut bins = vec![0u32; n_r * n_a * n_a];
    let o = points[reference];
    for (i, q) in points.iter().enumerate() {
        if i == reference {
            continue;
        }
        let (dx, dy, dt) = (q[0] - o[0], q[1] - o[1], q[2] - o[2]);
        let planar = (dx * dx + dy * dy).sqrt();
        let d = (dx * dx + dy * dy + dt * dt).sqrt();
        let phi = planar.atan2(dt);
        let mut theta = dy.atan2(dx);
        if theta < 0.0 {
            theta += 2.0 * PI;
        }
        for rb in 0..n_r {
            let hi = radius / 2f64.powi((n_r - 1 - rb) as i32);
            let lo = if rb == 0 { -1.0 } else { radius / 2f64.powi((n_r - rb) as i32) };
            if d > lo && d <= hi {
                let pb = ((n_a as f64 * phi / PI).floor() as usize).min(n_a - 1);
                let tb = if planar == 0.0 { 0 } else { ((n_a as f64 * theta / (2.0 * PI)).floor() as usize).min(n_a - 1) };
                bins[(rb * n_a + pb) * n_a + tb] += 1;
            }
        }
    }
    bins
}

pub fn max_pairwise<const D: usize>(points: &[[f64; D]]) -> f64 {
    let mut best = 0.0f64;
    for a in points {
        for b in points {
            let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            best = best.max(d);
        }
    }
    best
}

/// Joint ratio bin of one gradient vector, `None` when masked.
pub fn ratio_bin(gx: f64, gy: f64, gt: f64, partitions: usize, eps: f64) -> Option<usize> {
    if gx.abs() < eps || gx == 0.0 {
        return None;
    }
    let norm = |r: f64| r.atan() / PI + 0.5;
    let b = |v: f64| ((v * partitions as f64).floor() as usize).min(partitions - 1);
    Some(b(norm(gy / gx)) * partitions + b(norm(gt / gx)))
}

/// Correlogram by enumerating every ordered voxel pair.
pub fn cog_oracle(gx: &Grid3, gy: &Grid3, gt: &Grid3, partitions: usize, d_max: usize, eps: f64) -> Vec<f64> {
    let nb = partitions * partitions;
    let n = gx.len();
    let bins: Vec<Option<usize>> = (0..n)
        .map(|i| ratio_bin(gx.data()[i], gy.data()[i], gt.data()[i], partitions, eps))
        .collect();
    let mag: Vec<f64> = (0..n)
        .map(|i| (gx.data()[i].powi(2) + gy.data()[i].powi(2) + gt.data()[i].powi(2)).sqrt())
        .collect();
    let mut table = vec![0.0; nb * nb * d_max];
    for u in 0..n {
        let Some(i) = bins[u] else { continue };
        let (ux, uy, ut) = gx.coords(u);
        for v in 0..n {
            let Some(j) = bins[v] else { continue };
            let (vx, vy, vt) = gx.coords(v);
            let k = ux.abs_diff(vx).max(uy.abs_diff(vy)).max(ut.abs_diff(vt));
            if k >= 1 && k <= d_max {
                table[(i * nb + j) * d_max + k - 1] += mag[u];
            }
        }
    }
    table
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues descending with matching unit eigenvectors.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].total_cmp(&m[i][i]));
    let vals = order.iter().map(|&i| m[i][i]).collect();
    let vecs = order.iter().map(|&i| (0..n).map(|k| v[k][i]).collect()).collect();
    (vals, vecs)
}

pub fn covariance(samples: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = samples.len();
    let d = samples[0].len();
    let mean: Vec<f64> = (0..d).map(|j| samples.iter().map(|s| s[j]).sum::<f64>() / n as f64).collect();
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| samples.iter().map(|s| (s[a] - mean[a]) * (s[b] - mean[b])).sum::<f64>() / (n - 1) as f64)
                .collect()
        })
        .collect()
}

/// Projects `v` onto {0 ≤ α ≤ C, yᵀα = 0} by bisection on the multiplier.
fn project_feasible(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |mu: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - mu * yi).clamp(0.0, c)).collect() };
    let g = |mu: f64| -> f64 { at(mu).iter().zip(y).map(|(a, yi)| a * yi).sum() };
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // g is non-increasing in mu
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Dual SVM solved by accelerated projected gradient. Returns (α, bias).
pub fn qp_oracle(kernel: &[Vec<f64>], y: &[f64], c: f64, iters: usize) -> (Vec<f64>, f64) {
    let n = y.len();
    let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * kernel[i][j]).collect()).collect();
    // largest eigenvalue of Q by power iteration
    let mut b = vec![1.0; n];
    let mut lmax = 1.0;
    for _ in 0..500 {
        let nb: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q[i][j] * b[j]).sum()).collect();
        let norm = nb.iter().map(|v| v * v).sum::<f64>().sqrt();
        lmax = norm / b.iter().map(|v| v * v).sum::<f64>().sqrt();
        b = nb.into_iter().map(|v| v / norm).collect();
    }
    let step = 1.0 / (lmax * 1.01);
    let mut alpha = vec![0.0; n];
    let mut z = alpha.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let grad: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q[i][j] * z[j]).sum::<f64>() - 1.0).collect();
        let next = project_feasible(&z.iter().zip(&grad).map(|(zi, gi)| zi - step * gi).collect::<Vec<_>>(), y, c);
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = next.iter().zip(&alpha).map(|(a, p)| a + (t - 1.0) / t_next * (a - p)).collect();
        alpha = next;
        t = t_next;
    }
    // bias from margin vectors strictly inside the box
    let f_no_b = |i: usize| (0..n).map(|j| alpha[j] * y[j] * kernel[i][j]).sum::<f64>();
    let free: Vec<usize> = (0..n).filter(|&i| alpha[i] > 1e-6 * c && alpha[i] < c * (1.0 - 1e-6)).collect();
    let bias = free.iter().map(|&i| y[i] - f_no_b(i)).sum::<f64>() / free.len().max(1) as f64;
    (alpha, bias)
}

/// Two Gaussian clusters in 2D, labels ±1, separated along x.
pub fn separable_set(n_per_class: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut r = rng(seed);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..2 * n_per_class {
        let (cx, label) = if i % 2 == 0 { (-1.5, 1.0) } else { (1.5, -1.0) };
        x.push(vec![cx + 0.5 * normal(&mut r), 0.5 * normal(&mut r)]);
        y.push(label);
    }
    (x, y)
}

pub fn normal(r: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = r.gen_range(f64::EPSILON..1.0);
    let u2: f64 = r.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// `per` points around each center with isotropic noise `sigma`.
pub fn gaussian_blobs(centers: &[Vec<f64>], per: usize, sigma: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    for c in centers {
        for _ in 0..per {
            out.push(c.iter().map(|v| v + sigma * normal(&mut r)).collect());
        }
    }
    out
}

/// Two-class oscillating-blob manifest with `synthetic:` locators, one subject per pair.
pub fn blob_manifest(train_per_class: usize, test_per_class: usize, seed: u64) -> DatasetManifest {
    let mut entries = Vec::new();
    let mut subject = 0u32;
    for (split, count) in [(Split::Train, train_per_class), (Split::Test, test_per_class)] {
        for i in 0..count {
            subject += 1;
            for (kind, label) in [("oscillating_blob_h", "blob_h"), ("oscillating_blob_v", "blob_v")] {
                let item_seed = seed.wrapping_mul(7919).wrapping_add(u64::from(subject));
                entries.push(ManifestEntry {
                    sequence_id: format!("{label}_{split:?}_{i}").to_lowercase(),
                    path: format!("synthetic:{kind}:48x48x40:{item_seed}"),
                    label: label.into(),
                    subject,
                    split,
                });
            }
        }
    }
    DatasetManifest::new(entries).unwrap()
}
