//! Deterministic inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stipbow_core::grid::Grid2;
use stipbow_core::video_io::{generate_synthetic_sequence, SyntheticKind, VideoVolume};

pub fn blob_volume(width: usize, height: usize, frames: usize) -> VideoVolume {
    generate_synthetic_sequence(SyntheticKind::OscillatingBlobH, width, height, frames, 7)
        .expect("valid synthetic dimensions")
}

pub fn random_plane(width: usize, height: usize, seed: u64) -> Grid2 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Grid2::from_fn(width, height, |_, _| rng.gen())
}

/// `clusters` groups of `per_cluster` points in `dim` dimensions, unit spread, 10 apart.
pub fn clustered_points(clusters: usize, per_cluster: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(clusters * per_cluster);
    for c in 0..clusters {
        for _ in 0..per_cluster {
            out.push((0..dim).map(|d| 10.0 * ((c + d) % clusters) as f64 + rng.gen_range(-0.5..0.5)).collect());
        }
    }
    out
}
