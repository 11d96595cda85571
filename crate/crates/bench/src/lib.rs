//! Fixed workloads shared by the benchmarks.

use polymerge::geometry::Pose;
use polymerge::synth::{generate_instances, pose_path, road_scene, NoiseConfig};
use polymerge::{Point2, Polyline, VectorMap};

/// Ground truth plus `n` noisy ego-frame instances of the standard road scene.
pub fn road_instances(n: usize, seed: u64) -> (VectorMap, Vec<Pose>, Vec<VectorMap>) {
    let gt = road_scene(150.0, 1.0);
    let poses = pose_path(&gt, n).expect("non-empty scene");
    let cfg = NoiseConfig {
        sigma: 0.2,
        dropout: 0.1,
        n_instances: n,
        seed,
        ..NoiseConfig::default()
    };
    let instances = generate_instances(&gt, &poses, &cfg).expect("valid config");
    (gt, poses, instances)
}

/// A sinusoidal polyline with `n` vertices.
pub fn wave(n: usize, phase: f64) -> Polyline {
    Polyline::new(
        (0..n)
            .map(|i| {
                let x = i as f64 * 0.5;
                Point2::new(x, (x * 0.3 + phase).sin())
            })
            .collect(),
    )
}
