//! Fixtures shared by the benchmarks: speaker rings, noise blocks and a
//! shortened demo render.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use objrender::demo::{demo_scenario, demo_scene, DemoKind};
use objrender::geometry::{Direction3, Vec3};
use objrender::{ScenarioFile, Scene};

pub const SAMPLE_RATE: f64 = 48_000.0;

/// `n` horizontal directions evenly spaced from the front.
pub fn ring(n: usize) -> Vec<Direction3> {
    (0..n)
        .map(|i| {
            let az = 360.0 * i as f64 / n as f64;
            Direction3::horizontal(if az > 180.0 { az - 360.0 } else { az })
        })
        .collect()
}

/// `n` speakers on a ring of radius `r`, as positions.
pub fn ring_positions(n: usize, r: f64) -> Vec<Vec3> {
    ring(n)
        .iter()
        .map(|d| {
            let a = d.azimuth_deg.to_radians();
            Vec3::new(r * a.cos(), r * a.sin(), 0.0)
        })
        .collect()
}

/// Uniform noise in [-0.5, 0.5).
pub fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect()
}

/// The basic demo cut to `seconds`.
pub fn short_demo(seconds: f64) -> (Scene, ScenarioFile) {
    let mut scene = demo_scene(DemoKind::Basic, 1);
    scene.duration = scene.duration.min((seconds * scene.sample_rate as f64) as usize);
    (scene, demo_scenario(DemoKind::Basic))
}
