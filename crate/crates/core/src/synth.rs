//! Seeded synthetic two-class point clouds: noisy circles (one persistent
//! loop) against pairs of Gaussian blobs (two clusters, no loop).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::embed::derive_seed;
use crate::error::{Error, Result};
use crate::ingest::PointCloud;

pub const CIRCLE_LABEL: f64 = 1.0;
pub const BLOBS_LABEL: f64 = -1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub per_class: usize,
    pub points: usize,
    /// Standard deviation of radial-plane noise on circle points.
    pub circle_noise: f64,
    /// Standard deviation of each blob.
    pub blob_sigma: f64,
    /// Distance between the two blob centres.
    pub blob_separation: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            per_class: 50,
            points: 24,
            circle_noise: 0.05,
            blob_sigma: 0.25,
            blob_separation: 2.0,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub clouds: Vec<PointCloud>,
    pub labels: Vec<f64>,
}

/// `points` points uniformly on a circle of the given radius with Gaussian
/// noise of standard deviation `sigma` added to each coordinate.
pub fn noisy_circle(id: &str, points: usize, radius: f64, sigma: f64, rng: &mut impl Rng) -> Result<PointCloud> {
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::Config(e.to_string()))?;
    let pts = (0..points)
        .map(|_| {
            let t = rng.random::<f64>() * std::f64::consts::TAU;
            vec![
                radius * t.cos() + noise.sample(rng),
                radius * t.sin() + noise.sample(rng),
            ]
        })
        .collect();
    PointCloud::new(id, 2, pts)
}

fn two_blobs(id: &str, cfg: &SynthConfig, rng: &mut impl Rng) -> Result<PointCloud> {
    let noise = Normal::new(0.0, cfg.blob_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let angle = rng.random::<f64>() * std::f64::consts::TAU;
    let (dx, dy) = (0.5 * cfg.blob_separation * angle.cos(), 0.5 * cfg.blob_separation * angle.sin());
    let pts = (0..cfg.points)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            vec![s * dx + noise.sample(rng), s * dy + noise.sample(rng)]
        })
        .collect();
    PointCloud::new(id, 2, pts)
}

/// Generates `per_class` circles (label +1) followed by `per_class` two-blob
/// clouds (label −1). Each cloud has its own generator derived from the seed
/// and its index, so the set is reproducible item by item.
pub fn circles_vs_blobs(cfg: &SynthConfig) -> Result<SynthDataset> {
    if cfg.per_class == 0 || cfg.points < 3 {
        return Err(Error::Config("need at least one cloud per class and 3 points per cloud".into()));
    }
    let mut clouds = Vec::with_capacity(2 * cfg.per_class);
    let mut labels = Vec::with_capacity(2 * cfg.per_class);
    for i in 0..cfg.per_class {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, i as u64));
        let radius = 0.8 + 0.4 * rng.random::<f64>();
        let id = format!("circle_{i:03}");
        clouds.push(noisy_circle(&id, cfg.points, radius, cfg.circle_noise, &mut rng)?.with_label("circle"));
        labels.push(CIRCLE_LABEL);
    }
    for i in 0..cfg.per_class {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, (cfg.per_class + i) as u64));
        let id = format!("blobs_{i:03}");
        clouds.push(two_blobs(&id, cfg, &mut rng)?.with_label("blobs"));
        labels.push(BLOBS_LABEL);
    }
    Ok(SynthDataset { clouds, labels })
}
