//! Scores candidate diagrams against a model of a known class and ranks the
//! ones that fall inside the margin band `|score| < 1`.
//!
//! ```text
//! cargo run --release --example function_prediction
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use topomargin::harness::{predict_function, ModelParams};
use topomargin::ingest::PointCloud;
use topomargin::persistence::{diagram_of, PhConfig};
use topomargin::synth::{circles_vs_blobs, noisy_circle, SynthConfig};

fn main() -> topomargin::Result<()> {
    let data = circles_vs_blobs(&SynthConfig { per_class: 15, ..Default::default() })?;
    let known = data
        .clouds
        .par_iter()
        .map(|c| diagram_of(c, &PhConfig::default()))
        .collect::<topomargin::Result<Vec<_>>>()?;

    // Candidates: a clean circle, a circle with a gap, and a straight line.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let arc: Vec<Vec<f64>> = (0..24)
        .map(|i| {
            let t = 1.5 * std::f64::consts::PI * i as f64 / 23.0;
            vec![t.cos(), t.sin()]
        })
        .collect();
    let line: Vec<Vec<f64>> = (0..24).map(|i| vec![i as f64 / 12.0 - 1.0, 0.0]).collect();
    let candidates = [
        noisy_circle("clean_circle", 24, 1.0, 0.02, &mut rng)?,
        PointCloud::new("open_arc", 2, arc)?,
        PointCloud::new("line", 2, line)?,
    ]
    .iter()
    .map(|c| diagram_of(c, &PhConfig::default()))
    .collect::<topomargin::Result<Vec<_>>>()?;

    let out = predict_function(&known, &data.labels, &candidates, &ModelParams::default())?;
    for c in &out.candidates {
        println!("{:<14} score {:+.3}  label {:+}  in band: {}", c.id, c.score, c.label, c.in_band);
    }
    println!("ranking: {:?}", out.ranking);
    Ok(())
}
