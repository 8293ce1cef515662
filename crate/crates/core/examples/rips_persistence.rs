//! Persistence diagrams of a noisy circle and of two blobs, before and after
//! noise filtering, plus the JSON form of a diagram.
//!
//! ```text
//! cargo run --release --example rips_persistence
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use topomargin::persistence::{diagram_of, filter_noise, PersistenceDiagram, PhConfig, DEFAULT_NOISE_CUTOFF};
use topomargin::synth::{circles_vs_blobs, noisy_circle, SynthConfig};

fn summary(pd: &PersistenceDiagram) {
    for k in 0..3 {
        let longest = pd.dim(k).iter().filter(|b| !b.is_infinite()).map(|b| b.persistence()).fold(0.0, f64::max);
        println!("  H{k}: {:>3} bars, longest finite {longest:.3}", pd.dim(k).len());
    }
}

fn main() -> topomargin::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let circle = noisy_circle("circle", 30, 1.0, 0.05, &mut rng)?;
    let blobs = &circles_vs_blobs(&SynthConfig { per_class: 1, points: 30, ..Default::default() })?.clouds[1];

    for pc in [&circle, blobs] {
        let raw = diagram_of(pc, &PhConfig::default())?;
        let clean = filter_noise(&raw, DEFAULT_NOISE_CUTOFF, &[1, 2])?;
        println!("{} raw:", pc.id);
        summary(&raw);
        println!("{} filtered:", pc.id);
        summary(&clean);
    }

    let small = diagram_of(&noisy_circle("tiny", 6, 1.0, 0.0, &mut rng)?, &PhConfig::default())?;
    println!("{}", serde_json::to_string_pretty(&small)?);
    Ok(())
}
