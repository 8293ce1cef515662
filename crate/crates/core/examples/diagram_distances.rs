//! Pairwise diagram distances under both distance modes and two weightings.
//!
//! ```text
//! cargo run --release --example diagram_distances
//! ```

use topomargin::metrics::{distance_matrix, truncate_all, truncation_value, DistanceMode, WeightVector};
use topomargin::persistence::{diagram_of, filter_noise, PhConfig};
use topomargin::synth::{circles_vs_blobs, SynthConfig};

fn main() -> topomargin::Result<()> {
    let data = circles_vs_blobs(&SynthConfig { per_class: 3, ..Default::default() })?;
    let diagrams = data
        .clouds
        .iter()
        .map(|c| filter_noise(&diagram_of(c, &PhConfig::default())?, 0.01, &[1, 2]))
        .collect::<topomargin::Result<Vec<_>>>()?;
    let t = truncation_value(&diagrams);
    let diagrams = truncate_all(&diagrams, t);
    println!("infinite deaths truncated at {t:.4}\n");

    for (mode, w) in [
        (DistanceMode::Hausdorff, WeightVector::default()),
        (DistanceMode::Hausdorff, WeightVector::parse("0,1,0")?),
        (DistanceMode::MaxPairwise, WeightVector::default()),
    ] {
        println!("{mode}, weights {:?}", w.0);
        print!("{}", distance_matrix(&diagrams, &w, mode).to_csv());
        println!();
    }
    Ok(())
}
