//! Feature vectors of one circle and one blob pair under every method.
//!
//! ```text
//! cargo run --release --example vectorize_diagrams
//! ```

use topomargin::metrics::{truncate_all, truncation_value, DistanceMode, WeightVector};
use topomargin::persistence::{diagram_of, filter_noise, PhConfig};
use topomargin::synth::{circles_vs_blobs, SynthConfig};
use topomargin::vectorize::{bs_vectorize, stats_vector, Method};

fn show(values: &[f64]) -> String {
    let head: Vec<String> = values.iter().take(8).map(|v| format!("{v:.3}")).collect();
    let more = if values.len() > 8 { format!(" ... ({} values)", values.len()) } else { String::new() };
    format!("[{}]{more}", head.join(", "))
}

fn main() -> topomargin::Result<()> {
    let data = circles_vs_blobs(&SynthConfig { per_class: 4, ..Default::default() })?;
    let diagrams = data
        .clouds
        .iter()
        .map(|c| filter_noise(&diagram_of(c, &PhConfig::default())?, 0.01, &[1, 2]))
        .collect::<topomargin::Result<Vec<_>>>()?;
    let diagrams = truncate_all(&diagrams, truncation_value(&diagrams));

    // Landmarks: two circles and two blob pairs.
    let landmarks = [&diagrams[0], &diagrams[1], &diagrams[4], &diagrams[5]].map(Clone::clone);
    for d in [&diagrams[2], &diagrams[6]] {
        println!("{}", d.id);
        let bs = bs_vectorize(d, &landmarks, &WeightVector::default(), DistanceMode::Hausdorff)?;
        println!("  {:<22} {}", Method::Bs.display_name(), show(&bs.values));
        for m in [Method::Stat1, Method::Stat2, Method::Stat3] {
            println!("  {:<22} {}", m.display_name(), show(&stats_vector(d, m)?.values));
        }
    }
    Ok(())
}
