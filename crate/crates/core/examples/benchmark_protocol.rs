//! Runs the repeated-split protocol on the synthetic circles-vs-blobs set for
//! all four vectorizations and prints the accuracy table.
//!
//! ```text
//! cargo run --release --example benchmark_protocol
//! ```

use rayon::prelude::*;
use topomargin::harness::{evaluate, misclass_report, EvalConfig};
use topomargin::persistence::{diagram_of, PhConfig};
use topomargin::synth::{circles_vs_blobs, SynthConfig};
use topomargin::vectorize::Method;

fn main() -> topomargin::Result<()> {
    let data = circles_vs_blobs(&SynthConfig::default())?;
    let diagrams = data
        .clouds
        .par_iter()
        .map(|c| diagram_of(c, &PhConfig::default()))
        .collect::<topomargin::Result<Vec<_>>>()?;

    let cfg = EvalConfig {
        methods: Method::ALL.to_vec(),
        seed: 7,
        ..Default::default()
    };
    let report = evaluate(&diagrams, &data.labels, &cfg)?;
    println!("{}", report.render_table());
    println!("wall clock: {:.2}s", report.wall_clock_secs);

    if let Some(cell) = report.cell(Method::Bs, 0.8) {
        let errors = misclass_report(&cell.repeats[0]);
        println!("bs @ 80%, repeat 0: {} misclassified", errors.entries.len());
        for e in &errors.entries {
            println!("  {:<12} true {:+} score {:+.3} {:?}", e.id, e.true_label, e.score, e.error_type);
        }
    }
    Ok(())
}
