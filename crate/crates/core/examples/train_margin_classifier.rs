//! Trains the soft-margin classifier on distance rows, inspects the solver
//! report and scores held-out diagrams.
//!
//! ```text
//! cargo run --release --example train_margin_classifier
//! ```

use rayon::prelude::*;
use topomargin::harness::{fit_pipeline, split, ModelParams};
use topomargin::persistence::{diagram_of, PhConfig};
use topomargin::synth::{circles_vs_blobs, SynthConfig};

fn main() -> topomargin::Result<()> {
    let data = circles_vs_blobs(&SynthConfig { per_class: 20, ..Default::default() })?;
    let diagrams = data
        .clouds
        .par_iter()
        .map(|c| diagram_of(c, &PhConfig::default()))
        .collect::<topomargin::Result<Vec<_>>>()?;
    let (train_idx, test_idx) = split(&data.labels, 0.5, 3, true)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| diagrams[i].clone()).collect::<Vec<_>>();

    for penalty in [0.1, 1.0, 10.0] {
        let params = ModelParams { penalty, ..Default::default() };
        let labels: Vec<f64> = train_idx.iter().map(|&i| data.labels[i]).collect();
        let fitted = fit_pipeline(&pick(&train_idx), &labels, &params)?;
        let r = &fitted.model.solver_report;
        let norm = fitted.model.beta.iter().map(|b| b * b).sum::<f64>().sqrt();
        let preds = fitted.predict(&pick(&test_idx))?;
        let correct = preds
            .iter()
            .zip(&test_idx)
            .filter(|(p, &i)| f64::from(p.label) == data.labels[i])
            .count();
        println!(
            "a = {penalty:<5} |beta| = {norm:.4}  c = {:+.4}  {} IPM iterations  test {correct}/{}",
            fitted.model.c,
            r.iterations,
            preds.len()
        );
    }
    Ok(())
}
