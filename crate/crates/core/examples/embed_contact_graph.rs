//! Embeds a contact graph with biased random walks and with the spectral
//! method, then compares within-block and between-block distances.
//!
//! ```text
//! cargo run --release --example embed_contact_graph
//! ```

use topomargin::embed::{embed_graph, EmbeddingConfig, EmbeddingMethod};
use topomargin::ingest::ContactGraph;

fn mean_distance(points: &[Vec<f64>], pairs: &[(usize, usize)]) -> f64 {
    let total: f64 = pairs
        .iter()
        .map(|&(i, j)| points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .sum();
    total / pairs.len() as f64
}

fn main() -> topomargin::Result<()> {
    // Two dense blocks of 12 nodes joined by a single bridge edge.
    let mut edges = Vec::new();
    for base in [0, 12] {
        for i in 0..12 {
            for j in (i + 1)..12 {
                if (i + j) % 3 != 0 {
                    edges.push((base + i, base + j));
                }
            }
        }
    }
    edges.push((11, 12));
    let g = ContactGraph::from_edges("two-blocks", 24, &edges, 5.0)?;

    let within: Vec<(usize, usize)> = (0..24)
        .flat_map(|i| ((i + 1)..24).map(move |j| (i, j)))
        .filter(|&(i, j)| (i < 12) == (j < 12))
        .collect();
    let between: Vec<(usize, usize)> = (0..12).flat_map(|i| (12..24).map(move |j| (i, j))).collect();

    for method in [EmbeddingMethod::RandomWalk, EmbeddingMethod::Spectral] {
        let cfg = EmbeddingConfig {
            method,
            dim: 8,
            seed: 42,
            ..Default::default()
        };
        let pc = embed_graph(&g, &cfg)?;
        println!(
            "{method:?}: within {:.3}, between {:.3}",
            mean_distance(&pc.points, &within),
            mean_distance(&pc.points, &between)
        );
    }
    Ok(())
}
