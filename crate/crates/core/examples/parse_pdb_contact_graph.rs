//! Parses a small alpha-helix structure and builds its residue contact graph.
//!
//! ```text
//! cargo run --example parse_pdb_contact_graph [file.pdb]
//! ```

use topomargin::ingest::{contact_graph, parse_structure, DEFAULT_CONTACT_THRESHOLD};

/// Ideal helix: 3.6 residues per turn, 1.5 Å rise, 2.3 Å radius.
fn helix_pdb(residues: usize) -> String {
    let mut out = String::new();
    for i in 0..residues {
        let t = i as f64 * 100f64.to_radians();
        let (x, y, z) = (2.3 * t.cos(), 2.3 * t.sin(), 1.5 * i as f64);
        out.push_str(&format!(
            "ATOM  {:>5}  CA  ALA A{:>4}    {x:>8.3}{y:>8.3}{z:>8.3}  1.00  0.00           C\n",
            i + 1,
            i + 1
        ));
    }
    out.push_str("END\n");
    out
}

fn main() -> topomargin::Result<()> {
    let (id, bytes) = match std::env::args().nth(1) {
        Some(path) => (path.clone(), std::fs::read(&path)?),
        None => ("helix".to_string(), helix_pdb(30).into_bytes()),
    };
    let pc = parse_structure(&bytes, &id)?;
    let g = contact_graph(&pc, DEFAULT_CONTACT_THRESHOLD)?;
    println!("{}: {} CA atoms, {} contacts below {} Å", id, pc.len(), g.edge_count(), DEFAULT_CONTACT_THRESHOLD);
    for node in 0..pc.len().min(5) {
        println!("  residue {node:>2} -> {:?}", g.neighbors(node));
    }
    println!("components: {}", g.components().len());
    Ok(())
}
