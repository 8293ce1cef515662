//! Reading and writing the on-disk formats: structures, xyz clouds, diagram
//! JSON and label CSV.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::embed::{embed_graph, EmbeddingConfig};
use crate::error::{Error, Result};
use crate::ingest::{contact_graph, parse_structure, parse_xyz, PointCloud, DEFAULT_CONTACT_THRESHOLD};
use crate::persistence::{diagram_of, PersistenceDiagram, PhConfig};

/// File stem used as the identifier of a structure, cloud or diagram.
pub fn file_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn extension(path: &Path) -> String {
    path.extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default()
}

pub fn is_structure_file(path: &Path) -> bool {
    matches!(extension(path).as_str(), "pdb" | "ent")
}

/// Expands directories (one level, sorted by name) and keeps files whose
/// extension is in `extensions` (all files when `extensions` is empty).
pub fn collect_files(paths: &[PathBuf], extensions: &[&str]) -> Result<Vec<PathBuf>> {
    let keep = |p: &Path| extensions.is_empty() || extensions.contains(&extension(p).as_str());
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && keep(p))
                .collect();
            entries.sort();
            out.extend(entries);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

/// Reads a PDB structure (`.pdb`, `.ent`) or an xyz cloud (anything else).
pub fn read_point_cloud(path: &Path) -> Result<PointCloud> {
    let id = file_id(path);
    let bytes = fs::read(path)?;
    if is_structure_file(path) {
        parse_structure(&bytes, &id)
    } else {
        parse_xyz(&String::from_utf8_lossy(&bytes), &id)
    }
}

pub fn read_diagram(path: &Path) -> Result<PersistenceDiagram> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// Reads `id,label` rows (header optional); labels must be +1 or −1.
pub fn read_labels(path: &Path) -> Result<HashMap<String, f64>> {
    let text = fs::read_to_string(path)?;
    let mut out = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, label) = line.split_once(',').ok_or_else(|| Error::Parse {
            line: lineno + 1,
            message: "expected id,label".into(),
        })?;
        let label = label.trim();
        if lineno == 0 && label.eq_ignore_ascii_case("label") {
            continue;
        }
        let y: f64 = label.parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: format!("label {label:?} is not a number"),
        })?;
        if y != 1.0 && y != -1.0 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("label must be +1 or -1, got {y}"),
            });
        }
        out.insert(id.trim().to_string(), y);
    }
    Ok(out)
}

pub fn labels_to_csv(ids: &[String], labels: &[f64]) -> String {
    let mut out = String::from("id,label\n");
    for (id, y) in ids.iter().zip(labels) {
        out.push_str(&format!("{id},{}\n", *y as i64));
    }
    out
}

/// Looks up the label of every diagram, failing on the first missing id.
pub fn labels_for(diagrams: &[PersistenceDiagram], labels: &HashMap<String, f64>) -> Result<Vec<f64>> {
    diagrams
        .iter()
        .map(|d| {
            labels
                .get(&d.id)
                .copied()
                .ok_or_else(|| Error::Input(format!("no label for {:?}", d.id)))
        })
        .collect()
}

/// How raw inputs become diagrams: structures go through the contact graph
/// and an embedding first, xyz clouds go straight to persistence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramPipeline {
    pub contact_threshold: f64,
    pub embedding: EmbeddingConfig,
    pub ph: PhConfig,
}

impl Default for DiagramPipeline {
    fn default() -> Self {
        Self {
            contact_threshold: DEFAULT_CONTACT_THRESHOLD,
            embedding: EmbeddingConfig::default(),
            ph: PhConfig::default(),
        }
    }
}

impl DiagramPipeline {
    /// Diagram for one input file: diagram JSON is read as is.
    pub fn diagram_for(&self, path: &Path) -> Result<PersistenceDiagram> {
        match extension(path).as_str() {
            "json" => read_diagram(path),
            _ if is_structure_file(path) => {
                let pc = read_point_cloud(path)?;
                let g = contact_graph(&pc, self.contact_threshold)?;
                let embedded = embed_graph(&g, &self.embedding)?;
                diagram_of(&embedded, &self.ph)
            }
            _ => diagram_of(&read_point_cloud(path)?, &self.ph),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.csv");
        fs::write(&path, "id,label\na,1\nb,-1\n").unwrap();
        let labels = read_labels(&path).unwrap();
        assert_eq!(labels["a"], 1.0);
        assert_eq!(labels["b"], -1.0);
        fs::write(&path, "a,2\n").unwrap();
        assert!(read_labels(&path).is_err());
    }
}
