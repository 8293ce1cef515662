//! Structure ingestion: Cα point clouds from PDB text, plain xyz clouds, and
//! the residue contact graph built on top of them.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Contact threshold in Å used when none is given.
pub const DEFAULT_CONTACT_THRESHOLD: f64 = 5.0;

/// An ordered list of points in `dim`-dimensional Euclidean space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub id: String,
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub label: Option<String>,
}

impl PointCloud {
    /// Builds a cloud, checking that every point has `dim` finite coordinates.
    pub fn new(id: impl Into<String>, dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("point dimension must be positive".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Input(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Input(format!("point {i} has a non-finite coordinate")));
            }
        }
        Ok(Self {
            id: id.into(),
            dim,
            points,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Parses PDB text and returns one point per `ATOM` record named `CA`.
///
/// Only the first model is read. `HETATM` records are skipped. When several
/// alternate locations or duplicate records exist for the same
/// (chain, residue number, insertion code), the first one wins.
pub fn parse_structure(bytes: &[u8], id: &str) -> Result<PointCloud> {
    let text = String::from_utf8_lossy(bytes);
    let mut seen: HashSet<(char, String, char)> = HashSet::new();
    let mut points = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        let record = field(line, 0, 6).trim_end();
        if record == "ENDMDL" {
            break;
        }
        if record != "ATOM" {
            continue;
        }
        if field(line, 12, 16).trim() != "CA" {
            continue;
        }
        let chain = line.get(21..22).and_then(|s| s.chars().next()).unwrap_or(' ');
        let res_seq = field(line, 22, 26).trim().to_string();
        let icode = line.get(26..27).and_then(|s| s.chars().next()).unwrap_or(' ');
        if !seen.insert((chain, res_seq, icode)) {
            continue;
        }
        let mut xyz = [0.0; 3];
        for (k, (start, end)) in [(30, 38), (38, 46), (46, 54)].into_iter().enumerate() {
            let raw_field = line.get(start..end).ok_or_else(|| Error::Parse {
                line: lineno + 1,
                message: format!("ATOM record too short for coordinate column {}", start + 1),
            })?;
            let value: f64 = raw_field.trim().parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("malformed coordinate field {:?}", raw_field),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("non-finite coordinate {:?}", raw_field),
                });
            }
            xyz[k] = value;
        }
        points.push(xyz.to_vec());
    }

    if points.is_empty() {
        return Err(Error::EmptyStructure(id.to_string()));
    }
    PointCloud::new(id, 3, points)
}

fn field(line: &str, start: usize, end: usize) -> &str {
    let end = end.min(line.len());
    line.get(start.min(end)..end).unwrap_or("")
}

/// Parses the whitespace-separated xyz format: one point per line, `#`
/// comments and blank lines ignored. All lines must have the same arity.
pub fn parse_xyz(text: &str, id: &str) -> Result<PointCloud> {
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut dim = None;
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let coords = trimmed
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        line: lineno + 1,
                        message: format!("malformed coordinate {tok:?}"),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        match dim {
            None => dim = Some(coords.len()),
            Some(d) if d != coords.len() => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected {d} coordinates, found {}", coords.len()),
                })
            }
            _ => {}
        }
        points.push(coords);
    }
    match dim {
        None => Err(Error::EmptyStructure(id.to_string())),
        Some(d) => PointCloud::new(id, d, points),
    }
}

/// Serializes a cloud to the xyz format. Coordinates use the shortest
/// representation that parses back to the same `f64`.
pub fn write_xyz(pc: &PointCloud) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", pc.id);
    for p in &pc.points {
        let row: Vec<String> = p.iter().map(|c| format!("{c:?}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Undirected, unweighted residue contact graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactGraph {
    pub id: String,
    pub n_nodes: usize,
    pub threshold: f64,
    adjacency: Vec<Vec<usize>>,
}

impl ContactGraph {
    /// Builds a graph from an explicit edge list. Self-loops and duplicates
    /// are rejected.
    pub fn from_edges(
        id: impl Into<String>,
        n_nodes: usize,
        edges: &[(usize, usize)],
        threshold: f64,
    ) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n_nodes];
        for &(i, j) in edges {
            if i == j {
                return Err(Error::Input(format!("self-loop at node {i}")));
            }
            if i >= n_nodes || j >= n_nodes {
                return Err(Error::Input(format!("edge ({i}, {j}) out of range")));
            }
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
            let before = nbrs.len();
            nbrs.dedup();
            if nbrs.len() != before {
                return Err(Error::Input("duplicate edge".into()));
            }
        }
        Ok(Self {
            id: id.into(),
            n_nodes,
            threshold,
            adjacency,
        })
    }

    /// Sorted neighbour list of `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, nbrs)| nbrs.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Connected components, each a sorted node list, ordered by smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n_nodes];
        let mut out = Vec::new();
        for start in 0..self.n_nodes {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &u in &self.adjacency[v] {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Connects every pair of points strictly closer than `threshold`.
pub fn contact_graph(pc: &PointCloud, threshold: f64) -> Result<ContactGraph> {
    if pc.is_empty() {
        return Err(Error::Input("contact graph of an empty point cloud".into()));
    }
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::Input(format!("threshold must be positive, got {threshold}")));
    }
    if pc.points.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Input("point cloud has non-finite coordinates".into()));
    }
    let n = pc.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if euclidean(&pc.points[i], &pc.points[j]) < threshold {
                edges.push((i, j));
            }
        }
    }
    ContactGraph::from_edges(pc.id.clone(), n, &edges, threshold)
}
