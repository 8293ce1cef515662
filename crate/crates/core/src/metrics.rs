//! Weighted sums of per-dimension distances between persistence diagrams,
//! and the pairwise distance matrices built from them.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::{Bar, PersistenceDiagram, MAX_HOMOLOGY_DIM};

const NDIMS: usize = MAX_HOMOLOGY_DIM + 1;

/// Non-negative per-dimension weights, not all zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(pub [f64; NDIMS]);

impl WeightVector {
    pub fn new(w: [f64; NDIMS]) -> Result<Self> {
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Config(format!("weights must be finite and >= 0, got {w:?}")));
        }
        if w.iter().all(|x| *x == 0.0) {
            return Err(Error::Config("weights must not all be zero".into()));
        }
        Ok(Self(w))
    }

    /// Parses `w0,w1,w2`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<f64> = text
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("weights {text:?}: {e}")))?;
        let w: [f64; NDIMS] = parts
            .try_into()
            .map_err(|_| Error::Config(format!("expected {NDIMS} comma-separated weights, got {text:?}")))?;
        Self::new(w)
    }
}

impl Default for WeightVector {
    fn default() -> Self {
        Self([1.0 / 3.0; NDIMS])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// Hausdorff distance between the two bar sets, each with the diagonal
    /// adjoined. A metric on diagrams.
    #[default]
    Hausdorff,
    /// Largest distance over all cross pairs of bars. Not zero on identical
    /// non-trivial inputs.
    MaxPairwise,
}

impl std::str::FromStr for DistanceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hausdorff" => Ok(Self::Hausdorff),
            "max-pairwise" => Ok(Self::MaxPairwise),
            other => Err(Error::Config(format!("unknown distance mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for DistanceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Hausdorff => "hausdorff",
            Self::MaxPairwise => "max-pairwise",
        })
    }
}

fn point_distance(a: &Bar, b: &Bar) -> f64 {
    (a.birth - b.birth).hypot(a.death - b.death)
}

/// Euclidean distance from a (birth, death) point to the diagonal.
pub fn diagonal_distance(bar: &Bar) -> f64 {
    (bar.death - bar.birth).abs() / std::f64::consts::SQRT_2
}

fn max_diagonal_distance(bars: &[Bar]) -> f64 {
    bars.iter().map(diagonal_distance).fold(0.0, f64::max)
}

/// Directed part of the diagonal-augmented Hausdorff distance: how far any
/// point of `from` is from `to ∪ diagonal`.
fn directed_hausdorff(from: &[Bar], to: &[Bar]) -> f64 {
    from.iter()
        .map(|a| {
            to.iter()
                .map(|b| point_distance(a, b))
                .fold(diagonal_distance(a), f64::min)
        })
        .fold(0.0, f64::max)
}

/// Distance between the bars of a single homology dimension.
///
/// Bars must be finite. Two empty sets are at distance 0; when exactly one is
/// empty the distance is the largest distance-to-diagonal of the other.
pub fn component_distance(a: &[Bar], b: &[Bar], mode: DistanceMode) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 0.0,
        (true, false) => return max_diagonal_distance(b),
        (false, true) => return max_diagonal_distance(a),
        _ => {}
    }
    match mode {
        DistanceMode::Hausdorff => directed_hausdorff(a, b).max(directed_hausdorff(b, a)),
        DistanceMode::MaxPairwise => a
            .iter()
            .flat_map(|x| b.iter().map(move |y| point_distance(x, y)))
            .fold(0.0, f64::max),
    }
}

/// `Σ_k w_k · component_distance(X_k, Y_k)`.
pub fn diagram_distance(
    x: &PersistenceDiagram,
    y: &PersistenceDiagram,
    w: &WeightVector,
    mode: DistanceMode,
) -> f64 {
    (0..NDIMS)
        .filter(|&k| w.0[k] != 0.0)
        .map(|k| w.0[k] * component_distance(x.dim(k), y.dim(k), mode))
        .sum()
}

/// Value that replaces infinite deaths: 1.1 × the largest finite value seen
/// in `diagrams`, or 1.0 when there is none.
pub fn truncation_value<'a>(diagrams: impl IntoIterator<Item = &'a PersistenceDiagram>) -> f64 {
    let max = diagrams
        .into_iter()
        .filter_map(PersistenceDiagram::max_finite_value)
        .fold(0.0, f64::max);
    if max > 0.0 {
        max * 1.1
    } else {
        1.0
    }
}

/// Copies of `diagrams` with infinite deaths replaced by `truncation`.
pub fn truncate_all(diagrams: &[PersistenceDiagram], truncation: f64) -> Vec<PersistenceDiagram> {
    diagrams
        .iter()
        .map(|d| {
            let mut d = d.clone();
            d.truncate_infinite(truncation);
            d
        })
        .collect()
}

/// Symmetric matrix of pairwise diagram distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub ids: Vec<String>,
    /// Row-major `n × n` values.
    pub values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.row(i).to_vec()).collect()
    }

    /// CSV with a header row of ids followed by one labelled row per diagram.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id");
        for id in &self.ids {
            out.push(',');
            out.push_str(id);
        }
        out.push('\n');
        for (i, id) in self.ids.iter().enumerate() {
            out.push_str(id);
            for v in self.row(i) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Pairwise distances; the upper triangle is computed and mirrored.
pub fn distance_matrix(
    diagrams: &[PersistenceDiagram],
    w: &WeightVector,
    mode: DistanceMode,
) -> DistanceMatrix {
    let n = diagrams.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| diagram_distance(&diagrams[i], &diagrams[j], w, mode))
                .collect()
        })
        .collect();
    let mut values = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &d) in row.iter().enumerate() {
            let j = i + 1 + off;
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    if mode == DistanceMode::MaxPairwise {
        for i in 0..n {
            values[i * n + i] = diagram_distance(&diagrams[i], &diagrams[i], w, mode);
        }
    }
    DistanceMatrix {
        ids: diagrams.iter().map(|d| d.id.clone()).collect(),
        values,
    }
}

/// Distances from every query diagram to every landmark, one row per query.
pub fn cross_distances(
    queries: &[PersistenceDiagram],
    landmarks: &[PersistenceDiagram],
    w: &WeightVector,
    mode: DistanceMode,
) -> Vec<Vec<f64>> {
    queries
        .par_iter()
        .map(|q| landmarks.iter().map(|l| diagram_distance(q, l, w, mode)).collect())
        .collect()
}
