//! Vietoris–Rips persistent homology over Z/2 in homology dimensions 0..=2.
//!
//! A simplex enters the filtration at its diameter (longest edge), vertices
//! at 0. Diagrams are computed by boundary-matrix column reduction with the
//! clearing ("twist") optimization; the unoptimized reduction is kept as
//! [`Reduction::Standard`] so the two can be checked against each other.

use std::collections::HashMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::ingest::{euclidean, PointCloud};

/// Highest homology dimension tracked by a diagram.
pub const MAX_HOMOLOGY_DIM: usize = 2;
/// Default cap on the number of simplices a filtration may hold.
pub const DEFAULT_SIMPLEX_BUDGET: usize = 5_000_000;
/// Default persistence cutoff for noise filtering.
pub const DEFAULT_NOISE_CUTOFF: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
    pub value: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    pub simplices: Vec<Simplex>,
    /// Largest simplex dimension present (homology is reported below it).
    pub max_dim: usize,
    pub max_radius: f64,
}

impl Filtration {
    /// Index of every simplex's boundary faces, in filtration order.
    fn boundaries(&self) -> Result<Vec<Vec<usize>>> {
        let index: HashMap<&[usize], usize> = self
            .simplices
            .iter()
            .enumerate()
            .map(|(i, s)| (s.vertices.as_slice(), i))
            .collect();
        let mut out = Vec::with_capacity(self.simplices.len());
        let mut face = Vec::new();
        for (i, s) in self.simplices.iter().enumerate() {
            let mut col = Vec::with_capacity(s.vertices.len());
            if s.vertices.len() > 1 {
                for skip in 0..s.vertices.len() {
                    face.clear();
                    face.extend(
                        s.vertices
                            .iter()
                            .enumerate()
                            .filter(|&(k, _)| k != skip)
                            .map(|(_, &v)| v),
                    );
                    let &f = index.get(face.as_slice()).ok_or_else(|| {
                        Error::Input(format!("face {face:?} of simplex {i} missing"))
                    })?;
                    if f >= i {
                        return Err(Error::Input(format!(
                            "face {face:?} appears after its coface {:?}",
                            s.vertices
                        )));
                    }
                    col.push(f);
                }
            }
            col.sort_unstable();
            out.push(col);
        }
        Ok(out)
    }

    /// Checks that every face precedes its cofaces and that values are
    /// monotone along face relations.
    pub fn check_monotone(&self) -> Result<()> {
        let bounds = self.boundaries()?;
        for (i, col) in bounds.iter().enumerate() {
            for &f in col {
                if self.simplices[f].value > self.simplices[i].value {
                    return Err(Error::Input(format!("simplex {i} enters before its face {f}")));
                }
            }
        }
        Ok(())
    }
}

/// Builds the Rips filtration with the default simplex budget.
pub fn rips_filtration(pc: &PointCloud, max_dim: usize, max_radius: f64) -> Result<Filtration> {
    rips_filtration_with_budget(pc, max_dim, max_radius, DEFAULT_SIMPLEX_BUDGET)
}

pub fn rips_filtration_with_budget(
    pc: &PointCloud,
    max_dim: usize,
    max_radius: f64,
    budget: usize,
) -> Result<Filtration> {
    if pc.is_empty() {
        return Err(Error::Input("Rips filtration of an empty point cloud".into()));
    }
    if !(1..=MAX_HOMOLOGY_DIM + 1).contains(&max_dim) {
        return Err(Error::Config(format!("max_dim must be in 1..=3, got {max_dim}")));
    }
    if max_radius.is_nan() || max_radius < 0.0 {
        return Err(Error::Config(format!("max_radius must be >= 0, got {max_radius}")));
    }
    let n = pc.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(&pc.points[i], &pc.points[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    // Forward neighbours within the radius.
    let nbrs: Vec<Vec<usize>> = (0..n)
        .map(|i| ((i + 1)..n).filter(|&j| dist[i * n + j] <= max_radius).collect())
        .collect();

    let mut simplices = Vec::new();
    let mut stack: Vec<(Vec<usize>, f64, Vec<usize>)> = Vec::new();
    for v in 0..n {
        stack.push((vec![v], 0.0, nbrs[v].clone()));
        while let Some((verts, value, candidates)) = stack.pop() {
            if simplices.len() >= budget {
                return Err(Error::Resource(format!(
                    "Rips filtration of {n} points up to dimension {max_dim} exceeds the budget of {budget} simplices"
                )));
            }
            if verts.len() <= max_dim {
                for (k, &u) in candidates.iter().enumerate() {
                    let diam = verts.iter().map(|&w| dist[w * n + u]).fold(value, f64::max);
                    let next: Vec<usize> = candidates[k + 1..]
                        .iter()
                        .copied()
                        .filter(|&x| dist[u * n + x] <= max_radius)
                        .collect();
                    let mut grown = verts.clone();
                    grown.push(u);
                    stack.push((grown, diam, next));
                }
            }
            simplices.push(Simplex { vertices: verts, value });
        }
    }
    simplices.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.vertices.len().cmp(&b.vertices.len()))
            .then_with(|| a.vertices.cmp(&b.vertices))
    });
    Ok(Filtration {
        simplices,
        max_dim,
        max_radius,
    })
}

/// One (birth, death) pair. Infinite deaths are `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar {
    pub birth: f64,
    pub death: f64,
}

impl Bar {
    pub fn new(birth: f64, death: f64) -> Self {
        Self { birth, death }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }
}

/// Per-dimension multisets of bars, dimensions 0, 1 and 2.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    pub id: String,
    pub bars: [Vec<Bar>; MAX_HOMOLOGY_DIM + 1],
}

impl PersistenceDiagram {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            bars: Default::default(),
        }
    }

    pub fn dim(&self, k: usize) -> &[Bar] {
        &self.bars[k]
    }

    pub fn total_bars(&self) -> usize {
        self.bars.iter().map(Vec::len).sum()
    }

    /// Sorts bars within each dimension by (birth, death).
    pub fn canonicalize(&mut self) {
        for bars in &mut self.bars {
            bars.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
        }
    }

    /// Largest finite birth or death value, if any.
    pub fn max_finite_value(&self) -> Option<f64> {
        self.bars
            .iter()
            .flatten()
            .flat_map(|b| [b.birth, b.death])
            .filter(|v| v.is_finite())
            .reduce(f64::max)
    }

    /// Replaces infinite deaths with `value`.
    pub fn truncate_infinite(&mut self, value: f64) {
        for bar in self.bars.iter_mut().flatten() {
            if bar.death.is_infinite() {
                bar.death = value;
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for bar in out.bars.iter_mut().flatten() {
            bar.birth *= s;
            bar.death *= s;
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut dims = Map::new();
        for (k, bars) in self.bars.iter().enumerate() {
            let rows: Vec<Value> = bars
                .iter()
                .map(|b| {
                    let death = if b.death.is_infinite() {
                        json!("inf")
                    } else {
                        json!(b.death)
                    };
                    json!([b.birth, death])
                })
                .collect();
            dims.insert(k.to_string(), Value::Array(rows));
        }
        json!({ "id": self.id, "dims": dims })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |msg: &str| Error::Input(format!("diagram JSON: {msg}"));
        let id = value
            .get("id")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("missing string field \"id\""))?;
        let dims = value
            .get("dims")
            .and_then(Value::as_object)
            .ok_or_else(|| bad("missing object field \"dims\""))?;
        let mut pd = PersistenceDiagram::new(id);
        for (key, rows) in dims {
            let k: usize = key.parse().map_err(|_| bad("dimension keys must be integers"))?;
            if k > MAX_HOMOLOGY_DIM {
                return Err(bad(&format!("dimension {k} out of range")));
            }
            for row in rows.as_array().ok_or_else(|| bad("bars must be arrays"))? {
                let pair = row.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("bar must be [birth, death]"))?;
                let birth = pair[0].as_f64().ok_or_else(|| bad("birth must be a number"))?;
                let death = match &pair[1] {
                    Value::String(s) if s == "inf" => f64::INFINITY,
                    v => v.as_f64().ok_or_else(|| bad("death must be a number or \"inf\""))?,
                };
                if !(birth <= death) {
                    return Err(bad("birth exceeds death"));
                }
                pd.bars[k].push(Bar::new(birth, death));
            }
        }
        Ok(pd)
    }
}

impl Serialize for PersistenceDiagram {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PersistenceDiagram {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        PersistenceDiagram::from_json(&value).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Left-to-right column reduction without shortcuts.
    Standard,
    /// Reduction by decreasing dimension, zeroing columns known to be
    /// pivots of higher-dimensional columns.
    #[default]
    Twist,
}

/// Computes the persistence diagram of a filtration.
pub fn compute_persistence(f: &Filtration) -> Result<PersistenceDiagram> {
    compute_persistence_with(f, Reduction::Twist)
}

pub fn compute_persistence_with(f: &Filtration, reduction: Reduction) -> Result<PersistenceDiagram> {
    let mut columns = f.boundaries()?;
    let m = columns.len();
    // pivot_owner[row] = column whose lowest entry is `row`
    let mut pivot_owner: Vec<Option<usize>> = vec![None; m];
    let mut cleared = vec![false; m];

    let order: Vec<usize> = match reduction {
        Reduction::Standard => (0..m).collect(),
        Reduction::Twist => {
            let mut idx: Vec<usize> = (0..m).collect();
            idx.sort_by_key(|&j| (std::cmp::Reverse(f.simplices[j].dim()), j));
            idx
        }
    };

    let mut scratch = Vec::new();
    for j in order {
        if cleared[j] {
            columns[j].clear();
            continue;
        }
        let mut col = std::mem::take(&mut columns[j]);
        while let Some(&low) = col.last() {
            match pivot_owner[low] {
                Some(k) => {
                    add_columns(&mut col, &columns[k], &mut scratch);
                }
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            pivot_owner[low] = Some(j);
            if reduction == Reduction::Twist {
                cleared[low] = true;
            }
        }
        columns[j] = col;
    }

    let report_dims = (f.max_dim).min(MAX_HOMOLOGY_DIM + 1);
    let mut pd = PersistenceDiagram::new("");
    for (row, owner) in pivot_owner.iter().enumerate() {
        let k = f.simplices[row].dim();
        if k >= report_dims {
            continue;
        }
        match owner {
            Some(j) => {
                let birth = f.simplices[row].value;
                let death = f.simplices[*j].value;
                if death > birth || k == 0 {
                    pd.bars[k].push(Bar::new(birth, death));
                }
            }
            None => {
                // Positive simplex that never dies.
                if columns[row].is_empty() {
                    pd.bars[k].push(Bar::new(f.simplices[row].value, f64::INFINITY));
                }
            }
        }
    }
    pd.canonicalize();
    Ok(pd)
}

/// `col += other` over Z/2, both sorted ascending.
fn add_columns(col: &mut Vec<usize>, other: &[usize], scratch: &mut Vec<usize>) {
    scratch.clear();
    let (mut a, mut b) = (0, 0);
    while a < col.len() && b < other.len() {
        match col[a].cmp(&other[b]) {
            std::cmp::Ordering::Less => {
                scratch.push(col[a]);
                a += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(other[b]);
                b += 1;
            }
            std::cmp::Ordering::Equal => {
                a += 1;
                b += 1;
            }
        }
    }
    scratch.extend_from_slice(&col[a..]);
    scratch.extend_from_slice(&other[b..]);
    std::mem::swap(col, scratch);
}

/// Removes finite bars with persistence below `cutoff` in the listed
/// dimensions. Infinite bars are always kept.
pub fn filter_noise(pd: &PersistenceDiagram, cutoff: f64, dims: &[usize]) -> Result<PersistenceDiagram> {
    if !(cutoff >= 0.0) {
        return Err(Error::Config(format!("noise cutoff must be >= 0, got {cutoff}")));
    }
    let mut out = pd.clone();
    for &k in dims {
        if k > MAX_HOMOLOGY_DIM {
            return Err(Error::Config(format!("cannot filter dimension {k}")));
        }
        out.bars[k].retain(|b| b.is_infinite() || b.persistence() >= cutoff);
    }
    Ok(out)
}

/// Settings for turning a point cloud into a diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhConfig {
    /// Largest simplex dimension; homology is computed up to `max_dim - 1`.
    pub max_dim: usize,
    pub max_radius: f64,
    pub budget: usize,
}

impl Default for PhConfig {
    fn default() -> Self {
        Self {
            max_dim: MAX_HOMOLOGY_DIM + 1,
            max_radius: f64::INFINITY,
            budget: DEFAULT_SIMPLEX_BUDGET,
        }
    }
}

/// Rips filtration and reduction in one step; the diagram takes the cloud's id.
pub fn diagram_of(pc: &PointCloud, cfg: &PhConfig) -> Result<PersistenceDiagram> {
    let f = rips_filtration_with_budget(pc, cfg.max_dim, cfg.max_radius, cfg.budget)?;
    let mut pd = compute_persistence(&f)?;
    pd.id = pc.id.clone();
    Ok(pd)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: Vec<Vec<f64>>) -> PointCloud {
        let dim = points[0].len();
        PointCloud::new("t", dim, points).unwrap()
    }

    fn square() -> PointCloud {
        cloud(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ])
    }

    #[test]
    fn two_point_filtration() {
        let f = rips_filtration(&cloud(vec![vec![0.0], vec![1.0]]), 1, f64::INFINITY).unwrap();
        let got: Vec<_> = f.simplices.iter().map(|s| (s.vertices.clone(), s.value)).collect();
        assert_eq!(got, vec![(vec![0], 0.0), (vec![1], 0.0), (vec![0, 1], 1.0)]);
    }

    #[test]
    fn equilateral_triangle_enters_with_edges() {
        let h = 3f64.sqrt() / 2.0;
        let pc = cloud(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]]);
        let f = rips_filtration(&pc, 2, f64::INFINITY).unwrap();
        let tri = f.simplices.iter().find(|s| s.dim() == 2).unwrap();
        let longest_edge = f.simplices.iter().filter(|s| s.dim() == 1).map(|s| s.value).fold(0.0, f64::max);
        assert_eq!(tri.value, longest_edge);
        assert!((tri.value - 1.0).abs() < 1e-12);
        let pd = compute_persistence(&f).unwrap();
        assert!(pd.dim(1).is_empty());
    }

    #[test]
    fn radius_cutoff_drops_diagonals() {
        let f = rips_filtration(&square(), 2, 1.2).unwrap();
        assert!(f.simplices.iter().all(|s| s.value <= 1.2));
        assert!(!f.simplices.iter().any(|s| s.vertices == [0, 2] || s.vertices == [1, 3]));
        assert_eq!(f.simplices.iter().filter(|s| s.dim() == 1).count(), 4);
        // Without the diagonals the loop never fills.
        let pd = compute_persistence(&f).unwrap();
        assert_eq!(pd.dim(1), &[Bar::new(1.0, f64::INFINITY)]);
    }

    #[test]
    fn two_points_persistence() {
        let f = rips_filtration(&cloud(vec![vec![0.0], vec![1.0]]), 1, f64::INFINITY).unwrap();
        let pd = compute_persistence(&f).unwrap();
        assert_eq!(pd.dim(0), &[Bar::new(0.0, 1.0), Bar::new(0.0, f64::INFINITY)]);
    }

    #[test]
    fn square_has_one_loop() {
        for max_dim in [2, 3] {
            let f = rips_filtration(&square(), max_dim, f64::INFINITY).unwrap();
            let pd = compute_persistence(&f).unwrap();
            assert_eq!(pd.dim(1).len(), 1);
            let bar = pd.dim(1)[0];
            assert!((bar.birth - 1.0).abs() < 1e-9);
            assert!((bar.death - 2f64.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let pts: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64 * 0.01, 0.0]).collect();
        let err = rips_filtration_with_budget(&cloud(pts), 3, f64::INFINITY, 1000).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn bad_parameters() {
        let pc = square();
        assert!(rips_filtration(&pc, 0, 1.0).is_err());
        assert!(rips_filtration(&pc, 4, 1.0).is_err());
        assert!(rips_filtration(&pc, 2, -1.0).is_err());
    }

    #[test]
    fn noise_filter_examples() {
        let mut pd = PersistenceDiagram::new("n");
        pd.bars[1] = vec![Bar::new(0.5, 0.505), Bar::new(0.5, 0.52), Bar::new(0.1, f64::INFINITY)];
        pd.bars[0] = vec![Bar::new(0.0, 0.001)];
        let out = filter_noise(&pd, 0.01, &[1, 2]).unwrap();
        assert_eq!(out.dim(1), &[Bar::new(0.5, 0.52), Bar::new(0.1, f64::INFINITY)]);
        assert_eq!(out.dim(0), pd.dim(0));
        assert_eq!(filter_noise(&pd, 0.0, &[0, 1, 2]).unwrap(), pd);
        assert!(filter_noise(&pd, -1.0, &[1]).is_err());
    }

    #[test]
    fn json_round_trip_with_infinity() {
        let mut pd = PersistenceDiagram::new("abc");
        pd.bars[0] = vec![Bar::new(0.0, 0.123456789012), Bar::new(0.0, f64::INFINITY)];
        pd.bars[2] = vec![Bar::new(1.5, 2.25)];
        let text = serde_json::to_string(&pd).unwrap();
        assert!(text.contains("\"inf\""));
        let back: PersistenceDiagram = serde_json::from_str(&text).unwrap();
        assert_eq!(back, pd);
    }

    #[test]
    fn json_rejects_inverted_bar() {
        let v = json!({"id": "x", "dims": {"1": [[2.0, 1.0]]}});
        assert!(PersistenceDiagram::from_json(&v).is_err());
    }
}
