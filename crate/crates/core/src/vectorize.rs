//! Feature vectors for persistence diagrams.
//!
//! * `bs`: distances from a diagram to an ordered list of landmark diagrams.
//! * `stat1`: bar counts per dimension, dimension 0 scaled by 0.01.
//! * `stat2`: max, min, variance, mean and median of five birth/death series.
//! * `stat3`: summary statistics of births, deaths, midpoints and lifespans
//!   per dimension, plus bar counts and total lifespans (126 values).

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{diagram_distance, DistanceMode, WeightVector};
use crate::persistence::{Bar, PersistenceDiagram, MAX_HOMOLOGY_DIM};

pub const STAT1_LEN: usize = 3;
pub const STAT2_LEN: usize = 25;
/// 10 statistics × 4 series × 3 dimensions, plus counts and lifespan sums.
pub const STAT3_LEN: usize = 126;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bs,
    Stat1,
    Stat2,
    Stat3,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Bs, Method::Stat1, Method::Stat2, Method::Stat3];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Bs => "bs",
            Method::Stat1 => "stat1",
            Method::Stat2 => "stat2",
            Method::Stat3 => "stat3",
        }
    }

    /// Row label used in rendered accuracy tables.
    pub fn display_name(&self) -> &'static str {
        match self {
            Method::Bs => "BS Method",
            Method::Stat1 => "Statistical Method I",
            Method::Stat2 => "Statistical Method II",
            Method::Stat3 => "Statistical Method III",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub method: Method,
    /// Landmark order for `bs` vectors; empty otherwise.
    pub landmark_ids: Vec<String>,
}

/// Distances from `x` to each landmark, in landmark order.
pub fn bs_vectorize(
    x: &PersistenceDiagram,
    landmarks: &[PersistenceDiagram],
    w: &WeightVector,
    mode: DistanceMode,
) -> Result<FeatureVector> {
    if landmarks.is_empty() {
        return Err(Error::Config("bs vectorization needs at least one landmark".into()));
    }
    Ok(FeatureVector {
        values: landmarks.iter().map(|l| diagram_distance(x, l, w, mode)).collect(),
        method: Method::Bs,
        landmark_ids: landmarks.iter().map(|l| l.id.clone()).collect(),
    })
}

pub fn stats_vector_1(pd: &PersistenceDiagram) -> FeatureVector {
    let values = vec![
        0.01 * pd.dim(0).len() as f64,
        pd.dim(1).len() as f64,
        pd.dim(2).len() as f64,
    ];
    stat(values, Method::Stat1)
}

/// Max, min, population variance, mean and median of dim-0 deaths, dim-1
/// births and deaths, and dim-2 births and deaths. Empty series give zeros.
pub fn stats_vector_2(pd: &PersistenceDiagram) -> FeatureVector {
    let series: [Vec<f64>; 5] = [
        pd.dim(0).iter().map(|b| b.death).collect(),
        pd.dim(1).iter().map(|b| b.birth).collect(),
        pd.dim(1).iter().map(|b| b.death).collect(),
        pd.dim(2).iter().map(|b| b.birth).collect(),
        pd.dim(2).iter().map(|b| b.death).collect(),
    ];
    let mut values = Vec::with_capacity(STAT2_LEN);
    for s in series {
        match Summary::of(s) {
            None => values.extend([0.0; 5]),
            Some(sum) => values.extend([sum.max, sum.min, sum.variance, sum.mean, sum.percentile(50.0)]),
        }
    }
    stat(values, Method::Stat2)
}

/// Per dimension and per series (births, deaths, midpoints, lifespans):
/// mean, standard deviation, median, IQR, range, 10th/25th/75th/90th
/// percentiles and minimum. Then bar counts for dims 0..=2 and total
/// lifespan for dims 0..=2.
pub fn stats_vector_3(pd: &PersistenceDiagram) -> FeatureVector {
    let mut values = Vec::with_capacity(STAT3_LEN);
    for k in 0..=MAX_HOMOLOGY_DIM {
        let bars = pd.dim(k);
        let series: [fn(&Bar) -> f64; 4] = [
            |b| b.birth,
            |b| b.death,
            |b| 0.5 * (b.birth + b.death),
            |b| b.death - b.birth,
        ];
        for f in series {
            match Summary::of(bars.iter().map(f).collect()) {
                None => values.extend([0.0; 10]),
                Some(s) => {
                    let (p10, p25, p50, p75, p90) = (
                        s.percentile(10.0),
                        s.percentile(25.0),
                        s.percentile(50.0),
                        s.percentile(75.0),
                        s.percentile(90.0),
                    );
                    values.extend([
                        s.mean,
                        s.variance.sqrt(),
                        p50,
                        p75 - p25,
                        s.max - s.min,
                        p10,
                        p25,
                        p75,
                        p90,
                        s.min,
                    ]);
                }
            }
        }
    }
    for k in 0..=MAX_HOMOLOGY_DIM {
        values.push(pd.dim(k).len() as f64);
    }
    for k in 0..=MAX_HOMOLOGY_DIM {
        values.push(pd.dim(k).iter().map(Bar::persistence).sum());
    }
    stat(values, Method::Stat3)
}

fn stat(values: Vec<f64>, method: Method) -> FeatureVector {
    FeatureVector {
        values,
        method,
        landmark_ids: Vec::new(),
    }
}

/// Statistical feature vector for one of the `stat*` methods.
pub fn stats_vector(pd: &PersistenceDiagram, method: Method) -> Result<FeatureVector> {
    match method {
        Method::Stat1 => Ok(stats_vector_1(pd)),
        Method::Stat2 => Ok(stats_vector_2(pd)),
        Method::Stat3 => Ok(stats_vector_3(pd)),
        Method::Bs => Err(Error::Config("bs vectors need landmarks; use bs_vectorize".into())),
    }
}

/// Batch version of [`stats_vector`].
pub fn stats_matrix(diagrams: &[PersistenceDiagram], method: Method) -> Result<Vec<Vec<f64>>> {
    diagrams
        .par_iter()
        .map(|d| stats_vector(d, method).map(|v| v.values))
        .collect()
}

struct Summary {
    sorted: Vec<f64>,
    min: f64,
    max: f64,
    mean: f64,
    variance: f64,
}

impl Summary {
    fn of(mut xs: Vec<f64>) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let variance = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Some(Self {
            min: xs[0],
            max: xs[xs.len() - 1],
            mean,
            variance,
            sorted: xs,
        })
    }

    /// Linear interpolation between closest ranks at position `p/100 · (n-1)`.
    fn percentile(&self, p: f64) -> f64 {
        let pos = p / 100.0 * (self.sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        self.sorted[lo] + (self.sorted[hi] - self.sorted[lo]) * frac
    }
}

/// Per-column standardization fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    /// Columns with zero spread keep scale 1.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::Input("cannot fit a standardizer on zero rows".into()));
        };
        let m = first.len();
        let n = rows.len() as f64;
        let mut means = vec![0.0; m];
        for r in rows {
            for (acc, v) in means.iter_mut().zip(r) {
                *acc += v / n;
            }
        }
        let mut scales = vec![0.0; m];
        for r in rows {
            for j in 0..m {
                scales[j] += (r[j] - means[j]).powi(2) / n;
            }
        }
        for s in &mut scales {
            *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
        }
        Ok(Self { means, scales })
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

/// Sidecar metadata written next to a feature CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureManifest {
    pub method: Method,
    pub weights: WeightVector,
    pub distance_mode: DistanceMode,
    pub truncation: f64,
    pub landmark_ids: Vec<String>,
}

/// Feature matrix as CSV: `id` column followed by numeric columns.
pub fn features_to_csv(ids: &[String], rows: &[Vec<f64>]) -> String {
    let width = rows.first().map_or(0, Vec::len);
    let mut out = String::from("id");
    for j in 0..width {
        let _ = write!(out, ",f{j}");
    }
    out.push('\n');
    for (id, row) in ids.iter().zip(rows) {
        out.push_str(id);
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}
