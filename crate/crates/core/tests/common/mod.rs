//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topomargin::ingest::PointCloud;
use topomargin::persistence::{Bar, PersistenceDiagram};

pub fn random_cloud(seed: u64, max_points: usize, dim: usize) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_points);
    let pts = (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    PointCloud::new(format!("cloud_{seed}"), dim, pts).unwrap()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// GF(2) vector space spanned by bitset vectors, kept in echelon form.
#[derive(Default, Clone)]
struct Span {
    pivots: Vec<(u32, u128)>,
}

impl Span {
    fn reduce(&self, mut v: u128) -> u128 {
        for &(bit, row) in &self.pivots {
            if v >> bit & 1 == 1 {
                v ^= row;
            }
        }
        v
    }

    /// Inserts `v`; returns true if it was independent.
    fn insert(&mut self, v: u128) -> bool {
        let v = self.reduce(v);
        if v == 0 {
            return false;
        }
        let bit = 127 - v.leading_zeros();
        for (_, row) in &mut self.pivots {
            if *row >> bit & 1 == 1 {
                *row ^= v;
            }
        }
        self.pivots.push((bit, v));
        true
    }

    fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Kernel basis of the linear map sending basis vector `i` to `images[i]`,
/// restricted to the columns listed in `cols`.
fn kernel(images: &[u128], cols: &[usize]) -> Vec<u128> {
    // Gaussian elimination on (image | identity) pairs.
    let mut rows: Vec<(u128, u128)> = cols.iter().map(|&i| (images[i], 1u128 << i)).collect();
    let mut basis = Vec::new();
    let mut done: Vec<(u128, u128)> = Vec::new();
    for (mut img, mut comb) in rows.drain(..) {
        for &(pimg, pcomb) in &done {
            let bit = 127 - pimg.leading_zeros();
            if img >> bit & 1 == 1 {
                img ^= pimg;
                comb ^= pcomb;
            }
        }
        if img == 0 {
            basis.push(comb);
        } else {
            let bit = 127 - img.leading_zeros();
            for (oimg, ocomb) in &mut done {
                if *oimg >> bit & 1 == 1 {
                    *oimg ^= img;
                    *ocomb ^= comb;
                }
            }
            done.push((img, comb));
        }
    }
    basis
}

/// Persistence diagram (dimensions 0..=2) of the Rips filtration computed
/// from persistent Betti numbers by inclusion-exclusion. Exponential; only
/// for clouds of at most 8 points.
pub fn brute_force_diagram(pc: &PointCloud) -> PersistenceDiagram {
    let n = pc.len();
    assert!(n <= 8);
    // Simplices per dimension 0..=3 with their diameters.
    let mut simplices: Vec<Vec<(Vec<usize>, f64)>> = vec![Vec::new(); 4];
    for mask in 1u32..(1 << n) {
        let verts: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if verts.len() > 4 {
            continue;
        }
        let mut diam: f64 = 0.0;
        for a in 0..verts.len() {
            for b in (a + 1)..verts.len() {
                diam = diam.max(dist(&pc.points[verts[a]], &pc.points[verts[b]]));
            }
        }
        simplices[verts.len() - 1].push((verts, diam));
    }
    // Boundary of each k-simplex as a bitset over (k-1)-simplices.
    let boundary = |k: usize| -> Vec<u128> {
        simplices[k]
            .iter()
            .map(|(v, _)| {
                let mut out = 0u128;
                if k > 0 {
                    for skip in 0..v.len() {
                        let face: Vec<usize> = v.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &x)| x).collect();
                        let idx = simplices[k - 1].iter().position(|(f, _)| *f == face).unwrap();
                        out |= 1u128 << idx;
                    }
                }
                out
            })
            .collect()
    };
    let bd: Vec<Vec<u128>> = (0..4).map(boundary).collect();

    let mut values: Vec<f64> = simplices.iter().flatten().map(|(_, v)| *v).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let t = values.len();
    let present = |k: usize, s: usize| -> Vec<usize> {
        (0..simplices[k].len()).filter(|&i| simplices[k][i].1 <= values[s]).collect()
    };

    let mut pd = PersistenceDiagram::new(pc.id.clone());
    for k in 0..=2 {
        // beta[s][e]: classes of K_s still alive in K_e, for s <= e.
        let mut beta = vec![vec![0i64; t]; t];
        for s in 0..t {
            let cycles = kernel(&bd[k], &present(k, s));
            for e in s..t {
                let mut bspan = Span::default();
                for i in present(k + 1, e) {
                    bspan.insert(bd[k + 1][i]);
                }
                let b = bspan.rank();
                let mut sum = bspan.clone();
                for &z in &cycles {
                    sum.insert(z);
                }
                let meet = cycles.len() + b - sum.rank();
                beta[s][e] = (cycles.len() - meet) as i64;
            }
        }
        let b = |s: isize, e: usize| -> i64 { if s < 0 { 0 } else { beta[s as usize][e] } };
        for i in 0..t {
            let si = i as isize;
            for j in (i + 1)..t {
                let mu = b(si, j - 1) - b(si - 1, j - 1) - b(si, j) + b(si - 1, j);
                assert!(mu >= 0);
                for _ in 0..mu {
                    pd.bars[k].push(Bar::new(values[i], values[j]));
                }
            }
            let mu = b(si, t - 1) - b(si - 1, t - 1);
            for _ in 0..mu {
                pd.bars[k].push(Bar::new(values[i], f64::INFINITY));
            }
        }
    }
    pd.canonicalize();
    pd
}

/// Reference soft-margin solution: `min ‖β‖² + a Σ ξ` via SMO on the dual,
/// with the offset chosen by enumerating the hinge breakpoints.
pub struct ReferenceSvm {
    pub beta: Vec<f64>,
    pub c: f64,
    pub objective: f64,
}

pub fn hinge_objective(x: &[Vec<f64>], y: &[f64], a: f64, beta: &[f64], c: f64) -> f64 {
    let norm: f64 = beta.iter().map(|b| b * b).sum();
    let loss: f64 = x
        .iter()
        .zip(y)
        .map(|(row, &yi)| {
            let f: f64 = row.iter().zip(beta).map(|(u, v)| u * v).sum::<f64>() + c;
            (1.0 - yi * f).max(0.0)
        })
        .sum();
    norm + a * loss
}

pub fn reference_svm(x: &[Vec<f64>], y: &[f64], a: f64) -> ReferenceSvm {
    let n = x.len();
    let m = x[0].len();
    // Standard dual with kernel K/2 and box [0, a].
    let k: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * x[i].iter().zip(&x[j]).map(|(u, v)| u * v).sum::<f64>()).collect())
        .collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    for _ in 0..2_000_000 {
        let up = |t: usize| (y[t] > 0.0 && alpha[t] < a) || (y[t] < 0.0 && alpha[t] > 0.0);
        let low = |t: usize| (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < a);
        let (mut i, mut big) = (usize::MAX, f64::NEG_INFINITY);
        let (mut j, mut small) = (usize::MAX, f64::INFINITY);
        for t in 0..n {
            let v = -y[t] * grad[t];
            if up(t) && v > big {
                big = v;
                i = t;
            }
            if low(t) && v < small {
                small = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || big - small < 1e-13 {
            break;
        }
        let slope = y[i] * grad[i] - y[j] * grad[j];
        let curv = (k[i][i] + k[j][j] - 2.0 * k[i][j]).max(1e-12);
        let mut step = -slope / curv;
        // Box limits for alpha_i + y_i t and alpha_j - y_j t.
        let lim = |alpha: f64, dir: f64| if dir > 0.0 { a - alpha } else { alpha };
        step = step.min(lim(alpha[i], y[i])).min(lim(alpha[j], -y[j]));
        alpha[i] += y[i] * step;
        alpha[j] -= y[j] * step;
        for t in 0..n {
            grad[t] += y[t] * (k[t][i] - k[t][j]) * step;
        }
    }
    let beta: Vec<f64> = (0..m)
        .map(|d| 0.5 * (0..n).map(|t| alpha[t] * y[t] * x[t][d]).sum::<f64>())
        .collect();
    let (c, objective) = (0..n)
        .map(|t| {
            let f: f64 = x[t].iter().zip(&beta).map(|(u, v)| u * v).sum();
            let c = y[t] - f;
            (c, hinge_objective(x, y, a, &beta, c))
        })
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap();
    ReferenceSvm { beta, c, objective }
}

/// Random soft-margin instance with both classes present.
pub fn random_instance(seed: u64) -> (Vec<Vec<f64>>, Vec<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(4..=20);
    let m = rng.random_range(2..=5);
    let shift = rng.random_range(0.0..2.0);
    let mut y: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    y[0] = 1.0;
    y[1] = -1.0;
    let x = y
        .iter()
        .map(|&yi| (0..m).map(|_| rng.random_range(-1.0..1.0) + 0.5 * shift * yi).collect())
        .collect();
    let a = [0.1, 1.0, 10.0][rng.random_range(0..3)];
    (x, y, a)
}

/// Multiset equality of two canonicalized diagrams.
pub fn same_bars(a: &PersistenceDiagram, b: &PersistenceDiagram) -> bool {
    let (mut a, mut b) = (a.clone(), b.clone());
    a.canonicalize();
    b.canonicalize();
    a.bars == b.bars
}

/// Rips diagrams of the circles-vs-blobs set.
pub fn synth_diagrams(cfg: &topomargin::synth::SynthConfig) -> (Vec<PersistenceDiagram>, Vec<f64>) {
    use rayon::prelude::*;
    use topomargin::persistence::{diagram_of, PhConfig};
    let data = topomargin::synth::circles_vs_blobs(cfg).unwrap();
    let diagrams = data
        .clouds
        .par_iter()
        .map(|c| diagram_of(c, &PhConfig::default()).unwrap())
        .collect();
    (diagrams, data.labels)
}

/// `n` evenly spaced points on the unit circle with Gaussian noise.
pub fn even_circle(n: usize, sigma: f64, seed: u64) -> PointCloud {
    use rand_distr::{Distribution, Normal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let pts = (0..n)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / n as f64;
            vec![t.cos() + noise.sample(&mut rng), t.sin() + noise.sample(&mut rng)]
        })
        .collect();
    PointCloud::new("circle", 2, pts).unwrap()
}
