//! Graph embedding of contact graphs into low-dimensional point clouds.
//!
//! Two embedders are available. The random-walk embedder samples second-order
//! biased walks (return parameter `p`, in-out parameter `q`) and trains
//! skip-gram vectors with negative sampling over the walk corpus. The
//! spectral embedder uses Laplacian eigenvectors and is fully deterministic
//! without any training.
//!
//! Both are reproducible for a fixed seed. Walk generation runs in parallel
//! over start nodes; every node draws from its own generator seeded from the
//! global seed and the node index, so the corpus does not depend on thread
//! scheduling.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ContactGraph, PointCloud};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingMethod {
    RandomWalk,
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub dim: usize,
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub return_param: f64,
    pub inout_param: f64,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub seed: u64,
    pub method: EmbeddingMethod,
    /// Initial skip-gram learning rate, decayed linearly over training.
    pub learning_rate: f64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            dim: 16,
            walks_per_node: 10,
            walk_length: 80,
            return_param: 1.0,
            inout_param: 1.0,
            window: 5,
            negatives: 5,
            epochs: 3,
            seed: 0,
            method: EmbeddingMethod::RandomWalk,
            learning_rate: 0.025,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::Config(format!("embedding dim must be >= 2, got {}", self.dim)));
        }
        let counts = [
            ("walks_per_node", self.walks_per_node),
            ("walk_length", self.walk_length),
            ("window", self.window),
            ("negatives", self.negatives),
            ("epochs", self.epochs),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be >= 1")));
            }
        }
        for (name, v) in [("p", self.return_param), ("q", self.inout_param)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// All walks sampled from one graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkCorpus {
    pub n_nodes: usize,
    pub walks: Vec<Vec<usize>>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent generator seed from a base seed and a stream index.
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

/// Samples `walks_per_node` biased walks from every node.
///
/// Walks are returned round-major: the first `n_nodes` walks start at nodes
/// `0..n_nodes` in order, then the next round, and so on.
pub fn generate_walks(g: &ContactGraph, cfg: &EmbeddingConfig) -> Result<WalkCorpus> {
    cfg.validate()?;
    if g.n_nodes == 0 {
        return Err(Error::Input("cannot walk an empty graph".into()));
    }
    let per_node: Vec<Vec<Vec<usize>>> = (0..g.n_nodes)
        .into_par_iter()
        .map(|start| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, start as u64));
            (0..cfg.walks_per_node)
                .map(|_| biased_walk(g, start, cfg, &mut rng))
                .collect()
        })
        .collect();

    let mut walks = Vec::with_capacity(g.n_nodes * cfg.walks_per_node);
    for round in 0..cfg.walks_per_node {
        for node_walks in &per_node {
            walks.push(node_walks[round].clone());
        }
    }
    Ok(WalkCorpus {
        n_nodes: g.n_nodes,
        walks,
    })
}

fn biased_walk(g: &ContactGraph, start: usize, cfg: &EmbeddingConfig, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut walk = Vec::with_capacity(cfg.walk_length);
    walk.push(start);
    let mut weights: Vec<f64> = Vec::new();
    while walk.len() < cfg.walk_length {
        let cur = *walk.last().unwrap();
        let nbrs = g.neighbors(cur);
        if nbrs.is_empty() {
            break;
        }
        let next = if walk.len() == 1 {
            nbrs[rng.random_range(0..nbrs.len())]
        } else {
            let prev = walk[walk.len() - 2];
            weights.clear();
            weights.extend(nbrs.iter().map(|&x| {
                if x == prev {
                    1.0 / cfg.return_param
                } else if g.has_edge(prev, x) {
                    1.0
                } else {
                    1.0 / cfg.inout_param
                }
            }));
            let total: f64 = weights.iter().sum();
            let mut r = rng.random::<f64>() * total;
            let mut chosen = nbrs[nbrs.len() - 1];
            for (&x, &w) in nbrs.iter().zip(&weights) {
                if r < w {
                    chosen = x;
                    break;
                }
                r -= w;
            }
            chosen
        };
        walk.push(next);
    }
    walk
}

fn sigmoid(x: f64) -> f64 {
    if x > 20.0 {
        1.0
    } else if x < -20.0 {
        0.0
    } else {
        1.0 / (1.0 + (-x).exp())
    }
}

/// Trains skip-gram vectors with negative sampling over a walk corpus and
/// returns one `cfg.dim`-dimensional point per node.
pub fn train_embedding(corpus: &WalkCorpus, cfg: &EmbeddingConfig) -> Result<PointCloud> {
    cfg.validate()?;
    if corpus.walks.is_empty() || corpus.n_nodes == 0 {
        return Err(Error::Input("empty walk corpus".into()));
    }
    let n = corpus.n_nodes;
    let dim = cfg.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, u64::MAX));

    let mut input: Vec<f64> = (0..n * dim)
        .map(|_| (rng.random::<f64>() - 0.5) / dim as f64)
        .collect();
    let mut output = vec![0.0; n * dim];

    let mut counts = vec![0.0f64; n];
    for &v in corpus.walks.iter().flatten() {
        counts[v] += 1.0;
    }
    // Unigram^0.75 noise distribution; unseen nodes get a tiny floor.
    let noise = WeightedIndex::new(counts.iter().map(|c| c.max(1e-3).powf(0.75)))
        .map_err(|e| Error::Input(format!("noise distribution: {e}")))?;

    let total_steps = (cfg.epochs * corpus.walks.iter().map(Vec::len).sum::<usize>()).max(1) as f64;
    let mut step = 0usize;
    let mut grad = vec![0.0; dim];

    for _ in 0..cfg.epochs {
        for walk in &corpus.walks {
            for (i, &center) in walk.iter().enumerate() {
                let lr = (cfg.learning_rate * (1.0 - step as f64 / total_steps))
                    .max(cfg.learning_rate * 1e-4);
                step += 1;
                let lo = i.saturating_sub(cfg.window);
                let hi = (i + cfg.window + 1).min(walk.len());
                for (j, &context) in walk.iter().enumerate().take(hi).skip(lo) {
                    if j == i {
                        continue;
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let center_vec = center * dim..(center + 1) * dim;
                    for k in 0..=cfg.negatives {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            let t = noise.sample(&mut rng);
                            if t == context {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let out = &mut output[target * dim..(target + 1) * dim];
                        let inp = &input[center_vec.clone()];
                        let dot: f64 = inp.iter().zip(out.iter()).map(|(a, b)| a * b).sum();
                        let g = (label - sigmoid(dot)) * lr;
                        for d in 0..dim {
                            grad[d] += g * out[d];
                            out[d] += g * inp[d];
                        }
                    }
                    for (w, g) in input[center_vec].iter_mut().zip(&grad) {
                        *w += g;
                    }
                }
            }
        }
    }

    let points = input.chunks(dim).map(<[f64]>::to_vec).collect();
    PointCloud::new("embedding", dim, points)
}

/// Laplacian-eigenvector embedding, computed per connected component.
///
/// Each component contributes its `dim` eigenvectors with the smallest
/// nonzero eigenvalues (zero-padded when the component is too small), with
/// each eigenvector's first nonzero entry made positive. Components are then
/// shifted along the first axis by `index * 3 * max_radius` so that distinct
/// components stay at least `max_radius` apart.
pub fn spectral_embedding(g: &ContactGraph, dim: usize) -> Result<PointCloud> {
    if dim == 0 {
        return Err(Error::Config("embedding dim must be positive".into()));
    }
    if g.n_nodes == 0 {
        return Err(Error::Input("cannot embed an empty graph".into()));
    }
    let mut points = vec![vec![0.0; dim]; g.n_nodes];
    let components = g.components();

    for comp in &components {
        let m = comp.len();
        if m == 1 {
            continue;
        }
        let mut lap = DMatrix::<f64>::zeros(m, m);
        for (a, &u) in comp.iter().enumerate() {
            for &v in g.neighbors(u) {
                let b = comp.binary_search(&v).expect("neighbour in same component");
                lap[(a, b)] -= 1.0;
                lap[(a, a)] += 1.0;
            }
        }
        let eig = SymmetricEigen::new(lap);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
        for (axis, &col) in order.iter().skip(1).take(dim).enumerate() {
            let mut v: Vec<f64> = eig.eigenvectors.column(col).iter().copied().collect();
            if let Some(first) = v.iter().find(|x| x.abs() > 1e-10) {
                if *first < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            }
            for (a, &node) in comp.iter().enumerate() {
                points[node][axis] = v[a];
            }
        }
    }

    if components.len() > 1 {
        let radius = points
            .iter()
            .map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let step = if radius > 0.0 { 3.0 * radius } else { 1.0 };
        for (k, comp) in components.iter().enumerate() {
            for &node in comp {
                points[node][0] += k as f64 * step;
            }
        }
    }
    PointCloud::new(g.id.clone(), dim, points)
}

/// Embeds a graph with the configured method.
pub fn embed_graph(g: &ContactGraph, cfg: &EmbeddingConfig) -> Result<PointCloud> {
    let mut pc = match cfg.method {
        EmbeddingMethod::Spectral => spectral_embedding(g, cfg.dim)?,
        EmbeddingMethod::RandomWalk => {
            let corpus = generate_walks(g, cfg)?;
            train_embedding(&corpus, cfg)?
        }
    };
    pc.id = g.id.clone();
    Ok(pc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::euclidean;

    fn small_cfg(seed: u64) -> EmbeddingConfig {
        EmbeddingConfig {
            dim: 4,
            walks_per_node: 6,
            walk_length: 20,
            epochs: 2,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn isolated_node_walks_have_length_one() {
        let g = ContactGraph::from_edges("iso", 1, &[], 5.0).unwrap();
        let cfg = EmbeddingConfig {
            walks_per_node: 2,
            walk_length: 5,
            ..Default::default()
        };
        let corpus = generate_walks(&g, &cfg).unwrap();
        assert_eq!(corpus.walks, vec![vec![0], vec![0]]);
    }

    #[test]
    fn path_graph_walks_follow_edges() {
        let g = ContactGraph::from_edges("path", 3, &[(0, 1), (1, 2)], 5.0).unwrap();
        let corpus = generate_walks(&g, &small_cfg(3)).unwrap();
        assert_eq!(corpus.walks.len(), 3 * 6);
        for (k, walk) in corpus.walks.iter().enumerate() {
            assert_eq!(walk[0], k % 3);
            assert_eq!(walk.len(), 20);
            for pair in walk.windows(2) {
                assert!(g.has_edge(pair[0], pair[1]));
            }
        }
    }

    #[test]
    fn return_parameter_biases_backtracking() {
        // Star-free cycle: with tiny p the walk almost always returns.
        let edges: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        let g = ContactGraph::from_edges("ring", 6, &edges, 5.0).unwrap();
        let mut cfg = small_cfg(11);
        cfg.return_param = 1e-3;
        let corpus = generate_walks(&g, &cfg).unwrap();
        let (mut back, mut total) = (0, 0);
        for w in &corpus.walks {
            for t in w.windows(3) {
                total += 1;
                back += usize::from(t[0] == t[2]);
            }
        }
        assert!(back as f64 / total as f64 > 0.95);
    }

    #[test]
    fn walks_and_embedding_are_deterministic() {
        let edges: Vec<_> = (0..8).map(|i| (i, (i + 1) % 8)).collect();
        let g = ContactGraph::from_edges("ring", 8, &edges, 5.0).unwrap();
        let cfg = small_cfg(42);
        let a = generate_walks(&g, &cfg).unwrap();
        let b = generate_walks(&g, &cfg).unwrap();
        assert_eq!(a, b);
        let ea = train_embedding(&a, &cfg).unwrap();
        let eb = train_embedding(&b, &cfg).unwrap();
        assert_eq!(ea.points, eb.points);
        assert_eq!(ea.len(), 8);
        assert!(ea.points.iter().all(|p| p.len() == 4));
    }

    #[test]
    fn spectral_single_node_is_zero() {
        let g = ContactGraph::from_edges("one", 1, &[], 5.0).unwrap();
        let pc = spectral_embedding(&g, 3).unwrap();
        assert_eq!(pc.points, vec![vec![0.0; 3]]);
    }

    #[test]
    fn spectral_k3_is_equilateral() {
        let g = ContactGraph::from_edges("k3", 3, &[(0, 1), (0, 2), (1, 2)], 5.0).unwrap();
        let pc = spectral_embedding(&g, 2).unwrap();
        let d01 = euclidean(&pc.points[0], &pc.points[1]);
        let d02 = euclidean(&pc.points[0], &pc.points[2]);
        let d12 = euclidean(&pc.points[1], &pc.points[2]);
        assert!((d01 - d02).abs() < 1e-6 && (d01 - d12).abs() < 1e-6);
        // Orthonormal basis of the sum-zero plane: squared distances are 2.
        assert!((d01 * d01 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn spectral_components_do_not_overlap() {
        let g = ContactGraph::from_edges("two", 4, &[(0, 1), (2, 3)], 5.0).unwrap();
        let pc = spectral_embedding(&g, 2).unwrap();
        let within = euclidean(&pc.points[0], &pc.points[1]);
        let across = euclidean(&pc.points[0], &pc.points[2]);
        assert!(across > within);
    }
}
