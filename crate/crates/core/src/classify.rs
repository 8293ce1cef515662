//! Soft-margin maximal-margin training as a convex quadratic program.
//!
//! With feature rows `F` (distances to landmarks, or plain feature vectors),
//! labels `y ∈ {-1, +1}` and penalty `a`, training solves
//!
//! ```text
//! minimize    ½ αᵀ Q α + bᵀ α,          α = (β, ξ, c)
//! subject to  G α ≥ h
//!
//! Q = diag(2·I_m, 0_n, 0)     b = (0_m, a·1_n, 0)
//! G = [ y∗F   I_n   y ]       h = (1_n, 0_n)
//!     [ 0     I_n   0 ]
//! ```
//!
//! where `y∗F` scales row `j` of `F` by `y_j`. The first block row encodes
//! `y_j (Σ_i β_i F_ji + c) ≥ 1 − ξ_j`, the second `ξ ≥ 0`.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{DistanceMatrix, DistanceMode, WeightVector};
use crate::vectorize::Standardizer;

pub const DEFAULT_PENALTY: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 20_000;
/// Diagonal regularization added to the Newton system where `Q` is zero.
pub const STATIC_REGULARIZATION: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    BsDistances,
    StatFeatures,
}

/// Training rows with ±1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub ids: Vec<String>,
    pub labels: Vec<f64>,
    pub features: Vec<Vec<f64>>,
    pub kind: FeatureKind,
    /// Column identities; for distance rows these are the landmark ids.
    pub landmark_ids: Vec<String>,
}

impl LabeledSet {
    pub fn new(ids: Vec<String>, labels: Vec<f64>, features: Vec<Vec<f64>>, kind: FeatureKind) -> Result<Self> {
        if ids.len() != labels.len() || ids.len() != features.len() {
            return Err(Error::Input(format!(
                "{} ids, {} labels and {} feature rows",
                ids.len(),
                labels.len(),
                features.len()
            )));
        }
        let width = features.first().map_or(0, Vec::len);
        if features.iter().any(|r| r.len() != width) {
            return Err(Error::Input("feature rows have different lengths".into()));
        }
        if features.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Input("feature rows contain non-finite values".into()));
        }
        Ok(Self {
            ids,
            labels,
            features,
            kind,
            landmark_ids: Vec::new(),
        })
    }

    /// Rows of a training distance matrix; landmarks are the training diagrams.
    pub fn from_distance_matrix(dm: &DistanceMatrix, labels: Vec<f64>) -> Result<Self> {
        let mut set = Self::new(dm.ids.clone(), labels, dm.rows(), FeatureKind::BsDistances)?;
        set.landmark_ids = dm.ids.clone();
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn width(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    fn check_labels(&self) -> Result<()> {
        if let Some(bad) = self.labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(Error::Input(format!("labels must be exactly +1 or -1, found {bad}")));
        }
        let pos = self.labels.iter().filter(|&&y| y > 0.0).count();
        if pos == 0 || pos == self.labels.len() {
            return Err(Error::Input("training data must contain both classes".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub q: DMatrix<f64>,
    pub b: DVector<f64>,
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
    /// Number of training rows.
    pub n: usize,
    /// Number of feature columns (length of β).
    pub m: usize,
}

impl QpProblem {
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.q * x)) + self.b.dot(x)
    }
}

/// Builds `Q, b, G, h` for the soft-margin problem.
pub fn assemble_qp(data: &LabeledSet, a: f64) -> Result<QpProblem> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Config(format!("penalty must be positive, got {a}")));
    }
    data.check_labels()?;
    let n = data.len();
    let m = data.width();
    if m == 0 {
        return Err(Error::Input("feature rows are empty".into()));
    }
    let size = m + n + 1;

    let mut q = DMatrix::zeros(size, size);
    for i in 0..m {
        q[(i, i)] = 2.0;
    }
    let mut b = DVector::zeros(size);
    for j in 0..n {
        b[m + j] = a;
    }
    let mut g = DMatrix::zeros(2 * n, size);
    let mut h = DVector::zeros(2 * n);
    for j in 0..n {
        let y = data.labels[j];
        for (i, &f) in data.features[j].iter().enumerate() {
            g[(j, i)] = y * f;
        }
        g[(j, m + j)] = 1.0;
        g[(j, size - 1)] = y;
        g[(n + j, m + j)] = 1.0;
        h[j] = 1.0;
    }
    Ok(QpProblem { q, b, g, h, n, m })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    /// Largest violation of `Gα ≥ h`.
    pub primal_residual: f64,
    /// `‖Qα + b − Gᵀz‖∞`.
    pub dual_residual: f64,
    /// `max_i |(Gα − h)_i · z_i|`.
    pub complementarity: f64,
    pub objective: f64,
    pub regularization: f64,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// Multipliers of `Gα ≥ h`.
    pub z: DVector<f64>,
    pub report: SolverReport,
}

/// KKT residuals of a candidate primal/dual pair.
pub fn kkt_residuals(p: &QpProblem, x: &DVector<f64>, z: &DVector<f64>) -> (f64, f64, f64) {
    let slack = &p.g * x - &p.h;
    let primal = slack.iter().map(|s| (-s).max(0.0)).fold(0.0, f64::max);
    let dual = (&p.q * x + &p.b - p.g.transpose() * z).amax();
    let comp = slack
        .iter()
        .zip(z.iter())
        .map(|(s, zi)| (s * zi).abs())
        .fold(0.0, f64::max);
    (primal, dual, comp)
}

/// Cholesky factor of `k`. Close to the optimum the scaling `z/s` spans many
/// orders of magnitude and `k` can lose definiteness in floating point; a
/// growing diagonal shift is then tried. Convergence is still judged on the
/// unshifted residuals.
fn factor(k: DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    if let Some(c) = Cholesky::new(k.clone()) {
        return Some(c);
    }
    let scale = k.diagonal().amax().max(1.0);
    let mut shift = 1e-14 * scale;
    for _ in 0..8 {
        let mut shifted = k.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += shift;
        }
        if let Some(c) = Cholesky::new(shifted) {
            return Some(c);
        }
        shift *= 100.0;
    }
    None
}

fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(x, d)| -x / d)
        .fold(1.0, f64::min)
}

/// Solves `min ½xᵀQx + bᵀx s.t. Gx ≥ h` with an infeasible-start
/// primal-dual interior-point method (Mehrotra predictor-corrector).
///
/// Terminates when the constraint violation is at most `tol·(1+‖h‖∞)` and
/// the stationarity and complementarity residuals are at most
/// `tol·(1+‖b‖∞)`.
pub fn solve_qp(p: &QpProblem, tol: f64, max_iter: usize) -> Result<QpSolution> {
    let nvar = p.q.nrows();
    let ncon = p.g.nrows();
    if p.q.ncols() != nvar || p.b.len() != nvar || p.g.ncols() != nvar || p.h.len() != ncon {
        return Err(Error::Input("inconsistent QP dimensions".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let primal_tol = tol * (1.0 + p.h.amax());
    let dual_tol = tol * (1.0 + p.b.amax());

    let mut x = DVector::zeros(nvar);
    let mut s = DVector::from_element(ncon, 1.0);
    let mut z = DVector::from_element(ncon, 1.0);
    let gt = p.g.transpose();
    let reg: Vec<f64> = (0..nvar)
        .map(|i| if p.q[(i, i)] == 0.0 { STATIC_REGULARIZATION } else { 0.0 })
        .collect();

    let mut last = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for iter in 0..=max_iter {
        let (primal, dual, comp) = kkt_residuals(p, &x, &z);
        last = (primal, dual, comp);
        let rp = &p.g * &x - &s - &p.h;
        if primal <= primal_tol && rp.amax() <= primal_tol && dual <= dual_tol && comp <= dual_tol {
            return Ok(QpSolution {
                report: SolverReport {
                    iterations: iter,
                    primal_residual: primal,
                    dual_residual: dual,
                    complementarity: comp,
                    objective: p.objective(&x),
                    regularization: STATIC_REGULARIZATION,
                },
                x,
                z,
            });
        }
        if iter == max_iter {
            break;
        }

        // Farkas certificate: z ≥ 0, Gᵀz = 0, hᵀz > 0.
        let zmax = z.amax();
        if zmax > 1e8 {
            let zn = &z / zmax;
            if (&gt * &zn).amax() < 1e-7 && p.h.dot(&zn) > 1e-7 {
                return Err(Error::Infeasible(format!(
                    "certificate found after {iter} iterations (hᵀz = {:.3e})",
                    p.h.dot(&zn)
                )));
            }
        }

        let rd = &p.q * &x + &p.b - &gt * &z;
        let mu = s.dot(&z) / ncon as f64;
        let w = z.component_div(&s);

        let mut k = &p.q + &gt * DMatrix::from_diagonal(&w) * &p.g;
        for (i, r) in reg.iter().enumerate() {
            k[(i, i)] += r;
        }
        let chol = factor(k).ok_or(Error::Convergence {
            iterations: iter,
            primal: last.0,
            dual: last.1,
            complementarity: last.2,
        })?;

        let solve = |rc: &DVector<f64>| {
            // Δx from the reduced system, then Δs and Δz by substitution.
            let t = (rc + z.component_mul(&rp)).component_div(&s);
            let rhs = -&rd - &gt * &t;
            let dx = chol.solve(&rhs);
            let ds = &p.g * &dx + &rp;
            let dz = -(rc + z.component_mul(&ds)).component_div(&s);
            (dx, ds, dz)
        };

        let rc_aff = s.component_mul(&z);
        let (_, ds_aff, dz_aff) = solve(&rc_aff);
        let alpha_aff = max_step(&s, &ds_aff).min(max_step(&z, &dz_aff));
        let mu_aff = (&s + alpha_aff * &ds_aff).dot(&(&z + alpha_aff * &dz_aff)) / ncon as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        let rc = &rc_aff + ds_aff.component_mul(&dz_aff) - DVector::from_element(ncon, sigma * mu);
        let (dx, ds, dz) = solve(&rc);
        let alpha = (0.99 * max_step(&s, &ds).min(max_step(&z, &dz))).min(1.0);

        x += alpha * dx;
        s += alpha * ds;
        z += alpha * dz;
        // Keep iterates strictly interior.
        s.iter_mut().for_each(|v| *v = v.max(1e-300));
        z.iter_mut().for_each(|v| *v = v.max(1e-300));
    }
    Err(Error::Convergence {
        iterations: max_iter,
        primal: last.0,
        dual: last.1,
        complementarity: last.2,
    })
}

/// A trained classifier: `score(v) = Σ_i beta_i · v_i + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginModel {
    pub beta: Vec<f64>,
    pub c: f64,
    pub xi: Vec<f64>,
    pub a: f64,
    pub tol: f64,
    pub feature_kind: FeatureKind,
    pub landmark_ids: Vec<String>,
    pub solver_report: SolverReport,
    /// Preprocessing needed to vectorize new diagrams consistently.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preprocessing: Option<Preprocessing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub method: crate::vectorize::Method,
    pub truncation: f64,
    pub noise_cutoff: f64,
    pub noise_dims: Vec<usize>,
    pub weights: WeightVector,
    pub distance_mode: DistanceMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standardizer: Option<Standardizer>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub score: f64,
    pub label: i8,
}

/// Trains a soft-margin model and checks the slack block against the hinge
/// formula `ξ_j = max(0, 1 − y_j(Σβ_i F_ji + c))`.
///
/// If the two disagree by more than `10·tol` the problem is re-solved at a
/// tighter tolerance before giving up.
pub fn train(data: &LabeledSet, a: f64, tol: f64) -> Result<MarginModel> {
    let p = assemble_qp(data, a)?;
    let (n, m) = (p.n, p.m);
    let mut solve_tol = tol;
    loop {
        let sol = solve_qp(&p, solve_tol, DEFAULT_MAX_ITER)?;
        let beta: Vec<f64> = sol.x.rows(0, m).iter().copied().collect();
        let xi: Vec<f64> = sol.x.rows(m, n).iter().copied().collect();
        let c = sol.x[m + n];
        let mismatch = (0..n)
            .map(|j| {
                let f: f64 = beta.iter().zip(&data.features[j]).map(|(b, v)| b * v).sum::<f64>() + c;
                let hinge = (1.0 - data.labels[j] * f).max(0.0);
                (hinge - xi[j]).abs()
            })
            .fold(0.0, f64::max);
        if mismatch <= 10.0 * tol {
            return Ok(MarginModel {
                beta,
                c,
                xi,
                a,
                tol,
                feature_kind: data.kind,
                landmark_ids: data.landmark_ids.clone(),
                solver_report: sol.report,
                preprocessing: None,
            });
        }
        if solve_tol < 1e-14 {
            return Err(Error::Convergence {
                iterations: sol.report.iterations,
                primal: sol.report.primal_residual,
                dual: mismatch,
                complementarity: sol.report.complementarity,
            });
        }
        solve_tol /= 100.0;
    }
}

impl MarginModel {
    pub fn score(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.beta.len() {
            return Err(Error::Input(format!(
                "feature vector has length {}, model expects {}",
                features.len(),
                self.beta.len()
            )));
        }
        Ok(self.beta.iter().zip(features).map(|(b, v)| b * v).sum::<f64>() + self.c)
    }
}

/// Scores a feature vector; a score of exactly 0 predicts +1.
pub fn predict(model: &MarginModel, features: &[f64]) -> Result<Prediction> {
    let score = model.score(features)?;
    Ok(Prediction {
        score,
        label: if score >= 0.0 { 1 } else { -1 },
    })
}

/// Predictions as CSV rows `id,score,label`.
pub fn predictions_to_csv(ids: &[String], preds: &[Prediction]) -> String {
    let mut out = String::from("id,score,label\n");
    for (id, p) in ids.iter().zip(preds) {
        out.push_str(&format!("{id},{},{}\n", p.score, p.label));
    }
    out
}
