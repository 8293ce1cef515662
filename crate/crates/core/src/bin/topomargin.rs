use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use topomargin::classify::{predictions_to_csv, MarginModel};
use topomargin::embed::{embed_graph, EmbeddingConfig, EmbeddingMethod};
use topomargin::harness::{evaluate, fit_pipeline, misclass_report, predict_function, EvalConfig, FittedPipeline, ModelParams};
use topomargin::ingest::{contact_graph, write_xyz, DEFAULT_CONTACT_THRESHOLD};
use topomargin::io::{self, collect_files, read_labels, write_json, write_text, DiagramPipeline};
use topomargin::metrics::{distance_matrix, truncate_all, truncation_value, DistanceMode, WeightVector};
use topomargin::persistence::{diagram_of, filter_noise, PersistenceDiagram, PhConfig, DEFAULT_NOISE_CUTOFF};
use topomargin::synth::{circles_vs_blobs, SynthConfig};
use topomargin::vectorize::{bs_vectorize, features_to_csv, stats_matrix, FeatureManifest, Method};
use topomargin::{Error, Result};

#[derive(Parser)]
#[command(name = "topomargin", version, about = "Persistence diagrams, distance vectorization and soft-margin classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract Cα point clouds and contact graphs from PDB files
    Ingest {
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CONTACT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed contact graphs of structures or clouds into low-dimensional clouds
    Embed {
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CONTACT_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        embedding: EmbedArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute Rips persistence diagrams of clouds (xyz) or structures (pdb)
    Ph {
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        ph: PhArgs,
        #[arg(long, default_value_t = DEFAULT_NOISE_CUTOFF)]
        cutoff: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write feature vectors of diagrams as CSV plus a JSON manifest
    Vectorize {
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        /// Landmark diagrams for `bs` (defaults to the inputs themselves)
        #[arg(long)]
        landmarks: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a soft-margin model on labelled diagrams
    Train {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        labels: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score diagrams with a trained model
    Predict {
        inputs: Vec<PathBuf>,
        /// Directory written by `train`
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the repeated-split accuracy protocol
    Eval {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        labels: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated methods to compare (overrides --method)
        #[arg(long)]
        methods: Option<String>,
        #[arg(long, default_value = "0.3,0.5,0.8")]
        train_fractions: String,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_stratify: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank candidate structures that fall in the margin band of a known function
    PredictFunction {
        #[arg(long, num_args = 1.., required = true)]
        known: Vec<PathBuf>,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, num_args = 0..)]
        candidates: Vec<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        embedding: EmbedArgs,
        #[command(flatten)]
        ph: PhArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate the synthetic circles-vs-blobs dataset
    Synth {
        #[arg(long, default_value_t = 50)]
        per_class: usize,
        #[arg(long, default_value_t = 24)]
        points: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, default_value = "bs")]
    method: Method,
    #[arg(long, default_value_t = 1.0)]
    penalty: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    weights: Option<String>,
    #[arg(long, default_value = "hausdorff")]
    distance_mode: DistanceMode,
    #[arg(long, default_value_t = DEFAULT_NOISE_CUTOFF)]
    cutoff: f64,
    #[arg(long)]
    standardize: bool,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams> {
        Ok(ModelParams {
            method: self.method,
            penalty: self.penalty,
            tol: self.tol,
            weights: self.weights.as_deref().map(WeightVector::parse).transpose()?.unwrap_or_default(),
            distance_mode: self.distance_mode,
            noise_cutoff: self.cutoff,
            noise_dims: vec![1, 2],
            standardize: self.standardize,
        })
    }
}

#[derive(Args, Clone)]
struct EmbedArgs {
    #[arg(long, default_value = "random-walk", value_parser = parse_embedding_method)]
    embed_method: EmbeddingMethod,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 10)]
    walks_per_node: usize,
    #[arg(long, default_value_t = 80)]
    walk_length: usize,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, default_value_t = 5)]
    negatives: usize,
    #[arg(long, default_value_t = 3)]
    epochs: usize,
    #[arg(long = "embed-seed", default_value_t = 0)]
    seed: u64,
}

impl EmbedArgs {
    fn config(&self) -> EmbeddingConfig {
        EmbeddingConfig {
            dim: self.dim,
            walks_per_node: self.walks_per_node,
            walk_length: self.walk_length,
            return_param: self.p,
            inout_param: self.q,
            window: self.window,
            negatives: self.negatives,
            epochs: self.epochs,
            seed: self.seed,
            method: self.embed_method,
            ..Default::default()
        }
    }
}

fn parse_embedding_method(s: &str) -> std::result::Result<EmbeddingMethod, String> {
    match s {
        "random-walk" => Ok(EmbeddingMethod::RandomWalk),
        "spectral" => Ok(EmbeddingMethod::Spectral),
        _ => Err(format!("unknown embedding method {s:?}")),
    }
}

#[derive(Args, Clone)]
struct PhArgs {
    /// Largest simplex dimension (homology is computed below it)
    #[arg(long, default_value_t = 3)]
    max_dim: usize,
    #[arg(long, default_value_t = f64::INFINITY)]
    max_radius: f64,
    #[arg(long, default_value_t = topomargin::persistence::DEFAULT_SIMPLEX_BUDGET)]
    budget: usize,
}

impl PhArgs {
    fn config(&self) -> PhConfig {
        PhConfig {
            max_dim: self.max_dim,
            max_radius: self.max_radius,
            budget: self.budget,
        }
    }
}

fn load_diagrams(inputs: &[PathBuf]) -> Result<Vec<PersistenceDiagram>> {
    collect_files(inputs, &["json"])?.iter().map(|p| io::read_diagram(p)).collect()
}

fn parse_fractions(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Config(format!("train fraction {s:?}: {e}"))))
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { inputs, threshold, out } => {
            for path in collect_files(&inputs, &["pdb", "ent"])? {
                let pc = io::read_point_cloud(&path)?;
                let g = contact_graph(&pc, threshold)?;
                write_text(&out.join(format!("{}.xyz", pc.id)), &write_xyz(&pc))?;
                let mut edges = String::from("i,j\n");
                for (i, j) in g.edges() {
                    edges.push_str(&format!("{i},{j}\n"));
                }
                write_text(&out.join(format!("{}.edges.csv", pc.id)), &edges)?;
                println!("{}: {} CA atoms, {} contacts", pc.id, pc.len(), g.edge_count());
            }
        }
        Command::Embed { inputs, threshold, embedding, out } => {
            let cfg = embedding.config();
            for path in collect_files(&inputs, &["pdb", "ent", "xyz"])? {
                let pc = io::read_point_cloud(&path)?;
                let g = contact_graph(&pc, threshold)?;
                let embedded = embed_graph(&g, &cfg)?;
                write_text(&out.join(format!("{}.xyz", embedded.id)), &write_xyz(&embedded))?;
            }
        }
        Command::Ph { inputs, ph, cutoff, out } => {
            let cfg = ph.config();
            let files = collect_files(&inputs, &["xyz", "pdb", "ent", "txt"])?;
            let results: Vec<Result<PersistenceDiagram>> = files
                .par_iter()
                .map(|p| {
                    let pd = diagram_of(&io::read_point_cloud(p)?, &cfg)?;
                    filter_noise(&pd, cutoff, &[1, 2])
                })
                .collect();
            for pd in results {
                let pd = pd?;
                write_json(&out.join(format!("{}.json", pd.id)), &pd)?;
                println!("{}: {} / {} / {} bars", pd.id, pd.dim(0).len(), pd.dim(1).len(), pd.dim(2).len());
            }
        }
        Command::Vectorize { inputs, model, landmarks, out } => {
            let params = model.params()?;
            let filtered: Vec<_> = load_diagrams(&inputs)?
                .iter()
                .map(|d| filter_noise(d, params.noise_cutoff, &params.noise_dims))
                .collect::<Result<_>>()?;
            let landmark_set = if landmarks.is_empty() {
                filtered.clone()
            } else {
                load_diagrams(&landmarks)?
                    .iter()
                    .map(|d| filter_noise(d, params.noise_cutoff, &params.noise_dims))
                    .collect::<Result<_>>()?
            };
            let truncation = truncation_value(&landmark_set);
            let queries = truncate_all(&filtered, truncation);
            let ids: Vec<String> = queries.iter().map(|d| d.id.clone()).collect();
            let (rows, landmark_ids) = match params.method {
                Method::Bs => {
                    let lm = truncate_all(&landmark_set, truncation);
                    if landmarks.is_empty() {
                        let dm = distance_matrix(&lm, &params.weights, params.distance_mode);
                        write_text(&out.with_extension("matrix.csv"), &dm.to_csv())?;
                        write_json(&out.with_extension("matrix.json"), &dm)?;
                    }
                    let rows = queries
                        .iter()
                        .map(|q| bs_vectorize(q, &lm, &params.weights, params.distance_mode).map(|v| v.values))
                        .collect::<Result<Vec<_>>>()?;
                    (rows, lm.iter().map(|d| d.id.clone()).collect())
                }
                m => (stats_matrix(&queries, m)?, Vec::new()),
            };
            write_text(&out, &features_to_csv(&ids, &rows))?;
            let manifest = FeatureManifest {
                method: params.method,
                weights: params.weights,
                distance_mode: params.distance_mode,
                truncation,
                landmark_ids,
            };
            write_json(&out.with_extension("manifest.json"), &manifest)?;
        }
        Command::Train { inputs, labels, model, out } => {
            let diagrams = load_diagrams(&inputs)?;
            let y = io::labels_for(&diagrams, &read_labels(&labels)?)?;
            let fitted = fit_pipeline(&diagrams, &y, &model.params()?)?;
            save_pipeline(&out, &fitted)?;
            println!(
                "trained {} model on {} diagrams ({} solver iterations)",
                model.method,
                diagrams.len(),
                fitted.model.solver_report.iterations
            );
        }
        Command::Predict { inputs, model, out } => {
            let fitted = load_pipeline(&model)?;
            let diagrams = load_diagrams(&inputs)?;
            let preds = fitted.predict(&diagrams)?;
            let ids: Vec<String> = diagrams.iter().map(|d| d.id.clone()).collect();
            let csv = predictions_to_csv(&ids, &preds);
            match out {
                Some(path) => write_text(&path, &csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Eval {
            inputs,
            labels,
            model,
            methods,
            train_fractions,
            repeats,
            seed,
            no_stratify,
            out,
        } => {
            let diagrams = load_diagrams(&inputs)?;
            let y = io::labels_for(&diagrams, &read_labels(&labels)?)?;
            let params = model.params()?;
            let methods = match methods {
                Some(list) => list.split(',').map(|s| s.trim().parse()).collect::<Result<Vec<Method>>>()?,
                None => vec![params.method],
            };
            let cfg = EvalConfig {
                methods,
                train_fractions: parse_fractions(&train_fractions)?,
                repeats,
                seed,
                penalty: params.penalty,
                tol: params.tol,
                weights: params.weights,
                distance_mode: params.distance_mode,
                stratified: !no_stratify,
                noise_cutoff: params.noise_cutoff,
                noise_dims: params.noise_dims,
                standardize: params.standardize,
            };
            let report = evaluate(&diagrams, &y, &cfg)?;
            write_json(&out.join("report.json"), &report)?;
            let table = report.render_table();
            write_text(&out.join("table.txt"), &table)?;
            let misclass: Vec<_> = report.cells.iter().flat_map(|c| c.repeats.iter().map(misclass_report)).collect();
            write_json(&out.join("misclassified.json"), &misclass)?;
            print!("{table}");
            eprintln!("evaluated in {:.2}s", report.wall_clock_secs);
        }
        Command::PredictFunction {
            known,
            labels,
            candidates,
            model,
            embedding,
            ph,
            out,
        } => {
            let pipeline = DiagramPipeline {
                embedding: embedding.config(),
                ph: ph.config(),
                ..Default::default()
            };
            let to_diagrams = |paths: &[PathBuf]| -> Result<Vec<PersistenceDiagram>> {
                collect_files(paths, &["json", "pdb", "ent", "xyz"])?
                    .par_iter()
                    .map(|p| pipeline.diagram_for(p))
                    .collect()
            };
            let known = to_diagrams(&known)?;
            let candidates = to_diagrams(&candidates)?;
            let y = io::labels_for(&known, &read_labels(&labels)?)?;
            let params = model.params()?;
            let result = predict_function(&known, &y, &candidates, &params)?;

            for d in known.iter().chain(&candidates) {
                write_json(&out.join("diagrams").join(format!("{}.json", d.id)), d)?;
            }
            let features = if candidates.is_empty() {
                Vec::new()
            } else {
                result.pipeline.features(&candidates)?
            };
            let ids: Vec<String> = candidates.iter().map(|d| d.id.clone()).collect();
            write_text(&out.join("candidate_features.csv"), &features_to_csv(&ids, &features))?;
            save_pipeline(&out.join("model"), &result.pipeline)?;
            write_json(&out.join("report.json"), &result)?;
            println!("{} candidates, {} in the margin band", result.candidates.len(), result.ranking.len());
            for id in &result.ranking {
                println!("  {id}");
            }
        }
        Command::Synth { per_class, points, seed, out } => {
            let cfg = SynthConfig {
                per_class,
                points,
                seed,
                ..Default::default()
            };
            let data = circles_vs_blobs(&cfg)?;
            for pc in &data.clouds {
                write_text(&out.join(format!("{}.xyz", pc.id)), &write_xyz(pc))?;
            }
            let ids: Vec<String> = data.clouds.iter().map(|c| c.id.clone()).collect();
            write_text(&out.join("labels.csv"), &io::labels_to_csv(&ids, &data.labels))?;
            write_json(&out.join("synth.json"), &cfg)?;
            println!("wrote {} clouds to {}", data.clouds.len(), out.display());
        }
    }
    Ok(())
}

fn save_pipeline(dir: &Path, fitted: &FittedPipeline) -> Result<()> {
    write_json(&dir.join("model.json"), &fitted.model)?;
    write_json(&dir.join("landmarks.json"), &fitted.landmarks)
}

fn load_pipeline(dir: &Path) -> Result<FittedPipeline> {
    let model: MarginModel = io::read_json(&dir.join("model.json"))?;
    let landmarks_path = dir.join("landmarks.json");
    let landmarks = if landmarks_path.exists() {
        io::read_json(&landmarks_path)?
    } else {
        Vec::new()
    };
    Ok(FittedPipeline { model, landmarks })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
