//! `ddgcl` command-line interface.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ddgcl_core::augment::make_views;
use ddgcl_core::centrality::{pagerank, DEFAULT_MAX_ITER, DEFAULT_TOL};
use ddgcl_core::graph::{generate_synthetic, load_dataset, save_dataset, Dataset, SyntheticParams};
use ddgcl_core::harness::{self, Metrics, Report, TrainConfig};
use ddgcl_core::seed::{self, tag};
use ddgcl_core::topology::{diagram_for, TopoVector};

#[derive(Parser)]
#[command(name = "ddgcl", version, about = "Contrastive graph classification with dual-domain encoders")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled two-class synthetic dataset.
    Generate {
        #[arg(long, default_value_t = 200)]
        n_graphs: usize,
        #[arg(long, default_value_t = 30)]
        n_nodes: usize,
        #[arg(long, default_value_t = 8)]
        d_f: usize,
        #[arg(long, default_value_t = 0.2)]
        class_gap: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the edge-perturbed and feature-masked view of every graph.
    Augment {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        edges_out: PathBuf,
        #[arg(long)]
        features_out: PathBuf,
    },
    /// Persistence summaries or full diagrams of every graph.
    Topo {
        #[arg(value_enum)]
        what: TopoWhat,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate a configuration, optionally fitting and saving a final model.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also fit on the whole dataset and save the model here.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Score a dataset with a saved model.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One cross-validation per grid point.
    Sweep {
        #[arg(value_enum)]
        kind: SweepKind,
        #[command(flatten)]
        common: Common,
        /// Comma-separated grid values (lambda1 for `lambdas`).
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
        /// lambda2 grid for `lambdas`; defaults to `--grid`.
        #[arg(long, value_delimiter = ',')]
        grid2: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The eight-row component ablation.
    Ablate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-node attention-readout weights from a saved model.
    RoiScores {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "in")]
    input: PathBuf,
}

impl Common {
    fn load(&self) -> Result<(TrainConfig, Dataset)> {
        let cfg = match &self.config {
            Some(p) => TrainConfig::from_toml(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
                .with_context(|| format!("parsing {}", p.display()))?,
            None => TrainConfig::default(),
        };
        let ds = load_dataset(&self.input).with_context(|| format!("loading {}", self.input.display()))?;
        Ok((cfg, ds))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TopoWhat {
    Stats,
    Diagrams,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Sparsity,
    Layers,
    Lambdas,
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit(report: &Report, out: Option<&Path>) -> Result<()> {
    if let Some(p) = out {
        fs::write(p, report.to_jsonl()).with_context(|| format!("writing {}", p.display()))?;
    }
    print!("{}", report.to_table());
    Ok(())
}

fn jsonl(records: impl IntoIterator<Item = serde_json::Value>) -> String {
    records.into_iter().map(|r| format!("{r}\n")).collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { n_graphs, n_nodes, d_f, class_gap, seed, out } => {
            let ds = generate_synthetic(SyntheticParams { n_graphs, n_nodes, d_f, class_gap, seed })?;
            save_dataset(&ds, &out)?;
            eprintln!("wrote {} graphs to {}", ds.len(), out.display());
        }
        Command::Augment { common, edges_out, features_out } => {
            let (cfg, ds) = common.load()?;
            let mut edges = Vec::with_capacity(ds.len());
            let mut feats = Vec::with_capacity(ds.len());
            for (i, g) in ds.graphs().iter().enumerate() {
                let phi = pagerank(g, cfg.damping, DEFAULT_TOL, DEFAULT_MAX_ITER);
                let aug = cfg.augment_config(seed::derive(cfg.seed, &[tag::GRAPH, i as u64]));
                let pair = make_views(g, &phi, &aug)?;
                edges.push(pair.view_e);
                feats.push(pair.view_f);
            }
            save_dataset(&Dataset::new(format!("{}-edges", ds.name), ds.seed, ds.d_f(), edges)?, &edges_out)?;
            save_dataset(&Dataset::new(format!("{}-features", ds.name), ds.seed, ds.d_f(), feats)?, &features_out)?;
        }
        Command::Topo { what, common, out } => {
            let (cfg, ds) = common.load()?;
            let records = ds.graphs().iter().enumerate().map(|(i, g)| {
                let d = diagram_for(g, &pagerank(g, cfg.damping, DEFAULT_TOL, DEFAULT_MAX_ITER));
                match what {
                    TopoWhat::Stats => {
                        let v = TopoVector::from_diagram(&d, cfg.topo_k);
                        json!({
                            "graph": i,
                            "finite_pairs": d.pairs.len(),
                            "essential": d.essential.len(),
                            "cycle_rank": d.cycle_rank,
                            "total_persistence": v.total_persistence(),
                            "max_persistence": v.values.first().copied().unwrap_or(0.0),
                        })
                    }
                    TopoWhat::Diagrams => json!({ "graph": i, "diagram": d }),
                }
            });
            write_or_print(out.as_deref(), &jsonl(records))?;
        }
        Command::Train { common, out, checkpoint } => {
            let (cfg, ds) = common.load()?;
            let cv = harness::cross_validate(&ds, &cfg)?;
            emit(&Report::from_cv("cv", &cv), out.as_deref())?;
            if let Some(path) = checkpoint {
                let fit = harness::fit_full(&ds, &cfg)?;
                harness::save_model(&path, &cfg, &fit)?;
                eprintln!("saved model (epoch {}) to {}", fit.best_epoch, path.display());
            }
        }
        Command::Eval { checkpoint, input, out } => {
            let (_, params) = harness::load_model(&checkpoint)?;
            let ds = load_dataset(&input)?;
            let probs = harness::predict_dataset(&params, &ds)?;
            let mut records: Vec<serde_json::Value> =
                probs.iter().enumerate().map(|(i, p)| json!({ "graph": i, "prob": p })).collect();
            if ds.is_labeled() {
                let labels: Vec<u8> = ds.labels().into_iter().map(|l| l.expect("labeled")).collect();
                let m = Metrics::evaluate(&probs, &labels)?;
                eprintln!(
                    "ACC {:.4}  AUC {:.4}  SEN {:.4}  SPE {:.4}",
                    m.acc, m.auc, m.sen, m.spe
                );
                records.push(json!({ "metrics": m }));
            }
            write_or_print(out.as_deref(), &jsonl(records))?;
        }
        Command::Sweep { kind, common, grid, grid2, out } => {
            let (cfg, ds) = common.load()?;
            let report = match kind {
                SweepKind::Sparsity => harness::sweep_sparsity(&ds, &grid, &cfg)?,
                SweepKind::Layers => {
                    let layers = grid
                        .iter()
                        .map(|&x| if x >= 1.0 && x.fract() == 0.0 { Ok(x as usize) } else { bail!("layer count {x} is not a positive integer") })
                        .collect::<Result<Vec<_>>>()?;
                    harness::sweep_layers(&ds, &layers, &cfg)?
                }
                SweepKind::Lambdas => {
                    let g2 = if grid2.is_empty() { grid.clone() } else { grid2 };
                    harness::sweep_lambdas(&ds, &grid, &g2, &cfg)?
                }
            };
            emit(&report, out.as_deref())?;
        }
        Command::Ablate { common, out } => {
            let (cfg, ds) = common.load()?;
            emit(&harness::ablate(&ds, &cfg)?, out.as_deref())?;
        }
        Command::RoiScores { checkpoint, input, out } => {
            let (_, params) = harness::load_model(&checkpoint)?;
            let ds = load_dataset(&input)?;
            let scores = harness::roi_scores(&params, &ds)?;
            let records = scores.into_iter().enumerate().map(|(i, s)| json!({ "graph": i, "scores": s }));
            fs::write(&out, jsonl(records)).with_context(|| format!("writing {}", out.display()))?;
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker threads")?;
    }
    run(cli)
}
