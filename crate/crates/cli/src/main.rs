mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fastumap_core::eval::{
    ablation_grid, benchmark_suite, equivalence_check, r_sweep, write_coordinates_csv, write_json,
    write_records_csv, DatasetEntry, SuiteOptions,
};
use fastumap_core::synthetic::gaussian_blobs;
use fastumap_core::{load_dataset, preprocess, Prepared, RawDataset};
use serde::{Deserialize, Serialize};
use serde_json::json;

use config::{config_err, ConfigError, RunArgs, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "fastumap", version, about = "Landmark-based UMAP embeddings and benchmarks")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "FASTUMAP_THREADS")]
    threads: Option<usize>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Embed one dataset; writes coordinates.csv and meta.json.
    Embed(RunArgs),
    /// Run the benchmark suite over a manifest or a list of inputs.
    Bench(BenchArgs),
    /// Landmark-ratio sweep on one dataset.
    Sweep(SweepArgs),
    /// Initialization x force-mode grid with an accuracy-per-epoch trace.
    Ablate(AblateArgs),
    /// Compare the all-landmark graph with a full kNN reference graph.
    CheckEquivalence(EquivalenceArgs),
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    run: RunArgs,
    /// TOML manifest with [[dataset]] entries (name, path, label_col).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Pipeline repetitions per dataset; stage times are medians.
    #[arg(long, default_value_t = 3)]
    repeats: usize,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated landmark ratios, strictly increasing.
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1, 0.2, 0.3, 0.5, 0.7])]
    rs: Vec<f64>,
}

#[derive(Args, Debug)]
struct AblateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Fractions of the epoch budget at which the trace is sampled.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0])]
    trace: Vec<f64>,
}

#[derive(Args, Debug)]
struct EquivalenceArgs {
    /// Dataset to check; synthetic blobs are used when absent.
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[arg(long)]
    label_col: Option<String>,
    #[arg(long, default_value_t = 300)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    dim: usize,
    #[arg(long, short = 'k', default_value_t = 10)]
    n_neighbors: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, short, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    #[serde(default)]
    dataset: Vec<DatasetEntry>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let config = e.chain().any(|c| {
        c.downcast_ref::<ConfigError>().is_some()
            || matches!(c.downcast_ref::<fastumap_core::Error>(), Some(fastumap_core::Error::Config(_)))
    });
    if config {
        2
    } else {
        1
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(config_err("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Embed(a) => cmd_embed(&a.resolve()?),
        Command::Bench(a) => cmd_bench(&a),
        Command::Sweep(a) => cmd_sweep(&a.run.resolve()?, &a.rs),
        Command::Ablate(a) => cmd_ablate(&a.run.resolve()?, &a.trace),
        Command::CheckEquivalence(a) => cmd_check_equivalence(&a),
    }
}

fn load(cfg: &RunConfig) -> Result<(RawDataset, Prepared)> {
    let path = cfg
        .dataset
        .path
        .as_deref()
        .ok_or_else(|| config_err("no input dataset (use --input or dataset.path in the config file)"))?;
    let raw = load_dataset(path, cfg.dataset.format(path), cfg.dataset.label_col.as_deref())
        .with_context(|| format!("loading {}", path.display()))?;
    let prepared = preprocess(&raw, &cfg.preprocess)?;
    Ok((raw, prepared))
}

fn labels_of(raw: &RawDataset) -> Result<&[usize]> {
    raw.labels
        .as_deref()
        .ok_or_else(|| config_err(format!("{} has no labels; pass --label-col", raw.name)))
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    Ok(&cfg.output_dir)
}

#[derive(Serialize)]
struct DatasetMeta<'a> {
    name: &'a str,
    n: usize,
    original_dim: usize,
    dim: usize,
    pca_applied: bool,
}

fn dataset_meta<'a>(raw: &'a RawDataset, p: &Prepared) -> DatasetMeta<'a> {
    DatasetMeta { name: &raw.name, n: p.n(), original_dim: p.original_dim, dim: p.dim(), pca_applied: p.pca_applied }
}

/// Classifier settings behind every reported accuracy.
fn knn_meta() -> serde_json::Value {
    json!({
        "k": 5,
        "folds": 5,
        "split": "stratified, seeded with the run seed",
        "vote": "unweighted majority; ties to the smaller summed distance, then the smaller label",
        "metric": "euclidean in the embedding",
    })
}

fn cmd_embed(cfg: &RunConfig) -> Result<()> {
    let (raw, prepared) = load(cfg)?;
    let out = fastumap_core::run_fastumap(&prepared.data, &cfg.pipeline)?;
    let dir = out_dir(cfg)?;
    write_coordinates_csv(&dir.join("coordinates.csv"), &out.embedding.coords)?;
    let meta = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": "embed",
        "seed": cfg.pipeline.seed,
        "config": cfg,
        "dataset": dataset_meta(&raw, &prepared),
        "landmarks": out.m(),
        "epochs": out.embedding.epochs,
        "kernels": out.kernels,
        "eigenvalues": out.basis.as_ref().map(|b| b.eigenvalues),
        "timings": out.timings,
        "role_updates": out.role_updates,
    });
    write_json(&dir.join("meta.json"), &meta)?;
    println!("wrote {} points to {}", out.embedding.coords.len(), dir.join("coordinates.csv").display());
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let cfg = a.run.resolve()?;
    if a.repeats == 0 {
        return Err(config_err("--repeats must be positive"));
    }
    let mut entries = Vec::new();
    if let Some(m) = &a.manifest {
        let text = std::fs::read_to_string(m).with_context(|| format!("reading manifest {}", m.display()))?;
        let manifest: Manifest = toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", m.display())))?;
        let base = m.parent().unwrap_or(Path::new("."));
        entries.extend(manifest.dataset.into_iter().map(|mut d| {
            if d.path.is_relative() {
                d.path = base.join(&d.path);
            }
            d
        }));
    }
    if let Some(p) = &cfg.dataset.path {
        let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        entries.push(DatasetEntry { name, path: p.clone(), label_col: cfg.dataset.label_col.clone() });
    }
    let opts = SuiteOptions {
        config: cfg.pipeline.clone(),
        preprocess: cfg.preprocess.clone(),
        repeats: a.repeats,
        ..SuiteOptions::default()
    };
    let rows = benchmark_suite(&entries, &opts)?;
    let dir = out_dir(&cfg)?;
    write_records_csv(&dir.join("results.csv"), &rows)?;
    write_json(
        &dir.join("results.json"),
        &json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": "bench",
            "knn_classifier": knn_meta(),
            "seed": cfg.pipeline.seed,
            "config": cfg,
            "repeats": a.repeats,
            "rows": rows,
        }),
    )?;
    println!("wrote {} result rows to {}", rows.len(), dir.join("results.csv").display());
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, rs: &[f64]) -> Result<()> {
    let (raw, prepared) = load(cfg)?;
    let sweep = r_sweep(&prepared.data, labels_of(&raw)?, rs, &cfg.pipeline)?;
    let dir = out_dir(cfg)?;
    write_records_csv(&dir.join("sweep.csv"), &sweep.points)?;
    write_json(
        &dir.join("sweep.json"),
        &json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": "sweep",
            "knn_classifier": knn_meta(),
            "seed": cfg.pipeline.seed,
            "config": cfg,
            "dataset": dataset_meta(&raw, &prepared),
            "result": sweep,
        }),
    )?;
    println!("wrote {} sweep points to {}", sweep.points.len(), dir.join("sweep.csv").display());
    Ok(())
}

fn cmd_ablate(cfg: &RunConfig, trace: &[f64]) -> Result<()> {
    let (raw, prepared) = load(cfg)?;
    let report = ablation_grid(&prepared.data, labels_of(&raw)?, &cfg.pipeline, trace)?;
    let dir = out_dir(cfg)?;
    write_records_csv(&dir.join("ablation.csv"), &report.cells)?;
    write_records_csv(&dir.join("ablation_trace.csv"), &report.trace)?;
    write_json(
        &dir.join("ablation.json"),
        &json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": "ablate",
            "knn_classifier": knn_meta(),
            "seed": cfg.pipeline.seed,
            "config": cfg,
            "dataset": dataset_meta(&raw, &prepared),
            "result": report,
        }),
    )?;
    println!("wrote ablation grid to {}", dir.join("ablation.csv").display());
    Ok(())
}

fn cmd_check_equivalence(a: &EquivalenceArgs) -> Result<()> {
    let x = match &a.input {
        Some(p) => {
            let raw = load_dataset(p, fastumap_core::DataFormat::from_path(p), a.label_col.as_deref())?;
            preprocess(&raw, &Default::default())?.data
        }
        None => gaussian_blobs(a.n, a.dim, 5, 10.0, a.seed)?.0,
    };
    let report = equivalence_check(&x, a.n_neighbors, a.seed)?;
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    write_records_csv(&a.out_dir.join("equivalence.csv"), std::slice::from_ref(&report))?;
    write_json(
        &a.out_dir.join("equivalence.json"),
        &json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": "check-equivalence",
            "seed": a.seed,
            "input": a.input,
            "synthetic": a.input.is_none().then(|| json!({"n": a.n, "dim": a.dim, "centers": 5})),
            "report": report,
        }),
    )?;
    println!(
        "n={} k={} edge symmetric difference={} max membership delta={:.3e}",
        report.n, report.k, report.directed_symmetric_difference, report.max_membership_delta
    );
    if !report.is_equivalent(1e-6) {
        anyhow::bail!("all-landmark graph differs from the full kNN reference");
    }
    Ok(())
}
