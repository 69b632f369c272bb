//! chipletrank command-line interface.
//!
//! Subcommands compose the library pipeline: sweep -> label -> pairs ->
//! train -> rank/eval/plot, plus the importance-times-area baseline. Every
//! output artifact gets a `<name>.manifest.json` provenance record.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use chipletrank::baseline::{baseline_order, Importance};
use chipletrank::dataset::{
    assemble_training_set, pairs_from_csv, pairs_to_csv, sample_pairs, SamplingConfig,
};
use chipletrank::error::{Error, Result};
use chipletrank::manifest::RunManifest;
use chipletrank::model::{load_model, model_to_json, train, Pooling, TrainConfig};
use chipletrank::pareto::{assign_levels, LabeledScatter};
use chipletrank::placer::{
    sweep, OrderSource, PlacerConfig, ScatterSet, ThermalConfig, DEFAULT_PERMUTATION_CAP,
};
use chipletrank::plot::emit_scatter_plot;
use chipletrank::rank::{eval_compare, rank_orders, EvalInput};
use chipletrank::suite::{load_suite, LoadedEntry, Split};
use chipletrank::system::{parse_system, PlacementOrder};

#[derive(Parser)]
#[command(
    name = "chipletrank",
    version,
    about = "Placement-order sweeping, Pareto labeling, and learning-to-rank for chiplet systems"
)]
struct Cli {
    /// RNG seed for sampling, training, and order generation.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Output path for single-artifact commands.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sweep and rank; 0 means all cores.
    #[arg(long, global = true, default_value_t = 0)]
    parallel: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate placement orders of one system or a whole suite.
    Sweep(SweepArgs),
    /// Label a sweep CSV with Pareto slack and correlation levels.
    Label(LabelArgs),
    /// Sample pairwise training comparisons from labeled sweeps.
    Pairs(PairsArgs),
    /// Train the graph ranking model from a pairs file.
    Train(TrainArgs),
    /// Score and rank candidate orders of a system.
    Rank(RankArgs),
    /// Print the descending importance-times-area baseline order.
    Baseline(BaselineArgs),
    /// Compare baseline and ranked orders over a labeled suite.
    Eval(EvalArgs),
    /// Render a labeled sweep as an SVG scatter plot.
    Plot(PlotArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// System JSON file (single mode).
    #[arg(long, conflicts_with = "suite")]
    system: Option<PathBuf>,
    /// Suite JSON file; sweeps every member into --out-dir.
    #[arg(long)]
    suite: Option<PathBuf>,
    /// Output directory for suite mode, also used for labeled files later.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Candidate orders: "all" or "sampled:N".
    #[arg(long, default_value = "all")]
    orders: String,
    /// Placement grid cells per side.
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Margin cells between footprints.
    #[arg(long, default_value_t = 0)]
    spacing: usize,
    /// Thermal samples per side.
    #[arg(long, default_value_t = 32)]
    thermal_grid: usize,
    /// Celsius per watt coupling.
    #[arg(long, default_value_t = 40.0)]
    kappa: f64,
    /// Thermal kernel width offset in mm.
    #[arg(long, default_value_t = 1.0)]
    sigma0: f64,
    /// Max chiplet count for all-permutations enumeration.
    #[arg(long, default_value_t = DEFAULT_PERMUTATION_CAP)]
    cap: usize,
}

#[derive(Args)]
struct LabelArgs {
    /// Sweep CSV to label (single mode; pairs with --out).
    #[arg(long, conflicts_with = "suite")]
    input: Option<PathBuf>,
    /// Suite JSON; labels <sweep-dir>/<id>.csv into <sweep-dir>/<id>.labeled.csv.
    #[arg(long)]
    suite: Option<PathBuf>,
    /// Directory holding the sweep CSVs.
    #[arg(long)]
    sweep_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PairsArgs {
    /// Suite JSON file.
    #[arg(long)]
    suite: PathBuf,
    /// Directory holding <id>.labeled.csv files.
    #[arg(long)]
    sweep_dir: PathBuf,
    /// Which split to draw pairs from: train, test, or all.
    #[arg(long, default_value = "train")]
    split: String,
    /// Max comparisons per point.
    #[arg(long, default_value_t = 10)]
    k: usize,
}

#[derive(Args)]
struct TrainArgs {
    /// Suite JSON file naming the systems referenced by the pairs file.
    #[arg(long)]
    suite: PathBuf,
    /// Pairs CSV produced by `pairs`.
    #[arg(long)]
    pairs: PathBuf,
    /// Pooling mode: mean, sum, or max.
    #[arg(long, default_value = "mean")]
    pooling: String,
    #[arg(long, default_value_t = 1e-4)]
    lr: f64,
    #[arg(long, default_value_t = 64)]
    batch: usize,
    #[arg(long, default_value_t = 3000)]
    iterations: usize,
}

#[derive(Args)]
struct RankArgs {
    /// System JSON file.
    #[arg(long)]
    system: PathBuf,
    /// Trained model checkpoint.
    #[arg(long)]
    model: PathBuf,
    /// Candidate orders: "all" or "sampled:N".
    #[arg(long, default_value = "all")]
    candidates: String,
    /// How many top orders to report.
    #[arg(long, default_value_t = 5)]
    top: usize,
    /// Max chiplet count for all-permutations enumeration.
    #[arg(long, default_value_t = DEFAULT_PERMUTATION_CAP)]
    cap: usize,
}

#[derive(Args)]
struct BaselineArgs {
    /// System JSON file.
    #[arg(long)]
    system: PathBuf,
    /// Importance measure: pagerank or degree.
    #[arg(long, default_value = "pagerank")]
    importance: String,
}

#[derive(Args)]
struct EvalArgs {
    /// Suite JSON file.
    #[arg(long)]
    suite: PathBuf,
    /// Directory holding <id>.labeled.csv files.
    #[arg(long)]
    sweep_dir: PathBuf,
    /// Trained model checkpoint.
    #[arg(long)]
    model: PathBuf,
    /// Max chiplet count for all-permutations enumeration.
    #[arg(long, default_value_t = DEFAULT_PERMUTATION_CAP)]
    cap: usize,
}

#[derive(Args)]
struct PlotArgs {
    /// Labeled sweep CSV.
    #[arg(long)]
    labeled: PathBuf,
    /// Orders to highlight, dash-separated (repeatable).
    #[arg(long)]
    highlight: Vec<String>,
    /// Plot title.
    #[arg(long, default_value = "placement-order sweep")]
    title: String,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                std::process::exit(0);
            }
            let line = err
                .render()
                .to_string()
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("error: invalid usage")
                .to_string();
            eprintln!("{line}");
            std::process::exit(1);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn parse_orders_flag(text: &str, seed: u64) -> Result<OrderSource> {
    if text == "all" {
        return Ok(OrderSource::All);
    }
    if let Some(rest) = text.strip_prefix("sampled:") {
        let max: usize = rest
            .parse()
            .map_err(|_| Error::Usage(format!("bad sample count in {text:?}")))?;
        if max == 0 {
            return Err(Error::Usage("sample count must be >= 1".into()));
        }
        return Ok(OrderSource::Sampled { max, seed });
    }
    Err(Error::Usage(format!(
        "orders must be \"all\" or \"sampled:N\", got {text:?}"
    )))
}

fn parse_split_flag(text: &str) -> Result<Option<Split>> {
    match text {
        "train" => Ok(Some(Split::Train)),
        "test" => Ok(Some(Split::Test)),
        "all" => Ok(None),
        other => Err(Error::Usage(format!("split must be train, test, or all, got {other:?}"))),
    }
}

fn write_artifact(path: &Path, body: &str, manifest: &RunManifest) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
    }
    std::fs::write(path, body).map_err(|e| Error::io(path.display().to_string(), e))?;
    manifest.write_beside(path)
}

fn required_out(out: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    out.clone()
        .ok_or_else(|| Error::Usage(format!("--out is required for {what}")))
}

fn labeled_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.labeled.csv"))
}

fn load_labeled(dir: &Path, id: &str) -> Result<LabeledScatter> {
    let path = labeled_path(dir, id);
    let text =
        std::fs::read_to_string(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
    LabeledScatter::from_csv(&text, &path.display().to_string())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(ref args) => cmd_sweep(&cli, args),
        Command::Label(ref args) => cmd_label(&cli, args),
        Command::Pairs(ref args) => cmd_pairs(&cli, args),
        Command::Train(ref args) => cmd_train(&cli, args),
        Command::Rank(ref args) => cmd_rank(&cli, args),
        Command::Baseline(ref args) => cmd_baseline(&cli, args),
        Command::Eval(ref args) => cmd_eval(&cli, args),
        Command::Plot(ref args) => cmd_plot(&cli, args),
    }
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> Result<()> {
    let placer_cfg = PlacerConfig {
        grid: args.grid,
        spacing: args.spacing,
    };
    let thermal_cfg = ThermalConfig {
        grid: args.thermal_grid,
        kappa: args.kappa,
        sigma0: args.sigma0,
    };
    let source = parse_orders_flag(&args.orders, cli.seed)?;
    let config = serde_json::json!({
        "orders": args.orders,
        "grid": args.grid,
        "spacing": args.spacing,
        "thermal_grid": args.thermal_grid,
        "kappa": args.kappa,
        "sigma0": args.sigma0,
        "cap": args.cap,
        "parallel": cli.parallel,
    });

    let mut jobs: Vec<(String, PathBuf, PathBuf)> = Vec::new();
    if let Some(system_path) = &args.system {
        let out = required_out(&cli.out, "sweep --system")?;
        jobs.push(("system".into(), system_path.clone(), out));
    } else if let Some(suite_path) = &args.suite {
        let out_dir = args
            .out_dir
            .clone()
            .ok_or_else(|| Error::Usage("--out-dir is required with --suite".into()))?;
        for entry in load_suite(suite_path)? {
            jobs.push((
                entry.id.clone(),
                entry.path.clone(),
                out_dir.join(format!("{}.csv", entry.id)),
            ));
        }
    } else {
        return Err(Error::Usage("sweep needs --system or --suite".into()));
    }

    for (id, system_path, out_path) in jobs {
        let system = parse_system(&system_path)?;
        let set = sweep(&system, &source, &placer_cfg, &thermal_cfg, cli.parallel, args.cap)?;
        let manifest = RunManifest::new(command_line(), &config)
            .seed("orders", cli.seed)
            .input(&system_path)?;
        write_artifact(&out_path, &set.to_csv(), &manifest)?;
        println!("{id}: {} orders -> {}", set.points.len(), out_path.display());
    }
    Ok(())
}

fn label_one(input: &Path, output: &Path, config: &serde_json::Value) -> Result<()> {
    let text =
        std::fs::read_to_string(input).map_err(|e| Error::io(input.display().to_string(), e))?;
    let set = ScatterSet::from_csv(&text, &input.display().to_string())?;
    let labeled = assign_levels(set)?;
    if labeled.degenerate_spread {
        eprintln!(
            "warning: {} has a degenerate corner spread; all slacks forced to 0",
            input.display()
        );
    }
    let manifest = RunManifest::new(command_line(), config).input(input)?;
    write_artifact(output, &labeled.to_csv(), &manifest)?;
    println!(
        "labeled {} points -> {}",
        labeled.points.points.len(),
        output.display()
    );
    Ok(())
}

fn cmd_label(cli: &Cli, args: &LabelArgs) -> Result<()> {
    let config = serde_json::json!({"mode": "label"});
    if let Some(input) = &args.input {
        let out = required_out(&cli.out, "label --input")?;
        return label_one(input, &out, &config);
    }
    let suite_path = args
        .suite
        .as_ref()
        .ok_or_else(|| Error::Usage("label needs --input or --suite".into()))?;
    let sweep_dir = args
        .sweep_dir
        .as_ref()
        .ok_or_else(|| Error::Usage("--sweep-dir is required with --suite".into()))?;
    for entry in load_suite(suite_path)? {
        let input = sweep_dir.join(format!("{}.csv", entry.id));
        label_one(&input, &labeled_path(sweep_dir, &entry.id), &config)?;
    }
    Ok(())
}

fn cmd_pairs(cli: &Cli, args: &PairsArgs) -> Result<()> {
    let split = parse_split_flag(&args.split)?;
    let out = required_out(&cli.out, "pairs")?;
    let entries = load_suite(&args.suite)?;
    let selected: Vec<&LoadedEntry> = entries
        .iter()
        .filter(|e| split.map_or(true, |s| e.split == s))
        .collect();
    if selected.is_empty() {
        return Err(Error::Usage(format!("no systems in split {:?}", args.split)));
    }
    let mut labeled = Vec::with_capacity(selected.len());
    for entry in &selected {
        labeled.push((entry.id.clone(), load_labeled(&args.sweep_dir, &entry.id)?));
    }
    let borrowed: Vec<(String, &LabeledScatter)> =
        labeled.iter().map(|(id, l)| (id.clone(), l)).collect();
    let pairs = sample_pairs(
        &borrowed,
        &SamplingConfig {
            k: args.k,
            seed: cli.seed,
        },
    )?;
    let config = serde_json::json!({"k": args.k, "split": args.split});
    let mut manifest = RunManifest::new(command_line(), &config).seed("pairs", cli.seed);
    for entry in &selected {
        manifest = manifest.input(labeled_path(&args.sweep_dir, &entry.id))?;
    }
    write_artifact(&out, &pairs_to_csv(&pairs), &manifest)?;
    println!("{} pairs -> {}", pairs.len(), out.display());
    Ok(())
}

fn cmd_train(cli: &Cli, args: &TrainArgs) -> Result<()> {
    let out = required_out(&cli.out, "train")?;
    let pooling: Pooling = args.pooling.parse()?;
    let text = std::fs::read_to_string(&args.pairs)
        .map_err(|e| Error::io(args.pairs.display().to_string(), e))?;
    let records = pairs_from_csv(&text, &args.pairs.display().to_string())?;
    let systems: HashMap<String, _> = load_suite(&args.suite)?
        .into_iter()
        .map(|e| (e.id, e.system))
        .collect();
    let (graphs, pairs) = assemble_training_set(&records, &systems)?;
    let config = TrainConfig {
        lr: args.lr,
        batch: args.batch,
        iterations: args.iterations,
        seed: cli.seed,
        ..TrainConfig::default()
    };
    let model = train(&graphs, &pairs, pooling, &config)?;
    let final_loss = model.meta.loss_history.last().copied().unwrap_or(f64::NAN);
    let manifest_cfg = serde_json::json!({
        "pooling": args.pooling,
        "lr": args.lr,
        "batch": args.batch,
        "iterations": args.iterations,
    });
    let manifest = RunManifest::new(command_line(), &manifest_cfg)
        .seed("train", cli.seed)
        .input(&args.pairs)?;
    write_artifact(&out, &model_to_json(&model), &manifest)?;
    println!(
        "trained on {} pairs over {} graphs, final loss {:.4} -> {}",
        pairs.len(),
        graphs.len(),
        final_loss,
        out.display()
    );
    Ok(())
}

fn cmd_rank(cli: &Cli, args: &RankArgs) -> Result<()> {
    let system = parse_system(&args.system)?;
    let model = load_model(&args.model)?;
    let source = parse_orders_flag(&args.candidates, cli.seed)?;
    let system_id = args
        .system
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "system".into());
    let ranked = rank_orders(
        &system,
        &system_id,
        &model,
        &source,
        args.top,
        cli.parallel,
        args.cap,
    )?;
    let mut body = String::from("order,score\n");
    for (order, score) in &ranked {
        body.push_str(&format!("{order},{score:.9}\n"));
        println!("{order}\t{score:.9}");
    }
    if let Some(out) = &cli.out {
        let config = serde_json::json!({
            "candidates": args.candidates,
            "top": args.top,
            "cap": args.cap,
        });
        let manifest = RunManifest::new(command_line(), &config)
            .seed("candidates", cli.seed)
            .input(&args.system)?
            .input(&args.model)?;
        write_artifact(out, &body, &manifest)?;
    }
    Ok(())
}

fn cmd_baseline(cli: &Cli, args: &BaselineArgs) -> Result<()> {
    let system = parse_system(&args.system)?;
    let importance: Importance = args.importance.parse()?;
    let order = baseline_order(&system, importance);
    println!("{order}");
    if let Some(out) = &cli.out {
        let config = serde_json::json!({"importance": args.importance});
        let manifest = RunManifest::new(command_line(), &config).input(&args.system)?;
        write_artifact(out, &format!("{order}\n"), &manifest)?;
    }
    Ok(())
}

fn cmd_eval(cli: &Cli, args: &EvalArgs) -> Result<()> {
    let out = required_out(&cli.out, "eval")?;
    let model = load_model(&args.model)?;
    let entries = load_suite(&args.suite)?;
    let mut inputs = Vec::with_capacity(entries.len());
    for entry in entries {
        let labeled = load_labeled(&args.sweep_dir, &entry.id)?;
        inputs.push(EvalInput {
            id: entry.id,
            split: entry.split,
            system: entry.system,
            labeled,
        });
    }
    let report = eval_compare(&inputs, &model, cli.parallel, args.cap)?;
    print!("{}", report.render_text());
    let config = serde_json::json!({"cap": args.cap});
    let manifest = RunManifest::new(command_line(), &config).input(&args.model)?;
    write_artifact(&out, &report.to_json(), &manifest)?;
    println!("report -> {}", out.display());
    Ok(())
}

fn cmd_plot(cli: &Cli, args: &PlotArgs) -> Result<()> {
    let out = required_out(&cli.out, "plot")?;
    let text = std::fs::read_to_string(&args.labeled)
        .map_err(|e| Error::io(args.labeled.display().to_string(), e))?;
    let labeled = LabeledScatter::from_csv(&text, &args.labeled.display().to_string())?;
    let highlights = args
        .highlight
        .iter()
        .map(|h| PlacementOrder::parse(h))
        .collect::<Result<Vec<_>>>()?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
    }
    emit_scatter_plot(&labeled, &highlights, &args.title, &out)?;
    let config = serde_json::json!({"highlights": args.highlight, "title": args.title});
    let manifest = RunManifest::new(command_line(), &config).input(&args.labeled)?;
    manifest.write_beside(&out)?;
    println!(
        "plot -> {} (+ companion {})",
        out.display(),
        out.with_extension("csv").display()
    );
    Ok(())
}
