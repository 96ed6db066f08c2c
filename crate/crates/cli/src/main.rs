use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pawforest::bench::diagnostics::{collect, tables};
use pawforest::bench::report::{write_diagnostics, write_point_map, write_report};
use pawforest::bench::{evaluate, EvalConfig, Method};
use pawforest::data::{gen_synthetic, load_csv, save_csv, CsvOptions, Dataset, LabelColumn, SyntheticKind};
use pawforest::forest::{argmax, uniform_proba, ForestConfig, ForestModel};
use pawforest::paw::{
    estimate_weight_table_cv, estimate_weight_table_oob, predict_naive_votes, predict_weighted_votes, select_k,
    Indicators, OobView, PawConfig, WeightTable, WeightVariant, DEFAULT_K_CANDIDATES,
};

#[derive(Parser)]
#[command(name = "pawforest", version, about = "Random forests with path-pattern adaptive tree weighting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the repeated-split benchmark and write report.json plus tables
    Bench(BenchArgs),
    /// Fit a forest and its weight table on a whole CSV file
    Train(TrainArgs),
    /// Predict a CSV file with a trained model directory
    Predict(PredictArgs),
    /// Held-out pattern diagnostics tables and per-point maps
    Diagnose(DiagnoseArgs),
    /// Boundary mass and spread of a forest fitted on each dataset
    Indicators(IndicatorArgs),
    /// Generate one of the 2D geometries as CSV
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// CSV files or directories of CSV files
    #[arg(long = "data", num_args = 1.., required_unless_present = "synthetic")]
    data: Vec<PathBuf>,
    /// Label column name or 0-based index (default: last column)
    #[arg(long = "label-col")]
    label_col: Option<String>,
    /// Raw label value mapped to class 1
    #[arg(long = "positive-label")]
    positive_label: Option<String>,
    /// Add the four 2D geometries
    #[arg(long)]
    synthetic: bool,
    /// Rows per generated geometry
    #[arg(long = "synthetic-n", default_value_t = 400)]
    synthetic_n: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 300)]
    trees: usize,
    #[arg(long, default_value_t = 30)]
    repeats: usize,
    #[arg(long = "seed-base", default_value_t = 42)]
    seed_base: u64,
    /// Comma-separated: rf,paw,paw-amp,naive,wrf,kne,knu,paw-oob
    #[arg(long = "method", value_delimiter = ',', default_value = "rf,paw,paw-amp,naive,wrf,kne,knu")]
    methods: Vec<Method>,
    #[arg(long = "K-candidates", value_delimiter = ',', default_values_t = DEFAULT_K_CANDIDATES)]
    k_candidates: Vec<u32>,
    #[arg(long = "weight-variant", default_value = "cv")]
    weight_variant: WeightVariant,
    /// Trees per inner validation forest (default: --trees)
    #[arg(long = "inner-trees")]
    inner_trees: Option<usize>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long = "label-col")]
    label_col: Option<String>,
    #[arg(long = "positive-label")]
    positive_label: Option<String>,
    #[arg(long, default_value_t = 300)]
    trees: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long = "weight-variant", default_value = "cv")]
    weight_variant: WeightVariant,
    #[arg(long = "K-candidates", value_delimiter = ',', default_values_t = DEFAULT_K_CANDIDATES)]
    k_candidates: Vec<u32>,
    /// Model directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Model directory written by `train`
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long = "label-col")]
    label_col: Option<String>,
    #[arg(long = "positive-label")]
    positive_label: Option<String>,
    /// rf, paw, paw-amp or naive
    #[arg(long, default_value = "paw")]
    method: Method,
    /// Output CSV (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 300)]
    trees: usize,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "diagnostics")]
    out: PathBuf,
}

#[derive(Args)]
struct IndicatorArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 300)]
    trees: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output CSV (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// diagonal, moons, circles or overlap
    #[arg(long)]
    kind: SyntheticKind,
    #[arg(long, default_value_t = 400)]
    n: usize,
    /// Defaults to the geometry's own noise level
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn csv_options(label_col: &Option<String>, positive_label: &Option<String>) -> CsvOptions {
    CsvOptions {
        label_column: label_col
            .as_deref()
            .map(|s| s.parse::<LabelColumn>().unwrap_or_default())
            .unwrap_or_default(),
        positive_label: positive_label.clone(),
    }
}

fn csv_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .with_context(|| format!("reading {}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .collect();
        files.sort();
        Ok(files)
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

fn load_all(args: &DataArgs, seed: u64) -> Result<Vec<Dataset>> {
    let opts = csv_options(&args.label_col, &args.positive_label);
    let mut out = Vec::new();
    for p in &args.data {
        for f in csv_files(p)? {
            match load_csv(&f, &opts) {
                Ok(ds) => out.push(ds),
                Err(e) => eprintln!("skipping {}: {e}", f.display()),
            }
        }
    }
    if args.synthetic {
        for kind in SyntheticKind::ALL {
            out.push(gen_synthetic(kind, args.synthetic_n, kind.default_noise(), seed)?);
        }
    }
    if out.is_empty() {
        bail!("no datasets loaded");
    }
    Ok(out)
}

fn bench(args: BenchArgs) -> Result<()> {
    let datasets = load_all(&args.data, args.seed_base)?;
    let cfg = EvalConfig {
        repeats: args.repeats,
        n_trees: args.trees,
        base_seed: args.seed_base,
        k_candidates: args.k_candidates,
        inner_trees: args.inner_trees,
        weight_variant: args.weight_variant,
        ..EvalConfig::default()
    };
    let report = evaluate(&datasets, &args.methods, &cfg)?;
    for d in &report.datasets {
        let mut line = format!("{:<24}", d.dataset);
        for (m, mm) in &d.means {
            line.push_str(&format!(" {m}={:.4}", mm.accuracy));
        }
        println!("{line} MS={:.4}", d.ms);
    }
    for c in &report.comparisons {
        println!(
            "{:<8} mean dacc {:+.4}  W/T/L {}/{}/{}  p={}  min-regress {}  maj-regress {}",
            c.method.as_str(),
            c.mean_delta_accuracy,
            c.wtl.wins,
            c.wtl.ties,
            c.wtl.losses,
            c.wilcoxon.map_or("n/a".to_string(), |w| format!("{:.4}", w.p_value)),
            c.minority_regressions,
            c.majority_regressions,
        );
    }
    for f in &report.failures {
        eprintln!("failed: {} ({})", f.dataset, f.error);
    }
    let files = write_report(&report, &args.out)?;
    println!("wrote {} files to {}", files.len(), args.out.display());
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let ds = load_csv(&args.data, &csv_options(&args.label_col, &args.positive_label))?;
    let forest = ForestModel::fit(&ds, &ForestConfig::new(args.trees, args.seed))?;
    let view = OobView::new(&forest, &ds)?;
    let ind = Indicators::from_view(&view, ds.labels())?;
    let (table, records) = match args.weight_variant {
        WeightVariant::Cv => estimate_weight_table_cv(&ds, &PawConfig { n_trees: args.trees, ..PawConfig::default() }, args.seed)?,
        WeightVariant::Oob => estimate_weight_table_oob(&forest, &ds)?,
    };
    let sel = select_k(&records, &ind, &table, &args.k_candidates)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    fs::write(args.out.join("forest.json"), forest.to_json()?)?;
    fs::write(args.out.join("table.json"), table.to_json()?)?;
    fs::write(args.out.join("table_amp.json"), table.amplify(sel.alpha).to_json()?)?;
    fs::write(
        args.out.join("indicators.json"),
        serde_json::to_string_pretty(&serde_json::json!({ "indicators": ind, "selection": sel }))?,
    )?;
    println!(
        "trained {} trees on {} rows; M={:.4} S={:.4} K*={} alpha={:.4}; model in {}",
        forest.n_trees(),
        ds.n_samples(),
        ind.mass,
        ind.spread,
        sel.k_star,
        sel.alpha,
        args.out.display()
    );
    Ok(())
}

fn read_table(path: &Path) -> Result<WeightTable> {
    let s = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(WeightTable::from_json(&s)?)
}

fn predict(args: PredictArgs) -> Result<()> {
    let forest_json = fs::read_to_string(args.model.join("forest.json")).context("reading forest.json")?;
    let forest = ForestModel::from_json(&forest_json)?;
    let ds = load_csv(&args.data, &csv_options(&args.label_col, &args.positive_label))?;
    let table = match args.method {
        Method::Paw => Some(read_table(&args.model.join("table.json"))?),
        Method::PawAmp => Some(read_table(&args.model.join("table_amp.json"))?),
        Method::Rf | Method::Naive => None,
        other => bail!("method {other} needs the training data; use `bench`"),
    };
    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(out, "row,label,prediction,p0,p1")?;
    let mut correct = 0usize;
    for (i, votes) in forest.votes_batch(&ds)?.iter().enumerate() {
        let rf = uniform_proba(votes);
        let p = match (&table, args.method) {
            (Some(t), _) => predict_weighted_votes(votes, &rf, t).unwrap_or(rf),
            (None, Method::Naive) => predict_naive_votes(votes),
            _ => rf,
        };
        let y = argmax(&p);
        correct += usize::from(y == ds.label(i));
        writeln!(out, "{i},{},{y},{},{}", ds.label(i), p[0], p[1])?;
    }
    eprintln!("accuracy {:.4} on {} rows", correct as f64 / ds.n_samples() as f64, ds.n_samples());
    Ok(())
}

fn diagnose(args: DiagnoseArgs) -> Result<()> {
    let datasets = load_all(&args.data, args.seed)?;
    let mut diags = Vec::new();
    for ds in &datasets {
        let d = collect(ds, args.trees, args.folds, args.seed)?;
        if ds.n_features() == 2 {
            write_point_map(&d, &args.out.join(format!("points_{}.csv", ds.name())))?;
        }
        diags.push(d);
    }
    let t = tables(&diags);
    for row in &t.frequency {
        println!("{:<9} mean share {:.4}", row.pattern.as_str(), row.mean_share);
    }
    let files = write_diagnostics(&t, &args.out)?;
    println!("wrote {} tables to {}", files.len(), args.out.display());
    Ok(())
}

fn indicators(args: IndicatorArgs) -> Result<()> {
    let datasets = load_all(&args.data, args.seed)?;
    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(out, "dataset,M,S,MS")?;
    for ds in &datasets {
        let forest = ForestModel::fit(ds, &ForestConfig::new(args.trees, args.seed))?;
        let ind = pawforest::paw::indicators(&forest, ds)?;
        writeln!(out, "{},{},{},{}", ds.name(), ind.mass, ind.spread, ind.product)?;
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let ds = gen_synthetic(args.kind, args.n, args.noise.unwrap_or(args.kind.default_noise()), args.seed)?;
    save_csv(&ds, &args.out)?;
    println!("wrote {} rows to {}", ds.n_samples(), args.out.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Bench(a) => bench(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Indicators(a) => indicators(a),
        Command::Synth(a) => synth(a),
    }
}
