use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use chemvise::classify::{accuracy, confusion, mcc, pca_fit, pca_transform};
use chemvise::harness::{
    build_target_space, build_world, count_experiments, emit_report, featurize_trials,
    fit_chemvise_heads, load_sealed, run_representation_protocol, run_window_sweep, Config,
    Context, HeadKind, HyperParams, ModelBundle, NetParams, SvcParams,
};
use chemvise::signals::{Split, TrialDataset};
use chemvise::targets::{load_semantic, TargetKind};
use chemvise::{Error, Result};

#[derive(Parser)]
#[command(name = "chemvise", version, about = "Embedding-regression toolkit for chemiresistive sensor arrays")]
struct Cli {
    /// Only report errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a study (singles for training, doubles held out) into a directory.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Count exposures needed to cover every mixture at every concentration.
    CountExperiments {
        #[arg(long)]
        analytes: u64,
        #[arg(long)]
        concentrations: u64,
    },
    /// Train an embedder with an SVC head on the single-analyte trials.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        target_space: TargetKind,
        /// Semantic vectors (CSV); a synthetic clustered space is used without it.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        window_s: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write per-trial predictions of a trained model and print MCC.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_parser = parse_split, default_value = "test")]
        split: Split,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a reproduction protocol and write report.csv, summary.csv, provenance.json.
    Sweep {
        #[arg(long, value_enum)]
        protocol: Protocol,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of master seeds (overrides the configured repeat count).
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project embeddings of every trial onto two principal components fit on training trials.
    PcaPlot {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Protocol {
    Representation,
    Window,
}

fn parse_kind(s: &str) -> std::result::Result<TargetKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_split(s: &str) -> std::result::Result<Split, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    let mut config = match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Ok(v) = std::env::var("CHEMVISE_SEED") {
        config.harness.master_seed = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("CHEMVISE_SEED must be an unsigned integer, got `{v}`")))?;
    }
    Ok(config)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn simulate(config: Option<&Path>, out: &Path) -> Result<()> {
    let config = load_config(config)?;
    let world = build_world(&config)?;
    world.dataset.write(out)?;
    write_text(&out.join("config.json"), &config.to_json())?;
    info!("wrote {} trials to {}", world.dataset.trials.len(), out.display());
    Ok(())
}

fn train(
    dataset: &Path,
    kind: TargetKind,
    embeddings: Option<&Path>,
    window_s: f64,
    out: &Path,
    config: Option<&Path>,
) -> Result<()> {
    let mut config = load_config(config)?;
    let (singles, _holdout) = load_sealed(dataset)?;
    let space = match (kind, embeddings) {
        (TargetKind::Semantic, Some(path)) => load_semantic(path)?,
        _ => {
            let mut analytes: Vec<String> = singles
                .iter()
                .map(|t| t.mix.components()[0].0.clone())
                .collect();
            analytes.sort();
            analytes.dedup();
            config.simulator.design.analytes = analytes;
            build_target_space(kind, &config)?
        }
    };
    let pre = config.harness.pre_onset_s;
    let samples = featurize_trials(&singles, pre, window_s)?;
    let ctx = Context::from_config(&config, Some(space));
    let e = &config.embedder;
    let params = HyperParams {
        net: Some(NetParams {
            width: e.width,
            learning_rate: e.learning_rate,
            epochs: e.epochs,
            batch_size: e.batch_size,
        }),
        svc: Some(SvcParams {
            c: config.classify.svc_c,
            class_weight: config.classify.class_weight,
        }),
    };
    let model = fit_chemvise_heads(&[HeadKind::Svc], &params, &samples, &ctx, e.seed)?.remove(0);
    let bundle = ModelBundle {
        target_kind: kind,
        target_analyte: config.classify.target_analyte.clone(),
        window_s,
        pre_onset_s: pre,
        model,
    };
    bundle.save(out)?;
    info!("trained on {} singles; model written to {}", samples.len(), out.display());
    Ok(())
}

fn evaluate(model: &Path, dataset: &Path, split: Split, out: &Path) -> Result<()> {
    let bundle = ModelBundle::load(model)?;
    let data = TrialDataset::read_filtered(dataset, |s| s == split)?;
    let samples = featurize_trials(&data.trials, bundle.pre_onset_s, bundle.window_s)?;
    let xs: Vec<_> = samples.iter().map(|s| &s.features).collect();
    let preds = bundle.model.predict(&xs)?;
    let labels: Vec<bool> = samples
        .iter()
        .map(|s| s.mix.label_positive(&bundle.target_analyte))
        .collect();
    let mut text = String::from("trial_id,split,label,prediction\n");
    for ((s, l), p) in samples.iter().zip(&labels).zip(&preds) {
        text.push_str(&format!("{},{},{},{}\n", s.id, s.split, *l as u8, *p as u8));
    }
    write_text(out, &text)?;
    let c = confusion(&preds, &labels)?;
    println!(
        "n={} tp={} fp={} tn={} fn={} mcc={:.4} accuracy={:.4}",
        c.total(),
        c.tp,
        c.fp,
        c.tn,
        c.r#fn,
        mcc(&c),
        accuracy(&c)
    );
    Ok(())
}

fn sweep(protocol: Protocol, config: Option<&Path>, seeds: Option<usize>, out: &Path) -> Result<()> {
    let mut config = load_config(config)?;
    if let Some(n) = seeds {
        config.harness.grid.n_repeats = n;
    }
    let report = match protocol {
        Protocol::Representation => run_representation_protocol(&config)?,
        Protocol::Window => run_window_sweep(&config)?,
    };
    for path in emit_report(&report, out)? {
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn pca_plot(model: &Path, dataset: &Path, out: &Path) -> Result<()> {
    let bundle = ModelBundle::load(model)?;
    let embedder = bundle
        .model
        .embedder()
        .ok_or_else(|| Error::Config("model has no embedder".into()))?;
    let data = TrialDataset::read(dataset)?;
    let samples = featurize_trials(&data.trials, bundle.pre_onset_s, bundle.window_s)?;
    let embedded = samples
        .iter()
        .map(|s| chemvise::embedder::embed(embedder, &s.features).map(|v| v.values))
        .collect::<Result<Vec<_>>>()?;
    let train: Vec<Vec<f64>> = samples
        .iter()
        .zip(&embedded)
        .filter(|(s, _)| s.split != Split::Test)
        .map(|(_, z)| z.clone())
        .collect();
    let pca = pca_fit(&train, 2)?;
    let mut text = String::from("trial_id,pc1,pc2,label,split\n");
    for (s, z) in samples.iter().zip(&embedded) {
        let p = pca_transform(&pca, z)?;
        let label = s.mix.label_positive(&bundle.target_analyte) as u8;
        text.push_str(&format!("{},{},{},{},{}\n", s.id, p[0], p[1], label, s.split));
    }
    write_text(out, &text)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out } => simulate(config.as_deref(), &out),
        Command::CountExperiments {
            analytes,
            concentrations,
        } => {
            println!("{}", count_experiments(analytes, concentrations)?);
            Ok(())
        }
        Command::Train {
            dataset,
            target_space,
            embeddings,
            window_s,
            out,
            config,
        } => train(
            &dataset,
            target_space,
            embeddings.as_deref(),
            window_s,
            &out,
            config.as_deref(),
        ),
        Command::Evaluate {
            model,
            dataset,
            split,
            out,
        } => evaluate(&model, &dataset, split, &out),
        Command::Sweep {
            protocol,
            config,
            seeds,
            out,
        } => sweep(protocol, config.as_deref(), seeds, &out),
        Command::PcaPlot {
            model,
            dataset,
            out,
        } => pca_plot(&model, &dataset, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.quiet {
        log::LevelFilter::Error
    } else {
        log::LevelFilter::Info
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
