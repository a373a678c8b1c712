use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use commevo::communities::{detect_all, load_partition, write_partition, LpaConfig, Partition};
use commevo::dataset::{load_dataset, save_dataset, Sample};
use commevo::eval::{classification_report, emit_plot_data, mape, split, EvaluationReport};
use commevo::evolution::{build_labeled_set, write_labels, LabeledSet};
use commevo::features::featurize_all;
use commevo::graph::{load_interactions, load_pairs, FriendshipGraph, TemporalGraph};
use commevo::{EvolutionType, LtsModel, RunConfig};

#[derive(Parser)]
#[command(
    name = "commevo",
    version,
    about = "Community evolution prediction on temporal graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Slice an interaction stream into snapshots and summarise them
    Ingest {
        #[command(flatten)]
        graph: GraphArgs,
        /// Summary output (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detect communities per snapshot
    Detect {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label community evolution between consecutive snapshots
    Label {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the labeled feature dataset
    Featurize {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        friends: FriendArgs,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model on a dataset
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict evolution type and extent for every row of a dataset
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a model on a labeled dataset
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Report output (JSON)
        #[arg(long)]
        out: PathBuf,
        /// `true,predicted` extent series
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Chart of the extent series
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run every stage end to end
    Pipeline {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        friends: FriendArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct GraphArgs {
    /// Edge list: `src dst time` per line
    #[arg(long)]
    interactions: PathBuf,
    /// Snapshot length in time units (overrides `window` in the config)
    #[arg(long)]
    window: Option<f64>,
    /// `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Lpa,
}

#[derive(Args)]
struct SourceArgs {
    /// Built-in community detection
    #[arg(long, value_enum, conflicts_with = "partition")]
    algo: Option<Algo>,
    /// External partition: `snapshot community node` per line
    #[arg(long)]
    partition: Option<PathBuf>,
}

#[derive(Args)]
struct FriendArgs {
    /// Friendship edge list: `u v` per line
    #[arg(long)]
    friendship: Option<PathBuf>,
    /// Circle assignment: `node circle` per line
    #[arg(long, requires = "friendship")]
    circles: Option<PathBuf>,
}

struct Loaded {
    graph: TemporalGraph,
    config: RunConfig,
}

fn load_config(path: Option<&Path>) -> anyhow::Result<RunConfig> {
    match path {
        Some(p) => Ok(RunConfig::load(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn load_graph(args: &GraphArgs) -> anyhow::Result<Loaded> {
    let config = load_config(args.config.as_deref())?;
    let Some(window) = args.window.or(config.window) else {
        bail!("no window length: pass --window or set `window` in the config");
    };
    let events = load_interactions(&args.interactions)?;
    let graph = TemporalGraph::ingest(&events, window)?;
    info!(
        "{} events -> {} snapshots, {} nodes",
        events.len(),
        graph.len(),
        graph.nodes().len()
    );
    Ok(Loaded { graph, config })
}

fn communities(loaded: &Loaded, source: &SourceArgs, seed: u64) -> anyhow::Result<Partition> {
    if let Some(path) = &source.partition {
        return Ok(load_partition(path, &loaded.graph)?);
    }
    let lpa = LpaConfig {
        max_iters: loaded.config.lpa_max_iters,
        seed,
    };
    Ok(detect_all(&loaded.graph, &lpa))
}

fn labels(
    loaded: &Loaded,
    partition: &Partition,
    kappa: Option<f64>,
) -> anyhow::Result<LabeledSet> {
    let kappa = kappa.unwrap_or(loaded.config.kappa);
    Ok(build_labeled_set(&loaded.graph, partition, kappa)?)
}

fn friendship(args: &FriendArgs, config: &RunConfig, seed: u64) -> anyhow::Result<FriendshipGraph> {
    let Some(path) = &args.friendship else {
        info!("no friendship graph given; friendship features are zero");
        return Ok(FriendshipGraph::empty());
    };
    let edges = load_pairs(path)?;
    let circles = args.circles.as_deref().map(load_pairs).transpose()?;
    let lpa = LpaConfig {
        max_iters: config.lpa_max_iters,
        seed,
    };
    Ok(FriendshipGraph::ingest(&edges, circles.as_deref(), &lpa)?)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_summary(out: &mut dyn Write, graph: &TemporalGraph) -> std::io::Result<()> {
    writeln!(out, "# snapshot start end nodes edges")?;
    for s in graph.snapshots() {
        let (a, b) = s.window();
        writeln!(
            out,
            "{} {} {} {} {}",
            s.index(),
            a,
            b,
            s.nodes().len(),
            s.edge_count()
        )?;
    }
    Ok(())
}

fn write_partition_file(
    path: &Path,
    graph: &TemporalGraph,
    partition: &Partition,
) -> anyhow::Result<()> {
    let mut w = create(path)?;
    write_partition(&mut w, graph, partition.iter().flatten())?;
    w.flush()?;
    Ok(())
}

fn write_labels_file(path: &Path, set: &LabeledSet) -> anyhow::Result<()> {
    let mut w = create(path)?;
    write_labels(&mut w, &set.records)?;
    w.flush()?;
    Ok(())
}

fn evaluate(model: &LtsModel, samples: &[Sample]) -> anyhow::Result<EvaluationReport> {
    let mut truth = Vec::with_capacity(samples.len());
    let mut predicted = Vec::with_capacity(samples.len());
    let mut true_extent = Vec::with_capacity(samples.len());
    let mut pred_extent = Vec::with_capacity(samples.len());
    for s in samples {
        let p = model.predict(s.features.as_slice())?;
        truth.push(s.etype);
        predicted.push(p.etype);
        true_extent.push(s.extent as f64);
        pred_extent.push(p.extent);
    }
    let regression = match mape(&true_extent, &pred_extent) {
        Ok(r) => Some(r),
        Err(commevo::Error::MapeUndefined) => {
            log::warn!("every true extent is zero; MAPE not reported");
            None
        }
        Err(e) => return Err(e.into()),
    };
    Ok(EvaluationReport {
        n_samples: samples.len(),
        classification: classification_report(&truth, &predicted)?,
        regression,
    })
}

fn write_report(
    report: &EvaluationReport,
    out: &Path,
    plot: Option<&Path>,
    svg: Option<&Path>,
) -> anyhow::Result<()> {
    let mut w = create(out)?;
    w.write_all(report.to_json()?.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    if let (Some(r), Some(plot)) = (&report.regression, plot) {
        emit_plot_data(r, plot, svg)?;
    }
    Ok(())
}

fn print_summary(report: &EvaluationReport) {
    let c = &report.classification;
    println!(
        "samples {}  acc {:.4}  P {:.4}  R {:.4}  F1 {:.4}",
        report.n_samples, c.accuracy, c.weighted_precision, c.weighted_recall, c.weighted_f1
    );
    if let Some(r) = &report.regression {
        println!(
            "MAPE {:.4}% over {} samples ({} zero-extent excluded)",
            r.mape_percent, r.n_evaluated, r.n_excluded_zero_target
        );
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest { graph, out } => {
            let loaded = load_graph(&graph)?;
            match out {
                Some(path) => {
                    let mut w = create(&path)?;
                    write_summary(&mut w, &loaded.graph)?;
                    w.flush()?;
                }
                None => write_summary(&mut std::io::stdout().lock(), &loaded.graph)?,
            }
        }
        Command::Detect {
            graph,
            source,
            seed,
            out,
        } => {
            let loaded = load_graph(&graph)?;
            let partition = communities(&loaded, &source, seed)?;
            write_partition_file(&out, &loaded.graph, &partition)?;
        }
        Command::Label {
            graph,
            source,
            kappa,
            seed,
            out,
        } => {
            let loaded = load_graph(&graph)?;
            let partition = communities(&loaded, &source, seed)?;
            let set = labels(&loaded, &partition, kappa)?;
            write_labels_file(&out, &set)?;
        }
        Command::Featurize {
            graph,
            source,
            friends,
            kappa,
            seed,
            out,
        } => {
            let loaded = load_graph(&graph)?;
            let friend_graph = friendship(&friends, &loaded.config, seed)?;
            let partition = communities(&loaded, &source, seed)?;
            let set = labels(&loaded, &partition, kappa)?;
            let samples = featurize_all(&set.records, &loaded.graph, &friend_graph)?;
            save_dataset(&out, &samples)?;
        }
        Command::Train {
            dataset,
            config,
            seed,
            out,
        } => {
            let config = load_config(config.as_deref())?;
            let samples = load_dataset(&dataset)?;
            let model = LtsModel::train(&samples, &config.model, seed)?;
            model.save(&out)?;
        }
        Command::Predict {
            model,
            dataset,
            out,
        } => {
            let model = LtsModel::load(&model)?;
            let samples = load_dataset(&dataset)?;
            let mut w = csv::Writer::from_writer(create(&out)?);
            w.write_record(["snapshot", "community_id", "etype", "extent"])?;
            for s in &samples {
                let p = model.predict(s.features.as_slice())?;
                w.write_record([
                    s.snapshot.to_string(),
                    s.community.to_string(),
                    p.etype.to_string(),
                    p.extent.to_string(),
                ])?;
            }
            w.flush()?;
        }
        Command::Evaluate {
            model,
            dataset,
            out,
            plot,
            svg,
        } => {
            let model = LtsModel::load(&model)?;
            let samples = load_dataset(&dataset)?;
            let report = evaluate(&model, &samples)?;
            write_report(&report, &out, plot.as_deref(), svg.as_deref())?;
            print_summary(&report);
        }
        Command::Pipeline {
            graph,
            source,
            friends,
            seed,
            out,
        } => {
            fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
            let loaded = load_graph(&graph)?;
            let friend_graph = friendship(&friends, &loaded.config, seed)?;
            let partition = communities(&loaded, &source, seed)?;
            write_partition_file(&out.join("partition.txt"), &loaded.graph, &partition)?;
            let set = labels(&loaded, &partition, None)?;
            write_labels_file(&out.join("labels.txt"), &set)?;
            let samples = featurize_all(&set.records, &loaded.graph, &friend_graph)?;
            save_dataset(&out.join("dataset.csv"), &samples)?;

            let cfg = &loaded.config;
            let (train, test) = split(&samples, (cfg.train_ratio, cfg.test_ratio), seed)?;
            save_dataset(&out.join("train.csv"), &train)?;
            save_dataset(&out.join("test.csv"), &test)?;
            let model = LtsModel::train(&train, &cfg.model, seed)?;
            model.save(&out.join("model.json"))?;

            let report = evaluate(&model, &test)?;
            write_report(
                &report,
                &out.join("report.json"),
                Some(&out.join("plot.csv")),
                Some(&out.join("plot.svg")),
            )?;
            let counts = commevo::dataset::class_counts(&samples);
            let summary: Vec<String> = EvolutionType::TRAINABLE
                .iter()
                .zip(counts)
                .map(|(t, n)| format!("{t}={n}"))
                .collect();
            println!("dataset {} samples: {}", samples.len(), summary.join(" "));
            print_summary(&report);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
