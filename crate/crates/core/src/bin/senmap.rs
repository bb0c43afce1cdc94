use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use senmap::corpus::{CorpusFormat, Split};
use senmap::experiment::{
    frame_error_rate, mean_table, run_matrix, CorpusSource, Experiment, ExperimentConfig, Method, ResultsTable,
};
use senmap::mapping::{load_manual_map, write_pairs, LabelKind, LabelMap, MapSet, Provenance};
use senmap::multitask::{prune, LossMode, MultiHeadNetwork};
use senmap::nnet::Network;
use senmap::{Error, Result};

#[derive(Parser)]
#[command(name = "senmap", version, about = "Cross-language senone mapping experiments")]
struct Cli {
    /// Experiment config (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the experiment seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the configured synthetic corpus, split it, and write ground truth.
    Synth(SynthArgs),
    /// Train the target-only network.
    TrainBaseline(OutArgs),
    /// Build a data-driven map from a source language onto the target.
    BuildMap(BuildMapArgs),
    /// Train a fresh network on relabeled source frames pooled with target frames.
    PoolTrain(PoolTrainArgs),
    /// Train a multi-head network over the target and source languages.
    MtTrain(MtTrainArgs),
    /// Reduce a multi-head network to one language's network.
    Prune(PruneArgs),
    /// Continue training a network on the target training frames.
    Finetune(FinetuneArgs),
    /// Print frame error rates of a network on the target partitions.
    Evaluate(EvaluateArgs),
    /// Run the baseline and the chosen methods and write a results table.
    Experiment(ExperimentArgs),
    /// Print or average results tables.
    Report(ReportArgs),
}

#[derive(Args)]
struct OutArgs {
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Binary,
    Text,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "binary")]
    format: FormatArg,
    /// Directory for ground-truth correspondences and knowledge-based phone maps.
    #[arg(long)]
    truth_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Senone,
    Phone,
    /// Every ordered pair of configured languages, written as a map-set directory.
    AllPairs,
}

#[derive(Args)]
struct BuildMapArgs {
    /// Target-language network used to decode the source frames.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    source: Option<usize>,
    #[arg(long, value_enum, default_value = "senone")]
    kind: KindArg,
    /// Output map file, or directory for `--kind all-pairs`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapLevel {
    Senone,
    Phone,
}

#[derive(Args)]
struct PoolTrainArgs {
    /// `SOURCE=FILE`, one per source language.
    #[arg(long = "map", value_parser = parse_lang_path, required = true)]
    maps: Vec<(usize, PathBuf)>,
    /// Label level of the map files.
    #[arg(long, value_enum, default_value = "senone")]
    level: MapLevel,
    /// Target network, needed to realign phone-level maps.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Fine-tune after pooled training.
    #[arg(long)]
    finetune: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Masked,
    Mapped,
}

#[derive(Args)]
struct MtTrainArgs {
    #[arg(long, value_enum, default_value = "masked")]
    mode: ModeArg,
    /// Map-set directory from `build-map --kind all-pairs`. Built on the fly
    /// when mapped mode is requested without it.
    #[arg(long)]
    maps: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PruneArgs {
    #[arg(long)]
    model: PathBuf,
    /// Language whose head is kept; defaults to the configured target.
    #[arg(long)]
    language: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FinetuneArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Dev,
    Test,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Evaluate one partition only; default prints dev and test.
    #[arg(long, value_enum)]
    split: Option<SplitArg>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Methods to run besides the baseline, comma separated. Defaults to the
    /// config's method.
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Vec<Method>,
    /// Run every method that the config supports.
    #[arg(long, conflicts_with = "methods")]
    all: bool,
    /// Run several seeds in parallel, each in `<output_dir>/seed-<n>`, and
    /// write the averaged table to `<output_dir>`.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// `results.json` files; more than one are averaged.
    #[arg(required = true)]
    results: Vec<PathBuf>,
    /// Also write the (averaged) table as results.json/results.txt here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_lang_path(s: &str) -> std::result::Result<(usize, PathBuf), String> {
    let (lang, path) = s.split_once('=').ok_or("expected SOURCE=FILE")?;
    let lang = lang.parse().map_err(|_| format!("bad language id {lang:?}"))?;
    Ok((lang, PathBuf::from(path)))
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    Ok(match cli.seed {
        Some(seed) => cfg.with_seed(seed),
        None => cfg,
    })
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| Error::Io {
                path: dir.to_path_buf(),
                source: e,
            })
        }
        _ => Ok(()),
    }
}

fn synth(cfg: &ExperimentConfig, args: &SynthArgs) -> Result<()> {
    if !matches!(cfg.corpus, CorpusSource::Synth(_)) {
        return Err(Error::Config("synth needs a [corpus.synth] section".into()));
    }
    let exp = Experiment::prepare(cfg)?;
    let format = match args.format {
        FormatArg::Binary => CorpusFormat::Binary,
        FormatArg::Text => CorpusFormat::Text,
    };
    create_parent(&args.out)?;
    exp.corpus().save(&args.out, format)?;
    println!(
        "wrote {} frames in {} languages to {}",
        exp.corpus().frames().len(),
        exp.corpus().num_languages(),
        args.out.display()
    );
    if let (Some(dir), Some(truth)) = (&args.truth_dir, exp.truth()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        let n = exp.corpus().num_languages();
        for s in 0..n {
            for t in (0..n).filter(|&t| t != s) {
                write_pairs(
                    &dir.join(format!("phones_{s}_to_{t}.txt")),
                    &format!("true phone correspondence, language {s} -> language {t}"),
                    &truth.phone_correspondence(s, t),
                )?;
                write_pairs(
                    &dir.join(format!("senones_{s}_to_{t}.txt")),
                    &format!("true senone correspondence, language {s} -> language {t}"),
                    &truth.senone_correspondence(s, t),
                )?;
                truth
                    .knowledge_phone_map(s, t)?
                    .save(&dir.join(format!("manual_{s}_to_{t}.txt")))?;
            }
        }
        println!("wrote ground truth to {}", dir.display());
    }
    Ok(())
}

fn save_network(net: &Network, out: &Path) -> Result<()> {
    create_parent(out)?;
    net.save(out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn build_map(cfg: &ExperimentConfig, args: &BuildMapArgs) -> Result<()> {
    let exp = Experiment::prepare(cfg)?;
    if args.kind == KindArg::AllPairs {
        let set = exp.all_pairs_maps()?;
        set.save_dir(&args.out)?;
        println!("wrote {} maps to {}", set.len(), args.out.display());
        return Ok(());
    }
    let (Some(model), Some(source)) = (&args.model, args.source) else {
        return Err(Error::Config("--model and --source are required for single maps".into()));
    };
    let net = Network::load(model)?;
    let kind = match args.kind {
        KindArg::Phone => LabelKind::Phone,
        _ => LabelKind::Senone,
    };
    let map = exp.build_map(source, kind, &net)?;
    create_parent(&args.out)?;
    map.save(&args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn pool_train(cfg: &ExperimentConfig, args: &PoolTrainArgs) -> Result<()> {
    let exp = Experiment::prepare(cfg)?;
    let corpus = exp.corpus();
    let target_net = match (&args.model, args.level) {
        (Some(p), _) => Some(Network::load(p)?),
        (None, MapLevel::Phone) => return Err(Error::Config("phone-level maps need --model".into())),
        (None, MapLevel::Senone) => None,
    };
    let mut relabeled = Vec::new();
    for (source, path) in &args.maps {
        let (src_inv, tgt_inv) = match args.level {
            MapLevel::Senone => (corpus.inventory(*source)?, corpus.inventory(cfg.target)?),
            MapLevel::Phone => (
                corpus.g(*source)?.phone_inventory(),
                corpus.g(cfg.target)?.phone_inventory(),
            ),
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        let map = match args.level {
            MapLevel::Senone => LabelMap::parse(&text, path, src_inv, tgt_inv, Provenance::DataDrivenSenone)?,
            MapLevel::Phone => load_manual_map(path, src_inv, tgt_inv)?,
        };
        let net = match &target_net {
            Some(n) => n,
            None => &exp.baseline()?.0,
        };
        relabeled.push(exp.relabel_source(*source, &map, net)?);
    }
    let (mut net, log) = exp.pool_train(&relabeled, 0)?;
    print!("{log}");
    if args.finetune {
        print!("{}", exp.finetune(&mut net)?);
    }
    save_network(&net, &args.out)
}

fn mt_train(cfg: &ExperimentConfig, args: &MtTrainArgs) -> Result<()> {
    let exp = Experiment::prepare(cfg)?;
    let (mode, maps) = match args.mode {
        ModeArg::Masked => (LossMode::Masked, None),
        ModeArg::Mapped => {
            let set = match &args.maps {
                Some(dir) => MapSet::load_dir(dir, |l| exp.corpus().inventory(l))?,
                None => exp.all_pairs_maps()?,
            };
            (LossMode::Mapped, Some(set))
        }
    };
    let (net, log) = exp.train_multihead(mode, maps.as_ref())?;
    print!("{log}");
    create_parent(&args.out)?;
    net.save(&args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Synth(args) => synth(&cfg, args),
        Command::TrainBaseline(args) => {
            let exp = Experiment::prepare(&cfg)?;
            let (net, log) = exp.baseline()?;
            print!("{log}");
            save_network(net, &args.out)
        }
        Command::BuildMap(args) => build_map(&cfg, args),
        Command::PoolTrain(args) => pool_train(&cfg, args),
        Command::MtTrain(args) => mt_train(&cfg, args),
        Command::Prune(args) => {
            let mt = MultiHeadNetwork::load(&args.model)?;
            save_network(&prune(&mt, args.language.unwrap_or(cfg.target))?, &args.out)
        }
        Command::Finetune(args) => {
            let exp = Experiment::prepare(&cfg)?;
            let mut net = Network::load(&args.model)?;
            print!("{}", exp.finetune(&mut net)?);
            save_network(&net, &args.out)
        }
        Command::Evaluate(args) => {
            let exp = Experiment::prepare(&cfg)?;
            let net = Network::load(&args.model)?;
            let splits: Vec<(Split, &senmap::FrameSet)> = match args.split {
                Some(SplitArg::Train) => vec![(Split::Train, exp.target_train())],
                Some(SplitArg::Dev) => vec![(Split::Dev, exp.target_dev())],
                Some(SplitArg::Test) => vec![(Split::Test, exp.target_test())],
                None => vec![(Split::Dev, exp.target_dev()), (Split::Test, exp.target_test())],
            };
            for (split, frames) in splits {
                println!("{} {:.2}", split.name(), frame_error_rate(&net, frames)?);
            }
            Ok(())
        }
        Command::Experiment(args) => experiment(cfg, args),
        Command::Report(args) => {
            let tables = args
                .results
                .iter()
                .map(|p| ResultsTable::load(p))
                .collect::<Result<Vec<_>>>()?;
            let table = if tables.len() == 1 {
                tables.into_iter().next().unwrap()
            } else {
                mean_table(&tables)?
            };
            print!("{table}");
            if let Some(dir) = &args.out {
                table.write(dir)?;
            }
            Ok(())
        }
    }
}

fn experiment(mut cfg: ExperimentConfig, args: &ExperimentArgs) -> Result<()> {
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    let methods: Vec<Method> = if args.all {
        Method::ALL
            .into_iter()
            .filter(|&m| cfg.validate_for(m).is_ok())
            .collect()
    } else if args.methods.is_empty() {
        vec![cfg.method]
    } else {
        args.methods.clone()
    };
    if args.seeds.is_empty() {
        let table = run_matrix(&cfg, &methods)?;
        print!("{table}");
        return Ok(());
    }
    let tables = args
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut c = cfg.clone().with_seed(seed);
            c.output_dir = cfg.output_dir.join(format!("seed-{seed}"));
            run_matrix(&c, &methods)
        })
        .collect::<Result<Vec<_>>>()?;
    for t in &tables {
        print!("{t}");
        println!();
    }
    let mean = mean_table(&tables)?;
    mean.write(&cfg.output_dir)?;
    print!("{mean}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.class());
            ExitCode::from(e.code() as u8)
        }
    }
}
