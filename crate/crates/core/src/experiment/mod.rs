//! Config-driven experiment runner.
//!
//! An [`ExperimentConfig`] names a corpus, a target language, the source
//! languages that may lend data, network shapes and training settings. An
//! [`Experiment`] prepares the data once and then runs any number of methods
//! against it, each ending in a single target-language network evaluated by
//! frame error rate on the target's dev and test partitions.
//!
//! Every random choice draws from a seed derived from the experiment seed and
//! a fixed stage number, so a config plus a seed determines every number.

mod report;

use std::cell::OnceCell;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{
    generate_synthetic, pool_and_relabel, split_corpus, MultiCorpus, Split, SplitFractions, SynthSpec, SynthTruth,
};
use crate::error::{Error, Result};
use crate::frames::FrameSet;
use crate::mapping::{
    accumulate_confusion, all_pairs_senone_maps, apply_map, load_manual_map, phone_map, realign_with_phone_map,
    senone_map, LabelInventory, LabelKind, LabelMap, MapSet,
};
use crate::multitask::{finetune, init_mtdnn, prune, train_mtdnn, FinetuneConfig, LossMode, MtTrainConfig, MultiHeadNetwork};
use crate::nnet::{init_network, train, write_json, Network, TrainConfig, TrainLog};

pub use report::{emit_table, mean_table, relative_improvement, ResultRow, ResultsFile, ResultsTable, RESULTS_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Baseline,
    ManualMap,
    PhoneMap,
    SenoneMap,
    MtdnnMasked,
    MtdnnMapped,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Baseline,
        Method::ManualMap,
        Method::PhoneMap,
        Method::SenoneMap,
        Method::MtdnnMasked,
        Method::MtdnnMapped,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::ManualMap => "manual-map",
            Method::PhoneMap => "phone-map",
            Method::SenoneMap => "senone-map",
            Method::MtdnnMasked => "mtdnn-masked",
            Method::MtdnnMapped => "mtdnn-mapped",
        }
    }

    pub fn needs_sources(self) -> bool {
        self != Method::Baseline
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// Where the frames come from. In TOML either `[corpus] path = "..."` or a
/// `[corpus.synth]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum CorpusSource {
    Path(PathBuf),
    /// The generator runs with `seed` = spec seed + experiment seed
    /// (wrapping), so every experiment seed draws a fresh corpus.
    Synth(SynthSpec),
}

impl Default for CorpusSource {
    fn default() -> Self {
        CorpusSource::Synth(SynthSpec::default())
    }
}

/// Full description of an experiment. See `README.md` for the TOML schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub target: usize,
    pub sources: Vec<usize>,
    pub method: Method,
    pub output_dir: PathBuf,
    /// Hidden layer widths, shared by single-task networks and the shared
    /// stack of the multi-head network.
    pub hidden_dims: Vec<usize>,
    /// Fraction of the target's training utterances actually used, to make
    /// the target low-resource.
    pub target_train_fraction: f64,
    /// One phone-level map file per source language, in `sources` order.
    pub manual_maps: Vec<PathBuf>,
    pub split: SplitFractions,
    pub train: TrainConfig,
    pub mt_train: MtTrainConfig,
    pub finetune: FinetuneConfig,
    pub corpus: CorpusSource,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            target: 0,
            sources: vec![1, 2],
            method: Method::SenoneMap,
            output_dir: PathBuf::from("senmap-out"),
            hidden_dims: vec![64],
            target_train_fraction: 0.1,
            manual_maps: Vec::new(),
            split: SplitFractions::default(),
            train: TrainConfig::default(),
            mt_train: MtTrainConfig::default(),
            finetune: FinetuneConfig::default(),
            corpus: CorpusSource::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical TOML form with the seed and output
    /// directory cleared, so runs of one config under different seeds or in
    /// different places share a hash.
    pub fn hash(&self) -> String {
        let unseeded = ExperimentConfig {
            seed: 0,
            output_dir: PathBuf::new(),
            ..self.clone()
        };
        Sha256::digest(unseeded.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Checks everything that does not need the corpus contents.
    pub fn validate(&self) -> Result<()> {
        self.validate_for(self.method)
    }

    pub fn validate_for(&self, method: Method) -> Result<()> {
        if self.sources.contains(&self.target) {
            return Err(Error::Config(format!("target language {} is also listed as a source", self.target)));
        }
        let mut sorted = self.sources.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.sources.len() {
            return Err(Error::Config("source languages contain duplicates".into()));
        }
        if method.needs_sources() && self.sources.is_empty() {
            return Err(Error::Config(format!("method {method} needs at least one source language")));
        }
        if method == Method::ManualMap {
            if self.manual_maps.len() != self.sources.len() {
                return Err(Error::Config(format!(
                    "manual-map needs one map file per source language ({} sources, {} files)",
                    self.sources.len(),
                    self.manual_maps.len()
                )));
            }
            if let Some(missing) = self.manual_maps.iter().find(|p| !p.is_file()) {
                return Err(Error::Config(format!("manual map file {} not found", missing.display())));
            }
        }
        if self.hidden_dims.contains(&0) {
            return Err(Error::InvalidArchitecture("hidden layer width must be >= 1".into()));
        }
        if !(self.target_train_fraction > 0.0 && self.target_train_fraction <= 1.0) {
            return Err(Error::Fraction(format!(
                "target_train_fraction must lie in (0, 1], got {}",
                self.target_train_fraction
            )));
        }
        self.split.validate()?;
        if self.split.train == 0.0 {
            return Err(Error::Fraction("train fraction must be > 0".into()));
        }
        self.train.validate()?;
        self.mt_train.validate()?;
        if !(self.finetune.lr > 0.0 && self.finetune.lr.is_finite()) {
            return Err(Error::Config(format!("fine-tune lr must be > 0, got {}", self.finetune.lr)));
        }
        if self.finetune.batch_size == 0 {
            return Err(Error::Config("fine-tune batch_size must be >= 1".into()));
        }
        let langs = self.languages();
        match &self.corpus {
            CorpusSource::Synth(spec) => {
                spec.validate()?;
                if let Some(&bad) = langs.iter().find(|&&l| l >= spec.num_languages) {
                    return Err(Error::UnknownLanguage(bad));
                }
            }
            CorpusSource::Path(p) => {
                if !p.is_file() {
                    return Err(Error::Config(format!("corpus file {} not found", p.display())));
                }
            }
        }
        Ok(())
    }

    /// Target followed by the sources in ascending order.
    pub fn languages(&self) -> Vec<usize> {
        let mut all = self.sources.clone();
        all.push(self.target);
        all.sort_unstable();
        all
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Stage numbers for seed derivation.
mod stage {
    pub const SPLIT: u64 = 1;
    pub const SUBSAMPLE: u64 = 2;
    pub const BASELINE: u64 = 10;
    pub const POOLED: u64 = 20;
    pub const FINETUNE: u64 = 30;
    pub const MULTIHEAD: u64 = 40;
    pub const SOURCE_NET: u64 = 100;
}

/// Splitmix64 of the seed mixed with a stage number.
pub fn derive_seed(seed: u64, stage: u64) -> u64 {
    let mut z = seed ^ stage.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 100 · wrong / total.
pub fn frame_error_rate(net: &Network, frames: &FrameSet) -> Result<f64> {
    if frames.is_empty() {
        return Err(Error::EmptyData("evaluation set"));
    }
    frames.check_labels(net.output_dim())?;
    let predicted = net.predict_all(frames)?;
    let wrong = predicted.iter().zip(frames.labels()).filter(|(p, l)| p != l).count();
    Ok(100.0 * wrong as f64 / frames.len() as f64)
}

/// Everything a finished method produced.
#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub method: Method,
    pub network: Network,
    pub dev_fer: f64,
    pub test_fer: f64,
    /// Named training logs in pipeline order.
    pub logs: Vec<(String, TrainLog)>,
    /// Maps built along the way, keyed by source language.
    pub maps: Vec<(usize, LabelMap)>,
    pub map_set: Option<MapSet>,
    pub seconds: f64,
}

impl MethodOutcome {
    pub fn row(&self) -> ResultRow {
        ResultRow {
            method: self.method,
            dev_fer: self.dev_fer,
            test_fer: self.test_fer,
        }
    }

    /// Writes `model.json`, `row.json`, `train.log` and any maps into `dir`.
    pub fn persist(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.network.save(&dir.join("model.json"))?;
        write_json(&dir.join("row.json"), &self.row())?;
        let mut log = String::new();
        for (name, l) in &self.logs {
            log.push_str(&format!("[{name}]\n{l}"));
        }
        let path = dir.join("train.log");
        std::fs::write(&path, log).map_err(|e| Error::io(&path, e))?;
        for (source, map) in &self.maps {
            map.save(&dir.join(format!("map_{source}_to_{}.txt", map.target().task)))?;
        }
        if let Some(set) = &self.map_set {
            set.save_dir(&dir.join("maps"))?;
        }
        Ok(())
    }
}

/// Prepared data of one experiment plus lazily trained shared networks.
pub struct Experiment {
    cfg: ExperimentConfig,
    corpus: MultiCorpus,
    truth: Option<SynthTruth>,
    target_train: FrameSet,
    target_dev: FrameSet,
    target_test: FrameSet,
    source_train: Vec<FrameSet>,
    baseline: OnceCell<(Network, TrainLog)>,
    source_nets: Vec<OnceCell<Network>>,
}

impl Experiment {
    /// Validates the config, loads or generates the corpus, splits it and
    /// carves out the target training subset.
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Experiment> {
        cfg.validate_for(Method::Baseline)?;
        let (corpus, truth) = match &cfg.corpus {
            CorpusSource::Synth(spec) => {
                let spec = SynthSpec {
                    seed: spec.seed.wrapping_add(cfg.seed),
                    ..spec.clone()
                };
                let (c, t) = generate_synthetic(&spec)?;
                (c, Some(t))
            }
            CorpusSource::Path(p) => (MultiCorpus::load(p)?, None),
        };
        Self::from_corpus(cfg, corpus, truth)
    }

    /// Like [`Experiment::prepare`] with an already loaded corpus. A corpus
    /// that carries split tags keeps them.
    pub fn from_corpus(cfg: &ExperimentConfig, corpus: MultiCorpus, truth: Option<SynthTruth>) -> Result<Experiment> {
        if let Some(&bad) = cfg.languages().iter().find(|&&l| l >= corpus.num_languages()) {
            return Err(Error::UnknownLanguage(bad));
        }
        let corpus = if corpus.splits().is_some() {
            corpus
        } else {
            split_corpus(&corpus, cfg.split, derive_seed(cfg.seed, stage::SPLIT))?
        };
        let full_train = corpus.subset(cfg.target, Split::Train)?;
        let target_train = subsample_utterances(&full_train, cfg.target_train_fraction, derive_seed(cfg.seed, stage::SUBSAMPLE));
        let target_dev = corpus.subset(cfg.target, Split::Dev)?;
        let target_test = corpus.subset(cfg.target, Split::Test)?;
        if target_train.is_empty() {
            return Err(Error::EmptyData("target training partition"));
        }
        let source_train = cfg
            .sources
            .iter()
            .map(|&s| corpus.subset(s, Split::Train))
            .collect::<Result<Vec<_>>>()?;
        log::info!(
            "target {}: {} train / {} dev / {} test frames; sources {:?}: {:?} train frames",
            cfg.target,
            target_train.len(),
            target_dev.len(),
            target_test.len(),
            cfg.sources,
            source_train.iter().map(FrameSet::len).collect::<Vec<_>>()
        );
        Ok(Experiment {
            source_nets: cfg.sources.iter().map(|_| OnceCell::new()).collect(),
            cfg: cfg.clone(),
            corpus,
            truth,
            target_train,
            target_dev,
            target_test,
            source_train,
            baseline: OnceCell::new(),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn corpus(&self) -> &MultiCorpus {
        &self.corpus
    }

    /// Generator ground truth, for synthetic corpora.
    pub fn truth(&self) -> Option<&SynthTruth> {
        self.truth.as_ref()
    }

    pub fn target_train(&self) -> &FrameSet {
        &self.target_train
    }

    pub fn target_dev(&self) -> &FrameSet {
        &self.target_dev
    }

    pub fn target_test(&self) -> &FrameSet {
        &self.target_test
    }

    pub fn source_train(&self, source: usize) -> Result<&FrameSet> {
        Ok(&self.source_train[self.source_index(source)?])
    }

    fn source_index(&self, source: usize) -> Result<usize> {
        self.cfg
            .sources
            .iter()
            .position(|&s| s == source)
            .ok_or(Error::UnknownLanguage(source))
    }

    fn dims(&self, outputs: usize) -> Vec<usize> {
        let mut dims = vec![self.corpus.dim()];
        dims.extend(&self.cfg.hidden_dims);
        dims.push(outputs);
        dims
    }

    fn target_inventory(&self) -> Result<LabelInventory> {
        self.corpus.inventory(self.cfg.target)
    }

    fn train_config(&self, stage: u64) -> TrainConfig {
        TrainConfig {
            shuffle_seed: derive_seed(self.cfg.seed ^ self.cfg.train.shuffle_seed, stage + 1),
            ..self.cfg.train.clone()
        }
    }

    fn train_fresh(&self, frames: &FrameSet, outputs: usize, stage: u64) -> Result<(Network, TrainLog)> {
        let mut net = init_network(&self.dims(outputs), derive_seed(self.cfg.seed, stage))?;
        let log = train(&mut net, frames, &self.train_config(stage))?;
        Ok((net, log))
    }

    /// Network trained on the target training subset alone.
    pub fn train_baseline(&self) -> Result<(Network, TrainLog)> {
        let n = self.target_inventory()?.size;
        self.train_fresh(&self.target_train, n, stage::BASELINE)
    }

    /// Cached [`Experiment::train_baseline`].
    pub fn baseline(&self) -> Result<&(Network, TrainLog)> {
        if self.baseline.get().is_none() {
            let _ = self.baseline.set(self.train_baseline()?);
        }
        Ok(self.baseline.get().unwrap())
    }

    /// Cached network trained on one source language's training partition.
    pub fn source_net(&self, source: usize) -> Result<&Network> {
        let idx = self.source_index(source)?;
        let cell = &self.source_nets[idx];
        if cell.get().is_none() {
            let n = self.corpus.inventory(source)?.size;
            let (net, _) = self.train_fresh(&self.source_train[idx], n, stage::SOURCE_NET + source as u64)?;
            let _ = cell.set(net);
        }
        Ok(cell.get().unwrap())
    }

    /// Data-driven map from `source` labels onto target labels, counted by
    /// decoding the source training frames with `target_net`.
    pub fn build_map(&self, source: usize, kind: LabelKind, target_net: &Network) -> Result<LabelMap> {
        let counts = accumulate_confusion(
            target_net,
            self.source_train(source)?,
            self.target_inventory()?,
            self.corpus.inventory(source)?,
        )?;
        match kind {
            LabelKind::Senone => Ok(senone_map(&counts)),
            LabelKind::Phone => phone_map(&counts, self.corpus.g(source)?, self.corpus.g(self.cfg.target)?),
        }
    }

    /// Loads the configured manual phone map of `source`.
    pub fn manual_map(&self, source: usize) -> Result<LabelMap> {
        let idx = self.source_index(source)?;
        let path = self
            .cfg
            .manual_maps
            .get(idx)
            .ok_or_else(|| Error::Config(format!("no manual map configured for source {source}")))?;
        load_manual_map(
            path,
            self.corpus.g(source)?.phone_inventory(),
            self.corpus.g(self.cfg.target)?.phone_inventory(),
        )
    }

    /// Source training frames with target senone labels. Senone maps apply
    /// directly; phone maps go through [`realign_with_phone_map`].
    pub fn relabel_source(&self, source: usize, map: &LabelMap, target_net: &Network) -> Result<FrameSet> {
        let frames = self.source_train(source)?;
        match map.source().kind {
            LabelKind::Senone => apply_map(frames, map),
            LabelKind::Phone => realign_with_phone_map(
                frames,
                map,
                self.corpus.g(source)?,
                self.corpus.g(self.cfg.target)?,
                target_net,
            ),
        }
    }

    /// Fresh network trained on relabeled source frames pooled with the
    /// target training subset.
    pub fn pool_train(&self, relabeled: &[FrameSet], stage_offset: u64) -> Result<(Network, TrainLog)> {
        let inv = self.target_inventory()?;
        let sources: Vec<(FrameSet, LabelMap)> = relabeled
            .iter()
            .map(|f| (f.clone(), LabelMap::identity(inv)))
            .collect();
        let pooled = pool_and_relabel(&sources, &self.target_train, inv)?;
        self.train_fresh(&pooled, inv.size, stage::POOLED + stage_offset)
    }

    /// Continues training `net` on the target training subset.
    pub fn finetune(&self, net: &mut Network) -> Result<TrainLog> {
        let cfg = FinetuneConfig {
            shuffle_seed: derive_seed(self.cfg.seed ^ self.cfg.finetune.shuffle_seed, stage::FINETUNE),
            ..self.cfg.finetune.clone()
        };
        finetune(net, &self.target_train, &cfg)
    }

    /// Target training subset and source training partitions with their own
    /// labels and language ids.
    pub fn multilingual_frames(&self) -> Result<FrameSet> {
        let mut frames = self.target_train.clone();
        for f in &self.source_train {
            frames.extend(f)?;
        }
        Ok(frames)
    }

    /// All-pairs senone maps between the target and every source, using the
    /// baseline as the target network and per-source networks otherwise.
    pub fn all_pairs_maps(&self) -> Result<MapSet> {
        let languages = self.cfg.languages();
        let mut nets = Vec::with_capacity(languages.len());
        let mut corpora = Vec::with_capacity(languages.len());
        for &l in &languages {
            if l == self.cfg.target {
                nets.push(self.baseline()?.0.clone());
                corpora.push(self.target_train.clone());
            } else {
                nets.push(self.source_net(l)?.clone());
                corpora.push(self.source_train(l)?.clone());
            }
        }
        all_pairs_senone_maps(&languages, &nets, &corpora)
    }

    /// Multi-head network over the target and the sources, heads in
    /// ascending language order.
    pub fn train_multihead(&self, mode: LossMode, maps: Option<&MapSet>) -> Result<(MultiHeadNetwork, TrainLog)> {
        let languages = self.cfg.languages();
        let head_sizes = languages
            .iter()
            .map(|&l| Ok(self.corpus.inventory(l)?.size))
            .collect::<Result<Vec<_>>>()?;
        let mut shared = vec![self.corpus.dim()];
        shared.extend(&self.cfg.hidden_dims);
        let stage = stage::MULTIHEAD + mode as u64;
        let mut net = init_mtdnn(&shared, &head_sizes, derive_seed(self.cfg.seed, stage))?.with_languages(languages)?;
        let cfg = MtTrainConfig {
            loss_mode: mode,
            shuffle_seed: derive_seed(self.cfg.seed ^ self.cfg.mt_train.shuffle_seed, stage + 1),
            ..self.cfg.mt_train.clone()
        };
        let log = train_mtdnn(&mut net, &self.multilingual_frames()?, &cfg, maps)?;
        Ok((net, log))
    }

    /// Frame error rates on the target dev and test partitions. An empty
    /// partition is an error.
    pub fn evaluate(&self, net: &Network) -> Result<(f64, f64)> {
        Ok((
            frame_error_rate(net, &self.target_dev)?,
            frame_error_rate(net, &self.target_test)?,
        ))
    }

    /// Runs one method's full pipeline.
    pub fn run(&self, method: Method) -> Result<MethodOutcome> {
        self.cfg.validate_for(method)?;
        let start = Instant::now();
        let mut logs = Vec::new();
        let mut maps = Vec::new();
        let mut map_set = None;
        let network = match method {
            Method::Baseline => {
                let (net, log) = self.baseline()?;
                logs.push(("train".to_string(), log.clone()));
                net.clone()
            }
            Method::ManualMap | Method::PhoneMap | Method::SenoneMap => {
                let target_net = &self.baseline()?.0;
                let mut relabeled = Vec::new();
                for &s in &self.cfg.sources {
                    let map = match method {
                        Method::ManualMap => self.manual_map(s)?,
                        Method::PhoneMap => self.build_map(s, LabelKind::Phone, target_net)?,
                        _ => self.build_map(s, LabelKind::Senone, target_net)?,
                    };
                    relabeled.push(self.relabel_source(s, &map, target_net)?);
                    maps.push((s, map));
                }
                let (mut net, log) = self.pool_train(&relabeled, method as u64)?;
                logs.push(("pooled".to_string(), log));
                logs.push(("finetune".to_string(), self.finetune(&mut net)?));
                net
            }
            Method::MtdnnMasked | Method::MtdnnMapped => {
                let (mode, set) = if method == Method::MtdnnMapped {
                    (LossMode::Mapped, Some(self.all_pairs_maps()?))
                } else {
                    (LossMode::Masked, None)
                };
                let (mt, log) = self.train_multihead(mode, set.as_ref())?;
                logs.push(("multihead".to_string(), log));
                map_set = set;
                let mut net = prune(&mt, self.cfg.target)?;
                logs.push(("finetune".to_string(), self.finetune(&mut net)?));
                net
            }
        };
        let (dev_fer, test_fer) = self.evaluate(&network)?;
        log::info!("seed {} {method}: dev {dev_fer:.2}% test {test_fer:.2}%", self.cfg.seed);
        Ok(MethodOutcome {
            method,
            network,
            dev_fer,
            test_fer,
            logs,
            maps,
            map_set,
            seconds: start.elapsed().as_secs_f64(),
        })
    }
}

/// Keeps round(fraction · n) of the utterances (at least one), chosen by a
/// seeded shuffle. Frame order is preserved.
fn subsample_utterances(frames: &FrameSet, fraction: f64, seed: u64) -> FrameSet {
    if fraction >= 1.0 {
        return frames.clone();
    }
    let mut utts: Vec<u32> = frames.utterances().to_vec();
    utts.sort_unstable();
    utts.dedup();
    let keep = ((utts.len() as f64 * fraction).round() as usize).clamp(1.min(utts.len()), utts.len());
    utts.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    utts.truncate(keep);
    utts.sort_unstable();
    frames.filter(|f| utts.binary_search(&f.utterance).is_ok())
}

/// Runs `method` and persists its outcome under `output_dir/<method>/`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<MethodOutcome> {
    cfg.validate()?;
    let exp = Experiment::prepare(cfg)?;
    let outcome = exp.run(cfg.method)?;
    outcome.persist(&cfg.output_dir.join(cfg.method.name()))?;
    Ok(outcome)
}

/// Runs the baseline plus `methods` on one prepared experiment, persists
/// every outcome and writes `results.json`, `results.txt` and the
/// wall-clock sidecar `timing.json` into the output directory.
pub fn run_matrix(cfg: &ExperimentConfig, methods: &[Method]) -> Result<ResultsTable> {
    let mut all = vec![Method::Baseline];
    all.extend(methods.iter().copied().filter(|&m| m != Method::Baseline));
    all.sort_unstable();
    all.dedup();
    for &m in &all {
        cfg.validate_for(m)?;
    }
    let exp = Experiment::prepare(cfg)?;
    let mut rows = Vec::new();
    let mut timing = Vec::new();
    for &m in &all {
        let outcome = exp.run(m)?;
        outcome.persist(&cfg.output_dir.join(m.name()))?;
        rows.push(outcome.row());
        timing.push((m.name().to_string(), outcome.seconds));
    }
    let table = emit_table(&rows, cfg)?;
    table.write(&cfg.output_dir)?;
    write_json(&cfg.output_dir.join("timing.json"), &timing)?;
    Ok(table)
}
