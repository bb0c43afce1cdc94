//! Multi-head networks: a shared ReLU stack feeding one softmax head per
//! language.
//!
//! Two target schemes are supported. In masked mode a frame carries a one-hot
//! target only on its own language's head and every other head contributes
//! neither loss nor gradient. In mapped mode every head receives a one-hot
//! target obtained by pushing the frame's label through the all-pairs senone
//! maps, and the per-head cross-entropies are summed.
//!
//! After training, [`prune`] keeps the shared stack and a single head, giving
//! a plain [`Network`] that [`finetune`] can continue training.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::FrameSet;
use crate::mapping::MapSet;
use crate::nnet::{
    alloc_acts, cross_entropy, read_json, relu_stack_backward, relu_stack_forward, schedule_lr,
    softmax_in_place, validate_dims, write_json, Activation, Dense, EpochStats, LayerFile, LayerGrad,
    Network, Posterior, TrainLog, FORMAT_VERSION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossMode {
    Masked,
    Mapped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiHeadNetwork {
    shared_dims: Vec<usize>,
    shared: Vec<Dense>,
    heads: Vec<Dense>,
    languages: Vec<usize>,
    seed: u64,
}

/// Seeded multi-head network. Heads are numbered `0..head_sizes.len()` and
/// initially serve languages with the same ids; each head draws from its own
/// random stream so its weights do not depend on the other heads.
pub fn init_mtdnn(shared_dims: &[usize], head_sizes: &[usize], seed: u64) -> Result<MultiHeadNetwork> {
    validate_dims(shared_dims, 1)?;
    if head_sizes.is_empty() {
        return Err(Error::InvalidArchitecture("multi-head network needs at least one head".into()));
    }
    if head_sizes.contains(&0) {
        return Err(Error::InvalidArchitecture("head size must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shared = shared_dims
        .windows(2)
        .map(|w| Dense::random(w[0], w[1], &mut rng))
        .collect();
    let top = *shared_dims.last().unwrap();
    let heads = head_sizes
        .iter()
        .enumerate()
        .map(|(h, &size)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(h as u64 + 1);
            Dense::random(top, size, &mut rng)
        })
        .collect();
    Ok(MultiHeadNetwork {
        shared_dims: shared_dims.to_vec(),
        shared,
        heads,
        languages: (0..head_sizes.len()).collect(),
        seed,
    })
}

impl MultiHeadNetwork {
    /// Assigns language ids to heads, in head order.
    pub fn with_languages(mut self, languages: Vec<usize>) -> Result<Self> {
        if languages.len() != self.heads.len() {
            return Err(Error::shape(self.heads.len(), languages.len(), "languages per head"));
        }
        let mut sorted = languages.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != languages.len() {
            return Err(Error::InvalidArchitecture("duplicate language id among heads".into()));
        }
        self.languages = languages;
        Ok(self)
    }

    pub fn from_parts(shared: Vec<Dense>, heads: Vec<Dense>, languages: Vec<usize>, seed: u64) -> Result<Self> {
        if heads.is_empty() {
            return Err(Error::InvalidArchitecture("multi-head network needs at least one head".into()));
        }
        let mut shared_dims = vec![shared.first().map_or(heads[0].in_dim(), Dense::in_dim)];
        for layer in &shared {
            let prev = *shared_dims.last().unwrap();
            if layer.in_dim() != prev {
                return Err(Error::shape(prev, layer.in_dim(), "shared layer input dim"));
            }
            shared_dims.push(layer.out_dim());
        }
        let top = *shared_dims.last().unwrap();
        if let Some(h) = heads.iter().find(|h| h.in_dim() != top) {
            return Err(Error::shape(top, h.in_dim(), "head input dim"));
        }
        let net = MultiHeadNetwork {
            shared_dims,
            shared,
            heads,
            languages: Vec::new(),
            seed,
        };
        net.with_languages(languages)
    }

    pub fn shared_dims(&self) -> &[usize] {
        &self.shared_dims
    }

    pub fn input_dim(&self) -> usize {
        self.shared_dims[0]
    }

    pub fn num_heads(&self) -> usize {
        self.heads.len()
    }

    pub fn head_sizes(&self) -> Vec<usize> {
        self.heads.iter().map(Dense::out_dim).collect()
    }

    pub fn languages(&self) -> &[usize] {
        &self.languages
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shared_layers(&self) -> &[Dense] {
        &self.shared
    }

    pub fn shared_layers_mut(&mut self) -> &mut [Dense] {
        &mut self.shared
    }

    pub fn heads(&self) -> &[Dense] {
        &self.heads
    }

    pub fn heads_mut(&mut self) -> &mut [Dense] {
        &mut self.heads
    }

    /// Head index serving `language`.
    pub fn head_of(&self, language: usize) -> Result<usize> {
        self.languages
            .iter()
            .position(|&l| l == language)
            .ok_or(Error::UnknownLanguage(language))
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::shape(self.input_dim(), x.len(), "network input"));
        }
        Ok(())
    }

    fn shared_forward(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = alloc_acts(&self.shared_dims);
        acts[0].copy_from_slice(x);
        relu_stack_forward(&self.shared, &mut acts);
        acts
    }

    fn head_posterior(&self, head: usize, top: &[f64]) -> Posterior {
        let mut probs = vec![0.0; self.heads[head].out_dim()];
        self.heads[head].affine(top, &mut probs);
        softmax_in_place(&mut probs);
        Posterior { probs }
    }

    /// Posteriors of every head, in head order.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<Posterior>> {
        self.check_input(x)?;
        let acts = self.shared_forward(x);
        let top = acts.last().unwrap();
        Ok((0..self.heads.len()).map(|h| self.head_posterior(h, top)).collect())
    }

    pub fn forward_head(&self, x: &[f64], head: usize) -> Result<Posterior> {
        self.check_input(x)?;
        if head >= self.heads.len() {
            return Err(Error::Range {
                what: "head",
                index: head,
                limit: self.heads.len(),
            });
        }
        let acts = self.shared_forward(x);
        Ok(self.head_posterior(head, acts.last().unwrap()))
    }

    pub fn zero_grads(&self) -> MtGrads {
        MtGrads {
            shared: self.shared.iter().map(LayerGrad::zeros_like).collect(),
            heads: self.heads.iter().map(LayerGrad::zeros_like).collect(),
        }
    }

    /// Loss of one frame under `targets` and its gradient w.r.t. every shared
    /// and head parameter.
    pub fn loss_and_gradients(&self, x: &[f64], targets: &TargetAssignment) -> Result<(f64, MtGrads)> {
        self.check_input(x)?;
        self.check_targets(targets)?;
        let mut ws = MtWorkspace::new(self);
        let mut grads = self.zero_grads();
        let loss = self.accumulate(x, &targets.hot, &mut ws, &mut grads);
        Ok((loss, grads))
    }

    fn check_targets(&self, targets: &TargetAssignment) -> Result<()> {
        if targets.sizes != self.head_sizes() {
            return Err(Error::shape(self.heads.len(), targets.sizes.len(), "target head sizes"));
        }
        Ok(())
    }

    fn accumulate(&self, x: &[f64], hot: &[Option<usize>], ws: &mut MtWorkspace, grads: &mut MtGrads) -> f64 {
        ws.acts[0].copy_from_slice(x);
        relu_stack_forward(&self.shared, &mut ws.acts);
        let top_idx = ws.acts.len() - 1;
        let has_hidden = !self.shared.is_empty();
        ws.d_top.iter_mut().for_each(|v| *v = 0.0);

        let mut loss = 0.0;
        for (h, target) in hot.iter().enumerate() {
            // heads without a target contribute neither loss nor gradient
            let Some(t) = *target else { continue };
            let head = &self.heads[h];
            let probs = &mut ws.probs[h];
            head.affine(&ws.acts[top_idx], probs);
            softmax_in_place(probs);
            loss += cross_entropy(probs, t);
            probs[t] -= 1.0;
            if has_hidden {
                head.backward(&ws.acts[top_idx], probs, &mut grads.heads[h], Some(&mut ws.d_head));
                for (d, v) in ws.d_top.iter_mut().zip(&ws.d_head) {
                    *d += v;
                }
            } else {
                head.backward(&ws.acts[top_idx], probs, &mut grads.heads[h], None);
            }
        }
        if has_hidden {
            relu_stack_backward(&self.shared, &ws.acts, &mut ws.d_top, &mut grads.shared, &mut ws.scratch);
            ws.d_top.resize(*self.shared_dims.last().unwrap(), 0.0);
        }
        loss
    }

    fn apply_update(&mut self, grads: &MtGrads, step: f64, touched: &[bool]) {
        for (layer, g) in self.shared.iter_mut().zip(&grads.shared) {
            layer.apply_update(g, step);
        }
        for ((layer, g), &t) in self.heads.iter_mut().zip(&grads.heads).zip(touched) {
            if t {
                layer.apply_update(g, step);
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, &MultiHeadFile::from(self))
    }

    pub fn load(path: &Path) -> Result<MultiHeadNetwork> {
        let file: MultiHeadFile = read_json(path)?;
        file.into_network()
    }
}

/// Gradients of a [`MultiHeadNetwork`], shaped like its layers.
#[derive(Debug, Clone, PartialEq)]
pub struct MtGrads {
    pub shared: Vec<LayerGrad>,
    pub heads: Vec<LayerGrad>,
}

impl MtGrads {
    fn clear(&mut self) {
        self.shared.iter_mut().chain(self.heads.iter_mut()).for_each(LayerGrad::clear);
    }
}

struct MtWorkspace {
    acts: Vec<Vec<f64>>,
    probs: Vec<Vec<f64>>,
    d_top: Vec<f64>,
    d_head: Vec<f64>,
    scratch: Vec<f64>,
}

impl MtWorkspace {
    fn new(net: &MultiHeadNetwork) -> Self {
        let top = *net.shared_dims.last().unwrap();
        MtWorkspace {
            acts: alloc_acts(&net.shared_dims),
            probs: net.heads.iter().map(|h| vec![0.0; h.out_dim()]).collect(),
            d_top: vec![0.0; top],
            d_head: vec![0.0; top],
            scratch: Vec::new(),
        }
    }
}

/// Desired outputs of every head for one frame. Each head either has a
/// one-hot target (`Some(index)`) or the all-zero vector (`None`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetAssignment {
    pub owner: usize,
    pub mode: LossMode,
    pub hot: Vec<Option<usize>>,
    pub sizes: Vec<usize>,
}

impl TargetAssignment {
    /// Target vectors written out in full.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        self.hot
            .iter()
            .zip(&self.sizes)
            .map(|(hot, &size)| {
                let mut v = vec![0.0; size];
                if let Some(i) = *hot {
                    v[i] = 1.0;
                }
                v
            })
            .collect()
    }
}

fn check_owner(label: usize, owner: usize, head_sizes: &[usize]) -> Result<()> {
    let Some(&size) = head_sizes.get(owner) else {
        return Err(Error::Range {
            what: "owner head",
            index: owner,
            limit: head_sizes.len(),
        });
    };
    if label >= size {
        return Err(Error::LabelRange { label, size });
    }
    Ok(())
}

/// One-hot target at `label` on head `owner`, all-zero on every other head.
pub fn make_targets_single(label: usize, owner: usize, head_sizes: &[usize]) -> Result<TargetAssignment> {
    check_owner(label, owner, head_sizes)?;
    let mut hot = vec![None; head_sizes.len()];
    hot[owner] = Some(label);
    Ok(TargetAssignment {
        owner,
        mode: LossMode::Masked,
        hot,
        sizes: head_sizes.to_vec(),
    })
}

/// One-hot targets on every head. Head `h` serves language
/// `maps.languages()[h]` and receives `label` mapped from the owner's language
/// onto its own; the owner head keeps `label` itself.
pub fn make_targets_mapped(label: usize, owner: usize, maps: &MapSet, head_sizes: &[usize]) -> Result<TargetAssignment> {
    check_owner(label, owner, head_sizes)?;
    let languages = maps.languages();
    if languages.len() != head_sizes.len() {
        return Err(Error::shape(head_sizes.len(), languages.len(), "map set languages per head"));
    }
    let owner_lang = languages[owner];
    let mut hot = Vec::with_capacity(head_sizes.len());
    for (h, (&lang, &size)) in languages.iter().zip(head_sizes).enumerate() {
        let map = maps.get(lang, owner_lang)?;
        let t = if h == owner { label } else { map.get(label)? };
        if t >= size {
            return Err(Error::LabelRange { label: t, size });
        }
        hot.push(Some(t));
    }
    Ok(TargetAssignment {
        owner,
        mode: LossMode::Mapped,
        hot,
        sizes: head_sizes.to_vec(),
    })
}

/// Summed cross-entropy over the heads that carry a target. For masked
/// assignments that is the owner head alone.
pub fn mt_loss(outputs: &[Posterior], targets: &TargetAssignment) -> Result<f64> {
    if outputs.len() != targets.hot.len() {
        return Err(Error::shape(targets.hot.len(), outputs.len(), "head outputs"));
    }
    let mut loss = 0.0;
    for ((out, hot), &size) in outputs.iter().zip(&targets.hot).zip(&targets.sizes) {
        if out.len() != size {
            return Err(Error::shape(size, out.len(), "head output dim"));
        }
        if let Some(t) = *hot {
            loss += cross_entropy(&out.probs, t);
        }
    }
    Ok(loss)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MtTrainConfig {
    pub initial_lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub shuffle_seed: u64,
    pub halve_every_epoch: bool,
    pub loss_mode: LossMode,
}

impl Default for MtTrainConfig {
    fn default() -> Self {
        MtTrainConfig {
            initial_lr: 0.008,
            epochs: 16,
            batch_size: 32,
            shuffle_seed: 0,
            halve_every_epoch: true,
            loss_mode: LossMode::Masked,
        }
    }
}

impl MtTrainConfig {
    pub fn validate(&self) -> Result<()> {
        crate::nnet::TrainConfig {
            initial_lr: self.initial_lr,
            epochs: self.epochs,
            batch_size: self.batch_size,
            shuffle_seed: self.shuffle_seed,
            halve_every_epoch: self.halve_every_epoch,
        }
        .validate()
    }
}

/// Trains on pooled multi-language frames. Mini-batches mix languages; the
/// target scheme is applied per frame. Masked mode never touches the head of a
/// language that has no frame in the batch.
pub fn train_mtdnn(
    net: &mut MultiHeadNetwork,
    frames: &FrameSet,
    cfg: &MtTrainConfig,
    maps: Option<&MapSet>,
) -> Result<TrainLog> {
    cfg.validate()?;
    if frames.is_empty() {
        return Err(Error::EmptyData("pooled training set"));
    }
    if frames.dim() != net.input_dim() {
        return Err(Error::shape(net.input_dim(), frames.dim(), "training features"));
    }
    let head_sizes = net.head_sizes();
    if cfg.loss_mode == LossMode::Mapped {
        let maps = maps.ok_or_else(|| Error::Config("mapped loss mode requires a map set".into()))?;
        if maps.languages() != net.languages() {
            return Err(Error::Inventory(format!(
                "map set languages {:?} do not match head languages {:?}",
                maps.languages(),
                net.languages()
            )));
        }
    }

    // resolve every target before any compute
    let mut owners = Vec::with_capacity(frames.len());
    let mut targets = Vec::with_capacity(frames.len());
    for frame in frames.iter() {
        let owner = net.head_of(frame.language)?;
        let t = match cfg.loss_mode {
            LossMode::Masked => make_targets_single(frame.label, owner, &head_sizes)?,
            LossMode::Mapped => make_targets_mapped(frame.label, owner, maps.unwrap(), &head_sizes)?,
        };
        owners.push(owner);
        targets.push(t.hot);
    }

    let n_heads = head_sizes.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
    let mut order: Vec<usize> = (0..frames.len()).collect();
    let mut ws = MtWorkspace::new(net);
    let mut grads = net.zero_grads();
    let mut touched = vec![false; n_heads];
    let mut log = TrainLog::default();

    for epoch in 0..cfg.epochs {
        let lr = schedule_lr(cfg.initial_lr, cfg.halve_every_epoch, epoch);
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut per_head = vec![(0.0, 0usize); n_heads];
        for batch in order.chunks(cfg.batch_size) {
            grads.clear();
            touched.iter_mut().for_each(|t| *t = false);
            for &i in batch {
                let loss = net.accumulate(frames.features(i), &targets[i], &mut ws, &mut grads);
                for (h, hot) in targets[i].iter().enumerate() {
                    touched[h] |= hot.is_some();
                }
                total += loss;
                per_head[owners[i]].0 += loss;
                per_head[owners[i]].1 += 1;
            }
            net.apply_update(&grads, lr / batch.len() as f64, &touched);
        }
        log.epochs.push(EpochStats {
            epoch,
            lr,
            mean_loss: total / frames.len() as f64,
            per_language: per_head
                .iter()
                .enumerate()
                .filter(|(_, (_, n))| *n > 0)
                .map(|(h, (sum, n))| (net.languages[h], sum / *n as f64))
                .collect(),
        });
    }
    Ok(log)
}

/// Keeps the shared stack and the head of `language`.
pub fn prune(net: &MultiHeadNetwork, language: usize) -> Result<Network> {
    let head = net.head_of(language).map_err(|_| Error::Range {
        what: "head language",
        index: language,
        limit: net.num_heads(),
    })?;
    let mut layers = net.shared.clone();
    layers.push(net.heads[head].clone());
    Network::from_layers(layers, net.seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FinetuneConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub shuffle_seed: u64,
    pub halve_every_epoch: bool,
}

impl Default for FinetuneConfig {
    fn default() -> Self {
        FinetuneConfig {
            epochs: 5,
            lr: 0.0008,
            batch_size: 32,
            shuffle_seed: 0,
            halve_every_epoch: false,
        }
    }
}

/// Continues SGD on target-language frames. Zero epochs leaves `net` as is.
pub fn finetune(net: &mut Network, frames: &FrameSet, cfg: &FinetuneConfig) -> Result<TrainLog> {
    if !(cfg.lr > 0.0 && cfg.lr.is_finite()) {
        return Err(Error::Config(format!("fine-tune lr must be > 0, got {}", cfg.lr)));
    }
    if cfg.epochs == 0 {
        return Ok(TrainLog::default());
    }
    crate::nnet::sgd(net, frames, cfg.lr, cfg.halve_every_epoch, cfg.epochs, cfg.batch_size, cfg.shuffle_seed)
}

const MULTIHEAD_FORMAT: &str = "senmap-multihead";

#[derive(Serialize, Deserialize)]
struct HeadFile {
    name: String,
    language: usize,
    layer: LayerFile,
}

#[derive(Serialize, Deserialize)]
struct MultiHeadFile {
    format: String,
    version: u32,
    shared_dims: Vec<usize>,
    activation: Activation,
    seed: u64,
    shared: Vec<LayerFile>,
    heads: Vec<HeadFile>,
}

impl From<&MultiHeadNetwork> for MultiHeadFile {
    fn from(net: &MultiHeadNetwork) -> Self {
        MultiHeadFile {
            format: MULTIHEAD_FORMAT.into(),
            version: FORMAT_VERSION,
            shared_dims: net.shared_dims.clone(),
            activation: Activation::Relu,
            seed: net.seed,
            shared: net.shared.iter().map(LayerFile::from).collect(),
            heads: net
                .heads
                .iter()
                .zip(&net.languages)
                .map(|(h, &language)| HeadFile {
                    name: format!("lang{language}"),
                    language,
                    layer: LayerFile::from(h),
                })
                .collect(),
        }
    }
}

impl MultiHeadFile {
    fn into_network(self) -> Result<MultiHeadNetwork> {
        if self.format != MULTIHEAD_FORMAT || self.version != FORMAT_VERSION {
            return Err(Error::format(
                "multi-head model",
                format!("unsupported format {:?} version {}", self.format, self.version),
            ));
        }
        let shared = self
            .shared
            .into_iter()
            .map(LayerFile::into_dense)
            .collect::<Result<Vec<_>>>()?;
        let mut languages = Vec::new();
        let mut heads = Vec::new();
        for h in self.heads {
            languages.push(h.language);
            heads.push(h.layer.into_dense()?);
        }
        let net = MultiHeadNetwork::from_parts(shared, heads, languages, self.seed)?;
        if net.shared_dims != self.shared_dims {
            return Err(Error::format("multi-head model", "shared_dims disagree with layer shapes"));
        }
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::{LabelInventory, LabelMap, Provenance};

    #[test]
    fn init_rules() {
        let a = init_mtdnn(&[4, 8], &[3, 5], 7).unwrap();
        assert_eq!(a, init_mtdnn(&[4, 8], &[3, 5], 7).unwrap());
        assert!(matches!(init_mtdnn(&[4, 8], &[], 7), Err(Error::InvalidArchitecture(_))));
        assert!(matches!(init_mtdnn(&[], &[3], 7), Err(Error::InvalidArchitecture(_))));
        assert!(matches!(init_mtdnn(&[4, 0], &[3], 7), Err(Error::InvalidArchitecture(_))));
        // a head's weights do not depend on how many heads follow it
        let b = init_mtdnn(&[4, 8], &[3, 5, 2], 7).unwrap();
        assert_eq!(a.heads()[1], b.heads()[1]);
        assert_eq!(a.shared_layers(), b.shared_layers());
    }

    #[test]
    fn single_targets() {
        let t = make_targets_single(1, 0, &[3, 2]).unwrap();
        assert_eq!(t.dense(), vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0]]);
        let t = make_targets_single(0, 1, &[3, 2]).unwrap();
        assert_eq!(t.dense(), vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0]]);
        assert!(matches!(make_targets_single(2, 1, &[3, 2]), Err(Error::LabelRange { .. })));
        assert!(matches!(make_targets_single(0, 2, &[3, 2]), Err(Error::Range { .. })));
    }

    fn two_language_maps() -> MapSet {
        let i0 = LabelInventory::senones(0, 3).unwrap();
        let i1 = LabelInventory::senones(1, 4).unwrap();
        let mut set = MapSet::new(vec![0, 1]);
        set.insert(0, 0, LabelMap::identity(i0)).unwrap();
        set.insert(1, 1, LabelMap::identity(i1)).unwrap();
        set.insert(0, 1, LabelMap::new(i1, i0, vec![0, 0, 1, 2], Provenance::DataDrivenSenone).unwrap())
            .unwrap();
        set.insert(1, 0, LabelMap::new(i0, i1, vec![3, 2, 1], Provenance::DataDrivenSenone).unwrap())
            .unwrap();
        set
    }

    #[test]
    fn mapped_targets() {
        let maps = two_language_maps();
        let t = make_targets_mapped(2, 1, &maps, &[3, 4]).unwrap();
        assert_eq!(t.dense(), vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]]);

        let mut partial = MapSet::new(vec![0, 1]);
        partial.insert(1, 1, LabelMap::identity(LabelInventory::senones(1, 4).unwrap())).unwrap();
        assert!(matches!(
            make_targets_mapped(2, 1, &partial, &[3, 4]),
            Err(Error::IncompleteMapSet { .. })
        ));
    }

    #[test]
    fn mapped_with_one_language_equals_single() {
        let mut maps = MapSet::new(vec![0]);
        maps.insert(0, 0, LabelMap::identity(LabelInventory::senones(0, 3).unwrap())).unwrap();
        let a = make_targets_mapped(2, 0, &maps, &[3]).unwrap();
        let b = make_targets_single(2, 0, &[3]).unwrap();
        assert_eq!(a.hot, b.hot);
    }

    #[test]
    fn loss_values() {
        let half = Posterior { probs: vec![0.5, 0.5] };
        let other = Posterior { probs: vec![0.9, 0.1] };
        let t = make_targets_single(0, 0, &[2, 2]).unwrap();
        let l = mt_loss(&[half.clone(), other], &t).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);

        let t = TargetAssignment {
            owner: 0,
            mode: LossMode::Mapped,
            hot: vec![Some(0), Some(1)],
            sizes: vec![2, 2],
        };
        let l = mt_loss(&[half.clone(), half.clone()], &t).unwrap();
        assert!((l - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);

        let short = Posterior { probs: vec![1.0] };
        assert!(matches!(mt_loss(&[half, short], &t), Err(Error::Shape { .. })));
    }

    #[test]
    fn prune_errors_and_single_head() {
        let net = init_mtdnn(&[3, 4], &[2], 1).unwrap();
        assert!(matches!(prune(&net, 3), Err(Error::Range { .. })));
        let p = prune(&net, 0).unwrap();
        assert_eq!(p.layers()[0], net.shared_layers()[0]);
        assert_eq!(p.layers()[1], net.heads()[0]);
        assert_eq!(p.layer_dims(), &[3, 4, 2]);
    }

    #[test]
    fn train_rejects_unknown_language() {
        let mut net = init_mtdnn(&[2, 3], &[2, 2], 1).unwrap();
        let frames = FrameSet::from_rows(&[vec![0.0, 1.0]], &[0], 5).unwrap();
        assert!(matches!(
            train_mtdnn(&mut net, &frames, &MtTrainConfig::default(), None),
            Err(Error::UnknownLanguage(5))
        ));
        let cfg = MtTrainConfig {
            loss_mode: LossMode::Mapped,
            ..MtTrainConfig::default()
        };
        let frames = FrameSet::from_rows(&[vec![0.0, 1.0]], &[0], 0).unwrap();
        assert!(matches!(train_mtdnn(&mut net, &frames, &cfg, None), Err(Error::Config(_))));
    }

    #[test]
    fn finetune_zero_epochs_is_noop() {
        let mut net = crate::nnet::init_network(&[2, 3], 0).unwrap();
        let before = net.clone();
        let frames = FrameSet::from_rows(&[vec![0.0, 1.0]], &[1], 0).unwrap();
        let cfg = FinetuneConfig {
            epochs: 0,
            ..FinetuneConfig::default()
        };
        assert!(finetune(&mut net, &frames, &cfg).unwrap().epochs.is_empty());
        assert_eq!(net, before);
    }

    #[test]
    fn finetune_defaults() {
        let mut net = crate::nnet::init_network(&[2, 3], 0).unwrap();
        let frames = FrameSet::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[1, 2], 0).unwrap();
        let log = finetune(&mut net, &frames, &FinetuneConfig::default()).unwrap();
        assert_eq!(log.epochs.len(), 5);
        assert!(log.lrs().iter().all(|&lr| lr == 0.0008));
    }
}
