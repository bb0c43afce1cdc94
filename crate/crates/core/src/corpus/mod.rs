//! Multi-language frame corpora.
//!
//! A [`MultiCorpus`] holds the frames of every language together with each
//! language's senone inventory and senone-to-phone table, plus an optional
//! utterance-level train/dev/test assignment. Language ids are positions in
//! [`MultiCorpus::languages`].

mod io;
mod synth;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::FrameSet;
use crate::mapping::{apply_map, LabelInventory, LabelMap, SenoneToPhoneTable};

pub use io::CorpusFormat;
pub use synth::{generate_synthetic, SynthSpec, SynthTruth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }

    pub fn from_name(name: &str) -> Option<Split> {
        match name {
            "train" => Some(Split::Train),
            "dev" => Some(Split::Dev),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageInfo {
    pub name: String,
    pub g: SenoneToPhoneTable,
}

impl LanguageInfo {
    pub fn senone_count(&self) -> usize {
        self.g.senone_count()
    }

    pub fn phone_count(&self) -> usize {
        self.g.phone_count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiCorpus {
    languages: Vec<LanguageInfo>,
    frames: FrameSet,
    splits: Option<BTreeMap<u32, Split>>,
}

impl MultiCorpus {
    pub fn new(languages: Vec<LanguageInfo>, frames: FrameSet) -> Result<Self> {
        let corpus = MultiCorpus {
            languages,
            frames,
            splits: None,
        };
        corpus.validate()?;
        Ok(corpus)
    }

    /// Checks label ranges, language ids, table ownership and that no
    /// utterance spans two languages.
    pub fn validate(&self) -> Result<()> {
        if self.languages.is_empty() {
            return Err(Error::Inventory("corpus has no languages".into()));
        }
        for (id, lang) in self.languages.iter().enumerate() {
            if lang.g.task() != id {
                return Err(Error::Inventory(format!(
                    "language {id} carries the senone-to-phone table of task {}",
                    lang.g.task()
                )));
            }
            if lang.senone_count() == 0 {
                return Err(Error::Inventory(format!("language {id} has no senones")));
            }
        }
        let mut owner: BTreeMap<u32, usize> = BTreeMap::new();
        for f in self.frames.iter() {
            let lang = self
                .languages
                .get(f.language)
                .ok_or(Error::UnknownLanguage(f.language))?;
            if f.label >= lang.senone_count() {
                return Err(Error::LabelRange {
                    label: f.label,
                    size: lang.senone_count(),
                });
            }
            if *owner.entry(f.utterance).or_insert(f.language) != f.language {
                return Err(Error::Inventory(format!("utterance {} spans two languages", f.utterance)));
            }
        }
        if let Some(splits) = &self.splits {
            if let Some(u) = owner.keys().find(|u| !splits.contains_key(u)) {
                return Err(Error::Inventory(format!("utterance {u} has no split")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.frames.dim()
    }

    pub fn num_languages(&self) -> usize {
        self.languages.len()
    }

    pub fn languages(&self) -> &[LanguageInfo] {
        &self.languages
    }

    pub fn language(&self, id: usize) -> Result<&LanguageInfo> {
        self.languages.get(id).ok_or(Error::UnknownLanguage(id))
    }

    pub fn inventory(&self, id: usize) -> Result<LabelInventory> {
        LabelInventory::senones(id, self.language(id)?.senone_count())
    }

    pub fn g(&self, id: usize) -> Result<&SenoneToPhoneTable> {
        Ok(&self.language(id)?.g)
    }

    pub fn frames(&self) -> &FrameSet {
        &self.frames
    }

    pub fn splits(&self) -> Option<&BTreeMap<u32, Split>> {
        self.splits.as_ref()
    }

    pub fn set_splits(&mut self, splits: BTreeMap<u32, Split>) -> Result<()> {
        let old = self.splits.replace(splits);
        if let Err(e) = self.validate() {
            self.splits = old;
            return Err(e);
        }
        Ok(())
    }

    pub fn split_of(&self, utterance: u32) -> Option<Split> {
        self.splits.as_ref()?.get(&utterance).copied()
    }

    /// Frames of `language` in `split`. Without split tags every frame
    /// belongs to [`Split::Train`].
    pub fn subset(&self, language: usize, split: Split) -> Result<FrameSet> {
        self.language(language)?;
        Ok(self.frames.filter(|f| {
            f.language == language && self.split_of(f.utterance).unwrap_or(Split::Train) == split
        }))
    }

    /// Sorted utterance ids of `language`.
    pub fn utterances_of(&self, language: usize) -> Vec<u32> {
        let mut utts: Vec<u32> = self
            .frames
            .iter()
            .filter(|f| f.language == language)
            .map(|f| f.utterance)
            .collect();
        utts.sort_unstable();
        utts.dedup();
        utts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            train: 0.8,
            dev: 0.1,
            test: 0.1,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.dev, self.test];
        if parts.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Fraction(format!("fractions must be non-negative, got {parts:?}")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Fraction(format!("fractions sum to {sum}, not 1")));
        }
        Ok(())
    }
}

/// Assigns whole utterances to train/dev/test, separately per language.
/// Split sizes are the rounded cumulative fractions of each language's
/// utterance count.
pub fn split_corpus(corpus: &MultiCorpus, fractions: SplitFractions, seed: u64) -> Result<MultiCorpus> {
    fractions.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut splits = BTreeMap::new();
    for lang in 0..corpus.num_languages() {
        let mut utts = corpus.utterances_of(lang);
        utts.shuffle(&mut rng);
        let n = utts.len() as f64;
        let n_train = (n * fractions.train).round() as usize;
        let n_train_dev = ((n * (fractions.train + fractions.dev)).round() as usize).max(n_train);
        for (i, u) in utts.into_iter().enumerate() {
            let split = if i < n_train {
                Split::Train
            } else if i < n_train_dev {
                Split::Dev
            } else {
                Split::Test
            };
            splits.insert(u, split);
        }
    }
    let mut out = corpus.clone();
    out.set_splits(splits)?;
    Ok(out)
}

/// Relabels every source frame set into the target inventory and appends the
/// target frames unchanged.
pub fn pool_and_relabel(
    sources: &[(FrameSet, LabelMap)],
    target_frames: &FrameSet,
    target_inventory: LabelInventory,
) -> Result<FrameSet> {
    target_frames.check_labels(target_inventory.size)?;
    let total = target_frames.len() + sources.iter().map(|(f, _)| f.len()).sum::<usize>();
    let dim = if target_frames.is_empty() {
        sources.iter().map(|(f, _)| f.dim()).find(|&d| d > 0).unwrap_or(0)
    } else {
        target_frames.dim()
    };
    let mut pooled = FrameSet::with_capacity(dim, total);
    for (frames, map) in sources {
        if map.target() != target_inventory {
            return Err(Error::Inventory(format!(
                "map targets task {} with {} labels, expected task {} with {}",
                map.target().task,
                map.target().size,
                target_inventory.task,
                target_inventory.size
            )));
        }
        if let Some(&label) = frames.labels().iter().find(|&&l| l >= map.source().size) {
            return Err(Error::Inventory(format!(
                "frame label {label} outside the map's source inventory of size {}",
                map.source().size
            )));
        }
        pooled.extend(&apply_map(frames, map)?)?;
    }
    pooled.extend(target_frames)?;
    Ok(pooled)
}
