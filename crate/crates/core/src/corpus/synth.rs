//! Seeded synthetic multi-language corpora.
//!
//! Every language has the same number of phones. A fraction of them are drawn
//! from a pool of common phone prototypes used by all languages; the rest are
//! private to the language. A prototype is a phone center plus one offset per
//! senone, so a common phone has the same senone sub-clusters in every
//! language. Frames are senone centers plus isotropic Gaussian noise.
//!
//! Phone ids and senone ids are shuffled independently per language, so equal
//! numeric labels in two languages mean nothing. The generator returns the
//! true cross-language correspondence alongside the corpus.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{LanguageInfo, MultiCorpus};
use crate::error::{Error, Result};
use crate::frames::FrameSet;
use crate::mapping::{LabelInventory, LabelMap, Provenance, SenoneToPhoneTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub num_languages: usize,
    pub feature_dim: usize,
    pub phones_per_language: usize,
    pub senones_per_phone: usize,
    /// Fraction of each language's phones taken from the common pool.
    pub shared_phone_fraction: f64,
    pub frames_per_senone: usize,
    /// Standard deviation of the per-dimension frame noise.
    pub cluster_spread: f64,
    /// Standard deviation of the per-dimension senone offset from its phone center.
    pub senone_offset: f64,
    pub frames_per_utterance: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            num_languages: 3,
            feature_dim: 20,
            phones_per_language: 12,
            senones_per_phone: 3,
            shared_phone_fraction: 0.9,
            frames_per_senone: 300,
            cluster_spread: 0.5,
            senone_offset: 0.35,
            frames_per_utterance: 30,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("num_languages", self.num_languages),
            ("feature_dim", self.feature_dim),
            ("phones_per_language", self.phones_per_language),
            ("senones_per_phone", self.senones_per_phone),
            ("frames_per_senone", self.frames_per_senone),
            ("frames_per_utterance", self.frames_per_utterance),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Spec(format!("{name} must be >= 1")));
        }
        if !(0.0..=1.0).contains(&self.shared_phone_fraction) {
            return Err(Error::Spec(format!(
                "shared_phone_fraction must be in [0, 1], got {}",
                self.shared_phone_fraction
            )));
        }
        if !(self.cluster_spread > 0.0 && self.cluster_spread.is_finite()) {
            return Err(Error::Spec(format!("cluster_spread must be > 0, got {}", self.cluster_spread)));
        }
        if !(self.senone_offset >= 0.0 && self.senone_offset.is_finite()) {
            return Err(Error::Spec(format!("senone_offset must be >= 0, got {}", self.senone_offset)));
        }
        Ok(())
    }

    pub fn shared_phone_count(&self) -> usize {
        (self.shared_phone_fraction * self.phones_per_language as f64).round() as usize
    }
}

/// Where each phone and senone of every language came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthTruth {
    /// `phone_origin[lang][phone]`: common prototype index, or `None` for a
    /// private phone.
    pub phone_origin: Vec<Vec<Option<usize>>>,
    /// `senone_origin[lang][senone]`: (prototype, sub-cluster) for senones of
    /// common phones.
    pub senone_origin: Vec<Vec<Option<(usize, usize)>>>,
    /// `phone_centers[lang][phone]`.
    pub phone_centers: Vec<Vec<Vec<f64>>>,
}

impl SynthTruth {
    fn correspondence<T: PartialEq + Copy>(src: &[Option<T>], tgt: &[Option<T>]) -> Vec<(usize, usize)> {
        src.iter()
            .enumerate()
            .filter_map(|(s, origin)| {
                let origin = (*origin)?;
                tgt.iter().position(|o| *o == Some(origin)).map(|t| (s, t))
            })
            .collect()
    }

    /// True (source phone, target phone) pairs, ordered by source phone.
    pub fn phone_correspondence(&self, source: usize, target: usize) -> Vec<(usize, usize)> {
        Self::correspondence(&self.phone_origin[source], &self.phone_origin[target])
    }

    /// True (source senone, target senone) pairs, ordered by source senone.
    pub fn senone_correspondence(&self, source: usize, target: usize) -> Vec<(usize, usize)> {
        Self::correspondence(&self.senone_origin[source], &self.senone_origin[target])
    }

    /// Total phone map built from generator knowledge: common phones map to
    /// their counterpart, private phones to the target phone with the nearest
    /// center.
    pub fn knowledge_phone_map(&self, source: usize, target: usize) -> Result<LabelMap> {
        let truth = self.phone_correspondence(source, target);
        let src_centers = &self.phone_centers[source];
        let tgt_centers = &self.phone_centers[target];
        let table = (0..src_centers.len())
            .map(|s| {
                truth.iter().find(|(a, _)| *a == s).map_or_else(
                    || {
                        let dist = |t: usize| -> f64 {
                            src_centers[s]
                                .iter()
                                .zip(&tgt_centers[t])
                                .map(|(a, b)| (a - b) * (a - b))
                                .sum()
                        };
                        (0..tgt_centers.len())
                            .min_by(|&a, &b| dist(a).total_cmp(&dist(b)))
                            .unwrap()
                    },
                    |&(_, t)| t,
                )
            })
            .collect();
        LabelMap::new(
            LabelInventory::phones(source, src_centers.len())?,
            LabelInventory::phones(target, tgt_centers.len())?,
            table,
            Provenance::Manual,
        )
    }
}

struct Prototype {
    center: Vec<f64>,
    offsets: Vec<Vec<f64>>,
}

impl Prototype {
    fn draw<R: Rng>(dim: usize, senones: usize, offset: &Normal<f64>, rng: &mut R) -> Self {
        let center = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let offsets = (0..senones)
            .map(|_| (0..dim).map(|_| offset.sample(rng)).collect())
            .collect();
        Prototype { center, offsets }
    }
}

/// Generates an unsplit corpus and its ground truth. Identical specs give
/// identical output.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<(MultiCorpus, SynthTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let offset = Normal::new(0.0, spec.senone_offset).map_err(|e| Error::Spec(e.to_string()))?;
    let noise = Normal::new(0.0, spec.cluster_spread).map_err(|e| Error::Spec(e.to_string()))?;
    let (d, p, k) = (spec.feature_dim, spec.phones_per_language, spec.senones_per_phone);
    let n_shared = spec.shared_phone_count();

    let common: Vec<Prototype> = (0..n_shared)
        .map(|_| Prototype::draw(d, k, &offset, &mut rng))
        .collect();

    let mut languages = Vec::with_capacity(spec.num_languages);
    let mut truth = SynthTruth {
        phone_origin: Vec::new(),
        senone_origin: Vec::new(),
        phone_centers: Vec::new(),
    };
    let total = spec.num_languages * p * k * spec.frames_per_senone;
    let mut frames = FrameSet::with_capacity(d, total);
    let mut next_utterance = 0u32;

    for lang in 0..spec.num_languages {
        let private: Vec<Prototype> = (n_shared..p)
            .map(|_| Prototype::draw(d, k, &offset, &mut rng))
            .collect();
        // slot i < n_shared is common prototype i; the rest are private
        let mut phone_of_slot: Vec<usize> = (0..p).collect();
        phone_of_slot.shuffle(&mut rng);
        let mut senone_of_slot: Vec<usize> = (0..p * k).collect();
        senone_of_slot.shuffle(&mut rng);

        let proto = |slot: usize| -> &Prototype {
            if slot < n_shared {
                &common[slot]
            } else {
                &private[slot - n_shared]
            }
        };

        let mut g = vec![0; p * k];
        let mut phone_origin = vec![None; p];
        let mut senone_origin = vec![None; p * k];
        let mut centers = vec![Vec::new(); p];
        for slot in 0..p {
            let phone = phone_of_slot[slot];
            centers[phone] = proto(slot).center.clone();
            if slot < n_shared {
                phone_origin[phone] = Some(slot);
            }
            for sub in 0..k {
                let senone = senone_of_slot[slot * k + sub];
                g[senone] = phone;
                if slot < n_shared {
                    senone_origin[senone] = Some((slot, sub));
                }
            }
        }

        let mut lang_frames: Vec<(usize, Vec<f64>)> = Vec::with_capacity(p * k * spec.frames_per_senone);
        for slot in 0..p {
            let pr = proto(slot);
            for sub in 0..k {
                let senone = senone_of_slot[slot * k + sub];
                for _ in 0..spec.frames_per_senone {
                    let x = pr
                        .center
                        .iter()
                        .zip(&pr.offsets[sub])
                        .map(|(c, o)| c + o + noise.sample(&mut rng))
                        .collect();
                    lang_frames.push((senone, x));
                }
            }
        }
        lang_frames.shuffle(&mut rng);
        for chunk in lang_frames.chunks(spec.frames_per_utterance) {
            for (senone, x) in chunk {
                frames.push(x, lang, *senone, next_utterance)?;
            }
            next_utterance += 1;
        }

        languages.push(LanguageInfo {
            name: format!("lang{lang}"),
            g: SenoneToPhoneTable::new(lang, p, g)?,
        });
        truth.phone_origin.push(phone_origin);
        truth.senone_origin.push(senone_origin);
        truth.phone_centers.push(centers);
    }

    Ok((MultiCorpus::new(languages, frames)?, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthSpec {
        SynthSpec {
            num_languages: 2,
            feature_dim: 4,
            phones_per_language: 5,
            senones_per_phone: 2,
            frames_per_senone: 7,
            frames_per_utterance: 4,
            seed: 42,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn deterministic() {
        let (a, ta) = generate_synthetic(&small()).unwrap();
        let (b, tb) = generate_synthetic(&small()).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        let (c, _) = generate_synthetic(&SynthSpec { seed: 43, ..small() }).unwrap();
        assert_ne!(a.frames(), c.frames());
    }

    #[test]
    fn sizes_and_tables() {
        let (c, truth) = generate_synthetic(&small()).unwrap();
        assert_eq!(c.num_languages(), 2);
        assert_eq!(c.frames().len(), 2 * 5 * 2 * 7);
        for lang in 0..2 {
            let g = c.g(lang).unwrap();
            assert_eq!(g.senone_count(), 10);
            for phone in 0..5 {
                assert_eq!(g.senones_of(phone).count(), 2);
            }
        }
        // round(0.9 * 5) = 5 common phones (4.5 rounds away from zero)
        assert_eq!(truth.phone_correspondence(0, 1).len(), 5);
        assert_eq!(truth.senone_correspondence(1, 0).len(), 10);
    }

    #[test]
    fn correspondence_is_consistent_with_g() {
        let (c, truth) = generate_synthetic(&small()).unwrap();
        let phones: std::collections::HashMap<usize, usize> = truth.phone_correspondence(1, 0).into_iter().collect();
        for (s, t) in truth.senone_correspondence(1, 0) {
            assert_eq!(phones[&c.g(1).unwrap().phone(s)], c.g(0).unwrap().phone(t));
        }
    }

    #[test]
    fn no_sharing_means_no_correspondence() {
        let spec = SynthSpec {
            shared_phone_fraction: 0.0,
            ..small()
        };
        let (_, truth) = generate_synthetic(&spec).unwrap();
        assert!(truth.phone_correspondence(0, 1).is_empty());
        assert!(truth.senone_correspondence(0, 1).is_empty());
        let manual = truth.knowledge_phone_map(0, 1).unwrap();
        assert_eq!(manual.table().len(), 5);
    }

    #[test]
    fn invalid_specs() {
        for spec in [
            SynthSpec { num_languages: 0, ..small() },
            SynthSpec { shared_phone_fraction: 1.5, ..small() },
            SynthSpec { cluster_spread: 0.0, ..small() },
            SynthSpec { frames_per_senone: 0, ..small() },
        ] {
            assert!(matches!(generate_synthetic(&spec), Err(Error::Spec(_))));
        }
    }
}
