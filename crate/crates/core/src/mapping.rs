//! Cross-task label mapping.
//!
//! A target-language network labels every frame of a source language. The
//! resulting confusion counts, indexed by (source alignment label, predicted
//! target label), give an empirical conditional distribution per source label;
//! the map sends each source label to its most frequently predicted target
//! label. Collapsing both axes of the counts through senone-to-phone tables
//! yields the same construction at phone level.
//!
//! Maps are stored as plain text, one `source target` pair per line.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frames::FrameSet;
use crate::nnet::{argmax_lowest, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Senone,
    Phone,
}

/// Label set `0..size` of one task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabelInventory {
    pub task: usize,
    pub size: usize,
    pub kind: LabelKind,
}

impl LabelInventory {
    pub fn new(task: usize, size: usize, kind: LabelKind) -> Result<Self> {
        if size == 0 {
            return Err(Error::Inventory(format!("task {task} has an empty {kind:?} inventory")));
        }
        Ok(LabelInventory { task, size, kind })
    }

    pub fn senones(task: usize, size: usize) -> Result<Self> {
        Self::new(task, size, LabelKind::Senone)
    }

    pub fn phones(task: usize, size: usize) -> Result<Self> {
        Self::new(task, size, LabelKind::Phone)
    }

    fn check(&self, label: usize) -> Result<()> {
        if label >= self.size {
            return Err(Error::LabelRange {
                label,
                size: self.size,
            });
        }
        Ok(())
    }
}

/// Count matrix of (source label, predicted target label) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionCounts {
    source: LabelInventory,
    target: LabelInventory,
    counts: Vec<u64>,
}

impl ConfusionCounts {
    pub fn zeros(source: LabelInventory, target: LabelInventory) -> Self {
        ConfusionCounts {
            source,
            target,
            counts: vec![0; source.size * target.size],
        }
    }

    /// Builds counts from a row-major matrix of shape (source, target).
    pub fn from_matrix(source: LabelInventory, target: LabelInventory, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != source.size * target.size {
            return Err(Error::shape(source.size * target.size, counts.len(), "confusion matrix"));
        }
        Ok(ConfusionCounts { source, target, counts })
    }

    /// Tallies `(source label, predicted target label)` pairs.
    pub fn from_pairs(
        source: LabelInventory,
        target: LabelInventory,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut counts = Self::zeros(source, target);
        for (s, t) in pairs {
            counts.add(s, t)?;
        }
        Ok(counts)
    }

    pub fn add(&mut self, source_label: usize, target_label: usize) -> Result<()> {
        self.source.check(source_label)?;
        self.target.check(target_label)?;
        self.counts[source_label * self.target.size + target_label] += 1;
        Ok(())
    }

    /// Adds another shard's counts.
    pub fn merge(&mut self, other: &ConfusionCounts) -> Result<()> {
        if self.source != other.source || self.target != other.target {
            return Err(Error::Inventory("cannot merge counts over different inventories".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    pub fn source(&self) -> LabelInventory {
        self.source
    }

    pub fn target(&self) -> LabelInventory {
        self.target
    }

    pub fn get(&self, source_label: usize, target_label: usize) -> u64 {
        self.counts[source_label * self.target.size + target_label]
    }

    pub fn row(&self, source_label: usize) -> &[u64] {
        let n = self.target.size;
        &self.counts[source_label * n..(source_label + 1) * n]
    }

    pub fn row_total(&self, source_label: usize) -> u64 {
        self.row(source_label).iter().sum()
    }

    pub fn matrix(&self) -> &[u64] {
        &self.counts
    }

    /// Source labels with no counted frames.
    pub fn unobserved(&self) -> Vec<usize> {
        (0..self.source.size).filter(|&r| self.row_total(r) == 0).collect()
    }

    /// Row-normalized conditional distribution `p(target | source)`; `None`
    /// for rows without frames.
    pub fn conditional(&self, source_label: usize) -> Option<Vec<f64>> {
        let total = self.row_total(source_label);
        (total > 0).then(|| {
            self.row(source_label)
                .iter()
                .map(|&c| c as f64 / total as f64)
                .collect()
        })
    }

    /// Aggregates rows through `g_source` and columns through `g_target`.
    pub fn collapse(&self, g_source: &SenoneToPhoneTable, g_target: &SenoneToPhoneTable) -> Result<ConfusionCounts> {
        g_source.covers(self.source)?;
        g_target.covers(self.target)?;
        let source = LabelInventory::phones(self.source.task, g_source.phone_count())?;
        let target = LabelInventory::phones(self.target.task, g_target.phone_count())?;
        let mut out = ConfusionCounts::zeros(source, target);
        for r in 0..self.source.size {
            let pr = g_source.phone(r);
            for (c, &n) in self.row(r).iter().enumerate() {
                out.counts[pr * target.size + g_target.phone(c)] += n;
            }
        }
        Ok(out)
    }
}

/// Counts how often `target_net` predicts each target label for frames of each
/// source alignment label. Frames are scored in parallel shards whose counts
/// are summed.
pub fn accumulate_confusion(
    target_net: &Network,
    source_frames: &FrameSet,
    target: LabelInventory,
    source: LabelInventory,
) -> Result<ConfusionCounts> {
    if target_net.output_dim() != target.size {
        return Err(Error::shape(target.size, target_net.output_dim(), "target network outputs"));
    }
    if source_frames.is_empty() {
        return Ok(ConfusionCounts::zeros(source, target));
    }
    if source_frames.dim() != target_net.input_dim() {
        return Err(Error::shape(target_net.input_dim(), source_frames.dim(), "source features"));
    }
    source_frames.check_labels(source.size)?;

    const SHARD: usize = 512;
    let shards: Vec<ConfusionCounts> = (0..source_frames.len())
        .into_par_iter()
        .step_by(SHARD)
        .map(|start| {
            let end = (start + SHARD).min(source_frames.len());
            let mut counts = ConfusionCounts::zeros(source, target);
            for i in start..end {
                let predicted = target_net.predict(source_frames.features(i))?;
                counts.add(source_frames.label(i), predicted)?;
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;
    let mut total = ConfusionCounts::zeros(source, target);
    for shard in &shards {
        total.merge(shard)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    DataDrivenSenone,
    DataDrivenPhone,
    Manual,
    Identity,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::DataDrivenSenone => "data-driven-senone",
            Provenance::DataDrivenPhone => "data-driven-phone",
            Provenance::Manual => "manual",
            Provenance::Identity => "identity",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        [
            Provenance::DataDrivenSenone,
            Provenance::DataDrivenPhone,
            Provenance::Manual,
            Provenance::Identity,
        ]
        .into_iter()
        .find(|p| p.name() == name)
    }
}

/// Total function from one inventory onto another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    source: LabelInventory,
    target: LabelInventory,
    table: Vec<usize>,
    provenance: Provenance,
}

impl LabelMap {
    pub fn new(
        source: LabelInventory,
        target: LabelInventory,
        table: Vec<usize>,
        provenance: Provenance,
    ) -> Result<Self> {
        if table.len() < source.size {
            return Err(Error::IncompleteMap { label: table.len() });
        }
        if table.len() > source.size {
            return Err(Error::shape(source.size, table.len(), "map table"));
        }
        for &t in &table {
            target.check(t)?;
        }
        Ok(LabelMap {
            source,
            target,
            table,
            provenance,
        })
    }

    pub fn identity(inventory: LabelInventory) -> Self {
        LabelMap {
            source: inventory,
            target: inventory,
            table: (0..inventory.size).collect(),
            provenance: Provenance::Identity,
        }
    }

    pub fn source(&self) -> LabelInventory {
        self.source
    }

    pub fn target(&self) -> LabelInventory {
        self.target
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn get(&self, label: usize) -> Result<usize> {
        self.table.get(label).copied().ok_or(Error::LabelRange {
            label,
            size: self.source.size,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.source.size == self.target.size && self.table.iter().enumerate().all(|(i, &t)| i == t)
    }

    /// `next ∘ self`: apply `self` first, then `next`.
    pub fn then(&self, next: &LabelMap) -> Result<LabelMap> {
        if self.target.size != next.source.size {
            return Err(Error::Inventory(format!(
                "cannot compose: map target has {} labels, next map source has {}",
                self.target.size, next.source.size
            )));
        }
        let table = self.table.iter().map(|&t| next.table[t]).collect();
        let provenance = if next.provenance == Provenance::Identity {
            self.provenance
        } else {
            next.provenance
        };
        LabelMap::new(self.source, next.target, table, provenance)
    }

    /// Text form: a provenance comment followed by one pair per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# provenance: {}\n# source task {} ({} labels) -> target task {} ({} labels)\n",
            self.provenance.name(),
            self.source.task,
            self.source.size,
            self.target.task,
            self.target.size
        );
        for (s, t) in self.table.iter().enumerate() {
            out.push_str(&format!("{s} {t}\n"));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Parses map text, checking completeness, range and duplicates.
    pub fn parse(
        text: &str,
        origin: &Path,
        source: LabelInventory,
        target: LabelInventory,
        default_provenance: Provenance,
    ) -> Result<LabelMap> {
        let mut provenance = default_provenance;
        let mut table: Vec<Option<usize>> = vec![None; source.size];
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if let Some(p) = line.trim().strip_prefix("# provenance:").and_then(|p| Provenance::from_name(p.trim())) {
                provenance = p;
            }
            let Some((s, t)) = parse_pair(line, origin, lineno)? else {
                continue;
            };
            if s >= source.size {
                return Err(Error::LabelRange { label: s, size: source.size });
            }
            target.check(t)?;
            if table[s].is_some() {
                return Err(Error::DuplicateEntry { label: s, line: lineno });
            }
            table[s] = Some(t);
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(label, t)| t.ok_or(Error::IncompleteMap { label }))
            .collect::<Result<Vec<_>>>()?;
        LabelMap::new(source, target, table, provenance)
    }
}

impl fmt::Display for LabelMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// One `source target` pair, or `None` for blank and comment lines.
fn parse_pair(line: &str, origin: &Path, lineno: usize) -> Result<Option<(usize, usize)>> {
    let content = line.split('#').next().unwrap_or("").trim();
    if content.is_empty() {
        return Ok(None);
    }
    let mut fields = content.split_whitespace();
    let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
        return Err(Error::parse(origin, lineno, format!("expected two label ids, got {content:?}")));
    };
    let parse = |v: &str| {
        v.parse::<usize>()
            .map_err(|_| Error::parse(origin, lineno, format!("not a label id: {v:?}")))
    };
    Ok(Some((parse(a)?, parse(b)?)))
}

/// Reads every pair of a map file without requiring totality. Used for
/// partial correspondences such as generator ground truth.
pub fn read_pairs(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if let Some(pair) = parse_pair(line, path, idx + 1)? {
            pairs.push(pair);
        }
    }
    Ok(pairs)
}

/// Writes a (possibly partial) list of pairs in map-file format.
pub fn write_pairs(path: &Path, header: &str, pairs: &[(usize, usize)]) -> Result<()> {
    let mut out = String::new();
    for line in header.lines() {
        out.push_str(&format!("# {line}\n"));
    }
    for (s, t) in pairs {
        out.push_str(&format!("{s} {t}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Loads a hand-written map file.
pub fn load_manual_map(path: &Path, source: LabelInventory, target: LabelInventory) -> Result<LabelMap> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut map = LabelMap::parse(&text, path, source, target, Provenance::Manual)?;
    map.provenance = Provenance::Manual;
    Ok(map)
}

fn argmax_rows(counts: &ConfusionCounts, provenance: Provenance) -> LabelMap {
    let unobserved = counts.unobserved();
    if !unobserved.is_empty() {
        log::warn!(
            "{} of {} source labels of task {} were never observed; mapping them to target label 0",
            unobserved.len(),
            counts.source.size,
            counts.source.task
        );
    }
    let table = (0..counts.source.size)
        .map(|r| argmax_lowest(counts.row(r)))
        .collect();
    LabelMap {
        source: counts.source,
        target: counts.target,
        table,
        provenance,
    }
}

/// Maps each source label to its most frequently predicted target label.
/// Ties go to the lowest target label; rows without frames map to label 0.
pub fn senone_map(counts: &ConfusionCounts) -> LabelMap {
    // argmax of raw counts equals argmax of the row-normalized distribution
    argmax_rows(counts, Provenance::DataDrivenSenone)
}

/// Phone-level map from senone-level counts.
pub fn phone_map(
    counts: &ConfusionCounts,
    g_source: &SenoneToPhoneTable,
    g_target: &SenoneToPhoneTable,
) -> Result<LabelMap> {
    let phone_counts = counts.collapse(g_source, g_target)?;
    Ok(argmax_rows(&phone_counts, Provenance::DataDrivenPhone))
}

/// Rewrites every frame label through `map`. Features, languages, utterances
/// and order are untouched.
pub fn apply_map(frames: &FrameSet, map: &LabelMap) -> Result<FrameSet> {
    let labels = frames
        .labels()
        .iter()
        .map(|&l| map.get(l))
        .collect::<Result<Vec<_>>>()?;
    frames.with_labels(labels)
}

/// Senone-to-phone collapse table of one task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SenoneToPhoneTable {
    task: usize,
    phones: usize,
    table: Vec<usize>,
}

impl SenoneToPhoneTable {
    pub fn new(task: usize, phones: usize, table: Vec<usize>) -> Result<Self> {
        if phones == 0 {
            return Err(Error::IncompleteTable(format!("task {task} has no phones")));
        }
        if let Some(&p) = table.iter().find(|&&p| p >= phones) {
            return Err(Error::LabelRange { label: p, size: phones });
        }
        Ok(SenoneToPhoneTable { task, phones, table })
    }

    pub fn task(&self) -> usize {
        self.task
    }

    pub fn phone_count(&self) -> usize {
        self.phones
    }

    pub fn senone_count(&self) -> usize {
        self.table.len()
    }

    pub fn phone(&self, senone: usize) -> usize {
        self.table[senone]
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    /// Senones that collapse onto `phone`.
    pub fn senones_of(&self, phone: usize) -> impl Iterator<Item = usize> + '_ {
        self.table
            .iter()
            .enumerate()
            .filter(move |(_, &p)| p == phone)
            .map(|(s, _)| s)
    }

    pub fn covers(&self, inventory: LabelInventory) -> Result<()> {
        if self.table.len() < inventory.size {
            return Err(Error::IncompleteTable(format!(
                "senone-to-phone table of task {} covers {} senones, inventory has {}",
                self.task,
                self.table.len(),
                inventory.size
            )));
        }
        Ok(())
    }

    pub fn phone_inventory(&self) -> LabelInventory {
        LabelInventory {
            task: self.task,
            size: self.phones,
            kind: LabelKind::Phone,
        }
    }
}

/// All-pairs senone maps between L languages. Entry `(l, m)` maps labels of
/// language `m` onto labels of language `l`; diagonal entries are identities.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSet {
    languages: Vec<usize>,
    maps: Vec<Option<LabelMap>>,
}

impl MapSet {
    pub fn new(languages: Vec<usize>) -> Self {
        let n = languages.len();
        MapSet {
            languages,
            maps: vec![None; n * n],
        }
    }

    pub fn languages(&self) -> &[usize] {
        &self.languages
    }

    fn index_of(&self, language: usize) -> Result<usize> {
        self.languages
            .iter()
            .position(|&l| l == language)
            .ok_or(Error::UnknownLanguage(language))
    }

    /// Stores the map from language `source` labels onto language `target` labels.
    pub fn insert(&mut self, target: usize, source: usize, map: LabelMap) -> Result<()> {
        let (t, s) = (self.index_of(target)?, self.index_of(source)?);
        let n = self.languages.len();
        self.maps[t * n + s] = Some(map);
        Ok(())
    }

    pub fn get(&self, target: usize, source: usize) -> Result<&LabelMap> {
        let (t, s) = (self.index_of(target)?, self.index_of(source)?);
        self.maps[t * self.languages.len() + s]
            .as_ref()
            .ok_or(Error::IncompleteMapSet {
                source_lang: source,
                target_lang: target,
            })
    }

    pub fn len(&self) -> usize {
        self.maps.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_complete(&self) -> bool {
        self.maps.iter().all(Option::is_some)
    }

    /// Writes one map file per entry plus `manifest.txt`, whose lines are
    /// `source_task target_task file`.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut manifest = String::from("# senmap map set\n# source_task target_task file\n");
        for &target in &self.languages {
            for &source in &self.languages {
                let Ok(map) = self.get(target, source) else {
                    continue;
                };
                let name = format!("map_{source}_to_{target}.txt");
                map.save(&dir.join(&name))?;
                manifest.push_str(&format!("{source} {target} {name}\n"));
            }
        }
        let path = dir.join("manifest.txt");
        std::fs::write(&path, manifest).map_err(|e| Error::io(&path, e))
    }

    /// Reads a manifest written by [`MapSet::save_dir`]. `inventory` gives the
    /// senone inventory of a language id.
    pub fn load_dir(dir: &Path, inventory: impl Fn(usize) -> Result<LabelInventory>) -> Result<MapSet> {
        let manifest = dir.join("manifest.txt");
        let text = std::fs::read_to_string(&manifest).map_err(|e| Error::io(&manifest, e))?;
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let [s, t, file] = fields[..] else {
                return Err(Error::parse(&manifest, idx + 1, "expected `source target file`"));
            };
            let id = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| Error::parse(&manifest, idx + 1, format!("bad task id {v:?}")))
            };
            entries.push((id(s)?, id(t)?, PathBuf::from(file)));
        }
        let mut languages: Vec<usize> = entries.iter().flat_map(|e| [e.0, e.1]).collect();
        languages.sort_unstable();
        languages.dedup();
        let mut set = MapSet::new(languages);
        for (source, target, file) in entries {
            let path = dir.join(file);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let map = LabelMap::parse(
                &text,
                &path,
                inventory(source)?,
                inventory(target)?,
                Provenance::DataDrivenSenone,
            )?;
            set.insert(target, source, map)?;
        }
        Ok(set)
    }
}

/// Builds the full map set: identity on the diagonal, and for `l != m` the
/// senone map obtained by running language `l`'s network over language `m`'s
/// frames.
pub fn all_pairs_senone_maps(
    languages: &[usize],
    nets: &[Network],
    corpora: &[FrameSet],
) -> Result<MapSet> {
    if nets.len() != languages.len() || corpora.len() != languages.len() {
        return Err(Error::shape(languages.len(), nets.len().min(corpora.len()), "networks/corpora per language"));
    }
    let mut set = MapSet::new(languages.to_vec());
    for (l, (&target, net)) in languages.iter().zip(nets).enumerate() {
        let target_inv = LabelInventory::senones(target, net.output_dim())?;
        for (m, &source) in languages.iter().enumerate() {
            let source_inv = LabelInventory::senones(source, nets[m].output_dim())?;
            let map = if l == m {
                LabelMap::identity(target_inv)
            } else {
                senone_map(&accumulate_confusion(net, &corpora[m], target_inv, source_inv)?)
            };
            set.insert(target, source, map)?;
        }
    }
    Ok(set)
}

/// Relabels source frames into the target senone inventory through a phone
/// map. Each frame's source senone is collapsed to its phone and mapped to a
/// target phone; the target network then picks the most probable senone of
/// that phone for the frame (lowest id on ties).
pub fn realign_with_phone_map(
    frames: &FrameSet,
    phone_map: &LabelMap,
    g_source: &SenoneToPhoneTable,
    g_target: &SenoneToPhoneTable,
    target_net: &Network,
) -> Result<FrameSet> {
    if phone_map.source() != g_source.phone_inventory() || phone_map.target() != g_target.phone_inventory() {
        return Err(Error::Inventory(format!(
            "phone map {:?} -> {:?} does not match the senone-to-phone tables",
            phone_map.source(),
            phone_map.target()
        )));
    }
    if target_net.output_dim() != g_target.senone_count() {
        return Err(Error::shape(g_target.senone_count(), target_net.output_dim(), "target network outputs"));
    }
    frames.check_labels(g_source.senone_count())?;
    let candidates: Vec<Vec<usize>> = (0..g_target.phone_count())
        .map(|p| g_target.senones_of(p).collect())
        .collect();
    if let Some(p) = candidates.iter().position(|c| c.is_empty()) {
        return Err(Error::Inventory(format!("target phone {p} has no senones")));
    }
    let labels = (0..frames.len())
        .into_par_iter()
        .map(|i| {
            let phone = phone_map.get(g_source.phone(frames.label(i)))?;
            let post = target_net.forward(frames.features(i))?;
            let cands = &candidates[phone];
            let scores: Vec<f64> = cands.iter().map(|&s| post.probs[s]).collect();
            Ok(cands[argmax_lowest(&scores)])
        })
        .collect::<Result<Vec<_>>>()?;
    frames.with_labels(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nnet::Dense;

    fn inv(task: usize, size: usize) -> LabelInventory {
        LabelInventory::senones(task, size).unwrap()
    }

    #[test]
    fn counting_by_pairs() {
        let c = ConfusionCounts::from_pairs(inv(1, 3), inv(0, 3), [(2, 0), (2, 1), (2, 1)]).unwrap();
        assert_eq!(c.row(2), &[1, 2, 0]);
        assert_eq!(c.row(0), &[0, 0, 0]);
        assert_eq!(c.row(1), &[0, 0, 0]);
        assert_eq!(senone_map(&c).get(2).unwrap(), 1);
    }

    #[test]
    fn confusion_from_network_predictions() {
        // 1-d input, logits (0, x, 2x - 1): x=-1 -> 0, x=0.5 -> 1, x=2 -> 2
        let layer = Dense::from_parts(1, 3, vec![0.0, 1.0, 2.0], vec![0.0, 0.0, -1.0]).unwrap();
        let net = Network::from_layers(vec![layer], 0).unwrap();
        let frames = FrameSet::from_rows(&[vec![-1.0], vec![0.5], vec![0.6]], &[2, 2, 2], 1).unwrap();
        let c = accumulate_confusion(&net, &frames, inv(0, 3), inv(1, 3)).unwrap();
        assert_eq!(c.row(2), &[1, 2, 0]);
        assert_eq!(c.unobserved(), vec![0, 1]);

        let empty = FrameSet::new(1);
        let c = accumulate_confusion(&net, &empty, inv(0, 3), inv(1, 3)).unwrap();
        assert!(c.matrix().iter().all(|&v| v == 0));

        assert!(matches!(
            accumulate_confusion(&net, &frames, inv(0, 4), inv(1, 3)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn tie_and_unobserved_rows() {
        let c = ConfusionCounts::from_matrix(inv(1, 2), inv(0, 3), vec![3, 3, 0, 0, 0, 0]).unwrap();
        let m = senone_map(&c);
        assert_eq!(m.table(), &[0, 0]);
        assert_eq!(m.provenance(), Provenance::DataDrivenSenone);
    }

    #[test]
    fn phone_map_single_class() {
        let c = ConfusionCounts::from_matrix(inv(1, 2), inv(0, 2), vec![5, 0, 0, 5]).unwrap();
        let g = SenoneToPhoneTable::new(0, 1, vec![0, 0]).unwrap();
        let m = phone_map(&c, &g, &g).unwrap();
        assert_eq!(m.table(), &[0]);
    }

    #[test]
    fn phone_map_relabels_through_tables() {
        let c = ConfusionCounts::from_matrix(inv(1, 2), inv(0, 2), vec![4, 0, 0, 6]).unwrap();
        let gs = SenoneToPhoneTable::new(1, 2, vec![0, 1]).unwrap();
        let gt = SenoneToPhoneTable::new(0, 2, vec![1, 0]).unwrap();
        let m = phone_map(&c, &gs, &gt).unwrap();
        assert_eq!(m.table(), &[1, 0]);
        assert_eq!(m.source().kind, LabelKind::Phone);
    }

    #[test]
    fn phone_map_rejects_short_table() {
        let c = ConfusionCounts::zeros(inv(1, 3), inv(0, 2));
        let gs = SenoneToPhoneTable::new(1, 1, vec![0, 0]).unwrap();
        let gt = SenoneToPhoneTable::new(0, 1, vec![0, 0]).unwrap();
        assert!(matches!(phone_map(&c, &gs, &gt), Err(Error::IncompleteTable(_))));
    }

    #[test]
    fn manual_map_parsing() {
        let p = Path::new("mem");
        let m = LabelMap::parse("# header\n0 2\n1 0  # trailing\n\n", p, inv(1, 2), inv(0, 3), Provenance::Manual).unwrap();
        assert_eq!(m.table(), &[2, 0]);
        assert!(matches!(
            LabelMap::parse("0 2\n", p, inv(1, 2), inv(0, 3), Provenance::Manual),
            Err(Error::IncompleteMap { label: 1 })
        ));
        assert!(matches!(
            LabelMap::parse("0 2\n0 1\n1 0\n", p, inv(1, 2), inv(0, 3), Provenance::Manual),
            Err(Error::DuplicateEntry { label: 0, line: 2 })
        ));
        assert!(matches!(
            LabelMap::parse("0 3\n1 0\n", p, inv(1, 2), inv(0, 3), Provenance::Manual),
            Err(Error::LabelRange { label: 3, size: 3 })
        ));
        assert!(matches!(
            LabelMap::parse("0 x\n", p, inv(1, 2), inv(0, 3), Provenance::Manual),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn text_roundtrip_keeps_provenance() {
        let m = LabelMap::new(inv(1, 3), inv(0, 2), vec![1, 0, 1], Provenance::DataDrivenPhone).unwrap();
        let back = LabelMap::parse(&m.to_text(), Path::new("mem"), inv(1, 3), inv(0, 2), Provenance::Manual).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn apply_and_compose() {
        let frames = FrameSet::from_rows(&[vec![1.0], vec![2.0], vec![3.0]], &[0, 1, 0], 1).unwrap();
        let m = LabelMap::new(inv(1, 2), inv(0, 3), vec![2, 0], Provenance::Manual).unwrap();
        let out = apply_map(&frames, &m).unwrap();
        assert_eq!(out.labels(), &[2, 0, 2]);
        assert_eq!(out.feature_buffer(), frames.feature_buffer());
        assert_eq!(apply_map(&frames, &LabelMap::identity(inv(1, 2))).unwrap(), frames);

        let bad = FrameSet::from_rows(&[vec![1.0]], &[5], 1).unwrap();
        assert!(matches!(apply_map(&bad, &m), Err(Error::LabelRange { .. })));

        let m2 = LabelMap::new(inv(0, 3), inv(2, 2), vec![1, 1, 0], Provenance::Manual).unwrap();
        assert_eq!(m.then(&m2).unwrap().table(), &[0, 1]);
    }

    #[test]
    fn map_set_lookup() {
        let mut set = MapSet::new(vec![0, 1]);
        set.insert(0, 0, LabelMap::identity(inv(0, 2))).unwrap();
        assert!(matches!(set.get(0, 1), Err(Error::IncompleteMapSet { source_lang: 1, target_lang: 0 })));
        assert!(matches!(set.get(0, 5), Err(Error::UnknownLanguage(5))));
        assert!(!set.is_complete());
    }
}
