//! Labeled feature frames.
//!
//! A [`FrameSet`] stores frames column-wise: one contiguous row-major feature
//! buffer plus parallel vectors of language ids, senone labels and utterance ids.

use crate::error::{Error, Result};

/// A single labeled frame, owned.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub features: Vec<f64>,
    pub language: usize,
    pub label: usize,
    pub utterance: u32,
}

/// Borrowed view of one frame inside a [`FrameSet`].
#[derive(Debug, Clone, Copy)]
pub struct FrameRef<'a> {
    pub features: &'a [f64],
    pub language: usize,
    pub label: usize,
    pub utterance: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet {
    dim: usize,
    features: Vec<f64>,
    languages: Vec<usize>,
    labels: Vec<usize>,
    utterances: Vec<u32>,
}

impl FrameSet {
    pub fn new(dim: usize) -> Self {
        FrameSet {
            dim,
            features: Vec::new(),
            languages: Vec::new(),
            labels: Vec::new(),
            utterances: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, frames: usize) -> Self {
        FrameSet {
            dim,
            features: Vec::with_capacity(dim * frames),
            languages: Vec::with_capacity(frames),
            labels: Vec::with_capacity(frames),
            utterances: Vec::with_capacity(frames),
        }
    }

    /// Builds a single-language set from feature rows and labels. Utterance
    /// ids are the row indices.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[usize], language: usize) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::shape(rows.len(), labels.len(), "labels per row"));
        }
        let dim = rows.first().map_or(0, Vec::len);
        let mut set = FrameSet::with_capacity(dim, rows.len());
        for (i, (row, &label)) in rows.iter().zip(labels).enumerate() {
            set.push(row, language, label, i as u32)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, features: &[f64], language: usize, label: usize, utterance: u32) -> Result<()> {
        if features.len() != self.dim {
            return Err(Error::shape(self.dim, features.len(), "frame feature dim"));
        }
        self.features.extend_from_slice(features);
        self.languages.push(language);
        self.labels.push(label);
        self.utterances.push(utterance);
        Ok(())
    }

    pub fn push_ref(&mut self, frame: FrameRef<'_>) -> Result<()> {
        self.push(frame.features, frame.language, frame.label, frame.utterance)
    }

    /// Appends every frame of `other`.
    pub fn extend(&mut self, other: &FrameSet) -> Result<()> {
        if other.is_empty() {
            return Ok(());
        }
        if other.dim != self.dim {
            return Err(Error::shape(self.dim, other.dim, "frame feature dim"));
        }
        self.features.extend_from_slice(&other.features);
        self.languages.extend_from_slice(&other.languages);
        self.labels.extend_from_slice(&other.labels);
        self.utterances.extend_from_slice(&other.utterances);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn feature_buffer(&self) -> &[f64] {
        &self.features
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn language(&self, i: usize) -> usize {
        self.languages[i]
    }

    pub fn languages(&self) -> &[usize] {
        &self.languages
    }

    pub fn utterance(&self, i: usize) -> u32 {
        self.utterances[i]
    }

    pub fn utterances(&self) -> &[u32] {
        &self.utterances
    }

    pub fn get(&self, i: usize) -> FrameRef<'_> {
        FrameRef {
            features: self.features(i),
            language: self.languages[i],
            label: self.labels[i],
            utterance: self.utterances[i],
        }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = FrameRef<'_>> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// Returns a copy with labels replaced. Features and all other columns are
    /// carried over untouched.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<FrameSet> {
        if labels.len() != self.len() {
            return Err(Error::shape(self.len(), labels.len(), "relabel length"));
        }
        Ok(FrameSet {
            labels,
            ..self.clone()
        })
    }

    /// Frames for which `keep(i)` holds, in order.
    pub fn filter(&self, mut keep: impl FnMut(FrameRef<'_>) -> bool) -> FrameSet {
        let mut out = FrameSet::new(self.dim);
        for frame in self.iter() {
            if keep(frame) {
                // dims always agree here
                out.push_ref(frame).expect("same dim");
            }
        }
        out
    }

    /// Frames of one language.
    pub fn language_subset(&self, language: usize) -> FrameSet {
        self.filter(|f| f.language == language)
    }

    /// Checks that every label is below `size`.
    pub fn check_labels(&self, size: usize) -> Result<()> {
        match self.labels.iter().find(|&&l| l >= size) {
            Some(&label) => Err(Error::LabelRange { label, size }),
            None => Ok(()),
        }
    }
}
