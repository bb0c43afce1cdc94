//! Cross-language senone and phone mapping for low-resource acoustic models.
//!
//! The crate trains small feed-forward classifiers over acoustic-like
//! frames, derives label maps between languages from their confusion
//! statistics, and trains shared-hidden-layer networks with one output head
//! per language.

pub mod corpus;
pub mod error;
pub mod experiment;
pub mod frames;
pub mod mapping;
pub mod multitask;
pub mod nnet;

pub use error::{Error, Result};
pub use frames::{Frame, FrameRef, FrameSet};
