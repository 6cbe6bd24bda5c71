//! Class-wise ensembling of weakly-supervised segmentation pseudo-labels.
//!
//! Several candidate methods each produce a pseudo-label mask per training
//! image. This crate scores every method per class against ground truth
//! ([`eval`]), picks the strongest method for each foreground class
//! ([`ensemble::select_best`]), and assembles a new mask per image from
//! the winners' class slices, deriving background as whatever no class
//! claimed ([`ensemble::merge_classwise`]). [`synth`] generates corpora
//! with controlled per-class weaknesses and [`report`] renders the tables
//! and the pipeline cost model.

pub mod ensemble;
pub mod error;
pub mod eval;
pub mod fsutil;
pub mod mask_io;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
