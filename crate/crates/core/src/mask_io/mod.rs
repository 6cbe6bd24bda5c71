//! Reading and writing class-indexed masks and the corpus manifest.

mod manifest;
mod mask;
mod validate;

pub use manifest::{load_manifest, ClassId, DatasetManifest, ImageRecord};
pub use mask::{decode_mask, load_mask, save_mask, LabelMask, MaskFormat, BACKGROUND, IGNORE};
pub use validate::{validate_corpus, Finding, FindingKind, ValidationReport};
