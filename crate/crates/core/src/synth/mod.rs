//! Deterministic synthetic corpora: rectangle ground truth plus component
//! pseudo-labels degraded per class, so that which component is strong on
//! which class is known by construction.

mod config;
mod corpus;
mod degrade;
pub mod rng;

pub use config::{ComponentProfile, SynthConfig};
pub use corpus::{
    component_mask, generate_corpus, generate_ground_truth, generate_image, image_id, SynthImage,
    MAX_PLACEMENT_ATTEMPTS,
};
pub use degrade::{degrade, dilate, erode, DegradeOp};
