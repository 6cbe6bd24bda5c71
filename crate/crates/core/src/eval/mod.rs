//! Confusion-matrix accumulation and per-class IoU scoring.

mod confusion;
mod corpus;
mod scores;
mod table;

pub use confusion::ConfusionMatrix;
pub use corpus::{evaluate_component, mean_over_images, score_table};
pub use scores::{iou_per_class, mean_iou, ClassScores, ScoringMode};
pub use table::{format_score, score_record, ClassScoreTable};
