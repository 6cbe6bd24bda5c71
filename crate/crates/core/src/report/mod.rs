//! Rendering of score and selection tables, and the pipeline cost model.

mod cost;
mod tables;

pub use cost::{cost_estimate, render_cost_report, CostParams, CostReport};
pub use tables::{render_checkmark_table, render_score_table, TableFormat, BEST_MARK, WINNER_MARK};
