//! Best-per-class selection and class-wise merging of component masks.

mod merge;
mod ranking;
mod run;
mod selection;

pub use merge::{merge_classwise, merge_naive, ClasswiseMerger};
pub use ranking::{rank_classes_by_instances, ClassRanking};
pub use run::{run_ensemble, EnsembleOptions, EnsembleSummary, Variant};
pub use selection::{select_best, SelectionEntry, SelectionMap};
