//! Accuracy under label permutation, boundary diagnostics, and Monte-Carlo
//! experiments on the consistency behaviour of the segmentation pipeline.

mod boundary;
mod experiments;
mod matching;
mod table;

pub use boundary::{
    boundary_sets, covered_set, separation_delta, standardized_true_feature, BoundarySets,
    PixelClass, SeparationReport,
};
pub use experiments::{
    concentration_experiment, concentration_table, consistency_experiment, consistency_table,
    lemma3_experiment, lemma3_table, linear_kernel_sizes, theorem2_experiment, theorem2_table,
    ConcentrationRow, ConsistencyParams, ConsistencyRow, Lemma3Row, Theorem2Params,
    Theorem2Replicate, Theorem2Report,
};
pub use matching::{best_injective_match, best_permutation_match, MatchReport, MAX_PERMUTATION_K};
pub use table::Table;
