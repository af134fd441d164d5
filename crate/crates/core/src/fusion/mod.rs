//! Score-level fusion and evaluation.
//!
//! Scores follow one convention across every system: higher means more
//! mask-like, and the decision threshold is 0 with ties going to `no_mask`.

mod logistic;
mod scores;
mod uar;
mod vote;

pub use logistic::{
    apply_fusion, read_fusion_model, train_fusion, train_fusion_traced, write_fusion_model,
    FusionConfig, FusionModel,
};
pub use scores::{read_predictions, read_scores, write_predictions, write_scores, ScoreTable};
pub use uar::{uar, ConfusionMatrix, UarReport};
pub use vote::majority_vote;
