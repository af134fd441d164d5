//! Per-class diagonal-covariance GMMs and the higher-likelihood decision.

mod gmm;
mod kmeans;
mod models;

pub use gmm::{em_train, em_train_traced, EmTrace, Gmm, GmmConfig};
pub use kmeans::{kmeans, KMeans};
pub use models::{classify, read_models, write_models, ClassModels, ScoreRecord, MODEL_MAGIC};
