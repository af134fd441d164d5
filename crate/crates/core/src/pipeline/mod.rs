//! Config-driven commands behind the `maskspeech` CLI.
//!
//! All artifacts live under one work directory:
//!
//! ```text
//! features/<kind>/<utt_id>.mskf   feature matrices, plus index.tsv cache keys
//! models/<kind>.gmm               class model pairs
//! models/fusion.txt               fusion weights
//! scores/<system>_<part>.tsv      utt_id<TAB>score
//! scores/<system>_<part>.pred.tsv utt_id<TAB>label
//! reports/uar.txt                 evaluation table
//! ```
//!
//! Concurrent commands on the same work directory are not supported.

mod commands;
mod config;
mod report;
mod workdir;

pub use commands::{
    cmd_eval, cmd_extract, cmd_fuse, cmd_render, cmd_score, cmd_synth, cmd_train, run_all,
    ExtractSummary,
};
pub use config::{PathsConfig, PipelineConfig, RenderConfig};
pub use report::{format_table, ReportRow};
pub use workdir::WorkDir;
