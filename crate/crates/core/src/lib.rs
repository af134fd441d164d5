//! Classification of 1-second speech segments recorded with or without a
//! face mask.
//!
//! The crate is organised bottom-up:
//!
//! - [`signal`]: framing, spectra, DCT, analytic signals and triangular
//!   filterbanks shared by every extractor.
//! - [`features`]: LFCC, MFCC, IFCC and CQCC extractors with delta stacking.
//! - [`classifier`]: diagonal-covariance GMMs trained by EM and the
//!   higher-likelihood decision rule.
//! - [`fusion`]: logistic-regression score fusion, majority voting and UAR.
//! - [`corpus`]: WAV/manifest ingestion, 1-second segmentation and a
//!   synthetic mask-effect corpus generator.
//! - [`viz`]: spectrograms and pyknograms, rendered to PNG with text dumps.
//! - [`pipeline`]: the config-driven commands behind the `maskspeech` CLI.
//!
//! The guide under `book/` walks through each stage; its code listings are
//! compiled and run as doctests of this crate.

pub mod classifier;
pub mod corpus;
mod error;
pub mod features;
pub mod fusion;
mod label;
pub mod pipeline;
pub mod signal;
pub mod viz;

pub use error::{Error, Result};
pub use label::Label;

/// Sample rate every input is validated against.
pub const SAMPLE_RATE_HZ: u32 = 16_000;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/signal.md")]
    mod signal {}
    #[doc = include_str!("../../../book/src/cepstra.md")]
    mod cepstra {}
    #[doc = include_str!("../../../book/src/instantaneous_frequency.md")]
    mod instantaneous_frequency {}
    #[doc = include_str!("../../../book/src/constant_q.md")]
    mod constant_q {}
    #[doc = include_str!("../../../book/src/gmm.md")]
    mod gmm {}
    #[doc = include_str!("../../../book/src/fusion.md")]
    mod fusion {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
