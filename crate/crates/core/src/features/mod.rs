//! The four cepstral feature extractors and delta stacking.
//!
//! Every extractor produces one row per 20 ms frame (10 ms hop by default)
//! holding `n_ceps` static coefficients; [`append_deltas`] stacks first and
//! second regression deltas to give `3 * n_ceps` columns.
//!
//! - LFCC / MFCC: log energies of linear / mel triangular filterbanks, DCT.
//! - IFCC: instantaneous frequencies of narrowband analytic subband signals
//!   computed over the whole utterance, averaged per frame, DCT.
//! - CQCC: log power of a constant-Q transform, resampled from the geometric
//!   to a linear frequency axis, DCT.

mod cepstral;
mod cqcc;
mod cqt;
mod deltas;
mod ifcc;
mod io;

pub use cepstral::{extract_lfcc, extract_mfcc};
pub use cqcc::{extract_cqcc, Cqcc};
pub use cqt::{cqt, cqt_at, CqtKernel, CqtSpectrogram};
pub use deltas::append_deltas;
pub use ifcc::{
    extract_ifcc, inst_freq_track, instantaneous_frequency, instantaneous_frequency_with_floor,
    IfEstimate, InstFreqTrack, SubbandLayout,
};
pub use io::{read_features, write_features, write_features_text, FEATURE_MAGIC};

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::signal::{build_filterbank, Dct2, FilterScale, TriangularFilterBank, Waveform, Window};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Lfcc,
    Mfcc,
    Ifcc,
    Cqcc,
}

impl FeatureKind {
    /// Row order of the evaluation report.
    pub const ALL: [FeatureKind; 4] = [
        FeatureKind::Lfcc,
        FeatureKind::Ifcc,
        FeatureKind::Cqcc,
        FeatureKind::Mfcc,
    ];

    /// Lower-case name used in paths and on the command line.
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Lfcc => "lfcc",
            FeatureKind::Mfcc => "mfcc",
            FeatureKind::Ifcc => "ifcc",
            FeatureKind::Cqcc => "cqcc",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            FeatureKind::Lfcc => "LFCC",
            FeatureKind::Mfcc => "MFCC",
            FeatureKind::Ifcc => "IFCC",
            FeatureKind::Cqcc => "CQCC",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            FeatureKind::Lfcc => 0,
            FeatureKind::Mfcc => 1,
            FeatureKind::Ifcc => 2,
            FeatureKind::Cqcc => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => FeatureKind::Lfcc,
            1 => FeatureKind::Mfcc,
            2 => FeatureKind::Ifcc,
            3 => FeatureKind::Cqcc,
            c => {
                return Err(Error::Malformed {
                    what: "feature kind",
                    msg: format!("unknown code {c}"),
                })
            }
        })
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lfcc" => Ok(FeatureKind::Lfcc),
            "mfcc" => Ok(FeatureKind::Mfcc),
            "ifcc" => Ok(FeatureKind::Ifcc),
            "cqcc" => Ok(FeatureKind::Cqcc),
            other => Err(Error::invalid(format!("unknown feature kind `{other}`"))),
        }
    }
}

/// Per-frame feature vectors, one row per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    kind: FeatureKind,
    rows: Array2<f64>,
    frame_hop_ms: f64,
}

impl FeatureMatrix {
    pub fn new(kind: FeatureKind, rows: Array2<f64>, frame_hop_ms: f64) -> Result<Self> {
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(Error::invalid("feature matrix must have at least one frame and one column"));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature matrix"));
        }
        Ok(FeatureMatrix {
            kind,
            rows,
            frame_hop_ms,
        })
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.rows
    }

    pub fn n_frames(&self) -> usize {
        self.rows.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn frame_hop_ms(&self) -> f64 {
        self.frame_hop_ms
    }

    pub fn into_rows(self) -> Array2<f64> {
        self.rows
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CqtConfig {
    pub bins_per_octave: usize,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
    /// Uniform resampling period: the first octave is split into this many
    /// linear-axis points.
    pub resample_period: usize,
}

impl Default for CqtConfig {
    fn default() -> Self {
        CqtConfig {
            bins_per_octave: 96,
            fmin_hz: 8000.0 / 512.0,
            fmax_hz: 8000.0,
            resample_period: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub n_fft: usize,
    /// Triangular filters for LFCC and MFCC.
    pub n_filters: usize,
    /// Static coefficients kept after the DCT (c0 included).
    pub n_ceps: usize,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
    pub pre_emphasis: bool,
    pub pre_emphasis_coef: f64,
    /// Half-width of the delta regression window, in frames.
    pub delta_window: usize,
    /// Uniform narrowband subbands for IFCC and the pyknogram.
    pub ifcc_subbands: usize,
    pub cqt: CqtConfig,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            frame_ms: 20.0,
            hop_ms: 10.0,
            n_fft: 512,
            n_filters: 40,
            n_ceps: 30,
            fmin_hz: 0.0,
            fmax_hz: 8000.0,
            pre_emphasis: false,
            pre_emphasis_coef: 0.97,
            delta_window: 2,
            ifcc_subbands: 60,
            cqt: CqtConfig::default(),
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.hop_ms > 0.0 && self.frame_ms >= self.hop_ms) {
            return Err(Error::config("features.frame_ms", "need frame_ms >= hop_ms > 0"));
        }
        if self.n_ceps == 0 {
            return Err(Error::config("features.n_ceps", "must be positive"));
        }
        if self.n_filters < self.n_ceps {
            return Err(Error::config("features.n_filters", "must be at least n_ceps"));
        }
        if self.ifcc_subbands < self.n_ceps {
            return Err(Error::config("features.ifcc_subbands", "must be at least n_ceps"));
        }
        if self.delta_window == 0 {
            return Err(Error::config("features.delta_window", "must be positive"));
        }
        if self.cqt.bins_per_octave == 0 {
            return Err(Error::config("features.cqt.bins_per_octave", "must be positive"));
        }
        if self.cqt.resample_period == 0 {
            return Err(Error::config("features.cqt.resample_period", "must be positive"));
        }
        if !(self.cqt.fmin_hz > 0.0 && self.cqt.fmin_hz < self.cqt.fmax_hz) {
            return Err(Error::config("features.cqt.fmin_hz", "need 0 < fmin < fmax"));
        }
        Ok(())
    }

    pub(crate) fn window(&self) -> Window {
        Window::Hamming
    }
}

/// Precomputed filterbanks, DCT bases and CQT kernel for one configuration.
/// Build once and reuse across utterances.
pub struct FeatureExtractor {
    cfg: FeatureConfig,
    sample_rate_hz: u32,
    linear_fb: TriangularFilterBank,
    mel_fb: TriangularFilterBank,
    filter_dct: Dct2,
    subband_dct: Dct2,
    cqcc: Cqcc,
}

impl FeatureExtractor {
    pub fn new(cfg: &FeatureConfig, sample_rate_hz: u32) -> Result<Self> {
        cfg.validate()?;
        let fb = |scale| {
            build_filterbank(
                scale,
                cfg.n_filters,
                cfg.n_fft,
                sample_rate_hz,
                cfg.fmin_hz,
                cfg.fmax_hz,
            )
        };
        Ok(FeatureExtractor {
            linear_fb: fb(FilterScale::Linear)?,
            mel_fb: fb(FilterScale::Mel)?,
            filter_dct: Dct2::new(cfg.n_filters, cfg.n_ceps)?,
            subband_dct: Dct2::new(cfg.ifcc_subbands, cfg.n_ceps)?,
            cqcc: Cqcc::new(cfg, sample_rate_hz)?,
            cfg: cfg.clone(),
            sample_rate_hz,
        })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.cfg
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn linear_filterbank(&self) -> &TriangularFilterBank {
        &self.linear_fb
    }

    pub fn mel_filterbank(&self) -> &TriangularFilterBank {
        &self.mel_fb
    }

    pub fn cqcc(&self) -> &Cqcc {
        &self.cqcc
    }

    /// Static coefficients, `n_frames x n_ceps`.
    pub fn extract_static(&self, kind: FeatureKind, w: &Waveform) -> Result<FeatureMatrix> {
        self.check_rate(w)?;
        let w = self.preprocess(w)?;
        match kind {
            FeatureKind::Lfcc => cepstral::filterbank_cepstra(self, &w, FilterScale::Linear),
            FeatureKind::Mfcc => cepstral::filterbank_cepstra(self, &w, FilterScale::Mel),
            FeatureKind::Ifcc => ifcc::ifcc(self, &w),
            FeatureKind::Cqcc => self.cqcc.extract(&w, self.cfg.hop_ms),
        }
    }

    /// Static coefficients with deltas and delta-deltas, `n_frames x 3 n_ceps`.
    pub fn extract(&self, kind: FeatureKind, w: &Waveform) -> Result<FeatureMatrix> {
        append_deltas(&self.extract_static(kind, w)?, self.cfg.delta_window)
    }

    fn check_rate(&self, w: &Waveform) -> Result<()> {
        if w.sample_rate_hz() != self.sample_rate_hz {
            return Err(Error::AudioFormat(format!(
                "sample rate {} Hz, extractor configured for {} Hz",
                w.sample_rate_hz(),
                self.sample_rate_hz
            )));
        }
        Ok(())
    }

    fn preprocess(&self, w: &Waveform) -> Result<Waveform> {
        if self.cfg.pre_emphasis {
            Waveform::new(
                crate::signal::pre_emphasis(w.samples(), self.cfg.pre_emphasis_coef),
                w.sample_rate_hz(),
            )
        } else {
            Ok(w.clone())
        }
    }

    pub(crate) fn frame_geometry(&self) -> (usize, usize) {
        (
            crate::signal::ms_to_samples(self.cfg.frame_ms, self.sample_rate_hz),
            crate::signal::ms_to_samples(self.cfg.hop_ms, self.sample_rate_hz),
        )
    }

    /// Frame count for a signal of `len` samples, or a too-short error.
    pub(crate) fn frames_for(&self, len: usize) -> Result<usize> {
        let (frame_len, hop) = self.frame_geometry();
        match crate::signal::FrameSequence::count_for(len, frame_len, hop) {
            0 => Err(Error::TooShort {
                needed: frame_len,
                got: len,
            }),
            n => Ok(n),
        }
    }
}
