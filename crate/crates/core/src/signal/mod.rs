//! DSP primitives shared by the feature extractors: framing and windowing,
//! power spectra, the orthonormal DCT-II, analytic-signal construction and
//! triangular filterbanks.
//!
//! Everything here is a pure function of its arguments.

mod analytic;
mod dct;
mod filterbank;
mod frame;
mod spectrum;

pub use analytic::{analytic_signal, AnalyticSpectrum};
pub use dct::{dct2_orthonormal, idct2_orthonormal, Dct2};
pub use filterbank::{build_filterbank, hz_to_mel, mel_to_hz, FilterScale, TriangularFilterBank};
pub use frame::{frame_signal, pre_emphasis, FrameSequence, Window};
pub use spectrum::{power_spectrum, SpectrumAnalyzer};

use crate::{Error, Result};

/// Floor applied before every logarithm of a power value.
pub const LOG_FLOOR: f64 = 1e-30;

/// `ln(max(p, LOG_FLOOR))`.
#[inline]
pub fn floored_ln(p: f64) -> f64 {
    p.max(LOG_FLOOR).ln()
}

/// Mono audio at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if samples.is_empty() {
            return Err(Error::invalid("waveform has no samples"));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("waveform samples"));
        }
        Ok(Waveform {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Multiply every sample by `gain`.
    pub fn scaled(&self, gain: f64) -> Result<Waveform> {
        Waveform::new(
            self.samples.iter().map(|s| s * gain).collect(),
            self.sample_rate_hz,
        )
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    }
}

/// Number of samples spanned by `ms` milliseconds, rounded to the nearest sample.
pub fn ms_to_samples(ms: f64, sample_rate_hz: u32) -> usize {
    (ms * sample_rate_hz as f64 / 1000.0).round() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_waveforms() {
        assert!(Waveform::new(vec![], 16000).is_err());
        assert!(Waveform::new(vec![0.0], 0).is_err());
        assert!(Waveform::new(vec![0.0, f64::NAN], 16000).is_err());
        assert!(Waveform::new(vec![0.0, f64::INFINITY], 16000).is_err());
        let w = Waveform::new(vec![0.5; 8000], 16000).unwrap();
        assert_eq!(w.duration_s(), 0.5);
        assert_eq!(w.peak(), 0.5);
    }

    #[test]
    fn log_floor_keeps_zero_finite() {
        assert_eq!(floored_ln(0.0), LOG_FLOOR.ln());
        assert!(floored_ln(0.0).is_finite());
        assert_eq!(floored_ln(1.0), 0.0);
    }
}
