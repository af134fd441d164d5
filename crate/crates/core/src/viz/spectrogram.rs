use std::fmt::Write as _;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::signal::{frame_signal, SpectrumAnalyzer, Waveform, Window};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrogramConfig {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub n_fft: usize,
    pub floor_db: f64,
}

impl Default for SpectrogramConfig {
    fn default() -> Self {
        SpectrogramConfig {
            frame_ms: 20.0,
            hop_ms: 10.0,
            n_fft: 512,
            floor_db: -120.0,
        }
    }
}

/// Framed log power, `times x freqs`, in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramGrid {
    /// Frame centers.
    pub times_s: Vec<f64>,
    pub freqs_hz: Vec<f64>,
    pub log_power: Array2<f64>,
    pub floor_db: f64,
}

impl SpectrogramGrid {
    /// One line per frame, space-separated dB values in bin order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in self.log_power.rows() {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(' ');
                }
                write!(out, "{v}").expect("string write");
                first = false;
            }
            out.push('\n');
        }
        out
    }
}

/// Hamming-windowed power spectra, `10 log10(|X|^2)` floored at
/// `cfg.floor_db`.
pub fn compute_spectrogram(w: &Waveform, cfg: &SpectrogramConfig) -> Result<SpectrogramGrid> {
    let frames = frame_signal(w, cfg.frame_ms, cfg.hop_ms, Window::Hamming)?;
    if frames.n_frames() == 0 {
        return Err(Error::TooShort {
            needed: frames.frame_len_samples,
            got: w.len(),
        });
    }
    if !cfg.floor_db.is_finite() {
        return Err(Error::config("render.spectrogram.floor_db", "must be finite"));
    }
    let mut analyzer = SpectrumAnalyzer::new(cfg.n_fft)?;
    let n_bins = analyzer.n_bins();
    let mut log_power = Array2::zeros((frames.n_frames(), n_bins));
    let mut power = vec![0.0; n_bins];
    for (frame, mut row) in frames.frames.rows().into_iter().zip(log_power.rows_mut()) {
        analyzer.power_into(frame.as_slice().expect("contiguous frame"), &mut power)?;
        for (dst, &p) in row.iter_mut().zip(&power) {
            *dst = if p > 0.0 { (10.0 * p.log10()).max(cfg.floor_db) } else { cfg.floor_db };
        }
    }
    let sr = w.sample_rate_hz() as f64;
    let half = frames.frame_len_samples as f64 / 2.0;
    Ok(SpectrogramGrid {
        times_s: (0..frames.n_frames())
            .map(|t| (frames.start(t) as f64 + half) / sr)
            .collect(),
        freqs_hz: (0..n_bins).map(|k| k as f64 * sr / cfg.n_fft as f64).collect(),
        log_power,
        floor_db: cfg.floor_db,
    })
}
