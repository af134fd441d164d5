use std::f64::consts::PI;

use ndarray::Array2;

use super::{ms_to_samples, Waveform};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    Rectangular,
    /// Raised cosine, `0.54 - 0.46 cos(2 pi n / (N - 1))`.
    #[default]
    Hamming,
}

impl Window {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; len],
            Window::Hamming if len == 1 => vec![1.0],
            Window::Hamming => (0..len)
                .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / (len - 1) as f64).cos())
                .collect(),
        }
    }
}

/// Fixed-length, possibly windowed frames cut from a waveform.
#[derive(Debug, Clone)]
pub struct FrameSequence {
    /// One frame per row.
    pub frames: Array2<f64>,
    pub frame_len_samples: usize,
    pub hop_samples: usize,
    pub sample_rate_hz: u32,
}

impl FrameSequence {
    pub fn n_frames(&self) -> usize {
        self.frames.nrows()
    }

    /// `floor((len - frame) / hop) + 1` when the signal holds a frame, else 0.
    pub fn count_for(len: usize, frame_len: usize, hop: usize) -> usize {
        if len < frame_len {
            0
        } else {
            (len - frame_len) / hop + 1
        }
    }

    /// Start sample of frame `i`.
    pub fn start(&self, i: usize) -> usize {
        i * self.hop_samples
    }
}

/// Cut `w` into frames left to right. A trailing partial frame is dropped,
/// and a signal shorter than one frame yields zero frames.
pub fn frame_signal(w: &Waveform, frame_ms: f64, hop_ms: f64, window: Window) -> Result<FrameSequence> {
    if !(hop_ms > 0.0) || !(frame_ms >= hop_ms) {
        return Err(Error::invalid(format!(
            "need frame_ms >= hop_ms > 0, got frame {frame_ms} ms / hop {hop_ms} ms"
        )));
    }
    let sr = w.sample_rate_hz();
    let frame_len = ms_to_samples(frame_ms, sr);
    let hop = ms_to_samples(hop_ms, sr);
    if hop == 0 {
        return Err(Error::invalid("hop is shorter than one sample"));
    }
    let x = w.samples();
    let n = FrameSequence::count_for(x.len(), frame_len, hop);
    let win = window.coefficients(frame_len);
    let mut frames = Array2::zeros((n, frame_len));
    for (i, mut row) in frames.rows_mut().into_iter().enumerate() {
        let seg = &x[i * hop..i * hop + frame_len];
        for ((dst, s), c) in row.iter_mut().zip(seg).zip(&win) {
            *dst = s * c;
        }
    }
    Ok(FrameSequence {
        frames,
        frame_len_samples: frame_len,
        hop_samples: hop,
        sample_rate_hz: sr,
    })
}

/// First-order pre-emphasis `y[n] = x[n] - coef * x[n-1]`.
pub fn pre_emphasis(x: &[f64], coef: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut prev = 0.0;
    for &s in x {
        out.push(s - coef * prev);
        prev = s;
    }
    out
}
