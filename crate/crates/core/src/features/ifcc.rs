use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{FeatureConfig, FeatureExtractor, FeatureKind, FeatureMatrix};
use crate::signal::{AnalyticSpectrum, Waveform};
use crate::{Error, Result};

/// Relative magnitude below which the analytic signal is treated as a null
/// and its instantaneous frequency is not defined.
const NULL_FLOOR: f64 = 1e-12;

/// Instantaneous frequency samples in radians per sample, with the samples
/// whose denominator fell below the floor flagged (and set to 0).
#[derive(Debug, Clone, PartialEq)]
pub struct IfEstimate {
    pub theta: Vec<f64>,
    pub flagged: Vec<bool>,
}

impl IfEstimate {
    pub fn n_flagged(&self) -> usize {
        self.flagged.iter().filter(|&&f| f).count()
    }
}

/// `theta[n] = (2 pi / N) Re{ IDFT(k Z[k])[n] / IDFT(Z[k])[n] }`, with the
/// null floor set relative to the peak magnitude of the analytic signal.
pub fn instantaneous_frequency(z: &AnalyticSpectrum) -> Result<IfEstimate> {
    if z.bins.iter().all(|b| *b == Complex64::default()) {
        return Err(Error::invalid("analytic spectrum is identically zero"));
    }
    let mut planner = FftPlanner::new();
    let (num, den) = ratio_terms(&mut planner, &z.bins);
    let peak = den.iter().fold(0.0f64, |m, d| m.max(d.norm_sqr())).sqrt();
    Ok(finish(z.n, &num, &den, NULL_FLOOR * peak))
}

/// As [`instantaneous_frequency`] with an absolute floor on `|z[n]|`.
pub fn instantaneous_frequency_with_floor(z: &AnalyticSpectrum, floor: f64) -> IfEstimate {
    let mut planner = FftPlanner::new();
    let (num, den) = ratio_terms(&mut planner, &z.bins);
    finish(z.n, &num, &den, floor)
}

fn ratio_terms(planner: &mut FftPlanner<f64>, bins: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = bins.len();
    let ifft = planner.plan_fft_inverse(n);
    let mut num: Vec<Complex64> = bins.iter().enumerate().map(|(k, z)| z * k as f64).collect();
    let mut den = bins.to_vec();
    ifft.process(&mut num);
    ifft.process(&mut den);
    (num, den)
}

// Both transforms carry the same 1/N factor, which cancels in the ratio.
fn finish(n: usize, num: &[Complex64], den: &[Complex64], floor: f64) -> IfEstimate {
    let scale = 2.0 * PI / n as f64;
    let mut theta = Vec::with_capacity(n);
    let mut flagged = Vec::with_capacity(n);
    let floor_sq = floor * floor;
    for (a, b) in num.iter().zip(den) {
        let mag_sq = b.norm_sqr();
        if mag_sq < floor_sq || mag_sq == 0.0 {
            theta.push(0.0);
            flagged.push(true);
        } else {
            // Re{a / b} = Re{a conj(b)} / |b|^2
            theta.push(scale * (a.re * b.re + a.im * b.im) / mag_sq);
            flagged.push(false);
        }
    }
    IfEstimate { theta, flagged }
}

/// Uniform partition of the one-sided DFT bins `0..=N/2` into subbands.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandLayout {
    pub n: usize,
    pub sample_rate_hz: u32,
    /// `n_subbands + 1` bin edges; subband `i` covers `edges[i]..edges[i + 1]`.
    pub edges: Vec<usize>,
}

impl SubbandLayout {
    pub fn new(n: usize, n_subbands: usize, sample_rate_hz: u32) -> Result<Self> {
        let n_pos = n / 2 + 1;
        if n_subbands == 0 || n_subbands > n_pos {
            return Err(Error::invalid(format!(
                "cannot split {n_pos} bins into {n_subbands} subbands"
            )));
        }
        let edges = (0..=n_subbands)
            .map(|i| ((i * n_pos) as f64 / n_subbands as f64).round() as usize)
            .collect();
        Ok(SubbandLayout {
            n,
            sample_rate_hz,
            edges,
        })
    }

    pub fn n_subbands(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn bin_hz(&self) -> f64 {
        self.sample_rate_hz as f64 / self.n as f64
    }

    pub fn center_hz(&self, band: usize) -> f64 {
        (self.edges[band] + self.edges[band + 1] - 1) as f64 / 2.0 * self.bin_hz()
    }

    pub fn width_hz(&self, band: usize) -> f64 {
        (self.edges[band + 1] - self.edges[band]) as f64 * self.bin_hz()
    }

    /// Subband containing frequency `hz`.
    pub fn band_of(&self, hz: f64) -> usize {
        let bin = (hz / self.bin_hz()).round() as usize;
        self.edges[1..].iter().position(|&e| bin < e).unwrap_or(self.n_subbands() - 1)
    }

    /// Analytic spectrum of subband `band` given the full DFT `x` of a real signal.
    pub fn analytic_band(&self, x: &[Complex64], band: usize) -> Vec<Complex64> {
        let n = self.n;
        let mut z = vec![Complex64::default(); n];
        for k in self.edges[band]..self.edges[band + 1] {
            let edge = k == 0 || (n % 2 == 0 && k == n / 2);
            z[k] = if edge { x[k] } else { x[k] * 2.0 };
        }
        z
    }
}

/// Per-subband instantaneous frequency over a whole utterance.
#[derive(Debug, Clone)]
pub struct InstFreqTrack {
    /// `n_subbands x n_samples`, radians per sample, clamped to `[0, pi]`.
    pub subband_if: Array2<f64>,
    /// `|z[n]|` of each subband's analytic signal.
    pub amplitude: Array2<f64>,
    /// Samples at an envelope null; their IF is 0 and excluded from pooling.
    pub flagged: Array2<bool>,
    pub subband_centers_hz: Vec<f64>,
    pub layout: SubbandLayout,
}

impl InstFreqTrack {
    pub fn n_flagged(&self) -> usize {
        self.flagged.iter().filter(|&&f| f).count()
    }

    /// Mean IF of each subband over samples `start..start + len`, skipping
    /// flagged samples; an all-flagged span pools to 0.
    pub fn pooled(&self, start: usize, len: usize, out: &mut [f64]) {
        for (b, o) in out.iter_mut().enumerate() {
            let (mut sum, mut count) = (0.0, 0usize);
            for t in start..start + len {
                if !self.flagged[[b, t]] {
                    sum += self.subband_if[[b, t]];
                    count += 1;
                }
            }
            *o = if count == 0 { 0.0 } else { sum / count as f64 };
        }
    }
}

/// Decompose `w` into `n_subbands` uniform DFT-masked bands and compute the
/// instantaneous frequency of each band's analytic signal. The null floor is
/// relative to the waveform peak, so the result is invariant to input gain.
pub fn inst_freq_track(w: &Waveform, n_subbands: usize) -> Result<InstFreqTrack> {
    let n = w.len();
    let layout = SubbandLayout::new(n, n_subbands, w.sample_rate_hz())?;
    let mut planner = FftPlanner::new();
    let mut x: Vec<Complex64> = w.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut x);

    let floor = NULL_FLOOR * w.peak();
    let mut subband_if = Array2::zeros((n_subbands, n));
    let mut amplitude = Array2::zeros((n_subbands, n));
    let mut flagged = Array2::from_elem((n_subbands, n), false);
    for b in 0..n_subbands {
        let z = layout.analytic_band(&x, b);
        let (num, den) = ratio_terms(&mut planner, &z);
        let est = finish(n, &num, &den, floor);
        for t in 0..n {
            subband_if[[b, t]] = est.theta[t].clamp(0.0, PI);
            amplitude[[b, t]] = den[t].norm_sqr().sqrt() / n as f64;
            flagged[[b, t]] = est.flagged[t];
        }
    }
    Ok(InstFreqTrack {
        subband_centers_hz: (0..n_subbands).map(|b| layout.center_hz(b)).collect(),
        subband_if,
        amplitude,
        flagged,
        layout,
    })
}

/// Instantaneous-frequency cepstra. Static coefficients only.
pub fn extract_ifcc(w: &Waveform, cfg: &FeatureConfig) -> Result<FeatureMatrix> {
    FeatureExtractor::new(cfg, w.sample_rate_hz())?.extract_static(FeatureKind::Ifcc, w)
}

pub(super) fn ifcc(ex: &FeatureExtractor, w: &Waveform) -> Result<FeatureMatrix> {
    let cfg = ex.config();
    let n_frames = ex.frames_for(w.len())?;
    let (frame_len, hop) = ex.frame_geometry();
    let track = inst_freq_track(w, cfg.ifcc_subbands)?;
    let mut pooled = vec![0.0; cfg.ifcc_subbands];
    let mut out = Array2::zeros((n_frames, cfg.n_ceps));
    for (t, mut row) in out.rows_mut().into_iter().enumerate() {
        track.pooled(t * hop, frame_len, &mut pooled);
        ex.subband_dct
            .apply_into(&pooled, row.as_slice_mut().expect("contiguous row"))?;
    }
    FeatureMatrix::new(FeatureKind::Ifcc, out, cfg.hop_ms)
}
