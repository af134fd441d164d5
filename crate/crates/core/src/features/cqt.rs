//! Constant-Q transform evaluated at chosen sample positions.
//!
//! Bin `k` correlates the signal with a unit-L1 atom of even length `N_k`:
//! a raised-cosine (Hann) window times a complex exponential at
//! `f_k = fmin 2^(k/B)`, with `N_k ~ Q fs / f_k` and `Q = 1 / (2^(1/B) - 1)`:
//!
//! ```text
//! Y(k, n) = sum_{j = n - N_k/2}^{n + N_k/2} x(j) conj(a_k(j - n - N_k/2))
//! a_k(m)  = w((m + N_k) / N_k) exp(i 2 pi f_k m / fs) / (N_k / 2),   -N_k <= m <= 0
//! ```
//!
//! Samples outside the signal count as zero. Because the Hann window is a
//! sum of three complex exponentials, each window sum splits into three
//! demodulated running sums, so a bin costs O(len) regardless of `N_k`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use super::CqtConfig;
use crate::signal::Waveform;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CqtKernel {
    pub sample_rate_hz: u32,
    pub bins_per_octave: usize,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
    pub q: f64,
    /// Geometric center frequencies `f_k`.
    pub freqs_hz: Vec<f64>,
    /// Even atom lengths `N_k`, non-increasing in `k`.
    pub lengths: Vec<usize>,
}

impl CqtKernel {
    pub fn new(cfg: &CqtConfig, sample_rate_hz: u32) -> Result<Self> {
        let nyquist = sample_rate_hz as f64 / 2.0;
        if !(cfg.fmin_hz > 0.0 && cfg.fmin_hz < cfg.fmax_hz && cfg.fmax_hz <= nyquist) {
            return Err(Error::invalid(format!(
                "CQT band must satisfy 0 < fmin < fmax <= {nyquist}, got [{}, {}]",
                cfg.fmin_hz, cfg.fmax_hz
            )));
        }
        if cfg.bins_per_octave == 0 {
            return Err(Error::invalid("bins_per_octave must be positive"));
        }
        let b = cfg.bins_per_octave as f64;
        let n_bins = (b * (cfg.fmax_hz / cfg.fmin_hz).log2()).round() as usize;
        if n_bins < 2 {
            return Err(Error::invalid("CQT band holds fewer than two bins"));
        }
        let q = 1.0 / (2f64.powf(1.0 / b) - 1.0);
        let freqs_hz: Vec<f64> = (0..n_bins)
            .map(|k| cfg.fmin_hz * 2f64.powf(k as f64 / b))
            .collect();
        let lengths = freqs_hz
            .iter()
            .map(|f| (2.0 * (q * sample_rate_hz as f64 / (2.0 * f)).round()).max(2.0) as usize)
            .collect();
        Ok(CqtKernel {
            sample_rate_hz,
            bins_per_octave: cfg.bins_per_octave,
            fmin_hz: cfg.fmin_hz,
            fmax_hz: cfg.fmax_hz,
            q,
            freqs_hz,
            lengths,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.freqs_hz.len()
    }

    /// Longest atom, `N_1`.
    pub fn max_len(&self) -> usize {
        self.lengths[0]
    }

    /// Samples of atom `k` at `m = -N_k ..= 0`.
    pub fn atom(&self, k: usize) -> Vec<Complex64> {
        let len = self.lengths[k];
        let omega = 2.0 * PI * self.freqs_hz[k] / self.sample_rate_hz as f64;
        let norm = len as f64 / 2.0;
        (0..=len)
            .map(|u| {
                let m = u as f64 - len as f64;
                let w = 0.5 - 0.5 * (2.0 * PI * u as f64 / len as f64).cos();
                Complex64::from_polar(w / norm, omega * m)
            })
            .collect()
    }
}

/// `K x n_positions` complex CQT.
#[derive(Debug, Clone)]
pub struct CqtSpectrogram {
    pub y: Array2<Complex64>,
    /// Sample index of each column.
    pub positions: Vec<usize>,
    pub hop: Option<usize>,
}

/// CQT at `n = 0, hop, 2 hop, ...` up to the end of the signal.
pub fn cqt(w: &Waveform, kernel: &CqtKernel, hop: usize) -> Result<CqtSpectrogram> {
    if hop == 0 {
        return Err(Error::invalid("CQT hop must be positive"));
    }
    let positions: Vec<usize> = (0..w.len()).step_by(hop).collect();
    let mut s = cqt_at(w, kernel, &positions)?;
    s.hop = Some(hop);
    Ok(s)
}

/// CQT evaluated at arbitrary sample positions.
pub fn cqt_at(w: &Waveform, kernel: &CqtKernel, positions: &[usize]) -> Result<CqtSpectrogram> {
    if w.sample_rate_hz() != kernel.sample_rate_hz {
        return Err(Error::AudioFormat(format!(
            "signal at {} Hz, CQT kernel built for {} Hz",
            w.sample_rate_hz(),
            kernel.sample_rate_hz
        )));
    }
    let x = w.samples();
    let fs = kernel.sample_rate_hz as f64;
    let mut y = Array2::zeros((kernel.n_bins(), positions.len()));
    const WEIGHTS: [f64; 3] = [0.5, -0.25, -0.25];
    let mut marks = Vec::with_capacity(2 * positions.len());

    for k in 0..kernel.n_bins() {
        let len = kernel.lengths[k];
        let half = len / 2;
        let omega = 2.0 * PI * kernel.freqs_hz[k] / fs;
        let beta = 2.0 * PI / len as f64;
        let alphas = [omega, omega - beta, omega + beta];
        let window = |n: usize| (n.saturating_sub(half), (n + half).min(x.len() - 1) + 1);

        marks.clear();
        for &n in positions.iter().filter(|&&n| n < x.len() + half) {
            let (lo, end) = window(n);
            marks.extend([lo, end]);
        }
        marks.sort_unstable();
        marks.dedup();
        let sums = demodulated_prefix_at(x, &alphas, &marks);
        let at = |j: usize| &sums[marks.binary_search(&j).expect("marked index")];

        let lead = Complex64::from_polar(1.0 / half as f64, omega * len as f64);
        for (col, &n) in positions.iter().enumerate() {
            if n >= x.len() + half {
                continue;
            }
            let (lo, end) = window(n);
            let (p_lo, p_end) = (at(lo), at(end));
            let mut acc = Complex64::default();
            for i in 0..3 {
                let phase = -alphas[i] * (half as f64 - n as f64);
                acc += Complex64::from_polar(WEIGHTS[i], phase) * (p_end[i] - p_lo[i]);
            }
            y[[k, col]] = lead * acc;
        }
    }
    Ok(CqtSpectrogram {
        y,
        positions: positions.to_vec(),
        hop: None,
    })
}

const BLOCK: usize = 512;

/// `P_a[j] = sum_{i < j} x[i] exp(-i alpha_a i)` for the three frequencies,
/// at each of the sorted indices `marks`. Work proceeds in blocks of 512
/// samples against a per-frequency table of `exp(-i alpha j)`, with each
/// block's phase offset computed directly.
fn demodulated_prefix_at(x: &[f64], alphas: &[f64; 3], marks: &[usize]) -> Vec<[Complex64; 3]> {
    let last = marks.last().copied().unwrap_or(0);
    let span = last.min(BLOCK);
    let tables: Vec<(Vec<f64>, Vec<f64>)> = alphas
        .iter()
        .map(|&a| {
            let step = Complex64::from_polar(1.0, -a);
            let mut t = Complex64::new(1.0, 0.0);
            let (mut re, mut im) = (Vec::with_capacity(span), Vec::with_capacity(span));
            for _ in 0..span {
                re.push(t.re);
                im.push(t.im);
                t *= step;
            }
            (re, im)
        })
        .collect();

    let mut acc = [Complex64::default(); 3];
    let mut out = Vec::with_capacity(marks.len());
    let mut next = 0;
    let mut block_start = 0;
    while block_start < last {
        let block_end = (block_start + BLOCK).min(last);
        let base = alphas.map(|a| Complex64::from_polar(1.0, -a * block_start as f64));
        let mut seg_start = block_start;
        loop {
            while next < marks.len() && marks[next] == seg_start {
                out.push(acc);
                next += 1;
            }
            if seg_start == block_end {
                break;
            }
            let seg_end = match marks.get(next) {
                Some(&m) if m < block_end => m,
                _ => block_end,
            };
            let xs = &x[seg_start..seg_end];
            let off = seg_start - block_start;
            for a in 0..3 {
                let (re, im) = &tables[a];
                let (sr, si) = dot2(xs, &re[off..off + xs.len()], &im[off..off + xs.len()]);
                acc[a] += base[a] * Complex64::new(sr, si);
            }
            seg_start = seg_end;
        }
        block_start = block_end;
    }
    while next < marks.len() {
        out.push(acc);
        next += 1;
    }
    out
}

/// `(sum x re, sum x im)` with four independent lanes.
#[inline]
fn dot2(x: &[f64], re: &[f64], im: &[f64]) -> (f64, f64) {
    let mut ar = [0.0f64; 4];
    let mut ai = [0.0f64; 4];
    let chunks = x.len() / 4;
    for c in 0..chunks {
        let i = c * 4;
        for l in 0..4 {
            ar[l] += x[i + l] * re[i + l];
            ai[l] += x[i + l] * im[i + l];
        }
    }
    let mut sr = (ar[0] + ar[1]) + (ar[2] + ar[3]);
    let mut si = (ai[0] + ai[1]) + (ai[2] + ai[3]);
    for i in chunks * 4..x.len() {
        sr += x[i] * re[i];
        si += x[i] * im[i];
    }
    (sr, si)
}
