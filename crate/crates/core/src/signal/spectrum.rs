use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// Power spectra of frames zero-padded to a fixed power-of-two FFT size.
/// Holds the FFT plan so repeated calls reuse it.
pub struct SpectrumAnalyzer {
    n_fft: usize,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
}

impl SpectrumAnalyzer {
    pub fn new(n_fft: usize) -> Result<Self> {
        if n_fft == 0 || !n_fft.is_power_of_two() {
            return Err(Error::invalid(format!("n_fft must be a power of two, got {n_fft}")));
        }
        let fft = FftPlanner::new().plan_fft_forward(n_fft);
        Ok(SpectrumAnalyzer {
            n_fft,
            fft,
            buf: vec![Complex64::default(); n_fft],
        })
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    /// Number of one-sided bins, `n_fft / 2 + 1`.
    pub fn n_bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    /// `|DFT(frame zero-padded to n_fft)[k]|^2` for `k = 0..=n_fft/2`.
    pub fn power(&mut self, frame: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_bins()];
        self.power_into(frame, &mut out)?;
        Ok(out)
    }

    pub fn power_into(&mut self, frame: &[f64], out: &mut [f64]) -> Result<()> {
        if frame.len() > self.n_fft {
            return Err(Error::invalid(format!(
                "frame of {} samples exceeds n_fft {}",
                frame.len(),
                self.n_fft
            )));
        }
        debug_assert_eq!(out.len(), self.n_bins());
        for (i, b) in self.buf.iter_mut().enumerate() {
            *b = Complex64::new(frame.get(i).copied().unwrap_or(0.0), 0.0);
        }
        self.fft.process(&mut self.buf);
        for (o, b) in out.iter_mut().zip(&self.buf) {
            *o = b.norm_sqr();
        }
        Ok(())
    }
}

/// One-shot form of [`SpectrumAnalyzer::power`].
pub fn power_spectrum(frame: &[f64], n_fft: usize) -> Result<Vec<f64>> {
    SpectrumAnalyzer::new(n_fft)?.power(frame)
}
