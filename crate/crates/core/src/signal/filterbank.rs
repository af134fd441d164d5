use ndarray::Array2;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterScale {
    Linear,
    Mel,
}

/// `2595 log10(1 + f / 700)`.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Unit-peak triangular filters over the one-sided bins of an `n_fft` DFT.
/// Filter `m` rises from center `m-1` to center `m` and falls to center
/// `m+1`, so neighbours overlap by half.
#[derive(Debug, Clone)]
pub struct TriangularFilterBank {
    pub scale: FilterScale,
    /// `n_filters x (n_fft/2 + 1)`
    pub weights: Array2<f64>,
    pub center_freqs_hz: Vec<f64>,
    /// `n_filters + 2` band edges; `edges_hz[m + 1]` is the center of filter `m`.
    pub edges_hz: Vec<f64>,
}

impl TriangularFilterBank {
    pub fn n_filters(&self) -> usize {
        self.weights.nrows()
    }

    /// Filter energies `sum_k W[m, k] p[k]`.
    pub fn apply(&self, power: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_filters()];
        self.apply_into(power, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, power: &[f64], out: &mut [f64]) -> Result<()> {
        if power.len() != self.weights.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.ncols(),
                got: power.len(),
            });
        }
        for (o, row) in out.iter_mut().zip(self.weights.rows()) {
            *o = row.iter().zip(power).map(|(w, p)| w * p).sum();
        }
        Ok(())
    }
}

pub fn build_filterbank(
    scale: FilterScale,
    n_filters: usize,
    n_fft: usize,
    sample_rate_hz: u32,
    fmin_hz: f64,
    fmax_hz: f64,
) -> Result<TriangularFilterBank> {
    let nyquist = sample_rate_hz as f64 / 2.0;
    if n_filters < 2 {
        return Err(Error::invalid(format!("need at least 2 filters, got {n_filters}")));
    }
    if !(fmin_hz >= 0.0 && fmin_hz < fmax_hz && fmax_hz <= nyquist) {
        return Err(Error::invalid(format!(
            "band edges must satisfy 0 <= fmin < fmax <= {nyquist}, got [{fmin_hz}, {fmax_hz}]"
        )));
    }
    if n_fft < 2 {
        return Err(Error::invalid("n_fft too small"));
    }

    let (lo, hi) = match scale {
        FilterScale::Linear => (fmin_hz, fmax_hz),
        FilterScale::Mel => (hz_to_mel(fmin_hz), hz_to_mel(fmax_hz)),
    };
    let step = (hi - lo) / (n_filters + 1) as f64;
    let edges_hz: Vec<f64> = (0..n_filters + 2)
        .map(|i| {
            let v = lo + step * i as f64;
            match scale {
                FilterScale::Linear => v,
                FilterScale::Mel => mel_to_hz(v),
            }
        })
        .collect();

    let n_bins = n_fft / 2 + 1;
    let bin_hz = sample_rate_hz as f64 / n_fft as f64;
    let mut weights = Array2::zeros((n_filters, n_bins));
    for m in 0..n_filters {
        let (l, c, r) = (edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]);
        for k in 0..n_bins {
            let f = k as f64 * bin_hz;
            let w = if f > l && f <= c {
                (f - l) / (c - l)
            } else if f > c && f < r {
                (r - f) / (r - c)
            } else {
                0.0
            };
            weights[[m, k]] = w;
        }
    }

    Ok(TriangularFilterBank {
        scale,
        weights,
        center_freqs_hz: edges_hz[1..=n_filters].to_vec(),
        edges_hz,
    })
}
