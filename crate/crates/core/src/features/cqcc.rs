use ndarray::Array2;

use super::cqt::{cqt_at, CqtKernel};
use super::{FeatureConfig, FeatureExtractor, FeatureKind, FeatureMatrix};
use crate::signal::{floored_ln, ms_to_samples, Dct2, FrameSequence, Waveform};
use crate::{Error, Result};

/// Constant-Q cepstra: CQT log power at each frame center, linearly
/// interpolated from the geometric bin axis onto a uniform axis of spacing
/// `fmin / d`, then an orthonormal DCT.
#[derive(Debug, Clone)]
pub struct Cqcc {
    kernel: CqtKernel,
    frame_len: usize,
    hop: usize,
    /// Uniform-axis frequencies.
    grid_hz: Vec<f64>,
    // For each grid point: lower geometric bin and interpolation weight.
    interp: Vec<(usize, f64)>,
    dct: Dct2,
}

impl Cqcc {
    pub fn new(cfg: &FeatureConfig, sample_rate_hz: u32) -> Result<Self> {
        let kernel = CqtKernel::new(&cfg.cqt, sample_rate_hz)?;
        let step = cfg.cqt.fmin_hz / cfg.cqt.resample_period as f64;
        let top = *kernel.freqs_hz.last().expect("kernel has bins");
        let n_grid = ((top - kernel.fmin_hz) / step).floor() as usize + 1;
        let grid_hz: Vec<f64> = (0..n_grid).map(|i| kernel.fmin_hz + step * i as f64).collect();
        let mut interp = Vec::with_capacity(n_grid);
        let mut k = 0;
        for &f in &grid_hz {
            while k + 2 < kernel.n_bins() && kernel.freqs_hz[k + 1] <= f {
                k += 1;
            }
            let (f0, f1) = (kernel.freqs_hz[k], kernel.freqs_hz[k + 1]);
            interp.push((k, ((f - f0) / (f1 - f0)).clamp(0.0, 1.0)));
        }
        if n_grid < cfg.n_ceps {
            return Err(Error::config(
                "features.cqt.resample_period",
                format!("uniform axis has {n_grid} points, fewer than n_ceps"),
            ));
        }
        Ok(Cqcc {
            dct: Dct2::new(n_grid, cfg.n_ceps)?,
            frame_len: ms_to_samples(cfg.frame_ms, sample_rate_hz),
            hop: ms_to_samples(cfg.hop_ms, sample_rate_hz),
            kernel,
            grid_hz,
            interp,
        })
    }

    pub fn kernel(&self) -> &CqtKernel {
        &self.kernel
    }

    pub fn grid_hz(&self) -> &[f64] {
        &self.grid_hz
    }

    /// Centers of the analysis frames, so CQCC rows align with the other
    /// extractors' frames.
    pub fn frame_centers(&self, len: usize) -> Vec<usize> {
        let n = FrameSequence::count_for(len, self.frame_len, self.hop);
        (0..n).map(|t| t * self.hop + self.frame_len / 2).collect()
    }

    /// `n_frames x n_grid` uniformly resampled log power.
    pub fn resampled_log_power(&self, w: &Waveform) -> Result<Array2<f64>> {
        let centers = self.frame_centers(w.len());
        if centers.is_empty() {
            return Err(Error::TooShort {
                needed: self.frame_len,
                got: w.len(),
            });
        }
        let spec = cqt_at(w, &self.kernel, &centers)?;
        let mut out = Array2::zeros((centers.len(), self.grid_hz.len()));
        let mut log_power = vec![0.0; self.kernel.n_bins()];
        for (t, mut row) in out.rows_mut().into_iter().enumerate() {
            for (lp, y) in log_power.iter_mut().zip(spec.y.column(t)) {
                *lp = floored_ln(y.norm_sqr());
            }
            for (o, &(k, a)) in row.iter_mut().zip(&self.interp) {
                *o = (1.0 - a) * log_power[k] + a * log_power[k + 1];
            }
        }
        Ok(out)
    }

    pub(super) fn extract(&self, w: &Waveform, hop_ms: f64) -> Result<FeatureMatrix> {
        let resampled = self.resampled_log_power(w)?;
        let mut out = Array2::zeros((resampled.nrows(), self.dct.n_keep()));
        for (src, mut dst) in resampled.rows().into_iter().zip(out.rows_mut()) {
            self.dct.apply_into(
                src.as_slice().expect("contiguous row"),
                dst.as_slice_mut().expect("contiguous row"),
            )?;
        }
        FeatureMatrix::new(FeatureKind::Cqcc, out, hop_ms)
    }
}

/// Constant-Q cepstra. Static coefficients only.
pub fn extract_cqcc(w: &Waveform, cfg: &FeatureConfig) -> Result<FeatureMatrix> {
    FeatureExtractor::new(cfg, w.sample_rate_hz())?.extract_static(FeatureKind::Cqcc, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::CqtConfig;
    use std::f64::consts::PI;

    fn desk_cfg() -> FeatureConfig {
        FeatureConfig {
            cqt: CqtConfig {
                bins_per_octave: 24,
                ..CqtConfig::default()
            },
            ..FeatureConfig::default()
        }
    }

    fn signal(f: impl Fn(f64) -> f64) -> Waveform {
        Waveform::new((0..16000).map(|n| f(n as f64 / 16000.0)).collect(), 16000).unwrap()
    }

    #[test]
    fn grid_spacing_is_fmin_over_d() {
        let c = Cqcc::new(&FeatureConfig::default(), 16000).unwrap();
        let g = c.grid_hz();
        assert!((g[1] - g[0] - 15.625 / 16.0).abs() < 1e-12);
        assert!(*g.last().unwrap() <= *c.kernel().freqs_hz.last().unwrap());
    }

    #[test]
    fn rows_match_frame_count() {
        let cfg = desk_cfg();
        let w = signal(|t| (2.0 * PI * 300.0 * t).sin());
        assert_eq!(extract_cqcc(&w, &cfg).unwrap().rows().dim(), (99, 30));
        let short = Waveform::new(w.samples()[..4000].to_vec(), 16000).unwrap();
        assert_eq!(extract_cqcc(&short, &cfg).unwrap().n_frames(), 24);
    }

    #[test]
    fn gain_moves_only_c0() {
        let cfg = desk_cfg();
        let w = signal(|t| {
            (2.0 * PI * 220.0 * t).sin() + 0.3 * (2.0 * PI * 1330.0 * t).sin() + 0.1 * (2.0 * PI * 4100.0 * t).cos()
        });
        let a = extract_cqcc(&w, &cfg).unwrap();
        let b = extract_cqcc(&w.scaled(3.0).unwrap(), &cfg).unwrap();
        let n_grid = Cqcc::new(&cfg, 16000).unwrap().grid_hz().len() as f64;
        let expected_c0 = 2.0 * 3f64.ln() * n_grid.sqrt();
        for (ra, rb) in a.rows().rows().into_iter().zip(b.rows().rows()) {
            assert!((rb[0] - ra[0] - expected_c0).abs() < 1e-6);
            for j in 1..30 {
                assert!((ra[j] - rb[j]).abs() < 1e-8, "coef {j}: {} vs {}", ra[j], rb[j]);
            }
        }
    }
}
