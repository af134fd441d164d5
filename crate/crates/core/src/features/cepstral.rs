use ndarray::Array2;

use super::{FeatureConfig, FeatureExtractor, FeatureKind, FeatureMatrix};
use crate::signal::{floored_ln, frame_signal, FilterScale, SpectrumAnalyzer, Waveform};
use crate::Result;

/// Linear-filterbank cepstra: power spectrum, linearly spaced triangular
/// filters, log, orthonormal DCT. Static coefficients only.
pub fn extract_lfcc(w: &Waveform, cfg: &FeatureConfig) -> Result<FeatureMatrix> {
    FeatureExtractor::new(cfg, w.sample_rate_hz())?.extract_static(FeatureKind::Lfcc, w)
}

/// As [`extract_lfcc`] with a mel-spaced filterbank.
pub fn extract_mfcc(w: &Waveform, cfg: &FeatureConfig) -> Result<FeatureMatrix> {
    FeatureExtractor::new(cfg, w.sample_rate_hz())?.extract_static(FeatureKind::Mfcc, w)
}

pub(super) fn filterbank_cepstra(ex: &FeatureExtractor, w: &Waveform, scale: FilterScale) -> Result<FeatureMatrix> {
    let cfg = ex.config();
    let n_frames = ex.frames_for(w.len())?;
    let frames = frame_signal(w, cfg.frame_ms, cfg.hop_ms, cfg.window())?;
    debug_assert_eq!(frames.n_frames(), n_frames);
    let (fb, kind) = match scale {
        FilterScale::Linear => (ex.linear_filterbank(), FeatureKind::Lfcc),
        FilterScale::Mel => (ex.mel_filterbank(), FeatureKind::Mfcc),
    };

    let mut analyzer = SpectrumAnalyzer::new(cfg.n_fft)?;
    let mut power = vec![0.0; analyzer.n_bins()];
    let mut energies = vec![0.0; fb.n_filters()];
    let mut out = Array2::zeros((n_frames, cfg.n_ceps));
    for (frame, mut row) in frames.frames.rows().into_iter().zip(out.rows_mut()) {
        analyzer.power_into(frame.as_slice().expect("contiguous frame"), &mut power)?;
        fb.apply_into(&power, &mut energies)?;
        energies.iter_mut().for_each(|e| *e = floored_ln(*e));
        ex.filter_dct
            .apply_into(&energies, row.as_slice_mut().expect("contiguous row"))?;
    }
    FeatureMatrix::new(kind, out, cfg.hop_ms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(freq: f64, len: usize) -> Waveform {
        Waveform::new(
            (0..len).map(|n| 0.5 * (2.0 * PI * freq * n as f64 / 16000.0).sin()).collect(),
            16000,
        )
        .unwrap()
    }

    #[test]
    fn one_second_gives_99_by_30() {
        let cfg = FeatureConfig::default();
        let w = tone(440.0, 16000);
        assert_eq!(extract_lfcc(&w, &cfg).unwrap().rows().dim(), (99, 30));
        assert_eq!(extract_mfcc(&w, &cfg).unwrap().rows().dim(), (99, 30));
    }

    #[test]
    fn silence_gives_identical_finite_rows() {
        let cfg = FeatureConfig::default();
        let w = Waveform::new(vec![0.0; 8000], 16000).unwrap();
        for f in [extract_lfcc(&w, &cfg).unwrap(), extract_mfcc(&w, &cfg).unwrap()] {
            let first = f.rows().row(0).to_owned();
            assert!(first.iter().all(|v| v.is_finite()));
            assert!(f.rows().rows().into_iter().all(|r| r == first));
        }
    }

    #[test]
    fn mel_and_linear_differ_on_coloured_input() {
        let cfg = FeatureConfig::default();
        let w = Waveform::new(
            (0..16000)
                .map(|n| {
                    let t = n as f64 / 16000.0;
                    0.3 * (2.0 * PI * 300.0 * t).sin() + 0.1 * (2.0 * PI * 2500.0 * t).sin()
                })
                .collect(),
            16000,
        )
        .unwrap();
        let l = extract_lfcc(&w, &cfg).unwrap();
        let m = extract_mfcc(&w, &cfg).unwrap();
        let diff = (l.rows() - m.rows()).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(diff > 1e-3);
    }

    #[test]
    fn three_khz_tone_peaks_at_nearest_linear_filter() {
        // Oracle: filter energies by brute-force DFT of the windowed frame,
        // independent of the FFT path.
        let cfg = FeatureConfig::default();
        let ex = FeatureExtractor::new(&cfg, 16000).unwrap();
        let fb = ex.linear_filterbank();
        let w = tone(3000.0, 16000);
        let frames = frame_signal(&w, 20.0, 10.0, cfg.window()).unwrap();
        let frame = frames.frames.row(40);
        let n_fft = cfg.n_fft;
        let power: Vec<f64> = (0..=n_fft / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (n, x) in frame.iter().enumerate() {
                    let ph = -2.0 * PI * (k * n) as f64 / n_fft as f64;
                    re += x * ph.cos();
                    im += x * ph.sin();
                }
                re * re + im * im
            })
            .collect();
        let energies: Vec<f64> = fb
            .weights
            .rows()
            .into_iter()
            .map(|r| r.iter().zip(&power).map(|(a, b)| a * b).sum())
            .collect();
        let argmax = energies.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        let nearest = fb
            .center_freqs_hz
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - 3000.0).abs().total_cmp(&(b.1 - 3000.0).abs()))
            .unwrap()
            .0;
        assert_eq!(argmax, nearest);

        // the production path agrees with the oracle energies
        let mut analyzer = SpectrumAnalyzer::new(n_fft).unwrap();
        let fast = fb.apply(&analyzer.power(frame.as_slice().unwrap()).unwrap()).unwrap();
        for (a, b) in fast.iter().zip(&energies) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }
}
