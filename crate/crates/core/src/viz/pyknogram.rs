use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::features::inst_freq_track;
use crate::signal::{ms_to_samples, FrameSequence, Waveform};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PyknogramConfig {
    pub n_subbands: usize,
    pub frame_ms: f64,
    pub hop_ms: f64,
    /// Points whose subband envelope is below this fraction of the
    /// utterance's peak envelope are dropped.
    pub amp_threshold_rel: f64,
}

impl Default for PyknogramConfig {
    fn default() -> Self {
        PyknogramConfig {
            n_subbands: 60,
            frame_ms: 20.0,
            hop_ms: 10.0,
            amp_threshold_rel: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PyknoPoint {
    pub time_s: f64,
    pub freq_hz: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pyknogram {
    pub points: Vec<PyknoPoint>,
    pub n_subbands: usize,
    /// Absolute envelope threshold applied.
    pub amp_threshold: f64,
    pub duration_s: f64,
    pub nyquist_hz: f64,
}

impl Pyknogram {
    /// `time freq amplitude` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            writeln!(out, "{} {} {}", p.time_s, p.freq_hz, p.amplitude).expect("string write");
        }
        out
    }
}

/// Instantaneous frequency of every IFCC subband, sampled once per hop at
/// the frame centers. Points at envelope nulls or below the threshold are
/// omitted.
pub fn compute_pyknogram(w: &Waveform, cfg: &PyknogramConfig) -> Result<Pyknogram> {
    if !(cfg.amp_threshold_rel >= 0.0 && cfg.amp_threshold_rel.is_finite()) {
        return Err(Error::config("render.pyknogram.amp_threshold_rel", "must be finite and >= 0"));
    }
    let sr = w.sample_rate_hz();
    let frame_len = ms_to_samples(cfg.frame_ms, sr);
    let hop = ms_to_samples(cfg.hop_ms, sr);
    if hop == 0 || frame_len < hop {
        return Err(Error::config("render.pyknogram.hop_ms", "need frame_ms >= hop_ms > 0"));
    }
    let n_frames = FrameSequence::count_for(w.len(), frame_len, hop);
    if n_frames == 0 {
        return Err(Error::TooShort {
            needed: frame_len,
            got: w.len(),
        });
    }
    let track = inst_freq_track(w, cfg.n_subbands)?;
    let peak = track.amplitude.iter().fold(0.0f64, |m, &a| m.max(a));
    let threshold = cfg.amp_threshold_rel * peak;
    let to_hz = sr as f64 / (2.0 * std::f64::consts::PI);
    let mut points = Vec::new();
    for t in 0..n_frames {
        let n = t * hop + frame_len / 2;
        for b in 0..cfg.n_subbands {
            let amplitude = track.amplitude[[b, n]];
            if track.flagged[[b, n]] || amplitude <= 0.0 || amplitude < threshold {
                continue;
            }
            points.push(PyknoPoint {
                time_s: n as f64 / sr as f64,
                freq_hz: track.subband_if[[b, n]] * to_hz,
                amplitude,
            });
        }
    }
    Ok(Pyknogram {
        points,
        n_subbands: cfg.n_subbands,
        amp_threshold: threshold,
        duration_s: w.duration_s(),
        nyquist_hz: sr as f64 / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::SubbandLayout;
    use std::f64::consts::PI;

    fn wave(f: impl Fn(f64) -> f64) -> Waveform {
        Waveform::new((0..16000).map(|n| f(n as f64 / 16000.0)).collect(), 16000).unwrap()
    }

    #[test]
    fn tone_points_cluster_at_the_tone() {
        let p = compute_pyknogram(&wave(|t| (2.0 * PI * 2000.0 * t).sin()), &PyknogramConfig::default()).unwrap();
        let width = SubbandLayout::new(16000, 60, 16000).unwrap().width_hz(15);
        assert!(!p.points.is_empty());
        for pt in &p.points {
            assert!((pt.freq_hz - 2000.0).abs() <= width, "{pt:?}");
            assert!(pt.amplitude >= p.amp_threshold);
        }
    }

    #[test]
    fn silence_keeps_nothing() {
        let p = compute_pyknogram(&wave(|_| 0.0), &PyknogramConfig::default()).unwrap();
        assert!(p.points.is_empty());
        assert_eq!(p.to_text(), "");
    }

    #[test]
    fn chirp_track_rises_with_its_instantaneous_frequency() {
        // Oracle: the chirp's analytic IF, f(t) = 500 + 2500 t.
        let (f0, f1) = (500.0, 3000.0);
        let w = wave(|t| (2.0 * PI * (f0 * t + 0.5 * (f1 - f0) * t * t)).sin());
        let p = compute_pyknogram(&w, &PyknogramConfig::default()).unwrap();
        let width = SubbandLayout::new(16000, 60, 16000).unwrap().width_hz(0);
        // strongest point per time step, away from the circular edges
        let mut interior: Vec<(f64, f64, f64)> = Vec::new();
        for pt in p.points.iter().filter(|q| q.time_s > 0.05 && q.time_s < 0.95) {
            match interior.last_mut() {
                Some(last) if last.0 == pt.time_s => {
                    if pt.amplitude > last.2 {
                        *last = (pt.time_s, pt.freq_hz, pt.amplitude);
                    }
                }
                _ => interior.push((pt.time_s, pt.freq_hz, pt.amplitude)),
            }
        }
        assert!(interior.len() > 80);
        for &(t, f, _) in &interior {
            assert!((f - (f0 + (f1 - f0) * t)).abs() <= width, "t={t} f={f}");
        }
        for pair in interior.windows(5).step_by(5) {
            assert!(pair[4].1 > pair[0].1, "{pair:?}");
        }
    }

    #[test]
    fn frequencies_stay_in_band() {
        let w = wave(|t| ((t * 7919.0).sin() * 1e4).fract() - 0.5);
        let p = compute_pyknogram(&w, &PyknogramConfig::default()).unwrap();
        assert!(p.points.iter().all(|q| (0.0..=8000.0).contains(&q.freq_hz)));
    }

    #[test]
    fn same_input_same_dump() {
        let w = wave(|t| (2.0 * PI * 700.0 * t).sin() * (1.0 + t));
        let a = compute_pyknogram(&w, &PyknogramConfig::default()).unwrap().to_text();
        let b = compute_pyknogram(&w, &PyknogramConfig::default()).unwrap().to_text();
        assert_eq!(a, b);
        assert!(a.lines().all(|l| l.split(' ').count() == 3));
    }
}
