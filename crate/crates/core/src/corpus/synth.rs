//! Synthetic voiced-speech corpus with a simulated mask effect.
//!
//! Every utterance is a harmonic source with a jittered, slowly modulated
//! f0 plus aspiration noise, shaped by a per-speaker formant envelope with
//! a steep roll-off above 4.5 kHz. Each one is written twice: clean
//! (`no_mask`) and passed through a [`MaskFilterSpec`] (`mask`).

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::manifest::{save_manifest, Manifest, ManifestEntry, Partition};
use super::wav::write_wav;
use crate::signal::Waveform;
use crate::{Error, Label, Result, SAMPLE_RATE_HZ};

/// Spectral tilt plus additive white noise. Gain is 0 dB up to
/// `tilt_start_hz` and falls linearly in log-frequency to
/// `-attenuation_db_at_8khz` at 8 kHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskFilterSpec {
    pub attenuation_db_at_8khz: f64,
    pub tilt_start_hz: f64,
    /// White-noise level relative to the clean signal's RMS.
    pub additive_noise_db: f64,
}

impl Default for MaskFilterSpec {
    fn default() -> Self {
        MaskFilterSpec {
            attenuation_db_at_8khz: 6.0,
            tilt_start_hz: 1000.0,
            additive_noise_db: -40.0,
        }
    }
}

impl MaskFilterSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.attenuation_db_at_8khz >= 0.0 && self.attenuation_db_at_8khz.is_finite()) {
            return Err(Error::config(
                "corpus.mask.attenuation_db_at_8khz",
                format!("must be a finite value >= 0, got {}", self.attenuation_db_at_8khz),
            ));
        }
        if !(self.tilt_start_hz > 0.0 && self.tilt_start_hz < 8000.0) {
            return Err(Error::config(
                "corpus.mask.tilt_start_hz",
                format!("must lie in (0, 8000), got {}", self.tilt_start_hz),
            ));
        }
        if !self.additive_noise_db.is_finite() {
            return Err(Error::config("corpus.mask.additive_noise_db", "must be finite"));
        }
        Ok(())
    }

    pub fn gain_db(&self, hz: f64) -> f64 {
        if hz <= self.tilt_start_hz {
            0.0
        } else {
            -self.attenuation_db_at_8khz * (hz / self.tilt_start_hz).log2() / (8000.0 / self.tilt_start_hz).log2()
        }
    }

    /// Applies the tilt in the DFT domain and adds the noise.
    pub fn apply(&self, clean: &Waveform, rng: &mut impl Rng) -> Result<Waveform> {
        let sr = clean.sample_rate_hz() as f64;
        let tilted = shape_spectrum(clean.samples(), sr, |f| 10f64.powf(self.gain_db(f) / 20.0));
        let rms = (clean.samples().iter().map(|x| x * x).sum::<f64>() / clean.len() as f64).sqrt();
        let noise = Normal::new(0.0, rms * 10f64.powf(self.additive_noise_db / 20.0)).expect("valid sigma");
        Waveform::new(tilted.into_iter().map(|x| x + noise.sample(rng)).collect(), clean.sample_rate_hz())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// Speakers split between train and dev; dev gets `n_speakers / 2`.
    pub n_speakers: usize,
    pub utts_per_speaker: usize,
    /// Additional speakers placed in the test partition.
    pub test_speakers: usize,
    /// Write test labels as `?`.
    pub blind_test: bool,
    pub seed: u64,
    pub duration_s: f64,
    pub mask: MaskFilterSpec,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_speakers: 16,
            utts_per_speaker: 25,
            test_speakers: 0,
            blind_test: false,
            seed: 1,
            duration_s: 1.0,
            mask: MaskFilterSpec::default(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_speakers == 0 {
            return Err(Error::config("corpus.n_speakers", "must be at least 1"));
        }
        if self.utts_per_speaker == 0 {
            return Err(Error::config("corpus.utts_per_speaker", "must be at least 1"));
        }
        if !(self.duration_s >= 0.1 && self.duration_s <= 60.0) {
            return Err(Error::config("corpus.duration_s", "must lie in [0.1, 60]"));
        }
        self.mask.validate()
    }

    pub fn partition_of(&self, speaker: usize) -> Partition {
        let train = self.n_speakers - self.n_speakers / 2;
        if speaker < train {
            Partition::Train
        } else if speaker < self.n_speakers {
            Partition::Dev
        } else {
            Partition::Test
        }
    }
}

/// Multiplies the spectrum of `x` by a real, even gain and returns the real
/// signal.
fn shape_spectrum(x: &[f64], sr: f64, gain: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = x.len();
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, b) in buf.iter_mut().enumerate() {
        let f = k.min(n - k) as f64 * sr / n as f64;
        *b *= gain(f);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

struct Speaker {
    f0_hz: f64,
    formants_hz: [f64; 4],
    bandwidths_hz: [f64; 4],
}

const FORMANT_GAINS: [f64; 4] = [1.0, 0.7, 0.5, 0.35];
const ENVELOPE_FLOOR: f64 = 0.05;
const ROLLOFF_HZ: f64 = 5000.0;

impl Speaker {
    fn draw(rng: &mut impl Rng) -> Self {
        Speaker {
            f0_hz: rng.random_range(110.0..230.0),
            formants_hz: [
                rng.random_range(300.0..800.0),
                rng.random_range(900.0..2300.0),
                rng.random_range(2400.0..3200.0),
                rng.random_range(3300.0..4200.0),
            ],
            bandwidths_hz: [
                rng.random_range(60.0..120.0),
                rng.random_range(80.0..150.0),
                rng.random_range(100.0..200.0),
                rng.random_range(150.0..250.0),
            ],
        }
    }

    fn utterance(&self, n: usize, sr: f64, rng: &mut impl Rng) -> Vec<f64> {
        let f0 = (self.f0_hz * rng.random_range(0.9..1.1)).clamp(100.0, 250.0);
        let vib_rate = rng.random_range(1.0..4.0);
        let vib_phase = rng.random_range(0.0..2.0 * PI);
        let syll_rate = rng.random_range(3.0..5.0);
        let syll_phase = rng.random_range(0.0..PI);
        let formants: Vec<f64> = self.formants_hz.iter().map(|f| f * rng.random_range(0.93..1.07)).collect();

        // Cycle-to-cycle jitter: 1% random steps every 10 ms, interpolated.
        let step = 160;
        let knots: Vec<f64> = (0..n / step + 2).map(|_| rng.random_range(-0.01..0.01)).collect();
        let max_f0 = f0 * 1.08;
        let n_harm = ((0.49 * sr) / max_f0).floor() as usize;
        let harm_phase: Vec<f64> = (0..n_harm).map(|_| rng.random_range(0.0..2.0 * PI)).collect();

        let mut phase = 0.0;
        let mut source = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 / sr;
            let (k, frac) = (i / step, (i % step) as f64 / step as f64);
            let jitter = knots[k] * (1.0 - frac) + knots[k + 1] * frac;
            let inst = f0 * (1.0 + 0.06 * (2.0 * PI * vib_rate * t + vib_phase).sin() + jitter);
            phase += 2.0 * PI * inst / sr;
            let v: f64 = harm_phase
                .iter()
                .enumerate()
                .map(|(h, p)| ((h + 1) as f64 * phase + p).cos() / (h + 1) as f64)
                .sum();
            source.push(v);
        }
        let rms = (source.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
        let aspiration = Normal::new(0.0, rms * 10f64.powf(-25.0 / 20.0)).expect("valid sigma");
        for (i, s) in source.iter_mut().enumerate() {
            let t = i as f64 / sr;
            let env = 0.55 + 0.45 * (PI * syll_rate * t + syll_phase).sin().powi(2);
            *s = (*s + aspiration.sample(rng)) * env;
        }

        let bw = self.bandwidths_hz;
        let mut shaped = shape_spectrum(&source, sr, |f| {
            let resonances: f64 = formants
                .iter()
                .zip(&bw)
                .zip(&FORMANT_GAINS)
                .map(|((fc, b), g)| g / (1.0 + ((f - fc) / (b / 2.0)).powi(2)))
                .sum();
            let rolloff = if f > ROLLOFF_HZ { (ROLLOFF_HZ / f).powi(8) } else { 1.0 };
            (resonances + ENVELOPE_FLOOR) * rolloff
        });
        let peak = shaped.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for s in &mut shaped {
            *s *= 0.5 / peak;
        }
        shaped
    }
}

/// Writes `wav/<id>.wav`, `manifest.tsv` and `corpus.toml` under `out_dir`
/// and returns the manifest. Ids look like `spk03_u007_mask`. Each speaker
/// draws from its own stream of the seeded generator, so the corpus is
/// bit-identical for a fixed config.
pub fn synth_corpus(cfg: &SynthConfig, out_dir: &Path) -> Result<Manifest> {
    cfg.validate()?;
    let wav_dir = out_dir.join("wav");
    fs::create_dir_all(&wav_dir).map_err(|e| Error::io(&wav_dir, e))?;
    let sr = SAMPLE_RATE_HZ as f64;
    let n = (cfg.duration_s * sr).round() as usize;
    let mut entries = Vec::new();
    for spk in 0..cfg.n_speakers + cfg.test_speakers {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(spk as u64);
        let speaker = Speaker::draw(&mut rng);
        let partition = cfg.partition_of(spk);
        for u in 0..cfg.utts_per_speaker {
            let clean = Waveform::new(speaker.utterance(n, sr, &mut rng), SAMPLE_RATE_HZ)?;
            let masked = cfg.mask.apply(&clean, &mut rng)?;
            for (label, w) in [(Label::NoMask, &clean), (Label::Mask, &masked)] {
                let utt_id = format!("spk{spk:02}_u{u:03}_{label}");
                let rel = Path::new("wav").join(format!("{utt_id}.wav"));
                write_wav(&out_dir.join(&rel), w)?;
                let hidden = partition == Partition::Test && cfg.blind_test;
                entries.push(ManifestEntry {
                    utt_id,
                    path: rel,
                    partition,
                    label: if hidden { None } else { Some(label) },
                });
            }
        }
    }
    let manifest = Manifest::new(entries, out_dir)?;
    save_manifest(&out_dir.join("manifest.tsv"), &manifest)?;
    let meta_path = out_dir.join("corpus.toml");
    let meta = toml::to_string(cfg).map_err(|e| Error::invalid(e.to_string()))?;
    fs::write(&meta_path, meta).map_err(|e| Error::io(&meta_path, e))?;
    Ok(manifest)
}
