use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::signal::Waveform;
use crate::{Error, Result, SAMPLE_RATE_HZ};

/// Errors after the file was opened are format problems, including
/// truncation; only opening and creating map to I/O errors.
fn format_error(path: &Path, e: hound::Error) -> Error {
    Error::AudioFormat(format!("{}: {e}", path.display()))
}

/// Reads 16-bit PCM mono at 16 kHz, scaled to [-1, 1). Any other format is
/// rejected with an error naming the offending property.
pub fn load_wav(path: &Path) -> Result<Waveform> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = WavReader::new(BufReader::new(file)).map_err(|e| format_error(path, e))?;
    let spec = reader.spec();
    let reject = |what: String| Err(Error::AudioFormat(format!("{}: {what}", path.display())));
    if spec.channels != 1 {
        return reject(format!("channel count {}, expected 1 (mono)", spec.channels));
    }
    if spec.sample_rate != SAMPLE_RATE_HZ {
        return reject(format!("sample rate {} Hz, expected {SAMPLE_RATE_HZ} Hz", spec.sample_rate));
    }
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return reject(format!(
            "bit depth {} ({:?}), expected 16-bit integer PCM",
            spec.bits_per_sample, spec.sample_format
        ));
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32768.0))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| format_error(path, e))?;
    if samples.is_empty() {
        return reject("no samples".into());
    }
    Waveform::new(samples, spec.sample_rate)
}

/// Writes 16-bit PCM mono, rounding and clipping to the i16 range.
pub fn write_wav(path: &Path, w: &Waveform) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: w.sample_rate_hz(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let io_error = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::AudioFormat(format!("{}: {other}", path.display())),
    };
    let mut writer = WavWriter::new(BufWriter::new(file), spec).map_err(io_error)?;
    for &s in w.samples() {
        let q = (s * 32768.0).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        writer.write_sample(q).map_err(io_error)?;
    }
    writer.finalize().map_err(io_error)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_raw(path: &Path, channels: u16, rate: u32, bits: u16, n: usize) {
        let spec = WavSpec {
            channels,
            sample_rate: rate,
            bits_per_sample: bits,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(path, spec).unwrap();
        for i in 0..n * channels as usize {
            if bits == 16 {
                w.write_sample((i % 100) as i16).unwrap();
            } else {
                w.write_sample((i % 100) as i32).unwrap();
            }
        }
        w.finalize().unwrap();
    }

    #[test]
    fn one_second_mono_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        write_raw(&p, 1, 16000, 16, 16000);
        let w = load_wav(&p).unwrap();
        assert_eq!(w.len(), 16000);
        assert_eq!(w.samples()[5], 5.0 / 32768.0);
    }

    #[test]
    fn rejections_name_the_property() {
        let dir = tempfile::tempdir().unwrap();
        let cases = [
            (2, 16000, 16, "channel count"),
            (1, 44100, 16, "sample rate"),
            (1, 16000, 24, "bit depth"),
        ];
        for (i, (ch, rate, bits, needle)) in cases.into_iter().enumerate() {
            let p = dir.path().join(format!("{i}.wav"));
            write_raw(&p, ch, rate, bits, 100);
            match load_wav(&p) {
                Err(Error::AudioFormat(msg)) => assert!(msg.contains(needle), "{msg}"),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn corrupt_and_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.wav");
        std::fs::write(&p, b"RIFF0000WAVEjunk").unwrap();
        let r = load_wav(&p); assert!(matches!(r, Err(Error::AudioFormat(_))), "{r:?}");
        let missing = load_wav(&dir.path().join("none.wav")).unwrap_err();
        assert_eq!(missing.exit_code(), 1);
    }

    #[test]
    fn write_then_read_quantizes() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("q.wav");
        let w = Waveform::new(vec![0.0, 0.5, -0.5, 1.5, -1.5, 1e-6], 16000).unwrap();
        write_wav(&p, &w).unwrap();
        let back = load_wav(&p).unwrap();
        assert_eq!(back.samples(), &[0.0, 0.5, -0.5, 32767.0 / 32768.0, -1.0, 0.0]);
    }
}
