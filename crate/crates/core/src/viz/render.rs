use std::fs;
use std::path::{Path, PathBuf};

use image::{ImageFormat, Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use super::{Pyknogram, SpectrogramGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderStyle {
    pub width: u32,
    pub height: u32,
    /// Spectrogram colour range below the grid maximum.
    pub dynamic_range_db: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            width: 640,
            height: 320,
            dynamic_range_db: 80.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Panel<'a> {
    Spectrogram(&'a SpectrogramGrid),
    Pyknogram(&'a Pyknogram),
}

// Dark blue through red to pale yellow.
const STOPS: [[f64; 3]; 5] = [
    [0.0, 0.0, 20.0],
    [70.0, 10.0, 110.0],
    [190.0, 40.0, 80.0],
    [250.0, 140.0, 30.0],
    [252.0, 250.0, 190.0],
];

fn colour(v: f64) -> Rgb<u8> {
    let v = v.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (v.floor() as usize).min(STOPS.len() - 2);
    let f = v - i as f64;
    let mix = |c: usize| (STOPS[i][c] * (1.0 - f) + STOPS[i + 1][c] * f).round() as u8;
    Rgb([mix(0), mix(1), mix(2)])
}

fn draw_spectrogram(g: &SpectrogramGrid, style: &RenderStyle) -> RgbImage {
    let (n_t, n_f) = g.log_power.dim();
    let max = g.log_power.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let lo = max - style.dynamic_range_db;
    RgbImage::from_fn(style.width, style.height, |x, y| {
        let t = (x as usize * n_t) / style.width as usize;
        let f = n_f - 1 - (y as usize * n_f) / style.height as usize;
        let v = g.log_power[[t, f]];
        colour(if style.dynamic_range_db > 0.0 { (v - lo) / style.dynamic_range_db } else { 1.0 })
    })
}

fn draw_pyknogram(p: &Pyknogram, style: &RenderStyle) -> RgbImage {
    let mut img = RgbImage::from_pixel(style.width, style.height, Rgb([255, 255, 255]));
    let peak = p.points.iter().fold(0.0f64, |m, q| m.max(q.amplitude));
    let (w, h) = (style.width as f64, style.height as f64);
    for q in &p.points {
        let x = ((q.time_s / p.duration_s) * w).floor().clamp(0.0, w - 1.0) as u32;
        let y = ((1.0 - q.freq_hz / p.nyquist_hz) * h).floor().clamp(0.0, h - 1.0) as u32;
        let shade = (200.0 * (1.0 - q.amplitude / peak)).round() as u8;
        let px = img.get_pixel_mut(x, y);
        if shade < px.0[0] {
            *px = Rgb([shade, shade, shade]);
        }
    }
    img
}

/// Writes the panel as a PNG at `out` and its data dump next to it with a
/// `.txt` extension; returns the dump's path. The dump is produced from the
/// data alone, independent of the image.
pub fn render(panel: Panel<'_>, out: &Path, style: &RenderStyle) -> Result<PathBuf> {
    if style.width == 0 || style.height == 0 {
        return Err(Error::config("render.width", "canvas must be at least 1x1"));
    }
    let (img, dump) = match panel {
        Panel::Spectrogram(g) => (draw_spectrogram(g, style), g.to_text()),
        Panel::Pyknogram(p) => (draw_pyknogram(p, style), p.to_text()),
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    img.save_with_format(out, ImageFormat::Png)?;
    let sidecar = out.with_extension("txt");
    fs::write(&sidecar, dump).map_err(|e| Error::io(&sidecar, e))?;
    Ok(sidecar)
}
