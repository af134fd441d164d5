//! Spectrograms and pyknograms, as data and as PNG panels.

mod pyknogram;
mod render;
mod spectrogram;

pub use pyknogram::{compute_pyknogram, Pyknogram, PyknogramConfig, PyknoPoint};
pub use render::{render, Panel, RenderStyle};
pub use spectrogram::{compute_spectrogram, SpectrogramConfig, SpectrogramGrid};
