//! Audio and label ingestion, 1-second segmentation and the synthetic
//! mask-effect corpus.

mod manifest;
mod segment;
mod synth;
mod wav;

pub use manifest::{load_manifest, save_manifest, Manifest, ManifestEntry, Partition};
pub use segment::segment_1s;
pub use synth::{synth_corpus, MaskFilterSpec, SynthConfig};
pub use wav::{load_wav, write_wav};
