use crate::signal::Waveform;

/// Consecutive non-overlapping one-second segments. A trailing remainder
/// shorter than one second is dropped.
pub fn segment_1s(w: &Waveform) -> Vec<Waveform> {
    let len = w.sample_rate_hz() as usize;
    w.samples()
        .chunks_exact(len)
        .map(|c| Waveform::new(c.to_vec(), w.sample_rate_hz()).expect("segment of a valid waveform"))
        .collect()
}
