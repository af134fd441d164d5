use crate::{Error, Label, Result};

/// Per-utterance majority over systems. `mask` needs strictly more votes
/// than `no_mask`; an exact tie yields `no_mask`.
pub fn majority_vote(predictions: &[Vec<Label>]) -> Result<Vec<Label>> {
    let Some(first) = predictions.first() else {
        return Err(Error::invalid("majority vote needs at least one system"));
    };
    let n = first.len();
    if let Some(bad) = predictions.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    Ok((0..n)
        .map(|i| {
            let mask = predictions.iter().filter(|p| p[i] == Label::Mask).count();
            if 2 * mask > predictions.len() {
                Label::Mask
            } else {
                Label::NoMask
            }
        })
        .collect())
}
