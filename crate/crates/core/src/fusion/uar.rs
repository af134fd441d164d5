use std::fmt;

use crate::{Error, Label, Result};

/// Counts indexed `[true][predicted]`, `no_mask` first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 2]; 2],
}

impl ConfusionMatrix {
    pub fn new(counts: [[u64; 2]; 2]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn from_labels(truth: &[Label], predicted: &[Label]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                got: predicted.len(),
            });
        }
        let mut cm = ConfusionMatrix::default();
        for (t, p) in truth.iter().zip(predicted) {
            cm.counts[t.index()][p.index()] += 1;
        }
        Ok(cm)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn class_total(&self, truth: Label) -> u64 {
        self.counts[truth.index()].iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UarReport {
    pub recall_no_mask: f64,
    pub recall_mask: f64,
    pub uar_percent: f64,
}

impl fmt::Display for UarReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.uar_percent)
    }
}

/// Unweighted average recall. The percentage is formed from the integer
/// counts with a single rounding.
pub fn uar(cm: &ConfusionMatrix) -> Result<UarReport> {
    let n0 = cm.class_total(Label::NoMask);
    let n1 = cm.class_total(Label::Mask);
    if n0 == 0 || n1 == 0 {
        return Err(Error::invalid("UAR needs at least one utterance of each true class"));
    }
    let hit0 = cm.counts[0][0] as u128;
    let hit1 = cm.counts[1][1] as u128;
    let (n0, n1) = (n0 as u128, n1 as u128);
    let num = 100 * (hit0 * n1 + hit1 * n0);
    let den = 2 * n0 * n1;
    Ok(UarReport {
        recall_no_mask: hit0 as f64 / n0 as f64,
        recall_mask: hit1 as f64 / n1 as f64,
        uar_percent: num as f64 / den as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_examples() {
        let perfect = uar(&ConfusionMatrix::new([[7, 0], [0, 3]])).unwrap();
        assert_eq!(perfect.uar_percent, 100.0);
        assert_eq!(perfect.to_string(), "100.00");
        let r = uar(&ConfusionMatrix::new([[8, 2], [4, 6]])).unwrap();
        assert_eq!((r.recall_no_mask, r.recall_mask), (0.8, 0.6));
        assert_eq!(r.uar_percent, 70.0);
        assert_eq!(r.to_string(), "70.00");
        let one_class = uar(&ConfusionMatrix::new([[0, 90], [0, 10]])).unwrap();
        assert_eq!(one_class.uar_percent, 50.0);
        assert_eq!(one_class.to_string(), "50.00");
    }

    #[test]
    fn empty_class_is_an_error() {
        assert!(uar(&ConfusionMatrix::new([[3, 1], [0, 0]])).is_err());
        assert!(uar(&ConfusionMatrix::default()).is_err());
    }

    #[test]
    fn from_labels_counts() {
        use Label::*;
        let cm = ConfusionMatrix::from_labels(&[Mask, Mask, NoMask], &[Mask, NoMask, NoMask]).unwrap();
        assert_eq!(cm.counts, [[1, 0], [1, 1]]);
        assert_eq!(cm.total(), 3);
        assert!(ConfusionMatrix::from_labels(&[Mask], &[]).is_err());
    }

    proptest! {
        #[test]
        fn invariant_to_class_row_scaling(
            a in 0u64..500, b in 0u64..500, c in 0u64..500, d in 0u64..500, k in 1u64..50, row in 0usize..2,
        ) {
            prop_assume!(a + b > 0 && c + d > 0);
            let cm = ConfusionMatrix::new([[a, b], [c, d]]);
            let mut scaled = cm;
            scaled.counts[row][0] *= k;
            scaled.counts[row][1] *= k;
            let x = uar(&cm).unwrap();
            let y = uar(&scaled).unwrap();
            prop_assert_eq!(x.uar_percent, y.uar_percent);
            prop_assert!((x.uar_percent - 50.0 * (x.recall_no_mask + x.recall_mask)).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&x.recall_mask) && (0.0..=1.0).contains(&x.recall_no_mask));
        }
    }
}
