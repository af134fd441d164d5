use std::fmt;
use std::str::FromStr;

use crate::Error;

/// Class of a segment. Ties anywhere in the pipeline resolve to `NoMask`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    NoMask,
    Mask,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::NoMask, Label::Mask];

    /// Row/column index in a confusion matrix.
    pub fn index(self) -> usize {
        match self {
            Label::NoMask => 0,
            Label::Mask => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::NoMask => "no_mask",
            Label::Mask => "mask",
        }
    }

    /// Sign rule on a mask-vs-no-mask score: strictly positive means mask.
    pub fn from_score(score: f64) -> Label {
        if score > 0.0 {
            Label::Mask
        } else {
            Label::NoMask
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mask" => Ok(Label::Mask),
            "no_mask" => Ok(Label::NoMask),
            other => Err(Error::invalid(format!("unknown label `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_rule_breaks_ties_to_no_mask() {
        assert_eq!(Label::from_score(2.0), Label::Mask);
        assert_eq!(Label::from_score(-2.0), Label::NoMask);
        assert_eq!(Label::from_score(0.0), Label::NoMask);
        assert_eq!(Label::from_score(-0.0), Label::NoMask);
    }

    #[test]
    fn parses_round_trip() {
        for l in Label::ALL {
            assert_eq!(l.as_str().parse::<Label>().unwrap(), l);
        }
        assert!("masked".parse::<Label>().is_err());
    }
}
