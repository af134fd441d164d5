use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::classifier::ScoreRecord;
use crate::{Error, Label, Result};

/// Per-utterance scores of several systems, aligned by utterance id.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    systems: Vec<String>,
    utt_ids: Vec<String>,
    /// `utterances x systems`.
    scores: Array2<f64>,
    labels: Option<Vec<Label>>,
}

impl ScoreTable {
    /// Aligns per-system score lists. Utterances keep the order of the first
    /// system; every system must score exactly the same utterances.
    pub fn from_systems(systems: Vec<(String, Vec<ScoreRecord>)>) -> Result<Self> {
        let Some((_, first)) = systems.first() else {
            return Err(Error::invalid("score table needs at least one system"));
        };
        let utt_ids: Vec<String> = first.iter().map(|r| r.utt_id.clone()).collect();
        let index: HashMap<&str, usize> = utt_ids.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
        if index.len() != utt_ids.len() {
            return Err(Error::invalid("duplicate utterance id in score list"));
        }
        let mut scores = Array2::zeros((utt_ids.len(), systems.len()));
        for (s, (name, records)) in systems.iter().enumerate() {
            if records.len() != utt_ids.len() {
                return Err(Error::invalid(format!(
                    "system {name} scores {} utterances, expected {}",
                    records.len(),
                    utt_ids.len()
                )));
            }
            let mut seen = vec![false; utt_ids.len()];
            for r in records {
                let Some(&i) = index.get(r.utt_id.as_str()) else {
                    return Err(Error::invalid(format!("system {name} scores unknown utterance {}", r.utt_id)));
                };
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::invalid(format!("system {name} scores {} twice", r.utt_id)));
                }
                if !r.score.is_finite() {
                    return Err(Error::NonFinite("system score"));
                }
                scores[[i, s]] = r.score;
            }
        }
        Ok(ScoreTable {
            systems: systems.into_iter().map(|(n, _)| n).collect(),
            utt_ids,
            scores,
            labels: None,
        })
    }

    /// Table from a dense matrix, for tests and synthetic studies.
    pub fn from_matrix(systems: Vec<String>, utt_ids: Vec<String>, scores: Array2<f64>) -> Result<Self> {
        if scores.dim() != (utt_ids.len(), systems.len()) {
            return Err(Error::invalid(format!(
                "score matrix {:?} does not match {} utterances x {} systems",
                scores.dim(),
                utt_ids.len(),
                systems.len()
            )));
        }
        if systems.is_empty() {
            return Err(Error::invalid("score table needs at least one system"));
        }
        if scores.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("system score"));
        }
        Ok(ScoreTable {
            systems,
            utt_ids,
            scores,
            labels: None,
        })
    }

    /// Attaches ground truth looked up by utterance id.
    pub fn with_labels(mut self, truth: &BTreeMap<String, Label>) -> Result<Self> {
        let labels = self
            .utt_ids
            .iter()
            .map(|u| {
                truth
                    .get(u)
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("no label for utterance {u}")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn systems(&self) -> &[String] {
        &self.systems
    }

    pub fn utt_ids(&self) -> &[String] {
        &self.utt_ids
    }

    pub fn scores(&self) -> &Array2<f64> {
        &self.scores
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.utt_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utt_ids.is_empty()
    }

    /// Threshold-0 decisions of one system.
    pub fn predictions(&self, system: usize) -> Vec<Label> {
        self.scores.column(system).iter().map(|&s| Label::from_score(s)).collect()
    }
}

fn read_lines(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn split_record<'a>(path: &Path, line_no: usize, line: &'a str) -> Result<(&'a str, &'a str)> {
    let mut parts = line.split('\t');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(id), Some(v), None) if !id.is_empty() => Ok((id, v)),
        _ => Err(Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            msg: "expected `utt_id<TAB>value`".into(),
        }),
    }
}

/// `utt_id<TAB>score` per line, scores in shortest round-trip notation.
pub fn write_scores(path: &Path, records: &[ScoreRecord]) -> Result<()> {
    let mut out = String::new();
    for r in records {
        writeln!(out, "{}\t{}", r.utt_id, r.score).expect("string write");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreRecord>> {
    let text = read_lines(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let (id, v) = split_record(path, i + 1, line)?;
            let score: f64 = v.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("bad score `{v}`"),
            })?;
            if !score.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    msg: "non-finite score".into(),
                });
            }
            Ok(ScoreRecord::new(id, score))
        })
        .collect()
}

/// `utt_id<TAB>label` per line, labels `mask` or `no_mask`.
pub fn write_predictions(path: &Path, predictions: &[(String, Label)]) -> Result<()> {
    let mut out = String::new();
    for (id, label) in predictions {
        writeln!(out, "{id}\t{label}").expect("string write");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_predictions(path: &Path) -> Result<Vec<(String, Label)>> {
    let text = read_lines(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let (id, v) = split_record(path, i + 1, line)?;
            let label = v.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("bad label `{v}`"),
            })?;
            Ok((id.to_string(), label))
        })
        .collect()
}
