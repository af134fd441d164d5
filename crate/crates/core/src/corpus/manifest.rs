//! Tab-separated utterance lists: `utt_id<TAB>path<TAB>partition<TAB>label`,
//! with `?` as the label of a blinded test entry. Paths are relative to the
//! manifest's directory. Blank lines and lines starting with `#` are
//! skipped.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::{Error, Label, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Partition {
    Train,
    Dev,
    Test,
}

impl Partition {
    pub const ALL: [Partition; 3] = [Partition::Train, Partition::Dev, Partition::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Dev => "dev",
            Partition::Test => "test",
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Partition::Train),
            "dev" => Ok(Partition::Dev),
            "test" => Ok(Partition::Test),
            other => Err(Error::invalid(format!("unknown partition `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub utt_id: String,
    pub path: PathBuf,
    pub partition: Partition,
    pub label: Option<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<ManifestEntry>,
    root: PathBuf,
}

impl Manifest {
    /// Validates unique ids and labels on every train and dev entry.
    pub fn new(entries: Vec<ManifestEntry>, root: impl Into<PathBuf>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if e.utt_id.is_empty() || e.utt_id.contains(char::is_whitespace) {
                return Err(Error::invalid(format!("bad utterance id `{}`", e.utt_id)));
            }
            if !seen.insert(e.utt_id.as_str()) {
                return Err(Error::invalid(format!("duplicate utterance id `{}`", e.utt_id)));
            }
            if e.label.is_none() && e.partition != Partition::Test {
                return Err(Error::invalid(format!(
                    "{} entry `{}` has no label",
                    e.partition, e.utt_id
                )));
            }
        }
        Ok(Manifest {
            entries,
            root: root.into(),
        })
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Directory audio paths are resolved against.
    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn audio_path(&self, e: &ManifestEntry) -> PathBuf {
        self.root.join(&e.path)
    }

    pub fn partition(&self, p: Partition) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.partition == p)
    }

    /// Known labels of one partition, by utterance id.
    pub fn labels(&self, p: Partition) -> BTreeMap<String, Label> {
        self.partition(p)
            .filter_map(|e| e.label.map(|l| (e.utt_id.clone(), l)))
            .collect()
    }

    /// True when every entry of the partition carries a label.
    pub fn is_labeled(&self, p: Partition) -> bool {
        self.partition(p).all(|e| e.label.is_some())
    }
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, rel, part, label] = fields.as_slice() else {
            return Err(parse_err(i + 1, format!("expected 4 tab-separated fields, found {}", fields.len())));
        };
        let partition = part.parse().map_err(|e: Error| parse_err(i + 1, e.to_string()))?;
        let label = match *label {
            "?" => None,
            l => Some(l.parse().map_err(|e: Error| parse_err(i + 1, e.to_string()))?),
        };
        entries.push(ManifestEntry {
            utt_id: id.to_string(),
            path: PathBuf::from(rel),
            partition,
            label,
        });
    }
    let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Manifest::new(entries, root)
}

pub fn save_manifest(path: &Path, m: &Manifest) -> Result<()> {
    let mut out = String::new();
    for e in m.entries() {
        let label = e.label.map_or("?", Label::as_str);
        writeln!(out, "{}\t{}\t{}\t{label}", e.utt_id, e.path.display(), e.partition).expect("string write");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
