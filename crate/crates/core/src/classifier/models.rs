//! Class-conditional model pairs and their on-disk container.
//!
//! Binary layout, little-endian:
//!
//! | bytes | field |
//! |---|---|
//! | 4 | magic `MSKG` |
//! | 2 | version (1) |
//! | 1 | feature kind code |
//! | 1 | reserved (0) |
//! | 8 | variance floor (f64) |
//! | 8 | seed (u64) |
//! | 4 + n | fingerprint: u32 length then UTF-8 bytes |
//! | ... | `no_mask` GMM block, then `mask` GMM block |
//!
//! A GMM block is `M` (u32), `D` (u32), then `M` weights, `M x D` means and
//! `M x D` variances as f64.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::Gmm;
use crate::features::{FeatureKind, FeatureMatrix};
use crate::{Error, Label, Result};

pub const MODEL_MAGIC: &[u8; 4] = b"MSKG";
const VERSION: u16 = 1;

/// One GMM per class, trained on the same feature kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassModels {
    pub kind: FeatureKind,
    pub no_mask: Gmm,
    pub mask: Gmm,
    pub var_floor: f64,
    pub seed: u64,
    /// Free-form identifier of the configuration the models were trained
    /// with, used to detect stale artifacts.
    pub fingerprint: String,
}

impl ClassModels {
    pub fn model(&self, label: Label) -> &Gmm {
        match label {
            Label::NoMask => &self.no_mask,
            Label::Mask => &self.mask,
        }
    }

    pub fn dim(&self) -> usize {
        self.no_mask.dim()
    }
}

/// Per-utterance score, higher meaning more mask-like, with the decision
/// taken at threshold 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub utt_id: String,
    pub score: f64,
    pub predicted: Label,
}

impl ScoreRecord {
    pub fn new(utt_id: impl Into<String>, score: f64) -> Self {
        ScoreRecord {
            utt_id: utt_id.into(),
            score,
            predicted: Label::from_score(score),
        }
    }
}

/// Scores an utterance against both class models as
/// `ll_mask - ll_no_mask`, each the average per-frame log-likelihood. The
/// class with the higher likelihood wins; ties go to `no_mask`.
pub fn classify(models: &ClassModels, utt_id: &str, f: &FeatureMatrix) -> Result<ScoreRecord> {
    if f.kind() != models.kind {
        return Err(Error::invalid(format!(
            "{utt_id}: {} features given to {} models",
            f.kind(),
            models.kind
        )));
    }
    let ll_no_mask = models.no_mask.avg_log_likelihood(f)?;
    let ll_mask = models.mask.avg_log_likelihood(f)?;
    let score = ll_mask - ll_no_mask;
    if !score.is_finite() {
        return Err(Error::NonFinite("log-likelihood score"));
    }
    Ok(ScoreRecord::new(utt_id, score))
}

fn put_gmm(out: &mut Vec<u8>, g: &Gmm) {
    out.extend_from_slice(&(g.n_components() as u32).to_le_bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    for v in g.weights().iter().chain(g.means().iter()).chain(g.variances().iter()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode(m: &ClassModels) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(m.kind.code());
    out.push(0);
    out.extend_from_slice(&m.var_floor.to_le_bytes());
    out.extend_from_slice(&m.seed.to_le_bytes());
    out.extend_from_slice(&(m.fingerprint.len() as u32).to_le_bytes());
    out.extend_from_slice(m.fingerprint.as_bytes());
    put_gmm(&mut out, &m.no_mask);
    put_gmm(&mut out, &m.mask);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(malformed(format!("truncated at byte {}", self.pos))),
        }
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let len = n.checked_mul(8).ok_or_else(|| malformed("size overflow".into()))?;
        Ok(self
            .take(len)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn gmm(&mut self) -> Result<Gmm> {
        let (m, d) = (self.u32()?, self.u32()?);
        let w = self.f64s(m)?;
        let mu = self.f64s(m * d)?;
        let var = self.f64s(m * d)?;
        let shape = |v| Array2::from_shape_vec((m, d), v).map_err(|e| malformed(e.to_string()));
        Gmm::new(Array1::from(w), shape(mu)?, shape(var)?).map_err(|e| malformed(e.to_string()))
    }
}

fn malformed(msg: String) -> Error {
    Error::Malformed {
        what: "model file",
        msg,
    }
}

pub fn decode(bytes: &[u8]) -> Result<ClassModels> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MODEL_MAGIC {
        return Err(malformed("bad magic".into()));
    }
    let version = u16::from_le_bytes(r.take(2)?.try_into().expect("2 bytes"));
    if version != VERSION {
        return Err(malformed(format!("unsupported version {version}")));
    }
    let kind = FeatureKind::from_code(r.take(2)?[0])?;
    let var_floor = f64::from_bits(r.u64()?);
    let seed = r.u64()?;
    let n = r.u32()?;
    let fingerprint = String::from_utf8(r.take(n)?.to_vec()).map_err(|e| malformed(e.to_string()))?;
    let no_mask = r.gmm()?;
    let mask = r.gmm()?;
    if no_mask.dim() != mask.dim() {
        return Err(malformed(format!(
            "class models disagree on dimension: {} vs {}",
            no_mask.dim(),
            mask.dim()
        )));
    }
    if r.pos != bytes.len() {
        return Err(malformed(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(ClassModels {
        kind,
        no_mask,
        mask,
        var_floor,
        seed,
        fingerprint,
    })
}

pub fn write_models(path: &Path, m: &ClassModels) -> Result<()> {
    fs::write(path, encode(m)).map_err(|e| Error::io(path, e))
}

pub fn read_models(path: &Path) -> Result<ClassModels> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
