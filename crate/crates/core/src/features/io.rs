//! Feature matrix containers.
//!
//! Binary layout, little-endian:
//!
//! | bytes | field |
//! |---|---|
//! | 4 | magic `MSKF` |
//! | 2 | version (1) |
//! | 1 | kind code: 0 LFCC, 1 MFCC, 2 IFCC, 3 CQCC |
//! | 1 | reserved (0) |
//! | 4 | frame count (u32) |
//! | 4 | dimension (u32) |
//! | 8 | frame hop in ms (f64) |
//! | 8 x frames x dim | row-major f64 payload |
//!
//! The text export is a `# kind=... frames=... dim=... hop_ms=...` header
//! followed by one space-separated row per frame.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use super::{FeatureKind, FeatureMatrix};
use crate::{Error, Result};

pub const FEATURE_MAGIC: &[u8; 4] = b"MSKF";
const VERSION: u16 = 1;
const HEADER_LEN: usize = 24;

pub fn encode(f: &FeatureMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * f.rows().len());
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(f.kind().code());
    out.push(0);
    out.extend_from_slice(&(f.n_frames() as u32).to_le_bytes());
    out.extend_from_slice(&(f.dim() as u32).to_le_bytes());
    out.extend_from_slice(&f.frame_hop_ms().to_le_bytes());
    for v in f.rows().iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<FeatureMatrix> {
    let bad = |msg: String| Error::Malformed {
        what: "feature file",
        msg,
    };
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[0..4] != FEATURE_MAGIC {
        return Err(bad("bad magic".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let kind = FeatureKind::from_code(bytes[6])?;
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as usize;
    let (n, d) = (u32_at(8), u32_at(12));
    let hop = f64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
    let expected = HEADER_LEN + 8 * n * d;
    if bytes.len() != expected {
        return Err(bad(format!("expected {expected} bytes for {n}x{d}, found {}", bytes.len())));
    }
    let data: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let rows = Array2::from_shape_vec((n, d), data).map_err(|e| bad(e.to_string()))?;
    FeatureMatrix::new(kind, rows, hop)
}

pub fn write_features(path: &Path, f: &FeatureMatrix) -> Result<()> {
    fs::write(path, encode(f)).map_err(|e| Error::io(path, e))
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn write_features_text(path: &Path, f: &FeatureMatrix) -> Result<()> {
    let mut out = format!(
        "# kind={} frames={} dim={} hop_ms={}\n",
        f.kind().display_name(),
        f.n_frames(),
        f.dim(),
        f.frame_hop_ms()
    );
    for row in f.rows().rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn binary_round_trip_is_bit_exact(
            n in 1usize..12, d in 1usize..8, seed in any::<u64>(), kind in 0u8..4,
        ) {
            let data: Vec<f64> = (0..n * d)
                .map(|i| f64::from_bits(seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) >> 2) * 1e-300)
                .map(|v| if v.is_finite() { v } else { 0.5 })
                .collect();
            let f = FeatureMatrix::new(
                FeatureKind::from_code(kind).unwrap(),
                Array2::from_shape_vec((n, d), data).unwrap(),
                10.0,
            ).unwrap();
            let back = decode(&encode(&f)).unwrap();
            prop_assert_eq!(back.kind(), f.kind());
            for (a, b) in back.rows().iter().zip(f.rows().iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn rejects_corruption() {
        let f = FeatureMatrix::new(FeatureKind::Cqcc, Array2::ones((3, 2)), 10.0).unwrap();
        let mut bytes = encode(&f);
        assert_eq!(bytes.len(), 24 + 48);
        assert!(decode(&bytes[..30]).is_err());
        bytes[0] = b'X';
        assert!(decode(&bytes).is_err());
        let mut bytes = encode(&f);
        bytes[6] = 9;
        assert!(decode(&bytes).is_err());
    }

    #[test]
    fn text_export_has_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.txt");
        let f = FeatureMatrix::new(FeatureKind::Lfcc, Array2::from_elem((2, 3), 0.25), 10.0).unwrap();
        write_features_text(&path, &f).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "# kind=LFCC frames=2 dim=3 hop_ms=10\n0.25 0.25 0.25\n0.25 0.25 0.25\n");
    }
}
