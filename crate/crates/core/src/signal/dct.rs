use std::f64::consts::PI;

use crate::{Error, Result};

/// Truncated orthonormal DCT-II with a precomputed basis.
///
/// `c[k] = a_k * sum_n v[n] cos(pi (2n + 1) k / 2N)` with `a_0 = sqrt(1/N)` and
/// `a_k = sqrt(2/N)` otherwise; only `c[0..n_keep]` is produced.
#[derive(Debug, Clone)]
pub struct Dct2 {
    n: usize,
    n_keep: usize,
    // n_keep x n, row-major
    basis: Vec<f64>,
}

impl Dct2 {
    pub fn new(n: usize, n_keep: usize) -> Result<Self> {
        if n_keep == 0 || n_keep > n {
            return Err(Error::invalid(format!(
                "DCT must keep between 1 and {n} coefficients, got {n_keep}"
            )));
        }
        let nf = n as f64;
        let mut basis = Vec::with_capacity(n_keep * n);
        for k in 0..n_keep {
            let a = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            basis.extend((0..n).map(|i| a * (PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf)).cos()));
        }
        Ok(Dct2 { n, n_keep, basis })
    }

    pub fn input_len(&self) -> usize {
        self.n
    }

    pub fn n_keep(&self) -> usize {
        self.n_keep
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_keep];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        for (o, row) in out.iter_mut().zip(self.basis.chunks_exact(self.n)) {
            *o = row.iter().zip(v).map(|(b, x)| b * x).sum();
        }
        Ok(())
    }
}

/// Orthonormal DCT-II of `v`, truncated to the first `n_keep` coefficients.
pub fn dct2_orthonormal(v: &[f64], n_keep: usize) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::invalid("DCT of an empty vector"));
    }
    Dct2::new(v.len(), n_keep)?.apply(v)
}

/// Inverse of the orthonormal DCT-II (a scaled DCT-III), producing `n`
/// samples from coefficients `c`; missing high coefficients are taken as zero.
pub fn idct2_orthonormal(c: &[f64], n: usize) -> Result<Vec<f64>> {
    if n == 0 || c.len() > n {
        return Err(Error::invalid(format!(
            "cannot invert {} coefficients onto {n} samples",
            c.len()
        )));
    }
    let nf = n as f64;
    Ok((0..n)
        .map(|i| {
            c.iter()
                .enumerate()
                .map(|(k, ck)| {
                    let a = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
                    a * ck * (PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf)).cos()
                })
                .sum()
        })
        .collect())
}
