use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::{Error, Result};

/// DFT `Z[k]` of an analytic signal, together with the signal length `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSpectrum {
    pub bins: Vec<Complex64>,
    pub n: usize,
}

impl AnalyticSpectrum {
    pub fn new(bins: Vec<Complex64>) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::invalid("empty analytic spectrum"));
        }
        if bins.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("analytic spectrum"));
        }
        let n = bins.len();
        Ok(AnalyticSpectrum { bins, n })
    }

    /// Spectrum of the analytic signal of real `x`: DC (and Nyquist, for
    /// even N) kept, positive frequencies doubled, negative ones zeroed.
    pub fn from_real(x: &[f64]) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::invalid("analytic signal of an empty input"));
        }
        let n = x.len();
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        apply_analytic_mask(&mut buf);
        AnalyticSpectrum::new(buf)
    }

    /// Inverse DFT, normalised by `1/N`.
    pub fn to_signal(&self) -> Vec<Complex64> {
        let mut buf = self.bins.clone();
        FftPlanner::new().plan_fft_inverse(self.n).process(&mut buf);
        let inv = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= inv);
        buf
    }
}

/// In-place one-sided weighting of a full-length DFT.
pub(crate) fn apply_analytic_mask(bins: &mut [Complex64]) {
    let n = bins.len();
    for (k, b) in bins.iter_mut().enumerate() {
        if k == 0 || (n % 2 == 0 && k == n / 2) {
            continue;
        }
        if k < n.div_ceil(2) {
            *b *= 2.0;
        } else {
            *b = Complex64::default();
        }
    }
}

/// Analytic signal `z` with `Re z = x` and no negative-frequency content.
pub fn analytic_signal(x: &[f64]) -> Result<Vec<Complex64>> {
    Ok(AnalyticSpectrum::from_real(x)?.to_signal())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn dft(z: &[Complex64]) -> Vec<Complex64> {
        let mut buf = z.to_vec();
        FftPlanner::new().plan_fft_forward(z.len()).process(&mut buf);
        buf
    }

    #[test]
    fn cosine_becomes_complex_exponential() {
        let n = 256;
        let k0 = 19.0;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * k0 * i as f64 / n as f64).cos()).collect();
        let z = analytic_signal(&x).unwrap();
        for (i, zi) in z.iter().enumerate() {
            let expected = Complex64::from_polar(1.0, 2.0 * PI * k0 * i as f64 / n as f64);
            assert!((zi - expected).norm() < 1e-12);
            assert!((zi.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_length_has_no_nyquist_bin() {
        let x = [1.0, -2.0, 0.5, 3.0, 0.25];
        let z = analytic_signal(&x).unwrap();
        let zs = dft(&z);
        assert!(zs[3].norm() < 1e-12 && zs[4].norm() < 1e-12);
        for (a, b) in x.iter().zip(&z) {
            assert!((a - b.re).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_is_error() {
        assert!(analytic_signal(&[]).is_err());
    }

    proptest! {
        #[test]
        fn real_part_preserved_and_negatives_zero(x in prop::collection::vec(-1.0f64..1.0, 2..300)) {
            let z = analytic_signal(&x).unwrap();
            for (a, b) in x.iter().zip(&z) {
                prop_assert!((a - b.re).abs() < 1e-12);
            }
            let zs = dft(&z);
            let n = x.len();
            for k in (n / 2 + 1)..n {
                prop_assert!(zs[k].norm() < 1e-12);
            }
        }
    }
}
