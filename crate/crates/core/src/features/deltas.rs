use ndarray::{s, Array2, ArrayView2};

use super::FeatureMatrix;
use crate::{Error, Result};

/// Regression deltas over `±window` frames with edge replication.
fn regression_deltas(x: ArrayView2<f64>, window: usize) -> Array2<f64> {
    let (n, d) = x.dim();
    let denom: f64 = 2.0 * (1..=window).map(|k| (k * k) as f64).sum::<f64>();
    let mut out = Array2::zeros((n, d));
    for t in 0..n {
        for k in 1..=window {
            let fwd = (t + k).min(n - 1);
            let back = t.saturating_sub(k);
            let kf = k as f64;
            for j in 0..d {
                out[[t, j]] += kf * (x[[fwd, j]] - x[[back, j]]);
            }
        }
    }
    out /= denom;
    out
}

/// Stack `[static | delta | delta-delta]` columns.
pub fn append_deltas(f: &FeatureMatrix, delta_window: usize) -> Result<FeatureMatrix> {
    if delta_window == 0 {
        return Err(Error::invalid("delta window must be positive"));
    }
    let needed = 2 * delta_window + 1;
    if f.n_frames() < needed {
        return Err(Error::invalid(format!(
            "deltas over ±{delta_window} frames need at least {needed} frames, got {}",
            f.n_frames()
        )));
    }
    let d = f.dim();
    let delta = regression_deltas(f.rows().view(), delta_window);
    let delta2 = regression_deltas(delta.view(), delta_window);
    let mut out = Array2::zeros((f.n_frames(), 3 * d));
    out.slice_mut(s![.., 0..d]).assign(f.rows());
    out.slice_mut(s![.., d..2 * d]).assign(&delta);
    out.slice_mut(s![.., 2 * d..3 * d]).assign(&delta2);
    FeatureMatrix::new(f.kind(), out, f.frame_hop_ms())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;

    fn matrix(rows: Array2<f64>) -> FeatureMatrix {
        FeatureMatrix::new(FeatureKind::Lfcc, rows, 10.0).unwrap()
    }

    #[test]
    fn constant_features_have_zero_deltas() {
        let f = matrix(Array2::from_elem((99, 30), 1.75));
        let out = append_deltas(&f, 2).unwrap();
        assert_eq!(out.rows().dim(), (99, 90));
        assert!(out.rows().slice(s![.., 30..]).iter().all(|&v| v == 0.0));
        assert_eq!(out.rows().slice(s![.., ..30]), f.rows());
    }

    #[test]
    fn linear_ramp_has_constant_delta_in_interior() {
        let f = matrix(Array2::from_shape_fn((20, 3), |(t, j)| 0.5 * t as f64 + j as f64));
        let out = append_deltas(&f, 2).unwrap();
        let r = out.rows();
        // interior frames where the whole ±2 window is inside, for delta; ±4 for delta-delta
        for t in 2..18 {
            for j in 0..3 {
                assert!((r[[t, 3 + j]] - 0.5).abs() < 1e-12);
            }
        }
        for t in 4..16 {
            for j in 0..3 {
                assert!(r[[t, 6 + j]].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn too_few_frames() {
        let f = matrix(Array2::zeros((4, 30)));
        assert!(append_deltas(&f, 2).is_err());
        assert!(append_deltas(&matrix(Array2::zeros((5, 30))), 2).is_ok());
        assert!(append_deltas(&matrix(Array2::zeros((5, 30))), 0).is_err());
    }
}
