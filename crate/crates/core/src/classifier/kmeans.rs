use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct KMeans {
    pub centroids: Array2<f64>,
    pub assignment: Vec<usize>,
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, row) in centroids.rows().into_iter().enumerate() {
        let d = sq_dist(point, row.as_slice().expect("contiguous centroid"));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// k-means++ seeding followed by `iters` Lloyd iterations. Empty clusters
/// keep their previous centroid. Requires a standard-layout `data` with at
/// least `k` rows.
pub fn kmeans(data: ArrayView2<f64>, k: usize, iters: usize, rng: &mut ChaCha8Rng) -> KMeans {
    let (n, d) = data.dim();
    assert!(k >= 1 && n >= k, "kmeans needs at least k rows");
    let row = |i: usize| data.row(i).to_slice().expect("standard layout");

    let mut centroids = Array2::zeros((k, d));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&data.row(first));
    let mut dist: Vec<f64> = (0..n).map(|i| sq_dist(row(i), row(first))).collect();
    for c in 1..k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &di) in dist.iter().enumerate() {
                acc += di;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).assign(&data.row(pick));
        for (i, di) in dist.iter_mut().enumerate() {
            *di = di.min(sq_dist(row(i), row(pick)));
        }
    }

    let mut assignment = vec![0; n];
    for _ in 0..iters {
        for (i, a) in assignment.iter_mut().enumerate() {
            *a = nearest(row(i), &centroids).0;
        }
        let mut sums = Array2::<f64>::zeros((k, d));
        let mut counts = vec![0usize; k];
        for (i, &a) in assignment.iter().enumerate() {
            counts[a] += 1;
            let mut s = sums.row_mut(a);
            s += &data.row(i);
        }
        for c in 0..k {
            if counts[c] > 0 {
                let mean = &sums.row(c) / counts[c] as f64;
                centroids.row_mut(c).assign(&mean);
            }
        }
    }
    for (i, a) in assignment.iter_mut().enumerate() {
        *a = nearest(row(i), &centroids).0;
    }
    KMeans {
        centroids,
        assignment,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn separates_two_blobs() {
        let mut data = Array2::zeros((200, 2));
        for i in 0..200 {
            let c = if i < 100 { -10.0 } else { 10.0 };
            data[[i, 0]] = c + (i % 7) as f64 * 0.1;
            data[[i, 1]] = c - (i % 5) as f64 * 0.1;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let km = kmeans(data.view(), 2, 10, &mut rng);
        assert!(km.assignment[..100].iter().all(|&a| a == km.assignment[0]));
        assert!(km.assignment[100..].iter().all(|&a| a == km.assignment[100]));
        assert_ne!(km.assignment[0], km.assignment[100]);
    }

    #[test]
    fn identical_points_do_not_hang() {
        let data = Array2::from_elem((10, 3), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let km = kmeans(data.view(), 4, 3, &mut rng);
        assert_eq!(km.centroids.nrows(), 4);
    }
}
