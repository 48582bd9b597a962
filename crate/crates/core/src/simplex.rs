//! Small helpers for points on the probability simplex.

use rand::Rng;

/// Euclidean projection onto `{x : x ≥ 0, Σx = 1}` (sort-and-threshold).
pub fn project(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        cumulative += x;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Uniform sample from the `k`-point simplex.
pub fn sample<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= total);
    x
}

pub fn vertex(k: usize, index: usize) -> Vec<f64> {
    let mut x = vec![0.0; k];
    x[index] = 1.0;
    x
}
