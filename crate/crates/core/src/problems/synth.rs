use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::logistic::{Dataset, SparseRow};

/// Deterministic synthetic classification data.
///
/// A ground-truth weight vector is drawn from `N(0, I)`, features uniformly
/// from `[-1, 1]^n`, and each label is `+1` with probability
/// `1 / (1 + exp(-a^T w))`. The same `(m, n, seed)` always yields the same
/// dataset.
pub fn synth_dataset(m: usize, n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let mut rows = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for _ in 0..m {
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let margin: f64 = values.iter().zip(&truth).map(|(a, w)| a * w).sum();
        let p_pos = 1.0 / (1.0 + (-margin).exp());
        labels.push(if rng.gen::<f64>() < p_pos { 1.0 } else { -1.0 });
        rows.push(SparseRow {
            indices: (0..n).collect(),
            values,
        });
    }
    Dataset { n, rows, labels }
}
