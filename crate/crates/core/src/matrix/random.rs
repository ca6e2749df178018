use super::{DataMatrix, Dense};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Dense n x d matrix with i.i.d. standard normal entries, reproducible from
/// the seed. Entries are drawn in row-major order.
pub fn random_dense(n: usize, d: usize, seed: u64) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0.0f64; n * d];
    for v in data.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    DataMatrix::from_dense(Dense::from_row_slice(n, d, &data)).expect("finite draws")
}

/// Sparse n x d matrix where each row stores round(density * d) nonzeros at
/// distinct random columns with standard normal values.
pub fn random_sparse(n: usize, d: usize, density: f64, seed: u64) -> DataMatrix {
    assert!(density > 0.0 && density <= 1.0);
    let per_row = ((density * d as f64).round() as usize).clamp(1, d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(n * per_row);
    let mut values = Vec::with_capacity(n * per_row);
    row_offsets.push(0);
    for _ in 0..n {
        let mut cols_buf = rand::seq::index::sample(&mut rng, d, per_row).into_vec();
        cols_buf.sort_unstable();
        for &c in &cols_buf {
            col_indices.push(c);
            values.push(rng.sample(StandardNormal));
        }
        row_offsets.push(col_indices.len());
    }
    DataMatrix::from_csr(n, d, row_offsets, col_indices, values).expect("valid construction")
}
