use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Stratified train/test split: each class contributes
/// `round(train_fraction * count)` points to the training side. Both sides
/// keep the original point order.
pub fn stratified_split<T: Scalar>(d: &Dataset<T>, train_fraction: f64, seed: u64) -> Result<(Dataset<T>, Dataset<T>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!("split fraction must lie in (0, 1), got {train_fraction}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for positive in [true, false] {
        let mut class: Vec<usize> = (0..d.len()).filter(|&i| d.point(i).is_positive() == positive).collect();
        class.shuffle(&mut rng);
        let cut = (train_fraction * class.len() as f64).round() as usize;
        train.extend_from_slice(&class[..cut]);
        test.extend_from_slice(&class[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((d.subset(&train), d.subset(&test)))
}
