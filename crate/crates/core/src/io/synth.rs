use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{Dataset, Label, LabeledPoint};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Two isotropic Gaussian classes whose means sit `separation` apart along
/// a random unit direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub dim: usize,
    pub pos_fraction: f64,
    pub separation: f64,
    /// Per-coordinate standard deviation.
    pub noise: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if !(self.pos_fraction > 0.0 && self.pos_fraction < 1.0) {
            return Err(Error::invalid(format!("pos_fraction must lie in (0, 1), got {}", self.pos_fraction)));
        }
        if self.n as f64 * self.pos_fraction < 1.0 {
            return Err(Error::invalid("expected positive count n * pos_fraction is below 1"));
        }
        if !(self.separation >= 0.0 && self.noise >= 0.0) {
            return Err(Error::invalid("separation and noise must be nonnegative"));
        }
        Ok(())
    }

    pub fn n_pos(&self) -> usize {
        ((self.n as f64 * self.pos_fraction).round() as usize).clamp(1, self.n)
    }
}

/// Deterministic in `spec.seed`; exactly `round(n * pos_fraction)` positives
/// in random positions; features rescaled to the unit ball.
pub fn gen_synthetic<T: Scalar>(spec: &SynthSpec) -> Result<Dataset<T>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut direction: Vec<f64> = (0..spec.dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        direction.iter_mut().for_each(|v| *v /= norm);
    }

    let n_pos = spec.n_pos();
    let mut labels: Vec<Label> = (0..spec.n)
        .map(|i| if i < n_pos { Label::Positive } else { Label::Negative })
        .collect();
    labels.shuffle(&mut rng);

    let half = spec.separation / 2.0;
    let points = labels
        .into_iter()
        .map(|label| {
            let offset = if label.is_positive() { half } else { -half };
            let x: Vec<T> = direction
                .iter()
                .map(|&u| {
                    let z: f64 = rng.sample(StandardNormal);
                    T::of(offset * u + spec.noise * z)
                })
                .collect();
            LabeledPoint::dense(&x, label)
        })
        .collect();
    Ok(Dataset::with_dimension(points, spec.dim)?.normalized())
}
