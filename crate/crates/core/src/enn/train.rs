use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::grad::{apply_step, gradients, FirstLayerNorm, LearningRates};
use super::model::EnnModel;
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub rates: LearningRates,
    /// Per-epoch multiplicative step decay; epoch `e` uses `rates * decay^e`.
    pub decay: f64,
    pub norm: FirstLayerNorm,
    /// Seeds the per-epoch sample order.
    pub seed: u64,
}

impl TrainOptions {
    pub fn rates_at(&self, epoch: usize) -> LearningRates {
        let f = self.decay.powi(epoch as i32);
        LearningRates {
            linear: self.rates.linear * f,
            coeffs: self.rates.coeffs * f,
        }
    }
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            rates: LearningRates::default(),
            decay: 0.7,
            norm: FirstLayerNorm::default(),
            seed: 7,
        }
    }
}

/// Running statistics of one pass over the training set, measured on the
/// predictions made just before each update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub accuracy: f64,
    pub mse: f64,
}

/// Class decision; a zero output counts as `+1`.
pub fn classify(y_hat: f64) -> f64 {
    if y_hat < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub fn accuracy(model: &EnnModel, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidParameter("empty dataset".into()));
    }
    let mut hits = 0usize;
    for i in 0..data.len() {
        if classify(model.predict(data.input(i))?) == data.labels[i] {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}

/// Per-epoch visiting order; shared with the split trainer so paired runs
/// see the samples in the same sequence.
pub(crate) fn epoch_orders(
    len: usize,
    epochs: usize,
    seed: u64,
) -> impl Iterator<Item = Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..epochs).map(move |_| {
        let mut order: Vec<usize> = (0..len).collect();
        order.shuffle(&mut rng);
        order
    })
}

/// Sample-by-sample LMS on the squared error.
pub fn train_centralized(
    model: &EnnModel,
    data: &Dataset,
    epochs: usize,
    options: &TrainOptions,
) -> Result<(EnnModel, Vec<EpochMetrics>)> {
    if data.is_empty() {
        return Err(Error::InvalidParameter("empty dataset".into()));
    }
    let mut model = model.clone();
    let mut metrics = Vec::with_capacity(epochs);
    for (epoch, order) in epoch_orders(data.len(), epochs, options.seed).enumerate() {
        let rates = options.rates_at(epoch);
        let mut hits = 0usize;
        let mut sq = 0.0;
        for (step, &i) in order.iter().enumerate() {
            let trace = model.forward(data.input(i))?;
            let y = data.labels[i];
            let err = y - trace.y_hat;
            if !err.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    sample: step,
                });
            }
            if classify(trace.y_hat) == y {
                hits += 1;
            }
            sq += err * err;
            let grads = gradients(&trace, &model, err, options.norm);
            apply_step(&mut model, &grads, rates).map_err(|_| Error::Divergence {
                epoch,
                sample: step,
            })?;
        }
        metrics.push(EpochMetrics {
            epoch,
            accuracy: hits as f64 / data.len() as f64,
            mse: sq / data.len() as f64,
        });
    }
    Ok((model, metrics))
}
