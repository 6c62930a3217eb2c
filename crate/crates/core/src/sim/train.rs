use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::session::SplitSession;
use crate::channel::{ChannelKind, ChannelModel};
use crate::data::Dataset;
use crate::enn::{classify, epoch_orders, train_centralized, EnnConfig, EnnModel, TrainOptions};
use crate::error::{Error, Result};
use crate::phy::{Detection, PhyConfig};

/// Per-epoch training record. Accuracy and MSE are measured on the
/// predictions made through the link just before each update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitEpochMetrics {
    pub epoch: usize,
    pub accuracy: f64,
    pub mse: f64,
    pub fwd_errors: usize,
    pub fwd_symbols: usize,
    pub bwd_errors: usize,
    pub bwd_symbols: usize,
    /// Plain-mode indices sent as their alias.
    pub clamps: usize,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl SplitEpochMetrics {
    pub fn fwd_ser(&self) -> f64 {
        ratio(self.fwd_errors, self.fwd_symbols)
    }

    pub fn bwd_ser(&self) -> f64 {
        ratio(self.bwd_errors, self.bwd_symbols)
    }
}

/// Test-set accuracy with every sample sent through the link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkAccuracy {
    pub accuracy: f64,
    pub symbol_errors: usize,
    pub symbols: usize,
}

impl LinkAccuracy {
    pub fn ser(&self) -> f64 {
        ratio(self.symbol_errors, self.symbols)
    }
}

/// LMS training with both passes crossing the link. `options.seed` fixes
/// the sample order, `channel_seed` the noise and fading.
pub fn train_split(
    session: &mut SplitSession,
    data: &Dataset,
    epochs: usize,
    options: &TrainOptions,
    channel_seed: u64,
) -> Result<Vec<SplitEpochMetrics>> {
    if data.is_empty() {
        return Err(Error::InvalidParameter("empty dataset".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(channel_seed);
    let mut metrics = Vec::with_capacity(epochs);
    for (epoch, order) in epoch_orders(data.len(), epochs, options.seed).enumerate() {
        let rates = options.rates_at(epoch);
        let mut m = SplitEpochMetrics {
            epoch,
            accuracy: 0.0,
            mse: 0.0,
            fwd_errors: 0,
            fwd_symbols: 0,
            bwd_errors: 0,
            bwd_symbols: 0,
            clamps: 0,
        };
        let mut hits = 0usize;
        for (step, &i) in order.iter().enumerate() {
            let fwd = session.forward_over_channel(data.input(i), &mut rng)?;
            let y = data.labels[i];
            let err = y - fwd.trace.y_hat;
            if !err.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    sample: step,
                });
            }
            if classify(fwd.trace.y_hat) == y {
                hits += 1;
            }
            m.mse += err * err;
            m.fwd_errors += fwd.symbol_errors;
            m.fwd_symbols += fwd.sent.len();
            m.clamps += fwd.wrapped;
            let bwd = session
                .backward_over_channel(&fwd, err, rates, options.norm, &mut rng)
                .map_err(|_| Error::Divergence {
                    epoch,
                    sample: step,
                })?;
            m.bwd_errors += bwd.symbol_errors;
            m.bwd_symbols += bwd.symbols;
        }
        if !session.model.is_finite() {
            return Err(Error::Divergence {
                epoch,
                sample: data.len(),
            });
        }
        m.accuracy = hits as f64 / data.len() as f64;
        m.mse /= data.len() as f64;
        metrics.push(m);
    }
    Ok(metrics)
}

pub fn link_accuracy(
    session: &SplitSession,
    data: &Dataset,
    channel_seed: u64,
) -> Result<LinkAccuracy> {
    if data.is_empty() {
        return Err(Error::InvalidParameter("empty dataset".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(channel_seed);
    let mut hits = 0usize;
    let mut symbol_errors = 0usize;
    let mut symbols = 0usize;
    for i in 0..data.len() {
        let fwd = session.forward_over_channel(data.input(i), &mut rng)?;
        if classify(fwd.trace.y_hat) == data.labels[i] {
            hits += 1;
        }
        symbol_errors += fwd.symbol_errors;
        symbols += fwd.sent.len();
    }
    Ok(LinkAccuracy {
        accuracy: hits as f64 / data.len() as f64,
        symbol_errors,
        symbols,
    })
}

/// Everything needed to train and test one split network, apart from the
/// forward channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitExperiment {
    pub enn: EnnConfig,
    pub phy: PhyConfig,
    pub detection: Detection,
    pub train: TrainOptions,
    pub epochs: usize,
    /// SNR of the gradient link; its kind follows the forward channel.
    pub backward_snr_db: f64,
    pub init_seed: u64,
    pub channel_seed: u64,
}

impl SplitExperiment {
    pub fn initial_model(&self) -> Result<EnnModel> {
        EnnModel::init(self.enn, &mut ChaCha8Rng::seed_from_u64(self.init_seed))
    }

    pub fn backward_channel(&self, forward: &ChannelModel) -> Result<ChannelModel> {
        match forward.kind {
            ChannelKind::Ideal => Ok(ChannelModel::ideal()),
            kind => ChannelModel::new(kind, self.backward_snr_db),
        }
    }

    pub fn session(&self, model: EnnModel, forward: ChannelModel) -> Result<SplitSession> {
        let backward = self.backward_channel(&forward)?;
        SplitSession::new(model, self.phy, self.detection, forward, backward)
    }

    /// Trains from the seeded initial model and tests over the same link.
    pub fn run(&self, forward: ChannelModel, train: &Dataset, test: &Dataset) -> Result<SplitRun> {
        let mut session = self.session(self.initial_model()?, forward)?;
        let metrics = train_split(
            &mut session,
            train,
            self.epochs,
            &self.train,
            self.channel_seed,
        )?;
        let test = link_accuracy(&session, test, self.channel_seed.wrapping_add(1))?;
        Ok(SplitRun {
            model: session.model,
            metrics,
            test,
        })
    }

    /// Same initial model, order and step sizes, trained without the link.
    pub fn centralized(&self, train: &Dataset) -> Result<EnnModel> {
        Ok(train_centralized(&self.initial_model()?, train, self.epochs, &self.train)?.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitRun {
    pub model: EnnModel,
    pub metrics: Vec<SplitEpochMetrics>,
    pub test: LinkAccuracy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepProtocol {
    /// Train a fresh network over each channel, test over the same channel.
    Retrain,
    /// Train once without the link, then test over each channel.
    FixedModel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub channel: ChannelModel,
    pub accuracy: f64,
    pub ser: f64,
}

pub fn accuracy_sweep(
    experiment: &SplitExperiment,
    channels: &[ChannelModel],
    protocol: SweepProtocol,
    train: &Dataset,
    test: &Dataset,
) -> Result<Vec<SweepPoint>> {
    let fixed = match protocol {
        SweepProtocol::FixedModel => Some(experiment.centralized(train)?),
        SweepProtocol::Retrain => None,
    };
    channels
        .iter()
        .map(|&channel| {
            let result = match &fixed {
                Some(model) => {
                    let session = experiment.session(model.clone(), channel)?;
                    link_accuracy(&session, test, experiment.channel_seed.wrapping_add(1))?
                }
                None => experiment.run(channel, train, test)?.test,
            };
            Ok(SweepPoint {
                channel,
                accuracy: result.accuracy,
                ser: result.ser(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Labeler;
    use crate::enn::accuracy;
    use crate::phy::Modulation;

    fn experiment(n: usize, epochs: usize) -> SplitExperiment {
        SplitExperiment {
            enn: EnnConfig::new(2, 6, 6, n).unwrap(),
            phy: PhyConfig::new(n, Modulation::FskBpsk).unwrap(),
            detection: Detection::Coherent,
            train: TrainOptions::default(),
            epochs,
            backward_snr_db: -10.0,
            init_seed: 5,
            channel_seed: 6,
        }
    }

    fn data(count: usize, seed: u64) -> Dataset {
        Dataset::sample(
            Labeler::HalfPlane,
            count,
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
    }

    #[test]
    fn ideal_split_tracks_centralized() {
        let exp = experiment(1024, 2);
        let (train, test) = (data(4000, 1), data(1000, 2));
        let split = exp.run(ChannelModel::ideal(), &train, &test).unwrap();
        let central = exp.centralized(&train).unwrap();
        let acc = accuracy(&central, &test).unwrap();
        assert_eq!(split.test.symbol_errors, 0);
        assert!(split
            .metrics
            .iter()
            .all(|m| m.fwd_errors == 0 && m.bwd_errors == 0));
        assert!(
            (split.test.accuracy - acc).abs() < 0.01,
            "{} vs {acc}",
            split.test.accuracy
        );
        assert!(split.test.accuracy > 0.95);
    }

    #[test]
    fn training_is_deterministic() {
        let exp = experiment(64, 1);
        let awgn = ChannelModel::new(ChannelKind::Awgn, -5.0).unwrap();
        let (train, test) = (data(500, 3), data(100, 4));
        let a = exp.run(awgn, &train, &test).unwrap();
        let b = exp.run(awgn, &train, &test).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn metrics_count_symbols() {
        let exp = experiment(64, 2);
        let awgn = ChannelModel::new(ChannelKind::Awgn, -12.0).unwrap();
        let run = exp.run(awgn, &data(300, 5), &data(100, 6)).unwrap();
        assert_eq!(run.metrics.len(), 2);
        for m in &run.metrics {
            assert_eq!(m.fwd_symbols, 300 * 6);
            assert!(m.bwd_symbols <= 300 * 6);
            assert!(m.fwd_errors > 0 && m.fwd_ser() < 1.0);
            assert!((0.0..=1.0).contains(&m.accuracy));
        }
        assert_eq!(run.test.symbols, 600);
    }

    #[test]
    fn fixed_model_sweep_degrades_with_noise() {
        let exp = experiment(128, 2);
        let (train, test) = (data(3000, 7), data(1000, 8));
        let channels = [
            ChannelModel::ideal(),
            ChannelModel::new(ChannelKind::Awgn, -5.0).unwrap(),
            ChannelModel::new(ChannelKind::Awgn, -20.0).unwrap(),
        ];
        let points =
            accuracy_sweep(&exp, &channels, SweepProtocol::FixedModel, &train, &test).unwrap();
        assert_eq!(points[0].ser, 0.0);
        assert!(points[0].accuracy >= points[1].accuracy - 0.01);
        assert!(points[2].accuracy < points[1].accuracy - 0.1);
        assert!(points[2].ser > 0.5);
    }
}
