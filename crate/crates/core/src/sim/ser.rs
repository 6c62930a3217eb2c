use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{complex_noise, propagate, ChannelKind, ChannelModel};
use crate::enn::Sign;
use crate::error::{Error, Result};
use crate::phy::{
    detection_snr, q_function, rayleigh_average, ser_analytic, Detection, Modem, Modulation,
    PhyConfig, SymbolIndex, Waveform,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerPoint {
    pub channel: ChannelModel,
    pub trials: usize,
    pub errors: usize,
    pub ser_analytic: f64,
}

impl SerPoint {
    pub fn ser_measured(&self) -> f64 {
        self.errors as f64 / self.trials as f64
    }

    /// Binomial standard deviation of the measured rate, using the
    /// analytic value as the true rate.
    pub fn sigma(&self) -> f64 {
        let p = self.ser_analytic.min(1.0);
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Union-bound SER for a channel; Rayleigh averages over the fading.
pub fn analytic_ser(phy: &PhyConfig, detection: Detection, channel: &ChannelModel) -> f64 {
    match channel.kind {
        ChannelKind::Ideal => 0.0,
        ChannelKind::Awgn => ser_analytic(phy, detection, channel.snr_db, 1.0),
        ChannelKind::Rayleigh => {
            rayleigh_average(|r| ser_analytic(phy, detection, channel.snr_db, r))
        }
    }
}

fn random_symbol<R: Rng + ?Sized>(phy: &PhyConfig, rng: &mut R) -> SymbolIndex {
    let k = rng.random_range(0..phy.samples_per_symbol());
    match phy.mode {
        Modulation::PlainFsk => SymbolIndex::plain(k),
        Modulation::FskBpsk => SymbolIndex {
            k,
            sign: Sign::from_parity(rng.random()),
        },
    }
}

/// Monte-Carlo SER of single uniformly drawn symbols. Each point gets its
/// own stream of the seeded generator, so results do not depend on which
/// other points are simulated.
pub fn ser_sweep(
    phy: &PhyConfig,
    detection: Detection,
    channels: &[ChannelModel],
    trials: usize,
    seed: u64,
) -> Result<Vec<SerPoint>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be > 0".into()));
    }
    let modem = Modem::new(*phy)?;
    channels
        .iter()
        .enumerate()
        .map(|(i, channel)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut errors = 0usize;
            for _ in 0..trials {
                let s = random_symbol(phy, &mut rng);
                let (y, r) = propagate(&modem.modulate(s)?, channel, &mut rng);
                if modem.demodulate(&y, detection, r.h)? != s {
                    errors += 1;
                }
            }
            Ok(SerPoint {
                channel: *channel,
                trials,
                errors,
                ser_analytic: analytic_ser(phy, detection, channel),
            })
        })
        .collect()
}

/// The `count` highest SNRs on a `step` dB grid whose analytic AWGN SER
/// lies in `[lo, hi]`, in increasing order.
pub fn waterfall_snrs(
    phy: &PhyConfig,
    detection: Detection,
    lo: f64,
    hi: f64,
    step: f64,
    count: usize,
) -> Vec<f64> {
    let mut picked: Vec<f64> = (0..=160)
        .map(|i| 20.0 - step * i as f64)
        .filter(|&snr| (lo..=hi).contains(&ser_analytic(phy, detection, snr, 1.0)))
        .take(count)
        .collect();
    picked.reverse();
    picked
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignErrorEstimate {
    pub rate: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl SignErrorEstimate {
    /// `Q(sqrt(2 gamma))`: a real decision on the known tone.
    pub fn analytic(phy: &PhyConfig, snr_db: f64) -> f64 {
        q_function((2.0 * detection_snr(phy, snr_db, 1.0)).sqrt())
    }
}

/// Probability that the phase bit of a correctly located tone is wrong,
/// over AWGN with a known unit gain.
///
/// The event is rare, so the noise is drawn with its mean shifted onto
/// the decision boundary and each trial is reweighted by the likelihood
/// ratio of the true to the shifted noise density.
pub fn sign_error_rate(
    phy: &PhyConfig,
    snr_db: f64,
    trials: usize,
    seed: u64,
) -> Result<SignErrorEstimate> {
    if phy.mode != Modulation::FskBpsk {
        return Err(Error::InvalidParameter(
            "sign errors need fsk-bpsk mode".into(),
        ));
    }
    if trials < 2 {
        return Err(Error::InvalidParameter("need at least two trials".into()));
    }
    let modem = Modem::new(*phy)?;
    let ns = phy.samples_per_symbol() as f64;
    let var = crate::phy::noise_variance(snr_db);
    // shift that puts the mean of Re X[k] at zero
    let beta = phy.amplitude * (ns / 2.0) / (ns / 2.0 - 0.25);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..trials {
        let s = random_symbol(phy, &mut rng);
        let x = modem.modulate(s)?;
        let basis = modem.tone_unchecked(s.k, Complex64::new(1.0, 0.0));
        let mut log_lr = 0.0;
        let y: Vec<Complex64> = x
            .samples()
            .iter()
            .zip(basis.samples())
            .enumerate()
            .map(|(n, (xn, cn))| {
                let weight = if n == 0 { 0.5 } else { 1.0 };
                let mu = -s.sign.value() * beta * weight * cn.re;
                let w = complex_noise(&mut rng, var) + mu;
                log_lr -= (2.0 * w.re * mu - mu * mu) / var;
                xn + w
            })
            .collect();
        let corr = modem.correlate(&Waveform::new(y))?;
        if Sign::of(corr[s.k].re) != s.sign {
            let v = log_lr.exp();
            sum += v;
            sum_sq += v * v;
        }
    }
    let t = trials as f64;
    let rate = sum / t;
    let std_error = ((sum_sq / t - rate * rate).max(0.0) / (t - 1.0)).sqrt();
    Ok(SignErrorEstimate {
        rate,
        std_error,
        trials,
    })
}
