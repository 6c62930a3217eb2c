use ndarray::Array1;
use rand::Rng;

use crate::channel::{propagate, ChannelModel, ChannelRealization};
use crate::enn::{
    first_layer_core, grad_receiver_params, EnnModel, FirstLayerNorm, ForwardTrace, LearningRates,
    Sign,
};
use crate::error::{Error, Result};
use crate::phy::{
    dequantize, ocdm_multiplex, quantize, raw_index, Access, ChirpBank, Detection, Modem,
    PhyConfig, Quantized, SymbolIndex, Waveform,
};

/// The two halves of a split network and the link between them.
///
/// The transmitter owns `model.a1`; the receiver owns `a2`, `f1` and
/// `f2`. Both live in one [`EnnModel`] for bookkeeping, but each side only
/// reads its own part: the transmitter sees the input and the demodulated
/// gradient symbols, the receiver sees the demodulated activations.
#[derive(Debug, Clone)]
pub struct SplitSession {
    pub model: EnnModel,
    pub forward: ChannelModel,
    pub backward: ChannelModel,
    pub detection: Detection,
    modem: Modem,
    bank: Option<ChirpBank>,
}

/// Result of one forward pass over the link.
#[derive(Debug, Clone)]
pub struct ForwardOutcome {
    /// Receiver-side trace, built from the demodulated symbols.
    pub trace: ForwardTrace,
    /// Transmitter-side quantization of each neuron.
    pub sent: Vec<Quantized>,
    pub received: Vec<SymbolIndex>,
    pub symbol_errors: usize,
    /// Plain-mode indices that fell outside the alphabet.
    pub wrapped: usize,
    pub realizations: Vec<ChannelRealization>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BackwardOutcome {
    /// Gradient symbols sent (zero when the update vanished).
    pub symbols: usize,
    pub symbol_errors: usize,
}

/// Maps the receiver's per-neuron gradient factors onto the index grid.
///
/// Values are scaled by `g_max = max |core|` (sent out of band) into
/// `[-(1 - 2/N), 1 - 2/N]`, so every index lands in `[1, N-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientCode {
    pub g_max: f64,
    pub symbols: Vec<SymbolIndex>,
}

impl GradientCode {
    pub fn encode(core: &Array1<f64>, n: usize) -> Result<Option<Self>> {
        if core.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        let g_max = core.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if g_max == 0.0 {
            return Ok(None);
        }
        let span = 1.0 - 2.0 / n as f64;
        let symbols = core
            .iter()
            .map(|v| {
                SymbolIndex::plain(raw_index(v * span / g_max, n).clamp(0, n as i64 - 1) as usize)
            })
            .collect();
        Ok(Some(GradientCode { g_max, symbols }))
    }

    /// Inverse map; the phase bit, if any, multiplies the value.
    pub fn decode(&self, received: &[SymbolIndex], n: usize) -> Array1<f64> {
        let span = 1.0 - 2.0 / n as f64;
        received
            .iter()
            .map(|s| s.sign.value() * dequantize(*s, n) * self.g_max / span)
            .collect()
    }

    /// Worst-case decoding error without channel errors: half a grid step.
    pub fn resolution(&self, n: usize) -> f64 {
        self.g_max / (n as f64 - 2.0)
    }
}

impl SplitSession {
    pub fn new(
        model: EnnModel,
        phy: PhyConfig,
        detection: Detection,
        forward: ChannelModel,
        backward: ChannelModel,
    ) -> Result<Self> {
        if phy.n != model.config().dct_size {
            return Err(Error::InvalidParameter(format!(
                "PHY grid {} differs from activation grid {}",
                phy.n,
                model.config().dct_size
            )));
        }
        let modem = Modem::new(phy)?;
        let bank = match phy.access {
            Access::Tdm => None,
            Access::Ocdm => Some(ChirpBank::new(
                model.config().hidden,
                phy.samples_per_symbol(),
            )?),
        };
        Ok(SplitSession {
            model,
            forward,
            backward,
            detection,
            modem,
            bank,
        })
    }

    pub fn phy(&self) -> &PhyConfig {
        self.modem.config()
    }

    /// Sends one symbol per stream over `channel` and demodulates them.
    fn transmit<R: Rng + ?Sized>(
        &self,
        symbols: &[SymbolIndex],
        channel: &ChannelModel,
        rng: &mut R,
    ) -> Result<(Vec<SymbolIndex>, Vec<ChannelRealization>)> {
        let waves: Vec<Waveform> = symbols
            .iter()
            .map(|s| self.modem.modulate(*s))
            .collect::<Result<_>>()?;
        match &self.bank {
            None => {
                let mut received = Vec::with_capacity(waves.len());
                let mut realizations = Vec::with_capacity(waves.len());
                for w in &waves {
                    let (y, r) = propagate(w, channel, rng);
                    received.push(self.modem.demodulate(&y, self.detection, r.h)?);
                    realizations.push(r);
                }
                Ok((received, realizations))
            }
            Some(bank) => {
                let (y, r) = propagate(&ocdm_multiplex(&waves, bank)?, channel, rng);
                let ns = self.modem.samples_per_symbol() as f64;
                let floor = r.noise_variance * (ns + 3.0 * ns.sqrt());
                let received = self
                    .modem
                    .demodulate_ocdm(&y, bank, self.detection, r.h, floor)?;
                Ok((received, vec![r]))
            }
        }
    }

    /// Transmitter computes and quantizes `z1`, the receiver demodulates
    /// the symbols and completes the network on the received indices.
    pub fn forward_over_channel<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        rng: &mut R,
    ) -> Result<ForwardOutcome> {
        let (s0, z1) = self.model.hidden_preactivation(x)?;
        let phy = *self.phy();
        let sent: Vec<Quantized> = z1.iter().map(|z| quantize(*z, &phy)).collect();
        let symbols: Vec<SymbolIndex> = sent.iter().map(|q| q.symbol).collect();
        let (received, realizations) = self.transmit(&symbols, &self.forward, rng)?;
        let symbol_errors = received
            .iter()
            .zip(&symbols)
            .filter(|(a, b)| a != b)
            .count();
        let wrapped = sent.iter().filter(|q| q.wrapped).count();
        let indices: Vec<i64> = received.iter().map(|s| s.k as i64).collect();
        let signs: Vec<Sign> = received.iter().map(|s| s.sign).collect();
        let trace = self.model.complete_from_indices(s0, &indices, signs);
        Ok(ForwardOutcome {
            trace,
            sent,
            received,
            symbol_errors,
            wrapped,
            realizations,
        })
    }

    /// Receiver updates its own parameters and sends the per-neuron
    /// gradient factors back; the transmitter applies its input factor
    /// and updates `A1`.
    pub fn backward_over_channel<R: Rng + ?Sized>(
        &mut self,
        fwd: &ForwardOutcome,
        error: f64,
        rates: LearningRates,
        norm: FirstLayerNorm,
        rng: &mut R,
    ) -> Result<BackwardOutcome> {
        if !error.is_finite() {
            return Err(Error::NonFinite("task error"));
        }
        let n = self.phy().n;
        // receiver side
        let core = first_layer_core(&fwd.trace, &self.model, error);
        let rx = grad_receiver_params(&fwd.trace, &self.model, error);
        let code = GradientCode::encode(&core, n)?;
        let mut outcome = BackwardOutcome::default();
        let received_core = match &code {
            None => None,
            Some(code) => {
                let (received, _) = self.transmit(&code.symbols, &self.backward, rng)?;
                outcome.symbols = code.symbols.len();
                outcome.symbol_errors = received
                    .iter()
                    .zip(&code.symbols)
                    .filter(|(a, b)| a != b)
                    .count();
                Some(code.decode(&received, n))
            }
        };
        if rx
            .a2
            .iter()
            .chain(&rx.f1)
            .chain(&rx.f2)
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("gradient"));
        }
        self.model.a2.scaled_add(-rates.linear, &rx.a2);
        self.model.f1.scaled_add(-rates.coeffs, &rx.f1);
        self.model.f2.scaled_add(-rates.coeffs, &rx.f2);

        // transmitter side
        if let Some(core) = received_core {
            let s0 = &fwd.trace.s0;
            for (k, q) in fwd.sent.iter().enumerate() {
                let c = core[k] * q.slope_sign.value();
                for m in 0..s0.len() {
                    self.model.a1[[m, k]] += rates.linear * c * norm.factor(s0[m]);
                }
            }
        }
        Ok(outcome)
    }

    /// `sign(y_hat)` through the link, for test-time evaluation.
    pub fn predict<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<f64> {
        Ok(self.forward_over_channel(x, rng)?.trace.y_hat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelKind;
    use crate::enn::{gradients, lms_step, EnnConfig};
    use crate::phy::Modulation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn session(n: usize, mode: Modulation, access: Access, channel: ChannelModel) -> SplitSession {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = EnnModel::init(EnnConfig::new(2, 6, 6, n).unwrap(), &mut rng).unwrap();
        let mut phy = PhyConfig::new(n, mode).unwrap();
        phy.access = access;
        SplitSession::new(model, phy, Detection::default_for(mode), channel, channel).unwrap()
    }

    fn inputs(count: usize) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        (0..count)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect()
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = EnnModel::init(EnnConfig::new(2, 6, 6, 64).unwrap(), &mut rng).unwrap();
        let phy = PhyConfig::new(128, Modulation::PlainFsk).unwrap();
        let ch = ChannelModel::ideal();
        assert!(SplitSession::new(model, phy, Detection::Noncoherent, ch, ch).is_err());
    }

    #[test]
    fn ideal_link_equals_centralized_on_quantized_input() {
        for mode in [Modulation::PlainFsk, Modulation::FskBpsk] {
            let s = session(1024, mode, Access::Tdm, ChannelModel::ideal());
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for x in inputs(200) {
                let out = s.forward_over_channel(&x, &mut rng).unwrap();
                assert_eq!(out.symbol_errors, 0);
                let (s0, _) = s.model.hidden_preactivation(&x).unwrap();
                let raw: Vec<i64> = out.sent.iter().map(|q| q.raw).collect();
                let oracle = s.model.complete_from_indices(s0, &raw, vec![Sign::Plus; 6]);
                if mode == Modulation::PlainFsk && out.wrapped == 0 {
                    assert_eq!(out.trace.y_hat, oracle.y_hat);
                } else {
                    assert!((out.trace.y_hat - oracle.y_hat).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn ideal_link_error_is_bounded_by_quantization() {
        let s = session(
            1024,
            Modulation::FskBpsk,
            Access::Tdm,
            ChannelModel::ideal(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // Lipschitz constant of the network w.r.t. z1, bounded crudely
        let f2_mass: f64 = s.model.f2.iter().map(|v| v.abs() * (2.0 * 6.0)).sum();
        let mut worst = 0.0f64;
        for x in inputs(500) {
            let split = s.forward_over_channel(&x, &mut rng).unwrap().trace.y_hat;
            let exact = s.model.predict(&x).unwrap();
            worst = worst.max((split - exact).abs());
        }
        let f1_mass: f64 = s.model.f1.iter().map(|v| v.abs() * 12.0).sum();
        let a2_mass: f64 = s.model.a2.iter().map(|v| v.abs()).sum();
        let bound = (std::f64::consts::PI / 2.0).powi(2) * f2_mass * a2_mass * f1_mass / 1024.0;
        assert!(worst <= bound, "{worst} > {bound}");
        assert!(worst > 0.0);
    }

    #[test]
    fn access_schemes_agree_without_noise() {
        let tdm = session(
            128,
            Modulation::PlainFsk,
            Access::Tdm,
            ChannelModel::ideal(),
        );
        let ocdm = session(
            128,
            Modulation::PlainFsk,
            Access::Ocdm,
            ChannelModel::ideal(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for x in inputs(200) {
            let a = tdm.forward_over_channel(&x, &mut rng).unwrap();
            let b = ocdm.forward_over_channel(&x, &mut rng).unwrap();
            assert_eq!(a.received, b.received);
            assert_eq!(b.symbol_errors, 0);
        }
    }

    #[test]
    fn gradient_code_round_trip() {
        let core = Array1::from(vec![0.3, -1.2, 0.0, 1e-4, 1.2, -0.7]);
        let code = GradientCode::encode(&core, 128).unwrap().unwrap();
        assert!(code.symbols.iter().all(|s| (1..128).contains(&s.k)));
        let back = code.decode(&code.symbols, 128);
        for (a, b) in back.iter().zip(&core) {
            assert!((a - b).abs() <= code.resolution(128) + 1e-12);
        }
        assert!(GradientCode::encode(&Array1::zeros(4), 128)
            .unwrap()
            .is_none());
        assert!(GradientCode::encode(&Array1::from(vec![f64::NAN]), 128).is_err());
    }

    #[test]
    fn ideal_backward_matches_centralized_update_within_grid() {
        for mode in [Modulation::PlainFsk, Modulation::FskBpsk] {
            let s = session(128, mode, Access::Tdm, ChannelModel::ideal());
            let rates = LearningRates {
                linear: 0.1,
                coeffs: 0.05,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            for x in inputs(50) {
                let mut split = s.clone();
                let fwd = split.forward_over_channel(&x, &mut rng).unwrap();
                let err = 1.0 - fwd.trace.y_hat;
                // centralized step on the raw (unaliased) indices
                let g = gradients(&fwd.trace, &s.model, err, FirstLayerNorm::Gradient);
                let central = lms_step(&s.model, &g, rates).unwrap();
                let mut raw_trace = fwd.trace.clone();
                for (k, q) in fwd.sent.iter().enumerate() {
                    raw_trace.fold_signs[k] = raw_trace.fold_signs[k] * q.slope_sign;
                }
                let core = first_layer_core(&raw_trace, &s.model, err);
                let step = GradientCode::encode(&core, 128)
                    .unwrap()
                    .unwrap()
                    .resolution(128);
                split
                    .backward_over_channel(&fwd, err, rates, FirstLayerNorm::Gradient, &mut rng)
                    .unwrap();
                assert_eq!(split.model.a2, central.a2);
                assert_eq!(split.model.f1, central.f1);
                assert_eq!(split.model.f2, central.f2);
                for m in 0..3 {
                    for k in 0..6 {
                        let bound = rates.linear * step * fwd.trace.s0[m].abs() + 1e-12;
                        let exact = s.model.a1[[m, k]] + rates.linear * core[k] * fwd.trace.s0[m];
                        let d = (split.model.a1[[m, k]] - exact).abs();
                        assert!(d <= bound, "{mode:?} ({m},{k}) {d} > {bound}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_error_sends_nothing() {
        let mut s = session(64, Modulation::PlainFsk, Access::Tdm, ChannelModel::ideal());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let fwd = s.forward_over_channel(&[0.1, 0.2], &mut rng).unwrap();
        let before = s.model.clone();
        let out = s
            .backward_over_channel(
                &fwd,
                0.0,
                LearningRates::default(),
                FirstLayerNorm::Gradient,
                &mut rng,
            )
            .unwrap();
        assert_eq!(out, BackwardOutcome::default());
        assert_eq!(s.model, before);
    }

    #[test]
    fn noisy_link_reports_errors() {
        let noisy = ChannelModel::new(ChannelKind::Awgn, -20.0).unwrap();
        let s = session(128, Modulation::PlainFsk, Access::Tdm, noisy);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let errors: usize = inputs(50)
            .iter()
            .map(|x| s.forward_over_channel(x, &mut rng).unwrap().symbol_errors)
            .sum();
        assert!(errors > 100);
    }
}
