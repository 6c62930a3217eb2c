//! Waveform layer: quantizer, cosine-tone modulator, chirp multiplexing,
//! demodulators and analytic error probabilities.

mod analytic;
mod modem;
mod ocdm;
mod quantize;
mod waveform;

pub use analytic::{
    bandwidth, detection_snr, effective_n0, noise_variance, pe_fsk, pe_fsk_bpsk, pe_fsk_bpsk_union,
    q_function, rayleigh_average, ser_analytic, NONCOHERENT_KAPPA,
};
pub use modem::{modulate_fsk, modulate_fsk_bpsk, Modem};
pub use ocdm::{chirp, ocdm_dechirp, ocdm_multiplex, ChirpBank};
pub use quantize::{alias_index, dequantize, quantize, raw_index, Quantized};
pub use waveform::Waveform;

use crate::enn::Sign;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    /// One cosine tone per symbol; the alphabet may be extended beyond `N`.
    PlainFsk,
    /// `N` tones times a 0/pi phase bit carrying the folding sign.
    FskBpsk,
}

impl Modulation {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "plain" => Ok(Modulation::PlainFsk),
            "fsk-bpsk" => Ok(Modulation::FskBpsk),
            other => Err(Error::InvalidParameter(format!("unknown mode `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modulation::PlainFsk => "plain",
            Modulation::FskBpsk => "fsk-bpsk",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Access {
    /// One channel use per stream.
    Tdm,
    /// All streams superposed on orthogonal chirps in one channel use.
    Ocdm,
}

impl Access {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "tdm" => Ok(Access::Tdm),
            "ocdm" => Ok(Access::Ocdm),
            other => Err(Error::InvalidParameter(format!(
                "unknown access scheme `{other}`"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Access::Tdm => "tdm",
            Access::Ocdm => "ocdm",
        }
    }
}

/// Receiver type. Noncoherent detection needs no channel knowledge;
/// coherent detection is handed the true gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detection {
    Noncoherent,
    Coherent,
}

impl Detection {
    /// Plain tones are detected blind, the phase bit needs the channel.
    pub fn default_for(mode: Modulation) -> Self {
        match mode {
            Modulation::PlainFsk => Detection::Noncoherent,
            Modulation::FskBpsk => Detection::Coherent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhyConfig {
    /// Grid size `N`, shared with the activations.
    pub n: usize,
    /// Carrier amplitude `A_c`.
    pub amplitude: f64,
    pub mode: Modulation,
    /// Alphabet extension `E` (plain mode only).
    pub extension: usize,
    pub access: Access,
    /// Symbol period in seconds; only used for bandwidth figures.
    pub symbol_period: f64,
}

impl PhyConfig {
    /// Unit-power carrier, no extension, TDM, 1 ms symbols.
    pub fn new(n: usize, mode: Modulation) -> Result<Self> {
        Self::with_extension(n, mode, 1)
    }

    pub fn with_extension(n: usize, mode: Modulation, extension: usize) -> Result<Self> {
        let cfg = PhyConfig {
            n,
            amplitude: 1.0,
            mode,
            extension,
            access: Access::Tdm,
            symbol_period: 1e-3,
        };
        cfg.validate_shape()?;
        Ok(PhyConfig {
            amplitude: unit_power_amplitude(cfg.samples_per_symbol()),
            ..cfg
        })
    }

    fn validate_shape(&self) -> Result<()> {
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "N = {} must be even and >= 2",
                self.n
            )));
        }
        if self.extension == 0 {
            return Err(Error::InvalidParameter(
                "extension factor must be >= 1".into(),
            ));
        }
        if self.mode == Modulation::FskBpsk && self.extension != 1 {
            return Err(Error::InvalidParameter(
                "alphabet extension applies to plain mode only".into(),
            ));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "carrier amplitude {} must be > 0",
                self.amplitude
            )));
        }
        if !(self.symbol_period.is_finite() && self.symbol_period > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "symbol period {} must be > 0",
                self.symbol_period
            )));
        }
        Ok(())
    }

    /// Waveform length `N_s`, which is also the number of tones.
    pub fn samples_per_symbol(&self) -> usize {
        match self.mode {
            Modulation::PlainFsk => self.extension * self.n,
            Modulation::FskBpsk => self.n,
        }
    }

    /// Occupied bandwidth `N_s / 2T`.
    pub fn bandwidth(&self) -> f64 {
        self.samples_per_symbol() as f64 / (2.0 * self.symbol_period)
    }
}

/// Amplitude giving unit average power: a DCT tone of length `N_s` has
/// energy `(N_s + 1) / 2`.
pub fn unit_power_amplitude(samples: usize) -> f64 {
    (2.0 * samples as f64 / (samples as f64 + 1.0)).sqrt()
}

/// A transmittable symbol: tone index plus phase bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymbolIndex {
    pub k: usize,
    pub sign: Sign,
}

impl SymbolIndex {
    pub fn plain(k: usize) -> Self {
        SymbolIndex {
            k,
            sign: Sign::Plus,
        }
    }

    pub fn check(&self, cfg: &PhyConfig) -> Result<()> {
        let limit = cfg.samples_per_symbol();
        if self.k >= limit {
            return Err(Error::IndexOutOfRange {
                index: self.k as i64,
                limit,
            });
        }
        if cfg.mode == Modulation::PlainFsk && self.sign != Sign::Plus {
            return Err(Error::InvalidParameter(
                "plain mode carries no phase bit".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(PhyConfig::new(7, Modulation::PlainFsk).is_err());
        assert!(PhyConfig::new(0, Modulation::PlainFsk).is_err());
        assert!(PhyConfig::with_extension(8, Modulation::PlainFsk, 0).is_err());
        assert!(PhyConfig::with_extension(8, Modulation::FskBpsk, 2).is_err());
        let mut cfg = PhyConfig::with_extension(8, Modulation::PlainFsk, 4).unwrap();
        assert_eq!(cfg.samples_per_symbol(), 32);
        cfg.amplitude = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn bandwidth_scales_with_alphabet() {
        let cfg = PhyConfig::new(128, Modulation::FskBpsk).unwrap();
        assert_eq!(cfg.bandwidth(), 64_000.0);
        let ext = PhyConfig::with_extension(128, Modulation::PlainFsk, 4).unwrap();
        assert_eq!(ext.bandwidth(), 4.0 * 64_000.0);
    }

    #[test]
    fn names_round_trip() {
        for m in [Modulation::PlainFsk, Modulation::FskBpsk] {
            assert_eq!(Modulation::from_name(m.name()).unwrap(), m);
        }
        for a in [Access::Tdm, Access::Ocdm] {
            assert_eq!(Access::from_name(a.name()).unwrap(), a);
        }
        assert!(Access::from_name("fdm").is_err());
    }

    #[test]
    fn symbol_range_checks() {
        let cfg = PhyConfig::new(8, Modulation::PlainFsk).unwrap();
        assert!(SymbolIndex::plain(7).check(&cfg).is_ok());
        assert!(SymbolIndex::plain(8).check(&cfg).is_err());
        assert!(SymbolIndex {
            k: 1,
            sign: Sign::Minus
        }
        .check(&cfg)
        .is_err());
    }
}
