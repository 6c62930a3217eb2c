//! Flat-fading channel `y[n] = h x[n] + w[n]`, with `h` redrawn for every
//! channel use.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::phy::Waveform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    Ideal,
    Awgn,
    Rayleigh,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] =
        [ChannelKind::Ideal, ChannelKind::Awgn, ChannelKind::Rayleigh];

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "ideal" => Ok(ChannelKind::Ideal),
            "awgn" => Ok(ChannelKind::Awgn),
            "rayleigh" => Ok(ChannelKind::Rayleigh),
            other => Err(Error::InvalidParameter(format!(
                "unknown channel `{other}`"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Ideal => "ideal",
            ChannelKind::Awgn => "awgn",
            ChannelKind::Rayleigh => "rayleigh",
        }
    }
}

/// Channel kind plus per-sample SNR in dB (relative to unit signal power).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    pub snr_db: f64,
}

impl ChannelModel {
    pub fn new(kind: ChannelKind, snr_db: f64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::NonFinite("snr_db"));
        }
        Ok(ChannelModel { kind, snr_db })
    }

    pub fn ideal() -> Self {
        ChannelModel {
            kind: ChannelKind::Ideal,
            snr_db: f64::MAX,
        }
    }

    /// `E|w|^2` per complex sample; zero for the ideal channel.
    pub fn noise_variance(&self) -> f64 {
        match self.kind {
            ChannelKind::Ideal => 0.0,
            ChannelKind::Awgn | ChannelKind::Rayleigh => crate::phy::noise_variance(self.snr_db),
        }
    }
}

/// What the channel did to one waveform; handed to coherent receivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    pub h: Complex64,
    pub noise_variance: f64,
}

/// `h = (g1 + j g2) / sqrt(2)` with standard normal `g1`, `g2`.
pub fn draw_fading<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let g1: f64 = rng.sample(StandardNormal);
    let g2: f64 = rng.sample(StandardNormal);
    Complex64::new(g1, g2) * std::f64::consts::FRAC_1_SQRT_2
}

/// Circular complex Gaussian sample with `E|w|^2 = variance`.
pub fn complex_noise<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

pub fn propagate<R: Rng + ?Sized>(
    x: &Waveform,
    model: &ChannelModel,
    rng: &mut R,
) -> (Waveform, ChannelRealization) {
    let h = match model.kind {
        ChannelKind::Ideal | ChannelKind::Awgn => Complex64::new(1.0, 0.0),
        ChannelKind::Rayleigh => draw_fading(rng),
    };
    let noise_variance = model.noise_variance();
    let y = if model.kind == ChannelKind::Ideal {
        x.clone()
    } else {
        Waveform::new(
            x.samples()
                .iter()
                .map(|s| h * s + complex_noise(rng, noise_variance))
                .collect(),
        )
    };
    (y, ChannelRealization { h, noise_variance })
}
