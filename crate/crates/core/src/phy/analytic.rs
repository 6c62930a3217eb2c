//! Union-bound symbol error probabilities and the SNR bookkeeping that
//! connects them to the simulated receiver.
//!
//! SNR is per sample: unit-power waveforms and complex noise with
//! `E|w|^2 = 10^(-snr/10)`. For the inverse-DCT correlator the ratio of
//! the squared peak to the noise variance in one bin is
//!
//! ```text
//! gamma = |h|^2 A_c^2 (N_s/2)^2 / (sigma^2 (N_s/2 - 1/4))
//! ```
//!
//! which is `N_s * SNR` up to `O(1/N_s)`. The union-bound argument
//! `A_c^2 |h|^2 / N0` is set to `gamma / kappa`. With `kappa = 1` the
//! pairwise term is exact for coherent detection. Envelope detection loses
//! against that, and `kappa = 1.2` keeps the bound above the exact
//! noncoherent error rate at the alphabet sizes used here while staying
//! within a factor of two of it in the `1e-3 .. 1e-1` region.

use super::{Detection, Modulation, PhyConfig};
use crate::error::{Error, Result};

/// Noise inflation applied to the bound for envelope detection.
pub const NONCOHERENT_KAPPA: f64 = 1.2;

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn check_n0(n0: f64) -> Result<()> {
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise density {n0} must be > 0"
        )));
    }
    Ok(())
}

/// `min(1, (N-1) Q(sqrt(A_c^2 h^2 / N0)))`.
pub fn pe_fsk(n: usize, amplitude: f64, h_mag: f64, n0: f64) -> Result<f64> {
    check_n0(n0)?;
    let snr = amplitude * amplitude * h_mag * h_mag / n0;
    Ok(((n.saturating_sub(1)) as f64 * q_function(snr.sqrt())).min(1.0))
}

/// Tone term plus phase-bit term `Q(sqrt(2 A_c^2 h^2 / N0))`, clipped at 1.
///
/// This is an approximation, not a bound: with the phase bit every wrong
/// tone competes twice (once per sign), so the coherent error rate can sit
/// up to twice the tone term. See [`pe_fsk_bpsk_union`].
pub fn pe_fsk_bpsk(n: usize, amplitude: f64, h_mag: f64, n0: f64) -> Result<f64> {
    check_n0(n0)?;
    let snr = amplitude * amplitude * h_mag * h_mag / n0;
    let fsk = (n.saturating_sub(1)) as f64 * q_function(snr.sqrt());
    Ok((fsk + q_function((2.0 * snr).sqrt())).min(1.0))
}

/// Full union bound for the biorthogonal alphabet,
/// `2(N-1) Q(sqrt(A_c^2 h^2 / N0)) + Q(sqrt(2 A_c^2 h^2 / N0))`, clipped at 1.
pub fn pe_fsk_bpsk_union(n: usize, amplitude: f64, h_mag: f64, n0: f64) -> Result<f64> {
    check_n0(n0)?;
    let snr = amplitude * amplitude * h_mag * h_mag / n0;
    let fsk = 2.0 * (n.saturating_sub(1)) as f64 * q_function(snr.sqrt());
    Ok((fsk + q_function((2.0 * snr).sqrt())).min(1.0))
}

/// Noise variance per complex sample at `snr_db`.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Peak-to-noise ratio of one correlator bin, see the module docs.
pub fn detection_snr(cfg: &PhyConfig, snr_db: f64, h_mag: f64) -> f64 {
    let half = cfg.samples_per_symbol() as f64 / 2.0;
    let a = cfg.amplitude * h_mag;
    a * a * half * half / (noise_variance(snr_db) * (half - 0.25))
}

/// `N0` for which `A_c^2 / N0 = gamma / kappa` at unit channel gain.
pub fn effective_n0(cfg: &PhyConfig, snr_db: f64, kappa: f64) -> f64 {
    let half = cfg.samples_per_symbol() as f64 / 2.0;
    kappa * noise_variance(snr_db) * (half - 0.25) / (half * half)
}

/// Clipped union bound for the configured modulation and receiver at a
/// fixed channel magnitude.
pub fn ser_analytic(cfg: &PhyConfig, detection: Detection, snr_db: f64, h_mag: f64) -> f64 {
    let kappa = match detection {
        Detection::Noncoherent => NONCOHERENT_KAPPA,
        Detection::Coherent => 1.0,
    };
    let n0 = effective_n0(cfg, snr_db, kappa);
    let ns = cfg.samples_per_symbol();
    let p = match cfg.mode {
        Modulation::PlainFsk => pe_fsk(ns, cfg.amplitude, h_mag, n0),
        Modulation::FskBpsk => pe_fsk_bpsk(ns, cfg.amplitude, h_mag, n0),
    };
    p.expect("effective N0 is positive")
}

/// `E[f(|h|)]` for `|h|^2 ~ Exp(1)`, by the trapezoid rule on
/// `u = |h|^2`. `f` is expected to be bounded.
pub fn rayleigh_average(f: impl Fn(f64) -> f64) -> f64 {
    const STEPS: usize = 40_000;
    const U_MAX: f64 = 40.0;
    let du = U_MAX / STEPS as f64;
    let g = |u: f64| f(u.sqrt()) * (-u).exp();
    let inner: f64 = (1..STEPS).map(|i| g(i as f64 * du)).sum();
    du * (inner + 0.5 * (g(0.0) + g(U_MAX)))
}

/// `B = N / 2T`.
pub fn bandwidth(n: usize, symbol_period: f64) -> Result<f64> {
    if !(symbol_period > 0.0 && symbol_period.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "symbol period {symbol_period} must be > 0"
        )));
    }
    Ok(n as f64 / (2.0 * symbol_period))
}
