//! Cosine-tone modulator and correlation receivers.
//!
//! Tone `k` of a length-`N_s` symbol is `A_c cos(pi (2k+1) n / (2 N_s))`.
//! The receiver takes the inverse DCT of the samples, i.e. it correlates
//! against every tone with sample 0 weighted by 1/2. Under that weighting
//! the tones are exactly orthogonal and the correlation of tone `k` with
//! itself is `A_c N_s / 2`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Detection, Modulation, PhyConfig, SymbolIndex, Waveform};
use crate::enn::Sign;
use crate::error::{Error, Result};

/// Gains below this cannot be equalized.
const MIN_GAIN: f64 = 1e-12;

/// `cos(pi m / (2 N_s))` with `m` reduced exactly modulo `4 N_s`.
fn tone_sample(k: usize, n: usize, ns: usize) -> f64 {
    let m = ((2 * k + 1) * n) % (4 * ns);
    (PI * m as f64 / (2.0 * ns as f64)).cos()
}

fn tone(cfg: &PhyConfig, s: SymbolIndex) -> Waveform {
    let ns = cfg.samples_per_symbol();
    let a = cfg.amplitude * s.sign.value();
    Waveform::from_real((0..ns).map(|n| a * tone_sample(s.k, n, ns)))
}

/// Plain-mode tone for index `k`.
pub fn modulate_fsk(s: SymbolIndex, cfg: &PhyConfig) -> Result<Waveform> {
    if cfg.mode != Modulation::PlainFsk {
        return Err(Error::InvalidParameter(
            "modulate_fsk needs plain mode".into(),
        ));
    }
    s.check(cfg)?;
    Ok(tone(cfg, s))
}

/// Tone `k` with phase 0 (`Plus`) or pi (`Minus`).
pub fn modulate_fsk_bpsk(s: SymbolIndex, cfg: &PhyConfig) -> Result<Waveform> {
    if cfg.mode != Modulation::FskBpsk {
        return Err(Error::InvalidParameter(
            "modulate_fsk_bpsk needs fsk-bpsk mode".into(),
        ));
    }
    s.check(cfg)?;
    Ok(tone(cfg, s))
}

/// Modulator and demodulator for one configuration, with the FFT plans
/// and a tone table prepared up front.
#[derive(Clone)]
pub struct Modem {
    cfg: PhyConfig,
    table: Vec<f64>,
    inv: Arc<dyn Fft<f64>>,
    twiddle: Vec<Complex64>,
}

impl fmt::Debug for Modem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Modem")
            .field("cfg", &self.cfg)
            .finish_non_exhaustive()
    }
}

impl Modem {
    pub fn new(cfg: PhyConfig) -> Result<Self> {
        cfg.validate()?;
        let ns = cfg.samples_per_symbol();
        let table = (0..4 * ns)
            .map(|m| (PI * m as f64 / (2.0 * ns as f64)).cos())
            .collect();
        let mut planner = FftPlanner::new();
        let inv = planner.plan_fft_inverse(2 * ns);
        let twiddle = (0..ns)
            .map(|n| Complex64::from_polar(1.0, PI * n as f64 / (2.0 * ns as f64)))
            .collect();
        Ok(Modem {
            cfg,
            table,
            inv,
            twiddle,
        })
    }

    pub fn config(&self) -> &PhyConfig {
        &self.cfg
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.cfg.samples_per_symbol()
    }

    /// Correlation of a transmitted tone with itself, `A_c N_s / 2`.
    pub fn peak_gain(&self) -> f64 {
        self.cfg.amplitude * self.samples_per_symbol() as f64 / 2.0
    }

    pub fn modulate(&self, s: SymbolIndex) -> Result<Waveform> {
        s.check(&self.cfg)?;
        Ok(self.tone_unchecked(
            s.k,
            Complex64::new(self.cfg.amplitude * s.sign.value(), 0.0),
        ))
    }

    /// `gain * cos(pi (2k+1) n / 2N_s)`, no range check.
    pub(crate) fn tone_unchecked(&self, k: usize, gain: Complex64) -> Waveform {
        let ns = self.samples_per_symbol();
        let period = 4 * ns;
        let step = 2 * k + 1;
        let mut m = 0usize;
        let mut out = Vec::with_capacity(ns);
        for _ in 0..ns {
            out.push(gain * self.table[m]);
            m = (m + step) % period;
        }
        Waveform::new(out)
    }

    /// Inverse-DCT correlations `X[k] = y[0]/2 + sum_{n>=1} y[n] cos(pi (2k+1) n / 2N_s)`
    /// for every tone. With `U` the length-`2 N_s` inverse FFT of the
    /// weighted, twiddled samples, `X[k] = (U[k] + U[2N_s-1-k]) / 2`.
    pub fn correlate(&self, y: &Waveform) -> Result<Vec<Complex64>> {
        let ns = self.samples_per_symbol();
        if y.len() != ns {
            return Err(Error::DimensionMismatch {
                expected: ns,
                actual: y.len(),
            });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * ns + self.inv.get_inplace_scratch_len()];
        let (u, scratch) = buf.split_at_mut(2 * ns);
        for (n, (s, t)) in y.samples().iter().zip(&self.twiddle).enumerate() {
            u[n] = if n == 0 { 0.5 * s * t } else { s * t };
        }
        self.inv.process_with_scratch(u, scratch);
        Ok((0..ns).map(|k| 0.5 * (u[k] + u[2 * ns - 1 - k])).collect())
    }

    /// Largest correlation magnitude; no channel knowledge used.
    pub fn demodulate_noncoherent(&self, y: &Waveform) -> Result<SymbolIndex> {
        if self.cfg.mode != Modulation::PlainFsk {
            return Err(Error::InvalidParameter(
                "the phase bit cannot be detected noncoherently".into(),
            ));
        }
        let x = self.correlate(y)?;
        Ok(SymbolIndex::plain(argmax(x.iter().map(|c| c.norm_sqr()))))
    }

    /// Equalizes by the known gain `h`, then decides on the real part of
    /// the correlations: largest real part in plain mode, largest
    /// magnitude of the real part plus its sign in frequency+BPSK mode.
    pub fn demodulate_coherent(&self, y: &Waveform, h: Complex64) -> Result<SymbolIndex> {
        check_gain(h)?;
        let x = self.correlate(y)?;
        let inv = 1.0 / h;
        Ok(self.decide_coherent(x.iter().map(|c| (c * inv).re)))
    }

    pub(crate) fn decide_coherent(&self, re: impl Iterator<Item = f64>) -> SymbolIndex {
        match self.cfg.mode {
            Modulation::PlainFsk => SymbolIndex::plain(argmax(re)),
            Modulation::FskBpsk => {
                let re: Vec<f64> = re.collect();
                let k = argmax(re.iter().map(|r| r.abs()));
                SymbolIndex {
                    k,
                    sign: Sign::of(re[k]),
                }
            }
        }
    }

    pub fn demodulate(
        &self,
        y: &Waveform,
        detection: Detection,
        h: Complex64,
    ) -> Result<SymbolIndex> {
        match detection {
            Detection::Noncoherent => self.demodulate_noncoherent(y),
            Detection::Coherent => self.demodulate_coherent(y, h),
        }
    }
}

pub(crate) fn check_gain(h: Complex64) -> Result<()> {
    let mag = h.norm();
    if !(mag >= MIN_GAIN) {
        return Err(Error::DegenerateChannel(mag));
    }
    Ok(())
}

/// Index of the first maximum.
pub(crate) fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn plain(n: usize) -> PhyConfig {
        PhyConfig::new(n, Modulation::PlainFsk).unwrap()
    }

    fn unit(cfg: PhyConfig) -> PhyConfig {
        PhyConfig {
            amplitude: 1.0,
            ..cfg
        }
    }

    // Direct O(N^2) evaluation of the weighted correlations.
    fn correlate_oracle(y: &Waveform) -> Vec<Complex64> {
        let ns = y.len();
        (0..ns)
            .map(|k| {
                y.samples()
                    .iter()
                    .enumerate()
                    .map(|(n, s)| {
                        let w = if n == 0 { 0.5 } else { 1.0 };
                        s * (w * (PI * ((2 * k + 1) * n) as f64 / (2.0 * ns as f64)).cos())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn tone_examples() {
        let cfg = unit(plain(8));
        let w = modulate_fsk(SymbolIndex::plain(0), &cfg).unwrap();
        for (n, s) in w.samples().iter().enumerate() {
            assert_abs_diff_eq!(s.re, (PI * n as f64 / 16.0).cos(), epsilon = 1e-15);
            assert_eq!(s.im, 0.0);
        }
        let cfg = plain(16);
        for k in 0..16 {
            let w = modulate_fsk(SymbolIndex::plain(k), &cfg).unwrap();
            assert_eq!(w.samples()[0].re, cfg.amplitude);
            assert_abs_diff_eq!(w.mean_power(), 1.0, epsilon = 1e-12);
        }
        assert!(modulate_fsk(SymbolIndex::plain(16), &cfg).is_err());
        assert!(modulate_fsk_bpsk(SymbolIndex::plain(1), &cfg).is_err());
    }

    #[test]
    fn modem_matches_free_functions() {
        let cfg = plain(16);
        let modem = Modem::new(cfg).unwrap();
        for k in 0..16 {
            let s = SymbolIndex::plain(k);
            let a = modem.modulate(s).unwrap();
            let b = modulate_fsk(s, &cfg).unwrap();
            for (x, y) in a.samples().iter().zip(b.samples()) {
                assert_abs_diff_eq!(x.re, y.re, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn bpsk_negation_and_plain_equivalence() {
        let cfg = PhyConfig::new(16, Modulation::FskBpsk).unwrap();
        let p = modulate_fsk_bpsk(
            SymbolIndex {
                k: 3,
                sign: Sign::Plus,
            },
            &cfg,
        )
        .unwrap();
        let m = modulate_fsk_bpsk(
            SymbolIndex {
                k: 3,
                sign: Sign::Minus,
            },
            &cfg,
        )
        .unwrap();
        assert_eq!(p.scaled(Complex64::new(-1.0, 0.0)), m);
        let q = modulate_fsk(SymbolIndex::plain(3), &plain(16)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn weighted_gram_is_diagonal() {
        for cfg in [
            plain(16),
            PhyConfig::with_extension(8, Modulation::PlainFsk, 3).unwrap(),
        ] {
            let ns = cfg.samples_per_symbol();
            let modem = Modem::new(cfg).unwrap();
            // weighted Gram entry = A_c * X[k] = A_c^2 N_s / 2 on the diagonal
            let expected = cfg.amplitude * cfg.amplitude * ns as f64 / 2.0;
            for j in 0..ns {
                let x = modem
                    .correlate(&modem.modulate(SymbolIndex::plain(j)).unwrap())
                    .unwrap();
                for (k, c) in x.iter().enumerate() {
                    let target = if j == k { expected } else { 0.0 };
                    assert_abs_diff_eq!(cfg.amplitude * c.re, target, epsilon = 1e-9 * expected);
                    assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn plain_gram_has_rank_one_offset() {
        // Without the half weight on sample 0 every pair of tones overlaps
        // by A^2/2, because all tones share the sample cos(0) = 1.
        let cfg = unit(plain(8));
        for j in 0..8 {
            for k in 0..8 {
                let a = modulate_fsk(SymbolIndex::plain(j), &cfg).unwrap();
                let b = modulate_fsk(SymbolIndex::plain(k), &cfg).unwrap();
                let expected = if j == k { 4.5 } else { 0.5 };
                assert_abs_diff_eq!(a.inner(&b).re, expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn bpsk_constellation_gram() {
        let cfg = PhyConfig::new(8, Modulation::FskBpsk).unwrap();
        let modem = Modem::new(cfg).unwrap();
        let symbols: Vec<SymbolIndex> = (0..8)
            .flat_map(|k| [Sign::Plus, Sign::Minus].map(|sign| SymbolIndex { k, sign }))
            .collect();
        let g = modem.peak_gain() * cfg.amplitude;
        for a in &symbols {
            let x = modem.correlate(&modem.modulate(*a).unwrap()).unwrap();
            for b in &symbols {
                let value = x[b.k].re * cfg.amplitude * b.sign.value();
                let expected = if a.k != b.k {
                    0.0
                } else if a.sign == b.sign {
                    g
                } else {
                    -g
                };
                assert_abs_diff_eq!(value, expected, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn noiseless_loopback() {
        let cfg = PhyConfig::with_extension(16, Modulation::PlainFsk, 2).unwrap();
        let modem = Modem::new(cfg).unwrap();
        let j = Complex64::new(0.0, 1.0);
        for k in 0..32 {
            let s = SymbolIndex::plain(k);
            let y = modem.modulate(s).unwrap();
            assert_eq!(modem.demodulate_noncoherent(&y).unwrap(), s);
            assert_eq!(modem.demodulate_noncoherent(&y.scaled(j)).unwrap(), s);
            assert_eq!(modem.demodulate_coherent(&y.scaled(j), j).unwrap(), s);
        }
        let cfg = PhyConfig::new(16, Modulation::FskBpsk).unwrap();
        let modem = Modem::new(cfg).unwrap();
        let h = Complex64::from_polar(1.0, PI / 3.0);
        for k in 0..16 {
            for sign in [Sign::Plus, Sign::Minus] {
                let s = SymbolIndex { k, sign };
                let y = modem.modulate(s).unwrap();
                assert_eq!(
                    modem
                        .demodulate_coherent(&y, Complex64::new(1.0, 0.0))
                        .unwrap(),
                    s
                );
                assert_eq!(modem.demodulate_coherent(&y.scaled(h), h).unwrap(), s);
            }
        }
        assert!(modem
            .demodulate_noncoherent(&modem.modulate(SymbolIndex::plain(0)).unwrap())
            .is_err());
    }

    #[test]
    fn coherent_rejects_vanishing_gain() {
        let modem = Modem::new(PhyConfig::new(8, Modulation::FskBpsk).unwrap()).unwrap();
        let y = modem.modulate(SymbolIndex::plain(2)).unwrap();
        let err = modem.demodulate_coherent(&y, Complex64::new(1e-13, 0.0));
        assert!(matches!(err, Err(Error::DegenerateChannel(_))));
    }

    #[test]
    fn ties_go_to_lowest_index() {
        assert_eq!(argmax([1.0, 3.0, 3.0, 2.0].into_iter()), 1);
        let modem = Modem::new(plain(8)).unwrap();
        assert_eq!(
            modem.demodulate_noncoherent(&Waveform::zeros(8)).unwrap().k,
            0
        );
    }

    #[test]
    fn rejects_wrong_length() {
        let modem = Modem::new(plain(8)).unwrap();
        assert!(modem.correlate(&Waveform::zeros(7)).is_err());
    }

    proptest! {
        #[test]
        fn fft_correlator_matches_direct_sum(
            re in proptest::collection::vec(-2.0f64..2.0, 24),
            im in proptest::collection::vec(-2.0f64..2.0, 24),
        ) {
            let cfg = PhyConfig::with_extension(8, Modulation::PlainFsk, 3).unwrap();
            let modem = Modem::new(cfg).unwrap();
            let y = Waveform::new(re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect());
            let fast = modem.correlate(&y).unwrap();
            for (a, b) in fast.iter().zip(correlate_oracle(&y)) {
                prop_assert!((a - b).norm() < 1e-10);
            }
        }

        #[test]
        fn noncoherent_is_phase_blind(
            re in proptest::collection::vec(-1.0f64..1.0, 16),
            im in proptest::collection::vec(-1.0f64..1.0, 16),
            theta in 0.0f64..(2.0 * PI),
            c in 0.01f64..100.0,
        ) {
            let modem = Modem::new(plain(16)).unwrap();
            let y = Waveform::new(re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect());
            let rotated = y.scaled(Complex64::from_polar(c, theta));
            prop_assert_eq!(modem.demodulate_noncoherent(&y).unwrap(), modem.demodulate_noncoherent(&rotated).unwrap());
        }
    }
}
