//! Orthogonal chirp multiplexing of several tone streams in one channel use.
//!
//! Stream `m` is multiplied by `psi_m[n] = exp(-j (pi/N_s) (n-m)^2)`. The
//! chirps are orthogonal to each other, but once a chirp carries a tone
//! the products are not: dechirping stream `m` turns every other stream
//! `m'` into a tone shifted by `2(m'-m)` bins at half amplitude, plus
//! leakage. A per-stream dechirp-and-detect receiver therefore makes
//! errors even without noise.
//!
//! The receiver here fits all streams jointly by minimizing the residual
//! energy `|y - sum_m g_m c_{k_m} psi_m|^2`: strongest-first cancellation,
//! then exact coordinate descent over streams, then restarts (single
//! stream, stream pairs, pinned re-peels) while the residual stays above
//! the noise floor. With free complex gains (noncoherent detection) a few
//! symbol sets are not identifiable for small `N_s`: a different set of
//! tones fits the waveform exactly.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::modem::{check_gain, Modem};
use super::{Detection, Modulation, SymbolIndex, Waveform};
use crate::enn::Sign;
use crate::error::{Error, Result};

/// Upper bound on refinement sweeps; noiseless inputs settle in two.
const MAX_SWEEPS: usize = 16;

/// `exp(-j (pi/N_s) (n-m)^2)` for `n = 0..N_s-1`.
pub fn chirp(m: usize, ns: usize) -> Result<Vec<Complex64>> {
    if ns == 0 || !ns.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "chirp length {ns} must be even"
        )));
    }
    if m >= ns {
        return Err(Error::IndexOutOfRange {
            index: m as i64,
            limit: ns,
        });
    }
    let period = 2 * ns as i64;
    Ok((0..ns as i64)
        .map(|n| {
            // (n-m)^2 mod 2N_s keeps the phase exact for long chirps
            let d = n - m as i64;
            let q = (d * d).rem_euclid(period);
            Complex64::from_polar(1.0, -PI * q as f64 / ns as f64)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChirpBank {
    ns: usize,
    chirps: Vec<Vec<Complex64>>,
}

impl ChirpBank {
    pub fn new(streams: usize, ns: usize) -> Result<Self> {
        if streams > ns {
            return Err(Error::InvalidParameter(format!(
                "{streams} streams exceed {ns} chirps"
            )));
        }
        let chirps = (0..streams).map(|m| chirp(m, ns)).collect::<Result<_>>()?;
        Ok(ChirpBank { ns, chirps })
    }

    pub fn streams(&self) -> usize {
        self.chirps.len()
    }

    pub fn samples(&self) -> usize {
        self.ns
    }

    pub fn chirp(&self, m: usize) -> &[Complex64] {
        &self.chirps[m]
    }
}

/// `sum_m x_m[n] psi_m[n]`.
pub fn ocdm_multiplex(waveforms: &[Waveform], bank: &ChirpBank) -> Result<Waveform> {
    if waveforms.len() > bank.streams() {
        return Err(Error::InvalidParameter(format!(
            "{} streams but only {} chirps",
            waveforms.len(),
            bank.streams()
        )));
    }
    let mut out = Waveform::zeros(bank.ns);
    for (w, psi) in waveforms.iter().zip(&bank.chirps) {
        if w.len() != bank.ns {
            return Err(Error::DimensionMismatch {
                expected: bank.ns,
                actual: w.len(),
            });
        }
        for ((o, s), p) in out.samples_mut().iter_mut().zip(w.samples()).zip(psi) {
            *o += s * p;
        }
    }
    Ok(out)
}

/// `y[n] conj(psi_m[n])`.
pub fn ocdm_dechirp(y: &Waveform, m: usize, bank: &ChirpBank) -> Result<Waveform> {
    if y.len() != bank.ns {
        return Err(Error::DimensionMismatch {
            expected: bank.ns,
            actual: y.len(),
        });
    }
    let psi = bank.chirps.get(m).ok_or(Error::IndexOutOfRange {
        index: m as i64,
        limit: bank.streams(),
    })?;
    Ok(Waveform::new(
        y.samples()
            .iter()
            .zip(psi)
            .map(|(s, p)| s * p.conj())
            .collect(),
    ))
}

/// One detected stream: symbol and complex amplitude estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Estimate {
    symbol: SymbolIndex,
    gain: Complex64,
}

/// Candidate tones tried per stream when the coordinate search stalls.
const SEARCH_WIDTH: usize = 4;

/// Candidate tones per stream in the two-stream search.
const PAIR_WIDTH: usize = 6;

/// Working state of the joint detector: current estimates, their chirped
/// reconstructions and `y` minus all reconstructions.
#[derive(Clone)]
struct Joint {
    estimates: Vec<Estimate>,
    recon: Vec<Waveform>,
    residual: Waveform,
}

impl Joint {
    fn energy(&self) -> f64 {
        self.residual.energy()
    }
}

impl Modem {
    /// Plain inner products `<d, c_k>` of a dechirped residual with every
    /// tone, recovered from the weighted correlator.
    fn stream_products(
        &self,
        residual: &Waveform,
        m: usize,
        bank: &ChirpBank,
    ) -> Result<Vec<Complex64>> {
        let d = ocdm_dechirp(residual, m, bank)?;
        let d0 = 0.5 * d.samples()[0];
        Ok(self.correlate(&d)?.into_iter().map(|x| x + d0).collect())
    }

    /// Candidates for one stream ranked by how much they reduce the
    /// residual, best first, each with its least-squares gain.
    fn rank_stream(
        &self,
        u: &[Complex64],
        detection: Detection,
        h: Complex64,
        take: usize,
    ) -> Vec<(f64, Estimate)> {
        let ns = self.samples_per_symbol();
        let norm = (ns as f64 + 1.0) / 2.0;
        let a = self.config().amplitude;
        let mut scored: Vec<(f64, Estimate)> = match detection {
            Detection::Noncoherent => u
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    (
                        p.norm_sqr(),
                        Estimate {
                            symbol: SymbolIndex::plain(k),
                            gain: p / norm,
                        },
                    )
                })
                .collect(),
            Detection::Coherent => {
                let bpsk = self.config().mode == Modulation::FskBpsk;
                u.iter()
                    .enumerate()
                    .map(|(k, p)| {
                        let r = (p * h.conj()).re;
                        let sign = if bpsk { Sign::of(r) } else { Sign::Plus };
                        // reduction in residual energy for gain h A sign
                        let score = 2.0 * a * sign.value() * r - a * a * h.norm_sqr() * norm;
                        (
                            score,
                            Estimate {
                                symbol: SymbolIndex { k, sign },
                                gain: h * (a * sign.value()),
                            },
                        )
                    })
                    .collect()
            }
        };
        // stable sort keeps the lowest index first among equal scores
        scored.sort_by(|x, y| y.0.total_cmp(&x.0));
        scored.truncate(take);
        scored
    }

    fn chirped_tone(&self, e: &Estimate, m: usize, bank: &ChirpBank) -> Waveform {
        let mut w = self.tone_unchecked(e.symbol.k, e.gain);
        for (s, p) in w.samples_mut().iter_mut().zip(bank.chirp(m)) {
            *s *= p;
        }
        w
    }

    fn set_stream(&self, joint: &mut Joint, m: usize, e: Estimate, bank: &ChirpBank) {
        add(&mut joint.residual, &joint.recon[m]);
        joint.recon[m] = self.chirped_tone(&e, m, bank);
        subtract(&mut joint.residual, &joint.recon[m]);
        joint.estimates[m] = e;
    }

    /// Exact coordinate descent on the residual energy: each stream in turn
    /// takes the best tone against the others' reconstruction.
    fn coordinate_descent(
        &self,
        joint: &mut Joint,
        bank: &ChirpBank,
        detection: Detection,
        h: Complex64,
    ) -> Result<()> {
        for _ in 0..MAX_SWEEPS {
            let mut changed = false;
            for m in 0..bank.streams() {
                add(&mut joint.residual, &joint.recon[m]);
                let u = self.stream_products(&joint.residual, m, bank)?;
                subtract(&mut joint.residual, &joint.recon[m]);
                let (_, e) = self.rank_stream(&u, detection, h, 1)[0];
                changed |= e.symbol != joint.estimates[m].symbol;
                self.set_stream(joint, m, e, bank);
            }
            if !changed {
                break;
            }
        }
        Ok(())
    }

    /// Candidates for stream `m` against the residual without its own
    /// contribution.
    fn stream_candidates(
        &self,
        joint: &Joint,
        m: usize,
        bank: &ChirpBank,
        detection: Detection,
        h: Complex64,
        take: usize,
    ) -> Result<Vec<Estimate>> {
        let mut open = joint.residual.clone();
        add(&mut open, &joint.recon[m]);
        let u = self.stream_products(&open, m, bank)?;
        Ok(self
            .rank_stream(&u, detection, h, take)
            .into_iter()
            .map(|(_, e)| e)
            .collect())
    }

    fn accept_if_better(
        &self,
        joint: &mut Joint,
        mut trial: Joint,
        bank: &ChirpBank,
        detection: Detection,
        h: Complex64,
    ) -> Result<bool> {
        self.coordinate_descent(&mut trial, bank, detection, h)?;
        if trial.energy() < joint.energy() * (1.0 - 1e-12) {
            *joint = trial;
            return Ok(true);
        }
        Ok(false)
    }

    /// Restarts from each runner-up tone of each stream.
    fn single_stream_search(
        &self,
        joint: &mut Joint,
        bank: &ChirpBank,
        detection: Detection,
        h: Complex64,
        floor: f64,
    ) -> Result<()> {
        let mut improved = true;
        while improved && joint.energy() > floor {
            improved = false;
            for m in 0..bank.streams() {
                for e in self.stream_candidates(joint, m, bank, detection, h, SEARCH_WIDTH + 1)? {
                    if e.symbol == joint.estimates[m].symbol {
                        continue;
                    }
                    let mut trial = joint.clone();
                    self.set_stream(&mut trial, m, e, bank);
                    improved |= self.accept_if_better(joint, trial, bank, detection, h)?;
                    if joint.energy() <= floor {
                        return Ok(());
                    }
                }
            }
        }
        Ok(())
    }

    /// Restarts that move two streams at once. Needed when two streams'
    /// chirp-shifted tones overlap, which happens for adjacent chirps with
    /// tones near the band edges.
    fn stream_pair_search(
        &self,
        joint: &mut Joint,
        bank: &ChirpBank,
        detection: Detection,
        h: Complex64,
        floor: f64,
    ) -> Result<()> {
        let streams = bank.streams();
        let blank = Estimate {
            symbol: SymbolIndex::plain(0),
            gain: Complex64::new(0.0, 0.0),
        };
        let mut improved = true;
        while improved && joint.energy() > floor {
            improved = false;
            for m1 in 0..streams {
                for m2 in (0..streams).filter(|&m2| m2 != m1) {
                    let mut base = joint.clone();
                    self.set_stream(&mut base, m1, blank, bank);
                    self.set_stream(&mut base, m2, blank, bank);
                    for e1 in self.stream_candidates(&base, m1, bank, detection, h, PAIR_WIDTH)? {
                        let mut partial = base.clone();
                        self.set_stream(&mut partial, m1, e1, bank);
                        for e2 in
                            self.stream_candidates(&partial, m2, bank, detection, h, PAIR_WIDTH)?
                        {
                            let mut trial = partial.clone();
                            self.set_stream(&mut trial, m2, e2, bank);
                            improved |= self.accept_if_better(joint, trial, bank, detection, h)?;
                            if joint.energy() <= floor {
                                return Ok(());
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Strongest-first successive cancellation followed by coordinate
    /// descent, optionally with one stream pinned up front.
    fn peel(
        &self,
        y: &Waveform,
        bank: &ChirpBank,
        detection: Detection,
        h: Complex64,
        pinned: Option<(usize, Estimate)>,
    ) -> Result<Joint> {
        let ns = self.samples_per_symbol();
        let streams = bank.streams();
        let blank = Estimate {
            symbol: SymbolIndex::plain(0),
            gain: Complex64::new(0.0, 0.0),
        };
        let mut joint = Joint {
            estimates: vec![blank; streams],
            recon: vec![Waveform::zeros(ns); streams],
            residual: y.clone(),
        };
        let mut open: Vec<usize> = (0..streams).collect();
        if let Some((m, e)) = pinned {
            self.set_stream(&mut joint, m, e, bank);
            open.retain(|&o| o != m);
        }
        while !open.is_empty() {
            let mut best: Option<(usize, f64, Estimate)> = None;
            for (slot, &m) in open.iter().enumerate() {
                let u = self.stream_products(&joint.residual, m, bank)?;
                let (score, e) = self.rank_stream(&u, detection, h, 1)[0];
                if best.is_none_or(|(_, s, _)| score > s) {
                    best = Some((slot, score, e));
                }
            }
            let (slot, _, e) = best.expect("open stream");
            let m = open.remove(slot);
            self.set_stream(&mut joint, m, e, bank);
        }
        self.coordinate_descent(&mut joint, bank, detection, h)?;
        Ok(joint)
    }

    /// Fresh peels with each stream pinned to each of its strongest tones
    /// in the raw waveform.
    fn restart_search(
        &self,
        joint: &mut Joint,
        y: &Waveform,
        bank: &ChirpBank,
        detection: Detection,
        h: Complex64,
        floor: f64,
    ) -> Result<()> {
        for m in 0..bank.streams() {
            let u = self.stream_products(y, m, bank)?;
            for (_, e) in self.rank_stream(&u, detection, h, PAIR_WIDTH) {
                let mut trial = self.peel(y, bank, detection, h, Some((m, e)))?;
                if trial.energy() > floor {
                    self.single_stream_search(&mut trial, bank, detection, h, floor)?;
                }
                if trial.energy() < joint.energy() * (1.0 - 1e-12) {
                    *joint = trial;
                    if joint.energy() <= floor {
                        return Ok(());
                    }
                }
            }
        }
        Ok(())
    }

    /// Recovers one symbol per chirp of `bank` from a multiplexed waveform.
    ///
    /// Streams are peeled off strongest-first and then refined by
    /// coordinate descent on the residual energy. If the residual is still
    /// above `noise_floor` (the expected energy of the noise alone), the
    /// runner-up tones of every stream are tried as restarts and the
    /// lowest-residual solution wins.
    pub fn demodulate_ocdm(
        &self,
        y: &Waveform,
        bank: &ChirpBank,
        detection: Detection,
        h: Complex64,
        noise_floor: f64,
    ) -> Result<Vec<SymbolIndex>> {
        if detection == Detection::Coherent {
            check_gain(h)?;
        } else if self.config().mode != Modulation::PlainFsk {
            return Err(Error::InvalidParameter(
                "the phase bit cannot be detected noncoherently".into(),
            ));
        }
        let ns = self.samples_per_symbol();
        if bank.samples() != ns || y.len() != ns {
            return Err(Error::DimensionMismatch {
                expected: ns,
                actual: y.len().min(bank.samples()),
            });
        }
        let mut joint = self.peel(y, bank, detection, h, None)?;
        let floor = noise_floor.max(0.0) + 1e-9 * y.energy().max(f64::MIN_POSITIVE);
        if joint.energy() > floor {
            self.single_stream_search(&mut joint, bank, detection, h, floor)?;
        }
        if joint.energy() > floor && bank.streams() > 1 {
            self.stream_pair_search(&mut joint, bank, detection, h, floor)?;
        }
        if joint.energy() > floor && bank.streams() > 1 {
            self.restart_search(&mut joint, y, bank, detection, h, floor)?;
        }
        Ok(joint.estimates.into_iter().map(|e| e.symbol).collect())
    }

    /// Plain dechirp-and-detect per stream, with no interference handling.
    pub fn demodulate_ocdm_naive(
        &self,
        y: &Waveform,
        bank: &ChirpBank,
        detection: Detection,
        h: Complex64,
    ) -> Result<Vec<SymbolIndex>> {
        (0..bank.streams())
            .map(|m| self.demodulate(&ocdm_dechirp(y, m, bank)?, detection, h))
            .collect()
    }
}

fn subtract(a: &mut Waveform, b: &Waveform) {
    for (x, y) in a.samples_mut().iter_mut().zip(b.samples()) {
        *x -= y;
    }
}

fn add(a: &mut Waveform, b: &Waveform) {
    for (x, y) in a.samples_mut().iter_mut().zip(b.samples()) {
        *x += y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::PhyConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn chirp_examples() {
        let psi = chirp(3, 8).unwrap();
        assert_eq!(psi[3], one());
        assert!(psi.iter().all(|p| (p.norm() - 1.0).abs() < 1e-15));
        let a = Waveform::new(chirp(2, 8).unwrap());
        let b = Waveform::new(chirp(5, 8).unwrap());
        assert!(a.inner(&b).norm() < 1e-12);
        assert!(chirp(0, 7).is_err());
        assert!(chirp(8, 8).is_err());
    }

    #[test]
    fn chirp_gram_is_identity_times_length() {
        for ns in [8, 16, 128] {
            let bank = ChirpBank::new(ns, ns).unwrap();
            for m in 0..ns {
                let a = Waveform::new(bank.chirp(m).to_vec());
                for mp in 0..ns {
                    let g = a.inner(&Waveform::new(bank.chirp(mp).to_vec()));
                    let expected = if m == mp { ns as f64 } else { 0.0 };
                    assert!((g - expected).norm() < 1e-9, "ns {ns} ({m},{mp}) {g}");
                }
            }
        }
    }

    #[test]
    fn multiplex_basics() {
        let bank = ChirpBank::new(3, 8).unwrap();
        let x = Waveform::from_real((0..8).map(|n| n as f64));
        let single = ocdm_multiplex(std::slice::from_ref(&x), &bank).unwrap();
        assert_eq!(ocdm_dechirp(&single, 0, &bank).unwrap().samples().len(), 8);
        for (a, b) in ocdm_dechirp(&single, 0, &bank)
            .unwrap()
            .samples()
            .iter()
            .zip(x.samples())
        {
            assert!((a - b).norm() < 1e-12);
        }
        let zero = ocdm_multiplex(&[Waveform::zeros(8), Waveform::zeros(8)], &bank).unwrap();
        assert_eq!(zero.energy(), 0.0);
        let pure = Waveform::new(bank.chirp(2).to_vec());
        for s in ocdm_dechirp(&pure, 2, &bank).unwrap().samples() {
            assert!((s - one()).norm() < 1e-12);
        }
        assert!(ocdm_multiplex(&[Waveform::zeros(7)], &bank).is_err());
        assert!(ocdm_multiplex(&vec![Waveform::zeros(8); 4], &bank).is_err());
        assert!(ChirpBank::new(9, 8).is_err());
    }

    #[test]
    fn energy_adds_for_plain_chirps() {
        // Unmodulated chirps are orthogonal, so energies add.
        let bank = ChirpBank::new(4, 16).unwrap();
        let ones = Waveform::from_real(std::iter::repeat_n(1.0, 16));
        let y = ocdm_multiplex(&vec![ones.clone(); 4], &bank).unwrap();
        assert!((y.energy() - 4.0 * ones.energy()).abs() < 1e-9);
    }

    fn random_symbols(rng: &mut ChaCha8Rng, cfg: &PhyConfig, streams: usize) -> Vec<SymbolIndex> {
        (0..streams)
            .map(|_| {
                let k = rng.random_range(0..cfg.samples_per_symbol());
                let sign = match cfg.mode {
                    Modulation::PlainFsk => Sign::Plus,
                    Modulation::FskBpsk => Sign::of(rng.random_range(-1.0..1.0)),
                };
                SymbolIndex { k, sign }
            })
            .collect()
    }

    #[test]
    fn noiseless_recovery_with_cancellation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (mode, detection) in [
            (Modulation::PlainFsk, Detection::Noncoherent),
            (Modulation::PlainFsk, Detection::Coherent),
            (Modulation::FskBpsk, Detection::Coherent),
        ] {
            let cfg = PhyConfig::new(128, mode).unwrap();
            let modem = Modem::new(cfg).unwrap();
            let bank = ChirpBank::new(6, 128).unwrap();
            for _ in 0..200 {
                let symbols = random_symbols(&mut rng, &cfg, 6);
                let waves: Vec<Waveform> = symbols
                    .iter()
                    .map(|s| modem.modulate(*s).unwrap())
                    .collect();
                let h = Complex64::from_polar(1.0, rng.random_range(0.0..6.0));
                let y = ocdm_multiplex(&waves, &bank).unwrap().scaled(h);
                assert_eq!(
                    modem.demodulate_ocdm(&y, &bank, detection, h, 0.0).unwrap(),
                    symbols
                );
            }
        }
    }

    #[test]
    fn naive_receiver_suffers_cross_stream_interference() {
        let cfg = PhyConfig::new(128, Modulation::PlainFsk).unwrap();
        let modem = Modem::new(cfg).unwrap();
        let bank = ChirpBank::new(6, 128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut naive_errors = 0;
        for _ in 0..200 {
            let symbols = random_symbols(&mut rng, &cfg, 6);
            let waves: Vec<Waveform> = symbols
                .iter()
                .map(|s| modem.modulate(*s).unwrap())
                .collect();
            let y = ocdm_multiplex(&waves, &bank).unwrap();
            let naive = modem
                .demodulate_ocdm_naive(&y, &bank, Detection::Noncoherent, one())
                .unwrap();
            naive_errors += naive.iter().zip(&symbols).filter(|(a, b)| a != b).count();
            assert_eq!(
                modem
                    .demodulate_ocdm(&y, &bank, Detection::Noncoherent, one(), 0.0)
                    .unwrap(),
                symbols
            );
        }
        assert!(naive_errors > 0);
    }
}
