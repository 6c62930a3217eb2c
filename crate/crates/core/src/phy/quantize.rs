//! Mapping between real pre-activations and transmittable indices.
//!
//! A value `z` lands on the raw grid index `r = round(N(z+1)/2)`, so the
//! grid step in `z` is `2/N`. How `r` becomes a symbol depends on the
//! modulation:
//!
//! * frequency+BPSK folds `r` into `[0, N-1]` plus a sign bit;
//! * plain tones cover `[0, E*N-1]`. A raw index outside that range is
//!   sent as the tone it physically aliases to: the sampled cosine for
//!   `r` coincides with the one for its reflection modulo `2EN`. The
//!   activation is unchanged by the reflection but its slope flips, which
//!   the transmitter tracks in [`Quantized::slope_sign`].

use super::{Modulation, PhyConfig, SymbolIndex};
use crate::enn::{argument_of_index, fold_index, Sign};

/// Nearest grid index, ties away from zero.
pub fn raw_index(z: f64, n: usize) -> i64 {
    (n as f64 * (z + 1.0) / 2.0).round() as i64
}

/// Reflects `r` into `[0, span-1]` the way a sampled cosine tone with
/// `span` distinguishable frequencies aliases. The sign reports whether
/// the reflection reversed direction.
pub fn alias_index(r: i64, span: usize) -> (usize, Sign) {
    let span = span as i64;
    let m = r.rem_euclid(2 * span);
    if m < span {
        (m as usize, Sign::Plus)
    } else {
        ((2 * span - 1 - m) as usize, Sign::Minus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quantized {
    pub symbol: SymbolIndex,
    pub raw: i64,
    /// Sign linking the activation slope at `raw` to the slope at the
    /// transmitted index (plain mode reflections only; `Plus` otherwise).
    pub slope_sign: Sign,
    /// `raw` fell outside the plain-mode alphabet.
    pub wrapped: bool,
}

pub fn quantize(z: f64, cfg: &PhyConfig) -> Quantized {
    let raw = raw_index(z, cfg.n);
    match cfg.mode {
        Modulation::FskBpsk => {
            let (k, sign) = fold_index(raw, cfg.n);
            Quantized {
                symbol: SymbolIndex { k, sign },
                raw,
                slope_sign: Sign::Plus,
                wrapped: false,
            }
        }
        Modulation::PlainFsk => {
            let span = cfg.samples_per_symbol();
            let (k, slope_sign) = alias_index(raw, span);
            let wrapped = raw < 0 || raw >= span as i64;
            Quantized {
                symbol: SymbolIndex::plain(k),
                raw,
                slope_sign,
                wrapped,
            }
        }
    }
}

/// Grid argument of the tone index, `-1 + 2k/N`; the phase bit is not
/// part of the argument.
pub fn dequantize(s: SymbolIndex, n: usize) -> f64 {
    argument_of_index(s.k as i64, n)
}
