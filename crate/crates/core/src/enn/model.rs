use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;

use super::basis::{activation, activation_at_index, Sign};
use crate::error::{Error, Result};

/// Architecture of the two-layer network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnnConfig {
    pub input_dim: usize,
    /// Hidden neurons `M`.
    pub hidden: usize,
    /// DCT coefficients per activation (`Q/2`).
    pub half_coeffs: usize,
    /// Grid size `N`, shared with the waveform alphabet.
    pub dct_size: usize,
}

impl EnnConfig {
    pub fn new(
        input_dim: usize,
        hidden: usize,
        half_coeffs: usize,
        dct_size: usize,
    ) -> Result<Self> {
        let config = EnnConfig {
            input_dim,
            hidden,
            half_coeffs,
            dct_size,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden == 0 || self.half_coeffs == 0 {
            return Err(Error::InvalidParameter(
                "input_dim, hidden and half_coeffs must be at least 1".into(),
            ));
        }
        if self.dct_size < 2 || !self.dct_size.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "dct_size must be even and >= 2, got {}",
                self.dct_size
            )));
        }
        Ok(())
    }
}

impl Default for EnnConfig {
    fn default() -> Self {
        EnnConfig {
            input_dim: 2,
            hidden: 6,
            half_coeffs: 6,
            dct_size: 128,
        }
    }
}

/// Weights and activation coefficients.
///
/// `a1` is `(input_dim + 1) x M` with the bias in row 0, `a2` has the bias in
/// entry 0. Column `k` of `f1` holds the coefficients of hidden neuron `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnnModel {
    config: EnnConfig,
    pub a1: Array2<f64>,
    pub a2: Array1<f64>,
    pub f1: Array2<f64>,
    pub f2: Array1<f64>,
}

/// Intermediate signals of one forward evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// Input with the leading bias entry, `[1, x]`.
    pub s0: Array1<f64>,
    /// Hidden pre-activations. For a folded evaluation these are the folded
    /// grid arguments seen by the receiver.
    pub z1: Array1<f64>,
    pub s1: Array1<f64>,
    pub z2: f64,
    pub y_hat: f64,
    pub fold_signs: Vec<Sign>,
}

/// Leading odd DCT-II coefficients of `f` sampled on the `N`-point grid.
pub fn odd_dct_coefficients(f: impl Fn(f64) -> f64, half_coeffs: usize, n: usize) -> Vec<f64> {
    (1..=half_coeffs)
        .map(|q| {
            let freq = (2 * q - 1) as f64;
            let sum: f64 = (0..n)
                .map(|k| {
                    let x = -1.0 + 2.0 * k as f64 / n as f64;
                    f(x) * (PI * freq * (2 * k + 1) as f64 / (2.0 * n as f64)).cos()
                })
                .sum();
            2.0 * sum / n as f64
        })
        .collect()
}

impl EnnModel {
    pub fn zeros(config: EnnConfig) -> Result<Self> {
        config.validate()?;
        let m = config.hidden;
        Ok(EnnModel {
            config,
            a1: Array2::zeros((config.input_dim + 1, m)),
            a2: Array1::zeros(m + 1),
            f1: Array2::zeros((config.half_coeffs, m)),
            f2: Array1::zeros(config.half_coeffs),
        })
    }

    pub fn from_parts(
        config: EnnConfig,
        a1: Array2<f64>,
        a2: Array1<f64>,
        f1: Array2<f64>,
        f2: Array1<f64>,
    ) -> Result<Self> {
        config.validate()?;
        let (d, m, q) = (config.input_dim, config.hidden, config.half_coeffs);
        if a1.dim() != (d + 1, m) {
            return Err(Error::DimensionMismatch {
                expected: (d + 1) * m,
                actual: a1.len(),
            });
        }
        if a2.len() != m + 1 {
            return Err(Error::DimensionMismatch {
                expected: m + 1,
                actual: a2.len(),
            });
        }
        if f1.dim() != (q, m) {
            return Err(Error::DimensionMismatch {
                expected: q * m,
                actual: f1.len(),
            });
        }
        if f2.len() != q {
            return Err(Error::DimensionMismatch {
                expected: q,
                actual: f2.len(),
            });
        }
        let model = EnnModel {
            config,
            a1,
            a2,
            f1,
            f2,
        };
        if !model.is_finite() {
            return Err(Error::NonFinite("model parameters"));
        }
        Ok(model)
    }

    /// Random start: linear weights uniform in `[-0.5, 0.5]`, activations
    /// at half of a tanh projection with a `+-0.01` jitter.
    pub fn init<R: Rng + ?Sized>(config: EnnConfig, rng: &mut R) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        model.a1.mapv_inplace(|_| rng.random_range(-0.5..=0.5));
        model.a2.mapv_inplace(|_| rng.random_range(-0.5..=0.5));
        let base = odd_dct_coefficients(f64::tanh, config.half_coeffs, config.dct_size);
        for k in 0..config.hidden {
            for (q, b) in base.iter().enumerate() {
                model.f1[[q, k]] = 0.5 * b + rng.random_range(-0.01..=0.01);
            }
        }
        for (q, b) in base.iter().enumerate() {
            model.f2[q] = 0.5 * b + rng.random_range(-0.01..=0.01);
        }
        Ok(model)
    }

    pub fn config(&self) -> &EnnConfig {
        &self.config
    }

    pub fn is_finite(&self) -> bool {
        self.a1
            .iter()
            .chain(&self.a2)
            .chain(&self.f1)
            .chain(&self.f2)
            .all(|v| v.is_finite())
    }

    pub fn neuron_coeffs(&self, k: usize) -> Vec<f64> {
        self.f1.column(k).to_vec()
    }

    /// Transmitter half: `[1, x]` and `z1 = A1^T [1, x]`.
    pub fn hidden_preactivation(&self, x: &[f64]) -> Result<(Array1<f64>, Array1<f64>)> {
        if x.len() != self.config.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.config.input_dim,
                actual: x.len(),
            });
        }
        let mut s0 = Array1::ones(x.len() + 1);
        for (dst, v) in s0.iter_mut().skip(1).zip(x) {
            *dst = *v;
        }
        let z1 = self.a1.t().dot(&s0);
        Ok((s0, z1))
    }

    /// Receiver half: hidden activations and the output layer.
    ///
    /// `fold_signs[k]` multiplies neuron `k`'s activation, which is how a
    /// folded symbol is turned back into the unfolded value.
    pub fn complete(
        &self,
        s0: Array1<f64>,
        z1: Array1<f64>,
        fold_signs: Vec<Sign>,
    ) -> ForwardTrace {
        let n = self.config.dct_size;
        let s1: Array1<f64> = (0..self.config.hidden)
            .map(|k| {
                let coeffs = self.f1.column(k);
                fold_signs[k].value() * activation_view(coeffs, z1[k], n)
            })
            .collect();
        let z2 = self.a2[0] + self.a2.slice(ndarray::s![1..]).dot(&s1);
        let y_hat = activation(self.f2.as_slice().expect("contiguous"), z2, n);
        ForwardTrace {
            s0,
            z1,
            s1,
            z2,
            y_hat,
            fold_signs,
        }
    }

    /// Receiver half fed with integer grid indices instead of real arguments.
    pub fn complete_from_indices(
        &self,
        s0: Array1<f64>,
        indices: &[i64],
        fold_signs: Vec<Sign>,
    ) -> ForwardTrace {
        let n = self.config.dct_size;
        let z1: Array1<f64> = indices
            .iter()
            .map(|&k| super::basis::argument_of_index(k, n))
            .collect();
        let s1: Array1<f64> = indices
            .iter()
            .enumerate()
            .map(|(k, &idx)| {
                fold_signs[k].value() * activation_at_index(&self.neuron_coeffs(k), idx, n)
            })
            .collect();
        let z2 = self.a2[0] + self.a2.slice(ndarray::s![1..]).dot(&s1);
        let y_hat = activation(self.f2.as_slice().expect("contiguous"), z2, n);
        ForwardTrace {
            s0,
            z1,
            s1,
            z2,
            y_hat,
            fold_signs,
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardTrace> {
        let (s0, z1) = self.hidden_preactivation(x)?;
        Ok(self.complete(s0, z1, vec![Sign::Plus; self.config.hidden]))
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x)?.y_hat)
    }
}

fn activation_view(coeffs: ArrayView1<f64>, z: f64, n: usize) -> f64 {
    match coeffs.as_slice() {
        Some(c) => activation(c, z, n),
        None => activation(&coeffs.to_vec(), z, n),
    }
}
