//! Analytic gradients of the squared-error loss `L = (y - y_hat)^2 / 2`.
//!
//! Two conventions meet here. [`Gradients`] holds plain loss gradients
//! (descend by subtracting them). The first-layer update carried over the
//! link is instead the input-normalized *update direction*
//! `(pi^2/4) (s0[m]/|s0[m]|^2) eps a2[k] S2 S1[k]`, where `S2` and `S1[k]`
//! are the slope sums of the output and hidden activations; it points
//! against the loss gradient.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};

use super::basis::{activation_slope, dct_basis_cos_unchecked};
use super::model::{EnnModel, ForwardTrace};
use crate::error::{Error, Result};

/// Inputs smaller than this get a zero normalization factor.
pub const DEGENERATE_INPUT: f64 = 1e-6;

/// How the first-layer update is scaled by the input `s0[m]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FirstLayerNorm {
    /// Multiply by `s0[m]`: the exact gradient of the loss.
    #[default]
    Gradient,
    /// Multiply by `s0[m] / |s0[m]|^2`, the per-entry normalized form.
    Normalized,
}

impl FirstLayerNorm {
    /// Factor applied to the per-neuron core for input entry `s0`.
    pub fn factor(self, s0: f64) -> f64 {
        match self {
            FirstLayerNorm::Gradient => s0,
            FirstLayerNorm::Normalized => {
                if s0.abs() < DEGENERATE_INPUT {
                    0.0
                } else {
                    s0 / (s0 * s0)
                }
            }
        }
    }
}

/// Loss gradients for every parameter group.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub a1: Array2<f64>,
    pub a2: Array1<f64>,
    pub f1: Array2<f64>,
    pub f2: Array1<f64>,
}

/// Loss gradients of the parameters that live at the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverGradients {
    pub a2: Array1<f64>,
    pub f1: Array2<f64>,
    pub f2: Array1<f64>,
}

/// First-layer update direction plus the input entries that were too
/// small to normalize.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstLayerUpdate {
    pub values: Array2<f64>,
    pub degenerate_inputs: Vec<usize>,
}

fn slopes(trace: &ForwardTrace, model: &EnnModel) -> (f64, Array1<f64>) {
    let n = model.config().dct_size;
    let s2 = activation_slope(model.f2.as_slice().expect("contiguous"), trace.z2, n);
    let s1 = (0..model.config().hidden)
        .map(|k| {
            trace.fold_signs[k].value() * activation_slope(&model.neuron_coeffs(k), trace.z1[k], n)
        })
        .collect();
    (s2, s1)
}

/// Per-neuron factor `(pi^2/4) eps a2[k] S2 S1[k]`: everything in the
/// first-layer update except the input term. This is the quantity the
/// receiver sends back to the transmitter.
pub fn first_layer_core(trace: &ForwardTrace, model: &EnnModel, error: f64) -> Array1<f64> {
    let (s2, s1) = slopes(trace, model);
    let scale = PI * PI / 4.0 * error * s2;
    Array1::from_shape_fn(model.config().hidden, |k| scale * model.a2[k + 1] * s1[k])
}

/// Update direction for `A1` with the per-entry input normalization.
pub fn grad_first_layer(trace: &ForwardTrace, model: &EnnModel, error: f64) -> FirstLayerUpdate {
    let core = first_layer_core(trace, model, error);
    expand_first_layer(&core, &trace.s0, FirstLayerNorm::Normalized)
}

/// Outer product of the per-neuron core with the input factors.
pub fn expand_first_layer(
    core: &Array1<f64>,
    s0: &Array1<f64>,
    norm: FirstLayerNorm,
) -> FirstLayerUpdate {
    let degenerate_inputs = match norm {
        FirstLayerNorm::Normalized => s0
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() < DEGENERATE_INPUT)
            .map(|(m, _)| m)
            .collect(),
        FirstLayerNorm::Gradient => Vec::new(),
    };
    let values = Array2::from_shape_fn((s0.len(), core.len()), |(m, k)| {
        norm.factor(s0[m]) * core[k]
    });
    FirstLayerUpdate {
        values,
        degenerate_inputs,
    }
}

pub fn grad_receiver_params(
    trace: &ForwardTrace,
    model: &EnnModel,
    error: f64,
) -> ReceiverGradients {
    let n = model.config().dct_size;
    let hidden = model.config().hidden;
    let half = model.config().half_coeffs;
    let (s2, _) = slopes(trace, model);

    // dL/dy_hat = -eps, dy_hat/dz2 = -(pi/2) S2
    let dz2 = error * 0.5 * PI * s2;
    let f2 = Array1::from_shape_fn(half, |p| {
        -error * dct_basis_cos_unchecked(p + 1, trace.z2, n)
    });
    let mut a2 = Array1::zeros(hidden + 1);
    a2[0] = dz2;
    for k in 0..hidden {
        a2[k + 1] = dz2 * trace.s1[k];
    }
    let f1 = Array2::from_shape_fn((half, hidden), |(q, k)| {
        dz2 * model.a2[k + 1]
            * trace.fold_signs[k].value()
            * dct_basis_cos_unchecked(q + 1, trace.z1[k], n)
    });
    ReceiverGradients { a2, f1, f2 }
}

/// All loss gradients, with the first layer scaled by `norm`.
pub fn gradients(
    trace: &ForwardTrace,
    model: &EnnModel,
    error: f64,
    norm: FirstLayerNorm,
) -> Gradients {
    let core = first_layer_core(trace, model, error);
    let first = expand_first_layer(&core, &trace.s0, norm);
    let rx = grad_receiver_params(trace, model, error);
    Gradients {
        a1: -first.values,
        a2: rx.a2,
        f1: rx.f1,
        f2: rx.f2,
    }
}

impl Gradients {
    pub fn zeros_like(model: &EnnModel) -> Self {
        Gradients {
            a1: Array2::zeros(model.a1.dim()),
            a2: Array1::zeros(model.a2.len()),
            f1: Array2::zeros(model.f1.dim()),
            f2: Array1::zeros(model.f2.len()),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a1
            .iter()
            .chain(&self.a2)
            .chain(&self.f1)
            .chain(&self.f2)
            .all(|v| v.is_finite())
    }

    fn check_shapes(&self, model: &EnnModel) -> Result<()> {
        let pairs = [
            (model.a1.len(), self.a1.len()),
            (model.a2.len(), self.a2.len()),
            (model.f1.len(), self.f1.len()),
            (model.f2.len(), self.f2.len()),
        ];
        for (expected, actual) in pairs {
            if expected != actual {
                return Err(Error::DimensionMismatch { expected, actual });
            }
        }
        Ok(())
    }
}

/// Step sizes for the linear weights and the DCT coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningRates {
    pub linear: f64,
    pub coeffs: f64,
}

impl Default for LearningRates {
    fn default() -> Self {
        LearningRates {
            linear: 1e-2,
            coeffs: 3e-3,
        }
    }
}

/// In-place `theta <- theta - mu * grad`.
pub(crate) fn apply_step(
    model: &mut EnnModel,
    grads: &Gradients,
    rates: LearningRates,
) -> Result<()> {
    grads.check_shapes(model)?;
    if !grads.is_finite() {
        return Err(Error::NonFinite("gradient"));
    }
    model.a1.scaled_add(-rates.linear, &grads.a1);
    model.a2.scaled_add(-rates.linear, &grads.a2);
    model.f1.scaled_add(-rates.coeffs, &grads.f1);
    model.f2.scaled_add(-rates.coeffs, &grads.f2);
    Ok(())
}

/// One LMS update; the input model is left untouched.
pub fn lms_step(model: &EnnModel, grads: &Gradients, rates: LearningRates) -> Result<EnnModel> {
    let mut next = model.clone();
    apply_step(&mut next, grads, rates)?;
    Ok(next)
}
