//! Split learning of a DCT-activation network over a simulated chirp/FSK
//! radio link.
//!
//! The first linear layer runs at the transmitter; its outputs are
//! quantized onto the DCT grid, sent as cosine tones (optionally folded
//! into a frequency+BPSK alphabet and multiplexed on orthogonal chirps),
//! and the receiver evaluates the adaptive activations directly on the
//! demodulated indices. Gradients travel back over the same waveform.

pub mod channel;
pub mod data;
pub mod enn;
pub mod error;
pub mod phy;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
