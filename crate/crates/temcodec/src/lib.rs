//! Time-encoding codec and experiment workbench.
//!
//! Bandlimited test signals are encoded into spike-time streams by single- or
//! multi-channel integrate-and-fire time encoders, and reconstructed either
//! by an iterative alternating-projection decoder or by closed-form
//! least-squares decoders. A sweep harness reproduces bandwidth / shift /
//! noise phase-transition experiments as CSV tables.
//!
//! All numeric code is generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); the aliases below pin the common `f64` instantiation.

// Negated comparisons like `!(x > 0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decoder;
pub mod encoder;
pub mod io;
pub mod kernels;
pub mod rng;
pub mod scalar;
pub mod signals;
pub mod sweep;

pub use scalar::{real, Real};

/// `f64` bandlimited signal.
pub type Signal64 = signals::BandlimitedSignal<f64>;
/// `f32` bandlimited signal.
pub type Signal32 = signals::BandlimitedSignal<f32>;
/// `f64` uniform grid signal.
pub type Grid64 = signals::GridSignal<f64>;
/// `f32` uniform grid signal.
pub type Grid32 = signals::GridSignal<f32>;
/// `f64` encoder parameters.
pub type TemParams64 = encoder::TemParams<f64>;
/// `f64` single-channel spike train.
pub type SpikeTrain64 = encoder::SpikeTrain<f64>;
/// `f64` multi-channel spike train.
pub type MultiSpikeTrain64 = encoder::MultiSpikeTrain<f64>;
/// `f64` merged spike stream (decoder input).
pub type SpikeStream64 = encoder::SpikeStream<f64>;
/// `f64` decode result.
pub type DecodeResult64 = decoder::DecodeResult<f64>;
