// Validation sites use `!(x > 0.0)` on purpose: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Desk-scale simulator of a digital optical neural network accelerator.
//!
//! Electronic multipliers do the math; optical links distribute the bits.
//! This crate models the pieces needed to evaluate that trade: closed-form
//! interconnect energy ([`energy`]), the noisy optical bit channel
//! ([`channel`]), analytic bit-error rates ([`ber`]), the output-stationary
//! bit-serial GEMM dataflow ([`dataflow`]), 8-bit affine quantization
//! ([`quant`]), and a small fully-connected network trained on MNIST and run
//! through the simulated hardware ([`network`]).

pub mod ber;
pub mod channel;
pub mod dataflow;
pub mod energy;
pub mod error;
pub mod frame;
pub mod matrix;
pub mod mnist;
pub mod network;
pub mod numeric;
pub mod quant;
pub mod report;

pub use ber::BerConfig;
pub use channel::{BerStats, Channel, ChannelConfig};
pub use dataflow::{EnergyTally, GemmResult, SimMode};
pub use energy::{EnergyConfig, Scenario};
pub use error::{Error, Result};
pub use frame::{Axis, AxisSet, BitGrid, Frame};
pub use matrix::Matrix;
pub use mnist::MnistSet;
pub use network::{Arch, FcnnModel, TrainConfig};
pub use quant::{QuantParams, QuantTensor};
pub use report::RunReport;
