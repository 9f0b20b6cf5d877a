//! Compact-model simulator for a two-MTJ stateful logic gate: device
//! physics, READ/SET circuit solution, Monte Carlo variation, gate-level
//! error and energy, design-space sweeps and calibration.

// `!(x > 0.0)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod circuit;
pub mod device;
pub mod error;
pub mod explorer;
pub mod gate;
pub mod roots;
pub mod stats;

pub use circuit::OperatingPoint;
pub use device::{Bit, DeviceInstance, DeviceParams};
pub use error::{Error, Result};
pub use gate::{GateReport, VrefPolicy};
pub use stats::RngSpec;
