//! Gravitational and electrostatic self-interaction energies of spatially
//! superposed mass distributions, the collapse timescales they imply, and a
//! scenario runner that reports both.

pub mod collapse;
pub mod constants;
pub mod distribution;
pub mod energy;
pub mod error;
pub mod kernel;
pub mod report;
pub mod scenario;
pub mod special;
pub mod units;
pub mod vec3;

pub use error::{Error, Result};
