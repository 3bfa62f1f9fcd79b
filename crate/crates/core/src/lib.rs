//! Storage-latency analysis of the 3x3 cache-aided MIMO interference
//! network.
//!
//! Each transmitter has M antennas and a cache of normalized size mu_T,
//! each receiver N antennas and a cache of size mu_R. The toolkit computes
//! the achievable normalized delivery time by exact memory-sharing linear
//! programming, evaluates the matching closed forms, bounds the optimum from
//! below, emulates bit-exact cache placement with coded delivery, and
//! numerically certifies the linear interference-management schemes behind
//! the per-user DoF table.

pub mod bounds;
pub mod closed_form;
pub mod dof;
mod error;
pub mod general;
pub mod golden;
pub mod model;
pub mod ndt;
pub mod placement;
pub mod rat;
pub mod report;
pub mod schemes;
pub mod simplex;

pub use error::{Error, Result};
pub use model::{
    legitimate_points, AntennaConfig, CachePoint, GapValue, IntegerPoint, MemorySharing,
    NdtReport,
};
pub use rat::Rat;
