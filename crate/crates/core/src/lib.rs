//! Pitchfork-coupled network dynamics: stationary states, their stability
//! via effective resistances, exact solutions on equitable partitions and
//! basins of attraction on trees.

pub mod basins;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod stability;
pub mod stationary;
pub mod sweep;

pub use dynamics::{integrate, IntegratorOptions, Method, StateVector, SystemParams, Trajectory};
pub use error::{Error, Result};
pub use graph::{generators, Graph};
pub use stability::{StabilityReport, Verdict};
pub use stationary::{DetailedBalanceState, LinkAssignment};
