//! Exact, desk-scale machinery for the equation x z = y^2 in finite groups:
//! group tables, measure calculus, epsilon-closed multiplicative systems,
//! almost-periodicity certifications and the density-increment pipeline.

pub mod bohr;
pub mod check;
pub mod config;
pub mod counting;
pub mod croot_sisask;
pub mod error;
pub mod increment;
pub mod group;
pub mod measures;
pub mod msys;
pub mod pipeline;
pub mod subset;

pub use config::{RunConfig, SamplerMode};
pub use error::{Error, Result};
pub use group::GroupTable;
pub use subset::Subset;
