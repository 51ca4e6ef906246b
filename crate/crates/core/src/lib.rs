//! Exact verification of Cuntz-Nica-Pimsner covariance for finite product
//! systems over quasi-lattice ordered monoids.

pub mod boundary;
pub mod covariance;
pub mod error;
pub mod hilbmod;
pub mod kgraph;
pub mod linalg;
pub mod par;
pub mod psys;
pub mod qlo;
pub mod random;
pub mod scalar;

pub use error::{Error, Result};
