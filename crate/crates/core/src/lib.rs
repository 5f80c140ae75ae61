//! Capacity analysis for long-range free-space MIMO links between clusters
//! of simple antennas.

pub mod achievability;
pub mod capacity;
pub mod channel;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod linkbudget;
pub mod moments;
pub mod montecarlo;
pub mod numerics;
pub mod prolate;
pub mod report;
pub mod scenario;
pub mod seed;

pub use error::{Error, Result};
