//! Concurrent-transmission scheduling for 60 GHz WPAN piconets.
//!
//! Nodes with eight-sector antennas share a TDMA superframe. The piconet
//! coordinator routes each flow over a load-aware shortest path, groups
//! non-interfering hops into concurrent allocations, and is compared against a
//! direct one-at-a-time baseline.
//!
//! The math is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix
//! it to `f64`, which is what the command-line tool uses.

pub mod channel;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod pathing;
pub mod scalar;
pub mod scheduling;
pub mod simkernel;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Point = geometry::Point<f64>;
pub type NodeLayout = geometry::NodeLayout<f64>;
pub type ChannelParams = channel::ChannelParams<f64>;
pub type LinkRate = channel::LinkRate<f64>;
pub type LoadTable = pathing::LoadTable<f64>;
pub type WeightedGraph = pathing::WeightedGraph<f64>;
pub type KernelParams = simkernel::KernelParams<f64>;
pub type SimConfig = simkernel::SimConfig<f64>;
pub type SimState = simkernel::SimState<f64>;
pub type RunSummary = simkernel::RunSummary<f64>;
pub type RunOutput = simkernel::RunOutput<f64>;
