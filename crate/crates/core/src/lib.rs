//! Random coverage of compact metric spaces.
//!
//! Two models are simulated exactly: the fixed-radius model (i.i.d. closed
//! balls of radius `r0`, cover time counted in balls) and the growth model
//! (seeds arriving as a Poisson process, each growing a ball at speed `v`).
//! Alongside the simulators sit evaluators for the concentration bounds these
//! models satisfy, a finite-set harness for the two general variance bounds,
//! the circle extreme-value asymptotics, and a config-driven experiment
//! runner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod circle_pch;
pub mod error;
pub mod experiments;
pub mod fixed_radius;
pub mod growth;
pub mod numerics;
pub mod rng;
pub mod spaces;
pub mod stats;
pub mod subset_cover;

pub use error::{CoverError, Result};
pub use rng::{Seed, Stream};
pub use spaces::{Point, SeedDistribution, Space};
