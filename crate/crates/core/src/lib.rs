//! Simulation core for a swarm of small differential-drive robots: biased
//! noisy kinematics, light fields and coverage, phototaxis and random-walk
//! controllers, sensor response, colour oscillators, bias estimation and the
//! Monte Carlo sweep harness.
//!
//! The crate is `no_std` with `alloc`; all floating-point math goes through
//! `libm` so results are identical across platforms.

#![no_std]

extern crate alloc;

pub mod controllers;
pub mod environment;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod kinematics;
pub mod oscillators;
pub mod rng;
pub mod sensing;
pub mod stats;

pub use error::{Error, Result};
