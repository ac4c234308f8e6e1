//! Safety monitoring for speed-and-separation human-robot collaboration,
//! extended with a haptic potential field, plus a deterministic simulation
//! harness for the reaction-time and collaborative-assembly protocols.
//!
//! Layout:
//! - [`geometry`]: convex proximity kernels (hull distance, offset-hull
//!   membership, TCP-hand distance).
//! - [`field`]: the scalar pipeline from instantaneous velocities to the
//!   haptic activation distance.
//! - [`monitor`]: the per-sample zone state machine with edge-triggered
//!   haptic/stop events and the stop latch.
//! - [`sim`]: fixed-timestep scenario engine with scripted robot and
//!   reactive hand agents; the two experimental protocols.
//! - [`metrics`]: trial statistics, one-way ANOVA, improvement ratios.
//! - [`io`]: scenario configs, line-delimited trace files, replay,
//!   reports, and SVG plots.

pub mod error;
pub mod field;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod monitor;
pub mod sim;

pub use error::{Error, Result};
