//! User-facing I/O surface: scenario configs, trace files, reports, and
//! plot emission.

pub mod config;
pub mod plot;
pub mod report;
pub mod trace;
