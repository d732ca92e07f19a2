//! Library side of the `helios` binary: the acceptance driver and its
//! pinned thresholds.

pub mod published;
pub mod reproduce;
pub mod tolerances;
