//! P300 brain-computer interface driving a simulated two-link planar arm.
//!
//! EEG recordings are conditioned, averaged per stimulus, reduced to
//! EMD/Hilbert and wavelet features, classified as target or non-target,
//! and the winning stimulus becomes a step command for a computed-torque
//! arm controller.

pub mod arm;
pub mod classify;
pub mod decoder;
pub mod eeg_io;
pub mod error;
pub mod features;
pub mod pipeline;
pub mod preprocess;

pub use crate::error::{Error, ErrorKind, Result};
