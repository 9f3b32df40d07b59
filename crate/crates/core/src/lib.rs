//! Multi-frame super-resolution core.
//!
//! Implements the classical low-resolution imaging model and its building
//! blocks: decimation / zero-upsampling, backward and forward warping with
//! verified adjoints, a differentiable sub-pixel motion compensation layer
//! with analytic gradients, coarse-to-fine flow refinement, shift-and-add
//! and conjugate-gradient reconstruction, plus PSNR/SSIM metrics and a
//! synthetic ground-truth harness.
//!
//! The crate is `no_std` + `alloc`; all IO lives in `subpix-tools`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod flow;
pub mod grid;
pub mod kernel;
pub mod metrics;
pub mod ops;
pub mod reconstruct;
pub mod resample;
pub mod sample;
pub mod spmc;
pub mod synth;

mod math;

pub use error::Error;
pub use grid::{FlowField, ImageGrid, Sequence};
pub use kernel::SamplingKernel;

/// Result alias used across the crate.
pub type Result<T> = core::result::Result<T, Error>;
