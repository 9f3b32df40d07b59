//! Command-line companion to the reconstruction library: file formats,
//! run manifests, and the randomized verification suites.

pub mod io;
pub mod manifest;
pub mod verify;

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ToolError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
    #[error("{0}")]
    Core(#[from] subpix_core::Error),
    #[error("{0}")]
    Format(String),
    #[error("missing input: {0}")]
    MissingInput(PathBuf),
}
