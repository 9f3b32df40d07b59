use core::fmt;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Two grids or flow fields that must agree in size do not.
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    /// An image dimension is not divisible by the decimation factor.
    NotDivisible {
        dim: usize,
        factor: usize,
    },
    /// A construction argument is outside its admissible range.
    InvalidArgument(&'static str),
    /// Requested grid exceeds the dense-materialization size cap.
    SizeCapExceeded {
        cap: usize,
        requested: usize,
    },
    /// A crop or window does not fit inside the image.
    OutOfBounds(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, actual } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, actual.0, actual.1
            ),
            Error::NotDivisible { dim, factor } => {
                write!(f, "dimension {dim} not divisible by factor {factor}")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::SizeCapExceeded { cap, requested } => {
                write!(f, "grid of {requested} pixels exceeds cap of {cap}")
            }
            Error::OutOfBounds(msg) => write!(f, "out of bounds: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
