use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Width or height is zero, or the buffer length disagrees with them.
    BadDimensions { width: usize, height: usize, len: usize },
    /// A pixel value lies outside `[0, 1]` (or is NaN).
    OutOfRange { index: usize, value: f64 },
    /// Two inputs that must share dimensions do not.
    DimensionMismatch { expected: (usize, usize), found: (usize, usize) },
    /// A parameter violates its documented range.
    InvalidParameter { name: &'static str, value: f64, expected: &'static str },
    /// A map that must be strictly positive contains a value `<= 0`.
    NonPositive { name: &'static str, index: usize, value: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BadDimensions { width, height, len } => {
                write!(f, "bad image dimensions {width}x{height} for {len} pixels")
            }
            Error::OutOfRange { index, value } => {
                write!(f, "pixel {index} has value {value} outside [0, 1]")
            }
            Error::DimensionMismatch { expected, found } => write!(
                f,
                "dimension mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::InvalidParameter { name, value, expected } => {
                write!(f, "invalid parameter {name} = {value}, expected {expected}")
            }
            Error::NonPositive { name, index, value } => {
                write!(f, "{name} must be strictly positive, pixel {index} is {value}")
            }
        }
    }
}

impl core::error::Error for Error {}
