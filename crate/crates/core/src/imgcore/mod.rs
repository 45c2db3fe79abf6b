//! Raster types, preprocessing filters and pyramid downsampling.
//!
//! All pixel math is floating point; 8-bit data only appears at the file
//! boundary (see [`pnm`]).

mod filter;
mod image;
pub mod pnm;

pub use filter::{convolve3x3, downsample2x, gaussian3x3, laplacian, GAUSSIAN_3X3, LAPLACIAN_4};
pub use image::{to_grayscale, ColorImage, GrayImage};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },
    #[error("buffer length {len} does not match {width}x{height}x{channels}")]
    BufferLength {
        len: usize,
        width: usize,
        height: usize,
        channels: usize,
    },
    #[error("image {width}x{height} is too small, need at least {min}x{min}")]
    TooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("image sizes differ: {0}x{1} vs {2}x{3}")]
    SizeMismatch(usize, usize, usize, usize),
    #[error("malformed netpbm data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
