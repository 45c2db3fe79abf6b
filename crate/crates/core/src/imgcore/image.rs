use serde::{Deserialize, Serialize};

use super::ImageError;
use crate::scalar::Scalar;

/// Single-channel floating-point raster stored row-major.
///
/// Values are nominally brightness in `[0, 255]`, but filter outputs such as
/// the Laplacian are kept signed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrayImage<T = f64> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Scalar> GrayImage<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyImage { width, height });
        }
        if data.len() != width * height {
            return Err(ImageError::BufferLength {
                len: data.len(),
                width,
                height,
                channels: 1,
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Panics on zero dimensions.
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("non-empty image")
    }

    /// Panics on zero dimensions.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data).expect("non-empty image")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.data[y * self.width + x] = v;
    }

    /// Pixel read with replicate-border semantics for out-of-range indices.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> T {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.data[yc * self.width + xc]
    }

    /// Bilinear read at a fractional position, replicating the border.
    pub fn sample_bilinear(&self, x: T, y: T) -> T {
        let x0f = x.floor();
        let y0f = y.floor();
        let ax = x - x0f;
        let ay = y - y0f;
        let x0 = x0f.to_isize().unwrap_or(0);
        let y0 = y0f.to_isize().unwrap_or(0);
        let one = T::one();
        let p00 = self.get_clamped(x0, y0);
        let p10 = self.get_clamped(x0 + 1, y0);
        let p01 = self.get_clamped(x0, y0 + 1);
        let p11 = self.get_clamped(x0 + 1, y0 + 1);
        (one - ay) * ((one - ax) * p00 + ax * p10) + ay * ((one - ax) * p01 + ax * p11)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn mean(&self) -> T {
        self.data.iter().copied().sum::<T>() / T::from_usize_lossy(self.data.len())
    }

    /// Lifts 8-bit samples into the float domain without rescaling.
    pub fn from_u8(width: usize, height: usize, data: &[u8]) -> Result<Self, ImageError> {
        Self::new(
            width,
            height,
            data.iter().map(|&v| T::lit(f64::from(v))).collect(),
        )
    }

    /// Clamps to `[0, 255]` and rounds half-up.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|&v| {
                let v = v.as_f64();
                if v.is_nan() {
                    0
                } else {
                    (v.clamp(0.0, 255.0) + 0.5).floor().min(255.0) as u8
                }
            })
            .collect()
    }

    pub fn cast<U: Scalar>(&self) -> GrayImage<U> {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| U::lit(v.as_f64())).collect(),
        }
    }
}

/// 8-bit RGB raster, row-major interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl ColorImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyImage { width, height });
        }
        if data.len() != 3 * width * height {
            return Err(ImageError::BufferLength {
                len: data.len(),
                width,
                height,
                channels: 3,
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let data = rgb.iter().copied().cycle().take(3 * width * height).collect();
        Self::new(width, height, data).expect("non-empty image")
    }

    /// Replicates a gray raster into three equal channels.
    pub fn from_gray<T: Scalar>(img: &GrayImage<T>) -> Self {
        let data = img.to_u8().into_iter().flat_map(|v| [v, v, v]).collect();
        Self::new(img.width(), img.height(), data).expect("dims checked by GrayImage")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = 3 * (y * self.width + x);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }
}

/// BT.601 luma.
pub fn to_grayscale<T: Scalar>(img: &ColorImage) -> GrayImage<T> {
    let (wr, wg, wb) = (T::lit(0.299), T::lit(0.587), T::lit(0.114));
    let data = img
        .data
        .chunks_exact(3)
        .map(|px| {
            wr * T::lit(f64::from(px[0])) + wg * T::lit(f64::from(px[1])) + wb * T::lit(f64::from(px[2]))
        })
        .collect();
    GrayImage::new(img.width, img.height, data).expect("dims checked by ColorImage")
}
