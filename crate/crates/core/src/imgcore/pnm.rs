//! Binary netpbm I/O: 8-bit grayscale P5 and 8-bit RGB P6.

use std::fs;
use std::path::Path;

use super::{ColorImage, GrayImage, ImageError};
use crate::scalar::Scalar;

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header, ImageError> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(ImageError::Format("missing netpbm magic".into()));
    }
    let magic = [bytes[0], bytes[1]];
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(ImageError::Format("truncated header".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(ImageError::Format("expected a decimal header field".into()));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
        *field = text
            .parse()
            .map_err(|_| ImageError::Format(format!("header field out of range: {text}")))?;
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(ImageError::Format("missing whitespace after maxval".into())),
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(ImageError::Format(format!(
            "only 8-bit maxval 255 is supported, got {maxval}"
        )));
    }
    if width == 0 || height == 0 {
        return Err(ImageError::EmptyImage { width, height });
    }
    Ok(Header {
        magic,
        width,
        height,
        offset: pos,
    })
}

fn raster<'a>(bytes: &'a [u8], header: &Header, channels: usize) -> Result<&'a [u8], ImageError> {
    let need = header.width * header.height * channels;
    let body = &bytes[header.offset..];
    if body.len() < need {
        return Err(ImageError::Format(format!(
            "raster truncated: {} of {need} bytes",
            body.len()
        )));
    }
    Ok(&body[..need])
}

pub fn decode_pgm<T: Scalar>(bytes: &[u8]) -> Result<GrayImage<T>, ImageError> {
    let header = parse_header(bytes)?;
    if &header.magic != b"P5" {
        return Err(ImageError::Format("expected P5 magic".into()));
    }
    GrayImage::from_u8(header.width, header.height, raster(bytes, &header, 1)?)
}

pub fn decode_ppm(bytes: &[u8]) -> Result<ColorImage, ImageError> {
    let header = parse_header(bytes)?;
    if &header.magic != b"P6" {
        return Err(ImageError::Format("expected P6 magic".into()));
    }
    ColorImage::new(header.width, header.height, raster(bytes, &header, 3)?.to_vec())
}

pub fn encode_pgm<T: Scalar>(img: &GrayImage<T>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.to_u8());
    out
}

pub fn encode_ppm(img: &ColorImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn read_pgm<T: Scalar>(path: impl AsRef<Path>) -> Result<GrayImage<T>, ImageError> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm<T: Scalar>(path: impl AsRef<Path>, img: &GrayImage<T>) -> Result<(), ImageError> {
    Ok(fs::write(path, encode_pgm(img))?)
}

pub fn read_ppm(path: impl AsRef<Path>) -> Result<ColorImage, ImageError> {
    decode_ppm(&fs::read(path)?)
}

pub fn write_ppm(path: impl AsRef<Path>, img: &ColorImage) -> Result<(), ImageError> {
    Ok(fs::write(path, encode_ppm(img))?)
}

/// Decodes any PNG into 8-bit RGB.
#[cfg(feature = "png")]
pub fn read_png(path: impl AsRef<Path>) -> Result<ColorImage, ImageError> {
    let decoded = image::open(path)
        .map_err(|e| ImageError::Format(e.to_string()))?
        .to_rgb8();
    let (w, h) = decoded.dimensions();
    ColorImage::new(w as usize, h as usize, decoded.into_raw())
}
