//! 8-bit PNG/JPEG ⇄ normalized float images.
//!
//! Bytes map linearly to `[0, 1]` (`v / 255`); no gamma transform is applied.

use std::path::{Path, PathBuf};

use dehaze_core::{GrayMap, RgbImage};
use image::{ImageBuffer, ImageError, ImageReader, Luma, Rgb};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot decode {path}: {source}")]
    Decode { path: PathBuf, source: ImageError },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: ImageError },
    #[error("{path}: {source}")]
    Image { path: PathBuf, source: dehaze_core::Error },
}

#[inline]
pub fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

#[inline]
pub fn from_byte(b: u8) -> f64 {
    f64::from(b) / 255.0
}

fn decode(path: &Path) -> Result<image::DynamicImage, IoError> {
    let reader = ImageReader::open(path).map_err(|source| IoError::Read { path: path.to_owned(), source })?;
    let reader = reader
        .with_guessed_format()
        .map_err(|source| IoError::Read { path: path.to_owned(), source })?;
    reader.decode().map_err(|source| IoError::Decode { path: path.to_owned(), source })
}

pub fn load_image(path: &Path) -> Result<RgbImage, IoError> {
    let rgb = decode(path)?.into_rgb8();
    let (w, h) = rgb.dimensions();
    let data = rgb.pixels().map(|p| p.0.map(from_byte)).collect();
    RgbImage::new(w as usize, h as usize, data).map_err(|source| IoError::Image { path: path.to_owned(), source })
}

/// Loads any image as a single channel in `[0, 1]` (luma of colour inputs).
pub fn load_gray(path: &Path) -> Result<GrayMap, IoError> {
    let luma = decode(path)?.into_luma8();
    let (w, h) = luma.dimensions();
    let data = luma.pixels().map(|p| from_byte(p.0[0])).collect();
    GrayMap::new(w as usize, h as usize, data).map_err(|source| IoError::Image { path: path.to_owned(), source })
}

pub fn save_image(img: &RgbImage, path: &Path) -> Result<(), IoError> {
    let bytes: Vec<u8> = img.pixels().iter().flat_map(|p| p.map(to_byte)).collect();
    let buf: ImageBuffer<Rgb<u8>, _> =
        ImageBuffer::from_raw(img.width() as u32, img.height() as u32, bytes).expect("buffer sized from image");
    buf.save(path).map_err(|source| IoError::Write { path: path.to_owned(), source })
}

/// Writes a map as 8-bit grayscale, `[0, 1]` mapped linearly with no stretching.
pub fn save_gray(map: &GrayMap, path: &Path) -> Result<(), IoError> {
    let bytes: Vec<u8> = map.values().iter().map(|&v| to_byte(v)).collect();
    let buf: ImageBuffer<Luma<u8>, _> =
        ImageBuffer::from_raw(map.width() as u32, map.height() as u32, bytes).expect("buffer sized from map");
    buf.save(path).map_err(|source| IoError::Write { path: path.to_owned(), source })
}

pub fn is_image_path(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
        .unwrap_or(false)
}
