use std::io::Write;
use std::path::Path;

use super::{Result, SceneError};

/// Hit-id value of pixels whose primary ray missed.
pub const NO_HIT: u32 = u32::MAX;

/// 8-bit RGB image with the primary-hit triangle id of every pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub rgb: Vec<[u8; 3]>,
    pub hit_ids: Vec<u32>,
}

impl Image {
    pub fn new(width: u32, height: u32) -> Self {
        let n = (width * height) as usize;
        Self { width, height, rgb: vec![[0; 3]; n], hit_ids: vec![NO_HIT; n] }
    }

    pub fn index(&self, x: u32, y: u32) -> usize {
        (y * self.width + x) as usize
    }

    /// Binary PPM (P6).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.rgb.iter().flatten());
        out
    }
}

pub fn write_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(&img.to_ppm())?;
    f.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffStats {
    pub pixels: usize,
    pub hit_mismatches: usize,
    pub hit_mismatch_fraction: f64,
    /// Mean absolute channel difference, 0 (equal) to 1 (black vs white).
    pub mean_abs_color_diff: f64,
}

pub fn image_diff(a: &Image, b: &Image) -> Result<DiffStats> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(SceneError::SizeMismatch((a.width, a.height), (b.width, b.height)));
    }
    let pixels = a.rgb.len();
    let hit_mismatches = a.hit_ids.iter().zip(&b.hit_ids).filter(|(x, y)| x != y).count();
    let color: u64 = a.rgb.iter().flatten().zip(b.rgb.iter().flatten()).map(|(&x, &y)| u64::from(x.abs_diff(y))).sum();
    let denom = pixels.max(1) as f64;
    Ok(DiffStats {
        pixels,
        hit_mismatches,
        hit_mismatch_fraction: hit_mismatches as f64 / denom,
        mean_abs_color_diff: color as f64 / (denom * 3.0 * 255.0),
    })
}
