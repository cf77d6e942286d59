//! Coarse-grid ground scale field with dense interpolated access.
//!
//! The grid stores meters-per-pixel `S` at every `stride`-th pixel. Between nodes the map
//! interpolates bilinearly in the inverse-scale domain `q = S^(-2/3)`: for a pinhole camera over
//! a plane the Jacobian determinant of the pixel→ground homography is proportional to `w⁻³`,
//! with `w` affine in the pixel coordinates, so `q` is itself affine and bilinear weights
//! reproduce it exactly. Interpolating `S` directly would smear the steep growth near the horizon.

use crate::geometry::{CameraRig, Pixel};
use crate::image::GrayImage;

pub const DEFAULT_STRIDE: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ScaleMapError {
    #[error("stride must be at least 1, got {0}")]
    InvalidStride(u32),
    #[error("pixel ({u:.2}, {v:.2}) lies outside the {width}x{height} image")]
    OutOfBounds { u: f64, v: f64, width: u32, height: u32 },
    #[error("invalid encoding range: need 0 < s_min < s_max, got [{0}, {1}]")]
    InvalidEncoding(f64, f64),
}

/// Meters-per-pixel grid sampled every `stride` pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleMap {
    stride: u32,
    width: u32,
    height: u32,
    cols: usize,
    rows: usize,
    /// `S` per node, NaN above the horizon.
    nodes: Vec<f64>,
    /// `S^(-2/3)` per node, NaN above the horizon.
    inverse: Vec<f64>,
}

/// Evaluates `scale_at_pixel` on a `stride` grid covering the rig's image.
pub fn build_scale_map(rig: &CameraRig, stride: u32) -> Result<ScaleMap, ScaleMapError> {
    if stride < 1 {
        return Err(ScaleMapError::InvalidStride(stride));
    }
    let (width, height) = (rig.width(), rig.height());
    let cols = width.div_ceil(stride) as usize + 1;
    let rows = height.div_ceil(stride) as usize + 1;
    let mut nodes = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let px = Pixel::new((j as u32 * stride) as f64, (i as u32 * stride) as f64);
            nodes.push(rig.scale_at_pixel(px).unwrap_or(f64::NAN));
        }
    }
    let inverse = nodes.iter().map(|s| s.powf(-2.0 / 3.0)).collect();
    Ok(ScaleMap { stride, width, height, cols, rows, nodes, inverse })
}

impl ScaleMap {
    pub fn stride(&self) -> u32 {
        self.stride
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Grid shape as `(rows, cols)`.
    pub fn grid_shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Node at grid row `i`, column `j`; `None` for above-horizon nodes.
    pub fn node(&self, i: usize, j: usize) -> Option<f64> {
        let s = self.nodes[i * self.cols + j];
        (!s.is_nan()).then_some(s)
    }

    /// Interpolated scale at `px`; `Ok(None)` when any surrounding node lies above the horizon.
    pub fn sample(&self, px: Pixel) -> Result<Option<f64>, ScaleMapError> {
        if !(px.x >= 0.0 && px.y >= 0.0 && px.x < self.width as f64 && px.y < self.height as f64) {
            return Err(ScaleMapError::OutOfBounds {
                u: px.x,
                v: px.y,
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.sample_unchecked(px.x, px.y))
    }

    fn sample_unchecked(&self, u: f64, v: f64) -> Option<f64> {
        let stride = self.stride as f64;
        let (gx, gy) = (u / stride, v / stride);
        let j = (gx.floor() as usize).min(self.cols - 2);
        let i = (gy.floor() as usize).min(self.rows - 2);
        let (tx, ty) = (gx - j as f64, gy - i as f64);
        if tx == 0.0 && ty == 0.0 {
            return self.node(i, j);
        }
        let q = |ii: usize, jj: usize| self.inverse[ii * self.cols + jj];
        let top = q(i, j) * (1.0 - tx) + q(i, j + 1) * tx;
        let bottom = q(i + 1, j) * (1.0 - tx) + q(i + 1, j + 1) * tx;
        let inv = top * (1.0 - ty) + bottom * ty;
        if inv.is_nan() || !(inv > 0.0) {
            return None;
        }
        Some(1.0 / (inv * inv.sqrt()))
    }

    /// Interpolated scale at every pixel center, row-major.
    pub fn dense(&self) -> Vec<Option<f64>> {
        let mut out = Vec::with_capacity(self.width as usize * self.height as usize);
        for v in 0..self.height {
            for u in 0..self.width {
                out.push(self.sample_unchecked(u as f64, v as f64));
            }
        }
        out
    }

    /// Encodes the dense field as an 8-bit plane.
    pub fn to_channel(&self, enc: &ScaleEncoding) -> GrayImage {
        let data = self.dense().into_iter().map(|s| enc.encode(s)).collect();
        GrayImage::from_raw(self.width, self.height, data).expect("dense map matches image size")
    }
}

/// Linear 8-bit encoding of meters-per-pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleEncoding {
    pub s_min: f64,
    pub s_max: f64,
    /// Byte written for pixels without ground.
    pub sentinel_value: u8,
}

impl Default for ScaleEncoding {
    fn default() -> Self {
        Self {
            s_min: 0.001,
            s_max: 0.05,
            sentinel_value: 255,
        }
    }
}

impl ScaleEncoding {
    pub fn new(s_min: f64, s_max: f64, sentinel_value: u8) -> Result<Self, ScaleMapError> {
        let enc = Self { s_min, s_max, sentinel_value };
        enc.validate()?;
        Ok(enc)
    }

    pub fn validate(&self) -> Result<(), ScaleMapError> {
        if !(0.0 < self.s_min && self.s_min < self.s_max && self.s_max.is_finite()) {
            return Err(ScaleMapError::InvalidEncoding(self.s_min, self.s_max));
        }
        Ok(())
    }

    pub fn encode(&self, s: Option<f64>) -> u8 {
        match s {
            None => self.sentinel_value,
            Some(s) => {
                let t = (s.clamp(self.s_min, self.s_max) - self.s_min) / (self.s_max - self.s_min);
                (255.0 * t).round() as u8
            }
        }
    }

    /// Midpoint of the scale interval an encoded byte represents.
    pub fn decode(&self, byte: u8) -> f64 {
        self.s_min + (self.s_max - self.s_min) * byte as f64 / 255.0
    }
}
