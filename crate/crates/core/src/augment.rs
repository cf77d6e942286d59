//! Seeded geometric and color augmentation for [`Frame4`] frames and their boxes.
//!
//! The geometric part is one affine map about the image center, composed as
//! optional horizontal flip, then scale, shear, rotation and finally translation.
//! All four planes go through the same map; the S plane is resampled, not recomputed.

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classiccv::{hsv_to_rgb, rgb_to_hsv};
use crate::frames::{Frame4, PLANES};

pub use crate::detection::DetectionBox;

/// Out-of-frame fill per plane: black color, "no ground" scale.
pub const FILL: [u8; PLANES] = [0, 0, 0, 255];

/// Boxes keeping less than this share of their transformed area after clipping are dropped.
pub const MIN_VISIBLE_FRACTION: f64 = 0.25;
/// Boxes smaller than this many square pixels after clipping are dropped.
pub const MIN_AREA_PX: f64 = 4.0;

/// Symmetric ranges for each augmentation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentationRanges {
    /// ± fraction of image width/height.
    pub translate_frac: f64,
    pub rotate_deg: f64,
    pub shear_deg: f64,
    /// ± fraction around unit scale.
    pub scale_frac: f64,
    pub hflip_prob: f64,
    pub sat_frac: f64,
    pub val_frac: f64,
}

impl Default for AugmentationRanges {
    fn default() -> Self {
        Self {
            translate_frac: 0.10,
            rotate_deg: 5.0,
            shear_deg: 2.0,
            scale_frac: 0.10,
            hflip_prob: 0.5,
            sat_frac: 0.50,
            val_frac: 0.50,
        }
    }
}

impl AugmentationRanges {
    pub fn none() -> Self {
        Self {
            translate_frac: 0.0,
            rotate_deg: 0.0,
            shear_deg: 0.0,
            scale_frac: 0.0,
            hflip_prob: 0.0,
            sat_frac: 0.0,
            val_frac: 0.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        let mags = [
            self.translate_frac,
            self.rotate_deg,
            self.shear_deg,
            self.scale_frac,
            self.sat_frac,
            self.val_frac,
        ];
        mags.iter().all(|m| *m >= 0.0 && m.is_finite())
            && (0.0..=1.0).contains(&self.hflip_prob)
            && self.scale_frac < 1.0
    }
}

/// One concrete draw from [`AugmentationRanges`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentationParams {
    /// Translation in pixels.
    pub tx: f64,
    pub ty: f64,
    /// Rotation in radians.
    pub angle: f64,
    pub shear_x: f64,
    pub shear_y: f64,
    pub scale: f64,
    pub hflip: bool,
    pub sat_mult: f64,
    pub val_mult: f64,
    pub seed: u64,
}

impl AugmentationParams {
    pub fn identity() -> Self {
        Self {
            tx: 0.0,
            ty: 0.0,
            angle: 0.0,
            shear_x: 0.0,
            shear_y: 0.0,
            scale: 1.0,
            hflip: false,
            sat_mult: 1.0,
            val_mult: 1.0,
            seed: 0,
        }
    }

    /// Forward map in edge coordinates (pixel `u` spans `[u, u + 1)`).
    pub fn affine(&self, width: u32, height: u32) -> Affine2 {
        let flip = Matrix2::new(if self.hflip { -1.0 } else { 1.0 }, 0.0, 0.0, 1.0);
        let scale = Matrix2::identity() * self.scale;
        let shear = Matrix2::new(1.0, self.shear_x.tan(), self.shear_y.tan(), 1.0);
        let (s, c) = self.angle.sin_cos();
        let rot = Matrix2::new(c, -s, s, c);
        let linear = rot * shear * scale * flip;
        let center = Vector2::new(width as f64 / 2.0, height as f64 / 2.0);
        let offset = center + Vector2::new(self.tx, self.ty) - linear * center;
        Affine2 { linear, offset }
    }
}

/// `p ↦ linear · p + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine2 {
    pub linear: Matrix2<f64>,
    pub offset: Vector2<f64>,
}

impl Affine2 {
    pub fn apply(&self, p: Vector2<f64>) -> Vector2<f64> {
        self.linear * p + self.offset
    }

    pub fn inverse(&self) -> Option<Affine2> {
        let inv = self.linear.try_inverse()?;
        Some(Affine2 { linear: inv, offset: -(inv * self.offset) })
    }
}

/// Uniform draw in `[-a, a]`; always consumes one value so the stream layout is fixed.
fn symmetric(rng: &mut ChaCha8Rng, a: f64) -> f64 {
    let u: f64 = rng.gen();
    a * (2.0 * u - 1.0)
}

/// Draws parameters for a `width × height` frame. Same seed, same parameters.
pub fn sample_params(ranges: &AugmentationRanges, seed: u64, width: u32, height: u32) -> AugmentationParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tx = symmetric(&mut rng, ranges.translate_frac) * width as f64;
    let ty = symmetric(&mut rng, ranges.translate_frac) * height as f64;
    let angle = symmetric(&mut rng, ranges.rotate_deg).to_radians();
    let shear_x = symmetric(&mut rng, ranges.shear_deg).to_radians();
    let shear_y = symmetric(&mut rng, ranges.shear_deg).to_radians();
    let scale = 1.0 + symmetric(&mut rng, ranges.scale_frac);
    let hflip = rng.gen::<f64>() < ranges.hflip_prob;
    let sat_mult = 1.0 + symmetric(&mut rng, ranges.sat_frac);
    let val_mult = 1.0 + symmetric(&mut rng, ranges.val_frac);
    AugmentationParams { tx, ty, angle, shear_x, shear_y, scale, hflip, sat_mult, val_mult, seed }
}

/// Resamples one plane through `forward` with bilinear interpolation.
pub fn warp_plane(plane: &[u8], width: u32, height: u32, forward: &Affine2, fill: u8) -> Vec<u8> {
    let (w, h) = (width as i64, height as i64);
    let Some(inverse) = forward.inverse() else {
        return vec![fill; plane.len()];
    };
    let at = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x >= w || y >= h {
            fill as f64
        } else {
            plane[(y * w + x) as usize] as f64
        }
    };
    let mut out = Vec::with_capacity(plane.len());
    for v in 0..h {
        for u in 0..w {
            let src = inverse.apply(Vector2::new(u as f64 + 0.5, v as f64 + 0.5));
            let (sx, sy) = (src.x - 0.5, src.y - 0.5);
            let (x0, y0) = (sx.floor(), sy.floor());
            let (fx, fy) = (sx - x0, sy - y0);
            let (x0, y0) = (x0 as i64, y0 as i64);
            if fx == 0.0 && fy == 0.0 {
                out.push(at(x0, y0) as u8);
                continue;
            }
            let top = at(x0, y0) * (1.0 - fx) + at(x0 + 1, y0) * fx;
            let bottom = at(x0, y0 + 1) * (1.0 - fx) + at(x0 + 1, y0 + 1) * fx;
            out.push((top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

pub fn apply_geometric(frame: &Frame4, params: &AugmentationParams) -> Frame4 {
    let forward = params.affine(frame.width(), frame.height());
    let planes: [Vec<u8>; PLANES] =
        std::array::from_fn(|i| warp_plane(frame.plane(i), frame.width(), frame.height(), &forward, FILL[i]));
    Frame4::from_planes(frame.width(), frame.height(), planes).unwrap()
}

/// Scales HSV saturation and value of the color planes; the S plane is copied unchanged.
pub fn apply_color(frame: &Frame4, params: &AugmentationParams) -> Frame4 {
    let [r, g, b, s] = frame.planes().clone();
    let (mut r2, mut g2, mut b2) = (r.clone(), g.clone(), b.clone());
    for i in 0..r.len() {
        let (h, sat, val) = rgb_to_hsv(r[i], g[i], b[i]);
        let rgb = hsv_to_rgb(h, (sat * params.sat_mult).clamp(0.0, 1.0), (val * params.val_mult).clamp(0.0, 1.0));
        r2[i] = rgb[0];
        g2[i] = rgb[1];
        b2[i] = rgb[2];
    }
    Frame4::from_planes(frame.width(), frame.height(), [r2, g2, b2, s]).unwrap()
}

/// Maps boxes through the geometric part of `params`, keeping the clipped axis-aligned hull.
pub fn transform_boxes(boxes: &[DetectionBox], params: &AugmentationParams, width: u32, height: u32) -> Vec<DetectionBox> {
    let forward = params.affine(width, height);
    let (w, h) = (width as f64, height as f64);
    boxes
        .iter()
        .filter_map(|b| {
            let (x0, y0, x1, y1) = b.corners();
            let corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
                .map(|(x, y)| forward.apply(Vector2::new(x * w, y * h)));
            let min_x = corners.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
            let max_x = corners.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
            let min_y = corners.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
            let max_y = corners.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
            let full = (max_x - min_x) * (max_y - min_y);
            let (cx0, cx1) = (min_x.clamp(0.0, w), max_x.clamp(0.0, w));
            let (cy0, cy1) = (min_y.clamp(0.0, h), max_y.clamp(0.0, h));
            let clipped = (cx1 - cx0) * (cy1 - cy0);
            if !(clipped >= MIN_AREA_PX) || clipped < MIN_VISIBLE_FRACTION * full {
                return None;
            }
            DetectionBox::from_corners(b.class_id, cx0 / w, cy0 / h, cx1 / w, cy1 / h, b.confidence).ok()
        })
        .collect()
}

/// Samples parameters from `seed`, then applies geometry, color and box transforms.
pub fn augment(
    frame: &Frame4,
    boxes: &[DetectionBox],
    ranges: &AugmentationRanges,
    seed: u64,
) -> (Frame4, Vec<DetectionBox>, AugmentationParams) {
    let params = sample_params(ranges, seed, frame.width(), frame.height());
    let warped = apply_color(&apply_geometric(frame, &params), &params);
    let moved = transform_boxes(boxes, &params, frame.width(), frame.height());
    (warped, moved, params)
}
