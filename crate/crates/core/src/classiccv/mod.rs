//! Color/distance-transform obstacle detection on a planar green field.
//!
//! Pipeline: [`green_filter`] → [`morph_open_close`] → [`distance_transform`] (outside of the
//! image counts as green) → [`threshold_by_line_width`] → [`extract_cluster_boundaries`] →
//! [`classify_obstacles`]. [`obstacles_to_boxes`] turns the thresholded cores into boxes for
//! evaluation.

mod contours;
mod edt;
mod hsv;
mod morph;
pub mod viz;

pub use contours::{extract_cluster_boundaries, label_components, Components, Contour};
pub use edt::{distance_transform, distance_transform_with_border, Border, Degeneracy, DistanceMap};
pub use hsv::{green_filter, hsv_to_rgb, rgb_to_hsv, HsvThresholds};
pub use morph::{dilate, erode, morph_open_close};

use crate::detection::DetectionBox;
use crate::geometry::{CameraRig, GroundPoint, Pixel};
use crate::image::RgbImage;

/// Class id used for every classic-pipeline detection.
pub const OBSTACLE_CLASS: u32 = 0;

/// One bit per pixel; `true` marks an obstacle candidate (not green).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self::filled(width, height, false)
    }

    pub fn filled(width: u32, height: u32, value: bool) -> Self {
        Self { width, height, bits: vec![value; width as usize * height as usize] }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Option<Self> {
        (bits.len() == width as usize * height as usize).then_some(Self { width, height, bits })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Grows the mask by `pad` pixels on every side, filled with `value`.
    pub fn padded(&self, pad: u32, value: bool) -> Self {
        let (w, h) = (self.width + 2 * pad, self.height + 2 * pad);
        let mut out = Self::filled(w, h, value);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(x + pad, y + pad, self.get(x, y));
            }
        }
        out
    }

    pub fn crop(&self, x0: u32, y0: u32, width: u32, height: u32) -> Self {
        let mut out = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                out.set(x, y, self.get(x + x0, y + y0));
            }
        }
        out
    }
}

/// Keeps pixels whose distance to green exceeds half the widest expected marking-line
/// width at that pixel, scaled by `margin`. Pixels without ground are never kept.
pub fn threshold_by_line_width(dmap: &DistanceMap, rig: &CameraRig, line_width_m: f64, margin: f64) -> BinaryMask {
    let mut core = BinaryMask::new(dmap.width(), dmap.height());
    for y in 0..dmap.height() {
        for x in 0..dmap.width() {
            let d = dmap.get(x, y);
            if d == 0.0 {
                continue;
            }
            let Ok(expected) = rig.expected_line_width_px(Pixel::new(x as f64, y as f64), line_width_m) else {
                continue;
            };
            if d > margin * expected / 2.0 {
                core.set(x, y, true);
            }
        }
    }
    core
}

/// A boundary pixel projected to the ground and kept as an obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstaclePoint {
    pub px: (u32, u32),
    pub ground: GroundPoint,
    pub range_m: f64,
}

/// Projects contour pixels to the ground, keeping those within `max_range_m` of `query`.
pub fn classify_obstacles(contours: &[Contour], rig: &CameraRig, query: GroundPoint, max_range_m: f64) -> Vec<ObstaclePoint> {
    contours
        .iter()
        .flatten()
        .filter_map(|&(x, y)| {
            let ground = rig.pixel_to_ground(Pixel::new(x as f64, y as f64)).ok()?;
            let range_m = ground.distance_to(&query);
            (range_m <= max_range_m).then_some(ObstaclePoint { px: (x, y), ground, range_m })
        })
        .collect()
}

/// One box per 8-connected core component.
pub fn obstacles_to_boxes(core: &BinaryMask) -> Vec<DetectionBox> {
    let comps = label_components(core);
    comps
        .bounds()
        .into_iter()
        .map(|b| {
            DetectionBox::from_pixel_bounds(OBSTACLE_CLASS, b, core.width(), core.height(), 1.0)
                .expect("component bounds lie inside the image")
        })
        .collect()
}

/// Tunables of the classic pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicParams {
    pub thresholds: HsvThresholds,
    pub kernel_radius: u32,
    pub iterations: u32,
    /// Physical width of the field marking lines.
    pub line_width_m: f64,
    /// Multiplier on the expected half-width; must be at least 1.
    pub margin: f64,
    pub max_range_m: f64,
    /// Ground position ranges are measured from (the robot's next step).
    pub query: GroundPoint,
}

impl Default for ClassicParams {
    fn default() -> Self {
        Self {
            thresholds: HsvThresholds::default(),
            kernel_radius: 1,
            iterations: 1,
            line_width_m: 0.05,
            margin: 1.1,
            max_range_m: 1.0,
            query: GroundPoint::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassicError {
    #[error("image is {image_w}x{image_h} but the camera expects {rig_w}x{rig_h}")]
    DimensionMismatch { image_w: u32, image_h: u32, rig_w: u32, rig_h: u32 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Every intermediate of one pipeline run.
#[derive(Debug, Clone)]
pub struct ClassicOutput {
    pub mask: BinaryMask,
    pub cleaned: BinaryMask,
    pub distance: DistanceMap,
    pub core: BinaryMask,
    pub contours: Vec<Contour>,
    pub obstacles: Vec<ObstaclePoint>,
    pub boxes: Vec<DetectionBox>,
}

pub fn detect_classic(image: &RgbImage, rig: &CameraRig, params: &ClassicParams) -> Result<ClassicOutput, ClassicError> {
    if image.width() != rig.width() || image.height() != rig.height() {
        return Err(ClassicError::DimensionMismatch {
            image_w: image.width(),
            image_h: image.height(),
            rig_w: rig.width(),
            rig_h: rig.height(),
        });
    }
    if !(params.margin >= 1.0) {
        return Err(ClassicError::InvalidParameter("margin must be at least 1"));
    }
    if params.kernel_radius < 1 {
        return Err(ClassicError::InvalidParameter("kernel radius must be at least 1"));
    }
    if !(params.line_width_m > 0.0) || !(params.max_range_m > 0.0) {
        return Err(ClassicError::InvalidParameter("line width and range must be positive"));
    }
    if !params.thresholds.is_valid() {
        return Err(ClassicError::InvalidParameter("HSV thresholds out of range"));
    }
    let mask = green_filter(image, &params.thresholds);
    let cleaned = morph_open_close(&mask, params.kernel_radius, params.iterations);
    let distance = distance_transform_with_border(&cleaned, Border::Zero);
    let core = threshold_by_line_width(&distance, rig, params.line_width_m, params.margin);
    let contours = extract_cluster_boundaries(&core);
    let obstacles = classify_obstacles(&contours, rig, params.query, params.max_range_m);
    let boxes = obstacles_to_boxes(&core);
    Ok(ClassicOutput { mask, cleaned, distance, core, contours, obstacles, boxes })
}
