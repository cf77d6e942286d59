//! Normalized axis-aligned boxes shared by ground truth, predictions and obstacle output.

/// Slack for boxes that touch the unit square after decimal rounding.
pub const BOX_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoxError {
    #[error("box size must be positive (w={w}, h={h})")]
    EmptyBox { w: f64, h: f64 },
    #[error("box extends outside the unit square: [{x0}, {x1}] x [{y0}, {y1}]")]
    OutsideUnitSquare { x0: f64, x1: f64, y0: f64, y1: f64 },
    #[error("confidence {0} outside [0, 1]")]
    BadConfidence(f64),
}

/// Class id plus a center/size box in image-normalized coordinates.
///
/// Normalized `x` maps pixel column `u` (center convention) to `(u + 0.5) / width`, so a box
/// covering pixel columns `a..=b` spans `[a / width, (b + 1) / width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionBox {
    pub class_id: u32,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    /// 1.0 for ground truth.
    pub confidence: f64,
}

impl DetectionBox {
    pub fn new(class_id: u32, cx: f64, cy: f64, w: f64, h: f64, confidence: f64) -> Result<Self, BoxError> {
        let b = Self { class_id, cx, cy, w, h, confidence };
        b.validate()?;
        Ok(b)
    }

    pub fn ground_truth(class_id: u32, cx: f64, cy: f64, w: f64, h: f64) -> Result<Self, BoxError> {
        Self::new(class_id, cx, cy, w, h, 1.0)
    }

    /// Builds a box from normalized corner coordinates.
    pub fn from_corners(class_id: u32, x0: f64, y0: f64, x1: f64, y1: f64, confidence: f64) -> Result<Self, BoxError> {
        Self::new(class_id, (x0 + x1) / 2.0, (y0 + y1) / 2.0, x1 - x0, y1 - y0, confidence)
    }

    /// Box covering the inclusive pixel range `[x0, x1] × [y0, y1]` of a `width × height` image.
    pub fn from_pixel_bounds(class_id: u32, (x0, y0, x1, y1): (u32, u32, u32, u32), width: u32, height: u32, confidence: f64) -> Result<Self, BoxError> {
        let (w, h) = (width as f64, height as f64);
        Self::from_corners(
            class_id,
            x0 as f64 / w,
            y0 as f64 / h,
            (x1 + 1) as f64 / w,
            (y1 + 1) as f64 / h,
            confidence,
        )
    }

    pub fn validate(&self) -> Result<(), BoxError> {
        if !(self.w > 0.0 && self.h > 0.0) {
            return Err(BoxError::EmptyBox { w: self.w, h: self.h });
        }
        let (x0, y0, x1, y1) = self.corners();
        let inside = |a: f64, b: f64| a >= -BOX_EPS && b <= 1.0 + BOX_EPS;
        if !(inside(x0, x1) && inside(y0, y1)) {
            return Err(BoxError::OutsideUnitSquare { x0, x1, y0, y1 });
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(BoxError::BadConfidence(self.confidence));
        }
        Ok(())
    }

    /// `(x0, y0, x1, y1)` in normalized coordinates.
    pub fn corners(&self) -> (f64, f64, f64, f64) {
        (
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        )
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }
}
