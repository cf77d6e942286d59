//! Pinhole camera with two-term radial distortion, posed over a flat ground plane.
//!
//! Coordinate frames:
//!
//! - **pixel**: `(u, v)`, `u` to the right, `v` down; the center of pixel `(i, j)` sits at `(i, j)`.
//! - **camera**: `x` right, `y` down, `z` along the optical axis.
//! - **world**: ground plane `z = 0`, `x` forward, `y` left, `z` up. The optical center sits at
//!   `(0, 0, height)`, so ground coordinates are measured from the point directly beneath it.
//!
//! Camera orientation is `Rz(yaw) · Ry(-pitch) · Rx(roll) · B`, where `B` is the fixed base
//! rotation taking the optical axis to world `+x` with the image "up" pointing to world `+z`.
//! Read right to left, roll about the optical axis is applied first, then pitch, then yaw,
//! all about fixed world axes. Negative pitch tilts the optical axis toward the ground.

use nalgebra::{Matrix2, Matrix3, Point2, Rotation3, Vector2, Vector3};

/// Continuous pixel coordinates.
pub type Pixel = Point2<f64>;

/// Default guard band below the analytic horizon, in pixels.
pub const DEFAULT_HORIZON_GUARD_PX: f64 = 2.0;

/// Finite-difference step used for the pixel→ground Jacobian.
pub const JACOBIAN_STEP_PX: f64 = 0.5;

const UNDISTORT_MAX_ITERS: usize = 20;
const UNDISTORT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("pixel ({u:.3}, {v:.3}) has no ground intersection (at or above the horizon)")]
    NoGroundIntersection { u: f64, v: f64 },
    #[error("ground point ({x:.3}, {y:.3}) projects behind the camera")]
    BehindCamera { x: f64, y: f64 },
    #[error("pixel ({u:.3}, {v:.3}) lies outside the range of the lens distortion model")]
    OutsideLensModel { u: f64, v: f64 },
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(&'static str),
    #[error("invalid pose: {0}")]
    InvalidPose(&'static str),
    #[error("line width must be positive, got {0}")]
    InvalidLineWidth(f64),
}

/// Focal lengths, principal point, image size and radial distortion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub k1: f64,
    pub k2: f64,
}

impl CameraIntrinsics {
    /// Undistorted camera with square pixels and the principal point at the image center.
    pub fn pinhole(focal_px: f64, width: u32, height: u32) -> Self {
        Self {
            fx: focal_px,
            fy: focal_px,
            cx: (width as f64 - 1.0) / 2.0,
            cy: (height as f64 - 1.0) / 2.0,
            width,
            height,
            k1: 0.0,
            k2: 0.0,
        }
    }

    pub fn with_distortion(mut self, k1: f64, k2: f64) -> Self {
        self.k1 = k1;
        self.k2 = k2;
        self
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.fx > 0.0 && self.fx.is_finite() && self.fy > 0.0 && self.fy.is_finite()) {
            return Err(GeometryError::InvalidIntrinsics("focal lengths must be positive"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(GeometryError::InvalidIntrinsics("image size must be positive"));
        }
        if ![self.cx, self.cy, self.k1, self.k2].iter().all(|v| v.is_finite()) {
            return Err(GeometryError::InvalidIntrinsics("non-finite parameter"));
        }
        Ok(())
    }

    pub fn is_distorted(&self) -> bool {
        self.k1 != 0.0 || self.k2 != 0.0
    }

    fn radial_factor(&self, r2: f64) -> f64 {
        1.0 + self.k1 * r2 + self.k2 * r2 * r2
    }

    /// Applies radial distortion to normalized image coordinates.
    pub fn distort(&self, n: Vector2<f64>) -> Vector2<f64> {
        n * self.radial_factor(n.norm_squared())
    }

    /// Radius beyond which distortion stops increasing with the undistorted radius.
    fn fold_radius(&self) -> f64 {
        // d/dr [r (1 + k1 r² + k2 r⁴)] = 1 + 3 k1 u + 5 k2 u², u = r²
        let (a, b) = (5.0 * self.k2, 3.0 * self.k1);
        let roots: Vec<f64> = if a.abs() < 1e-300 {
            if b < 0.0 { vec![-1.0 / b] } else { vec![] }
        } else {
            let disc = b * b - 4.0 * a;
            if disc < 0.0 {
                vec![]
            } else {
                vec![(-b - disc.sqrt()) / (2.0 * a), (-b + disc.sqrt()) / (2.0 * a)]
            }
        };
        roots
            .into_iter()
            .filter(|&u| u > 0.0)
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    /// Inverts [`distort`](Self::distort) by fixed-point iteration, falling back to bisection on
    /// the radius where the iteration stalls. Points outside the range of the distortion model
    /// map to NaN.
    pub fn undistort(&self, d: Vector2<f64>) -> Vector2<f64> {
        if !self.is_distorted() {
            return d;
        }
        let mut n = d;
        for _ in 0..UNDISTORT_MAX_ITERS {
            let next = d / self.radial_factor(n.norm_squared());
            let delta = (next - n).norm();
            n = next;
            if delta < UNDISTORT_TOL {
                return n;
            }
        }
        let rd = d.norm();
        let g = |r: f64| r * self.radial_factor(r * r) - rd;
        let mut hi = self.fold_radius();
        if hi.is_infinite() {
            hi = rd.max(1.0);
            while g(hi) < 0.0 && hi < 1e12 {
                hi *= 2.0;
            }
        }
        if !(g(hi) >= 0.0) {
            return Vector2::new(f64::NAN, f64::NAN);
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        d * (0.5 * (lo + hi) / rd)
    }

    /// Pixel to undistorted normalized coordinates (`z = 1` plane of the camera frame).
    pub fn pixel_to_normalized(&self, px: Pixel) -> Vector2<f64> {
        let d = Vector2::new((px.x - self.cx) / self.fx, (px.y - self.cy) / self.fy);
        self.undistort(d)
    }

    pub fn normalized_to_pixel(&self, n: Vector2<f64>) -> Pixel {
        let d = self.distort(n);
        Pixel::new(self.fx * d.x + self.cx, self.fy * d.y + self.cy)
    }

    pub fn contains(&self, px: Pixel) -> bool {
        px.x >= 0.0 && px.y >= 0.0 && px.x < self.width as f64 && px.y < self.height as f64
    }
}

/// Height of the optical center above the ground and camera inclination, in meters and radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub height: f64,
    pub pitch: f64,
    pub roll: f64,
    pub yaw: f64,
}

impl CameraPose {
    pub fn new(height: f64, pitch: f64, roll: f64, yaw: f64) -> Self {
        Self { height, pitch, roll, yaw }
    }

    /// Camera at `height` looking straight down.
    pub fn nadir(height: f64) -> Self {
        Self::new(height, -std::f64::consts::FRAC_PI_2, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(GeometryError::InvalidPose("height must be positive"));
        }
        if ![self.pitch, self.roll, self.yaw].iter().all(|v| v.is_finite()) {
            return Err(GeometryError::InvalidPose("non-finite angle"));
        }
        Ok(())
    }

    /// Rotation taking camera-frame vectors to the world frame.
    pub fn rotation(&self) -> Rotation3<f64> {
        let body = Rotation3::from_axis_angle(&Vector3::z_axis(), self.yaw)
            * Rotation3::from_axis_angle(&Vector3::y_axis(), -self.pitch)
            * Rotation3::from_axis_angle(&Vector3::x_axis(), self.roll);
        body * camera_to_body()
    }
}

/// Optical axis to world `+x`, image right to world `-y`, image down to world `-z`.
fn camera_to_body() -> Rotation3<f64> {
    #[rustfmt::skip]
    let m = Matrix3::new(
        0.0, 0.0, 1.0,
        -1.0, 0.0, 0.0,
        0.0, -1.0, 0.0,
    );
    Rotation3::from_matrix_unchecked(m)
}

/// A point on the ground plane, meters, relative to the point beneath the optical center.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroundPoint {
    pub x: f64,
    pub y: f64,
}

impl GroundPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: &GroundPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A validated camera model together with its cached orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraRig {
    intrinsics: CameraIntrinsics,
    pose: CameraPose,
    horizon_guard_px: f64,
    rotation: Matrix3<f64>,
    /// World up expressed in the camera frame.
    up_cam: Vector3<f64>,
}

impl CameraRig {
    pub fn new(intrinsics: CameraIntrinsics, pose: CameraPose) -> Result<Self, GeometryError> {
        intrinsics.validate()?;
        pose.validate()?;
        let rotation = pose.rotation().into_inner();
        let up_cam = rotation.transpose() * Vector3::z();
        Ok(Self {
            intrinsics,
            pose,
            horizon_guard_px: DEFAULT_HORIZON_GUARD_PX,
            rotation,
            up_cam,
        })
    }

    /// Sets the band below the analytic horizon that is treated as having no ground.
    pub fn with_horizon_guard(mut self, guard_px: f64) -> Self {
        self.horizon_guard_px = guard_px.max(0.0);
        self
    }

    pub fn intrinsics(&self) -> &CameraIntrinsics {
        &self.intrinsics
    }

    pub fn pose(&self) -> &CameraPose {
        &self.pose
    }

    pub fn horizon_guard_px(&self) -> f64 {
        self.horizon_guard_px
    }

    /// Camera-to-world rotation matrix.
    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn width(&self) -> u32 {
        self.intrinsics.width
    }

    pub fn height(&self) -> u32 {
        self.intrinsics.height
    }

    /// Same camera with principal point shifted by `(dx, dy)` and image grown to the given size.
    /// Describes the image after padding `dx` columns on the left and `dy` rows on top.
    pub fn padded(&self, dx: u32, dy: u32, width: u32, height: u32) -> Result<Self, GeometryError> {
        let mut k = self.intrinsics;
        k.cx += dx as f64;
        k.cy += dy as f64;
        k.width = width;
        k.height = height;
        Ok(Self::new(k, self.pose)?.with_horizon_guard(self.horizon_guard_px))
    }

    /// Unit viewing direction of `px` in the world frame.
    pub fn pixel_to_ray(&self, px: Pixel) -> Vector3<f64> {
        let n = self.intrinsics.pixel_to_normalized(px);
        (self.rotation * Vector3::new(n.x, n.y, 1.0)).normalize()
    }

    fn margin_for_normalized(&self, n: Vector2<f64>) -> f64 {
        let up = &self.up_cam;
        let elevation = up.x * n.x + up.y * n.y + up.z;
        let grad = (up.x / self.intrinsics.fx).hypot(up.y / self.intrinsics.fy);
        if grad < 1e-15 {
            return if elevation < 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        -elevation / grad
    }

    /// Signed distance of `px` below the horizon line, measured in undistorted pixels.
    ///
    /// Positive values lie below the horizon. When the horizon is at infinity (nadir view)
    /// this is `+inf`.
    pub fn horizon_margin_px(&self, px: Pixel) -> f64 {
        self.margin_for_normalized(self.intrinsics.pixel_to_normalized(px))
    }

    /// Row of the horizon in column `u`, in undistorted pixel coordinates.
    pub fn horizon_row(&self, u: f64) -> Option<f64> {
        let up = &self.up_cam;
        let k = &self.intrinsics;
        if (up.y / k.fy).abs() < 1e-15 {
            return None;
        }
        // up.x * (u - cx)/fx + up.y * (v - cy)/fy + up.z = 0
        Some(k.cy - k.fy * (up.z + up.x * (u - k.cx) / k.fx) / up.y)
    }

    pub fn pixel_to_ground(&self, px: Pixel) -> Result<GroundPoint, GeometryError> {
        let n = self.intrinsics.pixel_to_normalized(px);
        if !n.x.is_finite() || !n.y.is_finite() {
            return Err(GeometryError::OutsideLensModel { u: px.x, v: px.y });
        }
        let margin = self.margin_for_normalized(n);
        let d = self.rotation * Vector3::new(n.x, n.y, 1.0);
        if !(margin > self.horizon_guard_px) || !(d.z < 0.0) {
            return Err(GeometryError::NoGroundIntersection { u: px.x, v: px.y });
        }
        let t = self.pose.height / -d.z;
        Ok(GroundPoint::new(t * d.x, t * d.y))
    }

    pub fn ground_to_pixel(&self, gp: GroundPoint) -> Result<Pixel, GeometryError> {
        self.world_to_pixel(Vector3::new(gp.x, gp.y, 0.0))
    }

    /// Projects a world point; points at or behind the image plane fail.
    pub fn world_to_pixel(&self, p: Vector3<f64>) -> Result<Pixel, GeometryError> {
        let c = self.rotation.transpose() * (p - Vector3::new(0.0, 0.0, self.pose.height));
        if !(c.z > 1e-12) || !p.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::BehindCamera { x: p.x, y: p.y });
        }
        Ok(self
            .intrinsics
            .normalized_to_pixel(Vector2::new(c.x / c.z, c.y / c.z)))
    }

    /// Camera center in the world frame.
    pub fn center(&self) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, self.pose.height)
    }

    /// Jacobian of pixel→ground by central differences; columns are `∂g/∂u` and `∂g/∂v`.
    pub fn ground_jacobian(&self, px: Pixel) -> Result<Matrix2<f64>, GeometryError> {
        if !(self.horizon_margin_px(px) > self.horizon_guard_px) {
            return Err(GeometryError::NoGroundIntersection { u: px.x, v: px.y });
        }
        let h = JACOBIAN_STEP_PX;
        let probe = |du: f64, dv: f64| self.pixel_to_ground(Pixel::new(px.x + du, px.y + dv));
        let (right, left) = (probe(h, 0.0)?, probe(-h, 0.0)?);
        let (down, up) = (probe(0.0, h)?, probe(0.0, -h)?);
        let inv = 1.0 / (2.0 * h);
        Ok(Matrix2::new(
            (right.x - left.x) * inv,
            (down.x - up.x) * inv,
            (right.y - left.y) * inv,
            (down.y - up.y) * inv,
        ))
    }

    /// Ground meters per pixel at `px`: the square root of the Jacobian's area scale.
    pub fn scale_at_pixel(&self, px: Pixel) -> Result<f64, GeometryError> {
        Ok(self.ground_jacobian(px)?.determinant().abs().sqrt())
    }

    /// Widest on-image extent, in pixels, of a ground stripe `line_width_m` wide through `px`.
    ///
    /// The stripe appears widest when its ground normal aligns with the Jacobian's least
    /// stretched direction, so this is `line_width_m / σ_min(J)`.
    pub fn expected_line_width_px(&self, px: Pixel, line_width_m: f64) -> Result<f64, GeometryError> {
        if !(line_width_m > 0.0) {
            return Err(GeometryError::InvalidLineWidth(line_width_m));
        }
        let (_, s_min) = singular_values_2x2(&self.ground_jacobian(px)?);
        Ok(line_width_m / s_min)
    }
}

/// `(σ_max, σ_min)` of a 2×2 matrix.
pub fn singular_values_2x2(m: &Matrix2<f64>) -> (f64, f64) {
    let frob2 = m.norm_squared();
    let det = m.determinant().abs();
    let disc = (frob2 * frob2 - 4.0 * det * det).max(0.0).sqrt();
    let s_max = ((frob2 + disc) / 2.0).sqrt();
    let s_min = if s_max > 0.0 { det / s_max } else { 0.0 };
    (s_max, s_min)
}
