//! Deterministic flat-shaded field scenes: ray-cast images with exact boxes, per-pixel entity
//! labels and the dense scale map.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classiccv::{BinaryMask, OBSTACLE_CLASS};
use crate::detection::DetectionBox;
use crate::geometry::{CameraRig, GroundPoint, Pixel};
use crate::image::RgbImage;

pub const FIELD_GREEN: [u8; 3] = [40, 140, 50];
pub const LINE_WHITE: [u8; 3] = [255, 255, 255];
pub const BACKGROUND: [u8; 3] = [90, 90, 100];
pub const OBSTACLE_DARK: [u8; 3] = [25, 25, 30];
pub const DEFAULT_LINE_WIDTH_M: f64 = 0.05;
pub const CENTER_CIRCLE_RADIUS_M: f64 = 0.75;
const CIRCLE_SEGMENTS: usize = 48;
const RIM_SAMPLES: usize = 720;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("no part of the field is visible")]
    NothingVisible,
    #[error("invalid scene: {0}")]
    InvalidScene(String),
}

/// Painted ground stripe between two points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSegment {
    pub a: GroundPoint,
    pub b: GroundPoint,
    pub width_m: f64,
}

impl LineSegment {
    pub fn new(a: GroundPoint, b: GroundPoint, width_m: f64) -> Self {
        Self { a, b, width_m }
    }

    pub fn distance_to(&self, p: GroundPoint) -> f64 {
        let (dx, dy) = (self.b.x - self.a.x, self.b.y - self.a.y);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 {
            (((p.x - self.a.x) * dx + (p.y - self.a.y) * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        p.distance_to(&GroundPoint::new(self.a.x + t * dx, self.a.y + t * dy))
    }

    pub fn covers(&self, p: GroundPoint) -> bool {
        self.distance_to(p) <= self.width_m / 2.0
    }
}

/// Upright solid cylinder standing on the ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub center: GroundPoint,
    pub radius_m: f64,
    pub height_m: f64,
    pub color: [u8; 3],
    pub class_id: u32,
}

impl Cylinder {
    pub fn new(center: GroundPoint, radius_m: f64, height_m: f64) -> Self {
        Self { center, radius_m, height_m, color: OBSTACLE_DARK, class_id: OBSTACLE_CLASS }
    }

    /// Nearest ray parameter `t > 0` at which `origin + t·dir` enters the cylinder.
    pub fn intersect(&self, origin: Vector3<f64>, dir: Vector3<f64>) -> Option<f64> {
        let (ox, oy) = (origin.x - self.center.x, origin.y - self.center.y);
        let r2 = self.radius_m * self.radius_m;
        let mut best: Option<f64> = None;
        let mut consider = |t: f64| {
            if t > 0.0 && best.is_none_or(|b| t < b) {
                best = Some(t);
            }
        };
        let a = dir.x * dir.x + dir.y * dir.y;
        if a > 1e-15 {
            let b = ox * dir.x + oy * dir.y;
            let c = ox * ox + oy * oy - r2;
            let disc = b * b - a * c;
            if disc >= 0.0 {
                let t = (-b - disc.sqrt()) / a;
                let z = origin.z + t * dir.z;
                if (0.0..=self.height_m).contains(&z) {
                    consider(t);
                }
            }
        }
        if dir.z.abs() > 1e-15 {
            let t = (self.height_m - origin.z) / dir.z;
            let (x, y) = (ox + t * dir.x, oy + t * dir.y);
            if x * x + y * y <= r2 {
                consider(t);
            }
        }
        best
    }

    /// Points on the bottom and top rims.
    fn rim_points(&self) -> impl Iterator<Item = Vector3<f64>> + '_ {
        (0..RIM_SAMPLES).flat_map(move |k| {
            let a = std::f64::consts::TAU * k as f64 / RIM_SAMPLES as f64;
            let (x, y) = (self.center.x + self.radius_m * a.cos(), self.center.y + self.radius_m * a.sin());
            [Vector3::new(x, y, 0.0), Vector3::new(x, y, self.height_m)]
        })
    }
}

/// What a pixel shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity {
    /// Above the horizon or inside its guard band.
    Background,
    Field,
    Line(usize),
    Obstacle(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub rig: CameraRig,
    /// Extent along world `x`.
    pub field_length_m: f64,
    /// Extent along world `y`.
    pub field_width_m: f64,
    /// Field center relative to the point beneath the camera.
    pub field_center: GroundPoint,
    pub lines: Vec<LineSegment>,
    pub obstacles: Vec<Cylinder>,
    pub field_color: [u8; 3],
    pub line_color: [u8; 3],
    pub background_color: [u8; 3],
}

impl SceneSpec {
    /// Bare 6×9 m carpet centered under the camera.
    pub fn empty(rig: CameraRig) -> Self {
        Self {
            rig,
            field_length_m: 9.0,
            field_width_m: 6.0,
            field_center: GroundPoint::default(),
            lines: Vec::new(),
            obstacles: Vec::new(),
            field_color: FIELD_GREEN,
            line_color: LINE_WHITE,
            background_color: BACKGROUND,
        }
    }

    /// Boundary, halfway line and center circle of a 6×9 m field.
    pub fn standard_field(rig: CameraRig, field_center: GroundPoint) -> Self {
        let mut spec = Self { field_center, ..Self::empty(rig) };
        let (hx, hy) = (spec.field_length_m / 2.0, spec.field_width_m / 2.0);
        let c = field_center;
        let p = |x: f64, y: f64| GroundPoint::new(c.x + x, c.y + y);
        let w = DEFAULT_LINE_WIDTH_M;
        let corners = [p(-hx, -hy), p(hx, -hy), p(hx, hy), p(-hx, hy)];
        for k in 0..4 {
            spec.lines.push(LineSegment::new(corners[k], corners[(k + 1) % 4], w));
        }
        spec.lines.push(LineSegment::new(p(0.0, -hy), p(0.0, hy), w));
        for k in 0..CIRCLE_SEGMENTS {
            let a0 = std::f64::consts::TAU * k as f64 / CIRCLE_SEGMENTS as f64;
            let a1 = std::f64::consts::TAU * (k + 1) as f64 / CIRCLE_SEGMENTS as f64;
            let r = CENTER_CIRCLE_RADIUS_M;
            spec.lines.push(LineSegment::new(p(r * a0.cos(), r * a0.sin()), p(r * a1.cos(), r * a1.sin()), w));
        }
        spec
    }

    pub fn on_field(&self, p: GroundPoint) -> bool {
        (p.x - self.field_center.x).abs() <= self.field_length_m / 2.0
            && (p.y - self.field_center.y).abs() <= self.field_width_m / 2.0
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidScene(m));
        if !(self.field_length_m > 0.0 && self.field_width_m > 0.0) {
            return bad("field dimensions must be positive".into());
        }
        for (i, l) in self.lines.iter().enumerate() {
            if !(l.width_m > 0.0) {
                return bad(format!("line {i} width must be positive"));
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(o.radius_m > 0.0 && o.height_m > 0.0) {
                return bad(format!("obstacle {i} radius and height must be positive"));
            }
            if !self.on_field(o.center) {
                return bad(format!("obstacle {i} is off the field"));
            }
            if o.center.distance_to(&GroundPoint::default()) <= o.radius_m {
                return bad(format!("obstacle {i} contains the camera"));
            }
        }
        Ok(())
    }

    /// Adds `count` obstacles at ground points seen through random pixels of the lower half of
    /// the image, each fully on the field and clear of the others.
    pub fn scatter_obstacles(&mut self, count: usize, radius_m: f64, height_m: f64, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, h) = (self.rig.width() as f64, self.rig.height() as f64);
        let mut placed = 0;
        for _ in 0..count * 200 {
            if placed == count {
                break;
            }
            let px = Pixel::new(rng.gen_range(0.0..w - 1.0), rng.gen_range(h / 2.0..h - 1.0));
            let Ok(g) = self.rig.pixel_to_ground(px) else { continue };
            let fits = (g.x - self.field_center.x).abs() + radius_m <= self.field_length_m / 2.0
                && (g.y - self.field_center.y).abs() + radius_m <= self.field_width_m / 2.0
                && g.distance_to(&GroundPoint::default()) > 2.0 * radius_m
                && self.obstacles.iter().all(|o| o.center.distance_to(&g) > o.radius_m + radius_m + 0.1);
            if fits {
                self.obstacles.push(Cylinder::new(g, radius_m, height_m));
                placed += 1;
            }
        }
    }

    /// What the ray through `px` hits first.
    pub fn entity_at(&self, px: Pixel) -> Entity {
        let origin = self.rig.center();
        let dir = self.rig.pixel_to_ray(px);
        let hit = self
            .obstacles
            .iter()
            .enumerate()
            .filter_map(|(i, o)| o.intersect(origin, dir).map(|t| (i, t)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((i, _)) = hit {
            return Entity::Obstacle(i);
        }
        match self.rig.pixel_to_ground(px) {
            Ok(g) => match self.lines.iter().position(|l| l.covers(g)) {
                Some(i) => Entity::Line(i),
                None => Entity::Field,
            },
            Err(_) => Entity::Background,
        }
    }

    pub fn color_of(&self, e: Entity) -> [u8; 3] {
        match e {
            Entity::Background => self.background_color,
            Entity::Field => self.field_color,
            Entity::Line(_) => self.line_color,
            Entity::Obstacle(i) => self.obstacles[i].color,
        }
    }

    /// Bounding box of the obstacle's projection, clipped to the image; `None` when it misses
    /// the image or crosses behind the camera.
    pub fn obstacle_box(&self, i: usize) -> Option<DetectionBox> {
        let o = &self.obstacles[i];
        let (mut u0, mut v0, mut u1, mut v1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in o.rim_points() {
            let px = self.rig.world_to_pixel(p).ok()?;
            u0 = u0.min(px.x);
            v0 = v0.min(px.y);
            u1 = u1.max(px.x);
            v1 = v1.max(px.y);
        }
        let (w, h) = (self.rig.width() as f64, self.rig.height() as f64);
        let x0 = ((u0 + 0.5) / w).clamp(0.0, 1.0);
        let x1 = ((u1 + 0.5) / w).clamp(0.0, 1.0);
        let y0 = ((v0 + 0.5) / h).clamp(0.0, 1.0);
        let y1 = ((v1 + 0.5) / h).clamp(0.0, 1.0);
        DetectionBox::from_corners(o.class_id, x0, y0, x1, y1, 1.0).ok()
    }
}

/// Everything one render produces.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub image: RgbImage,
    /// Ground-truth boxes of the visible obstacles, in obstacle order.
    pub boxes: Vec<DetectionBox>,
    /// Obstacle index of each entry of `boxes`.
    pub box_obstacles: Vec<usize>,
    /// Row-major entity label per pixel.
    pub entities: Vec<Entity>,
    /// Row-major exact scale per pixel; `None` where there is no ground.
    pub scale: Vec<Option<f64>>,
}

impl Rendered {
    pub fn coverage(&self, mut pred: impl FnMut(Entity) -> bool) -> BinaryMask {
        BinaryMask::from_bits(self.image.width(), self.image.height(), self.entities.iter().map(|&e| pred(e)).collect())
            .expect("one entity per pixel")
    }

    pub fn entity(&self, x: u32, y: u32) -> Entity {
        self.entities[y as usize * self.image.width() as usize + x as usize]
    }
}

pub fn render(spec: &SceneSpec) -> Result<Rendered, SynthError> {
    spec.validate()?;
    let (w, h) = (spec.rig.width(), spec.rig.height());
    let mut image = RgbImage::new(w, h);
    let mut entities = Vec::with_capacity(w as usize * h as usize);
    let mut scale = Vec::with_capacity(w as usize * h as usize);
    for y in 0..h {
        for x in 0..w {
            let px = Pixel::new(x as f64, y as f64);
            let e = spec.entity_at(px);
            image.put(x, y, spec.color_of(e));
            entities.push(e);
            scale.push(spec.rig.scale_at_pixel(px).ok());
        }
    }
    if !entities.iter().any(|e| matches!(e, Entity::Field | Entity::Line(_))) {
        return Err(SynthError::NothingVisible);
    }
    let (box_obstacles, boxes) = (0..spec.obstacles.len())
        .filter_map(|i| spec.obstacle_box(i).map(|b| (i, b)))
        .unzip();
    Ok(Rendered { image, boxes, box_obstacles, entities, scale })
}
