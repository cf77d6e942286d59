//! Readers and writers: binary PPM/PGM, FRM1 frames, label files, rig/pipeline configs,
//! scene files and raw float dumps.
//!
//! Every decoder works on byte slices and validates sizes before allocating; the path
//! helpers wrap them. Writes go to a sibling temporary file which is then renamed.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::classiccv::{ClassicParams, HsvThresholds};
use crate::detection::DetectionBox;
use crate::frames::{Frame4, PLANES};
use crate::geometry::{CameraIntrinsics, CameraPose, CameraRig, GeometryError, GroundPoint, DEFAULT_HORIZON_GUARD_PX};
use crate::image::{GrayImage, RgbImage};
use crate::scalemap::{ScaleEncoding, DEFAULT_STRIDE};
use crate::synth::{Cylinder, LineSegment, SceneSpec, DEFAULT_LINE_WIDTH_M};

pub const FRAME_MAGIC: [u8; 4] = *b"FRM1";
const FRAME_HEADER_LEN: usize = 12;
const FLOAT_DUMP_HEADER_LEN: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated data: expected {expected} bytes, found {actual}")]
    TruncatedData { expected: usize, actual: usize },
    #[error("bad magic, expected FRM1")]
    BadMagic,
    #[error("size mismatch: header implies {expected} bytes, found {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("missing key `{0}`")]
    MissingKey(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {msg}")]
    BadUnit { key: String, msg: String },
    #[error("invalid camera: {0}")]
    InvalidRig(#[from] GeometryError),
}

/// Writes `bytes` to a temporary sibling of `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

// ---------------------------------------------------------------- netpbm

/// Cursor over a netpbm header.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, IoError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(IoError::MalformedHeader(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| IoError::MalformedHeader(format!("{what} out of range")))
    }
}

/// Parses a binary netpbm header; returns `(width, height, offset of the pixel data)`.
fn parse_netpbm(bytes: &[u8], magic: &[u8; 2]) -> Result<(u32, u32, usize), IoError> {
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(IoError::MalformedHeader(format!("expected magic {}", String::from_utf8_lossy(magic))));
    }
    let mut h = Header { bytes, pos: 2 };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval != 255 {
        return Err(IoError::MalformedHeader(format!("maxval {maxval} unsupported, need 255")));
    }
    if width == 0 || height == 0 {
        return Err(IoError::MalformedHeader("zero-sized image".into()));
    }
    match bytes.get(h.pos) {
        Some(c) if c.is_ascii_whitespace() => Ok((width, height, h.pos + 1)),
        _ => Err(IoError::MalformedHeader("missing whitespace after maxval".into())),
    }
}

fn payload(bytes: &[u8], offset: usize, width: u32, height: u32, channels: usize) -> Result<Vec<u8>, IoError> {
    let expected = (width as usize)
        .checked_mul(height as usize)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| IoError::MalformedHeader("image dimensions overflow".into()))?;
    let actual = bytes.len() - offset;
    if actual < expected {
        return Err(IoError::TruncatedData { expected, actual });
    }
    Ok(bytes[offset..offset + expected].to_vec())
}

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.as_raw());
    out
}

pub fn decode_ppm(bytes: &[u8]) -> Result<RgbImage, IoError> {
    let (w, h, off) = parse_netpbm(bytes, b"P6")?;
    let data = payload(bytes, off, w, h, 3)?;
    Ok(RgbImage::from_raw(w, h, data).expect("payload sized from header"))
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.as_raw());
    out
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage, IoError> {
    let (w, h, off) = parse_netpbm(bytes, b"P5")?;
    let data = payload(bytes, off, w, h, 1)?;
    Ok(GrayImage::from_raw(w, h, data).expect("payload sized from header"))
}

pub fn read_ppm(path: &Path) -> Result<RgbImage, IoError> {
    decode_ppm(&fs::read(path)?)
}

pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<(), IoError> {
    write_atomic(path, &encode_ppm(img))
}

pub fn read_pgm(path: &Path) -> Result<GrayImage, IoError> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<(), IoError> {
    write_atomic(path, &encode_pgm(img))
}

// ---------------------------------------------------------------- FRM1

pub fn encode_frame(frame: &Frame4) -> Vec<u8> {
    let n = frame.width() as usize * frame.height() as usize;
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + PLANES * n);
    out.extend_from_slice(&FRAME_MAGIC);
    out.extend_from_slice(&frame.width().to_le_bytes());
    out.extend_from_slice(&frame.height().to_le_bytes());
    for p in frame.planes() {
        out.extend_from_slice(p);
    }
    out
}

pub fn decode_frame(bytes: &[u8]) -> Result<Frame4, IoError> {
    if bytes.len() < 4 || bytes[..4] != FRAME_MAGIC {
        return Err(IoError::BadMagic);
    }
    if bytes.len() < FRAME_HEADER_LEN {
        return Err(IoError::SizeMismatch { expected: FRAME_HEADER_LEN, actual: bytes.len() });
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let n = width as usize * height as usize;
    let expected = n
        .checked_mul(PLANES)
        .and_then(|v| v.checked_add(FRAME_HEADER_LEN))
        .ok_or(IoError::SizeMismatch { expected: usize::MAX, actual: bytes.len() })?;
    if bytes.len() != expected {
        return Err(IoError::SizeMismatch { expected, actual: bytes.len() });
    }
    let body = &bytes[FRAME_HEADER_LEN..];
    let planes = std::array::from_fn(|i| body[i * n..(i + 1) * n].to_vec());
    Ok(Frame4::from_planes(width, height, planes).expect("planes sized from header"))
}

pub fn read_frame(path: &Path) -> Result<Frame4, IoError> {
    decode_frame(&fs::read(path)?)
}

pub fn write_frame(path: &Path, frame: &Frame4) -> Result<(), IoError> {
    write_atomic(path, &encode_frame(frame))
}

// ---------------------------------------------------------------- float dump

/// `u32` width, `u32` height, then row-major little-endian `f32`; missing values are `+inf`.
pub fn encode_float_dump(width: u32, height: u32, values: &[Option<f64>]) -> Vec<u8> {
    assert_eq!(values.len(), width as usize * height as usize, "dump size must match dimensions");
    let mut out = Vec::with_capacity(FLOAT_DUMP_HEADER_LEN + 4 * values.len());
    out.extend_from_slice(&width.to_le_bytes());
    out.extend_from_slice(&height.to_le_bytes());
    for v in values {
        let f = v.map_or(f32::INFINITY, |x| x as f32);
        out.extend_from_slice(&f.to_le_bytes());
    }
    out
}

pub fn decode_float_dump(bytes: &[u8]) -> Result<(u32, u32, Vec<f32>), IoError> {
    if bytes.len() < FLOAT_DUMP_HEADER_LEN {
        return Err(IoError::SizeMismatch { expected: FLOAT_DUMP_HEADER_LEN, actual: bytes.len() });
    }
    let width = u32::from_le_bytes(bytes[0..4].try_into().unwrap());
    let height = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let expected = (width as usize)
        .checked_mul(height as usize)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(FLOAT_DUMP_HEADER_LEN))
        .ok_or(IoError::SizeMismatch { expected: usize::MAX, actual: bytes.len() })?;
    if bytes.len() != expected {
        return Err(IoError::SizeMismatch { expected, actual: bytes.len() });
    }
    let values = bytes[FLOAT_DUMP_HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((width, height, values))
}

pub fn write_float_dump(path: &Path, width: u32, height: u32, values: &[Option<f64>]) -> Result<(), IoError> {
    write_atomic(path, &encode_float_dump(width, height, values))
}

pub fn read_float_dump(path: &Path) -> Result<(u32, u32, Vec<f32>), IoError> {
    decode_float_dump(&fs::read(path)?)
}

// ---------------------------------------------------------------- labels

/// One `class cx cy w h [confidence]` line per box, six decimals.
pub fn format_labels(boxes: &[DetectionBox], with_confidence: bool) -> String {
    let mut s = String::new();
    for b in boxes {
        let _ = write!(s, "{} {:.6} {:.6} {:.6} {:.6}", b.class_id, b.cx, b.cy, b.w, b.h);
        if with_confidence {
            let _ = write!(s, " {:.6}", b.confidence);
        }
        s.push('\n');
    }
    s
}

/// Parses a label file; blank lines are skipped and line numbers are 1-based.
pub fn parse_labels(text: &str) -> Result<Vec<DetectionBox>, IoError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = |msg: String| IoError::ParseError { line: i + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if !(5..=6).contains(&fields.len()) {
            return Err(err(format!("expected 5 or 6 fields, found {}", fields.len())));
        }
        let class_id: u32 = fields[0].parse().map_err(|_| err(format!("bad class id `{}`", fields[0])))?;
        let mut nums = [1.0f64; 5];
        for (k, f) in fields[1..].iter().enumerate() {
            let v: f64 = f.parse().map_err(|_| err(format!("bad number `{f}`")))?;
            if !v.is_finite() {
                return Err(err(format!("non-finite number `{f}`")));
            }
            nums[k] = v;
        }
        let [cx, cy, w, h, conf] = nums;
        out.push(DetectionBox::new(class_id, cx, cy, w, h, conf).map_err(|e| err(e.to_string()))?);
    }
    Ok(out)
}

pub fn read_labels(path: &Path) -> Result<Vec<DetectionBox>, IoError> {
    let bytes = fs::read(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| IoError::ParseError { line: 0, msg: e.to_string() })?;
    parse_labels(text)
}

pub fn write_labels(path: &Path, boxes: &[DetectionBox], with_confidence: bool) -> Result<(), IoError> {
    write_atomic(path, format_labels(boxes, with_confidence).as_bytes())
}

// ---------------------------------------------------------------- config

/// Camera, classic-pipeline and scale-map settings from one config file.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub rig: CameraRig,
    pub classic: ClassicParams,
    pub stride: u32,
    pub encoding: ScaleEncoding,
}

impl Config {
    /// Defaults for everything except the camera.
    pub fn with_rig(rig: CameraRig) -> Self {
        Self { rig, classic: ClassicParams::default(), stride: DEFAULT_STRIDE, encoding: ScaleEncoding::default() }
    }
}

/// Required camera keys: pixels for intrinsics, meters for height, degrees for angles.
pub const RIG_KEYS: [&str; 12] = [
    "fx", "fy", "cx", "cy", "width", "height", "k1", "k2", "cam_height_m", "pitch_deg", "roll_deg", "yaw_deg",
];

/// Optional keys and their units.
pub const OPTIONAL_KEYS: [(&str, &str); 17] = [
    ("horizon_guard_px", "pixels"),
    ("hue_lo_deg", "degrees"),
    ("hue_hi_deg", "degrees"),
    ("sat_lo", "fraction"),
    ("sat_hi", "fraction"),
    ("val_lo", "fraction"),
    ("val_hi", "fraction"),
    ("kernel_radius_px", "pixels"),
    ("morph_iterations", "count"),
    ("line_width_m", "meters"),
    ("line_margin", "factor"),
    ("max_range_m", "meters"),
    ("query_x_m", "meters"),
    ("query_y_m", "meters"),
    ("stride_px", "pixels"),
    ("s_min_m_per_px", "meters per pixel"),
    ("s_max_m_per_px", "meters per pixel"),
];

fn bad(key: &str, msg: impl Into<String>) -> IoError {
    IoError::BadUnit { key: key.to_string(), msg: msg.into() }
}

fn get_f64(t: &toml::Table, key: &str) -> Result<Option<f64>, IoError> {
    match t.get(key) {
        None => Ok(None),
        Some(toml::Value::Float(v)) if v.is_finite() => Ok(Some(*v)),
        Some(toml::Value::Integer(v)) => Ok(Some(*v as f64)),
        Some(v) => Err(bad(key, format!("expected a finite number, found {v}"))),
    }
}

fn need_f64(t: &toml::Table, key: &str) -> Result<f64, IoError> {
    get_f64(t, key)?.ok_or_else(|| IoError::MissingKey(key.to_string()))
}

fn get_u32(t: &toml::Table, key: &str) -> Result<Option<u32>, IoError> {
    match t.get(key) {
        None => Ok(None),
        Some(toml::Value::Integer(v)) => u32::try_from(*v).map(Some).map_err(|_| bad(key, format!("{v} out of range"))),
        Some(v) => Err(bad(key, format!("expected a non-negative integer, found {v}"))),
    }
}

fn fraction(t: &toml::Table, key: &str, default: f64) -> Result<f64, IoError> {
    let v = get_f64(t, key)?.unwrap_or(default);
    if !(0.0..=1.0).contains(&v) {
        return Err(bad(key, format!("{v} outside [0, 1]")));
    }
    Ok(v)
}

fn angle_deg(t: &toml::Table, key: &str) -> Result<f64, IoError> {
    let v = need_f64(t, key)?;
    if v.abs() > 360.0 {
        return Err(bad(key, format!("{v} degrees is out of range")));
    }
    Ok(v.to_radians())
}

/// Builds a config from parsed TOML, consuming only top-level keys.
pub fn config_from_table(t: &toml::Table) -> Result<Config, IoError> {
    for k in t.keys() {
        if !RIG_KEYS.contains(&k.as_str()) && !OPTIONAL_KEYS.iter().any(|(o, _)| o == k) {
            return Err(IoError::UnknownKey(k.clone()));
        }
    }
    for k in RIG_KEYS {
        if !t.contains_key(k) {
            return Err(IoError::MissingKey(k.to_string()));
        }
    }
    let width = get_u32(t, "width")?.unwrap();
    let height = get_u32(t, "height")?.unwrap();
    let intrinsics = CameraIntrinsics {
        fx: need_f64(t, "fx")?,
        fy: need_f64(t, "fy")?,
        cx: need_f64(t, "cx")?,
        cy: need_f64(t, "cy")?,
        width,
        height,
        k1: need_f64(t, "k1")?,
        k2: need_f64(t, "k2")?,
    };
    let cam_height = need_f64(t, "cam_height_m")?;
    if !(cam_height > 0.0) {
        return Err(bad("cam_height_m", "camera height must be positive meters"));
    }
    let pose = CameraPose::new(cam_height, angle_deg(t, "pitch_deg")?, angle_deg(t, "roll_deg")?, angle_deg(t, "yaw_deg")?);
    let guard = get_f64(t, "horizon_guard_px")?.unwrap_or(DEFAULT_HORIZON_GUARD_PX);
    if guard < 0.0 {
        return Err(bad("horizon_guard_px", "guard band cannot be negative"));
    }
    let rig = CameraRig::new(intrinsics, pose)?.with_horizon_guard(guard);

    let dh = HsvThresholds::default();
    let hue = |key: &str, default: f64| -> Result<f64, IoError> {
        let v = get_f64(t, key)?.unwrap_or(default);
        if !(0.0..=360.0).contains(&v) {
            return Err(bad(key, format!("{v} outside [0, 360] degrees")));
        }
        Ok(v)
    };
    let thresholds = HsvThresholds {
        h_lo: hue("hue_lo_deg", dh.h_lo)?,
        h_hi: hue("hue_hi_deg", dh.h_hi)?,
        s_lo: fraction(t, "sat_lo", dh.s_lo)?,
        s_hi: fraction(t, "sat_hi", dh.s_hi)?,
        v_lo: fraction(t, "val_lo", dh.v_lo)?,
        v_hi: fraction(t, "val_hi", dh.v_hi)?,
    };
    let dc = ClassicParams::default();
    let positive = |key: &str, default: f64| -> Result<f64, IoError> {
        let v = get_f64(t, key)?.unwrap_or(default);
        if !(v > 0.0) {
            return Err(bad(key, format!("{v} must be positive")));
        }
        Ok(v)
    };
    let classic = ClassicParams {
        thresholds,
        kernel_radius: get_u32(t, "kernel_radius_px")?.unwrap_or(dc.kernel_radius),
        iterations: get_u32(t, "morph_iterations")?.unwrap_or(dc.iterations),
        line_width_m: positive("line_width_m", dc.line_width_m)?,
        margin: positive("line_margin", dc.margin)?,
        max_range_m: positive("max_range_m", dc.max_range_m)?,
        query: GroundPoint::new(
            get_f64(t, "query_x_m")?.unwrap_or(dc.query.x),
            get_f64(t, "query_y_m")?.unwrap_or(dc.query.y),
        ),
    };
    if classic.kernel_radius < 1 {
        return Err(bad("kernel_radius_px", "must be at least 1"));
    }
    if classic.margin < 1.0 {
        return Err(bad("line_margin", "must be at least 1"));
    }
    let stride = get_u32(t, "stride_px")?.unwrap_or(DEFAULT_STRIDE);
    if stride == 0 {
        return Err(bad("stride_px", "must be positive"));
    }
    let de = ScaleEncoding::default();
    let s_min = positive("s_min_m_per_px", de.s_min)?;
    let s_max = positive("s_max_m_per_px", de.s_max)?;
    let encoding = ScaleEncoding::new(s_min, s_max, de.sentinel_value)
        .map_err(|e| bad("s_max_m_per_px", e.to_string()))?;
    Ok(Config { rig, classic, stride, encoding })
}

fn parse_table(text: &str) -> Result<toml::Table, IoError> {
    text.parse::<toml::Table>().map_err(|e| IoError::Syntax(e.to_string()))
}

pub fn parse_config(text: &str) -> Result<Config, IoError> {
    config_from_table(&parse_table(text)?)
}

pub fn read_config(path: &Path) -> Result<Config, IoError> {
    let text = fs::read_to_string(path)?;
    parse_config(&text)
}

/// Serializes every key; angles go back to degrees.
pub fn format_config(c: &Config) -> String {
    let k = c.rig.intrinsics();
    let p = c.rig.pose();
    let th = &c.classic.thresholds;
    let mut s = String::new();
    let mut kv = |key: &str, v: f64| {
        let _ = writeln!(s, "{key} = {v:?}");
    };
    kv("fx", k.fx);
    kv("fy", k.fy);
    kv("cx", k.cx);
    kv("cy", k.cy);
    kv("k1", k.k1);
    kv("k2", k.k2);
    kv("cam_height_m", p.height);
    kv("pitch_deg", p.pitch.to_degrees());
    kv("roll_deg", p.roll.to_degrees());
    kv("yaw_deg", p.yaw.to_degrees());
    kv("horizon_guard_px", c.rig.horizon_guard_px());
    kv("hue_lo_deg", th.h_lo);
    kv("hue_hi_deg", th.h_hi);
    kv("sat_lo", th.s_lo);
    kv("sat_hi", th.s_hi);
    kv("val_lo", th.v_lo);
    kv("val_hi", th.v_hi);
    kv("line_width_m", c.classic.line_width_m);
    kv("line_margin", c.classic.margin);
    kv("max_range_m", c.classic.max_range_m);
    kv("query_x_m", c.classic.query.x);
    kv("query_y_m", c.classic.query.y);
    kv("s_min_m_per_px", c.encoding.s_min);
    kv("s_max_m_per_px", c.encoding.s_max);
    let _ = writeln!(s, "width = {}", k.width);
    let _ = writeln!(s, "height = {}", k.height);
    let _ = writeln!(s, "kernel_radius_px = {}", c.classic.kernel_radius);
    let _ = writeln!(s, "morph_iterations = {}", c.classic.iterations);
    let _ = writeln!(s, "stride_px = {}", c.stride);
    s
}

pub fn write_config(path: &Path, c: &Config) -> Result<(), IoError> {
    write_atomic(path, format_config(c).as_bytes())
}

// ---------------------------------------------------------------- scene files

/// Scene file contents: the camera config plus scene geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneFile {
    pub config: Config,
    pub scene: SceneSpec,
    /// Extra randomly placed obstacles: `(count, radius_m, height_m)`, placed with the run seed.
    pub scatter: Option<(usize, f64, f64)>,
}

fn sub_table<'a>(v: &'a toml::Value, ctx: &str) -> Result<&'a toml::Table, IoError> {
    v.as_table().ok_or_else(|| IoError::Syntax(format!("`{ctx}` must be a table")))
}

fn check_keys(t: &toml::Table, ctx: &str, allowed: &[&str]) -> Result<(), IoError> {
    match t.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(IoError::UnknownKey(format!("{ctx}.{k}"))),
        None => Ok(()),
    }
}

fn color(t: &toml::Table, key: &str, default: [u8; 3]) -> Result<[u8; 3], IoError> {
    let Some(v) = t.get(key) else { return Ok(default) };
    let arr = v.as_array().filter(|a| a.len() == 3).ok_or_else(|| bad(key, "expected [r, g, b]"))?;
    let mut out = [0u8; 3];
    for (o, x) in out.iter_mut().zip(arr) {
        *o = x
            .as_integer()
            .and_then(|i| u8::try_from(i).ok())
            .ok_or_else(|| bad(key, "channels must be integers in 0..=255"))?;
    }
    Ok(out)
}

/// Parses a scene file: top-level config keys plus optional `[field]`, `[[line]]`,
/// `[[obstacle]]` and `[scatter]` sections.
pub fn parse_scene(text: &str) -> Result<SceneFile, IoError> {
    let mut t = parse_table(text)?;
    let field = t.remove("field");
    let lines = t.remove("line");
    let obstacles = t.remove("obstacle");
    let scatter = t.remove("scatter");
    let config = config_from_table(&t)?;

    let mut scene = SceneSpec::empty(config.rig);
    let mut standard = true;
    if let Some(f) = &field {
        let f = sub_table(f, "field")?;
        check_keys(f, "field", &["length_m", "width_m", "center_x_m", "center_y_m", "layout", "field_color", "line_color", "background_color"])?;
        let center = GroundPoint::new(get_f64(f, "center_x_m")?.unwrap_or(0.0), get_f64(f, "center_y_m")?.unwrap_or(0.0));
        standard = match f.get("layout").map(|v| v.as_str()) {
            None | Some(Some("standard")) => true,
            Some(Some("none")) => false,
            _ => return Err(bad("field.layout", "expected \"standard\" or \"none\"")),
        };
        scene.field_center = center;
        scene.field_length_m = get_f64(f, "length_m")?.unwrap_or(scene.field_length_m);
        scene.field_width_m = get_f64(f, "width_m")?.unwrap_or(scene.field_width_m);
        scene.field_color = color(f, "field_color", scene.field_color)?;
        scene.line_color = color(f, "line_color", scene.line_color)?;
        scene.background_color = color(f, "background_color", scene.background_color)?;
    }
    if standard {
        let base = SceneSpec::standard_field(config.rig, scene.field_center);
        let (lx, ly) = (scene.field_length_m, scene.field_width_m);
        if (lx, ly) == (base.field_length_m, base.field_width_m) {
            scene.lines = base.lines;
        } else {
            return Err(bad("field.layout", "the standard layout needs the default 9 x 6 m field"));
        }
    }
    if let Some(v) = &lines {
        let arr = v.as_array().ok_or_else(|| IoError::Syntax("`line` must be an array of tables".into()))?;
        for l in arr {
            let l = sub_table(l, "line")?;
            check_keys(l, "line", &["x0_m", "y0_m", "x1_m", "y1_m", "width_m"])?;
            scene.lines.push(LineSegment::new(
                GroundPoint::new(need_f64(l, "x0_m")?, need_f64(l, "y0_m")?),
                GroundPoint::new(need_f64(l, "x1_m")?, need_f64(l, "y1_m")?),
                get_f64(l, "width_m")?.unwrap_or(DEFAULT_LINE_WIDTH_M),
            ));
        }
    }
    if let Some(v) = &obstacles {
        let arr = v.as_array().ok_or_else(|| IoError::Syntax("`obstacle` must be an array of tables".into()))?;
        for o in arr {
            let o = sub_table(o, "obstacle")?;
            check_keys(o, "obstacle", &["x_m", "y_m", "radius_m", "height_m", "color", "class_id"])?;
            let mut c = Cylinder::new(GroundPoint::new(need_f64(o, "x_m")?, need_f64(o, "y_m")?), need_f64(o, "radius_m")?, need_f64(o, "height_m")?);
            c.color = color(o, "color", c.color)?;
            c.class_id = get_u32(o, "class_id")?.unwrap_or(c.class_id);
            scene.obstacles.push(c);
        }
    }
    let scatter = match &scatter {
        None => None,
        Some(v) => {
            let s = sub_table(v, "scatter")?;
            check_keys(s, "scatter", &["count", "radius_m", "height_m"])?;
            let count = get_u32(s, "count")?.ok_or_else(|| IoError::MissingKey("scatter.count".into()))?;
            Some((count as usize, need_f64(s, "radius_m")?, need_f64(s, "height_m")?))
        }
    };
    scene.validate().map_err(|e| bad("scene", e.to_string()))?;
    Ok(SceneFile { config, scene, scatter })
}

pub fn read_scene(path: &Path) -> Result<SceneFile, IoError> {
    parse_scene(&fs::read_to_string(path)?)
}
