//! WebAssembly bindings for the browser demo: scale-map view, classic detection on a synthetic
//! field, and the distance-transform view. Each returns an RGBA image plus a summary line.

use wasm_bindgen::prelude::*;

use groundscale::classiccv::viz::{annotate, distance_to_gray};
use groundscale::classiccv::{detect_classic, ClassicOutput, ClassicParams};
use groundscale::synth::{render, Cylinder, LineSegment, Rendered, SceneSpec};
use groundscale::{build_scale_map, CameraIntrinsics, CameraPose, CameraRig, GroundPoint, ScaleEncoding};

pub const WIDTH: u32 = 320;
pub const HEIGHT: u32 = 240;
const FOCAL_PX: f64 = 350.0;
const HORIZON_RGBA: [u8; 4] = [60, 70, 110, 255];

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct DemoImage {
    width: u32,
    height: u32,
    rgba: Vec<u8>,
    summary: String,
}

#[wasm_bindgen]
impl DemoImage {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[wasm_bindgen(getter)]
    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn summary(&self) -> String {
        self.summary.clone()
    }
}

fn rig(height_m: f64, pitch_deg: f64) -> Result<CameraRig, String> {
    CameraRig::new(
        CameraIntrinsics::pinhole(FOCAL_PX, WIDTH, HEIGHT),
        CameraPose::new(height_m, pitch_deg.to_radians(), 0.0, 0.0),
    )
    .map_err(|e| e.to_string())
}

fn rgb_to_rgba(rgb: &[u8]) -> Vec<u8> {
    rgb.chunks_exact(3).flat_map(|p| [p[0], p[1], p[2], 255]).collect()
}

/// Encoded scale plane as grayscale; pixels without ground are tinted.
pub fn scale_map_image(height_m: f64, pitch_deg: f64, stride: u32) -> Result<DemoImage, String> {
    let rig = rig(height_m, pitch_deg)?;
    let map = build_scale_map(&rig, stride).map_err(|e| e.to_string())?;
    let enc = ScaleEncoding::default();
    let dense = map.dense();
    let rgba = dense
        .iter()
        .flat_map(|s| match s {
            Some(_) => {
                let v = enc.encode(*s);
                [v, v, v, 255]
            }
            None => HORIZON_RGBA,
        })
        .collect();
    let center = rig.scale_at_pixel(groundscale::Pixel::new(rig.intrinsics().cx, rig.intrinsics().cy));
    let summary = match center {
        Ok(s) => format!("stride {stride}: {:.2} mm/px at the image center", s * 1e3),
        Err(_) => format!("stride {stride}: image center is above the horizon"),
    };
    Ok(DemoImage { width: WIDTH, height: HEIGHT, rgba, summary })
}

/// Parameters of the synthetic scene behind the detection views.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneParams {
    pub height_m: f64,
    pub pitch_deg: f64,
    pub obstacle_x_m: f64,
    pub obstacle_y_m: f64,
    pub obstacle_radius_m: f64,
}

fn scene(p: &SceneParams) -> Result<(CameraRig, Rendered), String> {
    let rig = rig(p.height_m, p.pitch_deg)?;
    let mut spec = SceneSpec::standard_field(rig, GroundPoint::new(1.8, 0.4));
    spec.lines.push(LineSegment::new(GroundPoint::new(0.5, -0.8), GroundPoint::new(2.5, -0.8), 0.05));
    if p.obstacle_radius_m > 0.0 {
        spec.obstacles.push(Cylinder::new(GroundPoint::new(p.obstacle_x_m, p.obstacle_y_m), p.obstacle_radius_m, 0.45));
    }
    let r = render(&spec).map_err(|e| e.to_string())?;
    Ok((rig, r))
}

fn run_detection(p: &SceneParams) -> Result<(CameraRig, Rendered, ClassicOutput, ClassicParams), String> {
    let (rig, r) = scene(p)?;
    let params = ClassicParams { max_range_m: 3.0, ..ClassicParams::default() };
    let out = detect_classic(&r.image, &rig, &params).map_err(|e| e.to_string())?;
    Ok((rig, r, out, params))
}

/// Synthetic field with the classic pipeline's overlay.
pub fn detection_image(p: &SceneParams) -> Result<DemoImage, String> {
    let (rig, r, out, params) = run_detection(p)?;
    let img = annotate(&r.image, &out, &rig, &params);
    let nearest = out.obstacles.iter().map(|o| o.range_m).fold(f64::INFINITY, f64::min);
    let summary = if nearest.is_finite() {
        format!("{} obstacle box(es), nearest obstacle point {:.2} m away", out.boxes.len(), nearest)
    } else {
        format!("{} obstacle box(es), nothing within {:.1} m", out.boxes.len(), params.max_range_m)
    };
    Ok(DemoImage { width: WIDTH, height: HEIGHT, rgba: rgb_to_rgba(img.as_raw()), summary })
}

/// Distance of every non-green pixel to the nearest green pixel, brightest at the maximum.
pub fn distance_image(p: &SceneParams) -> Result<DemoImage, String> {
    let (_, _, out, _) = run_detection(p)?;
    let gray = distance_to_gray(&out.distance);
    let rgba = gray
        .as_raw()
        .iter()
        .zip(out.core.bits())
        .flat_map(|(&v, &core)| if core { [255, v / 2, 0, 255] } else { [v, v, v, 255] })
        .collect();
    let summary = format!(
        "max distance {:.1} px; {} core pixels survive the line-width threshold",
        out.distance.max_finite(),
        out.core.count_ones()
    );
    Ok(DemoImage { width: WIDTH, height: HEIGHT, rgba, summary })
}

fn js_err(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen(js_name = scaleMap)]
pub fn scale_map_js(height_m: f64, pitch_deg: f64, stride: u32) -> Result<DemoImage, JsError> {
    scale_map_image(height_m, pitch_deg, stride).map_err(js_err)
}

#[wasm_bindgen(js_name = detect)]
pub fn detect_js(height_m: f64, pitch_deg: f64, x: f64, y: f64, radius: f64) -> Result<DemoImage, JsError> {
    let p = SceneParams { height_m, pitch_deg, obstacle_x_m: x, obstacle_y_m: y, obstacle_radius_m: radius };
    detection_image(&p).map_err(js_err)
}

#[wasm_bindgen(js_name = distanceMap)]
pub fn distance_js(height_m: f64, pitch_deg: f64, x: f64, y: f64, radius: f64) -> Result<DemoImage, JsError> {
    let p = SceneParams { height_m, pitch_deg, obstacle_x_m: x, obstacle_y_m: y, obstacle_radius_m: radius };
    distance_image(&p).map_err(js_err)
}
