//! Annotated renderings of the classic pipeline: walkable overlay, contours, obstacle rays.

use super::{BinaryMask, ClassicOutput, ClassicParams, DistanceMap};
use crate::geometry::{CameraRig, Pixel};
use crate::image::{GrayImage, RgbImage};

pub const WALKABLE: [u8; 3] = [0, 200, 0];
pub const CONTOUR: [u8; 3] = [255, 230, 0];
pub const OBSTACLE_RAY: [u8; 3] = [230, 0, 0];
pub const QUERY_DOT: [u8; 3] = [255, 0, 255];

/// Distance map scaled so its largest finite value maps to 255.
pub fn distance_to_gray(dmap: &DistanceMap) -> GrayImage {
    let max = dmap.max_finite().max(1e-9);
    let mut out = GrayImage::new(dmap.width(), dmap.height());
    for y in 0..dmap.height() {
        for x in 0..dmap.width() {
            let d = dmap.get(x, y);
            let v = if d.is_finite() { (255.0 * d / max).round() as u8 } else { 255 };
            out.put(x, y, v);
        }
    }
    out
}

pub fn mask_to_gray(mask: &BinaryMask) -> GrayImage {
    let data = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    GrayImage::from_raw(mask.width(), mask.height(), data).unwrap()
}

fn blend(a: [u8; 3], b: [u8; 3], t: f64) -> [u8; 3] {
    let mix = |x: u8, y: u8| (x as f64 * (1.0 - t) + y as f64 * t).round() as u8;
    [mix(a[0], b[0]), mix(a[1], b[1]), mix(a[2], b[2])]
}

/// Bresenham line, clipped to the image.
pub fn draw_line(img: &mut RgbImage, (x0, y0): (i64, i64), (x1, y1): (i64, i64), color: [u8; 3]) {
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    loop {
        if x >= 0 && y >= 0 && x < img.width() as i64 && y < img.height() as i64 {
            img.put(x as u32, y as u32, color);
        }
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

pub fn draw_disc(img: &mut RgbImage, (cx, cy): (i64, i64), radius: i64, color: [u8; 3]) {
    for y in cy - radius..=cy + radius {
        for x in cx - radius..=cx + radius {
            if (x - cx).pow(2) + (y - cy).pow(2) <= radius * radius
                && x >= 0
                && y >= 0
                && x < img.width() as i64
                && y < img.height() as i64
            {
                img.put(x as u32, y as u32, color);
            }
        }
    }
}

/// Input frame with the walkable area tinted green, core boundaries in yellow and red rays
/// from the query point to every obstacle pixel.
pub fn annotate(image: &RgbImage, out: &ClassicOutput, rig: &CameraRig, params: &ClassicParams) -> RgbImage {
    let mut img = image.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if !out.core.get(x, y) && rig.pixel_to_ground(Pixel::new(x as f64, y as f64)).is_ok() {
                let p = img.get(x, y);
                img.put(x, y, blend(p, WALKABLE, 0.4));
            }
        }
    }
    for &(x, y) in out.contours.iter().flatten() {
        img.put(x, y, CONTOUR);
    }
    if let Ok(q) = rig.ground_to_pixel(params.query) {
        let origin = (q.x.round() as i64, q.y.round() as i64);
        for ob in &out.obstacles {
            draw_line(&mut img, origin, (ob.px.0 as i64, ob.px.1 as i64), OBSTACLE_RAY);
        }
        draw_disc(&mut img, origin, 4, QUERY_DOT);
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_hits_both_endpoints() {
        let mut img = RgbImage::new(10, 10);
        draw_line(&mut img, (1, 8), (7, 2), [255, 0, 0]);
        assert_eq!(img.get(1, 8), [255, 0, 0]);
        assert_eq!(img.get(7, 2), [255, 0, 0]);
        draw_line(&mut img, (-5, -5), (20, 20), [0, 255, 0]);
        assert_eq!(img.get(9, 9), [0, 255, 0]);
    }
}
