use super::BinaryMask;
use crate::image::RgbImage;

/// Hexcone RGB→HSV. Hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
/// Achromatic pixels get hue 0.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let (r, g, b) = (r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta == 0.0 {
        return (0.0, s, v);
    }
    let h = if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    (if h >= 360.0 { h - 360.0 } else { h }, s, v)
}

/// Inverse of [`rgb_to_hsv`], rounded to the nearest 8-bit level.
pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let s = s.clamp(0.0, 1.0);
    let v = v.clamp(0.0, 1.0);
    let c = v * s;
    let hp = h.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let q = |t: f64| ((t + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [q(r), q(g), q(b)]
}

/// Box in HSV space. Hue wraps through 0 when `h_lo > h_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvThresholds {
    pub h_lo: f64,
    pub h_hi: f64,
    pub s_lo: f64,
    pub s_hi: f64,
    pub v_lo: f64,
    pub v_hi: f64,
}

impl Default for HsvThresholds {
    /// Field green under indoor lighting.
    fn default() -> Self {
        Self {
            h_lo: 70.0,
            h_hi: 170.0,
            s_lo: 0.3,
            s_hi: 1.0,
            v_lo: 0.15,
            v_hi: 1.0,
        }
    }
}

impl HsvThresholds {
    pub fn is_valid(&self) -> bool {
        let hue_ok = |h: f64| (0.0..360.0).contains(&h);
        let unit_ok = |a: f64, b: f64| (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b) && a <= b;
        hue_ok(self.h_lo) && hue_ok(self.h_hi) && unit_ok(self.s_lo, self.s_hi) && unit_ok(self.v_lo, self.v_hi)
    }

    pub fn contains(&self, h: f64, s: f64, v: f64) -> bool {
        let hue = if self.h_lo <= self.h_hi {
            h >= self.h_lo && h <= self.h_hi
        } else {
            h >= self.h_lo || h <= self.h_hi
        };
        hue && s >= self.s_lo && s <= self.s_hi && v >= self.v_lo && v <= self.v_hi
    }

    pub fn is_green(&self, rgb: [u8; 3]) -> bool {
        let (h, s, v) = rgb_to_hsv(rgb[0], rgb[1], rgb[2]);
        self.contains(h, s, v)
    }
}

/// Marks every pixel outside the thresholds (obstacle candidate) with 1.
pub fn green_filter(image: &RgbImage, th: &HsvThresholds) -> BinaryMask {
    let bits = image.pixels().map(|p| !th.is_green(p)).collect();
    BinaryMask::from_bits(image.width(), image.height(), bits).expect("mask matches image size")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hexcone sector formula on raw byte values.
    fn hexcone_oracle(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
        let (rf, gf, bf) = (r as f64, g as f64, b as f64);
        let max = rf.max(gf).max(bf);
        let min = rf.min(gf).min(bf);
        let c = max - min;
        let h = if c == 0.0 {
            0.0
        } else if max == gf {
            120.0 + 60.0 * (bf - rf) / c
        } else if max == bf {
            240.0 + 60.0 * (rf - gf) / c
        } else {
            (360.0 + 60.0 * (gf - bf) / c) % 360.0
        };
        (h, if max == 0.0 { 0.0 } else { c / max }, max / 255.0)
    }

    #[test]
    fn known_colors() {
        assert_eq!(rgb_to_hsv(0, 255, 0), (120.0, 1.0, 1.0));
        let (h, s, v) = rgb_to_hsv(128, 128, 128);
        assert_eq!((h, s), (0.0, 0.0));
        assert!((v - 0.50196).abs() < 1e-4);
        let (h, s, v) = rgb_to_hsv(34, 139, 34);
        let (oh, os, ov) = hexcone_oracle(34, 139, 34);
        assert!((h - oh).abs() < 1e-9 && (s - os).abs() < 1e-9 && (v - ov).abs() < 1e-9);
        assert!((h - 120.0).abs() < 1e-9);
        assert!((s - 0.7554).abs() < 1e-3);
        assert!((v - 0.5451).abs() < 1e-3);
    }

    #[test]
    fn matches_oracle_on_a_grid() {
        for r in (0..=255).step_by(15) {
            for g in (0..=255).step_by(17) {
                for b in (0..=255).step_by(51) {
                    let (h, s, v) = rgb_to_hsv(r, g, b);
                    let (oh, os, ov) = hexcone_oracle(r, g, b);
                    assert!((h - oh).abs() < 1e-9, "{r} {g} {b}: {h} vs {oh}");
                    assert!((s - os).abs() < 1e-12 && (v - ov).abs() < 1e-12);
                    assert!((0.0..360.0).contains(&h));
                }
            }
        }
    }

    #[test]
    fn hsv_round_trip_is_exact_for_bytes() {
        for r in (0..=255).step_by(5) {
            for g in (0..=255).step_by(7) {
                for b in (0..=255).step_by(11) {
                    let (h, s, v) = rgb_to_hsv(r, g, b);
                    assert_eq!(hsv_to_rgb(h, s, v), [r, g, b]);
                }
            }
        }
    }

    #[test]
    fn uniform_images() {
        let th = HsvThresholds::default();
        let green = RgbImage::filled(8, 6, [40, 140, 50]);
        assert!(green_filter(&green, &th).count_ones() == 0);
        let white = RgbImage::filled(8, 6, [255, 255, 255]);
        assert_eq!(green_filter(&white, &th).count_ones(), 48);
    }

    #[test]
    fn hue_range_can_wrap() {
        let red = HsvThresholds { h_lo: 340.0, h_hi: 20.0, ..HsvThresholds::default() };
        assert!(red.is_green([200, 20, 20]));
        assert!(red.is_green([200, 20, 60]));
        assert!(!red.is_green([20, 200, 20]));
    }
}
