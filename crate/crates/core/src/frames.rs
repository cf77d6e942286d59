//! Four-plane R,G,B,S detector input frames.

use crate::image::{GrayImage, RgbImage};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    #[error("dimension mismatch: rgb is {rgb_w}x{rgb_h}, scale plane is {s_w}x{s_h}")]
    DimensionMismatch { rgb_w: u32, rgb_h: u32, s_w: u32, s_h: u32 },
}

pub const PLANES: usize = 4;
/// Index of the scale plane.
pub const S_PLANE: usize = 3;

/// Planar 8-bit frame: R, G, B then S, each `width × height` row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame4 {
    width: u32,
    height: u32,
    planes: [Vec<u8>; PLANES],
}

impl Frame4 {
    /// `None` unless every plane has `width × height` bytes.
    pub fn from_planes(width: u32, height: u32, planes: [Vec<u8>; PLANES]) -> Option<Self> {
        let n = width as usize * height as usize;
        planes.iter().all(|p| p.len() == n).then_some(Self { width, height, planes })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn plane(&self, i: usize) -> &[u8] {
        &self.planes[i]
    }

    pub fn planes(&self) -> &[Vec<u8>; PLANES] {
        &self.planes
    }

    pub fn into_planes(self) -> [Vec<u8>; PLANES] {
        self.planes
    }

    pub fn s_plane(&self) -> GrayImage {
        GrayImage::from_raw(self.width, self.height, self.planes[S_PLANE].clone()).unwrap()
    }
}

pub fn fuse(rgb: &RgbImage, s_plane: &GrayImage) -> Result<Frame4, FrameError> {
    if rgb.width() != s_plane.width() || rgb.height() != s_plane.height() {
        return Err(FrameError::DimensionMismatch {
            rgb_w: rgb.width(),
            rgb_h: rgb.height(),
            s_w: s_plane.width(),
            s_h: s_plane.height(),
        });
    }
    let n = rgb.width() as usize * rgb.height() as usize;
    let mut r = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for p in rgb.pixels() {
        r.push(p[0]);
        g.push(p[1]);
        b.push(p[2]);
    }
    Ok(Frame4 {
        width: rgb.width(),
        height: rgb.height(),
        planes: [r, g, b, s_plane.as_raw().to_vec()],
    })
}

pub fn split(frame: &Frame4) -> (RgbImage, GrayImage) {
    let n = frame.width as usize * frame.height as usize;
    let mut data = Vec::with_capacity(n * 3);
    for i in 0..n {
        data.extend_from_slice(&[frame.planes[0][i], frame.planes[1][i], frame.planes[2][i]]);
    }
    (
        RgbImage::from_raw(frame.width, frame.height, data).unwrap(),
        frame.s_plane(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pair(seed: u64) -> (RgbImage, GrayImage) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, h) = (rng.gen_range(1..40), rng.gen_range(1..40));
        let rgb: Vec<u8> = (0..w * h * 3).map(|_| rng.gen()).collect();
        let s: Vec<u8> = (0..w * h).map(|_| rng.gen()).collect();
        (RgbImage::from_raw(w, h, rgb).unwrap(), GrayImage::from_raw(w, h, s).unwrap())
    }

    #[test]
    fn split_inverts_fuse() {
        for seed in 0..100 {
            let (rgb, s) = random_pair(seed);
            let f = fuse(&rgb, &s).unwrap();
            let (rgb2, s2) = split(&f);
            assert_eq!(rgb2, rgb);
            assert_eq!(s2, s);
            let (a, b) = split(&f);
            assert_eq!(fuse(&a, &b).unwrap(), f);
        }
    }

    #[test]
    fn planes_hold_channels() {
        let mut rgb = RgbImage::new(2, 1);
        rgb.put(0, 0, [1, 2, 3]);
        rgb.put(1, 0, [4, 5, 6]);
        let f = fuse(&rgb, &GrayImage::from_raw(2, 1, vec![7, 8]).unwrap()).unwrap();
        assert_eq!(f.plane(0), &[1, 4]);
        assert_eq!(f.plane(1), &[2, 5]);
        assert_eq!(f.plane(2), &[3, 6]);
        assert_eq!(f.plane(S_PLANE), &[7, 8]);
    }

    #[test]
    fn mismatched_sizes_fail() {
        let err = fuse(&RgbImage::new(4, 4), &GrayImage::new(4, 5)).unwrap_err();
        assert!(matches!(err, FrameError::DimensionMismatch { .. }));
    }
}
