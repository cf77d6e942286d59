//! Exact Euclidean distance transform (Meijster, Roerdink & Hesselink two-pass algorithm).
//!
//! Every 1-pixel receives its distance to the nearest 0-pixel; 0-pixels get 0. Distances are
//! kept as exact squared integers.

use super::BinaryMask;

/// How pixels beyond the image edge are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Border {
    /// Only in-image 0-pixels count.
    #[default]
    Ignore,
    /// The image is surrounded by 0-pixels.
    Zero,
}

/// Degenerate inputs for which the distance field is trivial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// No 1-pixels: the map is all zero.
    NoForeground,
    /// No 0-pixels: every distance is infinite.
    NoBackground,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMap {
    width: u32,
    height: u32,
    /// Squared distances; `u64::MAX` stands for infinity.
    squared: Vec<u64>,
    degeneracy: Option<Degeneracy>,
}

impl DistanceMap {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn degeneracy(&self) -> Option<Degeneracy> {
        self.degeneracy
    }

    pub fn squared(&self) -> &[u64] {
        &self.squared
    }

    #[inline]
    pub fn squared_at(&self, x: u32, y: u32) -> u64 {
        self.squared[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        match self.squared_at(x, y) {
            u64::MAX => f64::INFINITY,
            d => (d as f64).sqrt(),
        }
    }

    pub fn max_finite(&self) -> f64 {
        self.squared
            .iter()
            .filter(|&&d| d != u64::MAX)
            .max()
            .map_or(0.0, |&d| (d as f64).sqrt())
    }
}

pub fn distance_transform(mask: &BinaryMask) -> DistanceMap {
    distance_transform_with_border(mask, Border::Ignore)
}

pub fn distance_transform_with_border(mask: &BinaryMask, border: Border) -> DistanceMap {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let ones = mask.count_ones();
    if ones == 0 {
        return DistanceMap {
            width: mask.width(),
            height: mask.height(),
            squared: vec![0; w * h],
            degeneracy: Some(Degeneracy::NoForeground),
        };
    }
    match border {
        Border::Zero => {
            let padded = mask.padded(1, false);
            let inner = exact_edt(&padded);
            let pw = w + 2;
            let mut squared = Vec::with_capacity(w * h);
            for y in 0..h {
                squared.extend_from_slice(&inner[(y + 1) * pw + 1..(y + 1) * pw + 1 + w]);
            }
            DistanceMap { width: mask.width(), height: mask.height(), squared, degeneracy: None }
        }
        Border::Ignore if ones == w * h => DistanceMap {
            width: mask.width(),
            height: mask.height(),
            squared: vec![u64::MAX; w * h],
            degeneracy: Some(Degeneracy::NoBackground),
        },
        Border::Ignore => DistanceMap {
            width: mask.width(),
            height: mask.height(),
            squared: exact_edt(mask),
            degeneracy: None,
        },
    }
}

/// Requires at least one 0-pixel.
fn exact_edt(mask: &BinaryMask) -> Vec<u64> {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let inf = (w + h) as i64;
    let bits = mask.bits();

    // column pass: vertical distance to the nearest 0 in the same column
    let mut g = vec![0i64; w * h];
    for x in 0..w {
        g[x] = if bits[x] { inf } else { 0 };
        for y in 1..h {
            let i = y * w + x;
            g[i] = if bits[i] { g[i - w] + 1 } else { 0 };
        }
        for y in (0..h.saturating_sub(1)).rev() {
            let i = y * w + x;
            if g[i + w] < g[i] {
                g[i] = g[i + w] + 1;
            }
        }
    }

    // row pass: lower envelope of parabolas (x - i)² + g(i)²
    let mut out = vec![0u64; w * h];
    let mut s = vec![0usize; w];
    let mut t = vec![0i64; w];
    for y in 0..h {
        let row = &g[y * w..(y + 1) * w];
        let f = |x: i64, i: usize| (x - i as i64).pow(2) + row[i] * row[i];
        let sep = |i: usize, u: usize| {
            let (i_, u_) = (i as i64, u as i64);
            (u_ * u_ - i_ * i_ + row[u] * row[u] - row[i] * row[i]).div_euclid(2 * (u_ - i_))
        };
        let mut q: isize = 0;
        s[0] = 0;
        t[0] = 0;
        for u in 1..w {
            while q >= 0 && f(t[q as usize], s[q as usize]) > f(t[q as usize], u) {
                q -= 1;
            }
            if q < 0 {
                q = 0;
                s[0] = u;
            } else {
                let wpos = 1 + sep(s[q as usize], u);
                if wpos < w as i64 {
                    q += 1;
                    s[q as usize] = u;
                    t[q as usize] = wpos;
                }
            }
        }
        for u in (0..w).rev() {
            out[y * w + u] = f(u as i64, s[q as usize]) as u64;
            if u as i64 == t[q as usize] {
                q -= 1;
            }
        }
    }
    out
}
