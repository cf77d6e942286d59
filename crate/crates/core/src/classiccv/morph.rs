//! Binary erosion/dilation with a `(2r+1)²` square element.
//!
//! Pixels outside the image count as 0, so erosion eats into anything touching the border
//! and a padded-with-zeros image gives the same result as the unpadded one.

use super::BinaryMask;

/// `out[i]` = number of ones in `row[i-r ..= i+r]` that lie inside the row.
fn window_counts(row: &[bool], r: usize, out: &mut Vec<u32>) {
    out.clear();
    let n = row.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0u32);
    for &b in row {
        prefix.push(prefix.last().unwrap() + b as u32);
    }
    for i in 0..n {
        let lo = i.saturating_sub(r);
        let hi = (i + r + 1).min(n);
        out.push(prefix[hi] - prefix[lo]);
    }
}

fn separable(mask: &BinaryMask, r: usize, erode: bool) -> BinaryMask {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let full = (2 * r + 1) as u32;
    let keep = |count: u32| if erode { count == full } else { count > 0 };
    let mut counts = Vec::new();

    let mut rows = vec![false; w * h];
    for y in 0..h {
        window_counts(&mask.bits()[y * w..(y + 1) * w], r, &mut counts);
        for x in 0..w {
            rows[y * w + x] = keep(counts[x]);
        }
    }
    let mut out = vec![false; w * h];
    let mut column = vec![false; h];
    for x in 0..w {
        for y in 0..h {
            column[y] = rows[y * w + x];
        }
        window_counts(&column, r, &mut counts);
        for y in 0..h {
            out[y * w + x] = keep(counts[y]);
        }
    }
    BinaryMask::from_bits(mask.width(), mask.height(), out).unwrap()
}

pub fn erode(mask: &BinaryMask, radius: u32) -> BinaryMask {
    separable(mask, radius as usize, true)
}

pub fn dilate(mask: &BinaryMask, radius: u32) -> BinaryMask {
    separable(mask, radius as usize, false)
}

/// Opening (erosion then dilation), applied `iterations` times.
pub fn morph_open_close(mask: &BinaryMask, kernel_radius: u32, iterations: u32) -> BinaryMask {
    let mut out = mask.clone();
    for _ in 0..iterations {
        out = dilate(&erode(&out, kernel_radius), kernel_radius);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(mask: &BinaryMask, r: i64, erode: bool) -> BinaryMask {
        let (w, h) = (mask.width() as i64, mask.height() as i64);
        let mut out = BinaryMask::new(mask.width(), mask.height());
        for y in 0..h {
            for x in 0..w {
                let mut all = true;
                let mut any = false;
                for dy in -r..=r {
                    for dx in -r..=r {
                        let (xx, yy) = (x + dx, y + dy);
                        let v = xx >= 0 && yy >= 0 && xx < w && yy < h && mask.get(xx as u32, yy as u32);
                        all &= v;
                        any |= v;
                    }
                }
                out.set(x as u32, y as u32, if erode { all } else { any });
            }
        }
        out
    }

    #[test]
    fn isolated_pixel_is_removed() {
        let mut m = BinaryMask::new(9, 9);
        m.set(4, 4, true);
        assert_eq!(morph_open_close(&m, 1, 1).count_ones(), 0);
    }

    #[test]
    fn solid_block_survives() {
        let mut m = BinaryMask::new(40, 40);
        for y in 10..30 {
            for x in 5..25 {
                m.set(x, y, true);
            }
        }
        assert_eq!(morph_open_close(&m, 1, 1), m);
    }

    #[test]
    fn random_masks_match_min_max_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for r in 1..=3 {
            for _ in 0..10 {
                let bits = (0..32 * 32).map(|_| rng.gen_bool(0.6)).collect();
                let m = BinaryMask::from_bits(32, 32, bits).unwrap();
                let expected = brute(&brute(&m, r, true), r, false);
                assert_eq!(morph_open_close(&m, r as u32, 1), expected);
                assert_eq!(erode(&m, r as u32), brute(&m, r, true));
                assert_eq!(dilate(&m, r as u32), brute(&m, r, false));
            }
        }
    }

    #[test]
    fn opening_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let bits = (0..50 * 40).map(|_| rng.gen_bool(0.55)).collect();
        let m = BinaryMask::from_bits(50, 40, bits).unwrap();
        let once = morph_open_close(&m, 1, 1);
        assert_eq!(morph_open_close(&once, 1, 1), once);
    }
}
