//! 8-connected component labeling and Moore-neighborhood border following.

use super::BinaryMask;

/// Closed outer boundary of one component as a clockwise pixel walk.
pub type Contour = Vec<(u32, u32)>;

/// Clockwise in image coordinates (y down), starting west.
const RING: [(i32, i32); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];

/// Component labels, `0` for background and `1..=count` in raster order of first pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<u32>,
    pub count: u32,
}

impl Components {
    #[inline]
    pub fn label(&self, x: i64, y: i64) -> u32 {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            0
        } else {
            self.labels[y as usize * self.width as usize + x as usize]
        }
    }

    /// Inclusive pixel bounds `(x0, y0, x1, y1)` per component, indexed by `label - 1`.
    pub fn bounds(&self) -> Vec<(u32, u32, u32, u32)> {
        let mut b = vec![(u32::MAX, u32::MAX, 0, 0); self.count as usize];
        for (i, &l) in self.labels.iter().enumerate() {
            if l == 0 {
                continue;
            }
            let (x, y) = ((i % self.width as usize) as u32, (i / self.width as usize) as u32);
            let e = &mut b[l as usize - 1];
            e.0 = e.0.min(x);
            e.1 = e.1.min(y);
            e.2 = e.2.max(x);
            e.3 = e.3.max(y);
        }
        b
    }
}

pub fn label_components(mask: &BinaryMask) -> Components {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let mut labels = vec![0u32; w * h];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !mask.bits()[start] || labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for (dx, dy) in RING {
                let (nx, ny) = (x + dx as i64, y + dy as i64);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if mask.bits()[j] && labels[j] == 0 {
                    labels[j] = count;
                    stack.push(j);
                }
            }
        }
    }
    Components { width: mask.width(), height: mask.height(), labels, count }
}

/// One clockwise outer contour per 8-connected component, in raster order of the
/// components' top-left-most pixels. Each walk starts at that pixel.
pub fn extract_cluster_boundaries(core: &BinaryMask) -> Vec<Contour> {
    let comps = label_components(core);
    let w = core.width() as usize;
    let mut seen = vec![false; comps.count as usize + 1];
    let mut out = Vec::with_capacity(comps.count as usize);
    for (i, &l) in comps.labels.iter().enumerate() {
        if l == 0 || seen[l as usize] {
            continue;
        }
        seen[l as usize] = true;
        out.push(trace(&comps, l, ((i % w) as i64, (i / w) as i64)));
    }
    out
}

fn ring_index(dx: i64, dy: i64) -> usize {
    RING.iter()
        .position(|&(rx, ry)| rx as i64 == dx && ry as i64 == dy)
        .expect("offset is an 8-neighbor")
}

fn trace(comps: &Components, id: u32, start: (i64, i64)) -> Contour {
    let inside = |(x, y): (i64, i64)| comps.label(x, y) == id;
    let as_px = |(x, y): (i64, i64)| (x as u32, y as u32);
    let mut contour = vec![as_px(start)];
    let mut cur = start;
    // the west neighbor of a top-left-most pixel is never part of the component
    let mut back = 0usize;
    let mut first_step: Option<(i64, i64)> = None;
    let mut pending_start = false;
    let limit = 4 * comps.labels.len() + 8;

    for _ in 0..limit {
        let Some(k) = (1..=8).find(|&k| {
            let (dx, dy) = RING[(back + k) % 8];
            inside((cur.0 + dx as i64, cur.1 + dy as i64))
        }) else {
            break;
        };
        let (dx, dy) = RING[(back + k) % 8];
        let next = (cur.0 + dx as i64, cur.1 + dy as i64);
        if cur == start && first_step == Some(next) {
            break;
        }
        if pending_start {
            contour.push(as_px(start));
            pending_start = false;
        }
        first_step.get_or_insert(next);
        let (bx, by) = RING[(back + k - 1) % 8];
        let prev = (cur.0 + bx as i64, cur.1 + by as i64);
        back = ring_index(prev.0 - next.0, prev.1 - next.1);
        if next == start {
            pending_start = true;
        } else {
            contour.push(as_px(next));
        }
        cur = next;
    }
    contour
}
