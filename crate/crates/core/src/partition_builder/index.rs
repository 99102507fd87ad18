//! Uniform bucket grid over the torus for rectangle lookup.

use crate::rectangles::{Rectangle, TOL};
use crate::torus_model::{ToralAutomorphism, TorusPoint};

#[derive(Debug, Clone)]
pub struct CellIndex {
    g: usize,
    buckets: Vec<Vec<u32>>,
}

/// Cartesian bounding box of a rectangle, padded by `TOL`, in absolute
/// coordinates (may leave the unit square).
pub fn bounding_box(f: &ToralAutomorphism, r: &Rectangle) -> [f64; 4] {
    let [bx, by] = r.base.coords();
    let c = r.corner_offsets(f);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in c {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    [bx + x0 - TOL, bx + x1 + TOL, by + y0 - TOL, by + y1 + TOL]
}

impl CellIndex {
    pub fn new(f: &ToralAutomorphism, rects: &[Rectangle]) -> Self {
        let boxes: Vec<[f64; 4]> = rects.iter().map(|r| bounding_box(f, r)).collect();
        let mean = if boxes.is_empty() {
            1.0
        } else {
            boxes.iter().map(|b| (b[1] - b[0]).max(b[3] - b[2])).sum::<f64>() / boxes.len() as f64
        };
        let g = ((1.0 / mean.max(1e-6)).floor() as usize).clamp(1, 512);
        let mut index = CellIndex { g, buckets: vec![Vec::new(); g * g] };
        for (k, b) in boxes.iter().enumerate() {
            for slot in index.slots(b) {
                index.buckets[slot].push(k as u32);
            }
        }
        index
    }

    fn slots(&self, b: &[f64; 4]) -> Vec<usize> {
        let g = self.g as i64;
        let gf = self.g as f64;
        let span = |lo: f64, hi: f64| -> (i64, i64) {
            let a = (lo * gf).floor() as i64;
            let z = (hi * gf).floor() as i64;
            if z - a + 1 >= g {
                (0, g - 1)
            } else {
                (a, z)
            }
        };
        let (i0, i1) = span(b[0], b[1]);
        let (j0, j1) = span(b[2], b[3]);
        let mut out = Vec::with_capacity(((i1 - i0 + 1) * (j1 - j0 + 1)) as usize);
        for j in j0..=j1 {
            for i in i0..=i1 {
                out.push((j.rem_euclid(g) * g + i.rem_euclid(g)) as usize);
            }
        }
        out
    }

    /// Rectangles whose bounding box may contain x.
    pub fn candidates(&self, x: &TorusPoint) -> &[u32] {
        let [px, py] = x.coords();
        let g = self.g as f64;
        let i = ((px * g) as usize).min(self.g - 1);
        let j = ((py * g) as usize).min(self.g - 1);
        &self.buckets[j * self.g + i]
    }

    /// Rectangles containing x (closed, tolerant), in increasing order.
    pub fn locate(&self, f: &ToralAutomorphism, rects: &[Rectangle], x: &TorusPoint) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .candidates(x)
            .iter()
            .map(|&k| k as usize)
            .filter(|&k| rects[k].contains(f, x))
            .collect();
        out.sort_unstable();
        out
    }

    /// Rectangles whose bounding box may meet the given box, deduplicated.
    pub fn query_box(&self, b: &[f64; 4]) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .slots(b)
            .into_iter()
            .flat_map(|s| self.buckets[s].iter().map(|&k| k as usize))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn query_rect(&self, f: &ToralAutomorphism, r: &Rectangle) -> Vec<usize> {
        self.query_box(&bounding_box(f, r))
    }
}
