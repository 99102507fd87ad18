//! Cover, refinement, and the resulting Markov partition.

pub mod arrangement;
pub mod cover;
pub mod index;
pub mod refine;
pub mod verify;

use serde::{Deserialize, Serialize};

pub use arrangement::build_partition;
pub use cover::{
    build_cover, build_cover_at, check_coverage, cover_markov_check, feasible_budget,
    shadow_cross_check, Cover, CoverError, CoverMarkovReport, ShadowCheck,
};
pub use index::CellIndex;
pub use refine::{refine_cells, RefinedCellIndex};
pub use verify::{admissible_pairs, validate_partition, verify_markov, MarkovReport, ValidityReport};

use crate::rectangles::Rectangle;
use crate::torus_model::{ToralAutomorphism, TorusPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    #[serde(flatten)]
    pub rect: Rectangle,
    /// Indices of the cover rectangles containing the cell.
    #[serde(default)]
    pub cover: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct MarkovPartition {
    pub cells: Vec<Cell>,
    pub diameter: f64,
    /// Zero-area faces discarded by the builder.
    pub dropped: usize,
    pub index: CellIndex,
    rects: Vec<Rectangle>,
}

impl MarkovPartition {
    pub fn new(f: &ToralAutomorphism, cells: Vec<Cell>) -> Self {
        let rects: Vec<Rectangle> = cells.iter().map(|c| c.rect).collect();
        let diameter = rects.iter().map(|r| r.diameter(f)).fold(0.0, f64::max);
        let index = CellIndex::new(f, &rects);
        MarkovPartition { cells, diameter, dropped: 0, index, rects }
    }

    pub fn from_rects(f: &ToralAutomorphism, rects: Vec<Rectangle>) -> Self {
        MarkovPartition::new(f, rects.into_iter().map(|rect| Cell { rect, cover: Vec::new() }).collect())
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn rects(&self) -> &[Rectangle] {
        &self.rects
    }

    pub fn rect(&self, i: usize) -> &Rectangle {
        &self.rects[i]
    }

    /// Cells whose closure contains x.
    pub fn locate(&self, f: &ToralAutomorphism, x: &TorusPoint) -> Vec<usize> {
        self.index.locate(f, &self.rects, x)
    }

    /// The cell whose interior contains x, if any.
    pub fn locate_interior(&self, f: &ToralAutomorphism, x: &TorusPoint) -> Option<usize> {
        let hits = self.locate(f, x);
        match hits.as_slice() {
            [i] if self.rects[*i].contains_interior(f, x) => Some(*i),
            _ => None,
        }
    }

    pub fn total_area(&self, f: &ToralAutomorphism) -> f64 {
        self.rects.iter().map(|r| r.area(f)).sum()
    }

    /// Cells overlapping `r` with positive area.
    pub fn overlapping(&self, f: &ToralAutomorphism, r: &Rectangle) -> Vec<(usize, Rectangle)> {
        self.index
            .query_rect(f, r)
            .into_iter()
            .filter_map(|k| {
                let c = self.rects[k].rebase(f, &r.base);
                (c.iu.overlap(&r.iu) > 0.0 && c.is.overlap(&r.is) > 0.0).then_some((k, c))
            })
            .collect()
    }
}

/// Cartesian corners of every cell, with extra copies translated by ±1
/// wherever a cell sticks out of the unit square. Each entry is
/// (cell index, corners).
pub fn polygons(f: &ToralAutomorphism, p: &MarkovPartition) -> Vec<(usize, [[f64; 2]; 4])> {
    let mut out = Vec::new();
    for (k, r) in p.rects().iter().enumerate() {
        out.extend(rect_polygons(f, r).into_iter().map(|c| (k, c)));
    }
    out
}

/// Corners of one rectangle as drawn in the unit square, plus wrapped copies.
pub fn rect_polygons(f: &ToralAutomorphism, r: &Rectangle) -> Vec<[[f64; 2]; 4]> {
    let [bx, by] = r.base.coords();
    let c = r.corner_offsets(f).map(|v| [bx + v[0], by + v[1]]);
    let span = |i: usize| {
        let lo = c.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min);
        let hi = c.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max);
        let mut shifts = vec![0.0];
        if lo < 0.0 {
            shifts.push(1.0);
        }
        if hi > 1.0 {
            shifts.push(-1.0);
        }
        shifts
    };
    let mut out = Vec::new();
    for dx in span(0) {
        for dy in span(1) {
            out.push(c.map(|v| [v[0] + dx, v[1] + dy]));
        }
    }
    out
}

/// H(x): every (j, k, n) with x ∈ T_jk^n, for a point x of a cover.
pub fn provenance(f: &ToralAutomorphism, cover: &Cover, x: &TorusPoint) -> Vec<RefinedCellIndex> {
    let mut out = Vec::new();
    for j in cover.index.locate(f, &cover.rects, x) {
        for nb in refine::neighbours(f, &cover.rects, &cover.index, j) {
            for (ix, bc) in refine::refine_pair(&cover.rects[j], j as u32, &nb) {
                if bc.contains(f, x) {
                    out.push(ix);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus_model::make_automorphism;

    #[test]
    fn provenance_of_a_cell_is_shared() {
        let f = make_automorphism([[2, 1], [1, 1]]).unwrap();
        let cover = build_cover_at(&f, 0.05).unwrap();
        let p = build_partition(&f, &cover);
        for cell in p.cells.iter().step_by(997) {
            let r = &cell.rect;
            // two interior points of one cell have the same H
            let a = r.point(&f, r.iu.lo + 0.3 * r.iu.width(), r.is.lo + 0.6 * r.is.width());
            let b = r.point(&f, r.iu.lo + 0.8 * r.iu.width(), r.is.lo + 0.1 * r.is.width());
            let (ha, hb) = (provenance(&f, &cover, &a), provenance(&f, &cover, &b));
            assert!(!ha.is_empty());
            assert_eq!(ha, hb);
            let js: Vec<u32> = {
                let mut v: Vec<u32> = ha.iter().map(|h| h.j).collect();
                v.dedup();
                v
            };
            assert_eq!(js, cell.cover);
        }
    }
}
