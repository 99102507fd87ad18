//! Cells of the partition as faces of the cut arrangement.
//!
//! In the chart of T_j, the cut lines are the edges of every T_k meeting T_j.
//! The elementary boxes they bound lie inside or outside each such T_k, so a
//! box is owned by the smallest index of the rectangles containing it. An
//! owned box is then split further by the cuts of every other rectangle
//! containing it, which are all the lines the sets T_ik^n draw across it.

use super::refine::{neighbours, split_sets, Neighbour};
use super::{Cell, MarkovPartition};
use crate::partition_builder::cover::Cover;
use crate::rectangles::{Rectangle, TOL};
use crate::torus_model::{displacement_lossy, ToralAutomorphism};

const MERGE: f64 = 1e-12;

fn merged(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        match out.last() {
            Some(&y) if x - y <= MERGE => {}
            _ => out.push(x),
        }
    }
    out
}

/// Cut coordinates of T_i in its own chart.
fn cuts(ti: &Rectangle, nbs: &[Neighbour]) -> (Vec<f64>, Vec<f64>) {
    let mut us = vec![ti.iu.lo, ti.iu.hi];
    let mut ss = vec![ti.is.lo, ti.is.hi];
    for nb in nbs {
        let (a_u, a_s) = split_sets(ti, nb);
        if !a_u.is_empty() {
            us.extend([a_u.lo, a_u.hi]);
        }
        if !a_s.is_empty() {
            ss.extend([a_s.lo, a_s.hi]);
        }
    }
    (merged(us), merged(ss))
}

fn inside(v: &[f64], lo: f64, hi: f64) -> impl Iterator<Item = f64> + '_ {
    v.iter().copied().filter(move |&x| x > lo + MERGE && x < hi - MERGE)
}

pub fn build_partition(f: &ToralAutomorphism, cover: &Cover) -> MarkovPartition {
    let rects = &cover.rects;
    let nbs: Vec<Vec<Neighbour>> =
        (0..rects.len()).map(|j| neighbours(f, rects, &cover.index, j)).collect();
    let all_cuts: Vec<(Vec<f64>, Vec<f64>)> =
        (0..rects.len()).map(|i| cuts(&rects[i], &nbs[i])).collect();

    let mut cells = Vec::new();
    let mut dropped = 0;
    for (j, tj) in rects.iter().enumerate() {
        let (us, ss) = &all_cuts[j];
        for uw in us.windows(2) {
            for sw in ss.windows(2) {
                let (mu, ms) = (0.5 * (uw[0] + uw[1]), 0.5 * (sw[0] + sw[1]));
                let owners: Vec<&Neighbour> = nbs[j]
                    .iter()
                    .filter(|nb| nb.iu.lo < mu && mu < nb.iu.hi && nb.is.lo < ms && ms < nb.is.hi)
                    .collect();
                if owners.first().map(|nb| nb.k as usize) != Some(j) {
                    continue;
                }
                let mut cu = vec![uw[0], uw[1]];
                let mut cs = vec![sw[0], sw[1]];
                for nb in &owners[1..] {
                    let o = displacement_lossy(f, &tj.base, &rects[nb.k as usize].base);
                    let (iu_cuts, is_cuts) = &all_cuts[nb.k as usize];
                    let shifted_u: Vec<f64> = iu_cuts.iter().map(|x| x + o.du).collect();
                    let shifted_s: Vec<f64> = is_cuts.iter().map(|x| x + o.ds).collect();
                    cu.extend(inside(&shifted_u, uw[0], uw[1]));
                    cs.extend(inside(&shifted_s, sw[0], sw[1]));
                }
                let (cu, cs) = (merged(cu), merged(cs));
                let provenance: Vec<u32> = owners.iter().map(|nb| nb.k).collect();
                for a in cu.windows(2) {
                    for b in cs.windows(2) {
                        if a[1] - a[0] <= TOL || b[1] - b[0] <= TOL {
                            dropped += 1;
                            continue;
                        }
                        cells.push(Cell {
                            rect: Rectangle::closed(tj.base, [a[0], a[1]], [b[0], b[1]]),
                            cover: provenance.clone(),
                        });
                    }
                }
            }
        }
    }
    let mut p = MarkovPartition::new(f, cells);
    p.dropped = dropped;
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition_builder::cover::build_cover_at;
    use crate::partition_builder::CellIndex;
    use crate::torus_model::{make_automorphism, TorusPoint};

    #[test]
    fn cat_map_cells_per_node() {
        let f = make_automorphism([[2, 1], [1, 1]]).unwrap();
        let c = build_cover_at(&f, 0.05).unwrap();
        let p = build_partition(&f, &c);
        assert_eq!(p.cells.len(), 39 * 900);
        assert_eq!(p.dropped, 0);
        let area: f64 = p.cells.iter().map(|c| c.rect.area(&f)).sum();
        assert!((area - 1.0).abs() < 1e-9);
        assert!(p.diameter < 0.35 / 30.0);
    }

    #[test]
    fn disjoint_cover_is_kept() {
        // a cover that already tiles: four translates of one square cell
        let f = make_automorphism([[2, 1], [1, 1]]).unwrap();
        let mut c = build_cover_at(&f, 0.05).unwrap();
        let r = Rectangle::closed(TorusPoint::new(0.1, 0.1), [0.0, 0.01], [0.0, 0.01]);
        let s = Rectangle::closed(r.point(&f, 0.02, 0.0), [0.0, 0.01], [0.0, 0.01]);
        c.rects = vec![r, s];
        c.index = CellIndex::new(&f, &c.rects);
        let p = build_partition(&f, &c);
        assert_eq!(p.cells.len(), 2);
        assert_eq!(p.cells[0].rect, r);
    }

    #[test]
    fn duplicate_rectangles_dedupe() {
        let f = make_automorphism([[2, 1], [1, 1]]).unwrap();
        let mut c = build_cover_at(&f, 0.05).unwrap();
        let r = Rectangle::closed(TorusPoint::new(0.1, 0.1), [-0.01, 0.01], [-0.01, 0.01]);
        let q = Rectangle::closed(r.point(&f, 0.005, 0.005), [-0.01, 0.01], [-0.01, 0.01]);
        c.rects = vec![r, q];
        c.index = CellIndex::new(&f, &c.rects);
        let single = build_partition(&f, &c);
        c.rects = vec![r, q, r];
        c.index = CellIndex::new(&f, &c.rects);
        let double = build_partition(&f, &c);
        let key = |p: &MarkovPartition| {
            let mut v: Vec<String> = p.cells.iter().map(|c| format!("{:?}", c.rect)).collect();
            v.sort();
            v
        };
        assert_eq!(key(&single), key(&double));
    }
}
