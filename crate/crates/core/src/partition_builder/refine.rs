//! The four-way split of T_j against each overlapping T_k.

use serde::Serialize;

use super::cover::Cover;
use crate::rectangles::{BoxComplex, Interval, Rectangle};
use crate::torus_model::ToralAutomorphism;

/// (j, k, n) with n = 1..4 encoding whether the unstable and the stable fiber
/// of x in T_j meet T_k: (yes, yes), (yes, no), (no, yes), (no, no).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RefinedCellIndex {
    pub j: u32,
    pub k: u32,
    pub n: u8,
}

/// A neighbour T_k of T_j, described in the chart of T_j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbour {
    pub k: u32,
    pub iu: Interval,
    pub is: Interval,
}

/// All T_k whose closure meets T_j (T_j itself included), sorted by k.
pub fn neighbours(f: &ToralAutomorphism, rects: &[Rectangle], index: &super::CellIndex, j: usize) -> Vec<Neighbour> {
    let tj = &rects[j];
    index
        .query_rect(f, tj)
        .into_iter()
        .filter_map(|k| {
            let r = rects[k].rebase(f, &tj.base);
            (r.iu.meets(&tj.iu) && r.is.meets(&tj.is)).then_some(Neighbour { k: k as u32, iu: r.iu, is: r.is })
        })
        .collect()
}

/// The two projections that decide the split of T_j by T_k: the u-values
/// whose stable fiber meets T_k and the s-values whose unstable fiber meets
/// T_k.
pub fn split_sets(tj: &Rectangle, nb: &Neighbour) -> (Interval, Interval) {
    let empty = Interval::open(0.0, 0.0);
    let a_u = if tj.is.meets(&nb.is) { tj.iu.intersect(&nb.iu) } else { empty };
    let a_s = if tj.iu.meets(&nb.iu) { tj.is.intersect(&nb.is) } else { empty };
    (a_u, a_s)
}

/// T_jk^1..T_jk^4 for every j and every neighbour k, empty pieces omitted.
pub fn refine_cells(f: &ToralAutomorphism, cover: &Cover) -> Vec<(RefinedCellIndex, BoxComplex)> {
    let mut out = Vec::new();
    for j in 0..cover.rects.len() {
        for nb in neighbours(f, &cover.rects, &cover.index, j) {
            out.extend(refine_pair(&cover.rects[j], j as u32, &nb));
        }
    }
    out
}

pub fn refine_pair(tj: &Rectangle, j: u32, nb: &Neighbour) -> Vec<(RefinedCellIndex, BoxComplex)> {
    let (a_u, a_s) = split_sets(tj, nb);
    let not = |full: &Interval, a: &Interval| if a.is_empty() { vec![*full] } else { full.minus(a) };
    let (rest_u, rest_s) = (not(&tj.iu, &a_u), not(&tj.is, &a_s));
    let mut out = Vec::new();
    let mut emit = |n: u8, us: &[Interval], ss: &[Interval]| {
        let mut c = BoxComplex::new(tj.base);
        for u in us {
            for s in ss {
                c.push(*u, *s);
            }
        }
        c.canonicalize();
        if !c.is_empty() {
            out.push((RefinedCellIndex { j, k: nb.k, n }, c));
        }
    };
    let one = |a: &Interval| if a.is_empty() { vec![] } else { vec![*a] };
    emit(1, &one(&a_u), &one(&a_s));
    emit(2, &rest_u, &one(&a_s));
    emit(3, &one(&a_u), &rest_s);
    emit(4, &rest_u, &rest_s);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition_builder::cover::build_cover_at;
    use crate::rectangles::intersect;
    use crate::torus_model::{make_automorphism, TorusPoint};

    #[test]
    fn self_split_is_trivial() {
        let r = Rectangle::closed(TorusPoint::new(0.2, 0.2), [-0.01, 0.01], [-0.02, 0.02]);
        let nb = Neighbour { k: 0, iu: r.iu, is: r.is };
        let cells = refine_pair(&r, 0, &nb);
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].0.n, 1);
        assert_eq!(cells[0].1.boxes[0].u, r.iu);
    }

    #[test]
    fn disjoint_neighbour_gives_fourth_piece() {
        let r = Rectangle::closed(TorusPoint::new(0.2, 0.2), [-0.01, 0.01], [-0.02, 0.02]);
        let nb = Neighbour { k: 1, iu: Interval::closed(0.5, 0.6), is: Interval::closed(0.5, 0.6) };
        let cells = refine_pair(&r, 0, &nb);
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].0.n, 4);
        assert!(cells[0].1.boxes[0].u.approx_eq(&r.iu) && cells[0].1.boxes[0].s.approx_eq(&r.is));
    }

    #[test]
    fn areas_are_conserved() {
        let f = make_automorphism([[2, 1], [1, 1]]).unwrap();
        let c = build_cover_at(&f, 0.05).unwrap();
        let cells = refine_cells(&f, &c);
        let tj_area = c.rects[0].area(&f);
        let mut by_pair = std::collections::BTreeMap::<(u32, u32), f64>::new();
        for (ix, bc) in &cells {
            *by_pair.entry((ix.j, ix.k)).or_default() += bc.area(&f);
            if ix.n == 1 {
                // the first piece is T_j ∩ T_k
                let inter = intersect(&f, &c.rects[ix.j as usize], &c.rects[ix.k as usize]).unwrap();
                assert!((inter.area(&f) - bc.area(&f)).abs() < 1e-15);
            }
        }
        assert!(by_pair.len() > c.rects.len());
        for a in by_pair.values() {
            assert!((a - tj_area).abs() < 1e-12);
        }
    }
}
