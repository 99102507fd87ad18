//! Partition picture: cells as parallelograms in the unit square.

use std::fmt::Write as _;

use toral_markov::partition_builder::{polygons, MarkovPartition};
use toral_markov::ToralAutomorphism;

const SIZE: f64 = 800.0;

/// Hue spread by the golden angle so neighbouring indices differ.
fn colour(k: usize) -> String {
    let hue = (k as f64 * 137.507_764) % 360.0;
    format!("hsl({hue:.1},55%,62%)")
}

pub fn render(f: &ToralAutomorphism, p: &MarkovPartition) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<clipPath id="torus"><rect width="{SIZE}" height="{SIZE}"/></clipPath>"#);
    let _ = writeln!(s, r##"<g clip-path="url(#torus)" stroke="#222" stroke-width="0.3">"##);
    for (k, poly) in polygons(f, p) {
        let owner = p.cells[k].cover.first().map_or(k, |&c| c as usize);
        let pts: Vec<String> = poly
            .iter()
            .map(|v| format!("{:.2},{:.2}", v[0] * SIZE, (1.0 - v[1]) * SIZE))
            .collect();
        let _ = writeln!(s, r#"<polygon points="{}" fill="{}"/>"#, pts.join(" "), colour(owner));
    }
    s.push_str("</g>\n</svg>\n");
    s
}
