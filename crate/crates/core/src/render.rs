//! DOT and SVG renderings of a coloured finite window.

use std::fmt::Write as _;

use rustc_hash::FxHashMap;

use crate::colouring::Colouring;
use crate::product::{PEdge, PVertex};
use crate::verifier::Window;

const PALETTE: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn palette(colour: usize) -> &'static str {
    PALETTE[colour % PALETTE.len()]
}

/// Vertices with integer coordinates and coloured edges between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Drawing {
    pub vertices: Vec<(String, Vec<i64>)>,
    pub edges: Vec<(usize, usize, usize)>,
}

impl Drawing {
    /// `G[W]` coloured by `c`; the first two coordinates span the plane.
    pub fn from_window(c: &Colouring, w: &Window) -> Drawing {
        let spec = c.spec();
        let index: FxHashMap<_, usize> = w.vertices().iter().enumerate().map(|(k, v)| (v.clone(), k)).collect();
        let vertices = w
            .vertices()
            .iter()
            .map(|v| (v.to_string(), v.coords().to_vec()))
            .collect();
        let edges = w
            .edges(c.gens())
            .into_iter()
            .map(|e| {
                let head = spec.add(&e.base, c.gens().get(e.gen));
                (index[&e.base], index[&head], c.colour_of(&e))
            })
            .collect();
        Drawing { vertices, edges }
    }

    /// A product window; labels `(g, h)` are placed at `(g, h)`.
    pub fn from_product(lo: u64, hi: u64, edges: &[(PEdge, usize)]) -> Drawing {
        let side = (hi - lo + 1) as usize;
        let index = |v: PVertex| (v.0 - lo) as usize * side + (v.1 - lo) as usize;
        let vertices = (lo..=hi)
            .flat_map(|g| (lo..=hi).map(move |h| PVertex(g, h)))
            .map(|v| (v.to_string(), vec![v.0 as i64, v.1 as i64]))
            .collect();
        let edges = edges
            .iter()
            .map(|(e, c)| {
                let (a, b) = e.endpoints();
                (index(a), index(b), *c)
            })
            .collect();
        Drawing { vertices, edges }
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph window {\n  node [shape=point];\n");
        for (name, _) in &self.vertices {
            writeln!(s, "  \"{name}\";").expect("string write");
        }
        for &(a, b, c) in &self.edges {
            writeln!(
                s,
                "  \"{}\" -- \"{}\" [colour={}, color=\"{}\"];",
                self.vertices[a].0,
                self.vertices[b].0,
                c + 1,
                palette(c)
            )
            .expect("string write");
        }
        s.push_str("}\n");
        s
    }

    /// Sheet number of every vertex from its coordinates past the second.
    fn sheets(&self) -> (Vec<usize>, usize) {
        let dim = self.vertices.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
        let mut ranges = Vec::new();
        for j in 2..dim {
            let vals = self.vertices.iter().map(|(_, c)| c[j]);
            let lo = vals.clone().min().unwrap_or(0);
            let hi = vals.max().unwrap_or(0);
            ranges.push((lo, (hi - lo + 1) as usize));
        }
        let count = ranges.iter().map(|r| r.1).product::<usize>().max(1);
        let sheet = self
            .vertices
            .iter()
            .map(|(_, c)| {
                ranges
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (k, &(lo, size))| acc * size + (c[k + 2] - lo) as usize)
            })
            .collect();
        (sheet, count)
    }

    /// Free coordinates 1 and 2 as the plane; further coordinates become
    /// copies of the plane shifted diagonally by a fraction of a cell.
    pub fn to_svg(&self) -> String {
        const CELL: f64 = 40.0;
        let (sheet, count) = self.sheets();
        let shift = CELL * 0.6 / count as f64;
        let coord = |c: &[i64], j: usize| c.get(j).copied().unwrap_or(0);
        let x0 = self.vertices.iter().map(|(_, c)| coord(c, 0)).min().unwrap_or(0);
        let x1 = self.vertices.iter().map(|(_, c)| coord(c, 0)).max().unwrap_or(0);
        let y0 = self.vertices.iter().map(|(_, c)| coord(c, 1)).min().unwrap_or(0);
        let y1 = self.vertices.iter().map(|(_, c)| coord(c, 1)).max().unwrap_or(0);
        let place: Vec<(f64, f64)> = self
            .vertices
            .iter()
            .zip(&sheet)
            .map(|((_, c), &k)| {
                let off = k as f64 * shift;
                (
                    CELL * (coord(c, 0) - x0) as f64 + CELL / 2.0 + off,
                    CELL * (y1 - coord(c, 1)) as f64 + CELL / 2.0 + off,
                )
            })
            .collect();
        let width = CELL * (x1 - x0 + 1) as f64 + CELL;
        let height = CELL * (y1 - y0 + 1) as f64 + CELL;
        let mut s = String::new();
        writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
        )
        .expect("string write");
        for &(a, b, c) in &self.edges {
            let ((xa, ya), (xb, yb)) = (place[a], place[b]);
            writeln!(
                s,
                "  <line x1=\"{xa:.1}\" y1=\"{ya:.1}\" x2=\"{xb:.1}\" y2=\"{yb:.1}\" stroke=\"{}\" stroke-width=\"2\" data-colour=\"{}\"/>",
                palette(c),
                c + 1
            )
            .expect("string write");
        }
        for ((name, _), (x, y)) in self.vertices.iter().zip(&place) {
            writeln!(
                s,
                "  <circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"2.5\" fill=\"black\"><title>{name}</title></circle>"
            )
            .expect("string write");
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GeneratorSet, GroupSpec};

    #[test]
    fn dot_lists_every_window_edge() {
        let c = Colouring::standard(GeneratorSet::units(GroupSpec::free(2)).unwrap());
        let w = Window::cube(c.spec(), -1, 1);
        let d = Drawing::from_window(&c, &w).to_dot();
        assert_eq!(d.matches(" -- ").count(), 12);
        assert_eq!(d.matches("colour=2").count(), 6);
        assert!(d.contains("\"(-1,-1)\" -- \"(0,-1)\" [colour=1"));
    }

    #[test]
    fn torsion_sheets_are_offset() {
        let spec: GroupSpec = "Z^2 + Z_3".parse().unwrap();
        let gens = GeneratorSet::parse(spec, "(1,0,0) (0,1,0) (1,1,1)").unwrap();
        let c = Colouring::standard(gens);
        let w = Window::cube(c.spec(), 0, 1);
        let drawing = Drawing::from_window(&c, &w);
        assert_eq!(drawing.sheets().1, 3);
        let svg = drawing.to_svg();
        assert_eq!(svg.matches("<circle").count(), 12);
        let xs: std::collections::BTreeSet<&str> = svg
            .lines()
            .filter(|l| l.contains("<circle"))
            .map(|l| l.split('"').nth(1).unwrap())
            .collect();
        assert_eq!(xs.len(), 6);
    }
}
