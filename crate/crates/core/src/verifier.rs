//! Brute-force checks on finite windows, written against the colouring's
//! lookup only. Nothing here walks components with the tracer except where a
//! double-ray certificate is the claim being checked.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::{self, Display};
use std::hash::Hash;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::colouring::{Colouring, EdgeRef};
use crate::error::{Error, Result};
use crate::group::{GeneratorSet, GroupElement, GroupSpec};
use crate::trace::trace;

/// `{center + n·g_a + m·g_b : −N ≤ n ≤ N, −M < m ≤ M}`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridBox {
    pub center: GroupElement,
    pub gens: (usize, usize),
    pub n: i64,
    pub m: i64,
}

/// A finite vertex set of a Cayley graph.
#[derive(Debug, Clone)]
pub struct Window {
    label: String,
    vertices: Vec<GroupElement>,
    set: FxHashSet<GroupElement>,
}

impl Window {
    pub fn from_vertices(label: impl Into<String>, vs: impl IntoIterator<Item = GroupElement>) -> Self {
        let mut vertices: Vec<GroupElement> = vs.into_iter().collect();
        vertices.sort();
        vertices.dedup();
        let set = vertices.iter().cloned().collect();
        Window {
            label: label.into(),
            vertices,
            set,
        }
    }

    pub fn grid(gens: &GeneratorSet, g: &GridBox) -> Self {
        let spec = gens.spec();
        let (ga, gb) = (gens.get(g.gens.0), gens.get(g.gens.1));
        let vs = (-g.n..=g.n)
            .flat_map(|a| ((1 - g.m)..=g.m).map(move |b| spec.add_scaled(&spec.add_scaled(&g.center, a, ga), b, gb)));
        Window::from_vertices(
            format!(
                "grid({}, g{}, g{}, {}, {})",
                g.center,
                g.gens.0 + 1,
                g.gens.1 + 1,
                g.n,
                g.m
            ),
            vs,
        )
    }

    /// Every element whose free coordinates lie in `lo..=hi`, all torsion values included.
    pub fn cube(spec: &GroupSpec, lo: i64, hi: i64) -> Self {
        let mut coords: Vec<Vec<i64>> = vec![Vec::new()];
        for j in 0..spec.dim() {
            let range: Vec<i64> = if j < spec.free_rank() {
                (lo..=hi).collect()
            } else {
                (0..spec.torsion_orders()[j - spec.free_rank()]).collect()
            };
            coords = coords
                .into_iter()
                .flat_map(|c| {
                    range.iter().map(move |&x| {
                        let mut d = c.clone();
                        d.push(x);
                        d
                    })
                })
                .collect();
        }
        let vs = coords.iter().map(|c| spec.normalize(c).expect("cube coordinates"));
        Window::from_vertices(format!("[{lo},{hi}]^{}", spec.free_rank()), vs)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn vertices(&self) -> &[GroupElement] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: &GroupElement) -> bool {
        self.set.contains(v)
    }

    /// Edges of `G[W]`, sorted.
    pub fn edges(&self, gens: &GeneratorSet) -> Vec<EdgeRef> {
        let spec = gens.spec();
        let mut out = Vec::new();
        for v in &self.vertices {
            for (i, g) in gens.gens().iter().enumerate() {
                if self.contains(&spec.add(v, g)) {
                    out.push(EdgeRef::new(v.clone(), i));
                }
            }
        }
        out.sort();
        out
    }

    /// Every vertex within `margin` steps of `v` lies in the window.
    pub fn is_deep(&self, gens: &GeneratorSet, v: &GroupElement, margin: usize) -> bool {
        let spec = gens.spec();
        let mut seen: FxHashSet<GroupElement> = FxHashSet::default();
        let mut frontier = vec![v.clone()];
        seen.insert(v.clone());
        for _ in 0..margin {
            let mut next = Vec::new();
            for x in &frontier {
                for g in gens.gens() {
                    for y in [spec.add(x, g), spec.sub(x, g)] {
                        if !self.contains(&y) {
                            return false;
                        }
                        if seen.insert(y.clone()) {
                            next.push(y);
                        }
                    }
                }
            }
            frontier = next;
        }
        self.contains(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Path,
    Cycle,
}

/// One component of a colour class restricted to a window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowComponent<V> {
    pub colour: usize,
    pub kind: WindowKind,
    /// In walk order; a cycle does not repeat its first vertex.
    pub vertices: Vec<V>,
}

/// Components of a coloured edge list, found by breadth-first search.
///
/// `edges` lists `(u, v, colour)` triples; only those of `colour` count.
pub fn components_of<V>(vertices: &[V], edges: &[(V, V, usize)], colour: usize) -> Vec<WindowComponent<V>>
where
    V: Clone + Eq + Hash + Ord,
{
    let mut adj: FxHashMap<&V, Vec<&V>> = FxHashMap::default();
    for (u, v, c) in edges {
        if *c == colour {
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
        }
    }
    let mut seen: FxHashSet<&V> = FxHashSet::default();
    let mut out = Vec::new();
    for start in vertices {
        if seen.contains(start) {
            continue;
        }
        seen.insert(start);
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in adj.get(x).map(Vec::as_slice).unwrap_or(&[]) {
                if seen.insert(y) {
                    comp.push(y);
                    queue.push_back(y);
                }
            }
        }
        let degree = |x: &V| adj.get(x).map_or(0, Vec::len);
        let closed = comp.len() > 2 && comp.iter().all(|x| degree(x) == 2);
        // walk order, starting from an end when there is one
        let first = comp.iter().copied().find(|x| degree(x) < 2).unwrap_or(comp[0]);
        let mut order = vec![first.clone()];
        let mut prev: Option<&V> = None;
        let mut cur = first;
        let mut walked: FxHashSet<&V> = FxHashSet::from_iter([first]);
        loop {
            let next = adj
                .get(cur)
                .into_iter()
                .flatten()
                .copied()
                .find(|y| Some(*y) != prev && !walked.contains(y));
            match next {
                Some(y) => {
                    walked.insert(y);
                    order.push(y.clone());
                    prev = Some(cur);
                    cur = y;
                }
                None => break,
            }
        }
        if order.len() != comp.len() {
            // max degree above 2; keep BFS order
            order = comp.iter().map(|x| (*x).clone()).collect();
            order.sort();
        }
        out.push(WindowComponent {
            colour,
            kind: if closed { WindowKind::Cycle } else { WindowKind::Path },
            vertices: order,
        });
    }
    out
}

/// Components of colour `colour` among the edges with both ends in `w`.
pub fn brute_force_components(c: &Colouring, w: &Window, colour: usize) -> Vec<WindowComponent<GroupElement>> {
    let edges: Vec<(GroupElement, GroupElement, usize)> = w
        .edges(c.gens())
        .into_iter()
        .map(|e| {
            let head = c.head(&e);
            let k = c.colour_of(&e);
            (e.base, head, k)
        })
        .collect();
    components_of(w.vertices(), &edges, colour)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub check: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ColourSummary {
    /// 1-based
    pub colour: usize,
    /// degree inside the window → number of vertices
    pub degree_histogram: BTreeMap<usize, usize>,
    pub paths: usize,
    pub cycles: usize,
    /// Components not fully decided inside the window.
    pub inconclusive: usize,
    /// Edges of this colour with exactly one end in the window.
    pub boundary_edges: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct WindowReport {
    pub window: String,
    pub colours: Vec<ColourSummary>,
    pub components: Vec<WindowComponent<String>>,
    pub violations: Vec<Violation>,
}

impl WindowReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn flag(&mut self, check: &str, detail: impl Into<String>) {
        self.violations.push(Violation {
            check: check.to_string(),
            detail: detail.into(),
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl Display for WindowReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "window {}", self.window)?;
        for s in &self.colours {
            let hist: Vec<String> = s.degree_histogram.iter().map(|(d, n)| format!("{d}:{n}")).collect();
            writeln!(
                f,
                "colour {} degrees {} paths {} cycles {} inconclusive {} boundary {}",
                s.colour,
                hist.join(","),
                s.paths,
                s.cycles,
                s.inconclusive,
                s.boundary_edges
            )?;
        }
        for v in &self.violations {
            writeln!(f, "violation {}: {}", v.check, v.detail)?;
        }
        write!(f, "{}", if self.is_clean() { "ok" } else { "FAILED" })
    }
}

const SUMMARY_LIMIT: usize = 250_000;

/// Free-coordinate box around `vs`, grown by `margin`, as a window.
fn hull_window(spec: &GroupSpec, vs: &[&GroupElement], margin: i64) -> Option<Window> {
    let n = spec.free_rank();
    let first = vs.first()?;
    let mut lo: Vec<i64> = first.0[..n].to_vec();
    let mut hi = lo.clone();
    for v in vs {
        for j in 0..n {
            lo[j] = lo[j].min(v.0[j]);
            hi[j] = hi[j].max(v.0[j]);
        }
    }
    let mut size = spec.torsion_size() as u128;
    for j in 0..n {
        size *= (hi[j] - lo[j] + 1 + 2 * margin) as u128;
    }
    if size > SUMMARY_LIMIT as u128 {
        return None;
    }
    let mut coords: Vec<Vec<i64>> = vec![Vec::new()];
    for j in 0..spec.dim() {
        let range: Vec<i64> = if j < n {
            (lo[j] - margin..=hi[j] + margin).collect()
        } else {
            (0..spec.torsion_orders()[j - n]).collect()
        };
        coords = coords
            .into_iter()
            .flat_map(|c| {
                range.iter().map(move |&x| {
                    let mut d = c.clone();
                    d.push(x);
                    d
                })
            })
            .collect();
    }
    let label = format!("hull {lo:?}..{hi:?} + {margin}");
    Some(Window::from_vertices(
        label,
        coords.iter().map(|c| spec.normalize(c).expect("hull")),
    ))
}

/// [`summarize_window`] on the box around every exceptional vertex, grown
/// by 3 so that each one sits at depth 2.
pub fn verify_colouring(c: &Colouring) -> WindowReport {
    let spec = c.spec();
    let mut vs: Vec<&GroupElement> = c.exceptional_vertices().collect();
    vs.sort();
    if vs.is_empty() {
        return summarize_window(c, &Window::cube(spec, -2, 2));
    }
    match hull_window(spec, &vs, 3) {
        Some(w) => summarize_window(c, &w),
        None => {
            let mut report = WindowReport {
                window: "exceptional hull".into(),
                ..Default::default()
            };
            report.flag("size", format!("exceptional hull exceeds {SUMMARY_LIMIT} vertices"));
            report
        }
    }
}

/// Degree histograms, component counts and oracle agreement for every colour
/// of `c` on `w`. Path components are conclusive only when `w` holds every
/// exceptional endpoint at depth 2.
pub fn summarize_window(c: &Colouring, w: &Window) -> WindowReport {
    let gens = c.gens();
    let mut report = WindowReport {
        window: w.label().to_string(),
        ..Default::default()
    };
    let deep = c.exceptional_vertices().all(|v| w.is_deep(gens, v, 2));
    for colour in 0..c.colours() {
        let comps = brute_force_components(c, w, colour);
        let mut s = ColourSummary {
            colour: colour + 1,
            ..Default::default()
        };
        for v in w.vertices() {
            let d = c
                .incident_edges(v, colour)
                .iter()
                .filter(|e| w.contains(&e.base) && w.contains(&c.head(e)))
                .count();
            *s.degree_histogram.entry(d).or_default() += 1;
            let full = c.incident_edges(v, colour).len();
            if full != 2 {
                report.flag("2-regular", format!("{v} has {full} edges of colour {}", colour + 1));
            }
            s.boundary_edges += full - d;
        }
        for comp in &comps {
            match comp.kind {
                WindowKind::Cycle => {
                    s.cycles += 1;
                    match trace(c, &comp.vertices[0], colour, None) {
                        Ok(t) if t.is_cycle() && t.vertices.len() == comp.vertices.len() + 1 => {}
                        Ok(_) => report.flag(
                            "oracle",
                            format!("window cycle at {} traced differently", comp.vertices[0]),
                        ),
                        Err(e) => report.flag("trace", e.to_string()),
                    }
                }
                WindowKind::Path => {
                    s.paths += 1;
                    if !deep {
                        s.inconclusive += 1;
                        continue;
                    }
                    match trace(c, &comp.vertices[0], colour, None) {
                        Ok(t) if t.is_double_ray() => {}
                        Ok(_) => report.flag(
                            "oracle",
                            format!("window path at {} traced as a cycle", comp.vertices[0]),
                        ),
                        Err(e) => report.flag("trace", e.to_string()),
                    }
                }
            }
        }
        report.colours.push(s);
        report.components.extend(comps.into_iter().map(|comp| WindowComponent {
            colour: comp.colour + 1,
            kind: comp.kind,
            vertices: comp.vertices.iter().map(|v| v.to_string()).collect(),
        }));
    }
    report
}

/// Re-checks a covering run: (a) agreement on `E(G[X])`, (b) one certified
/// double-ray of colour `colour` through all of `X`, (c) every component
/// touching a changed edge is a double-ray, (d) the result is a canonical
/// finite overlay that is 2-regular in every colour.
pub fn verify_covering(before: &Colouring, after: &Colouring, xs: &[GroupElement], colour: usize) -> WindowReport {
    let gens = after.gens();
    let spec = after.spec();
    let inside: FxHashSet<&GroupElement> = xs.iter().collect();
    let mut report = WindowReport::default();

    // (a)
    for x in xs {
        for (i, g) in gens.gens().iter().enumerate() {
            if inside.contains(&spec.add(x, g)) {
                let e = EdgeRef::new(x.clone(), i);
                if before.colour_of(&e) != after.colour_of(&e) {
                    report.flag("(a)", format!("edge {} gen {} inside X changed colour", x, i + 1));
                }
            }
        }
    }

    // (b)
    if let Some(x0) = xs.first() {
        match trace(after, x0, colour, None) {
            Ok(ray) if ray.is_double_ray() => {
                let on: FxHashSet<&GroupElement> = ray.vertices.iter().collect();
                for x in xs {
                    if !on.contains(x) && ray.position(after, x).is_none() {
                        report.flag("(b)", format!("{x} is not on the double-ray through {x0}"));
                    }
                }
            }
            Ok(_) => report.flag(
                "(b)",
                format!("colour {} component at {x0} is a finite cycle", colour + 1),
            ),
            Err(e) => report.flag("(b)", e.to_string()),
        }
    }

    // (c)
    let mut changed: Vec<EdgeRef> = after
        .exceptional()
        .into_iter()
        .chain(before.exceptional())
        .map(|(e, _)| e)
        .filter(|e| before.colour_of(e) != after.colour_of(e))
        .collect();
    changed.sort();
    changed.dedup();
    let mut done: Vec<FxHashSet<GroupElement>> = vec![FxHashSet::default(); after.colours()];
    for e in &changed {
        for v in [e.base.clone(), after.head(e)] {
            for (k, seen) in done.iter_mut().enumerate() {
                if seen.contains(&v) {
                    continue;
                }
                match trace(after, &v, k, None) {
                    Ok(t) => {
                        if t.is_cycle() {
                            report.flag("(c)", format!("colour {} component at {v} is a finite cycle", k + 1));
                        }
                        seen.extend(t.vertices);
                    }
                    Err(err) => report.flag("(c)", err.to_string()),
                }
            }
        }
    }

    // (d)
    for (e, k) in after.exceptional() {
        if k == e.gen {
            report.flag(
                "(d)",
                format!("entry {} gen {} stores its standard colour", e.base, e.gen + 1),
            );
        }
    }
    for v in after.exceptional_vertices() {
        for k in 0..after.colours() {
            let d = after.incident_edges(v, k).len();
            if d != 2 {
                report.flag("(d)", format!("{v} has {d} edges of colour {}", k + 1));
            }
        }
    }

    // oracle agreement around X
    let hull: Vec<&GroupElement> = xs.iter().collect();
    match hull_window(spec, &hull, 2) {
        Some(w) => {
            let summary = summarize_window(after, &w);
            report.window = summary.window;
            report.colours = summary.colours;
            report.violations.extend(summary.violations);
        }
        None => report.window = "none (X too large to summarize)".into(),
    }
    report
}

/// Checks a finite coloured edge list against the window's edge set and the
/// current paths.
///
/// * every edge of `expected` carries exactly one colour below `colours`;
/// * every colour class has maximum degree 2 and no cycle;
/// * each path in `paths` uses only its own colour on window edges, the paths
///   are pairwise edge-disjoint, and a path marked as covering meets every
///   window vertex.
pub fn check_window<V>(
    label: &str,
    vertices: &[V],
    expected: &[(V, V)],
    coloured: &[(V, V, usize)],
    colours: usize,
    paths: &[(usize, &[V], bool)],
) -> WindowReport
where
    V: Clone + Eq + Hash + Ord + Display,
{
    let mut report = WindowReport {
        window: label.to_string(),
        ..Default::default()
    };
    let key = |a: &V, b: &V| {
        if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        }
    };
    let mut colour_of: FxHashMap<(V, V), usize> = FxHashMap::default();
    for (a, b, c) in coloured {
        if *c >= colours {
            report.flag("colour", format!("edge {a}-{b} has colour {} out of range", c + 1));
        }
        if colour_of.insert(key(a, b), *c).is_some() {
            report.flag("one colour", format!("edge {a}-{b} is listed twice"));
        }
    }
    let wanted: FxHashSet<(V, V)> = expected.iter().map(|(a, b)| key(a, b)).collect();
    for e in &wanted {
        if !colour_of.contains_key(e) {
            report.flag("one colour", format!("edge {}-{} is uncoloured", e.0, e.1));
        }
    }
    for e in colour_of.keys() {
        if !wanted.contains(e) {
            report.flag("one colour", format!("edge {}-{} is not a window edge", e.0, e.1));
        }
    }

    for colour in 0..colours {
        let comps = components_of(vertices, coloured, colour);
        let mut s = ColourSummary {
            colour: colour + 1,
            ..Default::default()
        };
        let mut degree: FxHashMap<&V, usize> = FxHashMap::default();
        for (a, b, c) in coloured {
            if *c == colour {
                *degree.entry(a).or_default() += 1;
                *degree.entry(b).or_default() += 1;
            }
        }
        for v in vertices {
            let d = degree.get(v).copied().unwrap_or(0);
            *s.degree_histogram.entry(d).or_default() += 1;
            if d > 2 {
                report.flag("degree", format!("{v} has {d} window edges of colour {}", colour + 1));
            }
        }
        for comp in &comps {
            match comp.kind {
                WindowKind::Cycle => {
                    s.cycles += 1;
                    report.flag(
                        "cycle",
                        format!("colour {} closes a cycle through {}", colour + 1, comp.vertices[0]),
                    );
                }
                WindowKind::Path => s.paths += 1,
            }
        }
        report.colours.push(s);
        report.components.extend(comps.into_iter().map(|comp| WindowComponent {
            colour: comp.colour + 1,
            kind: comp.kind,
            vertices: comp.vertices.iter().map(|v| v.to_string()).collect(),
        }));
    }

    let in_window: FxHashSet<&V> = vertices.iter().collect();
    let mut owner: FxHashMap<(V, V), usize> = FxHashMap::default();
    for &(colour, path, covers) in paths {
        let on: FxHashSet<&V> = path.iter().collect();
        for v in vertices.iter().filter(|_| covers) {
            if !on.contains(v) {
                report.flag("coverage", format!("{v} is missed by the colour {} path", colour + 1));
            }
        }
        for pair in path.windows(2) {
            let e = key(&pair[0], &pair[1]);
            if let Some(other) = owner.insert(e.clone(), colour) {
                if other != colour {
                    report.flag(
                        "disjoint",
                        format!("edge {}-{} lies on paths {} and {}", e.0, e.1, other + 1, colour + 1),
                    );
                }
            }
            if in_window.contains(&e.0) && in_window.contains(&e.1) {
                match colour_of.get(&e) {
                    Some(&c) if c == colour => {}
                    _ => report.flag(
                        "path colour",
                        format!("edge {}-{} of path {} has another colour", e.0, e.1, colour + 1),
                    ),
                }
            }
        }
    }
    report
}

/// Window check for a decomposition session: the stable colouring on `w` and
/// the current path of every colour.
pub fn verify_decomposition_window(session: &crate::decomposer::Session, w: &Window) -> Result<WindowReport> {
    let c = session.colouring();
    let coloured: Vec<(GroupElement, GroupElement, usize)> = session
        .stable_window(w)?
        .into_iter()
        .map(|(e, k)| {
            let head = c.head(&e);
            (e.base, head, k)
        })
        .collect();
    let expected: Vec<(GroupElement, GroupElement)> =
        w.edges(c.gens()).into_iter().map(|e| (c.head(&e), e.base)).collect();
    let paths: Vec<(usize, &[GroupElement], bool)> = session
        .paths()
        .iter()
        .enumerate()
        .filter_map(|(k, p)| {
            p.as_ref()
                .map(|p| (k, p.vertices.as_slice(), session.path_covers(k, w)))
        })
        .collect();
    Ok(check_window(
        w.label(),
        w.vertices(),
        &expected,
        &coloured,
        c.colours(),
        &paths,
    ))
}

pub(crate) fn require_inside<T: Display>(ok: bool, what: T) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::WindowNotStable(what.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colouring::Square;
    use crate::covering::cover;

    fn z2() -> Colouring {
        Colouring::standard(GeneratorSet::units(GroupSpec::free(2)).unwrap())
    }

    fn p(c: &Colouring, xs: &[i64]) -> GroupElement {
        c.spec().normalize(xs).unwrap()
    }

    #[test]
    fn standard_rows_in_a_box() {
        let c = z2();
        let w = Window::cube(c.spec(), -2, 2);
        let comps = brute_force_components(&c, &w, 0);
        assert_eq!(comps.len(), 5);
        assert!(comps
            .iter()
            .all(|k| k.kind == WindowKind::Path && k.vertices.len() == 5));
        let report = summarize_window(&c, &w);
        assert!(report.is_clean(), "{report}");
        assert_eq!(report.colours[0].degree_histogram, BTreeMap::from([(1, 10), (2, 15)]));
    }

    #[test]
    fn grid_box_has_asymmetric_rows() {
        let c = z2();
        let o = c.spec().identity();
        let w = Window::grid(
            c.gens(),
            &GridBox {
                center: o,
                gens: (0, 1),
                n: 2,
                m: 2,
            },
        );
        assert_eq!(w.len(), 5 * 4);
        assert!(w.contains(&p(&c, &[2, 2])) && !w.contains(&p(&c, &[0, -2])));
    }

    #[test]
    fn components_after_one_switch() {
        let mut c = z2();
        c.switch(&Square::new(c.spec().identity(), 0, 1)).unwrap();
        let w = Window::cube(c.spec(), -5, 5);
        let report = summarize_window(&c, &w);
        assert!(report.is_clean(), "{report}");
        let comps = brute_force_components(&c, &w, 0);
        // the rows y = 0 and y = 1 now turn at the square
        let rows: Vec<_> = comps.iter().filter(|k| k.vertices.contains(&p(&c, &[3, 0]))).collect();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].vertices.contains(&p(&c, &[3, 1])));
        assert!(!rows[0].vertices.contains(&p(&c, &[-3, 0])));
    }

    #[test]
    fn covering_output_is_clean() {
        let c = z2();
        let xs = vec![c.spec().identity()];
        let d = cover(&c, &xs, 0).unwrap();
        let report = verify_covering(&c, &d, &xs, 0);
        assert!(report.is_clean(), "{report}");
    }

    #[test]
    fn switch_inside_x_is_flagged() {
        let c = z2();
        let xs: Vec<_> = [[0, 0], [1, 0], [0, 1], [1, 1]].iter().map(|x| p(&c, x)).collect();
        let d = cover(&c, &xs, 0).unwrap();
        let mut bad = d.clone();
        bad.switch(&Square::new(p(&c, &[0, 0]), 0, 1)).unwrap();
        let report = verify_covering(&c, &bad, &xs, 0);
        assert!(report.violations.iter().any(|v| v.check == "(a)"), "{report}");
    }

    #[test]
    fn planted_cycle_is_flagged() {
        // two switched squares in one row pair close a colour-1 6-cycle
        let c = z2();
        let mut bad = c.clone();
        bad.switch(&Square::new(p(&c, &[0, 0]), 0, 1)).unwrap();
        bad.switch(&Square::new(p(&c, &[3, 0]), 0, 1)).unwrap();
        let xs = vec![p(&c, &[10, 10])];
        let report = verify_covering(&c, &bad, &xs, 0);
        assert!(report.violations.iter().any(|v| v.check == "(c)"), "{report}");
    }

    #[test]
    fn window_checks_flag_planted_defects() {
        let vs: Vec<u32> = (0..4).collect();
        let expected = vec![(0, 1), (1, 2), (2, 3)];
        let good = vec![(0, 1, 0), (1, 2, 0), (2, 3, 1)];
        let path: Vec<u32> = vec![0, 1, 2];
        let r = check_window("line", &vs, &expected, &good, 2, &[]);
        assert!(r.is_clean(), "{r}");

        let uncoloured = vec![(0, 1, 0), (2, 3, 1)];
        let r = check_window("line", &vs, &expected, &uncoloured, 2, &[]);
        assert!(r.violations.iter().any(|v| v.check == "one colour"));

        let shared: Vec<u32> = vec![1, 2, 3];
        let r = check_window(
            "line",
            &vs,
            &expected,
            &good,
            2,
            &[(0, &path, false), (1, &shared, false)],
        );
        assert!(r.violations.iter().any(|v| v.check == "disjoint"));

        let r = check_window("line", &vs, &expected, &good, 2, &[(0, &path, true)]);
        assert!(r.violations.iter().any(|v| v.check == "coverage"));
    }
}
