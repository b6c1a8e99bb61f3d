//! Repeated covering over an exhaustion of the vertex set, one colour per
//! step in rotation. The finite paths `D'_n` grow into the colour classes of
//! a Hamilton decomposition.

use std::fmt::Write as _;
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::colouring::{Colouring, EdgeRef};
use crate::covering::{cover_with_report, CoverOptions, CoverReport};
use crate::error::{Error, Result};
use crate::group::{GeneratorSet, GroupElement, GroupSpec};
use crate::trace::trace;
use crate::verifier::{require_inside, Window};

/// Vertex order: L∞ shells on the free coordinates, lexicographic inside a
/// shell, each free vector followed by all torsion values in lexicographic order.
#[derive(Debug, Clone)]
pub struct BoxSpiral {
    spec: GroupSpec,
}

impl BoxSpiral {
    pub fn new(spec: GroupSpec) -> Self {
        BoxSpiral { spec }
    }

    fn shell(&self, r: i64) -> Vec<Vec<i64>> {
        let n = self.spec.free_rank();
        let mut out: Vec<Vec<i64>> = vec![Vec::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|v| {
                    (-r..=r).map(move |x| {
                        let mut w = v.clone();
                        w.push(x);
                        w
                    })
                })
                .collect();
        }
        out.retain(|v| v.iter().map(|x| x.abs()).max().unwrap_or(0) == r);
        out
    }

    fn torsion_values(&self) -> Vec<Vec<i64>> {
        let mut out: Vec<Vec<i64>> = vec![Vec::new()];
        for &q in self.spec.torsion_orders() {
            out = out
                .into_iter()
                .flat_map(|v| {
                    (0..q).map(move |x| {
                        let mut w = v.clone();
                        w.push(x);
                        w
                    })
                })
                .collect();
        }
        out
    }

    /// The `n`-th vertex, counting from 0.
    pub fn nth(&self, mut n: usize) -> GroupElement {
        let tors = self.torsion_values();
        let mut r = 0;
        loop {
            let shell = self.shell(r);
            let size = shell.len() * tors.len();
            if n < size {
                let mut raw = shell[n / tors.len()].clone();
                raw.extend(&tors[n % tors.len()]);
                return self.spec.normalize(&raw).expect("spiral coordinates");
            }
            n -= size;
            r += 1;
        }
    }

    /// Inverse of [`BoxSpiral::nth`].
    pub fn index_of(&self, v: &GroupElement) -> usize {
        let n = self.spec.free_rank();
        let free = &v.0[..n];
        let r = free.iter().map(|x| x.abs()).max().unwrap_or(0);
        let t = self.spec.torsion_size();
        let inner = if r == 0 { 0 } else { (2 * r as usize - 1).pow(n as u32) };
        // shell members lexicographically below `free`, counted prefix by prefix
        let side = 2 * r as usize + 1;
        let mut within = 0;
        let mut reached = false;
        for (j, &v) in free.iter().enumerate() {
            let rem = (n - j - 1) as u32;
            for x in -r..v {
                within += if reached || x.abs() == r {
                    side.pow(rem)
                } else {
                    side.pow(rem) - (side - 2).pow(rem)
                };
            }
            reached |= v.abs() == r;
        }
        let tors = v.0[n..]
            .iter()
            .zip(self.spec.torsion_orders())
            .fold(0usize, |acc, (&x, &q)| acc * q as usize + x as usize);
        (inner + within) * t + tors
    }
}

/// A finite path `D'` inside one colour class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DPath {
    pub colour: usize,
    /// The step that produced it.
    pub step: usize,
    /// Radius of `X` at that step; `None` for `X_0 = {v_0}`.
    pub radius: Option<i64>,
    pub vertices: Vec<GroupElement>,
    pub edges: Vec<EdgeRef>,
}

impl DPath {
    pub fn endpoints(&self) -> (&GroupElement, &GroupElement) {
        (&self.vertices[0], self.vertices.last().expect("nonempty path"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepReport {
    pub n: usize,
    /// 1-based
    pub colour: usize,
    pub radius: i64,
    pub x_size: usize,
    pub switched_edges: usize,
    pub path_length: usize,
    pub endpoints: (String, String),
    pub cover: CoverReport,
}

pub struct Session {
    colouring: Colouring,
    spiral: BoxSpiral,
    n: usize,
    radius: Option<i64>,
    paths: Vec<Option<DPath>>,
    history: Vec<StepReport>,
    options: CoverOptions,
}

fn violated(condition: &str, detail: impl Into<String>) -> Error {
    Error::invariant(condition, detail)
}

impl Session {
    pub fn new(gens: GeneratorSet) -> Result<Session> {
        Session::with_options(gens, CoverOptions::default())
    }

    pub fn with_options(gens: GeneratorSet, options: CoverOptions) -> Result<Session> {
        let spec = gens.spec().clone();
        if !spec.one_ended() {
            return Err(Error::NotOneEnded(spec.free_rank()));
        }
        if let Some(i) = gens.gens().iter().position(|g| spec.is_torsion(g)) {
            return Err(Error::TorsionGenerator(i + 1));
        }
        let s = gens.len();
        Ok(Session {
            colouring: Colouring::from_arc(Arc::new(gens)),
            spiral: BoxSpiral::new(spec),
            n: 0,
            radius: None,
            paths: vec![None; s],
            history: Vec::new(),
            options,
        })
    }

    pub fn colouring(&self) -> &Colouring {
        &self.colouring
    }

    pub fn spec(&self) -> &GroupSpec {
        self.colouring.spec()
    }

    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn colours(&self) -> usize {
        self.colouring.colours()
    }

    /// Latest `D'` of each colour.
    pub fn paths(&self) -> &[Option<DPath>] {
        &self.paths
    }

    pub fn history(&self) -> &[StepReport] {
        &self.history
    }

    pub fn vertex(&self, n: usize) -> GroupElement {
        self.spiral.nth(n)
    }

    /// 0-based colour handled at step `n ≥ 1`.
    pub fn colour_of_step(&self, n: usize) -> usize {
        (n - 1) % self.colours()
    }

    pub fn radius(&self) -> Option<i64> {
        self.radius
    }

    fn in_ball(&self, radius: Option<i64>, v: &GroupElement) -> bool {
        match radius {
            None => *v == self.vertex(0),
            Some(r) => self.spec().free_norm(v) <= r,
        }
    }

    pub fn in_x(&self, v: &GroupElement) -> bool {
        self.in_ball(self.radius, v)
    }

    /// `w` lies in `X` of the step that made the current path of `colour`.
    pub fn path_covers(&self, colour: usize, w: &Window) -> bool {
        match &self.paths[colour] {
            Some(p) => w.vertices().iter().all(|v| self.in_ball(p.radius, v)),
            None => false,
        }
    }

    fn previous_path(&self) -> Vec<GroupElement> {
        if self.n == 0 {
            vec![self.vertex(0)]
        } else {
            let k = self.colour_of_step(self.n);
            self.paths[k].as_ref().map(|p| p.vertices.clone()).unwrap_or_default()
        }
    }

    /// Runs one covering step and re-checks every session condition.
    pub fn step(&mut self) -> Result<&StepReport> {
        let n = self.n + 1;
        let colour = self.colour_of_step(n);
        let spec = self.spec().clone();
        let v_n = self.vertex(n);
        let prev = self.previous_path();

        let mut r = self.radius.unwrap_or(0).max(spec.free_norm(&v_n));
        for v in &prev {
            r = r.max(spec.free_norm(v));
        }
        let r = r + 1;
        let size = (2 * r as u128 + 1).pow(spec.free_rank() as u32) * spec.torsion_size() as u128;
        if size > self.options.max_region {
            return Err(Error::ResourceLimit(format!(
                "X_{n} would hold {size} vertices, limit {}",
                self.options.max_region
            )));
        }
        let xs = Window::cube(&spec, -r, r).vertices().to_vec();

        let (next, cover) = cover_with_report(&self.colouring, &xs, colour, self.options)?;

        let ray = trace(&next, &xs[0], colour, None)?;
        if !ray.is_double_ray() {
            return Err(violated(
                "(3)",
                format!("colour {} component through {} is finite", colour + 1, xs[0]),
            ));
        }
        let index: FxHashMap<&GroupElement, i64> =
            ray.vertices.iter().enumerate().map(|(k, v)| (v, k as i64)).collect();
        let (mut lo, mut hi) = (i64::MAX, i64::MIN);
        for x in &xs {
            let p = match index.get(x) {
                Some(&p) => p,
                None => ray
                    .position(&next, x)
                    .ok_or_else(|| violated("(3)", format!("{x} is not on the covering double-ray")))?,
            };
            lo = lo.min(p);
            hi = hi.max(p);
        }
        let (vertices, edges) = ray
            .segment(&next, lo - 1, hi + 1)
            .ok_or_else(|| violated("(3)", "could not cut the covering path"))?;
        let path = DPath {
            colour,
            step: n,
            radius: Some(r),
            vertices,
            edges,
        };

        let changed = changed_edges(&self.colouring, &next);
        self.check(n, r, &v_n, &prev, &path, &next, &changed)?;

        let report = StepReport {
            n,
            colour: colour + 1,
            radius: r,
            x_size: xs.len(),
            switched_edges: changed.len(),
            path_length: path.edges.len(),
            endpoints: (path.vertices[0].to_string(), path.endpoints().1.to_string()),
            cover,
        };
        self.colouring = next;
        self.n = n;
        self.radius = Some(r);
        self.paths[colour] = Some(path);
        self.history.push(report);
        Ok(self.history.last().expect("just pushed"))
    }

    #[allow(clippy::too_many_arguments)]
    fn check(
        &self,
        n: usize,
        r: i64,
        v_n: &GroupElement,
        prev: &[GroupElement],
        path: &DPath,
        next: &Colouring,
        changed: &[EdgeRef],
    ) -> Result<()> {
        let spec = self.spec();
        let inside = |v: &GroupElement| spec.free_norm(v) <= r;
        let s = self.colours();

        // (1) X_{n−1} ∪ {v_n} ⊆ X_n
        if self.radius.is_some_and(|old| old > r) || !inside(&self.vertex(0)) || !inside(v_n) {
            return Err(violated("(1)", format!("X_{n} misses X_{} or {v_n}", n - 1)));
        }
        // (2) V(D'_{n−1}) ⊆ X_n
        if let Some(v) = prev.iter().find(|v| !inside(v)) {
            return Err(violated("(2)", format!("{v} of D'_{} lies outside X_{n}", n - 1)));
        }
        // (3) X_n ⊆ V(D'_n), D'_n a path of its colour in c_n
        let on: FxHashSet<&GroupElement> = path.vertices.iter().collect();
        if on.len() != path.vertices.len() {
            return Err(violated("(3)", format!("D'_{n} repeats a vertex")));
        }
        for x in Window::cube(spec, -r, r).vertices() {
            if !on.contains(x) {
                return Err(violated("(3)", format!("{x} is missed by D'_{n}")));
            }
        }
        for (k, e) in path.edges.iter().enumerate() {
            let (a, b) = (&e.base, next.head(e));
            let fits = (a == &path.vertices[k] && b == path.vertices[k + 1])
                || (b == path.vertices[k] && a == &path.vertices[k + 1]);
            if next.colour_of(e) != path.colour || !fits {
                return Err(violated(
                    "(3)",
                    format!("D'_{n} is not a colour {} path at {a}", path.colour + 1),
                ));
            }
        }
        // (4) D'_n properly extends D'_{n−s}
        let older: Option<Vec<GroupElement>> = if n > s {
            self.paths[path.colour].as_ref().map(|p| p.vertices.clone())
        } else if n == s {
            Some(vec![self.vertex(0)])
        } else {
            None
        };
        if let Some(older) = older {
            if !properly_extends(&path.vertices, &older) {
                return Err(violated("(4)", format!("D'_{n} does not properly extend D'_{}", n - s)));
            }
        }
        // (5) c_n = c_{n−1} on E(G[X_n])
        if let Some(e) = changed.iter().find(|e| inside(&e.base) && inside(&next.head(e))) {
            return Err(violated(
                "(5)",
                format!("edge {} gen {} inside X_{n} changed", e.base, e.gen + 1),
            ));
        }
        // the current paths stay edge-disjoint
        let mine: FxHashSet<&EdgeRef> = path.edges.iter().collect();
        for other in self.paths.iter().flatten().filter(|p| p.colour != path.colour) {
            if let Some(e) = other.edges.iter().find(|e| mine.contains(e)) {
                return Err(violated(
                    "disjoint",
                    format!(
                        "edge {} gen {} on paths of colours {} and {}",
                        e.base,
                        e.gen + 1,
                        other.colour + 1,
                        path.colour + 1
                    ),
                ));
            }
        }
        Ok(())
    }

    /// The colouring on `G[W]`. Every later step keeps it by condition (5).
    pub fn stable_window(&self, w: &Window) -> Result<Vec<(EdgeRef, usize)>> {
        let outside = w.vertices().iter().find(|v| !self.in_x(v));
        require_inside(
            outside.is_none(),
            format!(
                "{} is outside X_{}",
                outside.map(|v| v.to_string()).unwrap_or_default(),
                self.n
            ),
        )?;
        Ok(w.edges(self.colouring.gens())
            .into_iter()
            .map(|e| {
                let k = self.colouring.colour_of(&e);
                (e, k)
            })
            .collect())
    }

    /// Group, step counter, `X` radius, current path endpoints per colour,
    /// then the exceptional entries.
    pub fn checkpoint(&self) -> String {
        let c = &self.colouring;
        let mut s = format!("group {}\ngens {}\nstep {}\n", c.spec(), c.gens().format_gens(), self.n);
        match self.radius {
            Some(r) => writeln!(s, "radius {r}"),
            None => writeln!(s, "radius point"),
        }
        .expect("string write");
        for p in self.paths.iter().flatten() {
            let (a, b) = p.endpoints();
            let r = p.radius.map_or("point".to_string(), |r| r.to_string());
            writeln!(
                s,
                "path {} step {} radius {} from {} to {}",
                p.colour + 1,
                p.step,
                r,
                a,
                b
            )
            .expect("string write");
        }
        s.push_str(&c.exceptional_text());
        s
    }

    pub fn restore(text: &str, options: CoverOptions) -> Result<Session> {
        let mut colouring_text = String::new();
        let mut step = None;
        let mut radius = None;
        let mut path_lines = Vec::new();
        for line in text.lines().map(str::trim) {
            if let Some(rest) = line.strip_prefix("step ") {
                step = Some(
                    rest.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad step line {line:?}")))?,
                );
            } else if let Some(rest) = line.strip_prefix("radius ") {
                radius = Some(parse_radius(rest)?);
            } else if line.starts_with("path ") {
                path_lines.push(line.to_string());
            } else {
                colouring_text.push_str(line);
                colouring_text.push('\n');
            }
        }
        let colouring = Colouring::from_text(&colouring_text)?;
        let mut session = Session::with_options(colouring.gens().clone(), options)?;
        session.colouring = colouring;
        session.n = step.ok_or_else(|| Error::Parse("missing step line".into()))?;
        session.radius = radius.ok_or_else(|| Error::Parse("missing radius line".into()))?;
        for line in path_lines {
            let p = session.parse_path(&line)?;
            let k = p.colour;
            session.paths[k] = Some(p);
        }
        Ok(session)
    }

    fn parse_path(&self, line: &str) -> Result<DPath> {
        let bad = || Error::Parse(format!("malformed path line {line:?}"));
        let words: Vec<&str> = line.split_whitespace().collect();
        let ["path", colour, "step", step, "radius", radius, "from", ..] = words[..] else {
            return Err(bad());
        };
        let colour: usize = colour.parse().map_err(|_| bad())?;
        if colour == 0 || colour > self.colours() {
            return Err(bad());
        }
        let colour = colour - 1;
        let rest = line.split_once(" from ").ok_or_else(bad)?.1;
        let (from, to) = rest.split_once(" to ").ok_or_else(bad)?;
        let spec = self.spec();
        let (from, to) = (spec.parse_element(from.trim())?, spec.parse_element(to.trim())?);
        let ray = trace(&self.colouring, &from, colour, None)?;
        let a = ray.position(&self.colouring, &from).ok_or_else(bad)?;
        let b = ray.position(&self.colouring, &to).ok_or_else(bad)?;
        let (mut vertices, mut edges) = ray.segment(&self.colouring, a.min(b), a.max(b)).ok_or_else(bad)?;
        if a > b {
            vertices.reverse();
            edges.reverse();
        }
        Ok(DPath {
            colour,
            step: step.parse().map_err(|_| bad())?,
            radius: parse_radius(radius)?,
            vertices,
            edges,
        })
    }
}

fn parse_radius(s: &str) -> Result<Option<i64>> {
    match s.trim() {
        "point" => Ok(None),
        t => t
            .parse()
            .map(Some)
            .map_err(|_| Error::Parse(format!("bad radius {t:?}"))),
    }
}

/// Edges whose colour differs between two colourings of the same graph.
pub fn changed_edges(a: &Colouring, b: &Colouring) -> Vec<EdgeRef> {
    let mut out: Vec<EdgeRef> = a
        .exceptional()
        .into_iter()
        .chain(b.exceptional())
        .map(|(e, _)| e)
        .filter(|e| a.colour_of(e) != b.colour_of(e))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// `inner` occurs in `outer` as a contiguous run, in either direction, that
/// avoids both ends of `outer`.
pub fn properly_extends<V: PartialEq>(outer: &[V], inner: &[V]) -> bool {
    let Some(first) = inner.first() else { return false };
    let Some(q) = outer.iter().position(|v| v == first) else {
        return false;
    };
    let m = inner.len();
    let last = outer.len() - 1;
    let forward = q + m - 1 < last && outer[q..q + m] == *inner;
    let backward = q + 1 >= m && q + 1 - m > 0 && outer[q + 1 - m..=q].iter().rev().eq(inner.iter());
    (q > 0 && forward) || (q < last && backward)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verifier::verify_decomposition_window;

    fn units(n: usize) -> GeneratorSet {
        GeneratorSet::units(GroupSpec::free(n)).unwrap()
    }

    #[test]
    fn spiral_index_inverts_nth() {
        for spec in [
            GroupSpec::free(2),
            GroupSpec::free(3),
            "Z^2 x Z_2 x Z_3".parse().unwrap(),
        ] {
            let s = BoxSpiral::new(spec);
            for n in 0..400 {
                assert_eq!(s.index_of(&s.nth(n)), n);
            }
        }
    }

    #[test]
    fn spiral_order() {
        let s = BoxSpiral::new(GroupSpec::free(2));
        let first: Vec<String> = (0..10).map(|n| s.nth(n).to_string()).collect();
        assert_eq!(
            first,
            ["(0,0)", "(-1,-1)", "(-1,0)", "(-1,1)", "(0,-1)", "(0,1)", "(1,-1)", "(1,0)", "(1,1)", "(-2,-2)"]
        );
        let t: GroupSpec = "Z^2 x Z_2".parse().unwrap();
        let s = BoxSpiral::new(t);
        assert_eq!(s.nth(1).to_string(), "(0,0,1)");
        assert_eq!(s.nth(2).to_string(), "(-1,-1,0)");
    }

    #[test]
    fn new_session_checks_the_group() {
        let s = Session::new(units(2)).unwrap();
        assert_eq!(s.vertex(0).to_string(), "(0,0)");
        assert_eq!(Session::new(units(3)).unwrap().colours(), 3);
        let z = GeneratorSet::units(GroupSpec::free(1)).unwrap();
        assert!(matches!(Session::new(z), Err(Error::NotOneEnded(1))));
    }

    #[test]
    fn extension_test() {
        assert!(properly_extends(&[1, 2, 3, 4], &[2, 3]));
        assert!(properly_extends(&[1, 3, 2, 4], &[2, 3]));
        assert!(!properly_extends(&[1, 2, 3], &[2, 3]));
        assert!(!properly_extends(&[2, 3, 4], &[2, 3]));
        assert!(!properly_extends(&[1, 2, 4, 3, 5], &[2, 3]));
    }

    #[test]
    fn first_two_steps_in_z2() {
        let mut s = Session::new(units(2)).unwrap();
        let r1 = s.step().unwrap().clone();
        assert_eq!((r1.n, r1.colour), (1, 1));
        let r2 = s.step().unwrap().clone();
        assert_eq!((r2.n, r2.colour), (2, 2));
        let [Some(d1), Some(d2)] = s.paths() else {
            panic!("both colours have paths")
        };
        let e1: FxHashSet<_> = d1.edges.iter().collect();
        assert!(d2.edges.iter().all(|e| !e1.contains(e)));

        let w = Window::cube(s.spec(), -1, 1);
        let report = verify_decomposition_window(&s, &w).unwrap();
        assert!(report.is_clean(), "{report}");
        let big = Window::cube(s.spec(), -1000, 1000);
        assert!(matches!(s.stable_window(&big), Err(Error::WindowNotStable(_))));
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut s = Session::new(units(2)).unwrap();
        s.step().unwrap();
        s.step().unwrap();
        let text = s.checkpoint();
        let back = Session::restore(&text, CoverOptions::default()).unwrap();
        assert_eq!(back.checkpoint(), text);
        assert_eq!(back.paths(), s.paths());
        assert_eq!(back.colouring(), s.colouring());
    }
}
