//! Edge colourings of `G(Γ, S)` stored as the standard colouring plus a
//! finite map of exceptions.

use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::group::{parse_tuple, GeneratorSet, GroupElement, GroupSpec};
use crate::trace::{Host, HostSquare};

/// The undirected edge `{base, base + g_gen}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeRef {
    pub base: GroupElement,
    pub gen: usize,
}

impl EdgeRef {
    pub fn new(base: GroupElement, gen: usize) -> Self {
        EdgeRef { base, gen }
    }
}

/// The `(i, j)`-square with base point `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Square {
    pub base: GroupElement,
    pub gens: (usize, usize),
}

impl Square {
    pub fn new(base: GroupElement, i: usize, j: usize) -> Self {
        Square { base, gens: (i, j) }
    }
}

/// Where a certified tail starts and which way it runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailCertificate {
    pub anchor: GroupElement,
    pub step: GroupElement,
    pub gen: usize,
}

type Bounds = Option<(SmallVec<[i64; 4]>, SmallVec<[i64; 4]>)>;

#[derive(Debug, Clone)]
pub struct Colouring {
    gens: Arc<GeneratorSet>,
    exceptional: FxHashMap<EdgeRef, usize>,
    touching: FxHashMap<GroupElement, SmallVec<[EdgeRef; 4]>>,
    bounds: OnceLock<Bounds>,
}

impl PartialEq for Colouring {
    fn eq(&self, other: &Self) -> bool {
        self.gens == other.gens && self.exceptional == other.exceptional
    }
}

impl Eq for Colouring {}

impl Colouring {
    pub fn standard(gens: GeneratorSet) -> Self {
        Colouring::from_arc(Arc::new(gens))
    }

    pub fn from_arc(gens: Arc<GeneratorSet>) -> Self {
        Colouring {
            gens,
            exceptional: FxHashMap::default(),
            touching: FxHashMap::default(),
            bounds: OnceLock::new(),
        }
    }

    pub fn gens(&self) -> &GeneratorSet {
        &self.gens
    }

    pub fn gens_arc(&self) -> &Arc<GeneratorSet> {
        &self.gens
    }

    pub fn spec(&self) -> &GroupSpec {
        self.gens.spec()
    }

    pub fn colours(&self) -> usize {
        self.gens.len()
    }

    pub fn head(&self, e: &EdgeRef) -> GroupElement {
        self.spec().add(&e.base, self.gens.get(e.gen))
    }

    pub fn colour_of(&self, e: &EdgeRef) -> usize {
        self.exceptional.get(e).copied().unwrap_or(e.gen)
    }

    pub fn exceptional_len(&self) -> usize {
        self.exceptional.len()
    }

    pub fn is_standard(&self) -> bool {
        self.exceptional.is_empty()
    }

    /// Exceptional entries in canonical order.
    pub fn exceptional(&self) -> Vec<(EdgeRef, usize)> {
        let mut v: Vec<_> = self.exceptional.iter().map(|(e, &c)| (e.clone(), c)).collect();
        v.sort();
        v
    }

    pub fn is_exceptional_vertex(&self, v: &GroupElement) -> bool {
        self.touching.contains_key(v)
    }

    /// Endpoints of exceptional edges, in no particular order.
    pub fn exceptional_vertices(&self) -> impl Iterator<Item = &GroupElement> {
        self.touching.keys()
    }

    pub fn set_colour(&mut self, e: &EdgeRef, colour: usize) {
        let was = self.exceptional.contains_key(e);
        if colour == e.gen {
            if was {
                self.exceptional.remove(e);
                let head = self.head(e);
                for v in [&e.base, &head] {
                    if let Some(list) = self.touching.get_mut(v) {
                        list.retain(|f| f != e);
                        if list.is_empty() {
                            self.touching.remove(v);
                        }
                    }
                }
                self.bounds = OnceLock::new();
            }
        } else {
            self.exceptional.insert(e.clone(), colour);
            if !was {
                let head = self.head(e);
                for v in [e.base.clone(), head] {
                    self.touching.entry(v).or_default().push(e.clone());
                }
                self.bounds = OnceLock::new();
            }
        }
    }

    /// All edges at `v` (any colour), with the other endpoint.
    pub fn edges_at(&self, v: &GroupElement) -> Vec<(EdgeRef, GroupElement)> {
        let spec = self.spec();
        let mut out = Vec::with_capacity(2 * self.colours());
        for (i, g) in self.gens.gens().iter().enumerate() {
            out.push((EdgeRef::new(v.clone(), i), spec.add(v, g)));
            let w = spec.sub(v, g);
            out.push((EdgeRef::new(w.clone(), i), w));
        }
        out
    }

    pub fn incident_edges(&self, v: &GroupElement, colour: usize) -> Vec<EdgeRef> {
        Host::colour_edges(self, v, colour)
            .into_iter()
            .map(|(e, _)| e)
            .collect()
    }

    /// Bounding box of exceptional endpoints on the free coordinates.
    pub fn free_bounds(&self) -> Option<(&[i64], &[i64])> {
        self.bounds
            .get_or_init(|| {
                let n = self.spec().free_rank();
                let mut it = self.touching.keys();
                let first = it.next()?;
                let mut lo: SmallVec<[i64; 4]> = first.0[..n].iter().copied().collect();
                let mut hi = lo.clone();
                for v in it {
                    for j in 0..n {
                        lo[j] = lo[j].min(v.0[j]);
                        hi[j] = hi[j].max(v.0[j]);
                    }
                }
                Some((lo, hi))
            })
            .as_ref()
            .map(|(lo, hi)| (&lo[..], &hi[..]))
    }

    pub fn bounds_diameter(&self) -> i64 {
        self.free_bounds()
            .map(|(lo, hi)| lo.iter().zip(hi).map(|(a, b)| b - a).max().unwrap_or(0))
            .unwrap_or(0)
    }

    /// L∞ distance on free coordinates from `v` to the exceptional box.
    pub fn distance_to_bounds(&self, v: &GroupElement) -> i64 {
        match self.free_bounds() {
            None => 0,
            Some((lo, hi)) => (0..lo.len())
                .map(|j| (lo[j] - v.0[j]).max(v.0[j] - hi[j]).max(0))
                .max()
                .unwrap_or(0),
        }
    }

    /// Checks a tail certificate against every exceptional endpoint.
    pub fn verify_tail(&self, t: &TailCertificate) -> bool {
        let spec = self.spec();
        let g = self.gens.get(t.gen);
        if t.step != *g && t.step != spec.neg(g) {
            return false;
        }
        self.touching.keys().all(|z| {
            spec.solve_multiple(&spec.sub(z, &t.anchor), &t.step)
                .is_none_or(|k| k < 0)
        })
    }

    pub fn square_host(&self, sq: &Square) -> HostSquare<GroupElement, EdgeRef> {
        let spec = self.spec();
        let (i, j) = sq.gens;
        let x = &sq.base;
        let xi = spec.add(x, self.gens.get(i));
        let xj = spec.add(x, self.gens.get(j));
        let xij = spec.add(&xi, self.gens.get(j));
        HostSquare {
            i_edges: [EdgeRef::new(x.clone(), i), EdgeRef::new(xj.clone(), i)],
            k_edges: [EdgeRef::new(x.clone(), j), EdgeRef::new(xi.clone(), j)],
            corners: [x.clone(), xi, xj, xij],
            colours: (i, j),
        }
    }

    pub fn is_standard_square(&self, sq: &Square) -> bool {
        crate::trace::is_standard_square(self, &self.square_host(sq))
    }

    /// Colour switching in place.
    pub fn switch(&mut self, sq: &Square) -> Result<()> {
        let hs = self.square_host(sq);
        crate::trace::switch_square(self, &hs)
    }

    pub fn unswitch(&mut self, sq: &Square) -> Result<()> {
        let hs = self.square_host(sq);
        crate::trace::unswitch_square(self, &hs)
    }

    /// Colour switching on a copy.
    pub fn apply_switch(&self, sq: &Square) -> Result<Colouring> {
        let mut c = self.clone();
        c.switch(sq)?;
        Ok(c)
    }

    /// No exceptional entry lies on the line `D(anchor, g_gen)` in colour or generator `gen`.
    pub fn ray_is_standard(&self, anchor: &GroupElement, gen: usize) -> bool {
        let spec = self.spec();
        let g = self.gens.get(gen);
        let on = |v: &GroupElement| spec.solve_multiple(&spec.sub(v, anchor), g).is_some();
        self.exceptional.iter().all(|(e, &c)| {
            if e.gen == gen && on(&e.base) {
                return false;
            }
            !(c == gen && (on(&e.base) || on(&self.head(e))))
        })
    }

    /// Exceptional entries as `edge (x) gen i colour j` lines, 1-based, sorted.
    pub fn exceptional_text(&self) -> String {
        let mut s = String::new();
        for (e, c) in self.exceptional() {
            writeln!(s, "edge {} gen {} colour {}", e.base, e.gen + 1, c + 1).expect("string write");
        }
        s
    }

    /// Complete file: group and generator header, then the exceptional entries.
    pub fn to_text(&self) -> String {
        format!(
            "group {}\ngens {}\n{}",
            self.spec(),
            self.gens.format_gens(),
            self.exceptional_text()
        )
    }

    /// Reads the output of [`Colouring::to_text`]. Blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Colouring> {
        let mut spec: Option<GroupSpec> = None;
        let mut colouring: Option<Colouring> = None;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |msg: String| Error::Parse(format!("line {}: {msg}", no + 1));
            if let Some(rest) = line.strip_prefix("group ") {
                spec = Some(rest.trim().parse().map_err(|e: Error| at(e.to_string()))?);
            } else if let Some(rest) = line.strip_prefix("gens ") {
                let sp = spec.clone().ok_or_else(|| at("gens before group".into()))?;
                let gens = GeneratorSet::parse(sp, rest).map_err(|e| at(e.to_string()))?;
                colouring = Some(Colouring::standard(gens));
            } else if line.starts_with("edge ") {
                let c = colouring.as_mut().ok_or_else(|| at("edge before gens".into()))?;
                c.parse_edge_line(line).map_err(|e| at(e.to_string()))?;
            } else {
                return Err(at(format!("unrecognised line {line:?}")));
            }
        }
        colouring.ok_or_else(|| Error::Parse("missing group/gens header".into()))
    }

    /// Reads bare `edge …` lines into a colouring over `gens`.
    pub fn from_edge_lines(gens: GeneratorSet, text: &str) -> Result<Colouring> {
        let mut c = Colouring::standard(gens);
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            c.parse_edge_line(line)?;
        }
        Ok(c)
    }

    fn parse_edge_line(&mut self, line: &str) -> Result<()> {
        let bad = || Error::Parse(format!("malformed edge line {line:?}"));
        let rest = line.strip_prefix("edge ").ok_or_else(bad)?;
        let close = rest.find(')').ok_or_else(bad)?;
        let base = self.spec().normalize(&parse_tuple(&rest[..=close])?)?;
        let words: Vec<&str> = rest[close + 1..].split_whitespace().collect();
        let [w1, gen, w2, colour] = words[..] else {
            return Err(bad());
        };
        if w1 != "gen" || w2 != "colour" {
            return Err(bad());
        }
        let s = self.colours();
        let index = |t: &str| -> Result<usize> {
            let k: usize = t.parse().map_err(|_| bad())?;
            if k == 0 || k > s {
                return Err(Error::Parse(format!("index {k} out of range 1..={s}")));
            }
            Ok(k - 1)
        };
        let e = EdgeRef::new(base, index(gen)?);
        let c = index(colour)?;
        if c == e.gen {
            return Err(Error::Parse(format!("entry {line:?} repeats the standard colour")));
        }
        if self.exceptional.contains_key(&e) {
            return Err(Error::Parse(format!("edge listed twice in {line:?}")));
        }
        self.set_colour(&e, c);
        Ok(())
    }
}

impl Host for Colouring {
    type Vertex = GroupElement;
    type Edge = EdgeRef;
    type Tail = TailCertificate;

    fn colour_of(&self, e: &EdgeRef) -> usize {
        Colouring::colour_of(self, e)
    }

    fn endpoints(&self, e: &EdgeRef) -> (GroupElement, GroupElement) {
        (e.base.clone(), self.head(e))
    }

    fn colour_edges(&self, v: &GroupElement, colour: usize) -> SmallVec<[(EdgeRef, GroupElement); 4]> {
        let spec = self.spec();
        let g = self.gens.get(colour);
        let mut out = SmallVec::new();
        let up = EdgeRef::new(v.clone(), colour);
        if !self.exceptional.contains_key(&up) {
            out.push((up, spec.add(v, g)));
        }
        let w = spec.sub(v, g);
        let down = EdgeRef::new(w.clone(), colour);
        if !self.exceptional.contains_key(&down) {
            out.push((down, w));
        }
        if let Some(list) = self.touching.get(v) {
            for e in list {
                if self.exceptional[e] == colour {
                    let other = if e.base == *v { self.head(e) } else { e.base.clone() };
                    out.push((e.clone(), other));
                }
            }
        }
        out
    }

    fn certify_tail(&self, prev: &GroupElement, cur: &GroupElement, colour: usize) -> Option<TailCertificate> {
        let spec = self.spec();
        let step = spec.sub(cur, prev);
        let g = self.gens.get(colour);
        if step != *g && step != spec.neg(g) {
            return None;
        }
        let cert = || TailCertificate {
            anchor: cur.clone(),
            step: step.clone(),
            gen: colour,
        };
        let Some((lo, hi)) = self.free_bounds() else {
            return Some(cert());
        };
        let away = (0..lo.len()).any(|j| (step.0[j] > 0 && cur.0[j] > hi[j]) || (step.0[j] < 0 && cur.0[j] < lo[j]));
        away.then(cert)
    }

    fn tail_vertex(&self, tail: &TailCertificate, k: u64) -> GroupElement {
        self.spec().add_scaled(&tail.anchor, k as i64, &tail.step)
    }

    fn tail_offset(&self, tail: &TailCertificate, v: &GroupElement) -> Option<u64> {
        let spec = self.spec();
        spec.solve_multiple(&spec.sub(v, &tail.anchor), &tail.step)
            .and_then(|k| u64::try_from(k).ok())
    }

    fn budget_for(&self, v: &GroupElement) -> usize {
        let base = 4 * (self.exceptional.len() + 1) * (self.bounds_diameter() as usize + 4);
        base + 2 * self.distance_to_bounds(v) as usize + 16
    }

    fn recolour(&mut self, e: &EdgeRef, colour: usize) {
        self.set_colour(e, colour);
    }
}

/// Positions of the endpoints of `e1` and `e2` on the standard line `D(x, g_k)`
/// interleave.
pub fn edges_cross_on_ray(
    gens: &GeneratorSet,
    ray: (&GroupElement, usize),
    e1: &EdgeRef,
    e2: &EdgeRef,
) -> Result<bool> {
    let spec = gens.spec();
    let (x, k) = ray;
    let g = gens.get(k);
    let pos = |v: &GroupElement| {
        spec.solve_multiple(&spec.sub(v, x), g)
            .ok_or_else(|| Error::NotOnRay(v.to_string()))
    };
    let ends = |e: &EdgeRef| -> Result<(i64, i64)> {
        let head = spec.add(&e.base, gens.get(e.gen));
        Ok((pos(&e.base)?, pos(&head)?))
    };
    Ok(crate::trace::intervals_cross(ends(e1)?, ends(e2)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{is_safe_square, trace};

    fn z2() -> Colouring {
        Colouring::standard(GeneratorSet::units(GroupSpec::free(2)).unwrap())
    }

    fn p(c: &Colouring, xs: &[i64]) -> GroupElement {
        c.spec().normalize(xs).unwrap()
    }

    #[test]
    fn colour_lookup_after_switch() {
        let mut c = z2();
        let e = EdgeRef::new(p(&c, &[5, 7]), 1);
        assert_eq!(c.colour_of(&e), 1);
        c.switch(&Square::new(p(&c, &[0, 0]), 0, 1)).unwrap();
        assert_eq!(c.colour_of(&EdgeRef::new(p(&c, &[0, 0]), 0)), 1);
        assert_eq!(c.colour_of(&EdgeRef::new(p(&c, &[1, 0]), 1)), 0);
        assert_eq!(c.exceptional_len(), 4);
    }

    #[test]
    fn incident_edges_examples() {
        let mut c = z2();
        let o = p(&c, &[0, 0]);
        let mut got = c.incident_edges(&o, 0);
        got.sort();
        assert_eq!(got, vec![EdgeRef::new(p(&c, &[-1, 0]), 0), EdgeRef::new(o.clone(), 0)]);
        c.switch(&Square::new(o.clone(), 0, 1)).unwrap();
        let mut got = c.incident_edges(&o, 0);
        got.sort();
        assert_eq!(got, vec![EdgeRef::new(p(&c, &[-1, 0]), 0), EdgeRef::new(o.clone(), 1)]);
        let far = p(&c, &[5, 5]);
        let mut got = c.incident_edges(&far, 1);
        got.sort();
        assert_eq!(got, vec![EdgeRef::new(p(&c, &[5, 4]), 1), EdgeRef::new(far, 1)]);
    }

    #[test]
    fn switch_twice_is_rejected_and_unswitch_restores() {
        let c = z2();
        let sq = Square::new(p(&c, &[0, 0]), 0, 1);
        let d = c.apply_switch(&sq).unwrap();
        assert!(matches!(d.apply_switch(&sq), Err(Error::NotStandardSquare(_))));
        let mut e = d.clone();
        e.unswitch(&sq).unwrap();
        assert_eq!(e, c);
        assert!(e.is_standard());
    }

    #[test]
    fn disjoint_switches_accumulate() {
        let z3 = Colouring::standard(GeneratorSet::units(GroupSpec::free(3)).unwrap());
        let mut c = z3.apply_switch(&Square::new(p(&z3, &[0, 0, 0]), 0, 1)).unwrap();
        c.switch(&Square::new(p(&z3, &[5, 0, 0]), 0, 2)).unwrap();
        assert_eq!(c.exceptional_len(), 8);
    }

    #[test]
    fn trace_rows_and_switched_corner() {
        let c = z2();
        let t = trace(&c, &p(&c, &[0, 0]), 0, None).unwrap();
        assert!(t.is_double_ray());
        let at = |x| t.position(&c, &p(&c, &[x, 0])).unwrap();
        assert_eq!((at(7) - at(0)).abs(), 7);
        assert_eq!((at(-9) - at(0)).abs(), 9);
        assert_eq!(t.position(&c, &p(&c, &[7, 1])), None);

        let d = c.apply_switch(&Square::new(p(&c, &[0, 0]), 0, 1)).unwrap();
        let t = trace(&d, &p(&d, &[1, 0]), 0, None).unwrap();
        assert!(t.is_double_ray());
        for x in 1..20 {
            assert!(t.contains_vertex(&d, &p(&d, &[x, 0])));
            assert!(t.contains_vertex(&d, &p(&d, &[x, 1])));
        }
        assert!(!t.contains_vertex(&d, &p(&d, &[0, 0])));
        if let crate::trace::TraceKind::DoubleRay { tails } = &t.kind {
            assert!(tails.iter().all(|tl| d.verify_tail(tl)));
        }
    }

    #[test]
    fn serialization_round_trip() {
        let spec: GroupSpec = "Z^2 x Z_3".parse().unwrap();
        let gens = GeneratorSet::parse(spec.clone(), "(1,0,0) (0,1,0) (1,1,1)").unwrap();
        let mut c = Colouring::standard(gens);
        c.switch(&Square::new(spec.normalize(&[0, 0, 2]).unwrap(), 0, 2))
            .unwrap();
        c.switch(&Square::new(spec.normalize(&[-4, 3, 1]).unwrap(), 1, 0))
            .unwrap();
        let text = c.to_text();
        assert!(text.starts_with("group Z^2 x Z_3\ngens (1,0,0) (0,1,0) (1,1,1)\nedge (-4,3,1) gen 1 colour 2\n"));
        let back = Colouring::from_text(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), text);
        assert!(Colouring::from_text("group Z^2\ngens (1,0) (0,1)\nedge (0,0) gen 1 colour 1\n").is_err());
        assert!(Colouring::from_text("group Z^2\ngens (1,0) (0,1)\nedge (0,0) gen 3 colour 1\n").is_err());
    }

    #[test]
    fn crossing_on_standard_rays() {
        let z2 = GeneratorSet::units(GroupSpec::free(2)).unwrap();
        let spec = z2.spec().clone();
        let o = spec.identity();
        let pt = |a| spec.normalize(&[a, 0]).unwrap();
        // edges spanning positions (0,2) and (1,3) realised by gen-1 steps of length 2
        let gens = GeneratorSet::parse(spec.clone(), "(1,0) (0,1) (2,0)").unwrap();
        let e1 = EdgeRef::new(pt(0), 2);
        let e2 = EdgeRef::new(pt(1), 2);
        assert!(edges_cross_on_ray(&gens, (&o, 0), &e1, &e2).unwrap());
        let e1 = EdgeRef::new(pt(0), 0);
        let e2 = EdgeRef::new(pt(2), 0);
        assert!(!edges_cross_on_ray(&gens, (&o, 0), &e1, &e2).unwrap());
        let off = EdgeRef::new(spec.normalize(&[0, 1]).unwrap(), 0);
        assert!(matches!(
            edges_cross_on_ray(&gens, (&o, 0), &off, &e2),
            Err(Error::NotOnRay(_))
        ));
    }

    #[test]
    fn safety_examples() {
        let c = z2();
        assert!(is_safe_square(&c, &c.square_host(&Square::new(p(&c, &[3, -2]), 0, 1))).unwrap());

        // switched squares above and below turn columns 0 and 1 into a finite 2-cycle
        let mut d = c.clone();
        d.switch(&Square::new(p(&c, &[0, 3]), 0, 1)).unwrap();
        d.switch(&Square::new(p(&c, &[0, -1]), 0, 1)).unwrap();
        let t = trace(&d, &p(&d, &[0, 1]), 1, None).unwrap();
        assert!(t.is_cycle());
        let sq = d.square_host(&Square::new(p(&d, &[0, 1]), 0, 1));
        assert!(crate::trace::is_standard_square(&d, &sq));
        assert!(!is_safe_square(&d, &sq).unwrap());
    }
}
