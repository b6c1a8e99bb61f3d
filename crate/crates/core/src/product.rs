//! Hamilton decompositions of Cartesian products `G □ H`, given Hamilton
//! decompositions of both factors as double-ray streams over vertex labels
//! in ℕ.
//!
//! Each step covers a growing label box with one colour, running the
//! covering steps inside a plane `R_i □ S_0` (or `R_0 □ S_j`), which is a
//! copy of the square grid under `(g, h) ↦ (pos_R(g), pos_S(h))`.

use std::fmt::{self, Debug, Display};
use std::sync::{Arc, Mutex, OnceLock};

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;
use smallvec::SmallVec;

use crate::covering::{region_guard, run_steps, CoverOptions, Frame, Plan, Sizes, PARTNER_AXIS, TARGET_AXIS};
use crate::error::{Error, Result};
use crate::trace::{trace, Host};
use crate::verifier::{check_window, WindowReport};

/// A double-ray over labels in ℕ, enumerated on demand from position 0.
pub trait RayStream: Debug + Send + Sync {
    fn vertex_at(&self, k: i64) -> Result<u64>;
    fn position_of(&self, v: u64) -> Result<i64>;
}

/// A finite listing continued periodically at both ends: beyond the listing,
/// `v_{k+p} = v_k + d` with `d` read off the last (first) `p + 1` entries.
#[derive(Debug, Clone)]
pub struct LinearTailRay {
    listed: Vec<u64>,
    reversed: Vec<u64>,
    origin: usize,
    period: usize,
    right_step: u64,
    left_step: u64,
    index: FxHashMap<u64, usize>,
}

fn tail_step(seq: &[u64], p: usize) -> Result<u64> {
    let n = seq.len();
    if n < 2 * p {
        return Err(Error::Parse(format!(
            "a tail of period {p} needs {} listed entries",
            2 * p
        )));
    }
    let d = seq[n - 1] as i128 - seq[n - 1 - p] as i128;
    if d <= 0 {
        return Err(Error::Parse("tails must run towards larger labels".into()));
    }
    for r in 0..p {
        if seq[n - 1 - r] as i128 - seq[n - 1 - r - p] as i128 != d {
            return Err(Error::Parse(format!("listed tail is not periodic with period {p}")));
        }
    }
    Ok(d as u64)
}

/// Entry `idx ≥ len` of the periodic continuation of `seq`.
fn continue_tail(seq: &[u64], p: usize, step: u64, idx: usize) -> u64 {
    let base = seq.len() - p;
    let off = idx - base;
    seq[base + off % p] + (off / p) as u64 * step
}

/// Index of `v` in the continuation of `seq` beyond its end.
fn locate_tail(seq: &[u64], p: usize, step: u64, v: u64) -> Option<usize> {
    let base = seq.len() - p;
    (0..p).find_map(|r| {
        let b = seq[base + r];
        (v > b && (v - b).is_multiple_of(step)).then(|| base + r + ((v - b) / step) as usize * p)
    })
}

impl LinearTailRay {
    pub fn new(listed: Vec<u64>, origin: usize, period: usize) -> Result<Self> {
        if period == 0 || origin >= listed.len() {
            return Err(Error::Parse(
                "ray needs a period ≥ 1 and an origin inside the listing".into(),
            ));
        }
        let mut reversed = listed.clone();
        reversed.reverse();
        let right_step = tail_step(&listed, period)?;
        let left_step = tail_step(&reversed, period)?;
        let mut index = FxHashMap::default();
        for (k, &v) in listed.iter().enumerate() {
            if index.insert(v, k).is_some() {
                return Err(Error::Parse(format!("label {v} listed twice")));
            }
        }
        Ok(LinearTailRay {
            listed,
            reversed,
            origin,
            period,
            right_step,
            left_step,
            index,
        })
    }
}

impl RayStream for LinearTailRay {
    fn vertex_at(&self, k: i64) -> Result<u64> {
        let idx = self.origin as i64 + k;
        let n = self.listed.len() as i64;
        Ok(if idx < 0 {
            continue_tail(&self.reversed, self.period, self.left_step, (n - 1 - idx) as usize)
        } else if idx >= n {
            continue_tail(&self.listed, self.period, self.right_step, idx as usize)
        } else {
            self.listed[idx as usize]
        })
    }

    fn position_of(&self, v: u64) -> Result<i64> {
        let n = self.listed.len() as i64;
        if let Some(&k) = self.index.get(&v) {
            return Ok(k as i64 - self.origin as i64);
        }
        if let Some(idx) = locate_tail(&self.listed, self.period, self.right_step, v) {
            return Ok(idx as i64 - self.origin as i64);
        }
        if let Some(idx) = locate_tail(&self.reversed, self.period, self.left_step, v) {
            return Ok(n - 1 - idx as i64 - self.origin as i64);
        }
        Err(Error::LabelNotOnRay(v))
    }
}

/// A finite stretch of a ray; positions beyond it are unavailable.
#[derive(Debug, Clone)]
pub struct MaterializedRay {
    vertices: Vec<u64>,
    origin: usize,
    index: FxHashMap<u64, usize>,
}

impl MaterializedRay {
    pub fn new(vertices: Vec<u64>, origin: usize) -> Result<Self> {
        let mut index = FxHashMap::default();
        for (k, &v) in vertices.iter().enumerate() {
            if index.insert(v, k).is_some() {
                return Err(Error::Parse(format!("label {v} listed twice")));
            }
        }
        if origin >= vertices.len() {
            return Err(Error::Parse("origin outside the listing".into()));
        }
        Ok(MaterializedRay {
            vertices,
            origin,
            index,
        })
    }
}

impl RayStream for MaterializedRay {
    fn vertex_at(&self, k: i64) -> Result<u64> {
        let idx = self.origin as i64 + k;
        usize::try_from(idx)
            .ok()
            .and_then(|i| self.vertices.get(i).copied())
            .ok_or(Error::StreamExhausted(k))
    }

    fn position_of(&self, v: u64) -> Result<i64> {
        self.index
            .get(&v)
            .map(|&k| k as i64 - self.origin as i64)
            .ok_or(Error::LabelNotOnRay(v))
    }
}

/// The members of a Hamilton decomposition of one factor, in colour order.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub rays: Vec<Arc<dyn RayStream>>,
}

impl Decomposition {
    pub fn new(rays: Vec<Arc<dyn RayStream>>) -> Self {
        Decomposition { rays }
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    /// Reads `ray <colour> [period <p>] : ... v v [v_0] v v ...` lines; the
    /// bracketed label sits at position 0. Colours must be `1..=k`.
    pub fn parse(text: &str) -> Result<Decomposition> {
        let mut found: Vec<(usize, Arc<dyn RayStream>)> = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |msg: &str| Error::Parse(format!("line {}: {msg}", no + 1));
            let (head, body) = line.split_once(':').ok_or_else(|| at("missing ':'"))?;
            let head: Vec<&str> = head.split_whitespace().collect();
            let (colour, period) = match head[..] {
                ["ray", c] => (c, "1"),
                ["ray", c, "period", p] => (c, p),
                _ => return Err(at("expected `ray <colour> [period <p>]`")),
            };
            let colour: usize = colour.parse().map_err(|_| at("bad colour"))?;
            let period: usize = period.parse().map_err(|_| at("bad period"))?;
            let tokens: Vec<&str> = body.split_whitespace().collect();
            if tokens.len() < 3 || tokens[0] != "..." || tokens[tokens.len() - 1] != "..." {
                return Err(at("a ray listing starts and ends with `...`"));
            }
            let mut listed = Vec::new();
            let mut origin = None;
            for t in &tokens[1..tokens.len() - 1] {
                let label = match t.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
                    Some(inner) => {
                        if origin.replace(listed.len()).is_some() {
                            return Err(at("more than one origin"));
                        }
                        inner
                    }
                    None => t,
                };
                listed.push(label.parse::<u64>().map_err(|_| at(&format!("bad label {t:?}")))?);
            }
            let origin = origin.ok_or_else(|| at("no origin `[v]`"))?;
            let ray = LinearTailRay::new(listed, origin, period).map_err(|e| at(&e.to_string()))?;
            found.push((colour, Arc::new(ray)));
        }
        found.sort_by_key(|(c, _)| *c);
        for (k, (c, _)) in found.iter().enumerate() {
            if *c != k + 1 {
                return Err(Error::Parse(format!("ray colours must be 1..={}", found.len())));
            }
        }
        if found.is_empty() {
            return Err(Error::Parse("no rays".into()));
        }
        Ok(Decomposition::new(found.into_iter().map(|(_, r)| r).collect()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    /// Edges moving in `G`, `H`-coordinate fixed.
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PVertex(pub u64, pub u64);

impl Display for PVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

impl PVertex {
    fn moving(&self, side: Side) -> u64 {
        match side {
            Side::Left => self.0,
            Side::Right => self.1,
        }
    }

    fn fixed(&self, side: Side) -> u64 {
        match side {
            Side::Left => self.1,
            Side::Right => self.0,
        }
    }

    fn with(side: Side, fixed: u64, moving: u64) -> PVertex {
        match side {
            Side::Left => PVertex(moving, fixed),
            Side::Right => PVertex(fixed, moving),
        }
    }

    pub fn max_label(&self) -> u64 {
        self.0.max(self.1)
    }
}

/// A product edge: `ends` are the two labels in the moving factor, sorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PEdge {
    pub side: Side,
    pub fixed: u64,
    pub ends: (u64, u64),
}

impl PEdge {
    pub fn new(side: Side, fixed: u64, a: u64, b: u64) -> PEdge {
        PEdge {
            side,
            fixed,
            ends: (a.min(b), a.max(b)),
        }
    }

    pub fn endpoints(&self) -> (PVertex, PVertex) {
        (
            PVertex::with(self.side, self.fixed, self.ends.0),
            PVertex::with(self.side, self.fixed, self.ends.1),
        )
    }

    /// The edge between two vertices differing in exactly one coordinate.
    pub fn between(u: PVertex, v: PVertex) -> Option<PEdge> {
        match (u.0 == v.0, u.1 == v.1) {
            (false, true) => Some(PEdge::new(Side::Left, u.1, u.0, v.0)),
            (true, false) => Some(PEdge::new(Side::Right, u.0, u.1, v.1)),
            _ => None,
        }
    }
}

impl Display for PEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.endpoints();
        write!(f, "{a}-{b}")
    }
}

/// Both factor decompositions. Colours `0..|I|` are the left rays,
/// `|I|..|I|+|J|` the right rays.
#[derive(Debug)]
pub struct Factors {
    pub left: Decomposition,
    pub right: Decomposition,
    fault: Mutex<Option<Error>>,
}

impl Factors {
    pub fn new(left: Decomposition, right: Decomposition) -> Self {
        Factors {
            left,
            right,
            fault: Mutex::new(None),
        }
    }

    pub fn colours(&self) -> usize {
        self.left.len() + self.right.len()
    }

    pub fn side(&self, colour: usize) -> Side {
        if colour < self.left.len() {
            Side::Left
        } else {
            Side::Right
        }
    }

    fn ray(&self, colour: usize) -> &dyn RayStream {
        if colour < self.left.len() {
            self.left.rays[colour].as_ref()
        } else {
            self.right.rays[colour - self.left.len()].as_ref()
        }
    }

    fn colours_of(&self, side: Side) -> std::ops::Range<usize> {
        match side {
            Side::Left => 0..self.left.len(),
            Side::Right => self.left.len()..self.colours(),
        }
    }

    /// `I1`, `I2`, …, `J1`, …
    pub fn colour_name(&self, colour: usize) -> String {
        if colour < self.left.len() {
            format!("I{}", colour + 1)
        } else {
            format!("J{}", colour - self.left.len() + 1)
        }
    }

    fn record(&self, e: Error) {
        let mut slot = self.fault.lock().expect("fault lock");
        slot.get_or_insert(e);
    }

    /// The first lookup failure since the last call.
    pub fn take_fault(&self) -> Option<Error> {
        self.fault.lock().expect("fault lock").take()
    }

    pub fn position(&self, colour: usize, label: u64) -> Result<i64> {
        self.ray(colour).position_of(label)
    }

    pub fn label(&self, colour: usize, k: i64) -> Result<u64> {
        self.ray(colour).vertex_at(k)
    }

    fn pos(&self, colour: usize, label: u64) -> Option<i64> {
        self.position(colour, label).map_err(|e| self.record(e)).ok()
    }

    fn at(&self, colour: usize, k: i64) -> Option<u64> {
        self.label(colour, k).map_err(|e| self.record(e)).ok()
    }

    /// The decomposition member containing the projected edge.
    pub fn standard_colour(&self, e: &PEdge) -> Result<usize> {
        for colour in self.colours_of(e.side) {
            let a = self.position(colour, e.ends.0)?;
            let b = self.position(colour, e.ends.1)?;
            if (a - b).abs() == 1 {
                return Ok(colour);
            }
        }
        Err(Error::EdgeNotInDecomposition(e.to_string()))
    }

    /// Neighbours of label `v` along the ray of `colour`.
    pub fn ray_neighbours(&self, colour: usize, v: u64) -> Result<[u64; 2]> {
        let p = self.position(colour, v)?;
        Ok([self.label(colour, p - 1)?, self.label(colour, p + 1)?])
    }
}

/// Position along the ray of `colour`, direction, and the vertex it starts at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductTail {
    pub anchor: PVertex,
    pub colour: usize,
    pub pos: i64,
    pub dir: i64,
}

/// The product standard colouring plus a finite exceptional map.
#[derive(Debug, Clone)]
pub struct ProductColouring {
    factors: Arc<Factors>,
    exceptional: FxHashMap<PEdge, usize>,
    touching: FxHashMap<PVertex, SmallVec<[PEdge; 4]>>,
    bounds: OnceLock<Vec<i64>>,
}

impl PartialEq for ProductColouring {
    fn eq(&self, other: &Self) -> bool {
        self.exceptional == other.exceptional
    }
}

impl ProductColouring {
    pub fn standard(factors: Arc<Factors>) -> Self {
        ProductColouring {
            factors,
            exceptional: FxHashMap::default(),
            touching: FxHashMap::default(),
            bounds: OnceLock::new(),
        }
    }

    pub fn factors(&self) -> &Arc<Factors> {
        &self.factors
    }

    pub fn exceptional(&self) -> Vec<(PEdge, usize)> {
        let mut v: Vec<_> = self.exceptional.iter().map(|(e, &c)| (*e, c)).collect();
        v.sort();
        v
    }

    pub fn exceptional_len(&self) -> usize {
        self.exceptional.len()
    }

    pub fn exceptional_vertices(&self) -> impl Iterator<Item = &PVertex> {
        self.touching.keys()
    }

    pub fn colour(&self, e: &PEdge) -> Result<usize> {
        match self.exceptional.get(e) {
            Some(&c) => Ok(c),
            None => self.factors.standard_colour(e),
        }
    }

    pub fn set_colour(&mut self, e: &PEdge, colour: usize) -> Result<()> {
        let standard = self.factors.standard_colour(e)?;
        let was = self.exceptional.contains_key(e);
        let (a, b) = e.endpoints();
        if colour == standard {
            if was {
                self.exceptional.remove(e);
                for v in [a, b] {
                    if let Some(list) = self.touching.get_mut(&v) {
                        list.retain(|f| f != e);
                        if list.is_empty() {
                            self.touching.remove(&v);
                        }
                    }
                }
            }
        } else {
            self.exceptional.insert(*e, colour);
            if !was {
                for v in [a, b] {
                    self.touching.entry(v).or_default().push(*e);
                }
            }
        }
        self.bounds = OnceLock::new();
        Ok(())
    }

    /// Per colour, the largest `|position|` of an exceptional vertex's moving
    /// coordinate; −1 when there is none.
    fn bounds(&self) -> &[i64] {
        self.bounds.get_or_init(|| {
            (0..self.factors.colours())
                .map(|colour| {
                    let side = self.factors.side(colour);
                    self.touching
                        .keys()
                        .filter_map(|v| self.factors.pos(colour, v.moving(side)))
                        .map(i64::abs)
                        .max()
                        .unwrap_or(-1)
                })
                .collect()
        })
    }

    /// Largest label on an exceptional edge, if any.
    pub fn max_exceptional_label(&self) -> Option<u64> {
        self.touching.keys().map(PVertex::max_label).max()
    }

    /// Edges with both ends in the label box `[lo, hi]²`, with their colours.
    pub fn window(&self, lo: u64, hi: u64) -> Result<Vec<(PEdge, usize)>> {
        let mut out = Vec::new();
        for g in lo..=hi {
            for h in lo..=hi {
                let v = PVertex(g, h);
                for colour in 0..self.factors.colours() {
                    let side = self.factors.side(colour);
                    for w in self.factors.ray_neighbours(colour, v.moving(side))? {
                        if (lo..=hi).contains(&w) && w > v.moving(side) {
                            let e = PEdge::new(side, v.fixed(side), v.moving(side), w);
                            out.push((e, self.colour(&e)?));
                        }
                    }
                }
            }
        }
        out.sort();
        Ok(out)
    }
}

impl Host for ProductColouring {
    type Vertex = PVertex;
    type Edge = PEdge;
    type Tail = ProductTail;

    fn colour_of(&self, e: &PEdge) -> usize {
        self.colour(e).unwrap_or_else(|err| {
            self.factors.record(err);
            usize::MAX
        })
    }

    fn endpoints(&self, e: &PEdge) -> (PVertex, PVertex) {
        e.endpoints()
    }

    fn colour_edges(&self, v: &PVertex, colour: usize) -> SmallVec<[(PEdge, PVertex); 4]> {
        let mut out = SmallVec::new();
        let side = self.factors.side(colour);
        let (m, fixed) = (v.moving(side), v.fixed(side));
        if let Some(p) = self.factors.pos(colour, m) {
            for q in [p - 1, p + 1] {
                if let Some(w) = self.factors.at(colour, q) {
                    let e = PEdge::new(side, fixed, m, w);
                    if !self.exceptional.contains_key(&e) {
                        out.push((e, PVertex::with(side, fixed, w)));
                    }
                }
            }
        }
        if let Some(list) = self.touching.get(v) {
            for e in list {
                if self.exceptional[e] == colour {
                    let (a, b) = e.endpoints();
                    out.push((*e, if a == *v { b } else { a }));
                }
            }
        }
        out
    }

    fn certify_tail(&self, prev: &PVertex, cur: &PVertex, colour: usize) -> Option<ProductTail> {
        let side = self.factors.side(colour);
        if prev.fixed(side) != cur.fixed(side) {
            return None;
        }
        let pp = self.factors.pos(colour, prev.moving(side))?;
        let pc = self.factors.pos(colour, cur.moving(side))?;
        let dir = pc - pp;
        let bound = self.bounds()[colour];
        ((dir == 1 || dir == -1) && pc.abs() > bound && pc.signum() == dir).then_some(ProductTail {
            anchor: *cur,
            colour,
            pos: pc,
            dir,
        })
    }

    fn tail_vertex(&self, tail: &ProductTail, k: u64) -> PVertex {
        let side = self.factors.side(tail.colour);
        let w = self
            .factors
            .at(tail.colour, tail.pos + k as i64 * tail.dir)
            .unwrap_or(u64::MAX);
        PVertex::with(side, tail.anchor.fixed(side), w)
    }

    fn tail_offset(&self, tail: &ProductTail, v: &PVertex) -> Option<u64> {
        let side = self.factors.side(tail.colour);
        if v.fixed(side) != tail.anchor.fixed(side) {
            return None;
        }
        let p = self.factors.position(tail.colour, v.moving(side)).ok()?;
        u64::try_from((p - tail.pos) * tail.dir).ok()
    }

    fn budget_for(&self, v: &PVertex) -> usize {
        let b = self.bounds().iter().copied().max().unwrap_or(-1).max(0) as usize;
        let reach = (0..self.factors.colours())
            .filter_map(|c| self.factors.position(c, v.moving(self.factors.side(c))).ok())
            .map(|p| p.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        4 * (self.exceptional.len() + 1) * (2 * b + 4) + 2 * reach + 16
    }

    fn recolour(&mut self, e: &PEdge, colour: usize) {
        if let Err(err) = self.set_colour(e, colour) {
            self.factors.record(err);
        }
    }
}

/// The plane spanned by the target colour's ray and the partner's ray, laid
/// out as the square grid with the target along the first axis.
#[derive(Debug, Clone)]
pub struct ProductPlane {
    pub factors: Arc<Factors>,
    pub target: usize,
    pub partner: usize,
}

impl ProductPlane {
    pub fn new(factors: Arc<Factors>, target: usize) -> Self {
        let partner = match factors.side(target) {
            Side::Left => factors.left.len(),
            Side::Right => 0,
        };
        ProductPlane {
            factors,
            target,
            partner,
        }
    }

    fn coord(&self, colour: usize, k: i64) -> u64 {
        self.factors.at(colour, k).unwrap_or(u64::MAX)
    }

    /// Inverse of the layout, when `v` lies on both rays.
    pub fn locate(&self, v: &PVertex) -> Result<(i64, i64)> {
        let side = self.factors.side(self.target);
        let a = self.factors.position(self.target, v.moving(side))?;
        let b = self.factors.position(self.partner, v.fixed(side))?;
        Ok((a, b))
    }

    /// Smallest `Ñ` with every label pair of `[0, n]²` inside `[−Ñ, Ñ]²`.
    pub fn half_width(&self, n: u64) -> Result<i64> {
        let mut w = 0;
        for label in 0..=n {
            w = w.max(self.factors.position(self.target, label)?.abs());
            w = w.max(self.factors.position(self.partner, label)?.abs());
        }
        Ok(w)
    }
}

impl Frame<ProductColouring> for ProductPlane {
    fn cosets(&self) -> usize {
        1
    }

    fn target(&self) -> usize {
        self.target
    }

    fn partner(&self) -> usize {
        self.partner
    }

    fn vertex(&self, _l: usize, a: i64, b: i64) -> PVertex {
        let side = self.factors.side(self.target);
        PVertex::with(side, self.coord(self.partner, b), self.coord(self.target, a))
    }

    fn edge(&self, l: usize, a: i64, b: i64, axis: usize) -> PEdge {
        let u = self.vertex(l, a, b);
        let v = if axis == TARGET_AXIS {
            self.vertex(l, a + 1, b)
        } else {
            debug_assert_eq!(axis, PARTNER_AXIS);
            self.vertex(l, a, b + 1)
        };
        // only fails after a lookup fault, which the caller reports
        PEdge::between(u, v).unwrap_or(PEdge::new(Side::Left, u64::MAX, u.0, v.0))
    }

    fn ray_is_standard(&self, host: &ProductColouring, anchor: &PVertex, colour: usize) -> bool {
        let side = self.factors.side(colour);
        let fixed = anchor.fixed(side);
        host.exceptional_vertices().all(|v| v.fixed(side) != fixed)
    }
}

/// A member of `I ∪ J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Member {
    Left(usize),
    Right(usize),
}

/// `k`-th colour index in the interleaving `I_1, J_1, I_2, J_2, …`, skipping
/// a side once it is exhausted. `None` means infinitely many.
fn interleaved(x: u64, left: Option<usize>, right: Option<usize>) -> Member {
    let (l, r) = (left.map(|v| v as u64), right.map(|v| v as u64));
    match (l, r) {
        (Some(l), _) if x >= 2 * l => Member::Right((x - l) as usize),
        (_, Some(r)) if x >= 2 * r => Member::Left((x - r) as usize),
        _ if x.is_multiple_of(2) => Member::Left((x / 2) as usize),
        _ => Member::Right((x / 2) as usize),
    }
}

/// The surjection `f`: round-robin over `I` then `J` when both are finite,
/// otherwise Cantor order over (colour, occurrence) pairs.
pub fn schedule(k: u64, left: Option<usize>, right: Option<usize>) -> Member {
    if let (Some(l), Some(r)) = (left, right) {
        let c = (k % (l + r) as u64) as usize;
        return if c < l { Member::Left(c) } else { Member::Right(c - l) };
    }
    let mut d = 0u64;
    while (d + 1) * (d + 2) / 2 <= k {
        d += 1;
    }
    interleaved(k - d * (d + 1) / 2, left, right)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductPath {
    pub colour: usize,
    pub step: usize,
    /// `N_k` of the step: the path covers `[0, N_k]²`.
    pub covers: u64,
    pub vertices: Vec<PVertex>,
    pub edges: Vec<PEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProductStepReport {
    pub k: usize,
    pub colour: String,
    pub m: u64,
    pub n: u64,
    pub half_width: i64,
    pub sizes: Sizes,
    pub switched_edges: usize,
    pub path_length: usize,
}

pub struct ProductSession {
    colouring: ProductColouring,
    k: usize,
    last_m: Option<u64>,
    last_n: Option<u64>,
    last: Option<ProductPath>,
    paths: Vec<Option<ProductPath>>,
    history: Vec<ProductStepReport>,
    options: CoverOptions,
}

fn violated(bullet: &str, detail: impl Into<String>) -> Error {
    Error::invariant(bullet, detail)
}

impl ProductSession {
    pub fn new(left: Decomposition, right: Decomposition, options: CoverOptions) -> Result<Self> {
        if left.is_empty() || right.is_empty() {
            return Err(Error::Parse("both factors need at least one ray".into()));
        }
        let factors = Arc::new(Factors::new(left, right));
        let colours = factors.colours();
        Ok(ProductSession {
            colouring: ProductColouring::standard(factors),
            k: 0,
            last_m: None,
            last_n: None,
            last: None,
            paths: vec![None; colours],
            history: Vec::new(),
            options,
        })
    }

    pub fn colouring(&self) -> &ProductColouring {
        &self.colouring
    }

    pub fn factors(&self) -> &Arc<Factors> {
        self.colouring.factors()
    }

    pub fn steps(&self) -> usize {
        self.k
    }

    pub fn history(&self) -> &[ProductStepReport] {
        &self.history
    }

    /// Latest path of each colour.
    pub fn paths(&self) -> &[Option<ProductPath>] {
        &self.paths
    }

    /// `M_k` of the last step; the colouring on `[0, M_k]²` is final.
    pub fn stable_bound(&self) -> Option<u64> {
        self.last_m
    }

    pub fn colour_at(&self, k: usize) -> usize {
        let f = self.factors();
        match schedule(k as u64, Some(f.left.len()), Some(f.right.len())) {
            Member::Left(i) => i,
            Member::Right(j) => f.left.len() + j,
        }
    }

    pub fn step(&mut self) -> Result<&ProductStepReport> {
        let result = self.try_step();
        if let Some(fault) = self.factors().take_fault() {
            return Err(fault);
        }
        result?;
        Ok(self.history.last().expect("step recorded"))
    }

    fn try_step(&mut self) -> Result<()> {
        let k = self.k;
        let colour = self.colour_at(k);
        let factors = self.factors().clone();

        let mut m = self.last_n.map_or(0, |n| n + 1);
        if let Some(d) = &self.last {
            m = m.max(d.vertices.iter().map(PVertex::max_label).max().unwrap_or(0));
        }
        let n = (m + 1).max(self.colouring.max_exceptional_label().unwrap_or(0));

        let plane = ProductPlane::new(factors.clone(), colour);
        let half = plane.half_width(n)?;
        let side = (2 * half + 1) as u128;
        if side * side > self.options.max_region {
            return Err(Error::ResourceLimit(format!(
                "Q_2 would hold {} vertices, limit {}",
                side * side,
                self.options.max_region
            )));
        }

        let sizes = plan_plane(&self.colouring, &plane, half, self.options)?;
        // the steps only look this far along the two plane rays
        let reach = sizes.n3 + 2;
        for c in [plane.target, plane.partner] {
            factors.label(c, -reach)?;
            factors.label(c, reach)?;
        }
        let plan = Plan {
            frame: plane,
            sizes,
            reserved: Vec::new(),
        };
        let mut next = self.colouring.clone();
        run_steps(&mut next, &plan)?;
        let plane = &plan.frame;

        let start = plane.vertex(0, 0, 0);
        let ray = trace(&next, &start, colour, None)?;
        if !ray.is_double_ray() {
            return Err(violated(
                "cover",
                format!("colour {} component at {start} is finite", factors.colour_name(colour)),
            ));
        }
        let index: FxHashMap<&PVertex, i64> = ray.vertices.iter().enumerate().map(|(i, v)| (v, i as i64)).collect();
        let (mut lo, mut hi) = (i64::MAX, i64::MIN);
        for a in -half..=half {
            for b in -half..=half {
                let v = plane.vertex(0, a, b);
                let p = match index.get(&v) {
                    Some(&p) => p,
                    None => ray
                        .position(&next, &v)
                        .ok_or_else(|| violated("cover", format!("{v} is missed by the covering double-ray")))?,
                };
                lo = lo.min(p);
                hi = hi.max(p);
            }
        }
        let (vertices, edges) = ray
            .segment(&next, lo, hi)
            .ok_or_else(|| violated("cover", "could not cut the covering path"))?;
        let path = ProductPath {
            colour,
            step: k,
            covers: n,
            vertices,
            edges,
        };

        let changed = changed_product_edges(&self.colouring, &next);
        self.check(m, n, &path, &next, &changed)?;

        self.history.push(ProductStepReport {
            k,
            colour: factors.colour_name(colour),
            m,
            n,
            half_width: half,
            sizes,
            switched_edges: changed.len(),
            path_length: path.edges.len(),
        });
        self.colouring = next;
        self.k += 1;
        self.last_m = Some(m);
        self.last_n = Some(n);
        self.paths[colour] = Some(path.clone());
        self.last = Some(path);
        Ok(())
    }

    fn check(&self, m: u64, n: u64, path: &ProductPath, next: &ProductColouring, changed: &[PEdge]) -> Result<()> {
        let in_box = |v: &PVertex, b: u64| v.0 <= b && v.1 <= b;
        // c_{k+1} = c_k on [0, M_{k+1}]²
        if let Some(e) = changed.iter().find(|e| {
            let (a, b) = e.endpoints();
            in_box(&a, m) && in_box(&b, m)
        }) {
            return Err(violated("agreement", format!("edge {e} inside [0,{m}]² changed")));
        }
        // D_k ⊂ [0, M_{k+1}]²
        if let Some(d) = &self.last {
            if let Some(v) = d.vertices.iter().find(|v| !in_box(v, m)) {
                return Err(violated(
                    "containment",
                    format!("{v} of D_{} lies outside [0,{m}]²", d.step),
                ));
            }
        }
        // D_{k+1} is a path of its colour covering [0, N_{k+1}]²
        let on: FxHashSet<&PVertex> = path.vertices.iter().collect();
        if on.len() != path.vertices.len() {
            return Err(violated("path", "the covering path repeats a vertex"));
        }
        for g in 0..=n {
            for h in 0..=n {
                if !on.contains(&PVertex(g, h)) {
                    return Err(violated("path", format!("({g},{h}) is missed by D_{}", path.step)));
                }
            }
        }
        for (i, e) in path.edges.iter().enumerate() {
            let fits = PEdge::between(path.vertices[i], path.vertices[i + 1]) == Some(*e);
            if !fits || next.colour(e)? != path.colour {
                return Err(violated(
                    "path",
                    format!("edge {e} of D_{} has the wrong colour", path.step),
                ));
            }
        }
        // the colour's earlier path is a subpath
        if let Some(old) = &self.paths[path.colour] {
            if !is_subpath(&path.vertices, &old.vertices) {
                return Err(violated(
                    "nesting",
                    format!("D_{} does not extend D_{}", path.step, old.step),
                ));
            }
        }
        Ok(())
    }

    /// The final colouring on the label box `[lo, hi]²`.
    pub fn window(&self, lo: u64, hi: u64) -> Result<Vec<(PEdge, usize)>> {
        match self.last_m {
            Some(m) if hi <= m => self.colouring.window(lo, hi),
            _ => Err(Error::WindowNotStable(format!(
                "[{lo},{hi}]² is not inside the stable box [0,{}]²",
                self.last_m.map_or("-".into(), |m| m.to_string())
            ))),
        }
    }

    /// Window check: one colour per edge, paths not cycles, and every colour
    /// whose latest path covers the box meets all of its vertices.
    pub fn verify_window(&self, lo: u64, hi: u64) -> Result<WindowReport> {
        let coloured: Vec<(PVertex, PVertex, usize)> = self
            .window(lo, hi)?
            .into_iter()
            .map(|(e, c)| {
                let (a, b) = e.endpoints();
                (a, b, c)
            })
            .collect();
        let expected = window_edges(self.factors(), lo, hi)?;
        let vertices: Vec<PVertex> = (lo..=hi).flat_map(|g| (lo..=hi).map(move |h| PVertex(g, h))).collect();
        let paths: Vec<(usize, &[PVertex], bool)> = self
            .paths
            .iter()
            .flatten()
            .map(|p| (p.colour, p.vertices.as_slice(), hi <= p.covers))
            .collect();
        Ok(check_window(
            &format!("[{lo},{hi}]^2"),
            &vertices,
            &expected,
            &coloured,
            self.factors().colours(),
            &paths,
        ))
    }
}

/// Edges of `G □ H` inside `[lo, hi]²`, read from the factor rays only.
pub fn window_edges(factors: &Factors, lo: u64, hi: u64) -> Result<Vec<(PVertex, PVertex)>> {
    let mut out = FxHashSet::default();
    for g in lo..=hi {
        for h in lo..=hi {
            for colour in 0..factors.colours() {
                let side = factors.side(colour);
                let v = PVertex(g, h);
                for w in factors.ray_neighbours(colour, v.moving(side))? {
                    if (lo..=hi).contains(&w) {
                        let u = PVertex::with(side, v.fixed(side), w);
                        out.insert(if v < u { (v, u) } else { (u, v) });
                    }
                }
            }
        }
    }
    let mut out: Vec<_> = out.into_iter().collect();
    out.sort();
    Ok(out)
}

fn plan_plane(c: &ProductColouring, plane: &ProductPlane, half: i64, options: CoverOptions) -> Result<Sizes> {
    let n0 = half + 1;
    let mut n1 = (n0 + 1).max(4);
    loop {
        let sizes = Sizes::new(n0, n1);
        region_guard(sizes, 0, options)?;
        let (a, b) = sizes.absorption_base();
        let ok = plane.ray_is_standard(c, &plane.vertex(0, a, 0), plane.partner)
            && plane.ray_is_standard(c, &plane.vertex(0, a + 1, 0), plane.partner)
            && plane.ray_is_standard(c, &plane.vertex(0, 0, b + 1), plane.target)
            && crate::trace::is_standard_square(c, &plane.square(0, a, b));
        if ok {
            return Ok(sizes);
        }
        n1 += 1;
    }
}

pub fn changed_product_edges(a: &ProductColouring, b: &ProductColouring) -> Vec<PEdge> {
    let mut out: Vec<PEdge> = a
        .exceptional()
        .into_iter()
        .chain(b.exceptional())
        .map(|(e, _)| e)
        .filter(|e| a.exceptional.get(e) != b.exceptional.get(e))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// `inner` runs contiguously through `outer`, in either direction.
pub fn is_subpath<V: PartialEq>(outer: &[V], inner: &[V]) -> bool {
    let Some(first) = inner.first() else { return true };
    let Some(q) = outer.iter().position(|v| v == first) else {
        return false;
    };
    let m = inner.len();
    let forward = q + m <= outer.len() && outer[q..q + m] == *inner;
    let backward = q + 1 >= m && outer[q + 1 - m..=q].iter().rev().eq(inner.iter());
    forward || backward
}
