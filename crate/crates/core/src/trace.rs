//! Walking colour classes of a 2-regular edge colouring, and square switching
//! on top of it.
//!
//! Everything here is generic over [`Host`] so the same code serves Cayley
//! graphs and Cartesian products of double-rays.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// An edge-coloured graph in which every colour class is 2-regular and
/// standard (a disjoint union of known double-rays) outside a finite region.
pub trait Host {
    type Vertex: Clone + Eq + Hash + Debug + Display;
    type Edge: Clone + Eq + Hash + Ord + Debug;
    type Tail: Clone + Debug;

    fn colour_of(&self, e: &Self::Edge) -> usize;

    fn endpoints(&self, e: &Self::Edge) -> (Self::Vertex, Self::Vertex);

    /// Edges of colour `colour` at `v`, each with its other endpoint.
    fn colour_edges(&self, v: &Self::Vertex, colour: usize) -> SmallVec<[(Self::Edge, Self::Vertex); 4]>;

    /// A proof that the walk which just stepped `prev → cur` in `colour`
    /// continues forever on standard edges, if one is available at `cur`.
    fn certify_tail(&self, prev: &Self::Vertex, cur: &Self::Vertex, colour: usize) -> Option<Self::Tail>;

    /// The vertex `k ≥ 0` steps out along a certified tail.
    fn tail_vertex(&self, tail: &Self::Tail, k: u64) -> Self::Vertex;

    /// Inverse of [`Host::tail_vertex`].
    fn tail_offset(&self, tail: &Self::Tail, v: &Self::Vertex) -> Option<u64>;

    /// Step limit for a walk starting at `v`.
    fn budget_for(&self, v: &Self::Vertex) -> usize;

    fn recolour(&mut self, e: &Self::Edge, colour: usize);
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceKind<T> {
    /// `vertices` is closed: first equals last.
    FiniteCycle,
    /// `tails[0]` leaves from `vertices[0]`, `tails[1]` from the last vertex.
    DoubleRay { tails: [T; 2] },
}

/// One component of a colour class: a finite cycle, or a double-ray given by
/// a finite middle path and two certified tails.
#[derive(Debug, Clone)]
pub struct ComponentTrace<V, E, T> {
    pub colour: usize,
    pub vertices: Vec<V>,
    pub edges: Vec<E>,
    pub kind: TraceKind<T>,
}

pub type HostTrace<H> = ComponentTrace<<H as Host>::Vertex, <H as Host>::Edge, <H as Host>::Tail>;

impl<V: Eq, E: Eq, T> ComponentTrace<V, E, T> {
    pub fn is_cycle(&self) -> bool {
        matches!(self.kind, TraceKind::FiniteCycle)
    }

    pub fn is_double_ray(&self) -> bool {
        !self.is_cycle()
    }

    /// Position of `v` along the component. Cycles index their vertex list;
    /// double-rays count from the first middle vertex, negative along `tails[0]`.
    pub fn position<H>(&self, host: &H, v: &V) -> Option<i64>
    where
        H: Host<Vertex = V, Edge = E, Tail = T>,
    {
        if let Some(k) = self.vertices.iter().position(|w| w == v) {
            return Some(k as i64);
        }
        match &self.kind {
            TraceKind::FiniteCycle => None,
            TraceKind::DoubleRay { tails } => {
                if let Some(k) = host.tail_offset(&tails[1], v) {
                    Some(self.vertices.len() as i64 - 1 + k as i64)
                } else {
                    host.tail_offset(&tails[0], v).map(|k| -(k as i64))
                }
            }
        }
    }

    pub fn contains_edge<H>(&self, host: &H, e: &E) -> bool
    where
        H: Host<Vertex = V, Edge = E, Tail = T>,
    {
        if self.edges.contains(e) {
            return true;
        }
        if self.is_cycle() || host.colour_of(e) != self.colour {
            return false;
        }
        let (a, b) = host.endpoints(e);
        match (self.position(host, &a), self.position(host, &b)) {
            (Some(p), Some(q)) => (p - q).abs() == 1,
            _ => false,
        }
    }

    pub fn contains_vertex<H>(&self, host: &H, v: &V) -> bool
    where
        H: Host<Vertex = V, Edge = E, Tail = T>,
    {
        self.position(host, v).is_some()
    }

    /// Inverse of [`ComponentTrace::position`] on double-rays.
    pub fn vertex_at<H>(&self, host: &H, p: i64) -> Option<V>
    where
        H: Host<Vertex = V, Edge = E, Tail = T>,
        V: Clone,
    {
        let last = self.vertices.len() as i64 - 1;
        if (0..=last).contains(&p) {
            return Some(self.vertices[p as usize].clone());
        }
        match &self.kind {
            TraceKind::FiniteCycle => None,
            TraceKind::DoubleRay { tails } if p > last => Some(host.tail_vertex(&tails[1], (p - last) as u64)),
            TraceKind::DoubleRay { tails } => Some(host.tail_vertex(&tails[0], (-p) as u64)),
        }
    }

    /// The subpath between positions `lo ≤ hi` of a double-ray, tails included.
    pub fn segment<H>(&self, host: &H, lo: i64, hi: i64) -> Option<(Vec<V>, Vec<E>)>
    where
        H: Host<Vertex = V, Edge = E, Tail = T>,
        V: Clone,
        E: Clone,
    {
        if self.is_cycle() || lo > hi {
            return None;
        }
        let last = self.vertices.len() as i64 - 1;
        let mut vs = Vec::with_capacity((hi - lo + 1) as usize);
        let mut es = Vec::with_capacity((hi - lo) as usize);
        for p in lo..=hi {
            let v = self.vertex_at(host, p)?;
            if p > lo {
                let e = if p > 0 && p <= last {
                    self.edges[(p - 1) as usize].clone()
                } else {
                    let prev = vs.last().expect("p > lo");
                    host.colour_edges(&v, self.colour)
                        .into_iter()
                        .find(|(_, w)| w == prev)?
                        .0
                };
                es.push(e);
            }
            vs.push(v);
        }
        Some((vs, es))
    }
}

enum WalkEnd<T> {
    Closed,
    Tail(T),
}

fn two_edges<H: Host>(host: &H, v: &H::Vertex, colour: usize) -> Result<[(H::Edge, H::Vertex); 2]> {
    let es = host.colour_edges(v, colour);
    if es.len() != 2 {
        return Err(Error::NotTwoRegular {
            vertex: v.to_string(),
            colour: colour + 1,
            degree: es.len(),
        });
    }
    let mut it = es.into_iter();
    Ok([it.next().expect("two"), it.next().expect("two")])
}

fn walk<H: Host>(
    host: &H,
    start: &H::Vertex,
    first: (H::Edge, H::Vertex),
    colour: usize,
    budget: usize,
    vertices: &mut Vec<H::Vertex>,
    edges: &mut Vec<H::Edge>,
) -> Result<WalkEnd<H::Tail>> {
    let mut prev = start.clone();
    let (mut via, mut cur) = first;
    loop {
        if edges.len() >= budget {
            return Err(Error::BudgetExceeded(budget));
        }
        edges.push(via.clone());
        vertices.push(cur.clone());
        if cur == *start {
            return Ok(WalkEnd::Closed);
        }
        if let Some(t) = host.certify_tail(&prev, &cur, colour) {
            return Ok(WalkEnd::Tail(t));
        }
        let [a, b] = two_edges(host, &cur, colour)?;
        let next = if a.0 == via { b } else { a };
        prev = cur;
        (via, cur) = next;
    }
}

/// Walks the `colour` component through `v` in both directions.
pub fn trace<H: Host>(host: &H, v: &H::Vertex, colour: usize, budget: Option<usize>) -> Result<HostTrace<H>> {
    let budget = budget.unwrap_or_else(|| host.budget_for(v));
    let [a, b] = two_edges(host, v, colour)?;
    let mut fv = vec![v.clone()];
    let mut fe = Vec::new();
    let fwd = walk(host, v, a, colour, budget, &mut fv, &mut fe)?;
    let fwd_tail = match fwd {
        WalkEnd::Closed => {
            return Ok(ComponentTrace {
                colour,
                vertices: fv,
                edges: fe,
                kind: TraceKind::FiniteCycle,
            })
        }
        WalkEnd::Tail(t) => t,
    };
    let mut bv = Vec::new();
    let mut be = Vec::new();
    let back_tail = match walk(host, v, b, colour, budget, &mut bv, &mut be)? {
        WalkEnd::Tail(t) => t,
        WalkEnd::Closed => {
            return Err(Error::invariant(
                "trace",
                format!("walk from {v} closed on one side only"),
            ))
        }
    };
    bv.reverse();
    be.reverse();
    bv.extend(fv);
    be.extend(fe);
    Ok(ComponentTrace {
        colour,
        vertices: bv,
        edges: be,
        kind: TraceKind::DoubleRay {
            tails: [back_tail, fwd_tail],
        },
    })
}

/// The square on corners `x, x+g_i, x+g_k, x+g_i+g_k` of a host graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HostSquare<V, E> {
    /// `[x, x+g_i, x+g_k, x+g_i+g_k]`
    pub corners: [V; 4],
    /// `(x, x+g_i)` and `(x+g_k, x+g_k+g_i)`
    pub i_edges: [E; 2],
    /// `(x, x+g_k)` and `(x+g_i, x+g_i+g_k)`
    pub k_edges: [E; 2],
    /// `(i, k)`
    pub colours: (usize, usize),
}

impl<V, E: Clone> HostSquare<V, E> {
    pub fn edges(&self) -> [E; 4] {
        [
            self.i_edges[0].clone(),
            self.i_edges[1].clone(),
            self.k_edges[0].clone(),
            self.k_edges[1].clone(),
        ]
    }
}

pub fn is_standard_square<H: Host>(host: &H, sq: &HostSquare<H::Vertex, H::Edge>) -> bool {
    let (i, k) = sq.colours;
    sq.i_edges.iter().all(|e| host.colour_of(e) == i) && sq.k_edges.iter().all(|e| host.colour_of(e) == k)
}

/// Swaps the two colours on a standard square.
pub fn switch_square<H: Host>(host: &mut H, sq: &HostSquare<H::Vertex, H::Edge>) -> Result<()> {
    if !is_standard_square(host, sq) {
        return Err(Error::NotStandardSquare(format!("at {}", sq.corners[0])));
    }
    let (i, k) = sq.colours;
    for e in &sq.i_edges {
        host.recolour(e, k);
    }
    for e in &sq.k_edges {
        host.recolour(e, i);
    }
    Ok(())
}

/// Undoes [`switch_square`].
pub fn unswitch_square<H: Host>(host: &mut H, sq: &HostSquare<H::Vertex, H::Edge>) -> Result<()> {
    let (i, k) = sq.colours;
    let switched =
        sq.i_edges.iter().all(|e| host.colour_of(e) == k) && sq.k_edges.iter().all(|e| host.colour_of(e) == i);
    if !switched {
        return Err(Error::NotStandardSquare(format!(
            "{} is not a switched square",
            sq.corners[0]
        )));
    }
    for e in &sq.i_edges {
        host.recolour(e, i);
    }
    for e in &sq.k_edges {
        host.recolour(e, k);
    }
    Ok(())
}

/// Interleaving of two position intervals.
pub fn intervals_cross(e1: (i64, i64), e2: (i64, i64)) -> bool {
    let (j1, j2) = (e1.0.min(e1.1), e1.0.max(e1.1));
    let (k1, k2) = (e2.0.min(e2.1), e2.0.max(e2.1));
    (j1 < k1 && k1 < j2 && j2 < k2) || (k1 < j1 && j1 < k2 && k2 < j2)
}

/// Either the `k`-components meeting the square are two distinct double-rays,
/// or they are one double-ray on which the two `i`-edges cross.
pub fn is_safe_square<H: Host>(host: &H, sq: &HostSquare<H::Vertex, H::Edge>) -> Result<bool> {
    let (_, k) = sq.colours;
    let first = trace(host, &sq.corners[0], k, None)?;
    if first.is_cycle() {
        return Ok(false);
    }
    if first.contains_edge(host, &sq.k_edges[1]) {
        let pos = |v: &H::Vertex| first.position(host, v).ok_or_else(|| Error::NotOnRay(v.to_string()));
        let e1 = (pos(&sq.corners[0])?, pos(&sq.corners[1])?);
        let e2 = (pos(&sq.corners[2])?, pos(&sq.corners[3])?);
        return Ok(intervals_cross(e1, e2));
    }
    let second = trace(host, &sq.corners[1], k, None)?;
    Ok(second.is_double_ray())
}
