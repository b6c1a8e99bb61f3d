//! The covering construction: cap off, combine cycles inside each coset,
//! combine cosets, absorb into a double-ray.
//!
//! The three steps only see the host through a [`Frame`], which lays out
//! the `(a, b)` grid of each coset. The Cayley planner lives at the bottom of
//! this file; the product planner lives in `product`.

use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::colouring::{Colouring, EdgeRef, Square};
use crate::coset::{build_coset_path, grid_radius, in_grid, CosetPath};
use crate::error::{Error, Result};
use crate::group::{GeneratorSet, GroupElement};
use crate::trace::{is_safe_square, is_standard_square, switch_square, trace, Host, HostSquare};

pub const TARGET_AXIS: usize = 0;
pub const PARTNER_AXIS: usize = 1;

/// Grid coordinates for the cosets the construction works in.
pub trait Frame<H: Host> {
    /// `t + 1`
    fn cosets(&self) -> usize;
    fn target(&self) -> usize;
    fn partner(&self) -> usize;
    /// `x_l + a·g_target + b·g_partner`
    fn vertex(&self, l: usize, a: i64, b: i64) -> H::Vertex;
    /// Edge from `(a, b)` to `(a+1, b)` (axis 0) or `(a, b+1)` (axis 1).
    fn edge(&self, l: usize, a: i64, b: i64, axis: usize) -> H::Edge;
    /// The reserved connecting ray is still a standard component.
    fn ray_is_standard(&self, host: &H, anchor: &H::Vertex, colour: usize) -> bool;

    /// The `(target, partner)`-square with base point `(a, b)`.
    fn square(&self, l: usize, a: i64, b: i64) -> HostSquare<H::Vertex, H::Edge> {
        HostSquare {
            corners: [
                self.vertex(l, a, b),
                self.vertex(l, a + 1, b),
                self.vertex(l, a, b + 1),
                self.vertex(l, a + 1, b + 1),
            ],
            i_edges: [self.edge(l, a, b, TARGET_AXIS), self.edge(l, a, b + 1, TARGET_AXIS)],
            k_edges: [self.edge(l, a, b, PARTNER_AXIS), self.edge(l, a + 1, b, PARTNER_AXIS)],
            colours: (self.target(), self.partner()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Sizes {
    pub n0: i64,
    pub n1: i64,
    pub n2: i64,
    pub n3: i64,
}

impl Sizes {
    pub fn new(n0: i64, n1: i64) -> Self {
        Sizes {
            n0,
            n1,
            n2: 5 * n1,
            n3: 7 * n1,
        }
    }

    /// Base points of the cap-off squares `(R_q, L_q)`, `q = 1..=N_1`.
    pub fn cap_off_bases(&self) -> Vec<((i64, i64), (i64, i64))> {
        (1..=self.n1)
            .map(|q| {
                let row = self.n1 + 1 - 2 * q;
                ((self.n3 + 1 - 2 * q, row), (-(self.n3 + 2 - 2 * q), row))
            })
            .collect()
    }

    /// Base point of the cycle-combining square `T_q`, `q = 1..=4N_1−2`.
    pub fn combine_base(&self, q: i64) -> (i64, i64) {
        let (n1, n2) = (self.n1, self.n2);
        if q < 2 * n1 {
            (n2 + 2 - 2 * q, n1 - q)
        } else {
            let q2 = q - (2 * n1 - 1);
            (-(n2 + 3 - 2 * q2), n1 - q2)
        }
    }

    pub fn combine_count(&self) -> i64 {
        4 * self.n1 - 2
    }

    /// Base point of the final absorbing square in coset 0.
    pub fn absorption_base(&self) -> (i64, i64) {
        (self.n1 - 2, self.n1)
    }

    /// `(a, b)` lies in the cap-off region `C` of its coset.
    pub fn in_region_c(&self, a: i64, b: i64) -> bool {
        (1..=self.n1).any(|q| {
            let m = b - self.n1 + 2 * q;
            (m == 1 || m == 2) && a.abs() <= self.n3 + 1 - 2 * q
        })
    }

    /// Vertices of `P + Grid(N_3, N_1)`.
    pub fn region_size(&self, cosets: usize) -> u128 {
        cosets as u128 * (2 * self.n3 + 1) as u128 * (2 * self.n1) as u128
    }
}

/// A square joining two consecutive cosets along a reserved ray.
#[derive(Debug, Clone)]
pub struct Reserved<V, E> {
    pub square: HostSquare<V, E>,
    pub ray_anchor: V,
    pub ray_colour: usize,
}

pub struct Plan<H: Host, F: Frame<H>> {
    pub frame: F,
    pub sizes: Sizes,
    /// `reserved[l − 1]` holds the `t` candidates joining cosets `l − 1` and `l`.
    pub reserved: Vec<Vec<Reserved<H::Vertex, H::Edge>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CapOffReport {
    /// `(coset, a, b)` of every switched square, right squares first per coset.
    pub switched: Vec<(usize, i64, i64)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CosetCombine {
    pub coset: usize,
    /// Sorted values of `α`, one per cycle.
    pub alpha: Vec<i64>,
    /// Indices `q` whose squares were switched.
    pub switched: Vec<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CombineReport {
    pub cosets: Vec<CosetCombine>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CosetsReport {
    /// `k(l)` for `l = 1..=t`; `None` when both edges were already on one cycle.
    pub choices: Vec<Option<usize>>,
    pub absorption: (i64, i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverReport {
    pub target: usize,
    pub partner: usize,
    pub sizes: Sizes,
    pub t: usize,
    /// Coset representatives `x_0, …, x_t`.
    pub reps: Vec<String>,
    pub cap_off: CapOffReport,
    pub combine: CombineReport,
    pub cosets: CosetsReport,
    pub switched_squares: usize,
}

fn unexpected<V: std::fmt::Display>(v: &V) -> Error {
    Error::UnexpectedComponent(v.to_string())
}

/// Switches the staggered squares at both ends of every row pair.
pub fn cap_off<H: Host, F: Frame<H>>(host: &mut H, plan: &Plan<H, F>) -> Result<CapOffReport> {
    let mut report = CapOffReport::default();
    let bases = plan.sizes.cap_off_bases();
    for l in 0..plan.frame.cosets() {
        for &(r, _) in &bases {
            switch_square(host, &plan.frame.square(l, r.0, r.1))?;
            report.switched.push((l, r.0, r.1));
        }
        for &(_, w) in &bases {
            switch_square(host, &plan.frame.square(l, w.0, w.1))?;
            report.switched.push((l, w.0, w.1));
        }
    }
    Ok(report)
}

/// Merges the finite cycles crossing each coset's annulus into one.
pub fn combine_cycles<H: Host, F: Frame<H>>(host: &mut H, plan: &Plan<H, F>) -> Result<CombineReport> {
    let target = plan.frame.target();
    let sizes = plan.sizes;
    let mut report = CombineReport::default();
    for l in 0..plan.frame.cosets() {
        let mut owner: FxHashMap<H::Edge, usize> = FxHashMap::default();
        let mut alpha = Vec::new();
        for q in 1..=sizes.combine_count() {
            let (a, b) = sizes.combine_base(q);
            let e = plan.frame.edge(l, a, b, TARGET_AXIS);
            if owner.contains_key(&e) {
                continue;
            }
            if host.colour_of(&e) != target {
                return Err(Error::invariant("step 2", format!("edge {e:?} is not standard")));
            }
            let v = plan.frame.vertex(l, a, b);
            let cycle = trace(host, &v, target, None)?;
            if !cycle.is_cycle() {
                return Err(unexpected(&v));
            }
            let id = alpha.len();
            for f in cycle.edges {
                if owner.insert(f, id).is_some() {
                    return Err(Error::AlphaNotInjective(q as usize));
                }
            }
            alpha.push(q);
        }
        let switched: Vec<i64> = alpha.iter().copied().filter(|&q| q != 1).collect();
        for &q in &switched {
            let (a, b) = sizes.combine_base(q);
            switch_square(host, &plan.frame.square(l, a, b))?;
        }

        // every e_q now lies on the cycle through e_1
        let (a, b) = sizes.combine_base(1);
        let merged = trace(host, &plan.frame.vertex(l, a, b), target, None)?;
        let on: FxHashSet<&H::Edge> = merged.edges.iter().collect();
        for q in 1..=sizes.combine_count() {
            let (a, b) = sizes.combine_base(q);
            let e = plan.frame.edge(l, a, b, TARGET_AXIS);
            if host.colour_of(&e) == target && !on.contains(&e) {
                return Err(Error::invariant(
                    "step 2",
                    format!("coset {l}: e_{q} missed by the merged cycle"),
                ));
            }
        }
        report.cosets.push(CosetCombine {
            coset: l,
            alpha,
            switched,
        });
    }
    Ok(report)
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn add(&mut self) -> usize {
        self.0.push(self.0.len());
        self.0.len() - 1
    }
}

/// Cycle ids for target edges, traced on demand.
struct CycleIndex<H: Host> {
    owner: FxHashMap<H::Edge, usize>,
    dsu: Dsu,
}

impl<H: Host> CycleIndex<H> {
    fn id(&mut self, host: &H, v: &H::Vertex, e: &H::Edge, colour: usize) -> Result<usize> {
        if let Some(&id) = self.owner.get(e) {
            return Ok(self.dsu.find(id));
        }
        let cycle = trace(host, v, colour, None)?;
        if !cycle.is_cycle() {
            return Err(unexpected(v));
        }
        // after earlier joins the cycle may already be known under another edge
        let known = cycle.edges.iter().find_map(|f| self.owner.get(f).copied());
        let id = match known {
            Some(id) => self.dsu.find(id),
            None => self.dsu.add(),
        };
        for f in cycle.edges {
            self.owner.entry(f).or_insert(id);
        }
        if !self.owner.contains_key(e) {
            return Err(Error::invariant(
                "step 3",
                format!("edge {e:?} is not on the cycle at {v}"),
            ));
        }
        Ok(id)
    }
}

/// Joins the coset cycles along reserved rays, then absorbs the result into a
/// standard double-ray of the target colour.
pub fn combine_cosets<H: Host, F: Frame<H>>(host: &mut H, plan: &Plan<H, F>) -> Result<CosetsReport> {
    let target = plan.frame.target();
    let mut index = CycleIndex::<H> {
        owner: FxHashMap::default(),
        dsu: Dsu(Vec::new()),
    };
    let mut used = FxHashSet::default();
    let mut choices = Vec::new();
    for (l0, candidates) in plan.reserved.iter().enumerate() {
        let l = l0 + 1;
        let pick = candidates
            .iter()
            .enumerate()
            .find(|(k, r)| {
                !used.contains(&(l, *k))
                    && plan.frame.ray_is_standard(host, &r.ray_anchor, r.ray_colour)
                    && is_standard_square(host, &r.square)
            })
            .ok_or(Error::NoFreshRay(l))?;
        let (k, r) = pick;
        let sq = &r.square;
        let a = index.id(host, &sq.corners[0], &sq.i_edges[0], target)?;
        let b = index.id(host, &sq.corners[2], &sq.i_edges[1], target)?;
        if a == b {
            choices.push(None);
            continue;
        }
        if !is_safe_square(host, sq)? {
            return Err(Error::invariant(
                "step 3",
                format!("square at {} is not safe", sq.corners[0]),
            ));
        }
        switch_square(host, sq)?;
        used.insert((l, k));
        index.dsu.0[a] = b;
        choices.push(Some(k));
    }

    let (a, b) = plan.sizes.absorption_base();
    let sq = plan.frame.square(0, a, b);
    if !is_safe_square(host, &sq)? {
        return Err(Error::invariant(
            "absorption",
            format!("square at {} is not safe", sq.corners[0]),
        ));
    }
    switch_square(host, &sq)?;
    let ray = trace(host, &sq.corners[0], target, None)?;
    if !ray.is_double_ray() {
        return Err(Error::invariant("absorption", "the target component is still finite"));
    }
    Ok(CosetsReport {
        choices,
        absorption: (a, b),
    })
}

/// Runs all three steps on a planned host.
pub fn run_steps<H: Host, F: Frame<H>>(
    host: &mut H,
    plan: &Plan<H, F>,
) -> Result<(CapOffReport, CombineReport, CosetsReport)> {
    let cap = cap_off(host, plan)?;
    let comb = combine_cycles(host, plan)?;
    let cos = combine_cosets(host, plan)?;
    Ok((cap, comb, cos))
}

// ---------------------------------------------------------------------------
// Cayley graphs

/// Cosets of `⟨g_target, g_partner⟩` along a coset path.
#[derive(Debug, Clone)]
pub struct CayleyFrame {
    pub gens: Arc<GeneratorSet>,
    pub path: CosetPath,
    pub target: usize,
    pub partner: usize,
}

impl Frame<Colouring> for CayleyFrame {
    fn cosets(&self) -> usize {
        self.path.reps.len()
    }

    fn target(&self) -> usize {
        self.target
    }

    fn partner(&self) -> usize {
        self.partner
    }

    fn vertex(&self, l: usize, a: i64, b: i64) -> GroupElement {
        self.path.point(l, a, b)
    }

    fn edge(&self, l: usize, a: i64, b: i64, axis: usize) -> EdgeRef {
        let gen = if axis == TARGET_AXIS { self.target } else { self.partner };
        EdgeRef::new(self.path.point(l, a, b), gen)
    }

    fn ray_is_standard(&self, host: &Colouring, anchor: &GroupElement, colour: usize) -> bool {
        host.ray_is_standard(anchor, colour)
    }
}

pub type CoveringPlan = Plan<Colouring, CayleyFrame>;

/// Limits on how much work one covering run may take on.
#[derive(Debug, Clone, Copy)]
pub struct CoverOptions {
    /// Largest admissible `|P + Grid(N_3, N_1)|`.
    pub max_region: u128,
}

impl Default for CoverOptions {
    fn default() -> Self {
        CoverOptions { max_region: 6_000_000 }
    }
}

const RAY_SEARCH_LIMIT: i64 = 1 << 16;

/// Picks, for each step of the coset path, `t` squares on distinct standard
/// rays of the step generator, clear of the `N_0`-grids and of each other.
pub fn reserve_rays(
    c: &Colouring,
    path: &CosetPath,
    target: usize,
    partner: usize,
) -> Result<Vec<Vec<Reserved<GroupElement, EdgeRef>>>> {
    let gens = c.gens();
    let spec = gens.spec();
    let t = path.t();
    let mut all_edges: FxHashSet<EdgeRef> = FxHashSet::default();
    let mut rays: Vec<(GroupElement, usize)> = Vec::new();
    let mut out = Vec::with_capacity(t);
    for l in 1..=t {
        let (n, sign) = path.steps[l - 1];
        let lower = if sign > 0 { l - 1 } else { l };
        let gn = gens.get(n);
        let along = if spec.is_free_rank_two(gens.get(target), gn) {
            target
        } else {
            partner
        };
        let mut picked = Vec::with_capacity(t);
        let mut m = 0i64;
        while picked.len() < t {
            if m.abs() > RAY_SEARCH_LIMIT {
                return Err(Error::NoFreshRay(l));
            }
            let y = spec.add_scaled(&path.reps[lower], m, gens.get(along));
            m = if m > 0 { -m } else { 1 - m };

            let sq = c.square_host(&Square::new(y.clone(), target, n));
            let clear = sq.corners.iter().all(|v| match path.locate(v) {
                Some((_, a, b)) => !in_grid(a, b, path.n0, path.n0),
                None => false,
            });
            if !clear || !is_standard_square(c, &sq) || !c.ray_is_standard(&y, n) {
                continue;
            }
            if rays
                .iter()
                .any(|(z, k)| *k == n && spec.solve_multiple(&spec.sub(&y, z), gn).is_some())
            {
                continue;
            }
            if sq.edges().iter().any(|e| all_edges.contains(e)) {
                continue;
            }
            all_edges.extend(sq.edges());
            rays.push((y.clone(), n));
            picked.push(Reserved {
                square: sq,
                ray_anchor: y,
                ray_colour: n,
            });
        }
        out.push(picked);
    }
    Ok(out)
}

/// Chooses the coset path, reserved rays and grid sizes for covering `xs` in colour `target`.
pub fn plan(c: &Colouring, xs: &[GroupElement], target: usize) -> Result<CoveringPlan> {
    plan_with_options(c, xs, target, CoverOptions::default())
}

pub(crate) fn region_guard(sizes: Sizes, t: usize, options: CoverOptions) -> Result<()> {
    let region = sizes.region_size(t + 1);
    if region > options.max_region {
        return Err(Error::ResourceLimit(format!(
            "planned region has {region} vertices (N_1 = {}, t = {t}), limit {}",
            sizes.n1, options.max_region
        )));
    }
    Ok(())
}

pub fn plan_with_options(
    c: &Colouring,
    xs: &[GroupElement],
    target: usize,
    options: CoverOptions,
) -> Result<CoveringPlan> {
    let gens = c.gens_arc().clone();
    if target >= gens.len() {
        return Err(Error::Parse(format!("colour {} out of range", target + 1)));
    }
    let partner = gens.partner_generator(target)?;
    let mut pts: Vec<GroupElement> = xs.to_vec();
    pts.extend(c.exceptional_vertices().cloned());
    pts.sort();
    pts.dedup();
    let path = build_coset_path(&gens, (target, partner), &pts)?;
    region_guard(Sizes::new(path.n0, path.n0 + 1), path.t(), options)?;
    let reserved = reserve_rays(c, &path, target, partner)?;

    let mut n1 = (path.n0 + 1).max(4);
    for r in reserved.iter().flatten() {
        for v in &r.square.corners {
            let (_, a, b) = path
                .locate(v)
                .ok_or_else(|| Error::invariant("plan", "square off the path"))?;
            n1 = n1.max(grid_radius(a, b) + 3);
        }
    }
    let frame = CayleyFrame {
        gens,
        path,
        target,
        partner,
    };
    // the absorbing square needs standard lines through coset 0
    let limit = n1 + 4 * (c.bounds_diameter() + 4);
    loop {
        let (a, b) = Sizes::new(frame.path.n0, n1).absorption_base();
        let ok = c.ray_is_standard(&frame.vertex(0, a, 0), partner)
            && c.ray_is_standard(&frame.vertex(0, a + 1, 0), partner)
            && c.ray_is_standard(&frame.vertex(0, 0, b + 1), target)
            && is_standard_square(c, &frame.square(0, a, b));
        if ok {
            break;
        }
        n1 += 1;
        region_guard(Sizes::new(frame.path.n0, n1), frame.path.t(), options)?;
        if n1 > limit {
            return Err(Error::invariant("plan", "no admissible N_1"));
        }
    }
    Ok(Plan {
        sizes: Sizes::new(frame.path.n0, n1),
        frame,
        reserved,
    })
}

/// Returns a colouring agreeing with `c` on `E(G[X])` in which one double-ray
/// of colour `target` contains all of `xs`.
pub fn cover(c: &Colouring, xs: &[GroupElement], target: usize) -> Result<Colouring> {
    cover_with_report(c, xs, target, CoverOptions::default()).map(|(c, _)| c)
}

pub fn cover_with_report(
    c: &Colouring,
    xs: &[GroupElement],
    target: usize,
    options: CoverOptions,
) -> Result<(Colouring, CoverReport)> {
    let plan = plan_with_options(c, xs, target, options)?;
    region_guard(plan.sizes, plan.frame.path.t(), options)?;
    let mut out = c.clone();
    let (cap, comb, cos) = run_steps(&mut out, &plan)?;
    check_cover(c, &out, xs, &plan)?;
    let switched = cap.switched.len()
        + comb.cosets.iter().map(|x| x.switched.len()).sum::<usize>()
        + cos.choices.iter().flatten().count()
        + 1;
    let report = CoverReport {
        target,
        partner: plan.frame.partner,
        sizes: plan.sizes,
        t: plan.frame.path.t(),
        reps: plan.frame.path.reps.iter().map(ToString::to_string).collect(),
        cap_off: cap,
        combine: comb,
        cosets: cos,
        switched_squares: switched,
    };
    Ok((out, report))
}

/// Both covering conclusions, and that the ray takes in every `Grid(N_1, N_1)`.
fn check_cover(before: &Colouring, after: &Colouring, xs: &[GroupElement], plan: &CoveringPlan) -> Result<()> {
    let target = plan.frame.target;
    let inside: FxHashSet<&GroupElement> = xs.iter().collect();
    for (e, _) in after.exceptional().into_iter().chain(before.exceptional()) {
        if before.colour_of(&e) != after.colour_of(&e) && inside.contains(&e.base) && inside.contains(&after.head(&e)) {
            return Err(Error::invariant(
                "cover",
                format!("edge at {} inside X changed", e.base),
            ));
        }
    }
    let Some(first) = xs.first() else { return Ok(()) };
    let ray = trace(after, first, target, None)?;
    if !ray.is_double_ray() {
        return Err(unexpected(first));
    }
    let on: FxHashSet<&GroupElement> = ray.vertices.iter().collect();
    for x in xs {
        if !on.contains(x) && ray.position(after, x).is_none() {
            return Err(Error::invariant(
                "cover",
                format!("{x} is not on the covering double-ray"),
            ));
        }
    }
    let n1 = plan.sizes.n1;
    for l in 0..plan.frame.cosets() {
        for a in -n1..=n1 {
            for b in (1 - n1)..=n1 {
                let v = plan.frame.vertex(l, a, b);
                if !on.contains(&v) && ray.position(after, &v).is_none() {
                    return Err(Error::invariant(
                        "cover",
                        format!("{v} of Grid(N_1, N_1) is off the covering double-ray"),
                    ));
                }
            }
        }
    }
    Ok(())
}
