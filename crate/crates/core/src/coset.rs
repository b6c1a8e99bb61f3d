//! Cosets of a rank-two subgroup `Δ = ⟨g_a, g_b⟩` and paths through them.

use std::collections::{BTreeSet, VecDeque};

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::group::{GeneratorSet, GroupElement, GroupSpec};
use crate::lattice::{ext_gcd, SmithForm};

/// Coordinates for `Δ = ⟨g_a, g_b⟩ ≅ Z²` and a canonical representative per coset.
#[derive(Debug, Clone)]
pub struct DeltaLattice {
    spec: GroupSpec,
    pub ga: GroupElement,
    pub gb: GroupElement,
    p: usize,
    q: usize,
    h1: GroupElement,
    h2: GroupElement,
    // h1 = u[0][0]·ga + u[0][1]·gb, h2 = u[1][0]·ga + u[1][1]·gb
    u: [[i64; 2]; 2],
}

impl DeltaLattice {
    pub fn new(spec: &GroupSpec, ga: &GroupElement, gb: &GroupElement) -> Result<Self> {
        let n = spec.free_rank();
        let (p, q) = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .find(|&(p, q)| ga.0[p] * gb.0[q] - ga.0[q] * gb.0[p] != 0)
            .ok_or_else(|| Error::InvalidGenerators(format!("{ga} and {gb} do not span Z^2")))?;
        let (r1p, r2p) = (ga.0[p], gb.0[p]);
        let (g, s, t) = ext_gcd(r1p, r2p);
        let mut u = [[s, t], [-r2p / g, r1p / g]];
        let h1 = spec.add(&spec.scale(u[0][0], ga), &spec.scale(u[0][1], gb));
        let mut h2 = spec.add(&spec.scale(u[1][0], ga), &spec.scale(u[1][1], gb));
        if h2.0[q] < 0 {
            u[1] = [-u[1][0], -u[1][1]];
            h2 = spec.neg(&h2);
        }
        debug_assert!(h1.0[p] > 0 && h2.0[p] == 0 && h2.0[q] > 0);
        Ok(DeltaLattice {
            spec: spec.clone(),
            ga: ga.clone(),
            gb: gb.clone(),
            p,
            q,
            h1,
            h2,
            u,
        })
    }

    /// `x = rep + a·g_a + b·g_b` with `rep` the canonical representative of `x + Δ`.
    pub fn split(&self, x: &GroupElement) -> (GroupElement, i64, i64) {
        let k1 = x.0[self.p].div_euclid(self.h1.0[self.p]);
        let x1 = self.spec.add_scaled(x, -k1, &self.h1);
        let k2 = x1.0[self.q].div_euclid(self.h2.0[self.q]);
        let rep = self.spec.add_scaled(&x1, -k2, &self.h2);
        let a = k1 * self.u[0][0] + k2 * self.u[1][0];
        let b = k1 * self.u[0][1] + k2 * self.u[1][1];
        (rep, a, b)
    }

    pub fn rep(&self, x: &GroupElement) -> GroupElement {
        self.split(x).0
    }

    /// `base + a·g_a + b·g_b`
    pub fn point(&self, base: &GroupElement, a: i64, b: i64) -> GroupElement {
        let y = self.spec.add_scaled(base, a, &self.ga);
        self.spec.add_scaled(&y, b, &self.gb)
    }
}

/// `(a, b) ∈ Grid(N, M)` for the asymmetric grid `−N ≤ a ≤ N, −M < b ≤ M`.
pub fn in_grid(a: i64, b: i64, n: i64, m: i64) -> bool {
    a.abs() <= n && -m < b && b <= m
}

/// Smallest `N` with `(a, b) ∈ Grid(N, N)`.
pub fn grid_radius(a: i64, b: i64) -> i64 {
    a.abs().max(b).max(1 - b)
}

/// Coordinates on `Γ/Δ`: cyclic coordinates reduced, free ones kept.
#[derive(Debug, Clone)]
struct Quotient {
    smith: SmithForm,
    // (column, modulus); modulus 0 means a free coordinate
    cols: Vec<(usize, i64)>,
}

impl Quotient {
    fn new(spec: &GroupSpec, ga: &GroupElement, gb: &GroupElement) -> Self {
        let d = spec.dim();
        let mut rows: Vec<Vec<i64>> = spec
            .torsion_orders()
            .iter()
            .enumerate()
            .map(|(k, &q)| {
                let mut r = vec![0; d];
                r[spec.free_rank() + k] = q;
                r
            })
            .collect();
        rows.push(ga.0.to_vec());
        rows.push(gb.0.to_vec());
        let smith = SmithForm::new(&rows, d);
        let cols = smith
            .diagonal
            .iter()
            .enumerate()
            .filter(|(_, &dj)| dj != 1)
            .map(|(j, &dj)| (j, dj))
            .collect();
        Quotient { smith, cols }
    }

    fn image(&self, x: &GroupElement) -> Vec<i64> {
        let y = self.smith.apply(&x.0);
        self.cols
            .iter()
            .map(|&(j, d)| if d == 0 { y[j] } else { y[j].rem_euclid(d) })
            .collect()
    }

    fn step(&self, node: &[i64], img: &[i64], sign: i64) -> Vec<i64> {
        node.iter()
            .zip(img)
            .zip(&self.cols)
            .map(|((x, g), &(_, d))| {
                let v = x + sign * g;
                if d == 0 {
                    v
                } else {
                    v.rem_euclid(d)
                }
            })
            .collect()
    }

    /// `img ≡ ±e_j`: returns the sign.
    fn unit_sign(&self, img: &[i64], j: usize) -> Option<i64> {
        let others_zero = img.iter().enumerate().all(|(k, &x)| k == j || x == 0);
        if !others_zero {
            return None;
        }
        let d = self.cols[j].1;
        let v = img[j];
        if v == 1 || (d > 0 && v.rem_euclid(d) == 1) {
            Some(1)
        } else if v == -1 || (d > 0 && v.rem_euclid(d) == d - 1) {
            Some(-1)
        } else {
            None
        }
    }
}

/// Representatives `x_0, …, x_t` of consecutive cosets of `Δ`, joined by generator steps.
#[derive(Debug, Clone)]
pub struct CosetPath {
    pub lattice: DeltaLattice,
    pub reps: Vec<GroupElement>,
    /// `(generator, sign)` with `x_{ℓ−1} + sign·g ≡ x_ℓ (mod Δ)`.
    pub steps: Vec<(usize, i64)>,
    pub n0: i64,
    index: FxHashMap<GroupElement, usize>,
}

impl CosetPath {
    pub fn t(&self) -> usize {
        self.reps.len() - 1
    }

    /// Index of the coset containing `x`, with its coordinates, if it is on the path.
    pub fn locate(&self, x: &GroupElement) -> Option<(usize, i64, i64)> {
        let (rep, a, b) = self.lattice.split(x);
        self.index.get(&rep).map(|&l| (l, a, b))
    }

    /// `x_ℓ + a·g_a + b·g_b`
    pub fn point(&self, l: usize, a: i64, b: i64) -> GroupElement {
        self.lattice.point(&self.reps[l], a, b)
    }
}

const SEARCH_LIMIT: usize = 1 << 20;

/// Finds a path of cosets of `⟨g_a, g_b⟩` covering `xs`, and the grid size `N_0`.
pub fn build_coset_path(gens: &GeneratorSet, delta: (usize, usize), xs: &[GroupElement]) -> Result<CosetPath> {
    let spec = gens.spec();
    let (ia, ib) = delta;
    let lattice = DeltaLattice::new(spec, gens.get(ia), gens.get(ib))?;
    let quotient = Quotient::new(spec, gens.get(ia), gens.get(ib));

    let identity = spec.identity();
    let points: Vec<&GroupElement> = if xs.is_empty() {
        vec![&identity]
    } else {
        xs.iter().collect()
    };
    let mut by_node: FxHashMap<Vec<i64>, &GroupElement> = FxHashMap::default();
    let mut targets = BTreeSet::new();
    for &x in &points {
        let node = quotient.image(x);
        by_node.entry(node.clone()).or_insert(x);
        targets.insert(node);
    }

    let others: Vec<(usize, Vec<i64>)> = (0..gens.len())
        .filter(|&k| k != ia && k != ib)
        .map(|k| (k, quotient.image(gens.get(k))))
        .collect();

    let nodes = match snake_path(&quotient, &targets, &others) {
        Some(p) => p,
        None => greedy_path(&quotient, &targets, &others)?,
    };

    // trim to the shortest stretch containing every target
    let first = nodes.iter().position(|n| targets.contains(n)).unwrap_or(0);
    let last = nodes.iter().rposition(|n| targets.contains(n)).unwrap_or(0);
    let nodes = &nodes[first..=last];

    let mut reps = vec![lattice.rep(by_node[&nodes[0]])];
    let mut steps = Vec::new();
    for w in nodes.windows(2) {
        let (k, sign) = others
            .iter()
            .find_map(|(k, img)| {
                [1, -1]
                    .into_iter()
                    .find(|&s| quotient.step(&w[0], img, s) == w[1])
                    .map(|s| (*k, s))
            })
            .ok_or_else(|| Error::invariant("coset path", "consecutive cosets are not adjacent"))?;
        let prev = reps.last().expect("nonempty");
        reps.push(lattice.rep(&spec.add_scaled(prev, sign, gens.get(k))));
        steps.push((k, sign));
    }

    let index: FxHashMap<GroupElement, usize> = reps.iter().cloned().enumerate().map(|(l, r)| (r, l)).collect();
    if index.len() != reps.len() {
        return Err(Error::invariant("coset path", "a coset is visited twice"));
    }
    let mut n0 = 1;
    for &x in &points {
        let (rep, a, b) = lattice.split(x);
        if !index.contains_key(&rep) {
            return Err(Error::invariant("coset path", format!("{x} is not covered")));
        }
        n0 = n0.max(grid_radius(a, b));
    }
    Ok(CosetPath {
        lattice,
        reps,
        steps,
        n0,
        index,
    })
}

/// Boustrophedon walk over the bounding box of `targets`, if unit steps are available.
fn snake_path(
    quotient: &Quotient,
    targets: &BTreeSet<Vec<i64>>,
    others: &[(usize, Vec<i64>)],
) -> Option<Vec<Vec<i64>>> {
    let dims = quotient.cols.len();
    let mut lo = vec![i64::MAX; dims];
    let mut hi = vec![i64::MIN; dims];
    for t in targets {
        for j in 0..dims {
            lo[j] = lo[j].min(t[j]);
            hi[j] = hi[j].max(t[j]);
        }
    }
    for j in 0..dims {
        if hi[j] > lo[j] && !others.iter().any(|(_, img)| quotient.unit_sign(img, j).is_some()) {
            return None;
        }
    }
    let size: u128 = (0..dims).map(|j| (hi[j] - lo[j] + 1) as u128).product();
    if size > SEARCH_LIMIT as u128 {
        return None;
    }
    let mut order: Vec<Vec<i64>> = vec![Vec::new()];
    for j in 0..dims {
        let mut next = Vec::with_capacity(order.len() * (hi[j] - lo[j] + 1) as usize);
        for (idx, v) in (lo[j]..=hi[j]).enumerate() {
            let block: Box<dyn Iterator<Item = &Vec<i64>>> = if idx % 2 == 0 {
                Box::new(order.iter())
            } else {
                Box::new(order.iter().rev())
            };
            for prefix in block {
                let mut node = prefix.clone();
                node.push(v);
                next.push(node);
            }
        }
        order = next;
    }
    Some(order)
}

/// Joins the targets one after another by shortest detours avoiding used cosets.
fn greedy_path(
    quotient: &Quotient,
    targets: &BTreeSet<Vec<i64>>,
    others: &[(usize, Vec<i64>)],
) -> Result<Vec<Vec<i64>>> {
    let dims = quotient.cols.len();
    let reach = others
        .iter()
        .flat_map(|(_, img)| img.iter().map(|x| x.abs()))
        .max()
        .unwrap_or(0);
    let mut lo = vec![i64::MAX; dims];
    let mut hi = vec![i64::MIN; dims];
    for t in targets {
        for j in 0..dims {
            lo[j] = lo[j].min(t[j] - reach);
            hi[j] = hi[j].max(t[j] + reach);
        }
    }
    let inside = |n: &[i64]| (0..dims).all(|j| quotient.cols[j].1 != 0 || (lo[j] <= n[j] && n[j] <= hi[j]));

    let mut path = vec![targets.iter().next().expect("nonempty").clone()];
    let mut used: FxHashSet<Vec<i64>> = path.iter().cloned().collect();
    let mut pending: BTreeSet<Vec<i64>> = targets.iter().skip(1).cloned().collect();
    while !pending.is_empty() {
        let start = path.last().expect("nonempty").clone();
        let mut parent: FxHashMap<Vec<i64>, Vec<i64>> = FxHashMap::default();
        let mut queue = VecDeque::from([start.clone()]);
        let mut seen: FxHashSet<Vec<i64>> = FxHashSet::from_iter([start.clone()]);
        let mut found = None;
        while let Some(n) = queue.pop_front() {
            if pending.contains(&n) {
                found = Some(n);
                break;
            }
            if seen.len() > SEARCH_LIMIT {
                break;
            }
            for (_, img) in others {
                for s in [1, -1] {
                    let m = quotient.step(&n, img, s);
                    if inside(&m) && !used.contains(&m) && seen.insert(m.clone()) {
                        parent.insert(m.clone(), n.clone());
                        queue.push_back(m);
                    }
                }
            }
        }
        let Some(end) = found else {
            return Err(Error::CosetPathNotFound(format!(
                "{} target cosets unreachable",
                pending.len()
            )));
        };
        let mut leg = vec![end.clone()];
        while let Some(p) = parent.get(leg.last().expect("nonempty")) {
            if *p == start {
                break;
            }
            leg.push(p.clone());
        }
        leg.reverse();
        for n in leg {
            pending.remove(&n);
            used.insert(n.clone());
            path.push(n);
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2z3_gens() -> GeneratorSet {
        GeneratorSet::parse("Z^2 x Z_3".parse().unwrap(), "(1,0,0) (0,1,0) (1,1,1)").unwrap()
    }

    /// Both covering conditions, checked directly.
    fn check_path(gens: &GeneratorSet, delta: (usize, usize), xs: &[GroupElement], path: &CosetPath) {
        let spec = gens.spec();
        for (l, &(k, s)) in path.steps.iter().enumerate() {
            assert!(k != delta.0 && k != delta.1);
            let moved = spec.add_scaled(&path.reps[l], s, gens.get(k));
            assert_eq!(path.lattice.rep(&moved), path.reps[l + 1]);
        }
        let reps: FxHashSet<_> = path.reps.iter().map(|r| path.lattice.rep(r)).collect();
        assert_eq!(reps.len(), path.reps.len());
        for x in xs {
            // x − x_ℓ is a combination of g_a, g_b with coefficients in Grid(N0, N0)
            let found = path.reps.iter().any(|r| {
                let n = path.n0;
                (-n..=n).any(|a| (-n + 1..=n).any(|b| path.lattice.point(r, a, b) == *x))
            });
            assert!(found, "{x} not covered");
        }
    }

    #[test]
    fn lattice_split_recombines() {
        let gens = z2z3_gens();
        let spec = gens.spec();
        let lat = DeltaLattice::new(spec, gens.get(2), gens.get(0)).unwrap();
        for a in -4..=4 {
            for b in -4..=4 {
                for t in 0..3 {
                    let x = spec.normalize(&[a, b, t]).unwrap();
                    let (rep, p, q) = lat.split(&x);
                    assert_eq!(lat.point(&rep, p, q), x);
                    assert_eq!(lat.rep(&rep), rep);
                }
            }
        }
        // three cosets, one per torsion value of the representative
        let reps: FxHashSet<_> = (0..3).map(|t| lat.rep(&spec.normalize(&[0, 0, t]).unwrap())).collect();
        assert_eq!(reps.len(), 3);
    }

    #[test]
    fn single_coset_examples() {
        let z2 = GroupSpec::free(2);
        let gens = GeneratorSet::units(z2.clone()).unwrap();
        let p = build_coset_path(&gens, (0, 1), &[z2.identity()]).unwrap();
        assert_eq!((p.t(), p.n0), (0, 1));
        let bx: Vec<_> = (-2..=2)
            .flat_map(|a| (-2..=2).map(move |b| (a, b)))
            .map(|(a, b)| z2.normalize(&[a, b]).unwrap())
            .collect();
        let p = build_coset_path(&gens, (0, 1), &bx).unwrap();
        assert_eq!((p.t(), p.n0), (0, 3));
        check_path(&gens, (0, 1), &bx, &p);
    }

    #[test]
    fn torsion_cosets() {
        let gens = z2z3_gens();
        let spec = gens.spec();
        let xs = vec![spec.normalize(&[0, 0, 0]).unwrap(), spec.normalize(&[0, 0, 1]).unwrap()];
        let p = build_coset_path(&gens, (0, 1), &xs).unwrap();
        assert!(p.t() == 1 || p.t() == 2);
        assert!(p.steps.iter().all(|&(k, _)| k == 2));
        check_path(&gens, (0, 1), &xs, &p);

        let xs: Vec<_> = (0..3).map(|t| spec.normalize(&[2, -1, t]).unwrap()).collect();
        let p = build_coset_path(&gens, (2, 0), &xs).unwrap();
        assert_eq!(p.t(), 2);
        check_path(&gens, (2, 0), &xs, &p);
    }

    #[test]
    fn free_quotient_z3() {
        let z3 = GroupSpec::free(3);
        let gens = GeneratorSet::units(z3.clone()).unwrap();
        let xs: Vec<_> = [[0, 0, 0], [1, 2, -3], [0, 0, 2], [5, 0, -1]]
            .iter()
            .map(|c| z3.normalize(c).unwrap())
            .collect();
        let p = build_coset_path(&gens, (0, 1), &xs).unwrap();
        assert_eq!(p.t(), 5);
        check_path(&gens, (0, 1), &xs, &p);
    }

    #[test]
    fn non_unit_steps_fall_back_to_search() {
        // quotient Z^3/<e1,e2> ≅ Z reached only through steps of 2 and 3
        let z3 = GroupSpec::free(3);
        let gens = GeneratorSet::parse(z3.clone(), "(1,0,0) (0,1,0) (0,0,2) (1,0,3)").unwrap();
        let xs: Vec<_> = [[0, 0, 0], [0, 0, 1], [0, 0, 5]]
            .iter()
            .map(|c| z3.normalize(c).unwrap())
            .collect();
        let p = build_coset_path(&gens, (0, 1), &xs).unwrap();
        check_path(&gens, (0, 1), &xs, &p);
    }
}
