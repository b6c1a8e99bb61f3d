mod common;

use proptest::prelude::*;

use hamdecomp::colouring::{Colouring, Square, TailCertificate};
use hamdecomp::coset::{build_coset_path, in_grid};
use hamdecomp::product::{schedule, Decomposition, Factors, Member, PEdge, Side};
use hamdecomp::trace::{trace, TraceKind};
use hamdecomp::verifier::{brute_force_components, Window, WindowKind};
use hamdecomp::{GeneratorSet, GroupElement, GroupSpec};

use common::{check_merge, el, merge_case, z2};

fn z2z3() -> GroupSpec {
    "Z^2 x Z_3".parse().unwrap()
}

/// Some `(a, b)` with `a·g1 + b·g2 = z`, searched over `[−bound, bound]²`.
fn brute_relation(
    spec: &GroupSpec,
    g1: &GroupElement,
    g2: &GroupElement,
    z: &GroupElement,
    bound: i64,
) -> Option<(i64, i64)> {
    (-bound..=bound)
        .flat_map(|a| (-bound..=bound).map(move |b| (a, b)))
        .find(|&(a, b)| spec.add(&spec.scale(a, g1), &spec.scale(b, g2)) == *z)
}

proptest! {
    #[test]
    fn normal_form_is_unique(
        free in prop::collection::vec(-50i64..50, 2),
        tors in prop::collection::vec(-20i64..20, 2),
        shift in prop::collection::vec(-5i64..5, 2),
        other in prop::collection::vec(-3i64..3, 4),
    ) {
        let spec: GroupSpec = "Z^2 x Z_3 x Z_4".parse().unwrap();
        let raw: Vec<i64> = free.iter().chain(&tors).copied().collect();
        let moved = vec![raw[0], raw[1], raw[2] + 3 * shift[0], raw[3] + 4 * shift[1]];
        prop_assert_eq!(spec.normalize(&raw).unwrap(), spec.normalize(&moved).unwrap());
        let b: Vec<i64> = raw.iter().zip(&other).map(|(x, d)| x + d).collect();
        let zero = other[0] == 0 && other[1] == 0 && other[2] % 3 == 0 && other[3] % 4 == 0;
        prop_assert_eq!(spec.normalize(&raw).unwrap() == spec.normalize(&b).unwrap(), zero);
    }

    #[test]
    fn solve_multiple_recovers_k(k in -100i64..=100, g in prop::collection::vec(-4i64..4, 3)) {
        prop_assume!(g[0] != 0 || g[1] != 0);
        let spec = z2z3();
        let g = spec.normalize(&g).unwrap();
        prop_assert_eq!(spec.solve_multiple(&spec.scale(k, &g), &g), Some(k));
    }

    #[test]
    fn rank_two_matches_relation_search(
        a in prop::collection::vec(-3i64..=3, 3),
        b in prop::collection::vec(-3i64..=3, 3),
    ) {
        let spec = z2z3();
        let (g1, g2) = (spec.normalize(&a).unwrap(), spec.normalize(&b).unwrap());
        let bound = 3 * a.iter().chain(&b).map(|x| x.abs()).max().unwrap().max(1);
        let zero = spec.identity();
        let relation = (-bound..=bound)
            .flat_map(|x| (-bound..=bound).map(move |y| (x, y)))
            .any(|(x, y)| (x, y) != (0, 0) && spec.add(&spec.scale(x, &g1), &spec.scale(y, &g2)) == zero);
        prop_assert_eq!(spec.is_free_rank_two(&g1, &g2), !relation);
    }

    #[test]
    fn coset_path_meets_both_requirements(
        pts in prop::collection::vec((-4i64..=4, -4i64..=4, 0i64..3), 1..6),
        z3 in any::<bool>(),
    ) {
        let (gens, delta) = if z3 {
            (GeneratorSet::units(GroupSpec::free(3)).unwrap(), (0, 1))
        } else {
            (GeneratorSet::parse(z2z3(), "(1,0,0) (0,1,0) (1,1,1)").unwrap(), (2, 0))
        };
        let spec = gens.spec().clone();
        let xs: Vec<GroupElement> = pts.iter().map(|&(a, b, t)| spec.normalize(&[a, b, t]).unwrap()).collect();
        let path = build_coset_path(&gens, delta, &xs).unwrap();
        let (ga, gb) = (gens.get(delta.0), gens.get(delta.1));
        // consecutive cosets differ by a generator outside Δ, all cosets distinct
        for (l, &(g, sign)) in path.steps.iter().enumerate() {
            prop_assert!(g != delta.0 && g != delta.1);
            let diff = spec.sub(&spec.add_scaled(&path.reps[l], sign, gens.get(g)), &path.reps[l + 1]);
            prop_assert!(brute_relation(&spec, ga, gb, &diff, 40).is_some());
        }
        for l in 0..path.reps.len() {
            for m in l + 1..path.reps.len() {
                let diff = spec.sub(&path.reps[l], &path.reps[m]);
                prop_assert!(brute_relation(&spec, ga, gb, &diff, 40).is_none());
            }
        }
        // X ⊆ P + Grid(N_0, N_0)
        let n0 = path.n0;
        for x in &xs {
            let hit = (0..path.reps.len()).any(|l| {
                (-n0..=n0).any(|a| ((1 - n0)..=n0).any(|b| in_grid(a, b, n0, n0) && path.point(l, a, b) == *x))
            });
            prop_assert!(hit, "{} is not covered", x);
        }
    }

    #[test]
    fn switching_then_unswitching_restores(
        squares in prop::collection::vec((-4i64..=4, -4i64..=4, 0usize..3), 1..8),
    ) {
        let c = Colouring::standard(GeneratorSet::units(GroupSpec::free(3)).unwrap());
        let mut d = c.clone();
        let mut done = Vec::new();
        for (a, b, axis) in squares {
            let (i, j) = [(0, 1), (0, 2), (1, 2)][axis];
            let sq = Square::new(el(&c, &[a, b, a - b]), i, j);
            if d.is_standard_square(&sq) {
                let before = d.exceptional_len();
                d.switch(&sq).unwrap();
                prop_assert!(d.exceptional_len() <= before + 4);
                prop_assert!(!d.is_standard_square(&sq));
                done.push(sq);
            }
        }
        for sq in done.iter().rev() {
            d.unswitch(sq).unwrap();
        }
        prop_assert_eq!(&d, &c);
        prop_assert!(d.is_standard());
    }

    #[test]
    fn trace_agrees_with_window_search(
        squares in prop::collection::vec((-4i64..=4, -4i64..=4, any::<bool>()), 0..10),
    ) {
        let mut c = z2();
        for (a, b, flip) in squares {
            let sq = if flip { Square::new(el(&c, &[a, b]), 1, 0) } else { Square::new(el(&c, &[a, b]), 0, 1) };
            if c.is_standard_square(&sq) {
                c.switch(&sq).unwrap();
            }
        }
        let w = Window::cube(c.spec(), -10, 10);
        for colour in 0..2 {
            let comps = brute_force_components(&c, &w, colour);
            for a in -3..=3 {
                for b in -3..=3 {
                    let v = el(&c, &[a, b]);
                    let t = trace(&c, &v, colour, None).unwrap();
                    let o = comps.iter().find(|k| k.vertices.contains(&v)).unwrap();
                    match t.kind {
                        TraceKind::FiniteCycle => {
                            prop_assert_eq!(o.kind, WindowKind::Cycle);
                            let mut mine = t.vertices.clone();
                            mine.pop();
                            mine.sort();
                            let mut theirs = o.vertices.clone();
                            theirs.sort();
                            prop_assert_eq!(mine, theirs);
                        }
                        TraceKind::DoubleRay { ref tails } => {
                            prop_assert_eq!(o.kind, WindowKind::Path);
                            prop_assert!(o.vertices.iter().all(|u| t.contains_vertex(&c, u)));
                            for tail in tails {
                                prop_assert!(c.verify_tail(tail));
                                // no exceptional vertex ahead on the tail, checked by stepping
                                let mut y = tail.anchor.clone();
                                for _ in 0..40 {
                                    prop_assert!(!c.is_exceptional_vertex(&y));
                                    y = c.spec().add(&y, &tail.step);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tails_through_exceptional_vertices_are_rejected(
        squares in prop::collection::vec((-4i64..=4, -4i64..=4), 1..6),
        from in (-8i64..=8, -8i64..=8),
        gen in 0usize..2,
        backwards in any::<bool>(),
    ) {
        let mut c = z2();
        for (a, b) in squares {
            let sq = Square::new(el(&c, &[a, b]), 0, 1);
            if c.is_standard_square(&sq) {
                c.switch(&sq).unwrap();
            }
        }
        let g = c.gens().get(gen).clone();
        let step = if backwards { c.spec().neg(&g) } else { g };
        let anchor = el(&c, &[from.0, from.1]);
        let mut y = anchor.clone();
        let mut hits = false;
        for _ in 0..30 {
            hits |= c.is_exceptional_vertex(&y);
            y = c.spec().add(&y, &step);
        }
        let cert = TailCertificate { anchor, step, gen };
        prop_assert_eq!(c.verify_tail(&cert), !hits);
    }

    #[test]
    fn safe_switches_merge_components(
        family in 0u8..4,
        x in -5i64..=5,
        y in -5i64..=5,
        d in 2i64..=6,
        pick in 0i64..10,
    ) {
        let case = merge_case(family, x, y, d, pick);
        prop_assert_eq!(check_merge(&case), Ok(()));
    }

    #[test]
    fn product_standard_colouring_is_a_partition(g in 0u64..40, h in 0u64..40, fixed in 0u64..40) {
        let left = Decomposition::parse(
            "ray 1 : ... 5 3 1 [0] 2 4 6 ...\nray 2 period 2 : ... 13 10 9 6 5 2 1 4 [0] 3 7 8 11 12 15 16 ...",
        )
        .unwrap();
        let right = Decomposition::parse("ray 1 : ... 5 3 1 [0] 2 4 6 ...").unwrap();
        let f = Factors::new(left, right);
        prop_assume!(g != h);
        // oracle: count rays on which g and h are neighbours
        let on_rays = |range: std::ops::Range<usize>| {
            range
                .filter(|&colour| (f.position(colour, g).unwrap() - f.position(colour, h).unwrap()).abs() == 1)
                .count()
        };
        let (left_hits, right_hits) = (on_rays(0..2), on_rays(2..3));
        prop_assert!(left_hits <= 1 && right_hits <= 1);
        prop_assert_eq!(f.standard_colour(&PEdge::new(Side::Left, fixed, g, h)).is_ok(), left_hits == 1);
        prop_assert_eq!(f.standard_colour(&PEdge::new(Side::Right, fixed, g, h)).is_ok(), right_hits == 1);
    }

    #[test]
    fn round_robin_counts(l in 1usize..5, r in 1usize..5, m in 1u64..6) {
        let total = m * (l + r) as u64;
        let mut counts = vec![0u64; l + r];
        for k in 0..total {
            match schedule(k, Some(l), Some(r)) {
                Member::Left(i) => counts[i] += 1,
                Member::Right(j) => counts[l + j] += 1,
            }
        }
        prop_assert!(counts.iter().all(|&c| c == m));
    }
}
