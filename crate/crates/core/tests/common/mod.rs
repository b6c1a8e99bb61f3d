//! Fixtures shared by the property and acceptance suites.

#![allow(dead_code)]

use hamdecomp::colouring::{Colouring, Square};
use hamdecomp::trace::{is_safe_square, trace};
use hamdecomp::verifier::{brute_force_components, Window, WindowComponent, WindowKind};
use hamdecomp::{GeneratorSet, GroupElement, GroupSpec};

pub fn z2() -> Colouring {
    Colouring::standard(GeneratorSet::units(GroupSpec::free(2)).unwrap())
}

pub fn el(c: &Colouring, xs: &[i64]) -> GroupElement {
    c.spec().normalize(xs).unwrap()
}

/// A colouring with a finite `i`-cycle `C1`, a square `T` with one `i`-edge on
/// `C1` and the other on an infinite `i`-component, and a window holding every
/// exceptional edge with margin at least 2.
pub struct MergeCase {
    pub colouring: Colouring,
    pub square: Square,
    pub window: Window,
    /// The `k`-edges of `T` start on one double-ray.
    pub crossing: bool,
}

/// `family` picks the layout: 0 and 1 put `T` above or below the cycle in
/// Z², 2 leans `T` into a third dimension, 3 uses `g_i = 2·g_k` so the
/// `k`-edges share a line and the `i`-edges cross on it.
pub fn merge_case(family: u8, x: i64, y: i64, d: i64, pick: i64) -> MergeCase {
    let (colouring, square, lo, hi, crossing) = match family % 4 {
        0 | 1 => {
            let mut c = z2();
            c.switch(&Square::new(el(&c, &[x, y]), 0, 1)).unwrap();
            c.switch(&Square::new(el(&c, &[x + d, y]), 0, 1)).unwrap();
            let a = x + 1 + pick.rem_euclid(d - 1);
            let b = if family.is_multiple_of(4) { y + 1 } else { y - 1 };
            let sq = Square::new(el(&c, &[a, b]), 0, 1);
            (c, sq, x.min(y) - 4, (x + d).max(y) + 5, false)
        }
        2 => {
            let mut c = Colouring::standard(GeneratorSet::units(GroupSpec::free(3)).unwrap());
            c.switch(&Square::new(el(&c, &[x, y, 0]), 0, 1)).unwrap();
            c.switch(&Square::new(el(&c, &[x + d, y, 0]), 0, 1)).unwrap();
            let a = x + 1 + pick.rem_euclid(d - 1);
            let sq = Square::new(el(&c, &[a, y, 0]), 0, 2);
            (c, sq, x.min(y) - 4, (x + d).max(y) + 5, false)
        }
        _ => {
            let gens = GeneratorSet::parse(GroupSpec::free(2), "(1,0) (2,0) (0,1)").unwrap();
            let mut c = Colouring::standard(gens);
            c.switch(&Square::new(el(&c, &[x, y]), 1, 2)).unwrap();
            c.switch(&Square::new(el(&c, &[x + 2 * d, y]), 1, 2)).unwrap();
            let a = x + 2 + 2 * pick.rem_euclid(d - 1);
            let sq = Square::new(el(&c, &[a, y]), 1, 0);
            (c, sq, x.min(y) - 4, (x + 2 * d).max(y) + 6, true)
        }
    };
    // the cube bounds every coordinate, including the third one of Z³ which sits at 0
    let window = Window::cube(colouring.spec(), lo.min(-4), hi.max(5));
    MergeCase {
        colouring,
        square,
        window,
        crossing,
    }
}

fn component_of<'a>(comps: &'a [WindowComponent<GroupElement>], v: &GroupElement) -> &'a WindowComponent<GroupElement> {
    comps
        .iter()
        .find(|k| k.vertices.contains(v))
        .expect("window vertex lies in a component")
}

/// The merging conclusions for one case, each checked by the engine and by
/// window enumeration.
pub fn check_merge(case: &MergeCase) -> Result<(), String> {
    let c = &case.colouring;
    let w = &case.window;
    let sq = &case.square;
    let (i, k) = sq.gens;
    let hs = c.square_host(sq);
    if !c.is_standard_square(sq) || !is_safe_square(c, &hs).map_err(|e| e.to_string())? {
        return Err("square is not safe and standard".into());
    }
    let [x, _, xk, _] = hs.corners.clone();

    // before: distinct i-components, one of them a finite cycle
    let before = brute_force_components(c, w, i);
    let c1 = component_of(&before, &x).clone();
    let c2 = component_of(&before, &xk).clone();
    if c1.vertices == c2.vertices {
        return Err("the i-edges already share a component".into());
    }
    if c1.kind != WindowKind::Cycle && c2.kind != WindowKind::Cycle {
        return Err("neither i-component is a finite cycle".into());
    }
    let engine_c1 = trace(c, &x, i, None).map_err(|e| e.to_string())?;
    if engine_c1.is_cycle() != (c1.kind == WindowKind::Cycle) {
        return Err("engine and oracle disagree on C1 before the switch".into());
    }
    let k_single = trace(c, &x, k, None)
        .map_err(|e| e.to_string())?
        .contains_vertex(c, &hs.corners[1]);
    if k_single != case.crossing {
        return Err("k-edges do not lie as constructed".into());
    }

    let after = c.apply_switch(sq).map_err(|e| e.to_string())?;

    // one i-component takes in V(C1) ∪ V(C2)
    let merged = brute_force_components(&after, w, i);
    let m = component_of(&merged, &x);
    if !c1.vertices.iter().chain(&c2.vertices).all(|v| m.vertices.contains(v)) {
        return Err("oracle: C1 and C2 did not merge".into());
    }
    if m.kind != WindowKind::Path {
        return Err("oracle: merged component closed up".into());
    }
    let ray = trace(&after, &x, i, None).map_err(|e| e.to_string())?;
    if !ray.is_double_ray()
        || !c1
            .vertices
            .iter()
            .chain(&c2.vertices)
            .all(|v| ray.contains_vertex(&after, v))
    {
        return Err("engine: merged component is not a double-ray through C1 and C2".into());
    }

    // k-components: distinct stay distinct, a single crossing one stays single
    let ka = trace(&after, &x, k, None).map_err(|e| e.to_string())?;
    let kb = trace(&after, &xk, k, None).map_err(|e| e.to_string())?;
    if !ka.is_double_ray() || !kb.is_double_ray() {
        return Err("engine: a k-component is finite after the switch".into());
    }
    let engine_single = ka.contains_vertex(&after, &xk);
    let kcomps = brute_force_components(&after, w, k);
    let (oa, ob) = (component_of(&kcomps, &x), component_of(&kcomps, &xk));
    if oa.kind != WindowKind::Path || ob.kind != WindowKind::Path {
        return Err("oracle: a k-component closed up".into());
    }
    let oracle_single = oa.vertices == ob.vertices;
    if engine_single != case.crossing || oracle_single != case.crossing {
        return Err(format!(
            "k-components: expected single = {}, engine {engine_single}, oracle {oracle_single}",
            case.crossing
        ));
    }
    Ok(())
}
