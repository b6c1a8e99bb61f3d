//! Arithmetic in `Z^n ⊕ Z_{q_1} ⊕ … ⊕ Z_{q_r}` and generating sets.

use std::fmt;
use std::str::FromStr;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::lattice::SmithForm;

pub type Coords = SmallVec<[i64; 4]>;

/// A finitely generated abelian group in classified form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    free_rank: usize,
    torsion: Vec<i64>,
}

/// Normal form element: free coordinates followed by reduced residues.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(pub Coords);

impl GroupSpec {
    pub fn new(free_rank: usize, torsion: Vec<i64>) -> Result<Self> {
        if let Some(q) = torsion.iter().find(|&&q| q < 2) {
            return Err(Error::Parse(format!("torsion order {q} must be at least 2")));
        }
        Ok(GroupSpec { free_rank, torsion })
    }

    pub fn free(n: usize) -> Self {
        GroupSpec {
            free_rank: n,
            torsion: Vec::new(),
        }
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion_orders(&self) -> &[i64] {
        &self.torsion
    }

    pub fn dim(&self) -> usize {
        self.free_rank + self.torsion.len()
    }

    pub fn one_ended(&self) -> bool {
        self.free_rank >= 2
    }

    /// Number of elements of the torsion subgroup.
    pub fn torsion_size(&self) -> usize {
        self.torsion.iter().map(|&q| q as usize).product()
    }

    pub fn normalize(&self, raw: &[i64]) -> Result<GroupElement> {
        if raw.len() != self.dim() {
            return Err(Error::SpecMismatch {
                expected: self.dim(),
                got: raw.len(),
            });
        }
        let mut c: Coords = raw.iter().copied().collect();
        self.reduce(&mut c);
        Ok(GroupElement(c))
    }

    fn reduce(&self, c: &mut [i64]) {
        for (x, q) in c[self.free_rank..].iter_mut().zip(&self.torsion) {
            *x = x.rem_euclid(*q);
        }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(SmallVec::from_elem(0, self.dim()))
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let mut c: Coords = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
        self.reduce(&mut c);
        GroupElement(c)
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let mut c: Coords = a.0.iter().zip(&b.0).map(|(x, y)| x - y).collect();
        self.reduce(&mut c);
        GroupElement(c)
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        let mut c: Coords = a.0.iter().map(|x| -x).collect();
        self.reduce(&mut c);
        GroupElement(c)
    }

    pub fn scale(&self, k: i64, a: &GroupElement) -> GroupElement {
        let mut c: Coords = a.0.iter().map(|x| k * x).collect();
        self.reduce(&mut c);
        GroupElement(c)
    }

    /// `a + k·g`
    pub fn add_scaled(&self, a: &GroupElement, k: i64, g: &GroupElement) -> GroupElement {
        let mut c: Coords = a.0.iter().zip(&g.0).map(|(x, y)| x + k * y).collect();
        self.reduce(&mut c);
        GroupElement(c)
    }

    /// The unique `k` with `z = k·g`, if any. `g` must have infinite order.
    pub fn solve_multiple(&self, z: &GroupElement, g: &GroupElement) -> Option<i64> {
        let n = self.free_rank;
        let j = (0..n).find(|&j| g.0[j] != 0)?;
        if z.0[j] % g.0[j] != 0 {
            return None;
        }
        let k = z.0[j] / g.0[j];
        (self.scale(k, g) == *z).then_some(k)
    }

    /// True iff `⟨g1, g2⟩ ≅ Z²`, i.e. the free parts are linearly independent.
    pub fn is_free_rank_two(&self, g1: &GroupElement, g2: &GroupElement) -> bool {
        let n = self.free_rank;
        (0..n).any(|p| (p + 1..n).any(|q| g1.0[p] * g2.0[q] - g1.0[q] * g2.0[p] != 0))
    }

    /// L∞ norm of the free part.
    pub fn free_norm(&self, a: &GroupElement) -> i64 {
        a.0[..self.free_rank].iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    pub fn parse_element(&self, s: &str) -> Result<GroupElement> {
        let coords = parse_tuple(s)?;
        self.normalize(&coords)
    }

    pub fn is_torsion(&self, a: &GroupElement) -> bool {
        a.0[..self.free_rank].iter().all(|&x| x == 0)
    }
}

impl GroupElement {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            n => parts.push(format!("Z^{n}")),
        }
        parts.extend(self.torsion.iter().map(|q| format!("Z_{q}")));
        if parts.is_empty() {
            parts.push("Z^0".to_string());
        }
        write!(f, "{}", parts.join(" x "))
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    /// Accepts `Z^2 x Z_3`, `Z x Z_2 x Z_4`, `Z^3`; `+` and `⊕` also separate factors.
    fn from_str(s: &str) -> Result<Self> {
        let mut free = 0usize;
        let mut torsion = Vec::new();
        let norm = s.replace(['+', '⊕'], " x ");
        for part in norm.split(['x', '*']).map(str::trim) {
            if part.is_empty() {
                return Err(Error::Parse(format!("empty factor in group spec {s:?}")));
            }
            let bad = || Error::Parse(format!("cannot read group factor {part:?}"));
            let rest = part.strip_prefix('Z').ok_or_else(bad)?.trim();
            if rest.is_empty() {
                free += 1;
            } else if let Some(e) = rest.strip_prefix('^') {
                free += e.trim().parse::<usize>().map_err(|_| bad())?;
            } else if let Some(q) = rest.strip_prefix('_') {
                let q = q.trim().parse::<i64>().map_err(|_| bad())?;
                torsion.push(q);
            } else {
                return Err(bad());
            }
        }
        GroupSpec::new(free, torsion)
    }
}

/// Reads `(1,-2,5)`.
pub fn parse_tuple(s: &str) -> Result<Vec<i64>> {
    let t = s.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("expected a parenthesised tuple, got {t:?}")))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad integer {x:?} in {t:?}")))
        })
        .collect()
}

/// Splits `(1,0) (0,1)` or `(1,0),(0,1)` into tuple strings.
pub fn split_tuples(s: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, ch) in s.char_indices() {
        match ch {
            '(' if start.is_none() => start = Some(k),
            '(' => return Err(Error::Parse(format!("nested parenthesis in {s:?}"))),
            ')' => {
                let a = start
                    .take()
                    .ok_or_else(|| Error::Parse(format!("unbalanced ')' in {s:?}")))?;
                out.push(&s[a..=k]);
            }
            c if start.is_none() && !(c.is_whitespace() || c == ',' || c == ';') => {
                return Err(Error::Parse(format!("unexpected {c:?} in {s:?}")));
            }
            _ => {}
        }
    }
    if start.is_some() {
        return Err(Error::Parse(format!("unbalanced '(' in {s:?}")));
    }
    Ok(out)
}

/// An ordered generating set of non-torsion elements with `S ∩ −S = ∅`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeneratorSet {
    spec: GroupSpec,
    gens: Vec<GroupElement>,
}

impl GeneratorSet {
    pub fn new(spec: GroupSpec, gens: Vec<GroupElement>) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::InvalidGenerators("empty generating set".into()));
        }
        for g in &gens {
            if g.0.len() != spec.dim() {
                return Err(Error::SpecMismatch {
                    expected: spec.dim(),
                    got: g.0.len(),
                });
            }
        }
        let gens: Vec<GroupElement> = gens.into_iter().map(|g| spec.normalize(&g.0)).collect::<Result<_>>()?;
        if let Some(i) = gens.iter().position(|g| spec.is_torsion(g)) {
            return Err(Error::TorsionGenerator(i));
        }
        for (i, a) in gens.iter().enumerate() {
            for (j, b) in gens.iter().enumerate().skip(i + 1) {
                if a == b {
                    return Err(Error::InvalidGenerators(format!(
                        "generators {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
                if *a == spec.neg(b) {
                    return Err(Error::InvalidGenerators(format!(
                        "generator {} is the inverse of generator {}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let d = spec.dim();
        let mut rows: Vec<Vec<i64>> = spec
            .torsion
            .iter()
            .enumerate()
            .map(|(k, &q)| {
                let mut r = vec![0; d];
                r[spec.free_rank + k] = q;
                r
            })
            .collect();
        rows.extend(gens.iter().map(|g| g.0.to_vec()));
        if d > 0 && !SmithForm::new(&rows, d).is_trivial_quotient() {
            return Err(Error::InvalidGenerators(
                "the elements do not generate the group".into(),
            ));
        }
        Ok(GeneratorSet { spec, gens })
    }

    /// The free unit vectors `e_1, …, e_n`.
    pub fn units(spec: GroupSpec) -> Result<Self> {
        let gens = (0..spec.free_rank())
            .map(|k| {
                let mut c = vec![0; spec.dim()];
                c[k] = 1;
                spec.normalize(&c)
            })
            .collect::<Result<_>>()?;
        GeneratorSet::new(spec, gens)
    }

    /// Parses `(1,0,0) (0,1,0)` or the keyword `units`.
    pub fn parse(spec: GroupSpec, s: &str) -> Result<Self> {
        if s.trim() == "units" {
            return GeneratorSet::units(spec);
        }
        let gens = split_tuples(s)?
            .into_iter()
            .map(|t| spec.parse_element(t))
            .collect::<Result<_>>()?;
        GeneratorSet::new(spec, gens)
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn get(&self, i: usize) -> &GroupElement {
        &self.gens[i]
    }

    pub fn gens(&self) -> &[GroupElement] {
        &self.gens
    }

    /// Smallest `j ≠ i` with `⟨g_i, g_j⟩ ≅ Z²` (0-based).
    pub fn partner_generator(&self, i: usize) -> Result<usize> {
        if !self.spec.one_ended() {
            return Err(Error::NotOneEnded(self.spec.free_rank()));
        }
        (0..self.len())
            .find(|&j| j != i && self.spec.is_free_rank_two(&self.gens[i], &self.gens[j]))
            .ok_or_else(|| Error::invariant("partner", format!("no partner for generator {}", i + 1)))
    }

    pub fn format_gens(&self) -> String {
        self.gens.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2z3() -> GroupSpec {
        "Z^2 x Z_3".parse().unwrap()
    }

    fn el(spec: &GroupSpec, c: &[i64]) -> GroupElement {
        spec.normalize(c).unwrap()
    }

    #[test]
    fn normalize_reduces_torsion() {
        let s = z2z3();
        assert_eq!(el(&s, &[1, -2, 5]).coords(), &[1, -2, 2]);
        assert_eq!(el(&GroupSpec::free(2), &[0, 0]), GroupSpec::free(2).identity());
        let zz2: GroupSpec = "Z x Z_2".parse().unwrap();
        assert_eq!(el(&zz2, &[-1, -1]).coords(), &[-1, 1]);
        assert_eq!(s.normalize(&[1, 2]), Err(Error::SpecMismatch { expected: 3, got: 2 }));
    }

    #[test]
    fn spec_parsing_round_trips() {
        for t in ["Z^2 x Z_3", "Z", "Z^3", "Z x Z_2 x Z_4"] {
            let s: GroupSpec = t.parse().unwrap();
            assert_eq!(s.to_string(), t);
        }
        let s: GroupSpec = "Z^2 + Z_3".parse().unwrap();
        assert_eq!(s, z2z3());
        assert!("Z_1".parse::<GroupSpec>().is_err());
        assert!("Q^2".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn solve_multiple_examples() {
        let z2 = GroupSpec::free(2);
        assert_eq!(z2.solve_multiple(&el(&z2, &[3, 6]), &el(&z2, &[1, 2])), Some(3));
        assert_eq!(z2.solve_multiple(&el(&z2, &[3, 5]), &el(&z2, &[1, 2])), None);
        let s = z2z3();
        assert_eq!(s.solve_multiple(&el(&s, &[2, 0, 1]), &el(&s, &[1, 0, 2])), Some(2));
    }

    /// Brute-force relation search: some `(a,b) ≠ 0` in the box with `a·g1 + b·g2 = 0`.
    fn has_relation(spec: &GroupSpec, g1: &GroupElement, g2: &GroupElement, bound: i64) -> bool {
        (-bound..=bound).any(|a| {
            (-bound..=bound)
                .any(|b| (a, b) != (0, 0) && spec.add(&spec.scale(a, g1), &spec.scale(b, g2)) == spec.identity())
        })
    }

    #[test]
    fn rank_two_examples_against_search() {
        let z2 = GroupSpec::free(2);
        let cases = [
            (z2.clone(), vec![1, 0], vec![0, 1], true),
            (z2.clone(), vec![1, 2], vec![2, 4], false),
            (z2z3(), vec![1, 0, 1], vec![2, 0, 0], false),
        ];
        for (s, a, b, want) in cases {
            let (a, b) = (el(&s, &a), el(&s, &b));
            assert_eq!(s.is_free_rank_two(&a, &b), want);
            assert_eq!(!has_relation(&s, &a, &b, 6), want);
        }
    }

    #[test]
    fn partner_examples() {
        let z2 = GroupSpec::free(2);
        let s = GeneratorSet::parse(z2.clone(), "(1,0) (0,1)").unwrap();
        assert_eq!(s.partner_generator(0).unwrap(), 1);
        let s = GeneratorSet::parse(z2, "(1,0) (2,0) (0,1)").unwrap();
        assert_eq!(s.partner_generator(0).unwrap(), 2);
        let s = GeneratorSet::parse(z2z3(), "(1,0,0) (0,1,0) (1,1,1)").unwrap();
        assert_eq!(s.partner_generator(2).unwrap(), 0);
        let z = GeneratorSet::parse(GroupSpec::free(1), "(1)").unwrap();
        assert_eq!(z.partner_generator(0), Err(Error::NotOneEnded(1)));
    }

    #[test]
    fn generator_validation() {
        let z2 = GroupSpec::free(2);
        assert!(matches!(
            GeneratorSet::parse(z2.clone(), "(1,0) (1,0) (0,1)"),
            Err(Error::InvalidGenerators(_))
        ));
        assert!(matches!(
            GeneratorSet::parse(z2.clone(), "(1,0) (-1,0) (0,1)"),
            Err(Error::InvalidGenerators(_))
        ));
        assert!(matches!(
            GeneratorSet::parse(z2.clone(), "(2,0) (0,1)"),
            Err(Error::InvalidGenerators(_))
        ));
        assert!(GeneratorSet::parse(z2.clone(), "(2,1) (1,1)").is_ok());
        assert_eq!(
            GeneratorSet::parse(z2z3(), "(1,0,0) (0,0,1)"),
            Err(Error::TorsionGenerator(1))
        );
        // torsion reached only through a mixed generator
        assert!(GeneratorSet::parse(z2z3(), "(1,0,0) (0,1,0) (1,1,1)").is_ok());
        assert!(GeneratorSet::parse(z2z3(), "(1,0,0) (0,1,0)").is_err());
        assert_eq!(GeneratorSet::units(GroupSpec::free(3)).unwrap().len(), 3);
    }

    #[test]
    fn tuple_splitting() {
        assert_eq!(split_tuples("(1,0) (0,1)").unwrap(), vec!["(1,0)", "(0,1)"]);
        assert_eq!(split_tuples("(1, 0),(0,1)").unwrap(), vec!["(1, 0)", "(0,1)"]);
        assert!(split_tuples("(1,0").is_err());
        assert!(split_tuples("1,0").is_err());
        assert_eq!(parse_tuple("( -1, 2 )").unwrap(), vec![-1, 2]);
    }
}
