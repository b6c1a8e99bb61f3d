//! Integer matrix reduction used for quotient coordinates and the
//! generating-set check.

/// Smith form `U·A·V = D` of an integer matrix with the column transform `V`.
///
/// Only `V` is kept: for a relation lattice spanned by the rows of `A`, the
/// map `x ↦ x·V` identifies `Z^cols / rowspace(A)` with `⊕ Z/d_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    /// Diagonal entries `d_0 | d_1 | …`, one per column; zero past the rank.
    pub diagonal: Vec<i64>,
    /// Column transform, `cols × cols`, unimodular.
    pub transform: Vec<Vec<i64>>,
}

impl SmithForm {
    pub fn new(rows: &[Vec<i64>], cols: usize) -> Self {
        let mut a: Vec<Vec<i128>> = rows
            .iter()
            .map(|r| {
                assert_eq!(r.len(), cols, "ragged relation matrix");
                r.iter().map(|&x| x as i128).collect()
            })
            .collect();
        let m = a.len();
        let mut v: Vec<Vec<i128>> = (0..cols)
            .map(|i| (0..cols).map(|j| i128::from(i == j)).collect())
            .collect();

        let mut t = 0;
        while t < m.min(cols) {
            // smallest nonzero pivot in the trailing block
            let pivot = (t..m)
                .flat_map(|i| (t..cols).map(move |j| (i, j)))
                .filter(|&(i, j)| a[i][j] != 0)
                .min_by_key(|&(i, j)| a[i][j].abs());
            let Some((pi, pj)) = pivot else { break };
            a.swap(t, pi);
            swap_cols(&mut a, t, pj);
            swap_cols(&mut v, t, pj);

            loop {
                let mut dirty = false;
                for i in t + 1..m {
                    let q = a[i][t].div_euclid(a[t][t]);
                    if q != 0 {
                        let pivot = a[t].clone();
                        for (x, p) in a[i][t..cols].iter_mut().zip(&pivot[t..cols]) {
                            *x -= q * p;
                        }
                    }
                    if a[i][t] != 0 {
                        a.swap(t, i);
                        dirty = true;
                    }
                }
                for j in t + 1..cols {
                    let q = a[t][j].div_euclid(a[t][t]);
                    if q != 0 {
                        add_col(&mut a, j, t, -q);
                        add_col(&mut v, j, t, -q);
                    }
                    if a[t][j] != 0 {
                        swap_cols(&mut a, t, j);
                        swap_cols(&mut v, t, j);
                        dirty = true;
                    }
                }
                if dirty {
                    continue;
                }
                // divisibility of the remaining block
                let bad = (t + 1..m)
                    .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                    .find(|&(i, j)| a[i][j] % a[t][t] != 0);
                match bad {
                    Some((i, _)) => {
                        let row = a[i].clone();
                        for (x, r) in a[t][t..cols].iter_mut().zip(&row[t..cols]) {
                            *x += r;
                        }
                    }
                    None => break,
                }
            }
            if a[t][t] < 0 {
                for x in &mut a[t][t..cols] {
                    *x = -*x;
                }
            }
            t += 1;
        }

        let diagonal = (0..cols).map(|j| if j < m { a[j][j] as i64 } else { 0 }).collect();
        let transform = v
            .into_iter()
            .map(|r| r.into_iter().map(|x| x as i64).collect())
            .collect();
        SmithForm { diagonal, transform }
    }

    /// Image of a row vector under `V`.
    pub fn apply(&self, x: &[i64]) -> Vec<i64> {
        let cols = self.transform.len();
        (0..cols)
            .map(|j| (0..cols).map(|i| x[i] * self.transform[i][j]).sum())
            .collect()
    }

    /// True when the relations kill nothing and everything: the quotient is trivial.
    pub fn is_trivial_quotient(&self) -> bool {
        self.diagonal.iter().all(|&d| d == 1)
    }
}

fn swap_cols<T>(a: &mut [Vec<T>], x: usize, y: usize) {
    if x != y {
        for row in a.iter_mut() {
            row.swap(x, y);
        }
    }
}

/// column `dst += k · column src`
fn add_col(a: &mut [Vec<i128>], dst: usize, src: usize, k: i128) {
    for row in a.iter_mut() {
        row[dst] += k * row[src];
    }
}

/// Extended gcd: returns `(g, s, t)` with `s·a + t·b = g ≥ 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_of_simple_relations() {
        // Z^2 / <(2,0),(0,3)> ≅ Z_6
        let s = SmithForm::new(&[vec![2, 0], vec![0, 3]], 2);
        let mut d = s.diagonal.clone();
        d.sort();
        assert_eq!(d, vec![1, 6]);
    }

    #[test]
    fn unit_relations_give_trivial_quotient() {
        let s = SmithForm::new(&[vec![1, 0], vec![0, 1], vec![1, 1]], 2);
        assert!(s.is_trivial_quotient());
        let s = SmithForm::new(&[vec![1, 0], vec![0, 2]], 2);
        assert!(!s.is_trivial_quotient());
    }

    #[test]
    fn transform_maps_relations_into_diagonal_lattice() {
        let rows = vec![vec![4, 6, 0], vec![0, 0, 3], vec![2, 2, 1]];
        let s = SmithForm::new(&rows, 3);
        for r in &rows {
            let img = s.apply(r);
            for (x, d) in img.iter().zip(&s.diagonal) {
                if *d == 0 {
                    assert_eq!(*x, 0);
                } else {
                    assert_eq!(x % d, 0);
                }
            }
        }
    }

    #[test]
    fn ext_gcd_bezout() {
        for (a, b) in [(12, 18), (-4, 6), (7, 0), (0, -5), (35, -14)] {
            let (g, s, t) = ext_gcd(a, b);
            assert_eq!(s * a + t * b, g);
            assert!(g >= 0);
        }
    }
}
