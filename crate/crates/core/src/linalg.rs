//! Exact sparse linear algebra over the rationals.
//!
//! Ranks come from fraction-free integer elimination ([`rank_fraction_free`]); kernels,
//! image membership and witnesses come from a rational echelon form that tracks the
//! combination producing every reduced vector ([`Echelon`]). [`dense_rank`] is an independent
//! dense elimination used to cross-check ranks on small matrices.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::fock::Coefficient;

pub type SparseVec = BTreeMap<usize, Coefficient>;

/// Column-major sparse matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub columns: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            columns: vec![SparseVec::new(); cols],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.is_empty())
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(|c| c.len()).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> Coefficient {
        self.columns[c]
            .get(&r)
            .cloned()
            .unwrap_or_else(Coefficient::zero)
    }

    pub fn mul_vec(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (j, x) in v {
            for (i, a) in &self.columns[*j] {
                add_entry(&mut out, *i, a * x);
            }
        }
        out
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows);
        SparseMatrix {
            rows: self.rows,
            cols: other.cols,
            columns: other.columns.iter().map(|c| self.mul_vec(c)).collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<Coefficient>> {
        let mut d = vec![vec![Coefficient::zero(); self.cols]; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, x) in col {
                d[*i][j] = x.clone();
            }
        }
        d
    }
}

pub fn add_entry(v: &mut SparseVec, i: usize, x: Coefficient) {
    if x.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match v.entry(i) {
        Entry::Vacant(e) => {
            e.insert(x);
        }
        Entry::Occupied(mut e) => {
            *e.get_mut() += x;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

/// `a + s * b`
fn axpy(a: &mut SparseVec, s: &Coefficient, b: &SparseVec) {
    for (i, x) in b {
        add_entry(a, *i, s * x);
    }
}

type IntVec = BTreeMap<usize, BigInt>;

fn to_integer_vec(v: &SparseVec) -> IntVec {
    let lcm = v.values().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    v.iter()
        .map(|(i, x)| (*i, x.numer() * (&lcm / x.denom())))
        .collect()
}

fn remove_content(v: &mut IntVec) {
    let g = v.values().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.values_mut() {
            *x /= &g;
        }
    }
}

/// Rank by fraction-free elimination: integer row operations `r <- p r - a q` with content
/// removal, pivots chosen by smallest magnitude then lowest index, vectors processed sparsest
/// first.
pub fn rank_fraction_free(m: &SparseMatrix) -> usize {
    let mut vecs: Vec<IntVec> = m
        .columns
        .iter()
        .filter(|c| !c.is_empty())
        .map(to_integer_vec)
        .collect();
    vecs.sort_by_key(|v| v.len());
    let mut pivots: Vec<(usize, IntVec)> = Vec::new();
    for mut v in vecs {
        for (p, pv) in &pivots {
            if let Some(a) = v.get(p).cloned() {
                let lead = &pv[p];
                let mut out = IntVec::new();
                for (i, x) in &v {
                    out.insert(*i, x * lead);
                }
                for (i, y) in pv {
                    let e = out.entry(*i).or_insert_with(BigInt::zero);
                    *e -= &a * y;
                }
                out.retain(|_, x| !x.is_zero());
                remove_content(&mut out);
                v = out;
                if v.is_empty() {
                    break;
                }
            }
        }
        if v.is_empty() {
            continue;
        }
        let p = *v
            .iter()
            .min_by(|a, b| a.1.abs().cmp(&b.1.abs()).then(a.0.cmp(b.0)))
            .map(|(i, _)| i)
            .unwrap();
        pivots.push((p, v));
    }
    pivots.len()
}

/// Dense exact Gaussian elimination; the independent rank oracle.
pub fn dense_rank(rows: &[Vec<Coefficient>]) -> usize {
    let mut a: Vec<Vec<Coefficient>> = rows.to_vec();
    let nrows = a.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = a[0].len();
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..nrows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let pivot = a[rank][c].clone();
        for r in 0..nrows {
            if r != rank && !a[r][c].is_zero() {
                let f = &a[r][c] / &pivot;
                let (row, piv) = if r < rank {
                    let (lo, hi) = a.split_at_mut(rank);
                    (&mut lo[r], &hi[0])
                } else {
                    let (lo, hi) = a.split_at_mut(r);
                    (&mut hi[0], &lo[rank])
                };
                for (x, y) in row[c..ncols].iter_mut().zip(&piv[c..ncols]) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// Rational echelon basis with pivots in insertion order. Every stored vector carries the
/// combination of inserted tags that produced it.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<(usize, SparseVec, SparseVec)>,
}

impl Echelon {
    pub fn new() -> Self {
        Echelon { rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `v` against the basis. Returns the residual and the combination `c` with
    /// `v = residual + sum c_t (inserted vector t)`.
    pub fn reduce(&self, v: &SparseVec) -> (SparseVec, SparseVec) {
        let mut r = v.clone();
        let mut combo = SparseVec::new();
        for (p, row, track) in &self.rows {
            if let Some(a) = r.get(p).cloned() {
                axpy(&mut r, &-&a, row);
                axpy(&mut combo, &a, track);
            }
        }
        (r, combo)
    }

    /// Insert `v` under `tag`. If `v` depends on the basis, returns the kernel relation
    /// (`tag` minus the combination), otherwise stores the normalized residual.
    pub fn insert(&mut self, v: &SparseVec, tag: usize) -> Option<SparseVec> {
        let (r, combo) = self.reduce(v);
        let mut track = SparseVec::new();
        track.insert(tag, Coefficient::one());
        axpy(&mut track, &-Coefficient::one(), &combo);
        if r.is_empty() {
            return Some(track);
        }
        let (p, lead) = r.iter().next().map(|(i, x)| (*i, x.clone())).unwrap();
        let inv = lead.recip();
        let row: SparseVec = r.into_iter().map(|(i, x)| (i, x * &inv)).collect();
        let track: SparseVec = track.into_iter().map(|(i, x)| (i, x * &inv)).collect();
        self.rows.push((p, row, track));
        None
    }

    /// Insert without tracking; returns whether the residual was nonzero and the residual.
    pub fn insert_untracked(&mut self, v: &SparseVec) -> Option<SparseVec> {
        let (r, _) = self.reduce(v);
        if r.is_empty() {
            return None;
        }
        let p = *r.keys().next().unwrap();
        let inv = r[&p].recip();
        let row: SparseVec = r.iter().map(|(i, x)| (*i, x * &inv)).collect();
        self.rows.push((p, row, SparseVec::new()));
        Some(r)
    }
}

/// Kernel basis of `m` (column relations).
pub fn kernel(m: &SparseMatrix) -> Vec<SparseVec> {
    let mut e = Echelon::new();
    let mut out = Vec::new();
    for (j, col) in m.columns.iter().enumerate() {
        if let Some(rel) = e.insert(col, j) {
            out.push(rel);
        }
    }
    out
}

/// Solve `m x = b`, if solvable.
pub fn solve(m: &SparseMatrix, b: &SparseVec) -> Option<SparseVec> {
    let mut e = Echelon::new();
    for (j, col) in m.columns.iter().enumerate() {
        e.insert(col, j);
    }
    let (r, combo) = e.reduce(b);
    r.is_empty().then_some(combo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{rat, ratio};

    fn mat(rows: &[&[i64]]) -> SparseMatrix {
        let nr = rows.len();
        let nc = rows[0].len();
        let mut m = SparseMatrix::zero(nr, nc);
        for (i, r) in rows.iter().enumerate() {
            for (j, x) in r.iter().enumerate() {
                if *x != 0 {
                    m.columns[j].insert(i, rat(*x));
                }
            }
        }
        m
    }

    #[test]
    fn ranks_agree() {
        let m = mat(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank_fraction_free(&m), 2);
        assert_eq!(dense_rank(&m.to_dense()), 2);
        assert_eq!(rank_fraction_free(&SparseMatrix::zero(3, 4)), 0);
    }

    #[test]
    fn kernel_and_solve() {
        let m = mat(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        let k = kernel(&m);
        assert_eq!(k.len(), 1);
        assert!(m.mul_vec(&k[0]).is_empty());
        let mut b = SparseVec::new();
        b.insert(0, rat(3));
        b.insert(1, rat(6));
        b.insert(2, rat(1));
        let x = solve(&m, &b).unwrap();
        assert_eq!(m.mul_vec(&x), b);
        let mut bad = SparseVec::new();
        bad.insert(0, rat(1));
        assert!(solve(&m, &bad).is_none());
    }

    #[test]
    fn rational_entries() {
        let mut m = SparseMatrix::zero(2, 2);
        m.columns[0].insert(0, ratio(1, 2));
        m.columns[0].insert(1, ratio(1, 3));
        m.columns[1].insert(0, ratio(3, 2));
        m.columns[1].insert(1, rat(1));
        assert_eq!(rank_fraction_free(&m), 1);
        assert_eq!(dense_rank(&m.to_dense()), 1);
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn sparse_and_dense_ranks_match(entries in proptest::collection::vec(-3i64..=3, 30)) {
            // 5x6, sparsified by the zero-weighted draw
            let mut m = SparseMatrix::zero(5, 6);
            for (k, x) in entries.iter().enumerate() {
                if *x != 0 && k % 3 != 0 {
                    m.columns[k % 6].insert(k / 6, rat(*x));
                }
            }
            prop_assert_eq!(rank_fraction_free(&m), dense_rank(&m.to_dense()));
            let ker = kernel(&m);
            prop_assert_eq!(ker.len() + rank_fraction_free(&m), 6);
            for v in ker {
                prop_assert!(m.mul_vec(&v).is_empty());
            }
        }
    }
}
