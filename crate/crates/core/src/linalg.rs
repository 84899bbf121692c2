//! Exact rank and linear solves over the rationals.
//!
//! Rows are sparse `(column, value)` lists sorted by column. Elimination is
//! fraction free: a row is reduced against a pivot row by
//! `r <- (p/g) r - (v/g) pivot` and then divided by its content, so entries
//! stay small. Machine integers are tried first; on overflow the whole
//! computation restarts with big integers.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};

pub type SparseRow<T> = Vec<(usize, T)>;

trait Entry: Clone + PartialEq + Sized {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn gcd(&self, other: &Self) -> Self;
    fn div_exact(&self, d: &Self) -> Self;
    /// `a*x - b*y`, `None` on overflow.
    fn combine(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self>;
    fn is_unit(&self) -> bool;
}

impl Entry for i64 {
    fn zero() -> Self {
        0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, d: &Self) -> Self {
        self / d
    }
    fn combine(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self> {
        a.checked_mul(*x)?.checked_sub(b.checked_mul(*y)?)
    }
    fn is_unit(&self) -> bool {
        self.abs() == 1
    }
}

impl Entry for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, d: &Self) -> Self {
        self / d
    }
    fn combine(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self> {
        Some(a * x - b * y)
    }
    fn is_unit(&self) -> bool {
        self.abs().is_one()
    }
}

fn make_primitive<T: Entry>(row: &mut SparseRow<T>) {
    if row.is_empty() || row.iter().any(|(_, v)| v.is_unit()) {
        return;
    }
    let mut g = row[0].1.clone();
    for (_, v) in &row[1..] {
        g = g.gcd(v);
        if g.is_unit() {
            return;
        }
    }
    for (_, v) in row.iter_mut() {
        *v = v.div_exact(&g);
    }
}

/// `(p/g) r - (v/g) pivot`, where `p` and `v` lead `pivot` and `r`.
fn reduce<T: Entry>(r: &SparseRow<T>, pivot: &SparseRow<T>) -> Option<SparseRow<T>> {
    let p = &pivot[0].1;
    let v = &r[0].1;
    let g = p.gcd(v);
    let (fp, fv) = (p.div_exact(&g), v.div_exact(&g));
    let one_zero = T::zero();
    let mut out = Vec::with_capacity(r.len() + pivot.len());
    let (mut a, mut b) = (1, 1);
    while a < r.len() || b < pivot.len() {
        let ca = r.get(a).map_or(usize::MAX, |e| e.0);
        let cb = pivot.get(b).map_or(usize::MAX, |e| e.0);
        let (col, val) = if ca < cb {
            a += 1;
            (ca, T::combine(&fp, &r[a - 1].1, &fv, &one_zero)?)
        } else if cb < ca {
            b += 1;
            (cb, T::combine(&fp, &one_zero, &fv, &pivot[b - 1].1)?)
        } else {
            a += 1;
            b += 1;
            (ca, T::combine(&fp, &r[a - 1].1, &fv, &pivot[b - 1].1)?)
        };
        if !val.is_zero() {
            out.push((col, val));
        }
    }
    make_primitive(&mut out);
    Some(out)
}

/// Row echelon form built one row at a time.
#[derive(Clone, Debug)]
struct Echelon<T> {
    pivots: HashMap<usize, SparseRow<T>>,
}

impl<T: Entry> Echelon<T> {
    /// Reduces `row`; keeps it if independent. `None` on overflow.
    fn insert(&mut self, mut row: SparseRow<T>) -> Option<bool> {
        row.retain(|(_, v)| !v.is_zero());
        make_primitive(&mut row);
        while let Some(&(lead, _)) = row.first() {
            match self.pivots.get(&lead) {
                Some(pivot) => row = reduce(&row, pivot)?,
                None => {
                    self.pivots.insert(lead, row);
                    return Some(true);
                }
            }
        }
        Some(false)
    }
}

fn rank_generic<T: Entry>(rows: &[SparseRow<T>]) -> Option<usize> {
    let mut e = Echelon { pivots: HashMap::new() };
    let mut rank = 0;
    for row in rows {
        if e.insert(row.clone())? {
            rank += 1;
        }
    }
    Some(rank)
}

fn normalized<T: Clone>(rows: &[SparseRow<T>]) -> Vec<SparseRow<T>> {
    rows.iter()
        .map(|r| {
            let mut r = r.clone();
            r.sort_by_key(|e| e.0);
            r
        })
        .collect()
}

/// Rank of an integer matrix given by sparse rows (column indices arbitrary
/// `usize`, entries in any order within a row, no repeated columns).
pub fn rank_i64(rows: &[SparseRow<i64>]) -> usize {
    let rows = normalized(rows);
    match rank_generic(&rows) {
        Some(r) => r,
        None => {
            let big: Vec<SparseRow<BigInt>> =
                rows.iter().map(|r| r.iter().map(|(c, v)| (*c, BigInt::from(*v))).collect()).collect();
            rank_generic(&big).expect("big integer elimination cannot overflow")
        }
    }
}

/// Echelon form over the integers grown one row at a time, with undo.
/// Column indices lie in `0..columns`; rows must be sorted by column.
pub struct IncrementalRank {
    pivot: Vec<u32>,
    rows: Vec<SparseRow<i64>>,
    cur: SparseRow<i64>,
    buf: SparseRow<i64>,
}

impl IncrementalRank {
    pub fn new(columns: usize) -> Self {
        IncrementalRank { pivot: vec![u32::MAX; columns], rows: Vec::new(), cur: Vec::new(), buf: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds a row; `Some(true)` if it raised the rank, `None` on overflow
    /// (the state is unchanged in that case).
    pub fn insert(&mut self, row: &[(usize, i64)]) -> Option<bool> {
        debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
        self.cur.clear();
        self.cur.extend(row.iter().filter(|e| e.1 != 0));
        make_primitive(&mut self.cur);
        while let Some(&(lead, _)) = self.cur.first() {
            let p = self.pivot[lead];
            if p == u32::MAX {
                self.pivot[lead] = self.rows.len() as u32;
                self.rows.push(std::mem::take(&mut self.cur));
                return Some(true);
            }
            reduce_into(&self.cur, &self.rows[p as usize], &mut self.buf)?;
            std::mem::swap(&mut self.cur, &mut self.buf);
        }
        Some(false)
    }

    /// Drops the most recent pivots until the rank is `rank`.
    pub fn truncate(&mut self, rank: usize) {
        while self.rows.len() > rank {
            let row = self.rows.pop().expect("nonempty");
            self.pivot[row[0].0] = u32::MAX;
        }
    }
}

/// Reusable state for computing many ranks over a shared column space.
pub struct RankWorkspace {
    inner: IncrementalRank,
}

impl RankWorkspace {
    pub fn new(columns: usize) -> Self {
        RankWorkspace { inner: IncrementalRank::new(columns) }
    }

    pub fn rank(&mut self, rows: &[&[(usize, i64)]]) -> usize {
        let ok = rows.iter().all(|r| self.inner.insert(r).is_some());
        let rank = self.inner.rank();
        self.inner.truncate(0);
        if ok {
            rank
        } else {
            rank_i64(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
        }
    }
}

fn reduce_into(r: &[(usize, i64)], pivot: &[(usize, i64)], out: &mut SparseRow<i64>) -> Option<()> {
    let (p, v) = (pivot[0].1, r[0].1);
    let g = Integer::gcd(&p, &v);
    let (fp, fv) = (p / g, v / g);
    out.clear();
    let (mut a, mut b) = (1, 1);
    while a < r.len() || b < pivot.len() {
        let ca = r.get(a).map_or(usize::MAX, |e| e.0);
        let cb = pivot.get(b).map_or(usize::MAX, |e| e.0);
        let (col, val) = if ca < cb {
            a += 1;
            (ca, fp.checked_mul(r[a - 1].1)?)
        } else if cb < ca {
            b += 1;
            (cb, fv.checked_mul(pivot[b - 1].1)?.checked_neg()?)
        } else {
            a += 1;
            b += 1;
            (ca, fp.checked_mul(r[a - 1].1)?.checked_sub(fv.checked_mul(pivot[b - 1].1)?)?)
        };
        if val != 0 {
            out.push((col, val));
        }
    }
    make_primitive(out);
    Some(())
}

/// Rank over the rationals of a matrix with entries in `Ratio<i64>`.
pub fn rank_ratio(rows: &[SparseRow<Ratio<i64>>]) -> usize {
    let rows: Vec<SparseRow<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|(c, v)| (*c, Ratio::new(BigInt::from(*v.numer()), BigInt::from(*v.denom())))).collect())
        .collect();
    rank_rational(&rows)
}

/// Rank over the rationals; rows are scaled to integers first.
pub fn rank_rational(rows: &[SparseRow<BigRational>]) -> usize {
    let big: Vec<SparseRow<BigInt>> = rows
        .iter()
        .map(|r| {
            let l = r.iter().fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()));
            r.iter().map(|(c, v)| (*c, v.numer() * (&l / v.denom()))).collect()
        })
        .collect();
    if let Some(small) = big
        .iter()
        .map(|r| r.iter().map(|(c, v)| i64::try_from(v).ok().map(|v| (*c, v))).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()
    {
        return rank_i64(&small);
    }
    rank_generic(&normalized(&big)).expect("big integer elimination cannot overflow")
}

/// Solves `A x = b` over the rationals for dense `A` (`rows x cols`).
/// Free variables are set to zero; `None` when the system is inconsistent.
#[allow(clippy::needless_range_loop)]
pub fn solve_rational(a: &[Vec<BigRational>], b: &[BigRational], cols: usize) -> Option<Vec<BigRational>> {
    assert_eq!(a.len(), b.len());
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), cols);
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in c..=cols {
                    let delta = &f * &m[r][k];
                    m[i][k] -= delta;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (i, &c) in pivot_cols.iter().enumerate() {
        x[c] = m[i][cols].clone();
    }
    Some(x)
}

/// Rank of a dense rational matrix.
#[allow(clippy::needless_range_loop)]
pub fn rank_dense(a: &[Vec<BigRational>]) -> usize {
    let rows: Vec<SparseRow<BigRational>> = a
        .iter()
        .map(|r| r.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(c, v)| (c, v.clone())).collect())
        .collect();
    rank_rational(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        Ratio::new(BigInt::from(n), BigInt::from(d))
    }

    #[allow(clippy::needless_range_loop)]
    fn dense_rank_oracle(m: &[Vec<i64>]) -> usize {
        // Plain rational Gaussian elimination.
        let mut a: Vec<Vec<BigRational>> = m.iter().map(|r| r.iter().map(|&v| q(v, 1)).collect()).collect();
        let cols = a.first().map_or(0, Vec::len);
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
            a.swap(rank, p);
            for i in rank + 1..a.len() {
                let f = &a[i][c] / &a[rank][c];
                for k in 0..cols {
                    let d = &f * &a[rank][k];
                    a[i][k] -= d;
                }
            }
            rank += 1;
        }
        rank
    }

    fn to_sparse(m: &[Vec<i64>]) -> Vec<SparseRow<i64>> {
        m.iter().map(|r| r.iter().enumerate().filter(|(_, &v)| v != 0).map(|(c, &v)| (c, v)).collect()).collect()
    }

    #[test]
    fn small_ranks() {
        assert_eq!(rank_i64(&[]), 0);
        assert_eq!(rank_i64(&to_sparse(&[vec![1, 2], vec![2, 4]])), 1);
        assert_eq!(rank_i64(&to_sparse(&[vec![1, -1, 0], vec![0, 1, -1], vec![1, 0, -1]])), 2);
        assert_eq!(rank_i64(&to_sparse(&[vec![2, 3], vec![3, 5]])), 2);
    }

    #[test]
    fn overflow_falls_back() {
        let big = i64::MAX / 2;
        let m = vec![vec![big, big - 1, 3], vec![big - 1, big, 5], vec![1, 1, 1]];
        assert_eq!(rank_i64(&to_sparse(&m)), dense_rank_oracle(&m));
        let m = vec![vec![big, big - 1], vec![2 * (big / 2), 2 * ((big - 1) / 2)]];
        assert_eq!(rank_i64(&to_sparse(&m)), dense_rank_oracle(&m));
    }

    #[test]
    fn rational_rank_and_solve() {
        let a = vec![vec![q(1, 2), q(1, 3)], vec![q(1, 4), q(1, 6)]];
        assert_eq!(rank_dense(&a), 1);
        let x = solve_rational(&a, &[q(1, 1), q(1, 2)], 2).unwrap();
        assert_eq!(&a[0][0] * &x[0] + &a[0][1] * &x[1], q(1, 1));
        assert!(solve_rational(&a, &[q(1, 1), q(1, 1)], 2).is_none());
        assert_eq!(solve_rational(&[], &[], 3).unwrap(), vec![q(0, 1); 3]);
    }

    proptest! {
        #[test]
        fn rank_matches_dense_oracle(m in prop::collection::vec(prop::collection::vec(-3i64..=3, 6), 0..8)) {
            prop_assert_eq!(rank_i64(&to_sparse(&m)), dense_rank_oracle(&m));
        }

        #[test]
        fn workspace_matches_oracle(ms in prop::collection::vec(prop::collection::vec(prop::collection::vec(-3i64..=3, 6), 0..8), 1..4)) {
            let mut ws = RankWorkspace::new(6);
            for m in &ms {
                let rows = to_sparse(m);
                let refs: Vec<&[(usize, i64)]> = rows.iter().map(|r| r.as_slice()).collect();
                prop_assert_eq!(ws.rank(&refs), dense_rank_oracle(m));
            }
        }

        #[test]
        fn incremental_undo(m in prop::collection::vec(prop::collection::vec(-3i64..=3, 6), 1..8), cut in 0usize..8) {
            let rows = to_sparse(&m);
            let cut = cut.min(rows.len());
            let mut inc = IncrementalRank::new(6);
            for r in &rows[..cut] { inc.insert(r).unwrap(); }
            let mark = inc.rank();
            prop_assert_eq!(mark, dense_rank_oracle(&m[..cut]));
            for r in &rows[cut..] { inc.insert(r).unwrap(); }
            prop_assert_eq!(inc.rank(), dense_rank_oracle(&m));
            inc.truncate(mark);
            for r in rows[cut..].iter().rev() { inc.insert(r).unwrap(); }
            prop_assert_eq!(inc.rank(), dense_rank_oracle(&m));
        }

        #[test]
        fn solve_satisfies_system(m in prop::collection::vec(prop::collection::vec(-4i64..=4, 4), 1..6),
                                  x in prop::collection::vec(-5i64..=5, 4)) {
            let a: Vec<Vec<BigRational>> = m.iter().map(|r| r.iter().map(|&v| q(v, 1)).collect()).collect();
            let b: Vec<BigRational> = a.iter().map(|r| r.iter().zip(&x).map(|(u, &v)| u * q(v, 1)).sum()).collect();
            let sol = solve_rational(&a, &b, 4).expect("consistent by construction");
            for (row, rhs) in a.iter().zip(&b) {
                let lhs: BigRational = row.iter().zip(&sol).map(|(u, v)| u * v).sum();
                prop_assert_eq!(&lhs, rhs);
            }
        }
    }
}
