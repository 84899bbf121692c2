//! The block diagonal matching field attached to an ordered partition.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monomial::{Monomial, Partition, Variable};

/// An ordered triple `(i, j, k)` standing for the generator `x_i y_j z_k`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 3]", into = "[usize; 3]")]
pub struct Column {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl Column {
    pub const fn new(i: usize, j: usize, k: usize) -> Self {
        Column { i, j, k }
    }

    pub fn variables(self) -> [Variable; 3] {
        [Variable::x(self.i), Variable::y(self.j), Variable::z(self.k)]
    }

    pub fn monomial(self, n: usize) -> Monomial {
        Monomial::from_variables(&self.variables(), n)
    }

    /// The underlying 3-subset, sorted.
    pub fn subset(self) -> [usize; 3] {
        let mut s = [self.i, self.j, self.k];
        s.sort_unstable();
        s
    }
}

impl From<[usize; 3]> for Column {
    fn from([i, j, k]: [usize; 3]) -> Self {
        Column { i, j, k }
    }
}

impl From<Column> for [usize; 3] {
    fn from(c: Column) -> Self {
        [c.i, c.j, c.k]
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.i, self.j, self.k)
    }
}

/// Block indices `(I, J, K)` of the x-, y- and z-entries of a column.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 3]", into = "[usize; 3]")]
pub struct ColumnType {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl From<[usize; 3]> for ColumnType {
    fn from([i, j, k]: [usize; 3]) -> Self {
        ColumnType { i, j, k }
    }
}

impl From<ColumnType> for [usize; 3] {
    fn from(t: ColumnType) -> Self {
        [t.i, t.j, t.k]
    }
}

/// The distinguished ordered triple of the 3-subset `subset`.
///
/// With `i < j < k` the sorted elements and `s` the first block meeting the
/// subset, the x- and y-entries are swapped exactly when that block contains a
/// single element of the subset.
pub fn column_for_subset(subset: [usize; 3], a: &Partition) -> Result<Column> {
    let mut s = subset;
    s.sort_unstable();
    let [i, j, k] = s;
    if i == 0 || k > a.n() {
        return Err(Error::IndexOutOfRange { index: if i == 0 { 0 } else { k }, n: a.n() });
    }
    if i == j || j == k {
        return Err(Error::InvalidColumn(subset[0], subset[1], subset[2]));
    }
    // Blocks are monotone, so the first block meeting {i,j,k} is block(i).
    let first = a.block(i);
    let hits = [i, j, k].iter().filter(|&&t| a.block(t) == first).count();
    Ok(if hits == 1 { Column::new(j, i, k) } else { Column::new(i, j, k) })
}

pub fn is_valid_column(c: Column, a: &Partition) -> bool {
    let n = a.n();
    let in_range = |t: usize| (1..=n).contains(&t);
    if !(in_range(c.i) && in_range(c.j) && in_range(c.k)) {
        return false;
    }
    if c.i == c.j || c.j == c.k || c.i == c.k {
        return false;
    }
    column_for_subset([c.i, c.j, c.k], a).map(|d| d == c).unwrap_or(false)
}

/// One column per 3-subset of `[n]`, in lexicographic order of the subsets.
pub fn generators(a: &Partition) -> Result<Vec<Column>> {
    let n = a.n();
    if n < 3 {
        return Err(Error::TooFewIndices(n));
    }
    let mut out = Vec::with_capacity(n * (n - 1) * (n - 2) / 6);
    for i in 1..=n {
        for j in i + 1..=n {
            for k in j + 1..=n {
                out.push(column_for_subset([i, j, k], a)?);
            }
        }
    }
    Ok(out)
}

pub fn type_of(c: Column, a: &Partition) -> Result<ColumnType> {
    if !is_valid_column(c, a) {
        return Err(Error::InvalidColumn(c.i, c.j, c.k));
    }
    Ok(ColumnType { i: a.block(c.i), j: a.block(c.j), k: a.block(c.k) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    fn gen_strings(a: &Partition) -> BTreeSet<String> {
        generators(a).unwrap().iter().map(|c| c.monomial(a.n()).to_string()).collect()
    }

    fn set(v: &[&str]) -> BTreeSet<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn column_examples() {
        assert_eq!(column_for_subset([1, 3, 4], &p("2,3")).unwrap(), Column::new(3, 1, 4));
        assert_eq!(column_for_subset([1, 2, 3], &p("5")).unwrap(), Column::new(1, 2, 3));
        assert_eq!(column_for_subset([2, 3, 4], &p("1,3")).unwrap(), Column::new(2, 3, 4));
        assert!(column_for_subset([1, 1, 3], &p("3")).is_err());
    }

    #[test]
    fn validity_examples() {
        let a = p("1,3,1");
        assert!(!is_valid_column(Column::new(4, 3, 5), &a));
        assert!(!is_valid_column(Column::new(4, 1, 4), &a));
        assert!(is_valid_column(Column::new(3, 1, 4), &p("2,3")));
        assert!(!is_valid_column(Column::new(1, 1, 4), &p("4")));
        assert!(!is_valid_column(Column::new(1, 2, 9), &p("4")));
    }

    #[test]
    fn generator_examples() {
        assert_eq!(
            gen_strings(&p("2,3")),
            set(&[
                "x1*y2*z3", "x1*y2*z4", "x1*y2*z5", "x3*y1*z4", "x3*y1*z5", "x4*y1*z5", "x3*y2*z4", "x3*y2*z5",
                "x4*y2*z5", "x3*y4*z5",
            ])
        );
        assert_eq!(gen_strings(&p("2,2")), set(&["x1*y2*z3", "x1*y2*z4", "x3*y1*z4", "x3*y2*z4"]));
        assert_eq!(gen_strings(&p("1,3")), set(&["x2*y1*z3", "x2*y1*z4", "x3*y1*z4", "x2*y3*z4"]));
        assert_eq!(gen_strings(&p("4")), set(&["x1*y2*z3", "x1*y2*z4", "x1*y3*z4", "x2*y3*z4"]));
        assert!(generators(&p("1,1")).is_err());
    }

    #[test]
    fn type_examples() {
        let a = p("1,3,1");
        assert_eq!(type_of(Column::new(3, 1, 4), &a).unwrap(), ColumnType { i: 2, j: 1, k: 2 });
        assert_eq!(type_of(Column::new(4, 1, 5), &a).unwrap(), ColumnType { i: 2, j: 1, k: 3 });
        assert_eq!(type_of(Column::new(1, 2, 3), &p("6")).unwrap(), ColumnType { i: 1, j: 1, k: 1 });
        assert!(type_of(Column::new(4, 3, 5), &a).is_err());
    }

    #[test]
    fn invariants_over_all_compositions() {
        for n in 3..=8 {
            for a in Partition::compositions(n) {
                let gens = generators(&a).unwrap();
                assert_eq!(gens.len(), n * (n - 1) * (n - 2) / 6);
                for c in &gens {
                    assert!(is_valid_column(*c, &a));
                    let t = type_of(*c, &a).unwrap();
                    assert!(t.j <= t.i && t.i <= t.k, "{c} in {a}");
                    assert_eq!(c.k, c.i.max(c.j).max(c.k));
                    assert!(c.i < c.j || (c.j < c.i && t.j < t.i));
                    // Restricted to one block the field is diagonal.
                    if t.i == t.j && t.j == t.k {
                        assert!(c.i < c.j && c.j < c.k);
                    }
                    if a.num_blocks() == 1 {
                        assert!(c.i < c.j && c.j < c.k);
                    }
                }
            }
        }
    }
}
