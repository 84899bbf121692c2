//! Monomials in the variables `x_1..x_n, y_1..y_n, z_1..z_n` and the block
//! structure of an ordered partition of `[n]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered sequence of positive parts `(a_1, ..., a_r)` summing to `n`.
///
/// Block `s` (1-based) is the interval `alpha_{s-1}+1 ..= alpha_s` where
/// `alpha_s = a_1 + ... + a_s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    parts: Vec<usize>,
    /// `block[i-1]` is the block containing `i`.
    block: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidPartition("no parts".into()));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidPartition(format!("zero part in {parts:?}")));
        }
        let block = parts.iter().enumerate().flat_map(|(s, &len)| std::iter::repeat_n(s + 1, len)).collect();
        Ok(Partition { parts, block })
    }

    /// The single-block partition `(n)`, giving the diagonal matching field.
    pub fn diagonal(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.block.len()
    }

    /// Number of blocks `r`.
    pub fn num_blocks(&self) -> usize {
        self.parts.len()
    }

    /// The block index `s` in `1..=r` with `alpha_{s-1} < i <= alpha_s`.
    pub fn block_of(&self, i: usize) -> Result<usize> {
        if i == 0 || i > self.n() {
            return Err(Error::IndexOutOfRange { index: i, n: self.n() });
        }
        Ok(self.block[i - 1])
    }

    /// Unchecked variant for indices already known to lie in `[n]`.
    pub(crate) fn block(&self, i: usize) -> usize {
        self.block[i - 1]
    }

    /// First and last element of block `s`.
    pub fn block_range(&self, s: usize) -> Option<(usize, usize)> {
        if s == 0 || s > self.parts.len() {
            return None;
        }
        let end: usize = self.parts[..s].iter().sum();
        Some((end - self.parts[s - 1] + 1, end))
    }

    /// All compositions of `n`, in lexicographic order of their parts.
    pub fn compositions(n: usize) -> Vec<Partition> {
        fn rec(rest: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if rest == 0 {
                out.push(Partition::new(cur.clone()).expect("positive parts"));
                return;
            }
            for p in 1..=rest {
                cur.push(p);
                rec(rest - p, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if n > 0 {
            rec(n, &mut Vec::new(), &mut out);
        }
        out
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;
    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

impl FromStr for Partition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::InvalidPartition(format!("bad part {t:?} in {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    X,
    Y,
    Z,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::X, Family::Y, Family::Z];

    fn offset(self) -> usize {
        match self {
            Family::X => 0,
            Family::Y => 1,
            Family::Z => 2,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Family::X => 'x',
            Family::Y => 'y',
            Family::Z => 'z',
        }
    }
}

/// A variable `x_i`, `y_i` or `z_i`. The derived order is the global variable
/// order `x_1 < ... < x_n < y_1 < ... < z_n`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Variable {
    pub family: Family,
    pub index: usize,
}

impl Variable {
    pub fn new(family: Family, index: usize, n: usize) -> Result<Self> {
        if index == 0 || index > n {
            return Err(Error::IndexOutOfRange { index, n });
        }
        Ok(Variable { family, index })
    }

    pub fn x(index: usize) -> Self {
        Variable { family: Family::X, index }
    }

    pub fn y(index: usize) -> Self {
        Variable { family: Family::Y, index }
    }

    pub fn z(index: usize) -> Self {
        Variable { family: Family::Z, index }
    }

    /// Position in the exponent vector of a monomial over `3n` variables.
    pub fn position(self, n: usize) -> usize {
        self.family.offset() * n + self.index - 1
    }

    pub fn from_position(pos: usize, n: usize) -> Self {
        Variable { family: Family::ALL[pos / n], index: pos % n + 1 }
    }

    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let bad = || Error::Parse(format!("bad variable {s:?}"));
        let mut chars = s.chars();
        let family = match chars.next() {
            Some('x') => Family::X,
            Some('y') => Family::Y,
            Some('z') => Family::Z,
            _ => return Err(bad()),
        };
        let index = chars.as_str().parse::<usize>().map_err(|_| bad())?;
        Variable::new(family, index, n)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.letter(), self.index)
    }
}

/// A monomial over `3n` variables, stored as its exponent vector with layout
/// `x_1..x_n, y_1..y_n, z_1..z_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    exps: Vec<u8>,
}

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial { exps: vec![0; 3 * n] }
    }

    pub fn from_exponents(exps: Vec<u8>) -> Result<Self> {
        if !exps.len().is_multiple_of(3) {
            return Err(Error::Parse(format!("exponent vector length {} is not a multiple of 3", exps.len())));
        }
        Ok(Monomial { exps })
    }

    pub fn from_variables(vars: &[Variable], n: usize) -> Self {
        let mut m = Monomial::one(n);
        for &v in vars {
            m.exps[v.position(n)] += 1;
        }
        m
    }

    pub fn variable(v: Variable, n: usize) -> Self {
        Self::from_variables(&[v], n)
    }

    pub fn n(&self) -> usize {
        self.exps.len() / 3
    }

    pub fn exponents(&self) -> &[u8] {
        &self.exps
    }

    pub fn exponent(&self, v: Variable) -> u8 {
        self.exps[v.position(self.n())]
    }

    pub fn degree(&self) -> usize {
        self.exps.iter().map(|&e| e as usize).sum()
    }

    /// Degree restricted to one family of variables.
    pub fn family_degree(&self, family: Family) -> usize {
        let n = self.n();
        let off = family.offset() * n;
        self.exps[off..off + n].iter().map(|&e| e as usize).sum()
    }

    /// Indices `i` with `v_i` dividing the monomial, each repeated by its
    /// exponent, ascending.
    pub fn family_indices(&self, family: Family) -> Vec<usize> {
        let n = self.n();
        let off = family.offset() * n;
        (0..n).flat_map(|i| std::iter::repeat_n(i + 1, self.exps[off + i] as usize)).collect()
    }

    /// Variables with nonzero exponent, in the global order.
    pub fn support(&self) -> Vec<Variable> {
        let n = self.n();
        (0..self.exps.len()).filter(|&p| self.exps[p] > 0).map(|p| Variable::from_position(p, n)).collect()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        Monomial { exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect() }
    }

    pub fn mul_var(&self, v: Variable) -> Monomial {
        let mut out = self.clone();
        out.exps[v.position(self.n())] += 1;
        out
    }

    /// `self / v`, or `None` when `v` does not divide `self`.
    pub fn div_var(&self, v: Variable) -> Option<Monomial> {
        let p = v.position(self.n());
        if self.exps[p] == 0 {
            return None;
        }
        let mut out = self.clone();
        out.exps[p] -= 1;
        Some(out)
    }

    pub fn pow(&self, k: u8) -> Monomial {
        Monomial { exps: self.exps.iter().map(|&e| e * k).collect() }
    }

    /// Whether `self` divides `other`.
    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `other / self`.
    pub fn quotient(&self, other: &Monomial) -> Result<Monomial> {
        if !self.divides(other) {
            return Err(Error::NotDivisible { divisor: self.to_string(), dividend: other.to_string() });
        }
        Ok(self.saturating_quotient(other))
    }

    /// Componentwise `max(other - self, 0)`: the generator of `<other> : self`.
    pub fn saturating_quotient(&self, other: &Monomial) -> Monomial {
        Monomial { exps: other.exps.iter().zip(&self.exps).map(|(b, a)| b.saturating_sub(*a)).collect() }
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial { exps: self.exps.iter().zip(&other.exps).map(|(a, b)| *a.min(b)).collect() }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial { exps: self.exps.iter().zip(&other.exps).map(|(a, b)| *a.max(b)).collect() }
    }

    /// Parse the text form, e.g. `x1*y2^2*z3`; `1` is the unit monomial.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let mut m = Monomial::one(n);
        let s = s.trim();
        if s == "1" {
            return Ok(m);
        }
        for factor in s.split('*') {
            let factor = factor.trim();
            let (var, exp) = match factor.split_once('^') {
                Some((v, e)) => {
                    let e = e.parse::<u8>().map_err(|_| Error::Parse(format!("bad exponent in {factor:?}")))?;
                    (v, e)
                }
                None => (factor, 1),
            };
            let v = Variable::parse(var, n)?;
            m.exps[v.position(n)] += exp;
        }
        Ok(m)
    }

    /// Packed form for hot divisibility and lcm loops, when it fits.
    pub fn pack(&self) -> Option<Packed> {
        Packed::new(&self.exps)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let n = self.n();
        let mut first = true;
        for (p, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "{}", Variable::from_position(p, n))?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for Monomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.exps.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Monomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let exps = Vec::<u8>::deserialize(d)?;
        Monomial::from_exponents(exps).map_err(serde::de::Error::custom)
    }
}

/// Exponent vector packed into 5-bit lanes of a `u128` (4 value bits and one
/// guard bit), for up to 24 variables with exponents below 16.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Packed(u128);

const LANE: u32 = 5;
const MAX_LANES: usize = 24;

const GUARD: u128 = {
    let mut g = 0u128;
    let mut l = 0;
    while l < MAX_LANES {
        g |= 1u128 << (l as u32 * LANE + 4);
        l += 1;
    }
    g
};

const LOW_NIBBLES: u128 = (GUARD >> 4) * 0xF;

fn compress_guard(mut bits: u128) -> u32 {
    let mut out = 0u32;
    while bits != 0 {
        let t = bits.trailing_zeros();
        out |= 1 << (t / LANE);
        bits &= bits - 1;
    }
    out
}

impl Packed {
    pub fn new(exps: &[u8]) -> Option<Packed> {
        if exps.len() > MAX_LANES || exps.iter().any(|&e| e > 15) {
            return None;
        }
        let mut w = 0u128;
        for (l, &e) in exps.iter().enumerate() {
            w |= (e as u128) << (l as u32 * LANE);
        }
        Some(Packed(w))
    }

    /// Whether `self` divides `other`.
    #[inline]
    pub fn divides(self, other: Packed) -> bool {
        ((other.0 | GUARD) - self.0) & GUARD == GUARD
    }

    #[inline]
    pub fn lcm(self, other: Packed) -> Packed {
        // Lanes where self >= other keep self's value.
        let ge = ((self.0 | GUARD) - other.0) & GUARD;
        let mask = (ge >> 4) * 0xF;
        Packed((self.0 & mask) | (other.0 & !mask & !GUARD))
    }

    pub fn unpack(self, len: usize) -> Vec<u8> {
        (0..len).map(|l| ((self.0 >> (l as u32 * LANE)) & 0xF) as u8).collect()
    }

    pub fn degree(self) -> u32 {
        let mut w = self.0;
        let mut d = 0;
        while w != 0 {
            d += (w & 0xF) as u32;
            w >>= LANE;
        }
        d
    }

    /// Bitmask of the lanes where `other` exceeds `self`; requires `self | other`.
    #[inline]
    pub fn quotient_support(self, other: Packed) -> u32 {
        debug_assert!(self.divides(other));
        let nonzero = ((other.0 - self.0) + LOW_NIBBLES) & GUARD;
        compress_guard(nonzero)
    }

    /// Exponent stored in lane `l`.
    #[inline]
    pub fn lane(self, l: usize) -> u32 {
        ((self.0 >> (l as u32 * LANE)) & 0xF) as u32
    }

    /// Bitmask of lanes with nonzero exponent.
    pub fn support_mask(self, len: usize) -> u32 {
        (0..len).fold(0u32, |acc, l| if (self.0 >> (l as u32 * LANE)) & 0xF != 0 { acc | (1 << l) } else { acc })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(s: &str, n: usize) -> Monomial {
        Monomial::parse(s, n).unwrap()
    }

    #[test]
    fn block_of_examples() {
        let a: Partition = "2,3".parse().unwrap();
        assert_eq!(a.block_of(3).unwrap(), 2);
        assert_eq!(a.block_of(1).unwrap(), 1);
        let b: Partition = "1,3,1".parse().unwrap();
        assert_eq!(b.block_of(5).unwrap(), 3);
        assert!(b.block_of(0).is_err());
        assert!(b.block_of(6).is_err());
        assert_eq!(b.block_range(2), Some((2, 4)));
    }

    #[test]
    fn partition_rejects_bad_input() {
        assert!(Partition::new(vec![]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
        assert!("2,x".parse::<Partition>().is_err());
    }

    #[test]
    fn compositions_count() {
        for n in 1..=7 {
            assert_eq!(Partition::compositions(n).len(), 1 << (n - 1));
        }
    }

    #[test]
    fn arithmetic_examples() {
        let n = 4;
        assert_eq!(m("x1*y2*z3", n).mul(&m("x1*y2*z4", n)), m("x1^2*y2^2*z3*z4", n));
        assert_eq!(m("x1*y2*z3", n).mul(&Monomial::one(n)), m("x1*y2*z3", n));
        assert_eq!(m("x3*y2*z4", n).pow(2), m("x3^2*y2^2*z4^2", n));
        let g = m("x1*y3*z4", n).gcd(&m("x1*y2*z3", n));
        assert_eq!(g, m("x1", n));
        assert_eq!(g.quotient(&m("x1*y3*z4", n)).unwrap(), m("y3*z4", n));
        assert_eq!(m("x1*y2*z3", n).lcm(&m("x1*y2*z4", n)), m("x1*y2*z3*z4", n));
        assert!(m("x2", n).quotient(&m("x1", n)).is_err());
    }

    #[test]
    fn text_round_trip() {
        let s = "x1*y2^2*z3";
        assert_eq!(m(s, 3).to_string(), s);
        assert_eq!(Monomial::one(3).to_string(), "1");
        assert!(Monomial::parse("w1", 3).is_err());
        assert!(Monomial::parse("x4", 3).is_err());
        let json = serde_json::to_string(&m(s, 3)).unwrap();
        assert_eq!(json, "[1,0,0,0,2,0,0,0,1]");
    }

    fn mono(n: usize) -> impl Strategy<Value = Monomial> {
        proptest::collection::vec(0u8..4, 3 * n).prop_map(|e| Monomial::from_exponents(e).unwrap())
    }

    proptest! {
        #[test]
        fn gcd_lcm_divisibility(p in mono(4), q in mono(4)) {
            prop_assert!(p.gcd(&q).divides(&p));
            prop_assert!(p.divides(&p.lcm(&q)));
            prop_assert_eq!(q.quotient(&p.mul(&q)).unwrap(), p.clone());
            prop_assert_eq!(p.mul(&q).degree(), p.degree() + q.degree());
        }

        #[test]
        fn packed_agrees(p in mono(8), q in mono(8)) {
            let (pp, qp) = (p.pack().unwrap(), q.pack().unwrap());
            prop_assert_eq!(pp.divides(qp), p.divides(&q));
            prop_assert_eq!(pp.lcm(qp).unpack(24), p.lcm(&q).exponents().to_vec());
            prop_assert_eq!(pp.degree() as usize, p.degree());
            let l = pp.lcm(qp);
            let expected = p.saturating_quotient(&q.lcm(&p)).exponents().iter().enumerate()
                .fold(0u32, |acc, (i, &e)| if e > 0 { acc | 1 << i } else { acc });
            prop_assert_eq!(pp.quotient_support(l), expected);
        }

        #[test]
        fn block_of_monotone_surjective(parts in proptest::collection::vec(1usize..4, 1..5)) {
            let a = Partition::new(parts).unwrap();
            let blocks: Vec<usize> = (1..=a.n()).map(|i| a.block_of(i).unwrap()).collect();
            prop_assert!(blocks.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(blocks[0], 1);
            prop_assert_eq!(*blocks.last().unwrap(), a.num_blocks());
            prop_assert!(blocks.windows(2).all(|w| w[1] - w[0] <= 1));
        }
    }
}
