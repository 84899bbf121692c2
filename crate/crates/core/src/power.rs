//! Minimal generators of `(M_a)^l` sorted by `<_a^l`, the linear-quotient
//! certificate and the Betti numbers it determines.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching_field::generators;
use crate::monomial::{Monomial, Partition, Variable};
use crate::tableau::{canonical_rep, compare_same_shape, representations, Tableau};

/// Generators of `(M_a)^l` in ascending `<_a^l` order with their canonical
/// type-representations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrderedGenerators {
    pub partition: Partition,
    pub power: usize,
    pub monomials: Vec<Monomial>,
    pub canonical: Vec<Tableau>,
}

impl OrderedGenerators {
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }
}

/// Distinct products of `l` generators of `M_a`, sorted by `<_a^l`.
pub fn power_generators(a: &Partition, ell: usize) -> Result<OrderedGenerators> {
    if ell == 0 {
        return Err(Error::ShapeMismatch("power must be at least 1".into()));
    }
    let n = a.n();
    let base: Vec<Monomial> = generators(a)?.iter().map(|c| c.monomial(n)).collect();
    let mut seen = HashSet::new();
    let mut idx = vec![0usize; ell];
    loop {
        let m = idx.iter().fold(Monomial::one(n), |acc, &u| acc.mul(&base[u]));
        seen.insert(m);
        // Next nondecreasing index sequence.
        let Some(pos) = (0..ell).rev().find(|&p| idx[p] + 1 < base.len()) else { break };
        let v = idx[pos] + 1;
        idx[pos..].iter_mut().for_each(|x| *x = v);
    }
    let mut monomials: Vec<Monomial> = seen.into_iter().collect();
    monomials.sort();
    let canonical: Vec<Tableau> = monomials.par_iter().map(|m| canonical_rep(m, a, ell)).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..monomials.len()).collect();
    order.sort_by(|&p, &q| compare_same_shape(&canonical[p].columns, &canonical[q].columns, a));
    for w in order.windows(2) {
        assert_eq!(
            compare_same_shape(&canonical[w[0]].columns, &canonical[w[1]].columns, a),
            Ordering::Less,
            "distinct generators {} and {} compare equal",
            monomials[w[0]],
            monomials[w[1]]
        );
    }
    Ok(OrderedGenerators {
        partition: a.clone(),
        power: ell,
        monomials: order.iter().map(|&u| monomials[u].clone()).collect(),
        canonical: order.iter().map(|&u| canonical[u].clone()).collect(),
    })
}

/// Minimal generators of `<prefix> : m`, when they are all variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColonSet {
    Linear(BTreeSet<Variable>),
    /// A minimal generator of the colon ideal of degree at least two.
    NotLinear(Monomial),
}

pub fn colon_set(prefix: &[Monomial], m: &Monomial) -> ColonSet {
    let quotients: Vec<Monomial> = prefix.iter().map(|p| m.saturating_quotient(p)).collect();
    colon_from_quotients(&quotients, m.n())
}

fn colon_from_quotients(quotients: &[Monomial], n: usize) -> ColonSet {
    let vars: BTreeSet<Variable> = quotients.iter().filter(|q| q.degree() == 1).map(|q| q.support()[0]).collect();
    // A quotient not divisible by any linear one has a minimal divisor of
    // degree >= 2; the lowest-degree such quotient is itself minimal.
    let witness = quotients
        .iter()
        .filter(|q| q.degree() != 1 && !vars.iter().any(|&v| q.exponent(v) > 0))
        .min_by(|p, q| p.degree().cmp(&q.degree()).then_with(|| p.cmp(q)));
    match witness {
        Some(w) => ColonSet::NotLinear(w.clone()),
        None => {
            debug_assert!(vars.iter().all(|v| v.index <= n));
            ColonSet::Linear(vars)
        }
    }
}

/// The ordered generators together with every `set(m_j)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LqCertificate {
    pub generators: OrderedGenerators,
    pub sets: Vec<Vec<Variable>>,
    #[serde(skip)]
    index: HashMap<Monomial, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LqFailure {
    /// Zero-based position of the failing generator.
    pub position: usize,
    pub monomial: Monomial,
    pub witness: Monomial,
}

impl LqCertificate {
    /// Runs the colon computation along the order; fails at the first step
    /// whose colon ideal is not generated by variables.
    pub fn build(generators: OrderedGenerators) -> std::result::Result<LqCertificate, LqFailure> {
        let gens = &generators.monomials;
        let outcomes: Vec<ColonSet> =
            (0..gens.len()).into_par_iter().map(|j| colon_set(&gens[..j], &gens[j])).collect();
        let mut sets = Vec::with_capacity(gens.len());
        for (j, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                ColonSet::Linear(vars) => sets.push(vars.into_iter().collect()),
                ColonSet::NotLinear(witness) => {
                    return Err(LqFailure { position: j, monomial: gens[j].clone(), witness })
                }
            }
        }
        let index = gens.iter().enumerate().map(|(j, m)| (m.clone(), j)).collect();
        Ok(LqCertificate { generators, sets, index })
    }

    pub fn partition(&self) -> &Partition {
        &self.generators.partition
    }

    pub fn power(&self) -> usize {
        self.generators.power
    }

    pub fn n(&self) -> usize {
        self.generators.n()
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn monomial(&self, j: usize) -> &Monomial {
        &self.generators.monomials[j]
    }

    pub fn set(&self, j: usize) -> &[Variable] {
        &self.sets[j]
    }

    pub fn in_set(&self, j: usize, v: Variable) -> bool {
        self.sets[j].binary_search(&v).is_ok()
    }

    /// Position of a generator in the order.
    pub fn position(&self, m: &Monomial) -> Option<usize> {
        if self.index.is_empty() && !self.generators.is_empty() {
            return self.generators.monomials.iter().position(|g| g == m);
        }
        self.index.get(m).copied()
    }

    pub fn max_set_size(&self) -> usize {
        self.sets.iter().map(Vec::len).max().unwrap_or(0)
    }
}

pub fn verify_linear_quotients(a: &Partition, ell: usize) -> Result<std::result::Result<LqCertificate, LqFailure>> {
    Ok(LqCertificate::build(power_generators(a, ell)?))
}

/// `beta_0, beta_1, ...` of an ideal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BettiTable(pub Vec<u64>);

impl BettiTable {
    /// Drops trailing zeros.
    pub fn trimmed(mut v: Vec<u64>) -> Self {
        while v.last() == Some(&0) {
            v.pop();
        }
        BettiTable(v)
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    /// Alternating sum; equals 1 for any free resolution of a nonzero ideal.
    pub fn euler_characteristic(&self) -> i64 {
        self.0.iter().enumerate().map(|(i, &b)| if i % 2 == 0 { b as i64 } else { -(b as i64) }).sum()
    }
}

impl std::fmt::Display for BettiTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// `beta_i = sum_j binom(|set(m_j)|, i)`.
pub fn betti_from_sets(cert: &LqCertificate) -> BettiTable {
    let top = cert.max_set_size();
    BettiTable::trimmed((0..=top as u64).map(|i| cert.sets.iter().map(|s| binomial(s.len() as u64, i)).sum()).collect())
}

/// Whether `w` is a minimal generator of `(M_a)^l`, decided by factorization.
pub fn membership(w: &Monomial, a: &Partition, ell: usize) -> bool {
    if w.degree() != 3 * ell || w.n() != a.n() {
        return false;
    }
    representations(w, a, ell).map(|r| !r.is_empty()).unwrap_or(false)
}

/// Whether `w` lies in the ideal generated by `gens`.
pub fn ideal_membership(w: &Monomial, gens: &[Monomial]) -> bool {
    gens.iter().any(|g| g.divides(w))
}
