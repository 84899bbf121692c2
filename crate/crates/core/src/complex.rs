//! Cellular chain complexes on the cells `(m, S)`, `S ⊆ set(m)`, and the
//! checks that certify them as minimal free resolutions.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{Decomposer, DecompositionFunction};
use crate::error::{Error, Result};
use crate::linalg::{solve_rational, IncrementalRank, RankWorkspace, SparseRow};
use crate::monomial::{Monomial, Packed, Partition, Variable};
use crate::oracle::lcm_closure;
use crate::power::{BettiTable, LqCertificate};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    /// Position of the generator in the order.
    pub gen: usize,
    pub set: Vec<Variable>,
    pub mdeg: Monomial,
}

impl Cell {
    pub fn dim(&self) -> usize {
        self.set.len()
    }
}

/// One summand `scalar * var * target` of a boundary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryTerm {
    pub to: usize,
    pub scalar: Ratio<i64>,
    pub var: Variable,
}

/// `(1, f_0, f_1, ...)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FVector(pub Vec<u64>);

impl FVector {
    pub fn betti(&self) -> BettiTable {
        BettiTable(self.0[1..].to_vec())
    }
}

impl std::fmt::Display for FVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellComplex {
    pub partition: Partition,
    pub power: usize,
    pub generators: Vec<Monomial>,
    /// Sorted by dimension, then generator, then subset.
    pub cells: Vec<Cell>,
    pub boundary: Vec<Vec<BoundaryTerm>>,
}

impl CellComplex {
    pub fn n(&self) -> usize {
        self.partition.n()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.cells.last().map_or(0, Cell::dim)
    }

    pub fn f_vector(&self) -> FVector {
        let mut f = vec![1u64];
        for c in &self.cells {
            if f.len() < c.dim() + 2 {
                f.resize(c.dim() + 2, 0);
            }
            f[c.dim() + 1] += 1;
        }
        FVector(f)
    }

    pub fn cells_of_dim(&self, d: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.cells.len()).filter(move |&c| self.cells[c].dim() == d)
    }

    pub fn find(&self, gen: usize, set: &[Variable]) -> Option<usize> {
        self.cells.iter().position(|c| c.gen == gen && c.set == set)
    }
}

struct CellIndex {
    /// `by_gen[j][mask]` is the id of `(m_j, S)` with `S` selected from
    /// `set(m_j)` by `mask`.
    by_gen: Vec<Vec<usize>>,
}

impl CellIndex {
    fn id(&self, cert: &LqCertificate, gen: usize, set: &[Variable]) -> Option<usize> {
        let mut mask = 0usize;
        for v in set {
            let p = cert.set(gen).binary_search(v).ok()?;
            mask |= 1 << p;
        }
        Some(self.by_gen[gen][mask])
    }
}

fn enumerate_cells(cert: &LqCertificate) -> (Vec<Cell>, CellIndex) {
    let mut raw: Vec<(usize, usize, usize)> = Vec::new();
    for j in 0..cert.len() {
        for mask in 0..1usize << cert.set(j).len() {
            raw.push((mask.count_ones() as usize, j, mask));
        }
    }
    let subset = |j: usize, mask: usize| -> Vec<Variable> {
        cert.set(j).iter().enumerate().filter(|(p, _)| mask >> p & 1 == 1).map(|(_, &v)| v).collect()
    };
    raw.sort_by_cached_key(|&(d, j, mask)| (d, j, subset(j, mask)));
    let mut by_gen: Vec<Vec<usize>> = (0..cert.len()).map(|j| vec![0; 1 << cert.set(j).len()]).collect();
    let cells = raw
        .iter()
        .enumerate()
        .map(|(id, &(_, j, mask))| {
            by_gen[j][mask] = id;
            let set = subset(j, mask);
            let mdeg = set.iter().fold(cert.monomial(j).clone(), |acc, &v| acc.mul_var(v));
            Cell { gen: j, set, mdeg }
        })
        .collect();
    (cells, CellIndex { by_gen })
}

fn single_variable(m: &Monomial) -> Option<Variable> {
    (m.degree() == 1).then(|| m.support()[0])
}

fn merge_terms(terms: Vec<BoundaryTerm>) -> Vec<BoundaryTerm> {
    let mut acc: BTreeMap<usize, BoundaryTerm> = BTreeMap::new();
    for t in terms {
        match acc.get_mut(&t.to) {
            Some(e) => e.scalar += t.scalar,
            None => {
                acc.insert(t.to, t);
            }
        }
    }
    acc.into_values().filter(|t| !t.scalar.is_zero()).collect()
}

/// The closed-form complex: the boundary of `(m, S)` is
/// `sum_{v in S} sign(v,S) [ v (m, S-v) - (v m / b(v m)) (b(v m), S-v) ]`,
/// dropping the second term when `S-v` is not inside `set(b(v m))` or
/// `b(v m) = m`. `sign(v,S)` is `(-1)^{#{w in S : w < v}}`.
pub fn build_complex(cert: &LqCertificate, kind: DecompositionFunction) -> Result<CellComplex> {
    let dec = Decomposer::new(cert, kind);
    let (cells, index) = enumerate_cells(cert);
    let boundary = cells
        .iter()
        .map(|cell| {
            let mut terms = Vec::with_capacity(2 * cell.dim());
            for (p, &v) in cell.set.iter().enumerate() {
                let sign = Ratio::from_integer(if p % 2 == 0 { 1 } else { -1 });
                let rest: Vec<Variable> = cell.set.iter().copied().filter(|&w| w != v).collect();
                let own = index.id(cert, cell.gen, &rest).expect("subset of a subset");
                terms.push(BoundaryTerm { to: own, scalar: sign, var: v });
                let r = dec
                    .apply(v, cell.gen)
                    .map_err(|f| Error::Decomposition(format!("b({} * {}): {:?}", f.variable, f.generator, f.kind)))?;
                if r == cell.gen {
                    continue;
                }
                if let Some(other) = index.id(cert, r, &rest) {
                    let q = cert.monomial(r).quotient(&cert.monomial(cell.gen).mul_var(v))?;
                    let var = single_variable(&q)
                        .ok_or_else(|| Error::Construction(format!("quotient {q} is not a variable")))?;
                    terms.push(BoundaryTerm { to: other, scalar: -sign, var });
                }
            }
            Ok(merge_terms(terms))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CellComplex {
        partition: cert.partition().clone(),
        power: cert.power(),
        generators: cert.generators.monomials.clone(),
        cells,
        boundary,
    })
}

fn big(x: Ratio<i64>) -> BigRational {
    Ratio::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

fn small(x: &BigRational) -> Result<Ratio<i64>> {
    match (x.numer().to_i64(), x.denom().to_i64()) {
        (Some(p), Some(q)) => Ok(Ratio::new(p, q)),
        _ => Err(Error::Construction(format!("coefficient {x} does not fit in 64 bits"))),
    }
}

/// The iterated mapping cone with comparison maps obtained by solving
/// linear systems degree by degree. Generator `m_j` contributes a Koszul
/// complex on `set(m_j)`; its comparison map `psi` into the complex on
/// `m_1, ..., m_{j-1}` starts with `psi({t}) = -(x_t m_j / g) (g, {})` for
/// the earliest generator `g` dividing `x_t m_j` and is extended by
/// `d psi(S) = -sum_p (-1)^p x_{t_p} psi(S - t_p)`.
pub fn build_lifted_complex(cert: &LqCertificate) -> Result<CellComplex> {
    let dec = Decomposer::new(cert, DecompositionFunction::Generic);
    let (cells, index) = enumerate_cells(cert);
    let packed: Vec<Packed> = cells
        .iter()
        .map(|c| c.mdeg.pack().ok_or_else(|| Error::SizeGuard(format!("{} does not fit", c.mdeg))))
        .collect::<Result<_>>()?;
    let mut boundary: Vec<Vec<BoundaryTerm>> = vec![Vec::new(); cells.len()];
    // psi of every cell already processed, as (target, scalar).
    let mut psi: Vec<Vec<(usize, Ratio<i64>)>> = vec![Vec::new(); cells.len()];
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by_key(|&c| (cells[c].gen, cells[c].dim()));
    let var_between = |from: usize, to: usize| -> Result<Variable> {
        let q = cells[to].mdeg.quotient(&cells[from].mdeg)?;
        single_variable(&q).ok_or_else(|| Error::Construction(format!("{q} is not a variable")))
    };
    for &c in &order {
        let cell = &cells[c];
        let j = cell.gen;
        let mut terms = Vec::new();
        for (p, &v) in cell.set.iter().enumerate() {
            let rest: Vec<Variable> = cell.set.iter().copied().filter(|&w| w != v).collect();
            let own = index.id(cert, j, &rest).expect("subset of a subset");
            terms.push(BoundaryTerm { to: own, scalar: Ratio::from_integer(if p % 2 == 0 { 1 } else { -1 }), var: v });
        }
        let image: Vec<(usize, Ratio<i64>)> = match cell.dim() {
            0 => Vec::new(),
            1 => {
                let v = cell.set[0];
                let g = dec.apply(v, j).map_err(|f| Error::Decomposition(format!("{f:?}")))?;
                let target = index.id(cert, g, &[]).expect("0-cell");
                vec![(target, Ratio::from_integer(-1))]
            }
            d => {
                // Right-hand side in the old cells of dimension d-2.
                let mut rhs: HashMap<usize, Ratio<i64>> = HashMap::new();
                for (p, &v) in cell.set.iter().enumerate() {
                    let rest: Vec<Variable> = cell.set.iter().copied().filter(|&w| w != v).collect();
                    let sub = index.id(cert, j, &rest).expect("subset");
                    let sign = Ratio::from_integer(if p % 2 == 0 { 1 } else { -1 });
                    for &(t, s) in &psi[sub] {
                        *rhs.entry(t).or_default() -= sign * s;
                    }
                }
                let alpha = packed[c];
                let unknowns: Vec<usize> = (0..cells.len())
                    .filter(|&u| cells[u].gen < j && cells[u].dim() == d - 1 && packed[u].divides(alpha))
                    .collect();
                let equations: Vec<usize> = (0..cells.len())
                    .filter(|&w| cells[w].gen < j && cells[w].dim() == d - 2 && packed[w].divides(alpha))
                    .collect();
                let row_of: HashMap<usize, usize> = equations.iter().enumerate().map(|(r, &w)| (w, r)).collect();
                let mut a = vec![vec![BigRational::zero(); unknowns.len()]; equations.len()];
                for (col, &u) in unknowns.iter().enumerate() {
                    for t in &boundary[u] {
                        let r = *row_of.get(&t.to).ok_or_else(|| {
                            Error::Construction(format!("boundary of cell {u} leaves the degree of cell {c}"))
                        })?;
                        a[r][col] = big(t.scalar);
                    }
                }
                let mut b = vec![BigRational::zero(); equations.len()];
                for (t, s) in rhs {
                    let r = *row_of
                        .get(&t)
                        .ok_or_else(|| Error::Construction(format!("comparison map of cell {c} leaves its degree")))?;
                    b[r] = big(s);
                }
                let x = solve_rational(&a, &b, unknowns.len()).ok_or_else(|| {
                    Error::Construction(format!("no lift for cell {c}: the partial complex is not exact there"))
                })?;
                unknowns
                    .iter()
                    .zip(&x)
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(&u, v)| Ok((u, small(v)?)))
                    .collect::<Result<_>>()?
            }
        };
        for &(t, s) in &image {
            terms.push(BoundaryTerm { to: t, scalar: s, var: var_between(c, t)? });
        }
        psi[c] = image;
        boundary[c] = merge_terms(terms);
    }
    Ok(CellComplex {
        partition: cert.partition().clone(),
        power: cert.power(),
        generators: cert.generators.monomials.clone(),
        cells,
        boundary,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DSquaredReport {
    pub cells_checked: usize,
    /// Cells whose boundary of the boundary is nonzero.
    pub failing_cells: Vec<usize>,
}

impl DSquaredReport {
    pub fn passed(&self) -> bool {
        self.failing_cells.is_empty()
    }
}

/// Composes consecutive boundaries, including the augmentation that sends
/// every 0-cell to its generator. Every term is homogeneous, so the
/// monomial part of each coefficient of `d(d(c))` is fixed by the target
/// and only the scalars need to cancel.
pub fn verify_d_squared(c: &CellComplex) -> DSquaredReport {
    let failing_cells = (0..c.len())
        .filter(|&id| {
            if c.cells[id].dim() == 1 {
                return !c.boundary[id].iter().map(|t| t.scalar).sum::<Ratio<i64>>().is_zero();
            }
            let mut acc: HashMap<usize, Ratio<i64>> = HashMap::new();
            for t in &c.boundary[id] {
                for u in &c.boundary[t.to] {
                    *acc.entry(u.to).or_default() += t.scalar * u.scalar;
                }
            }
            acc.values().any(|s| !s.is_zero())
        })
        .collect();
    DSquaredReport { cells_checked: c.len(), failing_cells }
}

/// Cells with a boundary term that is not `± variable` times a cell of one
/// dimension less and matching multidegree.
pub fn linearity_violations(c: &CellComplex) -> Vec<usize> {
    (0..c.len())
        .filter(|&id| {
            c.boundary[id].iter().any(|t| {
                let target = &c.cells[t.to];
                t.scalar.is_zero()
                    || target.dim() + 1 != c.cells[id].dim()
                    || target.mdeg.mul_var(t.var) != c.cells[id].mdeg
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcyclicityFailure {
    pub alpha: Monomial,
    /// `dim H_i` of the subcomplex of cells with multidegree dividing alpha.
    pub homology: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionReport {
    pub d_squared: bool,
    pub linear: bool,
    /// False when the degreewise check was not run because `d^2 != 0`.
    pub acyclicity_evaluated: bool,
    pub multidegrees_checked: usize,
    pub failure_count: usize,
    /// At most [`MAX_REPORTED_FAILURES`] examples.
    pub failures: Vec<AcyclicityFailure>,
    /// Ranks of the free modules, which are the Betti numbers when the
    /// complex is a minimal resolution.
    pub ranks: BettiTable,
}

impl ResolutionReport {
    pub fn passed(&self) -> bool {
        self.d_squared && self.linear && self.acyclicity_evaluated && self.failure_count == 0
    }
}

pub const MAX_REPORTED_FAILURES: usize = 20;

fn integer_rows(c: &CellComplex) -> Vec<SparseRow<i64>> {
    c.boundary
        .iter()
        .map(|terms| {
            let l = terms.iter().fold(1i64, |acc, t| acc.lcm(t.scalar.denom()));
            terms.iter().map(|t| (t.to, (t.scalar * l).to_integer())).collect()
        })
        .collect()
}

/// Homology of the subcomplex on the cells whose multidegree divides
/// `alpha`. Boundaries preserve multidegree, so the subcomplex is closed.
fn restricted_homology(
    c: &CellComplex,
    rows: &[SparseRow<i64>],
    packed: &[Packed],
    alpha: Packed,
    ws: &mut RankWorkspace,
) -> Vec<usize> {
    let top = c.dim();
    let mut by_dim: Vec<Vec<&[(usize, i64)]>> = vec![Vec::new(); top + 1];
    for (id, p) in packed.iter().enumerate() {
        if p.divides(alpha) {
            by_dim[c.cells[id].dim()].push(&rows[id]);
        }
    }
    let ranks: Vec<usize> = by_dim.iter().enumerate().map(|(d, r)| if d == 0 { 0 } else { ws.rank(r) }).collect();
    (0..=top).map(|d| by_dim[d].len() - ranks[d] - ranks.get(d + 1).copied().unwrap_or(0)).collect()
}

/// Multidegrees whose subcomplex may fail to be acyclic, or `None` if an
/// integer overflow forced giving up.
///
/// With `d^2 = 0` and the augmentation vanishing, every homology group
/// is bounded below by the acyclic case, so the subcomplex on `N` cells is
/// acyclic exactly when the whole boundary matrix has rank `(N - 1) / 2`.
/// Subcomplexes grow along divisibility, so the lattice is walked along a
/// spanning tree and each node only adds the cells it does not share with
/// its parent to an echelon form that is rolled back afterwards.
fn screen_acyclicity(
    rows: &[SparseRow<i64>],
    packed: &[Packed],
    lattice: &[Packed],
    lanes: usize,
) -> Option<Vec<Packed>> {
    let index: HashMap<Packed, usize> = lattice.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let plan: Vec<(Option<usize>, usize, Vec<u32>)> = lattice
        .par_iter()
        .map(|&alpha| {
            let below: Vec<u32> = (0..packed.len() as u32).filter(|&id| packed[id as usize].divides(alpha)).collect();
            let best = (0..lanes)
                .filter(|&l| alpha.lane(l) > 0)
                .max_by_key(|&l| below.iter().filter(|&&id| packed[id as usize].lane(l) < alpha.lane(l)).count());
            let parent = best.and_then(|l| {
                let a = alpha.lane(l);
                below
                    .iter()
                    .filter(|&&id| packed[id as usize].lane(l) < a)
                    .map(|&id| packed[id as usize])
                    .reduce(Packed::lcm)
            });
            let fresh = match parent {
                Some(p) => below.iter().copied().filter(|&id| !packed[id as usize].divides(p)).collect(),
                None => below.clone(),
            };
            (parent.map(|p| index[&p]), below.len(), fresh)
        })
        .collect();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); lattice.len()];
    let mut stack = Vec::new();
    for (a, (parent, _, _)) in plan.iter().enumerate() {
        match parent {
            Some(p) => children[*p].push(a),
            None => stack.push((a, None)),
        }
    }
    let mut inc = IncrementalRank::new(packed.len());
    let mut suspects = Vec::new();
    while let Some((a, mark)) = stack.pop() {
        if let Some(mark) = mark {
            inc.truncate(mark);
            continue;
        }
        let (_, size, fresh) = &plan[a];
        stack.push((a, Some(inc.rank())));
        for &id in fresh {
            inc.insert(&rows[id as usize])?;
        }
        if *size != 2 * inc.rank() + 1 {
            suspects.push(lattice[a]);
        }
        stack.extend(children[a].iter().map(|&ch| (ch, None)));
    }
    suspects.sort_unstable();
    Some(suspects)
}

/// Degreewise acyclicity over the lcm closure of the cell multidegrees:
/// the subcomplex below each `alpha` must have `H_0 = Q` and no higher
/// homology.
pub fn verify_resolution(c: &CellComplex) -> Result<ResolutionReport> {
    let d2 = verify_d_squared(c);
    let mut report = ResolutionReport {
        d_squared: d2.passed(),
        linear: linearity_violations(c).is_empty(),
        ranks: c.f_vector().betti(),
        ..Default::default()
    };
    if !report.d_squared {
        return Ok(report);
    }
    let packed: Vec<Packed> = c
        .cells
        .iter()
        .map(|cell| cell.mdeg.pack().ok_or_else(|| Error::SizeGuard(format!("{} does not fit", cell.mdeg))))
        .collect::<Result<_>>()?;
    let mut distinct = packed.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let lattice = lcm_closure(&distinct);
    let rows = integer_rows(c);
    let suspects = match screen_acyclicity(&rows, &packed, &lattice, 3 * c.n()) {
        Some(s) => s,
        None => lattice.clone(),
    };
    let bad: Vec<(Packed, Vec<usize>)> = suspects
        .par_iter()
        .map_init(
            || RankWorkspace::new(c.len()),
            |ws, &alpha| {
                let h = restricted_homology(c, &rows, &packed, alpha, ws);
                let ok = h.first() == Some(&1) && h[1..].iter().all(|&x| x == 0);
                (!ok).then_some((alpha, h))
            },
        )
        .flatten()
        .collect();
    report.acyclicity_evaluated = true;
    report.multidegrees_checked = lattice.len();
    report.failure_count = bad.len();
    let width = 3 * c.n();
    report.failures = bad
        .into_iter()
        .take(MAX_REPORTED_FAILURES)
        .map(|(alpha, homology)| AcyclicityFailure {
            alpha: Monomial::from_exponents(alpha.unpack(width)).expect("valid exponents"),
            homology,
        })
        .collect();
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub cell: usize,
    /// The 0-cells in its boundary.
    pub ends: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoCell {
    pub cell: usize,
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoCellPair {
    pub first: usize,
    pub second: usize,
    pub shared_edges: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skeleton {
    pub vertices: Vec<usize>,
    pub edges: Vec<Edge>,
    pub two_cells: Vec<TwoCell>,
    pub pairs: Vec<TwoCellPair>,
}

impl Skeleton {
    pub fn all_pairs_share_edge(&self) -> bool {
        self.pairs.iter().all(|p| !p.shared_edges.is_empty())
    }

    pub fn some_pair_disjoint(&self) -> bool {
        self.pairs.iter().any(|p| p.shared_edges.is_empty())
    }
}

/// The 1-skeleton and, for each pair of 2-cells, the edges in both
/// boundaries.
pub fn skeleton_graph(c: &CellComplex) -> Skeleton {
    let targets = |id: usize| -> Vec<usize> { c.boundary[id].iter().map(|t| t.to).collect() };
    let vertices: Vec<usize> = c.cells_of_dim(0).collect();
    let edges: Vec<Edge> = c.cells_of_dim(1).map(|id| Edge { cell: id, ends: targets(id) }).collect();
    let two_cells: Vec<TwoCell> = c.cells_of_dim(2).map(|id| TwoCell { cell: id, edges: targets(id) }).collect();
    let mut pairs = Vec::new();
    for (p, a) in two_cells.iter().enumerate() {
        for b in &two_cells[p + 1..] {
            let shared_edges = a.edges.iter().copied().filter(|e| b.edges.contains(e)).collect();
            pairs.push(TwoCellPair { first: a.cell, second: b.cell, shared_edges });
        }
    }
    Skeleton { vertices, edges, two_cells, pairs }
}
