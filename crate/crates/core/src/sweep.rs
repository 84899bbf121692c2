//! Exhaustive verification over all compositions and powers in a grid.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{build_complex, verify_d_squared, verify_resolution};
use crate::decomposition::{verify_exchange, verify_set_containment, DecompositionFunction};
use crate::error::{Error, Result};
use crate::monomial::Partition;
use crate::oracle::total_betti;
use crate::power::{betti_from_sets, power_generators, verify_linear_quotients, BettiTable};

pub const MAX_N: usize = 7;
pub const MAX_POWER: usize = 3;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Skipped,
}

impl Outcome {
    fn of(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Skipped => "skipped",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub partition: String,
    pub power: usize,
    pub generators: usize,
    pub lq: Outcome,
    pub exchange: Outcome,
    pub containment: Outcome,
    pub d_squared: Outcome,
    pub bs_acyclic: Outcome,
    /// From the linear quotient sets, or from the oracle when those do not exist.
    pub betti: String,
    pub f_vector: String,
    pub formula_matches_oracle: Outcome,
}

impl SweepRow {
    /// The columns that certify the construction.
    pub fn passed(&self) -> bool {
        [self.lq, self.exchange, self.d_squared, self.bs_acyclic, self.formula_matches_oracle]
            .iter()
            .all(|&o| o != Outcome::Fail)
            && self.lq == Outcome::Pass
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SweepOptions {
    pub max_n: usize,
    pub max_power: usize,
    /// Compare against the Koszul oracle (dominant cost for large instances).
    pub oracle: bool,
    /// Run the degreewise acyclicity check.
    pub resolution: bool,
}

impl SweepOptions {
    pub fn new(max_n: usize, max_power: usize) -> Self {
        SweepOptions { max_n, max_power, oracle: true, resolution: true }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(SweepRow::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| !r.passed())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn comma_list(a: &Partition) -> String {
    a.parts().iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// All verifications for one instance.
pub fn sweep_instance(a: &Partition, ell: usize, opts: &SweepOptions) -> Result<SweepRow> {
    let gens = power_generators(a, ell)?;
    let oracle = if opts.oracle { Some(total_betti(&gens.monomials)?) } else { None };
    let mut row = SweepRow {
        partition: comma_list(a),
        power: ell,
        generators: gens.monomials.len(),
        lq: Outcome::Fail,
        exchange: Outcome::Skipped,
        containment: Outcome::Skipped,
        d_squared: Outcome::Skipped,
        bs_acyclic: Outcome::Skipped,
        betti: oracle.as_ref().map(BettiTable::to_string).unwrap_or_default(),
        f_vector: String::new(),
        formula_matches_oracle: Outcome::Skipped,
    };
    let cert = match verify_linear_quotients(a, ell)? {
        Ok(cert) => cert,
        Err(_) => return Ok(row),
    };
    row.lq = Outcome::Pass;
    let kind = DecompositionFunction::BEll;
    row.exchange = Outcome::of(verify_exchange(&cert, kind).passed());
    row.containment = Outcome::of(verify_set_containment(&cert, kind).passed());
    let formula = betti_from_sets(&cert);
    row.betti = formula.to_string();
    if let Some(o) = &oracle {
        row.formula_matches_oracle = Outcome::of(BettiTable::trimmed(o.0.clone()) == BettiTable::trimmed(formula.0));
    }
    match build_complex(&cert, kind) {
        Ok(c) => {
            row.f_vector = c.f_vector().to_string();
            let d2 = verify_d_squared(&c).passed();
            row.d_squared = Outcome::of(d2);
            if d2 && opts.resolution {
                row.bs_acyclic = Outcome::of(verify_resolution(&c)?.passed());
            }
        }
        Err(_) => row.d_squared = Outcome::Fail,
    }
    Ok(row)
}

/// Every composition of every `n` in `3..=max_n` and every power in
/// `1..=max_power`, ordered by `(n, composition, power)`.
pub fn sweep(opts: &SweepOptions) -> Result<SweepReport> {
    if opts.max_n > MAX_N || opts.max_power > MAX_POWER {
        return Err(Error::SizeGuard(format!(
            "sweep limited to n <= {MAX_N} and power <= {MAX_POWER}, got {} and {}",
            opts.max_n, opts.max_power
        )));
    }
    if opts.max_n < 3 || opts.max_power < 1 {
        return Err(Error::SizeGuard("sweep needs n >= 3 and power >= 1".into()));
    }
    let grid: Vec<(Partition, usize)> = (3..=opts.max_n)
        .flat_map(Partition::compositions)
        .flat_map(|a| (1..=opts.max_power).map(move |ell| (a.clone(), ell)))
        .collect();
    let rows = grid.par_iter().map(|(a, ell)| sweep_instance(a, *ell, opts)).collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { rows })
}
