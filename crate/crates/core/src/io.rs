//! Serialization: complex JSON and DOT, CSV tables.

use std::fmt::Write as _;
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::complex::{skeleton_graph, BoundaryTerm, Cell, CellComplex};
use crate::error::{Error, Result};
use crate::monomial::{Monomial, Partition, Variable};
use crate::power::{BettiTable, LqCertificate};

/// A boundary coefficient: an integer, or `"p/q"` otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sign {
    Integer(i64),
    Fraction(String),
}

impl Sign {
    fn from_ratio(r: Ratio<i64>) -> Self {
        if r.is_integer() {
            Sign::Integer(*r.numer())
        } else {
            Sign::Fraction(r.to_string())
        }
    }

    fn to_ratio(&self) -> Result<Ratio<i64>> {
        match self {
            Sign::Integer(v) => Ok(Ratio::from_integer(*v)),
            Sign::Fraction(s) => s.parse().map_err(|_| Error::Parse(format!("bad coefficient {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRecord {
    pub id: usize,
    pub dim: usize,
    pub gen: usize,
    pub set: Vec<String>,
    pub mdeg: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryRecord {
    pub from: usize,
    pub to: usize,
    pub sign: Sign,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexDocument {
    pub partition: Vec<usize>,
    pub power: usize,
    pub generators: Vec<String>,
    pub cells: Vec<CellRecord>,
    pub boundary: Vec<BoundaryRecord>,
}

impl ComplexDocument {
    pub fn from_complex(c: &CellComplex) -> Self {
        let cells = c
            .cells
            .iter()
            .enumerate()
            .map(|(id, cell)| CellRecord {
                id,
                dim: cell.dim(),
                gen: cell.gen,
                set: cell.set.iter().map(Variable::to_string).collect(),
                mdeg: cell.mdeg.to_string(),
            })
            .collect();
        let boundary = c
            .boundary
            .iter()
            .enumerate()
            .flat_map(|(from, terms)| {
                terms.iter().map(move |t| BoundaryRecord {
                    from,
                    to: t.to,
                    sign: Sign::from_ratio(t.scalar),
                    coeff: t.var.to_string(),
                })
            })
            .collect();
        ComplexDocument {
            partition: c.partition.parts().to_vec(),
            power: c.power,
            generators: c.generators.iter().map(Monomial::to_string).collect(),
            cells,
            boundary,
        }
    }

    pub fn into_complex(self) -> Result<CellComplex> {
        let partition = Partition::new(self.partition)?;
        let n = partition.n();
        let generators = self.generators.iter().map(|g| Monomial::parse(g, n)).collect::<Result<Vec<_>>>()?;
        let mut cells = Vec::with_capacity(self.cells.len());
        for (pos, rec) in self.cells.into_iter().enumerate() {
            if rec.id != pos {
                return Err(Error::Parse(format!("cell ids must be 0..N in order, found {} at {pos}", rec.id)));
            }
            if rec.gen >= generators.len() {
                return Err(Error::Parse(format!("cell {pos} names generator {}", rec.gen)));
            }
            let set = rec.set.iter().map(|v| Variable::parse(v, n)).collect::<Result<Vec<_>>>()?;
            if set.len() != rec.dim {
                return Err(Error::Parse(format!("cell {pos} has dim {} but {} variables", rec.dim, set.len())));
            }
            cells.push(Cell { gen: rec.gen, set, mdeg: Monomial::parse(&rec.mdeg, n)? });
        }
        let mut boundary: Vec<Vec<BoundaryTerm>> = vec![Vec::new(); cells.len()];
        for rec in self.boundary {
            if rec.from >= cells.len() || rec.to >= cells.len() {
                return Err(Error::Parse(format!("boundary {} -> {} out of range", rec.from, rec.to)));
            }
            boundary[rec.from].push(BoundaryTerm {
                to: rec.to,
                scalar: rec.sign.to_ratio()?,
                var: Variable::parse(&rec.coeff, n)?,
            });
        }
        Ok(CellComplex { partition, power: self.power, generators, cells, boundary })
    }
}

pub fn complex_to_json(c: &CellComplex) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ComplexDocument::from_complex(c))?)
}

pub fn complex_from_json(s: &str) -> Result<CellComplex> {
    serde_json::from_str::<ComplexDocument>(s)?.into_complex()
}

/// The 1-skeleton as an undirected graph: one node per generator, one edge
/// per 1-cell, tagged with the 2-cells whose boundary contains it, followed
/// by a comment block listing each 2-cell and its boundary edges.
pub fn complex_to_dot(c: &CellComplex) -> String {
    let sk = skeleton_graph(c);
    let mut out = String::new();
    let _ = writeln!(out, "graph complex {{");
    let _ = writeln!(out, "  // partition {} power {}", c.partition, c.power);
    for (g, m) in c.generators.iter().enumerate() {
        let _ = writeln!(out, "  g{g} [label=\"{m}\"];");
    }
    for e in &sk.edges {
        let cell = &c.cells[e.cell];
        let own = cell.gen;
        let other = e.ends.iter().map(|&v| c.cells[v].gen).find(|&g| g != own).unwrap_or(own);
        let members: Vec<String> =
            sk.two_cells.iter().filter(|t| t.edges.contains(&e.cell)).map(|t| format!("c{}", t.cell)).collect();
        let _ = writeln!(
            out,
            "  g{own} -- g{other} [id=\"e{}\", label=\"{}\", two_cells=\"{}\"];",
            e.cell,
            cell.set[0],
            members.join(",")
        );
    }
    if !sk.two_cells.is_empty() {
        let _ = writeln!(out, "  // two-cells");
        for t in &sk.two_cells {
            let cell = &c.cells[t.cell];
            let set: Vec<String> = cell.set.iter().map(Variable::to_string).collect();
            let edges: Vec<String> = t.edges.iter().map(|e| format!("e{e}")).collect();
            let _ = writeln!(out, "  //   c{} g{} {{{}}}: {}", t.cell, cell.gen, set.join(","), edges.join(" "));
        }
    }
    out.push_str("}\n");
    out
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `index,monomial,set_size,set_vars`, indices starting at 1.
pub fn order_csv(cert: &LqCertificate) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "monomial", "set_size", "set_vars"])?;
    for j in 0..cert.len() {
        let vars: Vec<String> = cert.set(j).iter().map(Variable::to_string).collect();
        w.write_record([(j + 1).to_string(), cert.monomial(j).to_string(), vars.len().to_string(), vars.join(" ")])?;
    }
    finish_csv(w)
}

/// One row per homological index `i`, one column per named table.
pub fn betti_csv(tables: &[(&str, &BettiTable)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["i".to_string()];
    header.extend(tables.iter().map(|(name, _)| name.to_string()));
    w.write_record(&header)?;
    let len = tables.iter().map(|(_, t)| BettiTable::trimmed(t.0.clone()).0.len()).max().unwrap_or(0);
    for i in 0..len {
        let mut row = vec![i.to_string()];
        row.extend(tables.iter().map(|(_, t)| t.as_slice().get(i).copied().unwrap_or(0).to_string()));
        w.write_record(&row)?;
    }
    finish_csv(w)
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}
