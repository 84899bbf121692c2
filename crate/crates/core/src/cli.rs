//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::complex::{build_complex, build_lifted_complex, verify_resolution, CellComplex};
use crate::decomposition::{verify_exchange, verify_set_containment, DecompositionFunction};
use crate::error::Error;
use crate::io::{betti_csv, complex_to_dot, complex_to_json, order_csv};
use crate::matching_field::{generators, type_of};
use crate::monomial::{Monomial, Partition};
use crate::oracle::{
    closed_form_q, hilbert_series, hilbert_series_from_betti, multiplicity, total_betti, INCLUSION_EXCLUSION_LIMIT,
};
use crate::power::{betti_from_sets, power_generators, verify_linear_quotients, LqCertificate, LqFailure};
use crate::sweep::{sweep, SweepOptions};
use crate::tableau::canonical_rep;

#[derive(Parser, Debug)]
#[command(name = "bdmf", version, about = "Block diagonal matching field ideals and their resolutions")]
pub struct Cli {
    #[arg(long, short = 'f', global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the main output here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, short = 'v', global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Worker threads.
    #[arg(long, short = 'j', global = true, env = "BDMF_JOBS")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
    Dot,
}

fn parse_partition(s: &str) -> Result<Partition, Error> {
    let a: Partition = s.parse()?;
    if a.n() < 3 {
        return Err(Error::InvalidPartition(format!("parts must sum to at least 3, got {}", a.n())));
    }
    Ok(a)
}

#[derive(Args, Debug, Clone)]
pub struct Instance {
    /// Comma-separated block sizes, e.g. `2,3`.
    #[arg(long, short = 'a', value_parser = parse_partition)]
    pub partition: Partition,
    #[arg(long, short = 'l', default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub power: u64,
}

impl Instance {
    fn ell(&self) -> usize {
        self.power as usize
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Lq,
    Exchange,
    Containment,
    Resolution,
    All,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generators of M_a with their columns and types.
    Gens {
        #[arg(long, short = 'a', value_parser = parse_partition)]
        partition: Partition,
    },
    /// Minimal generators of the power, in ascending order.
    Power(Instance),
    /// The order with the linear quotient sets.
    Order(Instance),
    /// Canonical tableau of one generator, or of all of them.
    Canon {
        #[command(flatten)]
        inst: Instance,
        #[arg(long, short = 'm')]
        monomial: Option<String>,
    },
    /// Betti numbers from the linear quotient sets.
    Betti {
        #[command(flatten)]
        inst: Instance,
        /// Also compute them with the Koszul oracle and compare.
        #[arg(long)]
        oracle: bool,
    },
    /// The cellular complex.
    Complex {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = DecompositionFunction::BEll)]
        decomposition: DecompositionFunction,
        /// Use the lifted mapping cone differential instead of the closed formula.
        #[arg(long)]
        lifted: bool,
    },
    /// Check one property, or all of them; exit 1 on failure
    Verify {
        #[arg(value_enum)]
        check: Check,
        #[command(flatten)]
        inst: Instance,
        #[arg(long, default_value_t = DecompositionFunction::BEll)]
        decomposition: DecompositionFunction,
        #[arg(long)]
        lifted: bool,
    },
    /// Hilbert series of the quotient ring.
    Hilbert {
        #[command(flatten)]
        inst: Instance,
        /// Compare with the determinantal closed form (one block, power 1).
        #[arg(long)]
        closed_form: bool,
    },
    /// Run every verification over a grid of instances.
    Sweep {
        #[arg(long)]
        max_n: usize,
        #[arg(long)]
        max_power: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_oracle: bool,
        #[arg(long)]
        no_resolution: bool,
    },
}

enum Failure {
    Usage(String),
    Verification(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

struct Outcome {
    output: String,
    failure: Option<Value>,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Outcome { output, failure: None }
    }
}

type Run = Result<Outcome, Failure>;

fn unsupported(cmd: &str, f: Format) -> Failure {
    Failure::Usage(format!("{cmd} does not support --format {f:?}").to_lowercase())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

fn csv_lines<const K: usize>(
    header: [&str; K],
    rows: impl IntoIterator<Item = [String; K]>,
) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(Error::from)?;
    for r in rows {
        w.write_record(&r).map_err(Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

fn lq_failure(f: LqFailure) -> Failure {
    Failure::Verification(json!({
        "check": "lq",
        "monomial": f.monomial.to_string(),
        "colon_generator": f.witness.to_string(),
        "failure": f,
    }))
}

fn certificate(inst: &Instance) -> Result<LqCertificate, Failure> {
    verify_linear_quotients(&inst.partition, inst.ell())?.map_err(lq_failure)
}

fn triple(t: &[usize; 3]) -> String {
    format!("({},{},{})", t[0], t[1], t[2])
}

fn gens_cmd(a: &Partition, format: Format) -> Run {
    let cols = generators(a)?;
    let n = a.n();
    let rows: Vec<(String, [usize; 3], [usize; 3])> = cols
        .iter()
        .map(|&c| Ok((c.monomial(n).to_string(), c.into(), type_of(c, a)?.into())))
        .collect::<Result<_, Error>>()?;
    let out = match format {
        Format::Text => rows.iter().map(|(m, c, t)| format!("{m} {} type {}\n", triple(c), triple(t))).collect(),
        Format::Json => {
            to_json(&rows.iter().map(|(m, c, t)| json!({ "monomial": m, "column": c, "type": t })).collect::<Vec<_>>())?
        }
        Format::Csv => {
            csv_lines(["monomial", "column", "type"], rows.iter().map(|(m, c, t)| [m.clone(), triple(c), triple(t)]))?
        }
        f => return Err(unsupported("gens", f)),
    };
    Ok(Outcome::ok(out))
}

fn power_cmd(inst: &Instance, format: Format) -> Run {
    let g = power_generators(&inst.partition, inst.ell())?;
    let names: Vec<String> = g.monomials.iter().map(Monomial::to_string).collect();
    let out = match format {
        Format::Text => names.iter().map(|m| format!("{m}\n")).collect(),
        Format::Json => to_json(&names)?,
        Format::Csv => {
            csv_lines(["index", "monomial"], names.iter().enumerate().map(|(i, m)| [(i + 1).to_string(), m.clone()]))?
        }
        f => return Err(unsupported("power", f)),
    };
    Ok(Outcome::ok(out))
}

fn order_cmd(inst: &Instance, format: Format) -> Run {
    let cert = certificate(inst)?;
    let out = match format {
        Format::Text => (0..cert.len())
            .map(|j| {
                let vars: Vec<String> = cert.set(j).iter().map(|v| v.to_string()).collect();
                format!("{}, {}, {{{}}}\n", j + 1, cert.monomial(j), vars.join(","))
            })
            .collect(),
        Format::Json => to_json(
            &(0..cert.len())
                .map(|j| {
                    let vars: Vec<String> = cert.set(j).iter().map(|v| v.to_string()).collect();
                    json!({ "index": j + 1, "monomial": cert.monomial(j).to_string(), "set": vars })
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Csv => order_csv(&cert)?,
        f => return Err(unsupported("order", f)),
    };
    Ok(Outcome::ok(out))
}

fn canon_cmd(inst: &Instance, monomial: Option<&str>, format: Format) -> Run {
    let a = &inst.partition;
    let pairs = match monomial {
        Some(s) => {
            let m = Monomial::parse(s, a.n())?;
            let t = canonical_rep(&m, a, inst.ell())?;
            vec![(m, t)]
        }
        None => {
            let g = power_generators(a, inst.ell())?;
            g.monomials.into_iter().zip(g.canonical).collect()
        }
    };
    let out = match format {
        Format::Text => pairs.iter().map(|(m, t)| format!("{m} {t}\n")).collect(),
        Format::Json => {
            to_json(&pairs.iter().map(|(m, t)| json!({ "monomial": m.to_string(), "tableau": t })).collect::<Vec<_>>())?
        }
        f => return Err(unsupported("canon", f)),
    };
    Ok(Outcome::ok(out))
}

fn betti_cmd(inst: &Instance, oracle: bool, format: Format) -> Run {
    let formula = match verify_linear_quotients(&inst.partition, inst.ell())? {
        Ok(cert) => Some(betti_from_sets(&cert)),
        Err(_) if oracle => None,
        Err(f) => return Err(lq_failure(f)),
    };
    let oracle_table =
        if oracle { Some(total_betti(&power_generators(&inst.partition, inst.ell())?.monomials)?) } else { None };
    let matches = match (&formula, &oracle_table) {
        (Some(f), Some(o)) => Some(f == o),
        _ => None,
    };
    let mut tables = Vec::new();
    if let Some(f) = &formula {
        tables.push(("formula", f));
    }
    if let Some(o) = &oracle_table {
        tables.push(("oracle", o));
    }
    let out = match format {
        Format::Text => {
            let mut s: String = tables.iter().map(|(name, t)| format!("{name} {t}\n")).collect();
            if formula.is_none() {
                s.push_str("formula unavailable: the order does not have linear quotients\n");
            }
            if let Some(m) = matches {
                s.push_str(&format!("match {m}\n"));
            }
            s
        }
        Format::Json => to_json(&json!({ "formula": formula, "oracle": oracle_table, "match": matches }))?,
        Format::Csv => betti_csv(&tables)?,
        f => return Err(unsupported("betti", f)),
    };
    let failure =
        (matches == Some(false)).then(|| json!({ "check": "betti", "formula": formula, "oracle": oracle_table }));
    Ok(Outcome { output: out, failure })
}

fn construct(inst: &Instance, kind: DecompositionFunction, lifted: bool) -> Result<CellComplex, Failure> {
    let cert = certificate(inst)?;
    Ok(if lifted { build_lifted_complex(&cert)? } else { build_complex(&cert, kind)? })
}

fn complex_text(c: &CellComplex) -> String {
    let mut s = format!("f-vector {}\n", c.f_vector());
    for (id, cell) in c.cells.iter().enumerate() {
        let set: Vec<String> = cell.set.iter().map(|v| v.to_string()).collect();
        let terms: Vec<String> = c.boundary[id].iter().map(|t| format!("{}*{}*[{}]", t.scalar, t.var, t.to)).collect();
        s.push_str(&format!(
            "[{id}] dim {} gen {} {{{}}} mdeg {} -> {}\n",
            cell.dim(),
            cell.gen,
            set.join(","),
            cell.mdeg,
            if terms.is_empty() { "0".to_string() } else { terms.join(" + ") }
        ));
    }
    s
}

fn complex_cmd(
    inst: &Instance,
    dot: Option<&PathBuf>,
    json_path: Option<&PathBuf>,
    kind: DecompositionFunction,
    lifted: bool,
    format: Format,
) -> Run {
    let c = construct(inst, kind, lifted)?;
    if let Some(p) = dot {
        std::fs::write(p, complex_to_dot(&c)).map_err(Error::from)?;
    }
    if let Some(p) = json_path {
        std::fs::write(p, complex_to_json(&c)?).map_err(Error::from)?;
    }
    let out = match format {
        Format::Text => complex_text(&c),
        Format::Json => complex_to_json(&c)? + "\n",
        Format::Dot => complex_to_dot(&c),
        f => return Err(unsupported("complex", f)),
    };
    Ok(Outcome::ok(out))
}

fn verify_cmd(
    check: Check,
    inst: &Instance,
    kind: DecompositionFunction,
    lifted: bool,
    format: Format,
    verbose: bool,
) -> Run {
    if !matches!(format, Format::Text | Format::Json) {
        return Err(unsupported("verify", format));
    }
    let cert = match certificate(inst) {
        Ok(c) => c,
        Err(Failure::Verification(v)) => {
            let line = "lq: fail\n".to_string();
            let out = if format == Format::Json { to_json(&json!({ "lq": v }))? } else { line };
            return Ok(Outcome { output: out, failure: Some(v) });
        }
        Err(e) => return Err(e),
    };
    let mut lines = vec![format!("lq: pass ({} generators, largest set {})", cert.len(), cert.max_set_size())];
    let mut results = serde_json::Map::new();
    let mut failures = serde_json::Map::new();
    results.insert("lq".into(), json!({ "passed": true, "generators": cert.len() }));
    let want = |c: Check| check == c || check == Check::All;
    if want(Check::Exchange) {
        let t = Instant::now();
        let r = verify_exchange(&cert, kind);
        lines.push(format!(
            "exchange ({kind}): {} ({} pairs, {} violations, {} faults, {} results not earlier)",
            if r.passed() { "pass" } else { "fail" },
            r.pairs_checked,
            r.violations.len(),
            r.faults.len(),
            r.not_earlier.len()
        ));
        if verbose {
            eprintln!("exchange checked in {:?}", t.elapsed());
        }
        let v = serde_json::to_value(&r).map_err(Error::from)?;
        if !r.passed() {
            failures.insert("exchange".into(), v.clone());
        }
        results.insert("exchange".into(), v);
    }
    if want(Check::Containment) {
        let r = verify_set_containment(&cert, kind);
        // Only gating when asked for directly: the construction does not rely on it.
        let gating = check == Check::Containment;
        lines.push(format!(
            "containment ({kind}): {} ({} checked, {} violations){}",
            if r.passed() { "pass" } else { "fail" },
            r.checked,
            r.violations.len(),
            if gating { "" } else { " [informational]" }
        ));
        let v = serde_json::to_value(&r).map_err(Error::from)?;
        if gating && !r.passed() {
            failures.insert("containment".into(), v.clone());
        }
        results.insert("containment".into(), v);
    }
    if want(Check::Resolution) {
        let t = Instant::now();
        let c = if lifted { build_lifted_complex(&cert)? } else { build_complex(&cert, kind)? };
        let r = verify_resolution(&c)?;
        let label = if lifted { "lifted".to_string() } else { kind.to_string() };
        let detail = if !r.d_squared {
            "d^2 != 0, acyclicity not evaluated".to_string()
        } else {
            format!("{} multidegrees, {} failures", r.multidegrees_checked, r.failure_count)
        };
        lines.push(format!(
            "resolution ({label}): {} (f-vector {}, linear {}, {detail})",
            if r.passed() { "pass" } else { "fail" },
            c.f_vector(),
            r.linear
        ));
        if verbose {
            eprintln!("resolution checked in {:?}", t.elapsed());
        }
        let v = serde_json::to_value(&r).map_err(Error::from)?;
        if !r.passed() {
            failures.insert("resolution".into(), v.clone());
        }
        results.insert("resolution".into(), v);
    }
    let out = match format {
        Format::Json => to_json(&Value::Object(results))?,
        _ => lines.iter().map(|l| format!("{l}\n")).collect(),
    };
    let failure = (!failures.is_empty()).then_some(Value::Object(failures));
    Ok(Outcome { output: out, failure })
}

fn hilbert_cmd(inst: &Instance, closed_form: bool, format: Format) -> Run {
    let a = &inst.partition;
    if closed_form && (a.num_blocks() != 1 || inst.ell() != 1) {
        return Err(Failure::Usage("--closed-form applies to a single block with power 1".into()));
    }
    let gens = power_generators(a, inst.ell())?.monomials;
    let h = if gens.len() <= INCLUSION_EXCLUSION_LIMIT {
        hilbert_series(&gens, a.n())?
    } else {
        hilbert_series_from_betti(&gens, a.n())?
    };
    let closed = if closed_form { Some(closed_form_q(a.n())?) } else { None };
    let matches = closed.as_ref().map(|q| *q == h.numerator);
    let out = match format {
        Format::Text => {
            let mut s =
                format!("numerator {:?}\nexponent {}\nmultiplicity {}\n", h.numerator, h.exponent, multiplicity(&h));
            if let Some(q) = &closed {
                s.push_str(&format!("closed form {q:?}\nmatch {}\n", matches == Some(true)));
            }
            s
        }
        Format::Json => to_json(&json!({
            "numerator": h.numerator,
            "exponent": h.exponent,
            "multiplicity": multiplicity(&h),
            "closed_form": closed,
            "match": matches,
        }))?,
        f => return Err(unsupported("hilbert", f)),
    };
    let failure = (matches == Some(false))
        .then(|| json!({ "check": "hilbert", "numerator": h.numerator, "closed_form": closed }));
    Ok(Outcome { output: out, failure })
}

fn sweep_cmd(
    max_n: usize,
    max_power: usize,
    out: Option<&PathBuf>,
    oracle: bool,
    resolution: bool,
    format: Format,
) -> Run {
    let opts = SweepOptions { max_n, max_power, oracle, resolution };
    let report = sweep(&opts)?;
    let csv = report.to_csv()?;
    if let Some(p) = out {
        std::fs::write(p, &csv).map_err(Error::from)?;
    }
    let text = match format {
        Format::Text | Format::Csv => csv,
        Format::Json => to_json(&report)?,
        f => return Err(unsupported("sweep", f)),
    };
    let failed: Vec<Value> = report
        .failures()
        .map(|r| {
            json!({
                "row": r,
                "replay": format!("bdmf verify all --partition {} --power {}", r.partition, r.power),
            })
        })
        .collect();
    let failure = (!failed.is_empty()).then(|| json!({ "check": "sweep", "failures": failed }));
    Ok(Outcome { output: text, failure })
}

fn dispatch(cli: &Cli) -> Run {
    let f = cli.format;
    match &cli.command {
        Command::Gens { partition } => gens_cmd(partition, f),
        Command::Power(inst) => power_cmd(inst, f),
        Command::Order(inst) => order_cmd(inst, f),
        Command::Canon { inst, monomial } => canon_cmd(inst, monomial.as_deref(), f),
        Command::Betti { inst, oracle } => betti_cmd(inst, *oracle, f),
        Command::Complex { inst, dot, json, decomposition, lifted } => {
            complex_cmd(inst, dot.as_ref(), json.as_ref(), *decomposition, *lifted, f)
        }
        Command::Verify { check, inst, decomposition, lifted } => {
            verify_cmd(*check, inst, *decomposition, *lifted, f, cli.verbose > 0)
        }
        Command::Hilbert { inst, closed_form } => hilbert_cmd(inst, *closed_form, f),
        Command::Sweep { max_n, max_power, out, no_oracle, no_resolution } => {
            sweep_cmd(*max_n, *max_power, out.as_ref(), !no_oracle, !no_resolution, f)
        }
    }
}

fn shell_quote(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_.,/=^*".contains(c)) {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', "'\\''"))
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code: 0 success, 1 verification failure, 2 usage error.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{rendered}") } else { write!(stderr, "{rendered}") };
            return code;
        }
    };
    if let Some(j) = cli.jobs {
        // Fails only if a pool already exists, in which case it is reused.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    let start = Instant::now();
    let result = dispatch(&cli);
    if cli.verbose > 0 {
        let _ = writeln!(stderr, "finished in {:?}", start.elapsed());
    }
    match result {
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Verification(v)) => report_failure(&args, v, stderr),
        Ok(outcome) => {
            let written = match &cli.output {
                Some(p) => std::fs::write(p, &outcome.output).map_err(|e| e.to_string()),
                None => stdout.write_all(outcome.output.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return 2;
            }
            match outcome.failure {
                Some(v) => report_failure(&args, v, stderr),
                None => 0,
            }
        }
    }
}

fn report_failure(args: &[OsString], details: Value, stderr: &mut dyn Write) -> i32 {
    let replay: Vec<String> = std::iter::once("bdmf".to_string())
        .chain(args.iter().skip(1).map(|a| shell_quote(&a.to_string_lossy())))
        .collect();
    let doc = json!({ "status": "verification_failed", "details": details, "replay": replay.join(" ") });
    let _ = writeln!(stderr, "{}", serde_json::to_string(&doc).expect("json value"));
    1
}
