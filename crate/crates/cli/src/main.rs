//! `normcensus`: solvability verdicts, class-field data and exact point
//! counts for norm equations over real quadratic fields.
//!
//! Exit codes: 0 success, 2 invalid input, 3 internal invariant violation.
//! `NORMCENSUS_THREADS` sets the worker count.

mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use normcensus::census::verdict_with;
use normcensus::classgroup::class_group;
use normcensus::counting::{brute_count, calibration_from, count_orbits_to, fundamental_solutions, slope_of, BRUTE_LIMIT};
use normcensus::hassewitt::c_n_a;
use normcensus::localdata::local_density;
use normcensus::quadfield::field_data;
use normcensus::{EquationSpec, Error};

use report::{float, int, rational, Report};

#[derive(Parser)]
#[command(name = "normcensus", version, about = "Norm-equation census for real quadratic fields")]
struct Cli {
    /// Emit tab-separated values instead of JSON.
    #[arg(long, global = true)]
    tsv: bool,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fundamental unit, norm-one unit and narrow class group of Q(√d).
    Unit { d: u64 },

    /// Local flags, character sum, verdict and witness for N(x + yω) = m.
    Solve {
        d: u64,
        #[arg(allow_hyphen_values = true)]
        m: BigInt,
    },

    /// One row per nonzero m in an inclusive range.
    Census {
        d: u64,
        /// Inclusive range `A..B`.
        #[arg(long = "m-range", allow_hyphen_values = true, value_parser = parse_range)]
        m_range: (i64, i64),
        /// Exponents k for exact counts at T = 10^k.
        #[arg(long = "T-exponents", value_delimiter = ',')]
        t_exponents: Vec<u32>,
    },

    /// Exact number of solutions with max(|x|, |y|) ≤ T.
    Count {
        d: u64,
        #[arg(allow_hyphen_values = true)]
        m: BigInt,
        t: BigInt,
    },

    /// Proportion of residues mod p^k solving the equation, scaled by p^k.
    Density {
        d: u64,
        #[arg(allow_hyphen_values = true)]
        m: BigInt,
        p: u64,
        k: u32,
    },

    /// The constant c_n(a) for symmetric n × n matrices of determinant a.
    Cna {
        n: u32,
        #[arg(allow_hyphen_values = true)]
        a: BigInt,
        /// Density ratio at a prime, as `p=num/den`. Repeatable.
        #[arg(long = "ratio", value_parser = parse_ratio)]
        ratios: Vec<(u64, BigRational)>,
    },
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once("..").ok_or("expected A..B")?;
    let a = a.trim().parse::<i64>().map_err(|e| format!("bad lower bound: {e}"))?;
    let b = b.trim().parse::<i64>().map_err(|e| format!("bad upper bound: {e}"))?;
    Ok((a, b))
}

fn parse_ratio(s: &str) -> Result<(u64, BigRational), String> {
    let (p, q) = s.split_once('=').ok_or("expected p=num/den")?;
    let p = p.trim().parse::<u64>().map_err(|e| format!("bad prime: {e}"))?;
    let (n, d) = q.split_once('/').unwrap_or((q, "1"));
    let n = n.trim().parse::<BigInt>().map_err(|e| format!("bad numerator: {e}"))?;
    let d = d.trim().parse::<BigInt>().map_err(|e| format!("bad denominator: {e}"))?;
    if d.is_zero() {
        return Err("zero denominator".into());
    }
    Ok((p, BigRational::new(n, d)))
}

enum Failure {
    Input(String),
    Internal(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_internal() {
            Failure::Internal(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type Outcome<T> = Result<T, Failure>;

#[derive(Serialize)]
struct UnitReport {
    d: u64,
    disc: u64,
    eps0: String,
    eps0_norm: i8,
    eps: String,
    log_eps: Value,
    period: usize,
    h_plus: usize,
    h: usize,
    class_group: Vec<u64>,
}

fn unit(d: u64) -> Outcome<Report> {
    let f = field_data(d)?;
    let g = class_group(f.disc)?;
    Ok(Report::single(&UnitReport {
        d,
        disc: f.disc,
        eps0: f.eps0.to_string(),
        eps0_norm: f.norm_eps0,
        eps: f.eps.to_string(),
        log_eps: float(f.log_eps),
        period: f.period,
        h_plus: g.h_plus(),
        h: g.wide_class_number(),
        class_group: g.invariant_factors(),
    }))
}

#[derive(Serialize)]
struct LocalFlag {
    place: String,
    solvable: bool,
}

#[derive(Serialize)]
struct SolveReport {
    d: u64,
    m: Value,
    locally_solvable: bool,
    local: Vec<LocalFlag>,
    c_m: Value,
    solvable: bool,
    witness: Option<[Value; 2]>,
    predicted_slope: Value,
}

fn solve(d: u64, m: BigInt) -> Outcome<Report> {
    let spec = EquationSpec::new(d, m)?;
    let v = verdict_with(&spec, &class_group(spec.disc)?)?;
    Ok(Report::single(&SolveReport {
        d,
        m: int(&v.m),
        locally_solvable: v.locally_solvable_everywhere(),
        local: v
            .locally_solvable
            .iter()
            .map(|(p, ok)| LocalFlag { place: p.to_string(), solvable: *ok })
            .collect(),
        c_m: int(&v.c_m),
        solvable: v.solvable,
        witness: v.witness.as_ref().map(|(x, y)| [int(x), int(y)]),
        predicted_slope: float(v.predicted_slope),
    }))
}

#[derive(Serialize)]
struct CensusRow {
    m: i64,
    locally_solvable: bool,
    solvable: bool,
    c_m: Value,
    orbit_count: usize,
    exact_slope: Value,
    predicted_slope: Value,
    calibration: Value,
    /// `N(10^k)` for each requested exponent, keyed by `k`.
    counts: BTreeMap<String, Value>,
}

#[derive(Serialize)]
struct CalibrationSummary {
    rows: usize,
    mean: Value,
    min: Value,
    max: Value,
    /// `(max − min) / mean`.
    dispersion: Value,
}

#[derive(Serialize)]
struct CensusReport {
    d: u64,
    disc: u64,
    h_plus: usize,
    rows: Vec<CensusRow>,
    calibration: CalibrationSummary,
}

fn census(d: u64, (lo, hi): (i64, i64), exponents: &[u32]) -> Outcome<Report> {
    let ms: Vec<i64> = (lo..=hi).filter(|&m| m != 0).collect();
    if ms.is_empty() {
        return Err(Failure::Input(format!("empty range {lo}..{hi}")));
    }
    let field = field_data(d)?;
    let group = class_group(field.disc)?;
    let h_plus = group.h_plus();
    let bounds: Vec<(u32, BigInt)> = exponents.iter().map(|&k| (k, BigInt::from(10).pow(k))).collect();
    eprintln!("census d = {d}: {} values of m", ms.len());

    let rows = ms
        .par_iter()
        .map(|&m| -> Outcome<CensusRow> {
            let spec = EquationSpec::with_field(field.clone(), m)?;
            let v = verdict_with(&spec, &group)?;
            let orbits = fundamental_solutions(&spec)?;
            let n = orbits.orbit_count();
            let cal = (n > 0 && !v.c_m.is_zero()).then(|| calibration_from(n, h_plus, field.disc, &v.c_m));
            Ok(CensusRow {
                m,
                locally_solvable: v.locally_solvable_everywhere(),
                solvable: v.solvable,
                c_m: int(&v.c_m),
                orbit_count: n,
                exact_slope: float(slope_of(&orbits).value()),
                predicted_slope: float(v.predicted_slope),
                calibration: cal.map_or(Value::Null, float),
                counts: bounds
                    .iter()
                    .map(|(k, t)| (k.to_string(), int(&count_orbits_to(&orbits, t))))
                    .collect(),
            })
        })
        .collect::<Outcome<Vec<_>>>()?;

    let cals: Vec<f64> = rows.iter().filter_map(|r| r.calibration.as_f64()).collect();
    let summary = if cals.is_empty() {
        CalibrationSummary { rows: 0, mean: Value::Null, min: Value::Null, max: Value::Null, dispersion: Value::Null }
    } else {
        let lo = cals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = cals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = cals.iter().sum::<f64>() / cals.len() as f64;
        CalibrationSummary {
            rows: cals.len(),
            mean: float(mean),
            min: float(lo),
            max: float(hi),
            dispersion: float((hi - lo) / mean),
        }
    };
    Ok(Report::tabular(
        &CensusReport { d, disc: field.disc, h_plus, rows, calibration: summary },
        "rows",
    ))
}

#[derive(Serialize)]
struct CountReport {
    d: u64,
    m: Value,
    t: Value,
    count: Value,
    method: &'static str,
}

fn count(d: u64, m: BigInt, t: BigInt) -> Outcome<Report> {
    if t.is_negative() {
        return Err(Failure::Input("T must be nonnegative".into()));
    }
    let spec = EquationSpec::new(d, m)?;
    let (count, method) = match u64::try_from(&t) {
        Ok(small) if small <= BRUTE_LIMIT => (BigInt::from(brute_count(&spec, small)?), "brute"),
        _ => (count_orbits_to(&fundamental_solutions(&spec)?, &t), "orbits"),
    };
    Ok(Report::single(&CountReport { d, m: int(&spec.m), t: int(&t), count: int(&count), method }))
}

#[derive(Serialize)]
struct DensityReport {
    d: u64,
    m: Value,
    p: u64,
    k: u32,
    density: Value,
}

fn density(d: u64, m: BigInt, p: u64, k: u32) -> Outcome<Report> {
    let spec = EquationSpec::new(d, m)?;
    let q = local_density(&spec, p, k)?;
    Ok(Report::single(&DensityReport { d, m: int(&spec.m), p, k, density: rational(&q) }))
}

#[derive(Serialize)]
struct CnaOutput {
    n: u32,
    a: Value,
    ratios: BTreeMap<String, Value>,
    arch_limit: i8,
    c_value: Value,
}

fn cna(n: u32, a: BigInt, ratios: Vec<(u64, BigRational)>) -> Outcome<Report> {
    let given: BTreeMap<u64, BigRational> = ratios.into_iter().collect();
    let r = c_n_a(n, &a, &given)?;
    Ok(Report::single(&CnaOutput {
        n: r.n,
        a: int(&r.a),
        ratios: r.ratios.iter().map(|(p, q)| (p.to_string(), rational(q))).collect(),
        arch_limit: r.arch_limit,
        c_value: rational(&r.c_value),
    }))
}

fn configure_threads() -> Outcome<()> {
    let Ok(raw) = std::env::var("NORMCENSUS_THREADS") else {
        return Ok(());
    };
    let n = raw
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("NORMCENSUS_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Internal(e.to_string()))
}

fn run(cli: Cli) -> Outcome<()> {
    configure_threads()?;
    let report = match cli.command {
        Command::Unit { d } => unit(d)?,
        Command::Solve { d, m } => solve(d, m)?,
        Command::Census { d, m_range, t_exponents } => census(d, m_range, &t_exponents)?,
        Command::Count { d, m, t } => count(d, m, t)?,
        Command::Density { d, m, p, k } => density(d, m, p, k)?,
        Command::Cna { n, a, ratios } => cna(n, a, ratios)?,
    };
    let text = if cli.tsv { report.tsv() } else { report.json() };
    match cli.out {
        Some(path) => {
            std::fs::write(&path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            ExitCode::from(1)
        }
    }
}
