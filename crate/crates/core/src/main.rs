use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use surfsing::delpezzo;
use surfsing::exact::{fmt_q, parse_q, Q};
use surfsing::germs::{boundary_record, CyclicLabel, GermRecord};
use surfsing::search::{self, EulerWindow, QuadMode};
use surfsing::tables::{self, Options, TableError, TableId};

/// Worker threads for the searches; defaults to the available parallelism.
const THREADS_ENV: &str = "SURFSING_THREADS";

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ENV: u8 = 3;

#[derive(Parser)]
#[command(name = "surfsing", version, about = "Exact surface-singularity calculus and table regeneration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(clap::Args, Clone)]
struct TableFlags {
    /// Lower bound on the boundary coefficient for T-SING.
    #[arg(long, value_parser = parse_rational)]
    bmin: Option<Q>,
    /// Upper bound for ADJ-MIN values.
    #[arg(long, value_parser = parse_rational)]
    bound: Option<Q>,
    /// Enumerate every keep-subset in the contraction tables.
    #[arg(long)]
    exhaustive: bool,
    /// Use the three-term Euler window for the on-curve quadruple search.
    #[arg(long)]
    euler_variant: bool,
}

impl TableFlags {
    fn options(&self) -> Options {
        let mut o = Options::default();
        if let Some(b) = &self.bmin {
            o.b_min = b.clone();
        }
        if let Some(b) = &self.bound {
            o.bound = b.clone();
        }
        o.exhaustive = self.exhaustive;
        if self.euler_variant {
            o.euler = EulerWindow::ThreeTerms;
        }
        o
    }
}

#[derive(Subcommand)]
enum Command {
    /// Regenerate a table.
    Table {
        id: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        flags: TableFlags,
    },
    /// Print the invariants of a cyclic germ `1/m(1,q)`.
    Germ {
        label: String,
        /// Treat the label as oriented towards a boundary curve and print the pair data.
        #[arg(long)]
        oriented: bool,
    },
    /// Compare regenerated tables against golden CSV files.
    Verify {
        #[arg(long)]
        golden: PathBuf,
        /// Table ids; all when omitted.
        ids: Vec<String>,
        #[command(flatten)]
        flags: TableFlags,
    },
    /// Run the refutation checks on every tuple of T-3PT or T-4PT-OFFS.
    Refute { id: String },
    /// Count the classification candidates rejected by each filter.
    Audit {
        #[arg(long)]
        exhaustive: bool,
    },
}

fn parse_rational(s: &str) -> Result<Q, String> {
    parse_q(s).map_err(|e| e.to_string())
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    eprintln!("table ids: {}", TableId::ALL.map(|t| t.name()).join(", "));
    ExitCode::from(EXIT_USAGE)
}

fn parse_id(s: &str) -> Result<TableId, ExitCode> {
    s.parse().map_err(|e: TableError| usage(e))
}

fn cmd_table(id: &str, format: Format, flags: &TableFlags) -> ExitCode {
    let id = match parse_id(id) {
        Ok(id) => id,
        Err(c) => return c,
    };
    match tables::generate(id, &flags.options()) {
        Ok(t) => {
            match format {
                Format::Csv => print!("{}", t.to_csv()),
                Format::Json => println!("{}", serde_json::to_string_pretty(&t.to_json()).expect("json")),
            }
            ExitCode::SUCCESS
        }
        Err(e) => usage(e),
    }
}

fn cmd_germ(label: &str, oriented: bool) -> ExitCode {
    let label: CyclicLabel = match label.parse() {
        Ok(l) => l,
        Err(e) => return usage(e),
    };
    let rec = boundary_record(label);
    let out = if oriented {
        rec.to_json()
    } else {
        let mut j = GermRecord::cyclic(label).to_json();
        j["q"] = json!(rec.q_inv);
        j
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    ExitCode::SUCCESS
}

fn cmd_verify(golden: &Path, ids: &[String], flags: &TableFlags) -> ExitCode {
    let ids: Vec<TableId> = if ids.is_empty() {
        TableId::ALL.to_vec()
    } else {
        match ids.iter().map(|s| parse_id(s)).collect::<Result<_, _>>() {
            Ok(v) => v,
            Err(c) => return c,
        }
    };
    let mut expected = Vec::new();
    for &id in &ids {
        match tables::read_golden(golden, id) {
            Ok(t) => expected.push((id, t)),
            Err(e) => {
                eprintln!("error: golden file for {id}: {e}");
                return ExitCode::from(EXIT_ENV);
            }
        }
    }
    let opts = flags.options();
    let mut ok = true;
    for (id, exp) in expected {
        let actual = match tables::generate(id, &opts) {
            Ok(t) => t,
            Err(e) => return usage(e),
        };
        match tables::compare(&exp, &actual) {
            Ok(d) if d.is_empty() => println!("{id}: ok ({} rows)", actual.rows.len()),
            Ok(d) => {
                ok = false;
                println!("{id}: MISMATCH ({} expected, {} generated)", exp.rows.len(), actual.rows.len());
                for r in &d.missing {
                    println!("  - {}", r.join(","));
                }
                for r in &d.extra {
                    println!("  + {}", r.join(","));
                }
            }
            Err(e) => {
                ok = false;
                println!("{id}: MISMATCH {e}");
            }
        }
    }
    if ok { ExitCode::SUCCESS } else { ExitCode::from(EXIT_MISMATCH) }
}

fn cmd_refute(id: &str) -> ExitCode {
    let tuples = match parse_id(id) {
        Ok(TableId::ThreePoint) => search::search_triples(),
        Ok(TableId::FourPointOffS) => search::search_quadruples(QuadMode::OffS, EulerWindow::default()),
        Ok(TableId::FourPointOnS) => search::search_quadruples(QuadMode::OnS, EulerWindow::default()),
        Ok(other) => return usage(format!("no tuples in {other}")),
        Err(c) => return c,
    };
    let mut out = Vec::new();
    for t in &tuples {
        match search::refute(t) {
            Ok(r) => out.push(json!({
                "labels": t.labels().iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                "off_s": t.off_s().map(search::germ_name),
                "b": fmt_q(&t.b),
                "s_y_squared": t.s_y_sq,
                "eliminated": r.eliminated(),
                "checks": r.checks,
            })),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_MISMATCH);
            }
        }
    }
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    ExitCode::SUCCESS
}

fn cmd_audit(exhaustive: bool) -> ExitCode {
    let w = match delpezzo::build_w() {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_MISMATCH);
        }
    };
    match delpezzo::classify(&w, exhaustive) {
        Ok(c) => {
            let rejected: serde_json::Map<String, serde_json::Value> =
                c.rejected.iter().map(|(k, v)| (format!("{k:?}"), json!(v))).collect();
            let out = json!({ "candidates": c.candidates, "survivors": c.rows.len(), "rejected": rejected });
            println!("{}", serde_json::to_string_pretty(&out).expect("json"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_MISMATCH)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer");
                return ExitCode::from(EXIT_ENV);
            }
        },
        Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    search::with_workers(threads, move || match &cli.command {
        Command::Table { id, format, flags } => cmd_table(id, *format, flags),
        Command::Germ { label, oriented } => cmd_germ(label, *oriented),
        Command::Verify { golden, ids, flags } => cmd_verify(golden, ids, flags),
        Command::Refute { id } => cmd_refute(id),
        Command::Audit { exhaustive } => cmd_audit(*exhaustive),
    })
}
