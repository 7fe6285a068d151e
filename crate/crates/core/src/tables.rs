//! Regenerated tables as typed string rows, with CSV/JSON output and
//! content-wise comparison against golden files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::delpezzo::{self, BranchRow, DelPezzoRow};
use crate::exact::{fmt_q, Q};
use crate::germs::{BoundaryGermRecord, GermKind, GermRecord};
use crate::search::{self, germ_name, weights_str, CandidateTuple, EulerWindow, QuadMode};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("unknown table id {0}")]
    UnknownId(String),
    #[error(transparent)]
    Search(#[from] search::SearchError),
    #[error(transparent)]
    DelPezzo(#[from] delpezzo::DelPezzoError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("header mismatch: expected {expected:?}, found {found:?}")]
    Header { expected: Vec<String>, found: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TableId {
    Sing,
    ThreePoint,
    FourPointOnS,
    FourPointOffS,
    C1,
    C2,
    C3,
    Pic1,
    Dp25,
    Nota,
    A1,
    A2,
    AdjMin,
}

impl TableId {
    pub const ALL: [TableId; 13] = [
        TableId::Sing,
        TableId::ThreePoint,
        TableId::FourPointOnS,
        TableId::FourPointOffS,
        TableId::C1,
        TableId::C2,
        TableId::C3,
        TableId::Pic1,
        TableId::Dp25,
        TableId::Nota,
        TableId::A1,
        TableId::A2,
        TableId::AdjMin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TableId::Sing => "T-SING",
            TableId::ThreePoint => "T-3PT",
            TableId::FourPointOnS => "T-4PT-ONS",
            TableId::FourPointOffS => "T-4PT-OFFS",
            TableId::C1 => "T-C1",
            TableId::C2 => "T-C2",
            TableId::C3 => "T-C3",
            TableId::Pic1 => "T-PIC1",
            TableId::Dp25 => "T-DP25",
            TableId::Nota => "T-NOTA",
            TableId::A1 => "T-A1",
            TableId::A2 => "T-A2",
            TableId::AdjMin => "ADJ-MIN",
        }
    }

    pub fn header(self) -> &'static [&'static str] {
        match self {
            TableId::Sing => &["singularity", "weights", "x_ld", "pair_ld", "gamma", "q", "sup_b"],
            TableId::ThreePoint | TableId::FourPointOnS => &["p_vec", "q_vec", "gamma_vec", "labels", "b"],
            TableId::FourPointOffS => &["p_vec", "x4", "q_vec", "labels", "gamma_vec", "b"],
            TableId::C1 | TableId::C2 | TableId::C3 => &["kept", "u", "v", "left"],
            TableId::Pic1 | TableId::Dp25 => &["keep", "worst_sing", "mld", "K2", "rho", "complement_ok"],
            TableId::Nota => &["graph", "gamma", "order"],
            TableId::A1 | TableId::A2 => &["singularity", "weights", "ld", "gamma"],
            TableId::AdjMin => &["value", "orders"],
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.name())
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableId {
    type Err = TableError;
    fn from_str(s: &str) -> Result<Self, TableError> {
        TableId::ALL
            .iter()
            .copied()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| TableError::UnknownId(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub b_min: Q,
    pub bound: Q,
    pub exhaustive: bool,
    pub euler: EulerWindow,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            b_min: search::b_threshold(),
            bound: crate::exact::q(1, 24),
            exhaustive: false,
            euler: EulerWindow::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(id: TableId, rows: Vec<Vec<String>>) -> Self {
        Table { header: id.header().iter().map(|s| s.to_string()).collect(), rows }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let m: Map<String, Value> =
                        self.header.iter().cloned().zip(r.iter().map(|c| Value::String(c.clone()))).collect();
                    Value::Object(m)
                })
                .collect(),
        )
    }

    /// Reads CSV text; lines starting with `#` are provenance comments.
    pub fn from_csv(text: &str) -> Result<Table, TableError> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).has_headers(true).from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(str::to_string).collect());
        }
        Ok(Table { header, rows })
    }
}

/// Row-level differences between an expected and an actual table, ignoring row order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TableDiff {
    pub missing: Vec<Vec<String>>,
    pub extra: Vec<Vec<String>>,
}

impl TableDiff {
    pub fn is_empty(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty()
    }
}

pub fn compare(expected: &Table, actual: &Table) -> Result<TableDiff, TableError> {
    if expected.header != actual.header {
        return Err(TableError::Header { expected: expected.header.clone(), found: actual.header.clone() });
    }
    let mut counts: BTreeMap<&Vec<String>, i64> = BTreeMap::new();
    for r in &expected.rows {
        *counts.entry(r).or_default() += 1;
    }
    for r in &actual.rows {
        *counts.entry(r).or_default() -= 1;
    }
    let mut diff = TableDiff::default();
    for (row, n) in counts {
        for _ in 0..n.abs() {
            if n > 0 { diff.missing.push(row.clone()) } else { diff.extra.push(row.clone()) }
        }
    }
    Ok(diff)
}

pub fn read_golden(dir: &Path, id: TableId) -> Result<Table, TableError> {
    Table::from_csv(&std::fs::read_to_string(dir.join(id.file_name()))?)
}

fn joined<T>(v: &[T], f: impl Fn(&T) -> String) -> String {
    v.iter().map(f).collect::<Vec<_>>().join(";")
}

fn ld_str(l: &[Q]) -> String {
    joined(l, fmt_q)
}

fn sing_row(r: &BoundaryGermRecord) -> Vec<String> {
    vec![
        r.label().canonical().to_string(),
        weights_str(&r.germ.weights()),
        ld_str(&r.germ.log_discrepancies),
        joined(&r.pair_ld, |a| a.to_string()),
        fmt_q(&r.germ.gamma),
        r.q_inv.to_string(),
        fmt_q(&r.sup_b),
    ]
}

fn tuple_row(c: &CandidateTuple) -> Vec<String> {
    let labels = joined(&c.boundary_germs(), |g| g.label().to_string());
    vec![
        joined(&c.p_vec(), i64::to_string),
        joined(&c.q_vec(), i64::to_string),
        joined(&c.gamma_vec(), fmt_q),
        labels,
        fmt_q(&c.b),
    ]
}

fn off_s_row(c: &CandidateTuple) -> Vec<String> {
    let labels = joined(&c.boundary_germs(), |g| g.label().to_string());
    vec![
        joined(&c.p_vec(), i64::to_string),
        germ_name(c.off_s().expect("off-curve tuple")),
        joined(&c.q_vec(), i64::to_string),
        labels,
        joined(&c.gamma_vec(), fmt_q),
        fmt_q(&c.b),
    ]
}

pub fn branch_row_cells(r: &BranchRow) -> Vec<String> {
    vec![
        joined(&r.kept, usize::to_string),
        r.u.to_string(),
        joined(&r.v, i64::to_string),
        r.left.as_ref().map(fmt_q).unwrap_or_else(|| "none".into()),
    ]
}

pub fn dp_row_cells(r: &DelPezzoRow) -> Vec<String> {
    vec![
        r.keep.to_string(),
        r.worst_sing.map(|l| l.to_string()).unwrap_or_default(),
        fmt_q(&r.mld),
        fmt_q(&r.k2),
        r.rho.to_string(),
        r.complement_index_ok.to_string(),
    ]
}

fn catalog_row(g: &GermRecord) -> Vec<String> {
    vec![germ_name(g), weights_str(&g.weights()), ld_str(&g.log_discrepancies), fmt_q(&g.gamma)]
}

fn cyclic_catalog(lo: i64, hi: i64) -> Vec<Vec<String>> {
    search::x4_catalog()
        .iter()
        .filter(|g| g.kind == GermKind::Cyclic && (lo..=hi).contains(&g.order))
        .map(catalog_row)
        .collect()
}

pub fn generate(id: TableId, opts: &Options) -> Result<Table, TableError> {
    let rows: Vec<Vec<String>> = match id {
        TableId::Sing => search::table_sing(&opts.b_min)?.iter().map(sing_row).collect(),
        TableId::ThreePoint => search::search_triples().iter().map(tuple_row).collect(),
        TableId::FourPointOnS => search::search_quadruples(QuadMode::OnS, opts.euler).iter().map(tuple_row).collect(),
        TableId::FourPointOffS => {
            search::search_quadruples(QuadMode::OffS, opts.euler).iter().map(off_s_row).collect()
        }
        TableId::C1 | TableId::C2 | TableId::C3 => {
            let i = match id {
                TableId::C1 => 1,
                TableId::C2 => 2,
                _ => 3,
            };
            let w = delpezzo::build_w()?;
            delpezzo::branch_tables(&w, i, opts.exhaustive)?.iter().map(branch_row_cells).collect()
        }
        TableId::Pic1 => {
            let w = delpezzo::build_w()?;
            delpezzo::picard_one_rows(&w).iter().filter_map(|r| r.as_ref().ok()).map(dp_row_cells).collect()
        }
        TableId::Dp25 => {
            let w = delpezzo::build_w()?;
            delpezzo::classify(&w, opts.exhaustive)?.rows.iter().map(dp_row_cells).collect()
        }
        TableId::Nota => search::x4_catalog()
            .iter()
            .filter(|g| g.kind == GermKind::Fork)
            .map(|g| vec![germ_name(g), fmt_q(&g.gamma), g.order.to_string()])
            .collect(),
        TableId::A1 => cyclic_catalog(1, 24),
        TableId::A2 => cyclic_catalog(25, search::X4_MAX_ORDER),
        TableId::AdjMin => search::adjunction_minimum(&opts.bound)?
            .iter()
            .map(|a| vec![fmt_q(&a.value), joined(&a.orders, |o| weights_str(o))])
            .collect(),
    };
    Ok(Table::new(id, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in TableId::ALL {
            assert_eq!(id.name().parse::<TableId>().unwrap(), id);
        }
        assert!("T-XYZ".parse::<TableId>().is_err());
    }

    #[test]
    fn csv_round_trip_and_diff() {
        let t = Table {
            header: vec!["a".into(), "b".into()],
            rows: vec![vec!["1/2".into(), "(3,2)".into()], vec!["x".into(), "y;z".into()]],
        };
        let text = format!("# provenance\n{}", t.to_csv());
        let back = Table::from_csv(&text).unwrap();
        assert_eq!(back, t);
        let mut other = t.clone();
        other.rows.reverse();
        assert!(compare(&t, &other).unwrap().is_empty());
        other.rows[0][0] = "w".into();
        let d = compare(&t, &other).unwrap();
        assert_eq!((d.missing.len(), d.extra.len()), (1, 1));
    }
}
