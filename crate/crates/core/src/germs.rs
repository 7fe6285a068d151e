//! Surface germs: cyclic quotients through Hirzebruch-Jung chains and
//! D-type fork quotients, with order, gamma, q and mld.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dualgraph::{Attachment, DualGraph, GraphError, ShapeKind};
use crate::exact::{fmt_q, parse_q, q, qi, to_i64, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GermError {
    #[error("invalid cyclic label 1/{0}(1,{1})")]
    InvalidLabel(i64, i64),
    #[error("cannot parse label {0:?}")]
    Parse(String),
    #[error("unsupported germ graph: {0}")]
    Unsupported(String),
    #[error("pair is not klt (log discrepancy {0})")]
    NotKlt(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `1/m(1,q)` with `gcd(m,q) = 1`, `1 <= q < m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CyclicLabel {
    pub m: i64,
    pub q: i64,
}

impl CyclicLabel {
    pub fn new(m: i64, q: i64) -> Result<Self, GermError> {
        if m < 2 || q < 1 || q >= m || m.gcd(&q) != 1 {
            return Err(GermError::InvalidLabel(m, q));
        }
        Ok(Self { m, q })
    }

    /// `q^{-1} mod m`.
    pub fn q_inverse(&self) -> i64 {
        let ext = self.q.extended_gcd(&self.m);
        ext.x.rem_euclid(self.m)
    }

    /// The reversed chain.
    pub fn reversed(&self) -> Self {
        Self { m: self.m, q: self.q_inverse() }
    }

    /// Identifies `1/m(1,q)` with `1/m(1,q^{-1})`.
    pub fn canonical(&self) -> Self {
        Self { m: self.m, q: self.q.min(self.q_inverse()) }
    }
}

impl fmt::Display for CyclicLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}(1,{})", self.m, self.q)
    }
}

impl FromStr for CyclicLabel {
    type Err = GermError;
    fn from_str(s: &str) -> Result<Self, GermError> {
        let err = || GermError::Parse(s.to_string());
        let t = s.trim();
        let rest = t.strip_prefix("1/").ok_or_else(err)?;
        let (m, tail) = rest.split_once("(1,").ok_or_else(err)?;
        let qs = tail.strip_suffix(')').ok_or_else(err)?;
        let m: i64 = m.trim().parse().map_err(|_| err())?;
        let q: i64 = qs.trim().parse().map_err(|_| err())?;
        CyclicLabel::new(m, q)
    }
}

impl Serialize for CyclicLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CyclicLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Hirzebruch-Jung chain of `m/q`.
pub fn hj_expand(label: CyclicLabel) -> Vec<i64> {
    let (mut m, mut q) = (label.m, label.q);
    let mut w = Vec::new();
    while q != 0 {
        let c = Integer::div_ceil(&m, &q);
        w.push(c);
        (m, q) = (q, c * q - m);
    }
    w
}

/// Inverse of [`hj_expand`]; weights must all be at least 2.
pub fn hj_contract(weights: &[i64]) -> Result<CyclicLabel, GermError> {
    if weights.is_empty() || weights.iter().any(|&w| w < 2) {
        return Err(GermError::Unsupported(format!("chain {weights:?}")));
    }
    let (mut m, mut q) = (1i64, 0i64);
    for &w in weights.iter().rev() {
        (m, q) = (w * m - q, m);
    }
    CyclicLabel::new(m, q)
}

/// `(m,q)` read from the canonical label of a chain.
pub fn canonical_label(m: i64, q: i64) -> Result<CyclicLabel, GermError> {
    Ok(CyclicLabel::new(m, q)?.canonical())
}

pub fn chain_det(weights: &[i64]) -> i64 {
    let (mut a, mut b) = (1i64, 0i64);
    for &w in weights {
        (a, b) = (w * a - b, a);
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GermKind {
    Cyclic,
    Fork,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GermRecord {
    pub kind: GermKind,
    pub graph: DualGraph,
    pub order: i64,
    pub gamma: Q,
    pub mld: Q,
    /// Oriented label for cyclic germs (weights read in vertex order).
    pub label: Option<CyclicLabel>,
    /// Log discrepancies with empty boundary, vertex order.
    pub log_discrepancies: Vec<Q>,
}

impl GermRecord {
    pub fn cyclic(label: CyclicLabel) -> Self {
        Self::from_graph(DualGraph::chain(&hj_expand(label))).expect("HJ chains are valid germs")
    }

    /// Builds a record from a chain or D-type fork graph.
    pub fn from_graph(graph: DualGraph) -> Result<Self, GermError> {
        if graph.is_empty() || graph.weights().iter().any(|&w| w < 2) {
            return Err(GermError::Unsupported("weights must be at least 2".into()));
        }
        let b = graph.discrepancies(&[])?;
        let order = germ_order(&graph)?;
        let kind = if graph.shape().kind == ShapeKind::Chain { GermKind::Cyclic } else { GermKind::Fork };
        let label = match kind {
            GermKind::Cyclic => {
                let order_ids = graph.chain_order().expect("chain");
                let w: Vec<i64> = order_ids.iter().map(|&id| -graph.intersection(id, id)).collect();
                Some(hj_contract(&w)?)
            }
            GermKind::Fork => None,
        };
        let gamma = gamma_from(&graph, &b);
        let lds: Vec<Q> = b.iter().map(|x| Q::one() - x).collect();
        let mld = lds.iter().min().cloned().expect("non-empty");
        if !mld.is_positive() {
            return Err(GermError::NotKlt(fmt_q(&mld)));
        }
        Ok(Self { kind, graph, order, gamma, mld, label, log_discrepancies: lds })
    }

    pub fn weights(&self) -> Vec<i64> {
        self.graph.weights()
    }

    pub fn is_du_val(&self) -> bool {
        self.weights().iter().all(|&w| w == 2)
    }

    pub fn canonical_label(&self) -> Option<CyclicLabel> {
        self.label.map(|l| l.canonical())
    }
}

fn gamma_from(graph: &DualGraph, b: &[Q]) -> Q {
    let w = graph.weights();
    let s = b.iter().zip(&w).fold(Q::zero(), |acc, (bi, &wi)| acc + bi * qi(wi - 2));
    qi(graph.len() as i64) - s
}

/// Order of the local fundamental group.
///
/// Chains give `det`. A D-type fork (two arms that are single (2)-curves)
/// gives `det * n`, where `n` is the determinant of the remaining arm.
/// Du Val E-type forks give the binary polyhedral orders 24, 48, 120.
pub fn germ_order(graph: &DualGraph) -> Result<i64, GermError> {
    let shape = graph.shape();
    let det = to_i64(&graph.determinant()).ok_or_else(|| GermError::Unsupported("determinant".into()))?;
    match shape.kind {
        ShapeKind::Chain => Ok(det),
        ShapeKind::SingleForkTree => {
            let center = shape.forks[0];
            let arms = fork_arms(graph, center);
            if arms.len() != 3 {
                return Err(GermError::Unsupported(format!("fork with {} arms", arms.len())));
            }
            let is_short = |a: &Vec<i64>| a.as_slice() == [2];
            let short: Vec<usize> = (0..3).filter(|&i| is_short(&arms[i])).collect();
            if short.len() < 2 {
                let all_two = graph.weights().iter().all(|&w| w == 2);
                let mut lens: Vec<usize> = arms.iter().map(Vec::len).collect();
                lens.sort();
                return match (all_two, lens.as_slice()) {
                    (true, [1, 2, 2]) => Ok(24),
                    (true, [1, 2, 3]) => Ok(48),
                    (true, [1, 2, 4]) => Ok(120),
                    _ => Err(GermError::Unsupported("not a D-type fork".into())),
                };
            }
            let third = (0..3).find(|i| !short[..2].contains(i)).expect("three arms");
            Ok(det * chain_det(&arms[third]))
        }
        ShapeKind::Other => Err(GermError::Unsupported("graph is neither chain nor single fork".into())),
    }
}

/// Arm weights of a fork, each read outward from the center.
pub fn fork_arms(graph: &DualGraph, center: u32) -> Vec<Vec<i64>> {
    let mut arms = Vec::new();
    for (start, _) in graph.neighbors(center) {
        let mut arm = Vec::new();
        let mut prev = center;
        let mut cur = Some(start);
        while let Some(v) = cur {
            arm.push(-graph.intersection(v, v));
            let next = graph.neighbors(v).into_iter().map(|(w, _)| w).find(|&w| w != prev);
            prev = v;
            cur = next;
        }
        arms.push(arm);
    }
    arms
}

/// `gamma = n - sum b_i (w_i - 2)`.
pub fn gamma_local(g: &GermRecord) -> Q {
    g.gamma.clone()
}

/// Minimal log discrepancy with the given boundary attachments.
pub fn mld_germ(g: &DualGraph, attachments: &[Attachment]) -> Result<Q, GermError> {
    if g.is_empty() {
        return Ok(qi(2));
    }
    let b = g.discrepancies(attachments)?;
    let m = b.iter().map(|x| Q::one() - x).min().expect("non-empty");
    if !m.is_positive() {
        return Err(GermError::NotKlt(fmt_q(&m)));
    }
    Ok(m)
}

/// `c0 + c1 b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineInB {
    pub c0: Q,
    pub c1: Q,
}

impl AffineInB {
    pub fn eval(&self, b: &Q) -> Q {
        &self.c0 + &self.c1 * b
    }
}

impl fmt::Display for AffineInB {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})+({})b", fmt_q(&self.c0), fmt_q(&self.c1))
    }
}

impl FromStr for AffineInB {
    type Err = GermError;
    fn from_str(s: &str) -> Result<Self, GermError> {
        let err = || GermError::Parse(s.to_string());
        let t = s.trim().strip_prefix('(').ok_or_else(err)?;
        let (c0, rest) = t.split_once(")+(").ok_or_else(err)?;
        let c1 = rest.strip_suffix(")b").ok_or_else(err)?;
        Ok(Self { c0: parse_q(c0).map_err(|_| err())?, c1: parse_q(c1).map_err(|_| err())? })
    }
}

/// A cyclic germ meeting the boundary curve at its first chain vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryGermRecord {
    pub germ: GermRecord,
    pub q_inv: i64,
    pub pair_ld: Vec<AffineInB>,
    pub sup_b: Q,
}

impl BoundaryGermRecord {
    pub fn label(&self) -> CyclicLabel {
        self.germ.label.expect("boundary germs are cyclic")
    }

    pub fn order(&self) -> i64 {
        self.germ.order
    }

    /// Boundary coefficients `b_i = 1 - ld_i(b)` at a given `b`.
    pub fn coefficients_at(&self, b: &Q) -> Vec<Q> {
        self.pair_ld.iter().map(|a| Q::one() - a.eval(b)).collect()
    }
}

/// `det` of the chain with the boundary-meeting vertex removed.
pub fn q_invariant(rec: &BoundaryGermRecord) -> i64 {
    let w = rec.germ.weights();
    chain_det(&w[1..])
}

pub fn boundary_record(label: CyclicLabel) -> BoundaryGermRecord {
    let germ = GermRecord::cyclic(label);
    let w = germ.weights();
    let at = |b: Q| {
        let att = Attachment { vertex: 0, coefficient: b, multiplicity: 1 };
        germ.graph.discrepancies(&[att]).expect("chain is negative definite")
    };
    let b0 = at(qi(0));
    let b1 = at(qi(1));
    let pair_ld: Vec<AffineInB> = b0
        .iter()
        .zip(&b1)
        .map(|(x0, x1)| AffineInB { c0: Q::one() - x0, c1: x0 - x1 })
        .collect();
    let seventh = q(1, 7);
    let mut sup = qi(1);
    for a in &pair_ld {
        if a.c1.is_negative() {
            let s = (&seventh - &a.c0) / &a.c1;
            if s < sup {
                sup = s;
            }
        }
    }
    BoundaryGermRecord { q_inv: chain_det(&w[1..]), germ, pair_ld, sup_b: sup }
}

#[derive(Serialize)]
struct GermJson {
    kind: GermKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    weights: Vec<i64>,
    graph: DualGraph,
    order: i64,
    gamma: String,
    mld: String,
    log_discrepancies: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_inv: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pair_ld: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sup_b: Option<String>,
}

impl GermRecord {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.json_base()).expect("serializable")
    }

    fn json_base(&self) -> GermJson {
        GermJson {
            kind: self.kind,
            label: self.canonical_label().map(|l| l.to_string()),
            weights: self.weights(),
            graph: self.graph.clone(),
            order: self.order,
            gamma: fmt_q(&self.gamma),
            mld: fmt_q(&self.mld),
            log_discrepancies: self.log_discrepancies.iter().map(fmt_q).collect(),
            q_inv: None,
            pair_ld: None,
            sup_b: None,
        }
    }
}

impl BoundaryGermRecord {
    pub fn to_json(&self) -> serde_json::Value {
        let mut j = self.germ.json_base();
        j.q_inv = Some(self.q_inv);
        j.pair_ld = Some(self.pair_ld.iter().map(|a| a.to_string()).collect());
        j.sup_b = Some(fmt_q(&self.sup_b));
        serde_json::to_value(j).expect("serializable")
    }
}
