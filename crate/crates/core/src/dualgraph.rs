//! Weighted dual graphs of curve configurations.
//!
//! Vertices carry self-intersections, edges carry intersection multiplicities.
//! Every vertex is assumed to be a smooth rational curve, so `K·E = -E^2 - 2`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{qi, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(u32),
    #[error("unknown vertex id {0}")]
    UnknownVertex(u32),
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("edge multiplicity must be positive")]
    ZeroMultiplicity,
    #[error("intersection matrix is not negative definite")]
    NotNegativeDefinite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: u32,
    pub self_intersection: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DualGraph {
    vertices: Vec<Vertex>,
    edges: BTreeMap<(u32, u32), u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeKind {
    Chain,
    SingleForkTree,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphShape {
    pub kind: ShapeKind,
    pub tails: Vec<u32>,
    pub forks: Vec<u32>,
}

/// A curve outside the graph meeting `vertex` with the given boundary coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attachment {
    pub vertex: u32,
    pub coefficient: Q,
    pub multiplicity: i64,
}

fn key(a: u32, b: u32) -> (u32, u32) {
    (a.min(b), a.max(b))
}

impl DualGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Chain with weights `w` (self-intersections `-w_i`), ids `0..k`.
    pub fn chain(weights: &[i64]) -> Self {
        let mut g = Self::new();
        for (i, &w) in weights.iter().enumerate() {
            g.add_vertex(i as u32, -w).expect("fresh ids");
        }
        for i in 1..weights.len() {
            g.add_edge(i as u32 - 1, i as u32, 1).expect("valid edge");
        }
        g
    }

    pub fn add_vertex(&mut self, id: u32, self_intersection: i64) -> Result<(), GraphError> {
        if self.index_of(id).is_some() {
            return Err(GraphError::DuplicateVertex(id));
        }
        self.vertices.push(Vertex { id, self_intersection });
        Ok(())
    }

    /// Adds `mult` to the intersection number of `a` and `b`.
    pub fn add_edge(&mut self, a: u32, b: u32, mult: u32) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        if mult == 0 {
            return Err(GraphError::ZeroMultiplicity);
        }
        for id in [a, b] {
            self.index_of(id).ok_or(GraphError::UnknownVertex(id))?;
        }
        *self.edges.entry(key(a, b)).or_insert(0) += mult;
        Ok(())
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        self.edges.iter().map(|(&(a, b), &m)| (a, b, m))
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    /// Weights `-E^2` in vertex order.
    pub fn weights(&self) -> Vec<i64> {
        self.vertices.iter().map(|v| -v.self_intersection).collect()
    }

    pub fn intersection(&self, a: u32, b: u32) -> i64 {
        if a == b {
            return self.index_of(a).map_or(0, |i| self.vertices[i].self_intersection);
        }
        self.edges.get(&key(a, b)).copied().unwrap_or(0) as i64
    }

    pub fn neighbors(&self, id: u32) -> Vec<(u32, u32)> {
        self.edges
            .iter()
            .filter_map(|(&(a, b), &m)| match (a == id, b == id) {
                (true, _) => Some((b, m)),
                (_, true) => Some((a, m)),
                _ => None,
            })
            .collect()
    }

    pub fn matrix(&self) -> Vec<Vec<Q>> {
        self.vertices
            .iter()
            .map(|a| self.vertices.iter().map(|b| qi(self.intersection(a.id, b.id))).collect())
            .collect()
    }

    /// `det(-M)`; the empty graph has determinant 1.
    pub fn determinant(&self) -> Q {
        let neg: Vec<Vec<Q>> = self.matrix().into_iter().map(|r| r.into_iter().map(|x| -x).collect()).collect();
        crate::exact::determinant(&neg)
    }

    /// All leading principal minors of `-M` positive.
    pub fn is_negative_definite(&self) -> bool {
        let n = self.len();
        let mut a: Vec<Vec<Q>> = self.matrix().into_iter().map(|r| r.into_iter().map(|x| -x).collect()).collect();
        for col in 0..n {
            if !a[col][col].is_positive() {
                return false;
            }
            let pivot = a[col][col].clone();
            for r in col + 1..n {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = &a[r][col] / &pivot;
                for k in col..n {
                    let t = &f * &a[col][k];
                    a[r][k] -= t;
                }
            }
        }
        true
    }

    /// Solves `(w_j - 2) + sum_i b_i M_ij + sum_att coeff*mult = 0` for all `j`.
    pub fn discrepancies(&self, attachments: &[Attachment]) -> Result<Vec<Q>, GraphError> {
        let n = self.len();
        let mut sys = SymSparse::new(n);
        let mut rhs = vec![Q::zero(); n];
        for (i, v) in self.vertices.iter().enumerate() {
            sys.set(i, i, v.self_intersection);
            rhs[i] = qi(v.self_intersection + 2);
        }
        for (&(a, b), &m) in &self.edges {
            let (i, j) = (self.index_of(a).unwrap(), self.index_of(b).unwrap());
            sys.set(i, j, m as i64);
        }
        for att in attachments {
            let i = self.index_of(att.vertex).ok_or(GraphError::UnknownVertex(att.vertex))?;
            rhs[i] -= &att.coefficient * qi(att.multiplicity);
        }
        sys.solve_negative_definite(&rhs).ok_or(GraphError::NotNegativeDefinite)
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let mut seen = BTreeSet::from([self.vertices[0].id]);
        let mut stack = vec![self.vertices[0].id];
        while let Some(v) = stack.pop() {
            for (w, _) in self.neighbors(v) {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    fn is_tree(&self) -> bool {
        self.is_connected()
            && self.edges.len() + 1 == self.vertices.len().max(1)
            && self.edges.values().all(|&m| m == 1)
    }

    pub fn shape(&self) -> GraphShape {
        let mut tails = Vec::new();
        let mut forks = Vec::new();
        for v in &self.vertices {
            let d = self.neighbors(v.id).len();
            if d <= 1 {
                tails.push(v.id);
            }
            if d >= 3 {
                forks.push(v.id);
            }
        }
        let kind = match (self.is_tree(), forks.len()) {
            (true, 0) => ShapeKind::Chain,
            (true, 1) => ShapeKind::SingleForkTree,
            _ => ShapeKind::Other,
        };
        GraphShape { kind, tails, forks }
    }

    /// Vertex ids of a chain in path order, starting from the tail with the smaller id.
    pub fn chain_order(&self) -> Option<Vec<u32>> {
        let shape = self.shape();
        if shape.kind != ShapeKind::Chain {
            return None;
        }
        let Some(&start) = shape.tails.iter().min() else {
            return Some(Vec::new());
        };
        let mut order = vec![start];
        let mut prev = None;
        let mut cur = start;
        loop {
            let next = self.neighbors(cur).into_iter().map(|(w, _)| w).find(|&w| Some(w) != prev);
            match next {
                Some(w) => {
                    prev = Some(cur);
                    cur = w;
                    order.push(w);
                }
                None => break,
            }
        }
        Some(order)
    }

    /// The subgraph on the given ids.
    pub fn induced(&self, ids: &[u32]) -> DualGraph {
        let keep: BTreeSet<u32> = ids.iter().copied().collect();
        DualGraph {
            vertices: self.vertices.iter().filter(|v| keep.contains(&v.id)).cloned().collect(),
            edges: self
                .edges
                .iter()
                .filter(|(&(a, b), _)| keep.contains(&a) && keep.contains(&b))
                .map(|(&k, &m)| (k, m))
                .collect(),
        }
    }
}

/// Symmetric sparse matrix solved by diagonal-pivot elimination in
/// minimum-degree order. For trees this produces no fill-in.
#[derive(Debug, Clone)]
pub struct SymSparse {
    rows: Vec<BTreeMap<usize, Q>>,
}

impl SymSparse {
    pub fn new(n: usize) -> Self {
        Self { rows: vec![BTreeMap::new(); n] }
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        if v == 0 {
            self.rows[i].remove(&j);
            self.rows[j].remove(&i);
            return;
        }
        self.rows[i].insert(j, qi(v));
        self.rows[j].insert(i, qi(v));
    }

    /// Solves `A x = rhs` when `A` is negative definite; `None` otherwise.
    pub fn solve_negative_definite(&self, rhs: &[Q]) -> Option<Vec<Q>> {
        let n = self.rows.len();
        let mut rows = self.rows.clone();
        let mut rhs = rhs.to_vec();
        let mut alive: BTreeSet<usize> = (0..n).collect();
        let mut order = Vec::with_capacity(n);
        let mut eliminated: Vec<BTreeMap<usize, Q>> = vec![BTreeMap::new(); n];
        while let Some(&v) = alive.iter().min_by_key(|&&v| (rows[v].len(), v)) {
            alive.remove(&v);
            let pivot = rows[v].get(&v).cloned().unwrap_or_else(Q::zero);
            if !pivot.is_negative() {
                return None;
            }
            let nbrs: Vec<(usize, Q)> = rows[v].iter().filter(|(&k, _)| k != v).map(|(&k, x)| (k, x.clone())).collect();
            for (i, ai) in &nbrs {
                let f = ai / &pivot;
                let t = &f * &rhs[v];
                rhs[*i] -= t;
                for (j, aj) in &nbrs {
                    let t = &f * aj;
                    let e = rows[*i].entry(*j).or_insert_with(Q::zero);
                    *e -= t;
                    if e.is_zero() {
                        rows[*i].remove(j);
                    }
                }
                rows[*i].remove(&v);
            }
            eliminated[v] = rows[v].clone();
            order.push(v);
        }
        let mut x = vec![Q::zero(); n];
        for &v in order.iter().rev() {
            let row = &eliminated[v];
            let mut acc = rhs[v].clone();
            for (&j, a) in row {
                if j != v {
                    acc -= a * &x[j];
                }
            }
            x[v] = acc / &row[&v];
        }
        Some(x)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJsonVertex {
    id: u32,
    w: i64,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<GraphJsonVertex>,
    edges: Vec<[u32; 3]>,
}

impl Serialize for DualGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GraphJson {
            vertices: self.vertices.iter().map(|v| GraphJsonVertex { id: v.id, w: -v.self_intersection }).collect(),
            edges: self.edges.iter().map(|(&(a, b), &m)| [a, b, m]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DualGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = GraphJson::deserialize(d)?;
        let mut g = DualGraph::new();
        for v in j.vertices {
            g.add_vertex(v.id, -v.w).map_err(serde::de::Error::custom)?;
        }
        for [a, b, m] in j.edges {
            g.add_edge(a, b, m).map_err(serde::de::Error::custom)?;
        }
        Ok(g)
    }
}
