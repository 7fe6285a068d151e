//! Smooth global models: a boundary curve plus exceptional curves, with exact
//! blow-up, blow-down, terminalization and contraction.
//!
//! Each curve stores `K·C` explicitly. Blow-downs can create tangencies, after
//! which the image curve is no longer smooth rational and `K·C = -C^2 - 2`
//! fails, so the adjunction value is tracked instead of recomputed.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::dualgraph::{DualGraph, SymSparse};
use crate::exact::{fmt_q, qi, to_i64, Q};
use crate::germs::{BoundaryGermRecord, CyclicLabel, GermRecord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("S_Y^2 = {0} is not an integer")]
    NonIntegral(String),
    #[error("coefficient {0} of curve {1} is not below 1")]
    NotKlt(String, usize),
    #[error("unknown curve {0}")]
    UnknownCurve(usize),
    #[error("curves {0} and {1} do not meet")]
    NoIntersection(usize, usize),
    #[error("curve {0} is not a contractible (-1)-curve")]
    NotContractible(usize),
    #[error("contracted locus is not negative definite")]
    NotNegativeDefinite,
    #[error("b must lie in (0,1)")]
    BadB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    StrictTransformOfS,
    Exceptional,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Curve {
    pub id: usize,
    pub self_intersection: i64,
    pub k_dot: i64,
    pub coeff: Q,
    pub role: Role,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Point {
    OnCurve(usize),
    Intersection(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceModel {
    curves: BTreeMap<usize, Curve>,
    edges: BTreeMap<(usize, usize), i64>,
    pub picard_rank: i64,
    pub k_squared: i64,
    next_id: usize,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl SurfaceModel {
    pub fn new(picard_rank: i64, k_squared: i64) -> Self {
        Self { curves: BTreeMap::new(), edges: BTreeMap::new(), picard_rank, k_squared, next_id: 0 }
    }

    /// Adds a smooth rational curve.
    pub fn add_curve(&mut self, self_intersection: i64, coeff: Q, role: Role) -> usize {
        self.add_curve_with_k(self_intersection, -self_intersection - 2, coeff, role)
    }

    pub fn add_curve_with_k(&mut self, self_intersection: i64, k_dot: i64, coeff: Q, role: Role) -> usize {
        let id = self.next_id;
        self.next_id += 1;
        self.curves.insert(id, Curve { id, self_intersection, k_dot, coeff, role });
        id
    }

    pub fn add_intersection(&mut self, a: usize, b: usize, mult: i64) {
        assert!(a != b && self.curves.contains_key(&a) && self.curves.contains_key(&b));
        let e = self.edges.entry(key(a, b)).or_insert(0);
        *e += mult;
        if *e == 0 {
            self.edges.remove(&key(a, b));
        }
    }

    pub fn curve(&self, id: usize) -> Option<&Curve> {
        self.curves.get(&id)
    }

    pub fn curves(&self) -> impl Iterator<Item = &Curve> {
        self.curves.values()
    }

    pub fn ids(&self) -> Vec<usize> {
        self.curves.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn dot(&self, a: usize, b: usize) -> i64 {
        if a == b {
            return self.curves.get(&a).map_or(0, |c| c.self_intersection);
        }
        self.edges.get(&key(a, b)).copied().unwrap_or(0)
    }

    pub fn neighbors(&self, a: usize) -> Vec<(usize, i64)> {
        self.edges
            .iter()
            .filter_map(|(&(x, y), &m)| match (x == a, y == a) {
                (true, _) => Some((y, m)),
                (_, true) => Some((x, m)),
                _ => None,
            })
            .collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.edges.iter().map(|(&(a, b), &m)| (a, b, m))
    }

    pub fn s_curve(&self) -> Option<usize> {
        self.curves.values().find(|c| c.role == Role::StrictTransformOfS).map(|c| c.id)
    }

    /// `(K + sum coeff C)·C_j`.
    pub fn crepancy_defect(&self, j: usize) -> Q {
        let c = &self.curves[&j];
        let mut acc = qi(c.k_dot) + &c.coeff * qi(c.self_intersection);
        for (d, m) in self.neighbors(j) {
            acc += &self.curves[&d].coeff * qi(m);
        }
        acc
    }

    pub fn is_crepant(&self) -> bool {
        self.curves.keys().all(|&j| self.crepancy_defect(j).is_zero())
    }

    pub fn blow_up(&self, point: Point) -> Result<(SurfaceModel, usize), ModelError> {
        let mut m = self.clone();
        let e = m.blow_up_mut(point)?;
        Ok((m, e))
    }

    /// New curve with log discrepancy `a_c + a_d` (intersection) or `a_c + 1` (free point on `c`).
    fn blow_up_mut(&mut self, point: Point) -> Result<usize, ModelError> {
        let (touched, coeff) = match point {
            Point::OnCurve(c) => {
                let cc = self.curves.get(&c).ok_or(ModelError::UnknownCurve(c))?;
                (vec![c], &cc.coeff - Q::one())
            }
            Point::Intersection(c, d) => {
                let (cc, dc) = match (self.curves.get(&c), self.curves.get(&d)) {
                    (Some(x), Some(y)) => (x, y),
                    (None, _) => return Err(ModelError::UnknownCurve(c)),
                    _ => return Err(ModelError::UnknownCurve(d)),
                };
                if c == d || self.dot(c, d) < 1 {
                    return Err(ModelError::NoIntersection(c, d));
                }
                (vec![c, d], &cc.coeff + &dc.coeff - Q::one())
            }
        };
        let e = self.add_curve_with_k(-1, -1, coeff, Role::Exceptional);
        if let Point::Intersection(c, d) = point {
            self.add_intersection(c, d, -1);
        }
        for x in touched {
            let cx = self.curves.get_mut(&x).expect("checked");
            cx.self_intersection -= 1;
            cx.k_dot += 1;
            self.add_intersection(x, e, 1);
        }
        self.picard_rank += 1;
        self.k_squared -= 1;
        Ok(e)
    }

    pub fn blow_down(&self, e: usize) -> Result<SurfaceModel, ModelError> {
        let mut m = self.clone();
        m.blow_down_mut(e)?;
        Ok(m)
    }

    fn blow_down_mut(&mut self, e: usize) -> Result<(), ModelError> {
        let c = self.curves.get(&e).ok_or(ModelError::UnknownCurve(e))?;
        if c.self_intersection != -1 || c.k_dot != -1 || c.role == Role::StrictTransformOfS {
            return Err(ModelError::NotContractible(e));
        }
        let nb = self.neighbors(e);
        for &(x, m) in &nb {
            let cx = self.curves.get_mut(&x).expect("neighbor exists");
            cx.self_intersection += m * m;
            cx.k_dot -= m;
        }
        for i in 0..nb.len() {
            for j in i + 1..nb.len() {
                let ((x, mx), (y, my)) = (nb[i], nb[j]);
                self.add_intersection(x, y, mx * my);
            }
        }
        for &(x, _) in &nb {
            self.edges.remove(&key(x, e));
        }
        self.curves.remove(&e);
        self.picard_rank -= 1;
        self.k_squared += 1;
        Ok(())
    }

    /// Blows up every intersection whose new divisor would have log discrepancy at most 1.
    pub fn terminalize(&self) -> Result<SurfaceModel, ModelError> {
        for c in self.curves.values() {
            if c.coeff >= Q::one() {
                return Err(ModelError::NotKlt(fmt_q(&c.coeff), c.id));
            }
        }
        let mut m = self.clone();
        loop {
            let next = m.edges.iter().find_map(|(&(a, b), &mult)| {
                let s = &m.curves[&a].coeff + &m.curves[&b].coeff - Q::one();
                (mult > 0 && !s.is_negative()).then_some((a, b))
            });
            match next {
                Some((a, b)) => {
                    m.blow_up_mut(Point::Intersection(a, b))?;
                }
                None => return Ok(m),
            }
        }
    }

    /// Repeatedly contracts the first (-1)-curve of `sigma` by id order.
    /// Returns the new model and the surviving part of `sigma`.
    pub fn minimal_resolution(&self, sigma: &[usize]) -> (SurfaceModel, Vec<usize>) {
        let mut m = self.clone();
        let mut left: BTreeSet<usize> = sigma.iter().copied().collect();
        while let Some(e) = left.iter().copied().find(|&x| {
            let c = &m.curves[&x];
            c.self_intersection == -1 && c.k_dot == -1 && c.role != Role::StrictTransformOfS
        }) {
            m.blow_down_mut(e).expect("checked contractible");
            left.remove(&e);
        }
        (m, left.into_iter().collect())
    }

    /// Connected components of the subgraph on `ids`.
    pub fn components(&self, ids: &[usize]) -> Vec<Vec<usize>> {
        let set: BTreeSet<usize> = ids.iter().copied().collect();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &s in &set {
            if !seen.insert(s) {
                continue;
            }
            let mut comp = vec![s];
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for (w, _) in self.neighbors(v) {
                    if set.contains(&w) && seen.insert(w) {
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort();
            out.push(comp);
        }
        out
    }

    /// Dual graph of a curve subset (ids truncated to u32).
    pub fn dual_graph(&self, ids: &[usize]) -> DualGraph {
        let mut g = DualGraph::new();
        for &i in ids {
            g.add_vertex(i as u32, self.curves[&i].self_intersection).expect("unique ids");
        }
        for (&(a, b), &m) in &self.edges {
            if ids.contains(&a) && ids.contains(&b) && m > 0 {
                g.add_edge(a as u32, b as u32, m as u32).expect("valid edge");
            }
        }
        g
    }

    /// Solves `sum_F x_F (F·F') = rhs(F')` over `sigma`.
    fn solve_over(&self, sigma: &[usize], rhs: impl Fn(usize) -> Q) -> Result<BTreeMap<usize, Q>, ModelError> {
        let index: BTreeMap<usize, usize> = sigma.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut sys = SymSparse::new(sigma.len());
        for (i, &c) in sigma.iter().enumerate() {
            sys.set(i, i, self.curves[&c].self_intersection);
            for (d, m) in self.neighbors(c) {
                if let Some(&j) = index.get(&d) {
                    sys.set(i, j, m);
                }
            }
        }
        let v: Vec<Q> = sigma.iter().map(|&c| rhs(c)).collect();
        let x = sys.solve_negative_definite(&v).ok_or(ModelError::NotNegativeDefinite)?;
        Ok(sigma.iter().copied().zip(x).collect())
    }

    /// Coefficients `d_F` with `(K + sum d_F F)·F' = 0` on `sigma`.
    pub fn contraction_discrepancies(&self, sigma: &[usize]) -> Result<BTreeMap<usize, Q>, ModelError> {
        self.solve_over(sigma, |c| qi(-self.curves[&c].k_dot))
    }

    /// `C_X^2` after contracting `sigma`.
    pub fn pushed_self_intersection(&self, sigma: &[usize], c: usize) -> Result<Q, ModelError> {
        let e = self.solve_over(sigma, |f| qi(-self.dot(c, f)))?;
        let mut s = qi(self.dot(c, c));
        for (f, x) in &e {
            s += x * qi(self.dot(*f, c));
        }
        Ok(s)
    }

    pub fn contract(&self, sigma: &[usize]) -> Result<ContractionResult, ModelError> {
        contract(self, sigma, true)
    }
}

#[derive(Debug, Clone)]
pub struct ContractionResult {
    pub contracted_discrepancies: BTreeMap<usize, Q>,
    pub mld_at_center: Q,
    pub center: Vec<usize>,
    pub k_squared: Q,
    pub picard_rank: i64,
    pub kept_k_intersections: BTreeMap<usize, Q>,
    pub pushed_self_intersections: BTreeMap<usize, Q>,
    pub minimal_resolution: SurfaceModel,
    pub min_res_components: Vec<Vec<usize>>,
    pub minimal_resolution_germ: Option<GermRecord>,
    pub worst_sing_label: Option<CyclicLabel>,
}

impl ContractionResult {
    /// `rho(Xbar/X) + K_Xbar^2 - K_X^2`.
    pub fn gamma_identity_rhs(&self) -> Q {
        let n: usize = self.min_res_components.iter().map(Vec::len).sum();
        qi(n as i64) + qi(self.minimal_resolution.k_squared) - &self.k_squared
    }
}

/// Contraction with optional pushed self-intersections (they cost one solve per kept curve).
pub fn contract(model: &SurfaceModel, sigma: &[usize], with_pushed: bool) -> Result<ContractionResult, ModelError> {
    let mut sigma: Vec<usize> = sigma.to_vec();
    sigma.sort();
    sigma.dedup();
    for &c in &sigma {
        model.curves.get(&c).ok_or(ModelError::UnknownCurve(c))?;
    }
    let d = model.contraction_discrepancies(&sigma)?;
    let mut k2 = qi(model.k_squared);
    for (f, x) in &d {
        k2 += x * qi(model.curves[f].k_dot);
    }
    let in_sigma: BTreeSet<usize> = sigma.iter().copied().collect();
    let mut kept_k = BTreeMap::new();
    let mut pushed = BTreeMap::new();
    for &c in model.curves.keys().filter(|c| !in_sigma.contains(c)) {
        let mut v = qi(model.curves[&c].k_dot);
        let mut meets = false;
        for (f, m) in model.neighbors(c) {
            if let Some(x) = d.get(&f) {
                v += x * qi(m);
                meets = true;
            }
        }
        kept_k.insert(c, v);
        if with_pushed {
            let s = if meets { model.pushed_self_intersection(&sigma, c)? } else { qi(model.dot(c, c)) };
            pushed.insert(c, s);
        }
    }
    let (mr, left) = model.minimal_resolution(&sigma);
    let comps = mr.components(&left);
    let s_id = model.s_curve().filter(|s| in_sigma.contains(s));
    let center = match s_id {
        Some(s) => comps.iter().find(|c| c.contains(&s)).cloned().unwrap_or_default(),
        None => comps
            .iter()
            .min_by_key(|c| c.iter().map(|f| Q::one() - &d[f]).min())
            .cloned()
            .unwrap_or_default(),
    };
    let mld = center.iter().map(|f| Q::one() - &d[f]).min().unwrap_or_else(|| qi(2));
    let germ = (!center.is_empty()).then(|| GermRecord::from_graph(mr.dual_graph(&center)).ok()).flatten();
    let label = germ.as_ref().and_then(|g| g.canonical_label());
    Ok(ContractionResult {
        contracted_discrepancies: d,
        mld_at_center: mld,
        center,
        k_squared: k2,
        picard_rank: model.picard_rank - sigma.len() as i64,
        kept_k_intersections: kept_k,
        pushed_self_intersections: pushed,
        minimal_resolution: mr,
        min_res_components: comps,
        minimal_resolution_germ: germ,
        worst_sing_label: label,
    })
}

/// A model assembled from boundary germs on `S` and an optional germ off `S`.
#[derive(Debug, Clone)]
pub struct AssembledModel {
    pub model: SurfaceModel,
    pub s: usize,
    pub chains: Vec<Vec<usize>>,
    pub off_s: Vec<usize>,
    pub s_y_squared: i64,
}

/// `theta = -2 + sum (1 - 1/p_i)` over germs on `S`.
pub fn theta(orders: &[i64]) -> Q {
    orders.iter().fold(qi(-2), |acc, &p| acc + Q::one() - Q::new(1.into(), p.into()))
}

/// `S_Y^2 = theta/(1-b) - sum q_i/p_i`.
pub fn s_y_squared(b: &Q, germs: &[BoundaryGermRecord]) -> Q {
    let orders: Vec<i64> = germs.iter().map(|g| g.order()).collect();
    let mut s = theta(&orders) / (Q::one() - b);
    for g in germs {
        s -= Q::new(g.q_inv.into(), g.order().into());
    }
    s
}

pub fn assemble_model(
    b: &Q,
    germs: &[BoundaryGermRecord],
    off_s: Option<&GermRecord>,
) -> Result<AssembledModel, ModelError> {
    if !b.is_positive() || *b >= Q::one() {
        return Err(ModelError::BadB);
    }
    let sy = s_y_squared(b, germs);
    let sy = to_i64(&sy).ok_or_else(|| ModelError::NonIntegral(fmt_q(&sy)))?;
    let mut m = SurfaceModel::new(0, 0);
    let s = m.add_curve(sy, b.clone(), Role::StrictTransformOfS);
    let mut chains = Vec::new();
    for g in germs {
        let coeffs = g.coefficients_at(b);
        let mut ids = Vec::new();
        for (w, c) in g.germ.weights().into_iter().zip(coeffs) {
            if c >= Q::one() {
                return Err(ModelError::NotKlt(fmt_q(&c), m.next_id));
            }
            let id = m.add_curve(-w, c, Role::Exceptional);
            if let Some(&prev) = ids.last() {
                m.add_intersection(prev, id, 1);
            }
            ids.push(id);
        }
        m.add_intersection(s, ids[0], 1);
        chains.push(ids);
    }
    let mut off = Vec::new();
    if let Some(g) = off_s {
        let mut map = BTreeMap::new();
        for (v, ld) in g.graph.vertices().iter().zip(&g.log_discrepancies) {
            let id = m.add_curve(v.self_intersection, Q::one() - ld, Role::Exceptional);
            map.insert(v.id, id);
            off.push(id);
        }
        for (a, bb, mult) in g.graph.edges() {
            m.add_intersection(map[&a], map[&bb], mult as i64);
        }
    }
    m.picard_rank = m.len() as i64;
    m.k_squared = 10 - m.picard_rank;
    Ok(AssembledModel { model: m, s, chains, off_s: off, s_y_squared: sy })
}

#[derive(Serialize)]
struct CurveJson {
    id: usize,
    w: i64,
    k_dot: i64,
    coeff: String,
    role: Role,
}

#[derive(Serialize)]
struct ModelJson {
    picard_rank: i64,
    #[serde(rename = "K2")]
    k2: String,
    vertices: Vec<CurveJson>,
    edges: Vec<[i64; 3]>,
}

impl SurfaceModel {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ModelJson {
            picard_rank: self.picard_rank,
            k2: self.k_squared.to_string(),
            vertices: self
                .curves
                .values()
                .map(|c| CurveJson {
                    id: c.id,
                    w: -c.self_intersection,
                    k_dot: c.k_dot,
                    coeff: fmt_q(&c.coeff),
                    role: c.role,
                })
                .collect(),
            edges: self.edges.iter().map(|(&(a, b), &m)| [a as i64, b as i64, m]).collect(),
        })
        .expect("serializable")
    }
}
