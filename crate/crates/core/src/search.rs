//! Enumerations over boundary germs: the on-curve germ table, off-curve germ
//! catalogs, the three- and four-point global searches, mechanical refutations
//! and adjunction minima.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::birational::{assemble_model, s_y_squared, AssembledModel, ModelError, Role, SurfaceModel};
use crate::dualgraph::DualGraph;
use crate::exact::{fmt_q, q, qi, solve_quadratic, to_i64, Q};
use crate::germs::{boundary_record, hj_expand, BoundaryGermRecord, CyclicLabel, GermKind, GermRecord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("b_min = {0} must exceed 6/7 for a bounded search")]
    Unbounded(String),
    #[error("bound must be positive")]
    NonPositiveBound,
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn b_threshold() -> Q {
    q(10, 11)
}

pub fn x4_gamma_bound() -> Q {
    q(887, 77)
}

pub const X4_MAX_ORDER: i64 = 42;

/// Runs `f` on a dedicated pool with `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}

/// Cyclic boundary germs with `sup_b > b_min` and order at most `7b/(7b-6)`.
pub fn table_sing(b_min: &Q) -> Result<Vec<BoundaryGermRecord>, SearchError> {
    let seven = qi(7);
    if *b_min <= q(6, 7) {
        return Err(SearchError::Unbounded(fmt_q(b_min)));
    }
    let cap = (&seven * b_min) / (&seven * b_min - qi(6));
    let max_m = to_i64(&cap.floor()).expect("small order bound");
    let mut out = Vec::new();
    for m in 2..=max_m {
        for k in 1..m {
            if m.gcd(&k) != 1 {
                continue;
            }
            let rec = boundary_record(CyclicLabel::new(m, k).expect("coprime"));
            if rec.sup_b > *b_min {
                out.push(rec);
            }
        }
    }
    out.sort_by_key(|a| (a.order(), a.germ.weights()));
    Ok(out)
}

fn x4_admissible(g: &GermRecord) -> bool {
    g.order <= X4_MAX_ORDER && g.gamma < x4_gamma_bound() && g.mld > q(1, 7)
}

/// D-type forks: two arms of one (-2)-curve, a third arm given as a chain read
/// outward from the centre.
pub fn d_type_fork(center: i64, third_arm: &[i64]) -> DualGraph {
    let mut g = DualGraph::new();
    g.add_vertex(0, -center).expect("fresh");
    g.add_vertex(1, -2).expect("fresh");
    g.add_vertex(2, -2).expect("fresh");
    g.add_edge(0, 1, 1).expect("valid");
    g.add_edge(0, 2, 1).expect("valid");
    let mut prev = 0;
    for (i, &w) in third_arm.iter().enumerate() {
        let id = 3 + i as u32;
        g.add_vertex(id, -w).expect("fresh");
        g.add_edge(prev, id, 1).expect("valid");
        prev = id;
    }
    g
}

/// Every D-type fork germ of order at most `max_order`.
pub fn d_type_forks(max_order: i64) -> Vec<GermRecord> {
    let mut out = Vec::new();
    for n in 2..=max_order {
        for k in 1..n {
            if n.gcd(&k) != 1 {
                continue;
            }
            let arm = hj_expand(CyclicLabel::new(n, k).expect("coprime"));
            for c in 2.. {
                let g = d_type_fork(c, &arm);
                if !g.is_negative_definite() {
                    continue;
                }
                let Ok(rec) = GermRecord::from_graph(g) else { continue };
                if rec.order > max_order {
                    break;
                }
                out.push(rec);
            }
        }
    }
    out
}

/// Du Val E-type fork with arms (2), (2,2) and `long` (-2)-curves.
fn e_type(long: usize) -> GermRecord {
    let mut h = DualGraph::new();
    h.add_vertex(0, -2).expect("fresh");
    let mut next = 1u32;
    for len in [1usize, 2, long] {
        let mut prev = 0;
        for _ in 0..len {
            h.add_vertex(next, -2).expect("fresh");
            h.add_edge(prev, next, 1).expect("valid");
            prev = next;
            next += 1;
        }
    }
    GermRecord::from_graph(h).expect("Du Val")
}

/// Du Val germs of order at most `max_order` with `gamma < gamma_bound`.
pub fn du_val_catalog(max_order: i64, gamma_bound: &Q) -> Vec<GermRecord> {
    let mut out: Vec<GermRecord> = (1..max_order)
        .map(|n| GermRecord::from_graph(DualGraph::chain(&vec![2; n as usize])).expect("A_n"))
        .collect();
    out.extend(d_type_forks(max_order).into_iter().filter(GermRecord::is_du_val));
    out.extend([2, 3, 4].into_iter().map(e_type));
    out.retain(|g| g.order <= max_order && g.gamma < *gamma_bound);
    sort_germs(&mut out);
    out
}

fn germ_key(g: &GermRecord) -> (GermKind, i64, Vec<i64>) {
    (g.kind, g.order, g.weights())
}

fn sort_germs(v: &mut [GermRecord]) {
    v.sort_by_key(|g| match g.kind {
        GermKind::Cyclic => (0, g.order, g.canonical_label().map(|l| l.q).unwrap_or(0), g.weights()),
        GermKind::Fork => (1, g.order, 0, g.weights()),
    });
}

/// Non-Du-Val klt germs with order at most 42, `gamma < 887/77` and
/// log discrepancies above 1/7. Cyclic germs use canonical labels.
pub fn x4_catalog() -> Vec<GermRecord> {
    let mut out = Vec::new();
    for m in 2..=X4_MAX_ORDER {
        for k in 1..m {
            let Ok(l) = CyclicLabel::new(m, k) else { continue };
            if l.canonical() != l {
                continue;
            }
            let g = GermRecord::cyclic(l);
            if !g.is_du_val() && x4_admissible(&g) {
                out.push(g);
            }
        }
    }
    out.extend(d_type_forks(X4_MAX_ORDER).into_iter().filter(|g| !g.is_du_val() && x4_admissible(g)));
    sort_germs(&mut out);
    out
}

/// Germs allowed off the boundary curve: the catalog plus Du Val germs.
pub fn off_s_candidates() -> Vec<GermRecord> {
    let mut v = x4_catalog();
    v.extend(du_val_catalog(X4_MAX_ORDER, &x4_gamma_bound()));
    sort_germs(&mut v);
    v.dedup_by(|a, b| germ_key(a) == germ_key(b));
    v
}

/// Roots in `(0,1)` of `theta b^2 + (9-gamma) b - (9-gamma) = 0`.
pub fn solve_b(gamma_total: &Q, theta: &Q) -> Vec<Q> {
    let c = qi(9) - gamma_total;
    solve_quadratic(theta, &c, &-&c)
        .into_iter()
        .filter(|b| b.is_positive() && *b < Q::one())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fourth {
    OnS(BoundaryGermRecord),
    OffS(GermRecord),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateTuple {
    pub on_s: Vec<BoundaryGermRecord>,
    pub fourth: Option<Fourth>,
    pub b: Q,
    pub gamma_total: Q,
    pub theta: Q,
    pub s_y_sq: i64,
}

/// Short display of an off-curve germ: cyclic label or `<c;arm|arm|arm>` for forks.
pub fn germ_name(g: &GermRecord) -> String {
    match g.canonical_label() {
        Some(l) => l.to_string(),
        None => {
            let shape = g.graph.shape();
            let c = shape.forks[0];
            let mut arms = crate::germs::fork_arms(&g.graph, c);
            arms.sort_by_key(|a| (a.len(), a.clone()));
            let arms: Vec<String> = arms.iter().map(|a| weights_str(a)).collect();
            format!("<{};{}>", -g.graph.intersection(c, c), arms.join("|"))
        }
    }
}

pub fn weights_str(w: &[i64]) -> String {
    let parts: Vec<String> = w.iter().map(i64::to_string).collect();
    format!("({})", parts.join(","))
}

impl CandidateTuple {
    /// Germs on the boundary curve, in order.
    pub fn boundary_germs(&self) -> Vec<BoundaryGermRecord> {
        let mut v = self.on_s.clone();
        if let Some(Fourth::OnS(g)) = &self.fourth {
            v.push(g.clone());
        }
        v
    }

    pub fn off_s(&self) -> Option<&GermRecord> {
        match &self.fourth {
            Some(Fourth::OffS(g)) => Some(g),
            _ => None,
        }
    }

    pub fn p_vec(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.on_s.iter().map(BoundaryGermRecord::order).collect();
        match &self.fourth {
            Some(Fourth::OnS(g)) => v.push(g.order()),
            Some(Fourth::OffS(g)) => v.push(g.order),
            None => {}
        }
        v
    }

    pub fn q_vec(&self) -> Vec<i64> {
        self.boundary_germs().iter().map(|g| g.q_inv).collect()
    }

    pub fn gamma_vec(&self) -> Vec<Q> {
        let mut v: Vec<Q> = self.on_s.iter().map(|g| g.germ.gamma.clone()).collect();
        match &self.fourth {
            Some(Fourth::OnS(g)) => v.push(g.germ.gamma.clone()),
            Some(Fourth::OffS(g)) => v.push(g.gamma.clone()),
            None => {}
        }
        v
    }

    pub fn labels(&self) -> Vec<CyclicLabel> {
        self.boundary_germs().iter().map(BoundaryGermRecord::label).collect()
    }

    pub fn assemble(&self) -> Result<AssembledModel, ModelError> {
        assemble_model(&self.b, &self.boundary_germs(), self.off_s())
    }

    fn sort_key(&self) -> (Vec<i64>, Vec<i64>, Vec<CyclicLabel>, String, Q) {
        let x4 = self.off_s().map(germ_name).unwrap_or_default();
        (self.p_vec(), self.q_vec(), self.labels(), x4, self.b.clone())
    }
}

fn sum_inv(ps: &[i64]) -> Q {
    ps.iter().fold(Q::zero(), |acc, &p| acc + q(1, p))
}

fn candidates_for(
    on_s: Vec<&BoundaryGermRecord>,
    fourth: Option<Fourth>,
    theta: Q,
    lower: &Q,
) -> Vec<CandidateTuple> {
    let boundary: Vec<BoundaryGermRecord> = on_s
        .iter()
        .map(|g| (*g).clone())
        .chain(match &fourth {
            Some(Fourth::OnS(g)) => Some(g.clone()),
            _ => None,
        })
        .collect();
    let mut gamma: Q = boundary.iter().map(|g| g.germ.gamma.clone()).sum();
    if let Some(Fourth::OffS(g)) = &fourth {
        gamma += &g.gamma;
    }
    let mut out = Vec::new();
    for b in solve_b(&gamma, &theta) {
        if b <= *lower || boundary.iter().any(|g| b >= g.sup_b) {
            continue;
        }
        let sy = s_y_squared(&b, &boundary);
        let Some(sy) = to_i64(&sy) else { continue };
        out.push(CandidateTuple {
            on_s: on_s.iter().map(|g| (*g).clone()).collect(),
            fourth: fourth.clone(),
            b,
            gamma_total: gamma.clone(),
            theta: theta.clone(),
            s_y_sq: sy,
        });
    }
    out
}

fn finish(mut v: Vec<CandidateTuple>) -> Vec<CandidateTuple> {
    v.sort_by_cached_key(CandidateTuple::sort_key);
    v
}

/// Three germs on the boundary curve with `b > 10/11`.
pub fn search_triples() -> Vec<CandidateTuple> {
    search_triples_window(&b_threshold())
}

/// Three-point search over the on-curve table with `b > lower`.
pub fn search_triples_window(lower: &Q) -> Vec<CandidateTuple> {
    let sing = table_sing(&b_threshold()).expect("bounded");
    let n = sing.len();
    let found: Vec<CandidateTuple> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let sing = &sing;
            let mut out = Vec::new();
            for j in i..n {
                for k in j..n {
                    let tri = [&sing[i], &sing[j], &sing[k]];
                    let s3 = sum_inv(&tri.map(|g| g.order()));
                    if s3 >= Q::one() {
                        continue;
                    }
                    out.extend(candidates_for(tri.to_vec(), None, Q::one() - s3, lower));
                }
            }
            out
        })
        .collect();
    finish(found)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadMode {
    OnS,
    OffS,
}

/// Which index window to apply to the four-on-curve search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EulerWindow {
    /// `1 <= sum_{i<=4} 1/p_i < 2`.
    #[default]
    FourTerms,
    /// `1 <= sum_{i<=3} 1/p_i < 2`, as printed in the four-point lemma.
    ThreeTerms,
}

pub fn search_quadruples(mode: QuadMode, window: EulerWindow) -> Vec<CandidateTuple> {
    let sing = table_sing(&b_threshold()).expect("bounded");
    let n = sing.len();
    let lower = b_threshold();
    let found: Vec<CandidateTuple> = match mode {
        QuadMode::OnS => (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let (sing, lower) = (&sing, &lower);
                let mut out = Vec::new();
                for j in i..n {
                    for k in j..n {
                        for l in k..n {
                            let ps = [i, j, k, l].map(|x| sing[x].order());
                            let s4 = sum_inv(&ps);
                            let window = match window {
                                EulerWindow::FourTerms => s4.clone(),
                                EulerWindow::ThreeTerms => sum_inv(&ps[..3]),
                            };
                            if window < Q::one() || window >= qi(2) {
                                continue;
                            }
                            let on = vec![&sing[i], &sing[j], &sing[k]];
                            let f = Some(Fourth::OnS(sing[l].clone()));
                            out.extend(candidates_for(on, f, qi(2) - s4, lower));
                        }
                    }
                }
                out
            })
            .collect(),
        QuadMode::OffS => {
            let x4 = off_s_candidates();
            (0..n)
                .into_par_iter()
                .flat_map_iter(|i| {
                    let (sing, lower, x4) = (&sing, &lower, &x4);
                    let mut out = Vec::new();
                    for j in i..n {
                        for k in j..n {
                            let tri = [&sing[i], &sing[j], &sing[k]];
                            let s3 = sum_inv(&tri.map(|g| g.order()));
                            if s3 >= Q::one() {
                                continue;
                            }
                            for g in x4 {
                                if &s3 + q(1, g.order) < Q::one() {
                                    continue;
                                }
                                let f = Some(Fourth::OffS(g.clone()));
                                out.extend(candidates_for(tri.to_vec(), f, Q::one() - &s3, lower));
                            }
                        }
                    }
                    out
                })
                .collect()
        }
    };
    finish(found)
}

/// Nonnegative integer vectors `c` with `sum c_k coeff_k` in `targets`, sorted.
pub fn unit_combinations(coefficients: &[Q], targets: &[Q]) -> Vec<Vec<u32>> {
    assert!(coefficients.iter().all(Signed::is_positive), "coefficients must be positive");
    if targets.is_empty() {
        return Vec::new();
    }
    let l = coefficients
        .iter()
        .chain(targets)
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scale = |x: &Q| -> i64 { to_i64(&(x * Q::from_integer(l.clone()))).expect("scaled integer fits") };
    let a: Vec<i64> = coefficients.iter().map(scale).collect();
    let t: Vec<i64> = targets.iter().map(scale).collect();
    let max = *t.iter().max().expect("non-empty");
    let mut out = Vec::new();
    let mut cur = vec![0u32; a.len()];
    fn rec(k: usize, sum: i64, a: &[i64], t: &[i64], max: i64, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == a.len() {
            if t.contains(&sum) {
                out.push(cur.clone());
            }
            return;
        }
        let mut s = sum;
        let mut c = 0;
        while s <= max {
            cur[k] = c;
            rec(k + 1, s, a, t, max, cur, out);
            s += a[k];
            c += 1;
        }
        cur[k] = 0;
    }
    rec(0, 0, &a, &t, max, &mut cur, &mut out);
    out.sort();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    NoetherCoefficient,
    TwoRayN,
    MinusOneCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Eliminates,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: CheckName,
    pub verdict: Verdict,
    pub witness: String,
}

#[derive(Debug, Clone)]
pub struct RefutationReport {
    pub candidate: CandidateTuple,
    pub checks: Vec<Check>,
}

impl RefutationReport {
    pub fn check(&self, name: CheckName) -> &Check {
        self.checks.iter().find(|c| c.name == name).expect("all checks run")
    }

    /// The noether check alone, or both alternatives of the two-ray lemma.
    pub fn eliminated(&self) -> bool {
        let e = |n| self.check(n).verdict == Verdict::Eliminates;
        e(CheckName::NoetherCoefficient) || (e(CheckName::TwoRayN) && e(CheckName::MinusOneCurve))
    }
}

struct Boundary {
    ids: Vec<usize>,
    coeffs: Vec<Q>,
}

fn boundary_of(a: &AssembledModel) -> Boundary {
    let m = &a.model;
    let mut ids = vec![a.s];
    ids.extend(m.ids().into_iter().filter(|&i| i != a.s && m.curve(i).expect("id").coeff.is_positive()));
    let coeffs = ids.iter().map(|&i| m.curve(i).expect("id").coeff.clone()).collect();
    Boundary { ids, coeffs }
}

fn dot_sum(c: &[u32], coeffs: &[Q]) -> Q {
    c.iter().zip(coeffs).map(|(&n, x)| x * qi(n as i64)).sum()
}

fn vec_str(c: &[u32]) -> String {
    let parts: Vec<String> = c.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

fn noether_check(a: &AssembledModel, bd: &Boundary) -> Check {
    let name = CheckName::NoetherCoefficient;
    let sols: Vec<Vec<u32>> = unit_combinations(&bd.coeffs, &[qi(2), qi(3)])
        .into_iter()
        .filter(|c| c[0] >= 1)
        .collect();
    if let Some(c) = sols.iter().find(|c| dot_sum(c, &bd.coeffs) == qi(2)) {
        return Check { name, verdict: Verdict::Inconclusive, witness: format!("sum 2 reached by {}", vec_str(c)) };
    }
    let sy = a.s_y_squared;
    if sy < 0 {
        return Check { name, verdict: Verdict::Inconclusive, witness: format!("S_Y^2 = {sy} < 0") };
    }
    let max_c0 = sols.iter().map(|c| c[0] as i64).max();
    match max_c0 {
        None => Check { name, verdict: Verdict::Eliminates, witness: "no solution with sum 2 or 3".into() },
        Some(c0) if c0 * c0 < sy => Check {
            name,
            verdict: Verdict::Eliminates,
            witness: format!("{} solutions, all with sum 3; max c0^2 = {} < S_Y^2 = {}", sols.len(), c0 * c0, sy),
        },
        Some(c0) => Check {
            name,
            verdict: Verdict::Inconclusive,
            witness: format!("max c0^2 = {} >= S_Y^2 = {}", c0 * c0, sy),
        },
    }
}

fn non_du_val_off(c: &CandidateTuple) -> Option<&GermRecord> {
    c.off_s().filter(|g| !g.is_du_val())
}

fn two_ray_check(c: &CandidateTuple) -> Check {
    let name = CheckName::TwoRayN;
    let Some(g) = non_du_val_off(c) else {
        return Check { name, verdict: Verdict::Inconclusive, witness: "no non-Du-Val germ off the curve".into() };
    };
    let n = (qi(2) - &c.b) / (Q::one() - &g.mld);
    if n.is_integer() && n.is_positive() {
        Check { name, verdict: Verdict::Inconclusive, witness: format!("n = {}", fmt_q(&n)) }
    } else {
        Check {
            name,
            verdict: Verdict::Eliminates,
            witness: format!("(2-b)/(1-mld) = {} is not a positive integer", fmt_q(&n)),
        }
    }
}

/// Why a (-1)-curve meeting the boundary with multiplicities `c` cannot exist, if it cannot.
fn minus_one_obstruction(a: &AssembledModel, bd: &Boundary, c: &[u32], j0: usize) -> Option<String> {
    let m = &a.model;
    let group_b: Vec<usize> = a.off_s.clone();
    let meets_a = bd.ids.iter().zip(c).any(|(i, &n)| n > 0 && !group_b.contains(i));
    let meets_b = bd.ids.iter().zip(c).any(|(i, &n)| n > 0 && group_b.contains(i));
    if !(meets_a && meets_b) {
        return Some("misses a curve group".into());
    }
    let mut g: SurfaceModel = m.clone();
    let cid = g.add_curve(-1, Q::zero(), Role::Other);
    for (&i, &n) in bd.ids.iter().zip(c) {
        if n > 0 {
            g.add_intersection(cid, i, n as i64);
        }
    }
    let ids: Vec<usize> = g.ids().into_iter().filter(|&i| i != a.s && i != j0).collect();
    for comp in g.components(&ids) {
        if !g.dual_graph(&comp).is_negative_definite() {
            return Some(format!("component of {} curves is not negative definite", comp.len()));
        }
    }
    None
}

fn minus_one_check(c: &CandidateTuple, a: &AssembledModel, bd: &Boundary) -> Check {
    let name = CheckName::MinusOneCurve;
    let Some(g) = non_du_val_off(c) else {
        return Check { name, verdict: Verdict::Inconclusive, witness: "no non-Du-Val germ off the curve".into() };
    };
    let options: Vec<Vec<u32>> = unit_combinations(&bd.coeffs, &[Q::one()])
        .into_iter()
        .filter(|v| v[0] <= 1)
        .collect();
    let target = Q::one() - &g.mld;
    let j0s: Vec<usize> =
        a.off_s.iter().copied().filter(|&i| a.model.curve(i).expect("id").coeff == target).collect();
    for &j0 in &j0s {
        let reasons: Vec<Option<String>> = options.iter().map(|v| minus_one_obstruction(a, bd, v, j0)).collect();
        if reasons.iter().all(Option::is_some) {
            let parts: Vec<String> = options
                .iter()
                .zip(&reasons)
                .map(|(v, r)| format!("{}: {}", vec_str(v), r.as_deref().unwrap_or("")))
                .collect();
            let w = if parts.is_empty() { "no solution with sum 1".to_string() } else { parts.join("; ") };
            return Check { name, verdict: Verdict::Eliminates, witness: w };
        }
    }
    Check { name, verdict: Verdict::Inconclusive, witness: format!("{} options, some admissible", options.len()) }
}

/// Runs the noether-coefficient, two-ray-n and (-1)-curve checks.
pub fn refute(candidate: &CandidateTuple) -> Result<RefutationReport, SearchError> {
    let a = candidate.assemble()?;
    let bd = boundary_of(&a);
    let checks = vec![noether_check(&a, &bd), two_ray_check(candidate), minus_one_check(candidate, &a, &bd)];
    Ok(RefutationReport { candidate: candidate.clone(), checks })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjunctionValue {
    pub value: Q,
    pub orders: Vec<Vec<i64>>,
}

/// Cap on orders when the value set accumulates below `bound`.
pub const ADJUNCTION_P_CAP: i64 = 1000;

/// Values `-2 + sum (1 - 1/p_i)` in `(0, bound]` with witnessing order multisets.
pub fn adjunction_minimum(bound: &Q) -> Result<Vec<AdjunctionValue>, SearchError> {
    if !bound.is_positive() {
        return Err(SearchError::NonPositiveBound);
    }
    let mut found: BTreeMap<Q, Vec<Vec<i64>>> = BTreeMap::new();
    fn rec(partial: &Q, last: i64, cur: &mut Vec<i64>, bound: &Q, found: &mut BTreeMap<Q, Vec<Vec<i64>>>) {
        let val = partial - qi(2);
        if val.is_positive() && val <= *bound {
            found.entry(val).or_default().push(cur.clone());
        }
        for p in last.. {
            if p > ADJUNCTION_P_CAP {
                break;
            }
            let next = partial + Q::one() - q(1, p);
            // positive values need at least three terms, each at least 1 - 1/p
            let need = 3usize.saturating_sub(cur.len() + 1) as i64;
            if &next + qi(need) * (Q::one() - q(1, p)) - qi(2) > *bound {
                break;
            }
            cur.push(p);
            rec(&next, p, cur, bound, found);
            cur.pop();
        }
    }
    rec(&Q::zero(), 2, &mut Vec::new(), bound, &mut found);
    Ok(found.into_iter().map(|(value, mut orders)| {
        orders.sort();
        AdjunctionValue { value, orders }
    })
    .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_b_examples() {
        assert_eq!(solve_b(&q(33, 5), &q(13, 60)), vec![q(12, 13)]);
        assert!(solve_b(&qi(9), &q(1, 3)).is_empty());
        let g = qi(2) - q(4, 5) - q(18, 7);
        let th = Q::one() - (q(1, 3) + q(1, 5) + q(1, 7));
        assert_eq!(solve_b(&g, &th), vec![q(33, 34)]);
    }

    #[test]
    fn table_sing_bounds() {
        assert!(table_sing(&q(6, 7)).is_err());
        let t = table_sing(&b_threshold()).unwrap();
        assert_eq!(t.len(), 39);
        assert!(t.iter().all(|r| r.order() <= 17));
        let r = t.iter().find(|r| r.label() == CyclicLabel::new(13, 12).unwrap()).unwrap();
        assert_eq!(r.germ.weights(), vec![2; 12]);
        assert_eq!((r.germ.gamma.clone(), r.q_inv, r.sup_b.clone()), (qi(12), 12, q(13, 14)));
        let hi = table_sing(&q(48, 49)).unwrap();
        assert!(hi.iter().all(|r| r.sup_b > q(48, 49)));
        assert!(hi.iter().any(|r| r.label() == CyclicLabel::new(2, 1).unwrap()));
        let expected = t.iter().filter(|r| r.sup_b > q(48, 49) && r.order() <= 8).count();
        assert_eq!(hi.len(), expected);
    }

    #[test]
    fn unit_combination_examples() {
        assert_eq!(unit_combinations(&[q(1, 2)], &[qi(2)]), vec![vec![4]]);
        let c = [q(1, 3), q(1, 2)];
        let sols = unit_combinations(&c, &[Q::one()]);
        assert_eq!(sols, vec![vec![0, 2], vec![3, 0]]);
    }

    #[test]
    fn adjunction_examples() {
        let v = adjunction_minimum(&q(1, 10)).unwrap();
        assert_eq!(v[0].value, q(1, 42));
        assert_eq!(v[0].orders, vec![vec![2, 3, 7]]);
        assert_eq!(v[1].value, q(1, 24));
        assert_eq!(v[1].orders, vec![vec![2, 3, 8]]);
        assert!(adjunction_minimum(&q(1, 100)).unwrap().is_empty());
        assert!(adjunction_minimum(&qi(0)).is_err());
    }

    #[test]
    fn fork_catalog() {
        let forks: Vec<GermRecord> = x4_catalog().into_iter().filter(|g| g.kind == GermKind::Fork).collect();
        let mut got: Vec<(i64, Q)> = forks.iter().map(|g| (g.order, g.gamma.clone())).collect();
        got.sort();
        assert_eq!(got, vec![(24, q(10, 3)), (24, q(7, 2)), (40, q(12, 5)), (40, q(9, 2))]);
    }
}
