//! The terminal model over the weighted plane `P(3,4,5)` with boundary
//! `12/13 S`, its per-branch contraction tables, the classification of
//! non-1/11-lt exceptional del Pezzo surfaces and 13-complement checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::birational::{assemble_model, contract, ModelError, SurfaceModel};
use crate::exact::{q, qi, Q};
use crate::germs::{boundary_record, CyclicLabel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DelPezzoError {
    #[error("construction check failed: {0}")]
    Construction(String),
    #[error("branch index {0} out of range")]
    Branch(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Boundary coefficient of the starting pair.
pub fn base_b() -> Q {
    q(12, 13)
}

#[derive(Debug, Clone)]
pub struct WModel {
    pub model: SurfaceModel,
    /// Branch curves ordered away from the boundary curve; `branches[i][0]` meets it.
    pub branches: Vec<Vec<usize>>,
    pub s_curve: usize,
}

impl WModel {
    /// Curve id of `E_{i,j}` (both 1-based).
    pub fn curve(&self, i: usize, j: usize) -> usize {
        self.branches[i - 1][j - 1]
    }
}

/// Minimal resolution of `P(3,4,5)` with `12/13 S` followed by terminalization.
pub fn build_w() -> Result<WModel, DelPezzoError> {
    let germs: Vec<_> = [(3, 2), (4, 3), (5, 2)]
        .iter()
        .map(|&(m, k)| boundary_record(CyclicLabel::new(m, k).expect("coprime")))
        .collect();
    let a = assemble_model(&base_b(), &germs, None)?;
    let model = a.model.terminalize()?;
    let s = a.s;
    let mut branches = Vec::new();
    for chain in &a.chains {
        let mut found = None;
        for (start, _) in model.neighbors(s) {
            let mut walk = vec![start];
            let mut prev = s;
            let mut cur = start;
            while let Some(next) = model.neighbors(cur).into_iter().map(|(x, _)| x).find(|&x| x != prev) {
                walk.push(next);
                prev = cur;
                cur = next;
            }
            if walk.contains(&chain[0]) {
                found = Some(walk);
            }
        }
        branches.push(found.ok_or_else(|| DelPezzoError::Construction("branch not found".into()))?);
    }
    let lens: Vec<usize> = branches.iter().map(Vec::len).collect();
    let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(DelPezzoError::Construction(what.into())) };
    check(lens == [12, 17, 21], "branch lengths")?;
    check(model.picard_rank == 51 && model.k_squared == -41, "Picard rank and K^2")?;
    check(model.is_crepant(), "crepancy")?;
    check(model.len() == 51, "curve count")?;
    Ok(WModel { model, branches, s_curve: s })
}

/// One admissible contraction pattern of a single branch.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BranchRow {
    /// Kept indices, 1-based and ascending.
    pub kept: Vec<usize>,
    /// Change of `S^2` on the minimal resolution.
    pub u: i64,
    /// Weights of contracted curves left of the leftmost kept index that survive on the minimal resolution.
    pub v: Vec<i64>,
    /// `K` against the leftmost kept curve, on the surface where the curves in `v` are not contracted.
    pub left: Option<Q>,
}

/// Indices that may be kept to the right of the leftmost kept curve in the restricted mode.
pub const EXTRA_INDICES: [usize; 8] = [8, 10, 12, 13, 15, 17, 18, 20];

/// Self-intersections after contracting every (-1)-curve among the unkept curves of
/// the chain `S, E_1, .., E_L`. Returns `(S^2, E_j^2 or None if contracted away)`.
fn chain_minres(s_self: i64, weights: &[i64], kept: &[bool]) -> (i64, Vec<Option<i64>>) {
    // node 0 is S; nodes 1..=L the branch
    let n = weights.len() + 1;
    let mut selfs: Vec<i64> = std::iter::once(s_self).chain(weights.iter().map(|w| -w)).collect();
    let mut alive = vec![true; n];
    let contractible = |k: usize| k > 0 && !kept[k - 1];
    while let Some(e) = (1..n).find(|&k| alive[k] && contractible(k) && selfs[k] == -1) {
        alive[e] = false;
        if let Some(l) = (0..e).rev().find(|&k| alive[k]) {
            selfs[l] += 1;
        }
        if let Some(r) = (e + 1..n).find(|&k| alive[k]) {
            selfs[r] += 1;
        }
    }
    let out = (1..n).map(|k| alive[k].then_some(selfs[k])).collect();
    (selfs[0], out)
}

fn branch_row(w: &WModel, i: usize, kept: &[usize]) -> Option<BranchRow> {
    let ids = &w.branches[i - 1];
    let len = ids.len();
    let weights: Vec<i64> = ids.iter().map(|&c| -w.model.dot(c, c)).collect();
    let mut mask = vec![false; len];
    for &j in kept {
        mask[j - 1] = true;
    }
    let s_self = w.model.dot(w.s_curve, w.s_curve);
    let (s_after, after) = chain_minres(s_self, &weights, &mask);
    if kept.iter().any(|&j| after[j - 1] != Some(-1)) {
        return None;
    }
    let ji = kept.first().copied().unwrap_or(len + 1);
    // curves left of the leftmost kept one that survive on the minimal resolution stay on X
    let stays = |k: usize| k + 1 < ji && after[k].is_some();
    let contr: Vec<usize> = (0..len).filter(|&k| !mask[k] && !stays(k)).map(|k| ids[k]).collect();
    let d = w.model.contraction_discrepancies(&contr).ok()?;
    let k_x = |c: usize| -> Q {
        let mut v = qi(w.model.curve(c).expect("id").k_dot);
        for (f, m) in w.model.neighbors(c) {
            if let Some(x) = d.get(&f) {
                v += x * qi(m);
            }
        }
        v
    };
    for &j in kept.iter().skip(1) {
        if !k_x(ids[j - 1]).is_negative() {
            return None;
        }
    }
    let v = (0..ji - 1).filter(|&k| !mask[k]).filter_map(|k| after[k].map(|s| -s)).collect();
    let left = kept.first().map(|&j| k_x(ids[j - 1]));
    Some(BranchRow { kept: kept.to_vec(), u: s_after - s_self, v, left })
}

fn restricted_keep_sets(len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for j in 1..=len {
        let extras: Vec<usize> = EXTRA_INDICES.iter().copied().filter(|&e| e > j && e <= len).collect();
        for mask in 0..(1u32 << extras.len()) {
            let mut k = vec![j];
            k.extend(extras.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e));
            out.push(k);
        }
    }
    out
}

/// Admissible keep-subsets of branch `i` (1-based), sorted.
pub fn branch_tables(w: &WModel, i: usize, exhaustive: bool) -> Result<Vec<BranchRow>, DelPezzoError> {
    if !(1..=w.branches.len()).contains(&i) {
        return Err(DelPezzoError::Branch(i));
    }
    let len = w.branches[i - 1].len();
    let mut rows: Vec<BranchRow> = if exhaustive {
        (0u64..(1u64 << len))
            .into_par_iter()
            .filter_map(|mask| {
                let kept: Vec<usize> = (1..=len).filter(|j| mask >> (j - 1) & 1 == 1).collect();
                branch_row(w, i, &kept)
            })
            .collect()
    } else {
        restricted_keep_sets(len).par_iter().filter_map(|k| branch_row(w, i, k)).collect()
    };
    rows.sort_by(|a, b| (a.kept.len().min(1), &a.kept).cmp(&(b.kept.len().min(1), &b.kept)));
    Ok(rows)
}

/// Kept curves as `(branch, index)` pairs, both 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KeepSet(pub Vec<(usize, usize)>);

impl fmt::Display for KeepSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(i, j)| format!("({i},{j})")).collect();
        f.write_str(&parts.join(";"))
    }
}

impl std::str::FromStr for KeepSet {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let mut v = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let inner = part.strip_prefix('(').and_then(|p| p.strip_suffix(')')).ok_or(format!("bad pair {part}"))?;
            let (a, b) = inner.split_once(',').ok_or(format!("bad pair {part}"))?;
            let i = a.trim().parse().map_err(|_| format!("bad pair {part}"))?;
            let j = b.trim().parse().map_err(|_| format!("bad pair {part}"))?;
            v.push((i, j));
        }
        v.sort();
        Ok(KeepSet(v))
    }
}

impl KeepSet {
    pub fn ids(&self, w: &WModel) -> Vec<usize> {
        self.0.iter().map(|&(i, j)| w.curve(i, j)).collect()
    }

    /// Every curve of `W` not kept, including the boundary curve.
    pub fn complement(&self, w: &WModel) -> Vec<usize> {
        let kept: BTreeSet<usize> = self.ids(w).into_iter().collect();
        w.model.ids().into_iter().filter(|c| !kept.contains(c)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelPezzoRow {
    pub keep: KeepSet,
    pub worst_sing: Option<CyclicLabel>,
    /// Minimal log discrepancy at the image point of the boundary curve.
    pub mld: Q,
    /// Minimal log discrepancy over all singular points.
    pub mld_global: Q,
    pub k2: Q,
    pub rho: i64,
    pub complement_index_ok: bool,
}

/// Filters in the order they are applied; the first failure is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rejection {
    EmptyKeep,
    NotNegativeDefinite,
    NotKlt,
    KNotNegative,
    KSquaredNotPositive,
    MldAboveBound,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub rows: Vec<DelPezzoRow>,
    pub rejected: BTreeMap<Rejection, usize>,
    pub candidates: usize,
}

pub fn mld_bound() -> Q {
    q(1, 11)
}

/// Evaluates one keep set against all filters.
pub fn evaluate(w: &WModel, keep: &KeepSet) -> Result<DelPezzoRow, Rejection> {
    let row = surface_row(w, keep)?;
    if row.mld > mld_bound() {
        return Err(Rejection::MldAboveBound);
    }
    Ok(row)
}

/// Contraction of every curve outside `keep`, checked for klt, `K`-negativity and `K^2 > 0`.
pub fn surface_row(w: &WModel, keep: &KeepSet) -> Result<DelPezzoRow, Rejection> {
    if keep.0.is_empty() {
        return Err(Rejection::EmptyKeep);
    }
    let sigma = keep.complement(w);
    let r = contract(&w.model, &sigma, false).map_err(|_| Rejection::NotNegativeDefinite)?;
    if r.contracted_discrepancies.values().any(|d| *d >= Q::one()) {
        return Err(Rejection::NotKlt);
    }
    if r.kept_k_intersections.values().any(|k| !k.is_negative()) {
        return Err(Rejection::KNotNegative);
    }
    if !r.k_squared.is_positive() {
        return Err(Rejection::KSquaredNotPositive);
    }
    let mld_global = r.contracted_discrepancies.values().map(|d| Q::one() - d).min().expect("non-empty");
    Ok(DelPezzoRow {
        keep: keep.clone(),
        worst_sing: r.worst_sing_label,
        mld: r.mld_at_center,
        mld_global,
        k2: r.k_squared,
        rho: r.picard_rank,
        complement_index_ok: verify_complement(w, keep).unwrap_or(false),
    })
}

/// Surfaces keeping exactly one curve `E_{i,2}`.
pub fn picard_one_rows(w: &WModel) -> Vec<Result<DelPezzoRow, Rejection>> {
    (1..=3).map(|i| surface_row(w, &KeepSet(vec![(i, 2)]))).collect()
}

/// All keep sets built from per-branch admissible rows, filtered.
pub fn classify(w: &WModel, exhaustive: bool) -> Result<Classification, DelPezzoError> {
    let tables: Vec<Vec<BranchRow>> =
        (1..=3).map(|i| branch_tables(w, i, exhaustive)).collect::<Result<_, _>>()?;
    let mut keeps = Vec::new();
    for a in &tables[0] {
        for b in &tables[1] {
            for c in &tables[2] {
                let mut v = Vec::new();
                for (i, row) in [(1, a), (2, b), (3, c)] {
                    v.extend(row.kept.iter().map(|&j| (i, j)));
                }
                keeps.push(KeepSet(v));
            }
        }
    }
    let results: Vec<Result<DelPezzoRow, Rejection>> = keeps.par_iter().map(|k| evaluate(w, k)).collect();
    let mut rows = Vec::new();
    let mut rejected = BTreeMap::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => *rejected.entry(e).or_insert(0) += 1,
        }
    }
    rows.sort_by(|a, b| (a.rho, &a.keep).cmp(&(b.rho, &b.keep)));
    Ok(Classification { rows, rejected, candidates: keeps.len() })
}

/// Checks that the pushforward of the boundary is a 13-complement on the contraction.
pub fn verify_complement(w: &WModel, keep: &KeepSet) -> Result<bool, ModelError> {
    verify_complement_model(&w.model, &keep.ids(w), 13)
}

/// Coefficients of kept curves lie in `(1/n)Z`, contracted curves have log
/// discrepancy at least 0 for the pushed boundary, and `K_X + B` is trivial on kept curves.
pub fn verify_complement_model(model: &SurfaceModel, kept: &[usize], n: i64) -> Result<bool, ModelError> {
    let kept_set: BTreeSet<usize> = kept.iter().copied().collect();
    let sigma: Vec<usize> = model.ids().into_iter().filter(|c| !kept_set.contains(c)).collect();
    let coeff = |c: usize| model.curve(c).expect("id").coeff.clone();
    if kept.iter().any(|&c| !(coeff(c) * qi(n)).is_integer()) {
        return Ok(false);
    }
    // (K + B_kept + sum e_F F) . F' = 0 on the contracted curves
    let rhs = |f: usize| -> Q {
        let mut v = qi(-model.curve(f).expect("id").k_dot);
        for &c in kept {
            v -= coeff(c) * qi(model.dot(c, f));
        }
        v
    };
    let e = solve_on(model, &sigma, rhs)?;
    if e.values().any(|x| *x > Q::one()) {
        return Ok(false);
    }
    for &c in kept {
        let mut v = qi(model.curve(c).expect("id").k_dot);
        for &d in kept {
            v += coeff(d) * qi(model.dot(c, d));
        }
        for (f, x) in &e {
            v += x * qi(model.dot(*f, c));
        }
        if !v.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn solve_on(
    model: &SurfaceModel,
    sigma: &[usize],
    rhs: impl Fn(usize) -> Q,
) -> Result<BTreeMap<usize, Q>, ModelError> {
    use crate::dualgraph::SymSparse;
    let index: BTreeMap<usize, usize> = sigma.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut sys = SymSparse::new(sigma.len());
    for (i, &c) in sigma.iter().enumerate() {
        sys.set(i, i, model.dot(c, c));
        for (d, m) in model.neighbors(c) {
            if let Some(&j) = index.get(&d) {
                sys.set(i, j, m);
            }
        }
    }
    let v: Vec<Q> = sigma.iter().map(|&c| rhs(c)).collect();
    let x = sys.solve_negative_definite(&v).ok_or(ModelError::NotNegativeDefinite)?;
    Ok(sigma.iter().copied().zip(x).collect())
}
