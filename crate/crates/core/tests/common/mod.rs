//! Property checks shared by the property suite and the acceptance report.
//! Each returns `Ok(detail)` or `Err(first counterexample)`.

#![allow(dead_code)]

use std::cell::Cell;
use std::path::PathBuf;

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use surfsing::birational::{contract, Point, Role, SurfaceModel};
use surfsing::dualgraph::Attachment;
use surfsing::exact::{q, qi, Q};
use surfsing::germs::{chain_det, hj_contract, hj_expand, CyclicLabel, GermRecord};
use surfsing::search;
use surfsing::tables::{self, Options, TableId};

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("golden")
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// `P^2` with four general lines of coefficient 3/4, so `K + B` is trivial.
pub fn plane_with_lines() -> SurfaceModel {
    let mut m = SurfaceModel::new(1, 9);
    let lines: Vec<usize> = (0..4).map(|_| m.add_curve_with_k(1, -3, q(3, 4), Role::Other)).collect();
    for i in 0..4 {
        for j in i + 1..4 {
            m.add_intersection(lines[i], lines[j], 1);
        }
    }
    m
}

/// One random step: blow up an intersection, blow up a free point, or blow down.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    kind: u8,
    pick: usize,
}

fn step_strategy() -> impl Strategy<Value = Step> {
    (0u8..3, any::<usize>()).prop_map(|(kind, pick)| Step { kind, pick })
}

/// Applies `step` if it is possible on `m`; returns whether it changed the model.
pub fn apply(m: &mut SurfaceModel, step: Step, allow_down: bool) -> bool {
    match step.kind {
        0 => {
            let edges: Vec<(usize, usize)> = m.edges().filter(|e| e.2 > 0).map(|(a, b, _)| (a, b)).collect();
            if edges.is_empty() {
                return false;
            }
            let (a, b) = edges[step.pick % edges.len()];
            *m = m.blow_up(Point::Intersection(a, b)).expect("edge exists").0;
            true
        }
        1 => {
            let ids = m.ids();
            let c = ids[step.pick % ids.len()];
            *m = m.blow_up(Point::OnCurve(c)).expect("curve exists").0;
            true
        }
        _ if allow_down => {
            let cands: Vec<usize> = m
                .curves()
                .filter(|c| c.self_intersection == -1 && c.k_dot == -1 && c.role != Role::StrictTransformOfS)
                .map(|c| c.id)
                .collect();
            if cands.is_empty() {
                return false;
            }
            *m = m.blow_down(cands[step.pick % cands.len()]).expect("(-1)-curve");
            true
        }
        _ => false,
    }
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

/// `rho + K^2 = 10` and crepancy after every step of random blow-up/down sequences.
pub fn noether_invariance(cases: u32) -> Result<String, String> {
    let steps_total = Cell::new(0usize);
    runner(cases)
        .run(&prop::collection::vec(step_strategy(), 1..40), |steps| {
            let mut m = plane_with_lines();
            for (k, s) in steps.iter().enumerate() {
                apply(&mut m, *s, true);
                steps_total.set(steps_total.get() + 1);
                if m.picard_rank + m.k_squared != 10 {
                    return Err(fail(format!("step {k}: rho {} K^2 {}", m.picard_rank, m.k_squared)));
                }
                if !m.is_crepant() {
                    return Err(fail(format!("step {k}: not crepant")));
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{cases} sequences, {} steps", steps_total.get()))
}

/// Hirzebruch-Jung expansion and contraction are inverse for every label of order at most `max_m`.
pub fn hj_round_trip(max_m: i64) -> Result<String, String> {
    let mut n = 0;
    for m in 2..=max_m {
        for k in 1..m {
            let Ok(l) = CyclicLabel::new(m, k) else { continue };
            let w = hj_expand(l);
            if w.iter().any(|&x| x < 2) {
                return Err(format!("{l}: weight below 2 in {w:?}"));
            }
            if hj_contract(&w).ok() != Some(l) {
                return Err(format!("{l}: contract(expand) = {:?}", hj_contract(&w)));
            }
            if chain_det(&w) != m {
                return Err(format!("{l}: det {} != {m}", chain_det(&w)));
            }
            let mut r = w.clone();
            r.reverse();
            if hj_contract(&r).ok() != Some(l.reversed()) {
                return Err(format!("{l}: reversed chain gives {:?}", hj_contract(&r)));
            }
            n += 1;
        }
    }
    Ok(format!("{n} labels with m <= {max_m}"))
}

/// Log discrepancy of the boundary-meeting vertex equals `((1-b)q+1)/m` for every label of order at most `max_m`.
pub fn solver_identity(max_m: i64, cases: u32) -> Result<String, String> {
    let labels: Vec<CyclicLabel> =
        (2..=max_m).flat_map(|m| (1..m).filter_map(move |k| CyclicLabel::new(m, k).ok())).collect();
    let n_labels = labels.len();
    runner(cases)
        .run(&(1i64..1000, 1i64..1000), |(a, d)| {
            let b = q(a.min(d), a.max(d) + 1);
            for &l in &labels {
                let g = GermRecord::cyclic(l);
                let att = Attachment { vertex: g.graph.vertices()[0].id, coefficient: b.clone(), multiplicity: 1 };
                let disc = g.graph.discrepancies(&[att]).map_err(|e| fail(e.to_string()))?;
                let ld = qi(1) - &disc[0];
                let w = g.weights();
                let qv = chain_det(&w[1..]);
                let want = ((qi(1) - &b) * qi(qv) + qi(1)) / qi(l.m);
                if ld != want {
                    return Err(fail(format!("{l} at b = {b}: solver {ld}, formula {want}")));
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{n_labels} labels x {cases} values of b"))
}

/// Sum of local gamma over contracted components equals `rho(Xbar/X) + K_Xbar^2 - K_X^2`.
pub fn gamma_identity(wanted: usize) -> Result<String, String> {
    let mut ok = 0usize;
    let mut tried = 0usize;
    let mut r = runner(wanted as u32 * 50);
    let strat = (prop::collection::vec(step_strategy(), 4..16), any::<u64>(), any::<bool>());
    while ok < wanted {
        tried += 1;
        if tried > wanted * 50 {
            return Err(format!("only {ok} admissible contractions in {tried} draws"));
        }
        let (steps, mask, with_minus_one) = strat.new_tree(&mut r).map_err(|e| e.to_string())?.current();
        let mut m = plane_with_lines();
        for s in steps.iter().filter(|s| s.kind < 2) {
            apply(&mut m, *s, false);
        }
        let sigma: Vec<usize> = m
            .curves()
            .enumerate()
            .filter(|(k, c)| {
                let negative = c.self_intersection <= -2 || (with_minus_one && c.self_intersection == -1);
                negative && (mask >> (k % 64)) & 1 == 1
            })
            .map(|(_, c)| c.id)
            .collect();
        if sigma.is_empty() {
            continue;
        }
        let Ok(res) = contract(&m, &sigma, false) else { continue };
        let mr = &res.minimal_resolution;
        let germs: Option<Vec<GermRecord>> =
            res.min_res_components.iter().map(|c| GermRecord::from_graph(mr.dual_graph(c)).ok()).collect();
        let Some(germs) = germs else { continue };
        let lhs: Q = germs.iter().map(|g| g.gamma.clone()).sum();
        let rhs = res.gamma_identity_rhs();
        if lhs != rhs {
            return Err(format!("sigma {sigma:?}: sum gamma {lhs} != {rhs}"));
        }
        ok += 1;
    }
    Ok(format!("{ok} contractions ({tried} draws)"))
}

/// Byte-identical CSV for `ids` under 1, 2 and 8 workers.
pub fn determinism(ids: &[TableId]) -> Result<String, String> {
    let opts = Options::default();
    for &id in ids {
        let runs: Vec<String> = [1, 2, 8]
            .iter()
            .map(|&n| search::with_workers(n, || tables::generate(id, &opts).map(|t| t.to_csv())))
            .collect::<Result<_, _>>()
            .map_err(|e| format!("{id}: {e}"))?;
        if runs.windows(2).any(|p| p[0] != p[1]) {
            return Err(format!("{id}: output differs between worker counts"));
        }
    }
    Ok(format!("{} tables under 1, 2, 8 workers", ids.len()))
}
