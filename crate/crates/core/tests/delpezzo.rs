use std::collections::BTreeSet;
use std::sync::OnceLock;

use surfsing::delpezzo::*;
use surfsing::exact::{q, qi, Q};
use surfsing::germs::GermRecord;

fn w() -> &'static WModel {
    static W: OnceLock<WModel> = OnceLock::new();
    W.get_or_init(|| build_w().unwrap())
}

fn classification() -> &'static Classification {
    static C: OnceLock<Classification> = OnceLock::new();
    C.get_or_init(|| classify(w(), false).unwrap())
}

fn row<'a>(rows: &'a [BranchRow], kept: &[usize]) -> &'a BranchRow {
    rows.iter().find(|r| r.kept == kept).unwrap_or_else(|| panic!("no row keeping {kept:?}"))
}

#[test]
fn terminal_model_invariants() {
    let w = w();
    let lens: Vec<usize> = w.branches.iter().map(Vec::len).collect();
    assert_eq!(lens, vec![12, 17, 21]);
    assert_eq!(w.model.picard_rank, 51);
    assert_eq!(w.model.k_squared, -41);
    assert!(w.model.is_crepant());
    assert_eq!(w.model.len(), 51);
    assert_eq!(w.model.dot(w.s_curve, w.s_curve), -26);
    for b in &w.branches {
        assert_eq!(w.model.dot(w.s_curve, b[0]), 1);
        for pair in b.windows(2) {
            assert_eq!(w.model.dot(pair[0], pair[1]), 1);
        }
        for &c in b {
            let k = w.model.curve(c).unwrap().coeff.clone() * qi(13);
            assert!(k.is_integer());
        }
    }
}

#[test]
fn branch_table_examples() {
    let w = w();
    let c1 = branch_tables(w, 1, false).unwrap();
    let c2 = branch_tables(w, 2, false).unwrap();
    let c3 = branch_tables(w, 3, false).unwrap();
    assert_eq!((c1.len(), c2.len(), c3.len()), (18, 36, 67));

    let empty = row(&c1, &[]);
    assert_eq!((empty.u, empty.v.clone(), empty.left.clone()), (8, vec![2, 2], None));
    let one = row(&c1, &[1]);
    assert_eq!((one.u, one.v.clone(), one.left.clone()), (0, vec![], Some(q(-12, 13))));
    let r = row(&c2, &[13]);
    assert_eq!((r.u, r.v.clone(), r.left.clone()), (8, vec![2, 2], Some(q(-4, 13))));
    let r = row(&c3, &[20]);
    assert_eq!((r.u, r.v.clone(), r.left.clone()), (10, vec![4], Some(q(-2, 3))));
}

#[test]
fn exhaustive_enumeration_agrees_with_restricted() {
    let w = w();
    for i in 1..=2 {
        assert_eq!(branch_tables(w, i, false).unwrap(), branch_tables(w, i, true).unwrap(), "branch {i}");
    }
}

#[test]
fn classification_rows() {
    let c = classification();
    assert_eq!(c.rows.len(), 25);
    let total: usize = c.rejected.values().sum();
    assert_eq!(total + c.rows.len(), c.candidates);

    let min = c.rows.iter().min_by(|a, b| a.mld.cmp(&b.mld)).unwrap();
    assert_eq!(min.mld, q(3, 35));
    assert_eq!(min.k2, q(1, 21385));
    assert_eq!(min.keep.to_string(), "(1,8);(3,2)");

    let keeps: BTreeSet<String> = c.rows.iter().map(|r| r.keep.to_string()).collect();
    assert_eq!(keeps.len(), 25);
    for r in &c.rows {
        assert_eq!(r.rho, r.keep.0.len() as i64);
        assert!(r.mld <= mld_bound());
        assert!(r.k2 > Q::from_integer(0.into()));
        assert!(r.complement_index_ok, "{}", r.keep);
        assert_eq!(r.mld, r.mld_global, "{}", r.keep);
    }
}

#[test]
fn picard_number_one_surfaces() {
    let w = w();
    let rows: Vec<DelPezzoRow> = picard_one_rows(w).into_iter().map(Result::unwrap).collect();
    let got: Vec<(Q, Q, i64)> = rows.iter().map(|r| (r.mld.clone(), r.k2.clone(), r.rho)).collect();
    assert_eq!(
        got,
        vec![(q(9, 97), q(1, 2231), 1), (q(8, 89), q(1, 3115), 1), (q(7, 79), q(1, 3713), 1)]
    );
    for r in &rows {
        assert!(verify_complement(w, &r.keep).unwrap());
    }
    let rank_one: Vec<&DelPezzoRow> = classification().rows.iter().filter(|r| r.rho == 1).collect();
    assert!(rank_one.iter().all(|r| rows.contains(r)));
}

#[test]
fn gamma_identity_on_classified_surfaces() {
    let w = w();
    for r in classification().rows.iter().take(8) {
        let res = w.model.contract(&r.keep.complement(w)).unwrap();
        let mr = &res.minimal_resolution;
        let sum: Q = res
            .min_res_components
            .iter()
            .map(|c| GermRecord::from_graph(mr.dual_graph(c)).unwrap().gamma)
            .sum();
        assert_eq!(sum, res.gamma_identity_rhs(), "{}", r.keep);
    }
}

#[test]
fn keep_set_text_round_trip() {
    let k: KeepSet = "(3,2);(1,8)".parse().unwrap();
    assert_eq!(k.to_string(), "(1,8);(3,2)");
    assert!("(1;8)".parse::<KeepSet>().is_err());
}
