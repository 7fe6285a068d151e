use surfsing::exact::{q, qi, Q};
use surfsing::germs::GermKind;
use surfsing::search::*;

fn b_values(v: &[CandidateTuple]) -> Vec<Q> {
    let mut b: Vec<Q> = v.iter().map(|c| c.b.clone()).collect();
    b.sort();
    b
}

#[test]
fn three_point_search() {
    let t = search_triples();
    assert_eq!(t.len(), 6);
    let mut want = vec![q(12, 13), q(33, 34), q(22, 23), q(16, 17), q(18, 19), q(29, 31)];
    want.sort();
    assert_eq!(b_values(&t), want);
    let first = t.iter().find(|c| c.b == q(12, 13)).unwrap();
    assert_eq!(first.p_vec(), vec![3, 4, 5]);
    assert_eq!(first.q_vec(), vec![2, 3, 2]);
    assert_eq!(first.gamma_vec(), vec![qi(2), qi(3), q(8, 5)]);
    for c in &t {
        // gamma_total = 9 - b^2/(1-b) theta, recomputed from scratch
        let g: Q = c.gamma_vec().into_iter().sum();
        assert_eq!(g, qi(9) - &c.b * &c.b / (qi(1) - &c.b) * &c.theta);
        assert!(c.assemble().is_ok());
    }
    let wide = search_triples_window(&q(6, 7));
    assert!(wide.len() >= t.len());
    assert!(t.iter().all(|c| wide.contains(c)));
}

#[test]
fn four_point_off_curve_search() {
    let t = search_quadruples(QuadMode::OffS, EulerWindow::default());
    assert_eq!(t.len(), 7);
    let c2 = t.iter().find(|c| c.b == q(30, 31)).unwrap();
    assert_eq!(germ_name(c2.off_s().unwrap()), "1/31(1,22)");
    let c5 = t.iter().find(|c| c.b == q(12, 13)).unwrap();
    assert_eq!(c5.p_vec(), vec![3, 4, 5, 4]);
    assert_eq!(germ_name(c5.off_s().unwrap()), "1/4(1,1)");
    for c in &t {
        assert!(c.assemble().is_ok());
    }
}

#[test]
fn four_point_on_curve_windows() {
    let printed = search_quadruples(QuadMode::OnS, EulerWindow::ThreeTerms);
    assert!(printed.is_empty());
    let four = search_quadruples(QuadMode::OnS, EulerWindow::FourTerms);
    for c in &four {
        assert!(c.assemble().is_ok());
    }
}

#[test]
fn refutations() {
    let t3 = search_triples();
    for c in &t3 {
        let r = refute(c).unwrap();
        if c.b == q(12, 13) {
            assert!(!r.eliminated());
            assert!(r.checks.iter().all(|k| k.verdict == Verdict::Inconclusive));
        } else {
            assert_eq!(r.check(CheckName::NoetherCoefficient).verdict, Verdict::Eliminates, "{c:?}");
        }
    }
    let sy: Vec<(Q, i64)> = t3.iter().map(|c| (c.b.clone(), c.s_y_sq)).collect();
    for (b, s) in [(q(33, 34), 10), (q(22, 23), 5), (q(16, 17), 6), (q(18, 19), 8), (q(29, 31), 8)] {
        assert!(sy.contains(&(b, s)));
    }
    let t4 = search_quadruples(QuadMode::OffS, EulerWindow::default());
    for c in &t4 {
        let r = refute(c).unwrap();
        assert!(r.eliminated());
        if c.off_s().unwrap().is_du_val() {
            assert_eq!(r.check(CheckName::NoetherCoefficient).verdict, Verdict::Eliminates);
        } else {
            assert_eq!(r.check(CheckName::TwoRayN).verdict, Verdict::Eliminates);
            assert_eq!(r.check(CheckName::MinusOneCurve).verdict, Verdict::Eliminates, "{:?}", r.checks);
        }
    }
}

#[test]
fn case_five_allows_two_boundary_multiplicities() {
    let c = search_triples().into_iter().find(|c| c.b == q(18, 19)).unwrap();
    let a = c.assemble().unwrap();
    let mut coeffs = vec![c.b.clone()];
    for ch in &a.chains {
        coeffs.extend(ch.iter().map(|&i| a.model.curve(i).unwrap().coeff.clone()));
    }
    let sols = unit_combinations(&coeffs, &[qi(2), qi(3)]);
    let c0: std::collections::BTreeSet<u32> = sols.iter().filter(|v| v[0] >= 1).map(|v| v[0]).collect();
    assert_eq!(c0.into_iter().collect::<Vec<_>>(), vec![1, 2]);
}

#[test]
fn unit_combinations_match_naive_oracle() {
    fn naive(c: &[Q], t: &[Q]) -> Vec<Vec<u32>> {
        let max = t.iter().max().unwrap().clone();
        let bounds: Vec<u32> = c.iter().map(|x| (&max / x).floor().to_integer().try_into().unwrap()).collect();
        let mut out = Vec::new();
        let mut cur = vec![0u32; c.len()];
        loop {
            let s: Q = cur.iter().zip(c).map(|(&n, x)| x * qi(n as i64)).sum();
            if t.contains(&s) {
                out.push(cur.clone());
            }
            let mut i = 0;
            loop {
                if i == c.len() {
                    out.sort();
                    return out;
                }
                if cur[i] < bounds[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = 0;
                i += 1;
            }
        }
    }
    let cases: Vec<(Vec<Q>, Vec<Q>)> = vec![
        (vec![q(12, 13), q(8, 13), q(4, 13), q(9, 13), q(6, 13)], vec![qi(2), qi(3)]),
        (vec![q(1, 2), q(1, 3), q(2, 5)], vec![qi(1), qi(2)]),
        (vec![q(33, 34), q(22, 34), q(11, 34), q(27, 34), q(29, 34)], vec![qi(2), qi(3)]),
        (vec![q(7, 5), q(3, 4), q(5, 6), q(1, 1), q(9, 10), q(2, 3), q(4, 7), q(6, 7)], vec![qi(3)]),
    ];
    for (c, t) in cases {
        let fast = unit_combinations(&c, &t);
        assert_eq!(fast, naive(&c, &t));
        for v in &fast {
            let s: Q = v.iter().zip(&c).map(|(&n, x)| x * qi(n as i64)).sum();
            assert!(t.contains(&s));
        }
    }
}

#[test]
fn catalogs() {
    let cat = x4_catalog();
    let forks: Vec<i64> = cat.iter().filter(|g| g.kind == GermKind::Fork).map(|g| g.order).collect();
    assert_eq!(forks.len(), 4);
    let low = cat.iter().filter(|g| g.kind == GermKind::Cyclic && g.order <= 24).count();
    assert_eq!(low, 85);
    for g in &cat {
        assert!(!g.is_du_val());
        assert!(g.gamma < x4_gamma_bound());
    }
}
