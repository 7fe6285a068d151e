mod common;

use surfsing::tables::TableId;

#[test]
fn noether_invariance_under_blow_ups_and_downs() {
    common::noether_invariance(1000).unwrap();
}

#[test]
fn hj_round_trip_up_to_200() {
    common::hj_round_trip(200).unwrap();
}

#[test]
fn solver_matches_first_vertex_formula() {
    common::solver_identity(17, 32).unwrap();
}

#[test]
fn gamma_identity_on_random_contractions() {
    common::gamma_identity(200).unwrap();
}

#[test]
fn searches_are_deterministic_across_worker_counts() {
    let ids = [TableId::Sing, TableId::ThreePoint, TableId::FourPointOffS, TableId::FourPointOnS, TableId::AdjMin];
    common::determinism(&ids).unwrap();
}
