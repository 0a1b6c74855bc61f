mod common;

use common::{to_dense, to_graph};
use impactrank_core::graph::ColumnWeight;
use impactrank_testkit::synth::{random_graph, SynthGraph};
use proptest::prelude::*;

fn check_against_dense(s: &SynthGraph) {
    let g = to_graph(s);
    let d = to_dense(s);
    assert_eq!(g.edge_count(), d.edge_count());
    let mut in_total = 0;
    let mut out_total = 0;
    for i in 0..s.n() {
        let got: Vec<usize> = g
            .in_neighbors(i)
            .unwrap()
            .iter()
            .map(|&j| j as usize)
            .collect();
        assert_eq!(got, d.in_neighbors(i), "node {i}");
        in_total += g.in_degree(i).unwrap();
        out_total += g.out_degree(i).unwrap();
        assert_eq!(g.out_degree(i).unwrap(), d.out_degree(i));
    }
    assert_eq!(in_total, g.edge_count());
    assert_eq!(out_total, g.edge_count());
}

#[test]
fn fifty_node_fixture_matches_dense_matrix() {
    check_against_dense(&random_graph(50, 50, 0.08, 0.2, 1990, 2020));
}

#[test]
fn column_sums_are_one_except_dangling() {
    let s = random_graph(7, 60, 0.1, 0.25, 1990, 2020);
    let g = to_graph(&s);
    let d = to_dense(&s);
    let mut dangling = 0;
    for j in 0..s.n() {
        match g.transition_column_weight(j).unwrap() {
            ColumnWeight::Dangling => {
                dangling += 1;
                assert_eq!(d.out_degree(j), 0);
            }
            ColumnWeight::Weight(w) => {
                let column: f64 = (0..s.n()).map(|i| if d.adj[i][j] { w } else { 0.0 }).sum();
                assert!((column - 1.0).abs() < 1e-12);
                let oracle: f64 = d.transition_column(j).iter().sum();
                assert!((oracle - 1.0).abs() < 1e-12);
            }
        }
    }
    assert!(dangling > 0);
}

#[test]
fn build_is_deterministic_under_input_permutation() {
    let s = random_graph(11, 80, 0.05, 0.1, 1990, 2020);
    let mut shuffled = s.clone();
    shuffled.edges.reverse();
    let dup = shuffled.edges.clone();
    shuffled.edges.extend(dup);
    assert_eq!(to_graph(&s), to_graph(&shuffled));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn in_neighbors_match_dense_oracle(seed in any::<u64>(), n in 1usize..200, p in 0.0f64..0.1) {
        check_against_dense(&random_graph(seed, n, p, 0.2, 1950, 2020));
    }
}
