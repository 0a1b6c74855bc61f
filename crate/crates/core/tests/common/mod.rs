#![allow(dead_code)]

use impactrank_core::{build_graph, CitationGraph, Doi, PubRecord};
use impactrank_testkit::dense::DenseGraph;
use impactrank_testkit::doi_for;
use impactrank_testkit::synth::SynthGraph;

pub fn to_graph(s: &SynthGraph) -> CitationGraph {
    let records = s
        .years
        .iter()
        .enumerate()
        .map(|(i, &y)| PubRecord::new(Doi::parse(&doi_for(i)).unwrap(), y));
    let edges = s.edges.iter().map(|&(j, i)| (doi_for(j), doi_for(i)));
    let (g, _) = build_graph(records, edges).unwrap();
    assert_eq!(g.node_count(), s.n());
    g
}

pub fn to_dense(s: &SynthGraph) -> DenseGraph {
    DenseGraph::from_edges(s.n(), &s.edges, &s.years)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
