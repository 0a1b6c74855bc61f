mod common;

use common::to_graph;
use impactrank_core::export::{read_dump, write_dump, DumpSpec, ExportError};
use impactrank_core::measures::{compute_all, Measure, MeasureParams, ScoreVector};
use impactrank_core::CitationGraph;
use impactrank_testkit::synth::random_graph;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn write_both(
    sv: &ScoreVector,
    g: &CitationGraph,
    dir: &std::path::Path,
) -> (std::path::PathBuf, std::path::PathBuf) {
    let gz = write_dump(sv, g, &DumpSpec::new(sv, "fixture", true).unwrap(), dir).unwrap();
    let plain = write_dump(sv, g, &DumpSpec::new(sv, "fixture", false).unwrap(), dir).unwrap();
    (gz, plain)
}

#[test]
fn every_measure_round_trips_exactly() {
    let s = random_graph(17, 120, 0.04, 0.2, 1990, 2021);
    let g = to_graph(&s);
    let set = compute_all(&g, &MeasureParams::with_current_year(2021)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for sv in set.iter() {
        let (gz, plain) = write_both(sv, &g, dir.path());
        let rows = read_dump(&gz).unwrap();
        assert_eq!(rows, read_dump(&plain).unwrap());
        assert_eq!(rows.len(), g.node_count());
        for (doi, score) in &rows {
            let id = g.id_of(doi).unwrap() as usize;
            assert_eq!(score.to_bits(), sv.scores[id].to_bits());
        }
        // descending score, ties by DOI
        for w in rows.windows(2) {
            assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
        }
    }
}

#[test]
fn output_bytes_are_deterministic() {
    let g = to_graph(&random_graph(2, 50, 0.05, 0.2, 2000, 2021));
    let set = compute_all(&g, &MeasureParams::with_current_year(2021)).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ga, pa) = write_both(&set.pagerank, &g, a.path());
    let (gb, pb) = write_both(&set.pagerank, &g, b.path());
    assert_eq!(std::fs::read(ga).unwrap(), std::fs::read(gb).unwrap());
    assert_eq!(std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
}

#[test]
fn empty_graph_writes_valid_empty_gzip() {
    let g = CitationGraph::empty();
    let set = compute_all(&g, &MeasureParams::with_current_year(2021)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let spec = DumpSpec::new(&set.pagerank, "uni1", true).unwrap();
    let path = write_dump(&set.pagerank, &g, &spec, dir.path()).unwrap();
    assert!(path.ends_with("PR_uni1_a0.5_error1e-12.tsv.gz"));
    assert_eq!(&std::fs::read(&path).unwrap()[..2], &[0x1f, 0x8b]);
    assert!(read_dump(&path).unwrap().is_empty());
}

#[test]
fn fuzzed_malformed_rows_report_their_line() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fuzz.tsv");
    let corruptions = [
        "10.1/x",
        "10.1/x\t1\t2",
        "nodoi\t0.5",
        "10.1/x\tabc",
        "10.1/x\t",
        "",
        "\t0.1",
        "10.1/x 0.5",
    ];
    for round in 0..200 {
        let good = rng.random_range(0..20);
        let mut text = String::new();
        for i in 0..good {
            text.push_str(&format!("10.7/r{i}\t{}\n", rng.random::<f64>()));
        }
        let bad = corruptions[round % corruptions.len()];
        text.push_str(bad);
        text.push('\n');
        text.push_str("10.7/tail\t1.0\n");
        std::fs::write(&path, &text).unwrap();
        match read_dump(&path) {
            Err(ExportError::Parse { line, .. }) => assert_eq!(line, good + 1, "{bad:?}"),
            other => panic!("{bad:?}: {other:?}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn arbitrary_scores_round_trip(scores in prop::collection::vec(prop::num::f64::POSITIVE | prop::num::f64::ZERO, 1..60)) {
        let s = random_graph(1, scores.len(), 0.0, 1.0, 2000, 2021);
        let g = to_graph(&s);
        let sv = ScoreVector {
            measure: Measure::Ram,
            scores: scores.clone(),
            params: MeasureParams::with_current_year(2021),
            iterations_run: 0,
            converged: true,
            future_dated: 0,
        };
        let dir = tempfile::tempdir().unwrap();
        let (gz, _) = write_both(&sv, &g, dir.path());
        let mut rows = read_dump(&gz).unwrap();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        let got: Vec<u64> = rows.iter().map(|r| r.1.to_bits()).collect();
        let want: Vec<u64> = scores.iter().map(|v| v.to_bits()).collect();
        prop_assert_eq!(got, want);
        prop_assert!(rows.iter().map(|r| &r.0).eq(g.dois().iter()));
    }
}
