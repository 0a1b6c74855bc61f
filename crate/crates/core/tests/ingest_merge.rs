use std::collections::{HashMap, HashSet};
use std::path::Path;

use impactrank_core::ingest::{merge_sources, IngestOptions, SourceDescriptor};
use impactrank_testkit::synth::{overlapping_sources, random_graph, SourceText};

fn write_sources(dir: &Path, texts: &[SourceText]) -> Vec<SourceDescriptor> {
    texts
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let m = dir.join(format!("s{k}_meta.csv"));
            let e = dir.join(format!("s{k}_edges.csv"));
            std::fs::write(&m, &t.metadata_csv).unwrap();
            std::fs::write(&e, &t.edges_csv).unwrap();
            SourceDescriptor::new(format!("s{k}"), m, e)
        })
        .collect()
}

type EdgeSet = HashSet<(String, String)>;
type YearMap = HashMap<String, Option<i32>>;

/// Independent reading of the CSV text: naive normalisation and hash sets.
fn naive_union(texts: &[SourceText]) -> (EdgeSet, YearMap) {
    let norm = |s: &str| {
        let s = s.trim().to_lowercase();
        let s = s.strip_prefix("https://doi.org/").unwrap_or(&s).to_string();
        s.starts_with("10.5555/").then_some(s)
    };
    let mut edges = HashSet::new();
    let mut years: HashMap<String, Option<i32>> = HashMap::new();
    for t in texts {
        for line in t.metadata_csv.lines().skip(1) {
            let (d, y) = line.split_once(',').unwrap();
            let Some(d) = norm(d) else { continue };
            let y = y.trim().parse::<i32>().ok();
            let slot = years.entry(d).or_insert(None);
            if let Some(y) = y {
                *slot = Some(slot.map_or(y, |old| old.min(y)));
            }
        }
        for line in t.edges_csv.lines().skip(1) {
            let (a, b) = line.split_once(',').unwrap();
            let (Some(a), Some(b)) = (norm(a), norm(b)) else {
                continue;
            };
            years.entry(a.clone()).or_insert(None);
            years.entry(b.clone()).or_insert(None);
            if a != b {
                edges.insert((a, b));
            }
        }
    }
    (edges, years)
}

#[test]
fn union_matches_hash_set_oracle_and_is_order_independent() {
    let graph = random_graph(42, 300, 0.02, 0.1, 1990, 2020);
    let texts = overlapping_sources(7, &graph, 3);
    let dir = tempfile::tempdir().unwrap();
    let sources = write_sources(dir.path(), &texts);
    let opts = IngestOptions::for_current_year(2021);

    let out = merge_sources(&sources, &opts).unwrap();
    let (edges, years) = naive_union(&texts);
    assert_eq!(out.report.unified.distinct_edges, edges.len());
    assert_eq!(out.report.unified.distinct_dois, years.len());
    let dated = years.values().filter(|y| y.is_some()).count();
    assert_eq!(out.report.unified.dated_dois, dated);
    for r in out.records() {
        assert_eq!(r.year, years[r.doi.as_str()], "{}", r.doi);
    }
    let per_source: usize = out.report.sources.iter().map(|s| s.distinct_edges).sum();
    assert!(out.report.unified.distinct_edges <= per_source);
    let max_dois = out
        .report
        .sources
        .iter()
        .map(|s| s.distinct_dois)
        .max()
        .unwrap();
    assert!(out.report.unified.distinct_dois >= max_dois);

    for perm in [[1, 2, 0], [2, 1, 0], [0, 2, 1]] {
        let permuted: Vec<_> = perm.iter().map(|&k| sources[k].clone()).collect();
        let other = merge_sources(&permuted, &opts).unwrap();
        assert_eq!(other.report.unified, out.report.unified);
        assert!(other.records().eq(out.records()));
        assert!(other.edges().eq(out.edges()));
        assert_eq!(other.build_graph().unwrap(), out.build_graph().unwrap());
    }
}

#[test]
fn re_ingesting_unified_output_is_a_fixed_point() {
    let graph = random_graph(5, 200, 0.03, 0.1, 1990, 2020);
    let texts = overlapping_sources(3, &graph, 3);
    let dir = tempfile::tempdir().unwrap();
    let sources = write_sources(dir.path(), &texts);
    let opts = IngestOptions::for_current_year(2021);
    let out = merge_sources(&sources, &opts).unwrap();

    let unified_dir = dir.path().join("unified");
    std::fs::create_dir(&unified_dir).unwrap();
    let desc = out.write_unified(&unified_dir, "unified").unwrap();
    let again = merge_sources(&[desc], &opts).unwrap();
    assert_eq!(again.report.unified, out.report.unified);
    assert!(again.records().eq(out.records()));
    assert!(again.edges().eq(out.edges()));
}
