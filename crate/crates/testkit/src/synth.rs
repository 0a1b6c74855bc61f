//! Seeded synthetic citation corpora.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::io::{self, Write};

use crate::doi_for;

/// A synthetic corpus: `edges` are `(citing, cited)` index pairs.
#[derive(Debug, Clone)]
pub struct SynthGraph {
    pub years: Vec<i32>,
    pub edges: Vec<(usize, usize)>,
}

impl SynthGraph {
    pub fn n(&self) -> usize {
        self.years.len()
    }
}

/// Uniform random graph. A `dangling_frac` share of nodes cites nothing;
/// every other node cites each other node with probability `p`. Years are
/// drawn uniformly from `first_year..=last_year`; backward citations occur.
pub fn random_graph(
    seed: u64,
    n: usize,
    p: f64,
    dangling_frac: f64,
    first_year: i32,
    last_year: i32,
) -> SynthGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let years = (0..n)
        .map(|_| rng.random_range(first_year..=last_year))
        .collect();
    let mut edges = Vec::new();
    for citing in 0..n {
        if rng.random_bool(dangling_frac) {
            continue;
        }
        for cited in 0..n {
            if rng.random_bool(p) {
                edges.push((citing, cited));
            }
        }
    }
    SynthGraph { years, edges }
}

/// Parameters for [`recency_preferential`].
#[derive(Debug, Clone)]
pub struct GrowthModel {
    pub n: usize,
    pub first_year: i32,
    pub years: usize,
    /// Year-over-year growth of publication volume.
    pub growth: f64,
    /// Mean reference-list length; lengths are uniform on `0..=2*mean`.
    pub mean_refs: usize,
    /// Probability weight ratio between citing a paper of age `a+1` and of age `a`.
    pub age_decay: f64,
}

impl Default for GrowthModel {
    fn default() -> Self {
        GrowthModel {
            n: 50_000,
            first_year: 2001,
            years: 20,
            growth: 1.08,
            mean_refs: 10,
            age_decay: 0.85,
        }
    }
}

/// Growing citation network with a recency-biased preferential kernel.
///
/// Papers arrive in publication order. Each reference first picks the age of
/// the cited paper with probability proportional to `age_decay^age`, then
/// draws from that year's urn, where every paper appears once plus once per
/// citation received. Node indices are shuffled so that index order carries
/// no age information.
pub fn recency_preferential(seed: u64, model: &GrowthModel) -> SynthGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..model.years)
        .map(|y| model.growth.powi(y as i32))
        .collect();
    let total: f64 = weights.iter().sum();
    let mut per_year: Vec<usize> = weights
        .iter()
        .map(|w| ((w / total) * model.n as f64).floor() as usize)
        .collect();
    let assigned: usize = per_year.iter().sum();
    *per_year.last_mut().unwrap() += model.n - assigned;

    let mut labels: Vec<usize> = (0..model.n).collect();
    labels.shuffle(&mut rng);

    let mut years = vec![0; model.n];
    let mut urns: Vec<Vec<u32>> = vec![Vec::new(); model.years];
    let mut edges = Vec::with_capacity(model.n * model.mean_refs);
    let log_decay = model.age_decay.ln();
    let mut next = 0usize;
    for (y, &count) in per_year.iter().enumerate() {
        for _ in 0..count {
            let node = labels[next];
            next += 1;
            years[node] = model.first_year + y as i32;
            let refs = rng.random_range(0..=2 * model.mean_refs);
            for _ in 0..refs {
                let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                let age = (u.ln() / log_decay).floor() as usize;
                if age > y {
                    continue;
                }
                let urn = &mut urns[y - age];
                if urn.is_empty() {
                    continue;
                }
                let cited = urn[rng.random_range(0..urn.len())];
                edges.push((node, cited as usize));
                urn.push(cited);
            }
            urns[y].push(node as u32);
        }
    }
    SynthGraph { years, edges }
}

/// One source's files rendered as CSV text.
#[derive(Debug, Clone, Default)]
pub struct SourceText {
    pub metadata_csv: String,
    pub edges_csv: String,
}

/// Splits `graph` into `sources` overlapping, noisy views.
///
/// Every edge lands in at least one source; each node's metadata row lands
/// in a random subset (possibly none). Noise: mixed-case and resolver-prefixed
/// DOIs, blank or unparseable years, off-by-one year conflicts, duplicate rows,
/// self-citations and malformed DOIs.
pub fn overlapping_sources(seed: u64, graph: &SynthGraph, sources: usize) -> Vec<SourceText> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![SourceText::default(); sources];
    for s in &mut out {
        s.metadata_csv.push_str("doi,year\n");
        s.edges_csv.push_str("citing,cited\n");
    }
    let noisy = |rng: &mut ChaCha8Rng, i: usize| -> String {
        let doi = doi_for(i);
        match rng.random_range(0..6) {
            0 => doi.to_uppercase(),
            1 => format!("https://doi.org/{doi}"),
            2 => format!(" {doi} "),
            _ => doi,
        }
    };
    for (i, &year) in graph.years.iter().enumerate() {
        for s in out.iter_mut() {
            if !rng.random_bool(0.7) {
                continue;
            }
            let year_field = match rng.random_range(0..40) {
                0 => String::new(),
                1 => "n/a".to_string(),
                2 => (year + 1).to_string(),
                _ => year.to_string(),
            };
            let doi = noisy(&mut rng, i);
            writeln!(s.metadata_csv, "{doi},{year_field}").unwrap();
            if rng.random_bool(0.02) {
                writeln!(s.metadata_csv, "{doi},{year_field}").unwrap();
            }
        }
    }
    for &(citing, cited) in &graph.edges {
        let mut placed = false;
        for (k, s) in out.iter_mut().enumerate() {
            let last = k + 1 == sources;
            if rng.random_bool(0.5) || (last && !placed) {
                placed = true;
                let a = noisy(&mut rng, citing);
                let b = noisy(&mut rng, cited);
                writeln!(s.edges_csv, "{a},{b}").unwrap();
                if rng.random_bool(0.01) {
                    writeln!(s.edges_csv, "{a},{b}").unwrap();
                }
            }
        }
    }
    for s in out.iter_mut() {
        for _ in 0..3 {
            let i = rng.random_range(0..graph.n());
            let d = doi_for(i);
            writeln!(s.edges_csv, "{d},{d}").unwrap();
        }
        writeln!(s.edges_csv, "not-a-doi,{}", doi_for(0)).unwrap();
        writeln!(s.metadata_csv, "11.0/bogus,2001").unwrap();
    }
    out
}

/// Streams `graph` as one clean source (metadata + edges) into two writers.
pub fn write_clean_source<M: Write, E: Write>(
    graph: &SynthGraph,
    metadata: &mut M,
    edges: &mut E,
) -> io::Result<()> {
    writeln!(metadata, "doi,year")?;
    for (i, year) in graph.years.iter().enumerate() {
        writeln!(metadata, "{},{year}", doi_for(i))?;
    }
    writeln!(edges, "citing,cited")?;
    for &(citing, cited) in &graph.edges {
        writeln!(edges, "{},{}", doi_for(citing), doi_for(cited))?;
    }
    Ok(())
}
