use rayon::prelude::*;

use super::{Measure, MeasureError, MeasureParams, ScoreVector};
use crate::graph::CitationGraph;

fn per_node<F>(g: &CitationGraph, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    (0..g.node_count()).into_par_iter().map(f).collect()
}

fn validated(p: &MeasureParams, measure: Measure) -> Result<(), MeasureError> {
    p.validate_for(measure)
        .map_err(|source| MeasureError { measure, source })
}

/// In-degree of every node.
pub fn citation_count(g: &CitationGraph, p: &MeasureParams) -> ScoreVector {
    let scores = per_node(g, |i| g.citing(i).len() as f64);
    ScoreVector::direct(Measure::Cc, scores, p)
}

/// Citations from papers published at most `incubation_window` years after the cited paper.
pub fn incubation_citation_count(
    g: &CitationGraph,
    p: &MeasureParams,
) -> Result<ScoreVector, MeasureError> {
    validated(p, Measure::Icc)?;
    let years = g.years();
    let window = p.incubation_window;
    let scores = per_node(g, |i| {
        let limit = years[i].saturating_add(window);
        g.citing(i)
            .iter()
            .filter(|&&j| years[j as usize] <= limit)
            .count() as f64
    });
    Ok(ScoreVector::direct(Measure::Icc, scores, p))
}

/// Citation sum where a citation from year `t` weighs `ram_gamma^(current_year - t)`.
///
/// Citing papers dated after `current_year` weigh 1 and are tallied in
/// `future_dated`.
pub fn ram(g: &CitationGraph, p: &MeasureParams) -> Result<ScoreVector, MeasureError> {
    validated(p, Measure::Ram)?;
    let tc = p.current_year;
    let weights: Vec<f64> = g
        .years()
        .par_iter()
        .map(|&t| p.ram_gamma.powi((tc - t).max(0)))
        .collect();
    let future: usize = (0..g.node_count())
        .into_par_iter()
        .filter(|&j| g.years()[j] > tc)
        .map(|j| g.out_degrees()[j] as usize)
        .sum();
    if future > 0 {
        log::warn!("RAM: {future} citations come from papers dated after {tc}; their weight is capped at 1");
    }
    let scores = per_node(g, |i| {
        g.citing(i).iter().map(|&j| weights[j as usize]).sum()
    });
    let mut sv = ScoreVector::direct(Measure::Ram, scores, p);
    sv.future_dated = future;
    Ok(sv)
}

/// Each node's share of the citations made in the last `att_window` years
/// (`year >= current_year - att_window + 1`). All zeros if there are none.
pub fn attention_score(g: &CitationGraph, p: &MeasureParams) -> Vec<f64> {
    let first = p.current_year - p.att_window.max(1) + 1;
    let years = g.years();
    let counts: Vec<u64> = (0..g.node_count())
        .into_par_iter()
        .map(|i| {
            g.citing(i)
                .iter()
                .filter(|&&j| years[j as usize] >= first)
                .count() as u64
        })
        .collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    counts
        .into_iter()
        .map(|c| c as f64 / total as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doi::Doi;
    use crate::graph::{build_graph, PubRecord};

    /// `years[i]` for node `10.1/n{i:04}`; edges as `(citing, cited)` indices.
    fn graph(years: &[i32], edges: &[(usize, usize)]) -> CitationGraph {
        let recs = years
            .iter()
            .enumerate()
            .map(|(i, &y)| PubRecord::new(Doi::parse(&format!("10.1/n{i:04}")).unwrap(), y));
        let edges = edges
            .iter()
            .map(|&(j, i)| (format!("10.1/n{j:04}"), format!("10.1/n{i:04}")));
        build_graph(recs, edges).unwrap().0
    }

    fn params(tc: i32) -> MeasureParams {
        MeasureParams::with_current_year(tc)
    }

    #[test]
    fn citation_count_is_in_degree() {
        let g = graph(&[2000, 2001, 2002, 2003, 2004], &[(1, 0), (2, 0), (3, 0)]);
        let cc = citation_count(&g, &params(2021));
        assert_eq!(cc.scores, [3.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(cc.iterations_run, 0);
    }

    #[test]
    fn incubation_window_boundary() {
        // node 0 published 2010; cited from 2013 (counted) and 2014 (not)
        let g = graph(&[2010, 2013, 2014], &[(1, 0), (2, 0)]);
        let icc = incubation_citation_count(&g, &params(2021)).unwrap();
        assert_eq!(icc.scores[0], 1.0);
    }

    #[test]
    fn backward_citations_count_for_icc() {
        let g = graph(&[2010, 2005], &[(1, 0)]);
        let icc = incubation_citation_count(&g, &params(2021)).unwrap();
        assert_eq!(icc.scores[0], 1.0);
    }

    #[test]
    fn ram_weights() {
        let g = graph(&[2000, 2021], &[(1, 0)]);
        assert_eq!(ram(&g, &params(2021)).unwrap().scores[0], 1.0);

        let g = graph(&[2000, 2019], &[(1, 0)]);
        let mut p = params(2021);
        p.ram_gamma = 0.5;
        assert_eq!(ram(&g, &p).unwrap().scores[0], 0.25);
    }

    #[test]
    fn ram_caps_future_citations() {
        let g = graph(&[2000, 2023], &[(1, 0)]);
        let sv = ram(&g, &params(2021)).unwrap();
        assert_eq!(sv.scores[0], 1.0);
        assert_eq!(sv.future_dated, 1);
    }

    #[test]
    fn attention_shares() {
        let g = graph(&[2000, 2001, 2002], &[]);
        assert_eq!(attention_score(&g, &params(2021)), [0.0, 0.0, 0.0]);

        let g = graph(&[2000, 2020, 2001], &[(1, 0), (2, 0)]);
        assert_eq!(attention_score(&g, &params(2021)), [1.0, 0.0, 0.0]);

        // 7 recent citations of node 0 and 3 of node 1; old citations ignored
        let mut years = vec![2000, 2000];
        let mut edges = Vec::new();
        for k in 0..10 {
            years.push(2019 + (k % 3));
            edges.push((years.len() - 1, if k < 7 { 0 } else { 1 }));
        }
        years.push(1990);
        edges.push((years.len() - 1, 1));
        let att = attention_score(&graph(&years, &edges), &params(2021));
        assert!((att[0] - 0.7).abs() < 1e-15);
        assert!((att[1] - 0.3).abs() < 1e-15);
    }
}
