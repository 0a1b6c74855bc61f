//! PageRank and AttRank by power iteration.
//!
//! Both solve `s = alpha * P s + alpha * (d / n) + teleport`, where `P` is
//! the column-normalised citation matrix and `d` is the score mass currently
//! held by dangling papers (no references), spread uniformly. With a teleport
//! vector summing to `1 - alpha` the iterates stay on the probability simplex.
//! Iteration stops once the L1 change drops to `pr_epsilon` or after
//! `max_iterations`, whichever comes first.

use rayon::prelude::*;

use super::counts::attention_score;
use super::{Measure, MeasureError, MeasureParams, ScoreVector};
use crate::graph::CitationGraph;
use crate::reduce;

enum Teleport {
    Uniform(f64),
    PerNode(Vec<f64>),
}

impl Teleport {
    #[inline]
    fn at(&self, i: usize) -> f64 {
        match self {
            Teleport::Uniform(v) => *v,
            Teleport::PerNode(v) => v[i],
        }
    }
}

struct Outcome {
    scores: Vec<f64>,
    iterations: u32,
    converged: bool,
}

fn power_iterate(
    g: &CitationGraph,
    alpha: f64,
    teleport: &Teleport,
    epsilon: f64,
    max_iterations: u32,
    start: Vec<f64>,
) -> Outcome {
    let n = g.node_count();
    if n == 0 {
        return Outcome {
            scores: Vec::new(),
            iterations: 0,
            converged: true,
        };
    }
    let out = g.out_degrees();
    let inv_out: Vec<f64> = out
        .par_iter()
        .map(|&d| if d == 0 { 0.0 } else { 1.0 / d as f64 })
        .collect();

    let mut s = start;
    let mut next = vec![0.0; n];
    let mut share = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        iterations += 1;
        let dangling = reduce::sum_by(n, |j| if out[j] == 0 { s[j] } else { 0.0 });
        let spread = alpha * dangling / n as f64;
        share
            .par_iter_mut()
            .zip(s.par_iter().zip(&inv_out))
            .for_each(|(c, (&sj, &w))| *c = sj * w);
        next.par_iter_mut().enumerate().for_each(|(i, slot)| {
            let inflow: f64 = g.citing(i).iter().map(|&j| share[j as usize]).sum();
            *slot = alpha * inflow + spread + teleport.at(i);
        });
        let delta = reduce::sum_by(n, |i| (next[i] - s[i]).abs());
        std::mem::swap(&mut s, &mut next);
        if delta <= epsilon {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "power iteration stopped after {iterations} iterations without reaching {epsilon:e}"
        );
    }
    Outcome {
        scores: s,
        iterations,
        converged,
    }
}

fn uniform_start(g: &CitationGraph) -> Vec<f64> {
    let n = g.node_count();
    vec![1.0 / n as f64; n]
}

pub fn pagerank(g: &CitationGraph, p: &MeasureParams) -> Result<ScoreVector, MeasureError> {
    pagerank_with_start(g, p, uniform_start(g))
}

/// PageRank from a caller-chosen start vector (length must equal the node count).
pub fn pagerank_with_start(
    g: &CitationGraph,
    p: &MeasureParams,
    start: Vec<f64>,
) -> Result<ScoreVector, MeasureError> {
    p.validate_for(Measure::PageRank)
        .map_err(|source| MeasureError {
            measure: Measure::PageRank,
            source,
        })?;
    assert_eq!(start.len(), g.node_count(), "start vector length");
    let n = g.node_count().max(1) as f64;
    let teleport = Teleport::Uniform((1.0 - p.pr_alpha) / n);
    let out = power_iterate(
        g,
        p.pr_alpha,
        &teleport,
        p.pr_epsilon,
        p.max_iterations,
        start,
    );
    Ok(finish(Measure::PageRank, out, p))
}

/// Normalised exponential age prior `c * exp(-rho * (tc - t_i))`.
fn age_prior(g: &CitationGraph, p: &MeasureParams) -> Vec<f64> {
    // shifting by the newest year cancels in c and keeps every weight <= 1
    let Some(newest) = g.max_year() else {
        return Vec::new();
    };
    let raw: Vec<f64> = g
        .years()
        .par_iter()
        .map(|&t| (-p.att_rho * f64::from(newest - t)).exp())
        .collect();
    let total = reduce::sum(&raw);
    raw.into_par_iter().map(|w| w / total).collect()
}

pub fn attrank(g: &CitationGraph, p: &MeasureParams) -> Result<ScoreVector, MeasureError> {
    attrank_with_start(g, p, uniform_start(g))
}

/// AttRank from a caller-chosen start vector.
///
/// When no citation falls in the attention window, the attention weight is
/// moved onto the age prior so the teleport mass still totals `1 - alpha`.
pub fn attrank_with_start(
    g: &CitationGraph,
    p: &MeasureParams,
    start: Vec<f64>,
) -> Result<ScoreVector, MeasureError> {
    p.validate_for(Measure::AttRank)
        .map_err(|source| MeasureError {
            measure: Measure::AttRank,
            source,
        })?;
    assert_eq!(start.len(), g.node_count(), "start vector length");
    let att = attention_score(g, p);
    let prior = age_prior(g, p);
    let has_attention = att.iter().any(|&a| a > 0.0);
    let (beta, gamma) = if has_attention {
        (p.att_beta, p.att_gamma)
    } else {
        (0.0, p.att_beta + p.att_gamma)
    };
    let teleport: Vec<f64> = att
        .par_iter()
        .zip(&prior)
        .map(|(&a, &c)| beta * a + gamma * c)
        .collect();
    let out = power_iterate(
        g,
        p.att_alpha,
        &Teleport::PerNode(teleport),
        p.pr_epsilon,
        p.max_iterations,
        start,
    );
    Ok(finish(Measure::AttRank, out, p))
}

fn finish(measure: Measure, out: Outcome, p: &MeasureParams) -> ScoreVector {
    ScoreVector {
        measure,
        scores: out.scores,
        params: p.clone(),
        iterations_run: out.iterations,
        converged: out.converged,
        future_dated: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doi::Doi;
    use crate::graph::{build_graph, PubRecord};

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

    fn params() -> MeasureParams {
        MeasureParams::with_current_year(2021)
    }

    #[test]
    fn single_node_pagerank_is_one() {
        for alpha in [0.0, 0.5, 0.85, 1.0] {
            let mut p = params();
            p.pr_alpha = alpha;
            let sv = pagerank(&graph(&[2000], &[]), &p).unwrap();
            assert_eq!(sv.scores, [1.0]);
            assert!(sv.converged);
        }
    }

    #[test]
    fn two_cycle_is_symmetric() {
        let g = graph(&[2000, 2001], &[(0, 1), (1, 0)]);
        let sv = pagerank(&g, &params()).unwrap();
        assert_eq!(sv.scores, [0.5, 0.5]);
    }

    #[test]
    fn chain_fixed_point() {
        // c -> b -> a, alpha 0.5, a dangling. With x = a/6 + 1/6:
        // c = x, b = c/2 + x, a = b/2 + x, so a : b : c = 7 : 6 : 4.
        let g = graph(&[2000, 2001, 2002], &[(2, 1), (1, 0)]);
        let sv = pagerank(&g, &params()).unwrap();
        let expected = [7.0 / 17.0, 6.0 / 17.0, 4.0 / 17.0];
        for (got, want) in sv.scores.iter().zip(expected) {
            assert!((got - want).abs() < 1e-11, "{got} vs {want}");
        }
        assert!(sv.converged);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let mut p = params();
        p.max_iterations = 2;
        let g = graph(&[2000, 2001, 2002], &[(2, 1), (1, 0)]);
        let sv = pagerank(&g, &p).unwrap();
        assert!(!sv.converged);
        assert_eq!(sv.iterations_run, 2);
    }

    #[test]
    fn attrank_two_cycle_is_symmetric() {
        let g = graph(&[2021, 2021], &[(0, 1), (1, 0)]);
        let sv = attrank(&g, &params()).unwrap();
        assert_eq!(sv.scores, [0.5, 0.5]);
    }

    #[test]
    fn attrank_rejects_alpha_one() {
        let mut p = params();
        p.att_alpha = 1.0;
        p.att_beta = 0.0;
        p.att_gamma = 0.0;
        let err = attrank(&graph(&[2000], &[]), &p).unwrap_err();
        assert_eq!(err.measure, Measure::AttRank);
    }

    #[test]
    fn attrank_without_recent_citations_still_sums_to_one() {
        let g = graph(&[1990, 1991, 1995], &[(1, 0), (2, 0)]);
        let sv = attrank(&g, &params()).unwrap();
        let total: f64 = sv.scores.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_dangling_pagerank_is_uniform() {
        let g = graph(&[2000, 2001, 2002, 2003], &[]);
        let sv = pagerank(&g, &params()).unwrap();
        assert!(sv.scores.iter().all(|&s| (s - 0.25).abs() < 1e-15));
    }
}
