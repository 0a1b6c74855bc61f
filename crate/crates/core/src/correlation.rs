//! Top-k rank agreement between measures.
//!
//! `rho_min` is a top-k Spearman correlation: over the union of
//! two top-k lists, each item gets its 1-based position in a list, or `k + 1`
//! when the list does not contain it, and the two rank vectors are compared
//! with Pearson's coefficient.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::NodeId;
use crate::measures::{Measure, ScoreVector};

pub const TIE_RULE: &str = "descending score, ties by ascending node id";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorrelationError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("rankings use different k ({0} vs {1})")]
    KMismatch(usize, usize),
    #[error("score vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopKRanking {
    pub measure: Measure,
    pub k: usize,
    /// Best first; `min(k, n)` distinct node IDs.
    pub entries: Vec<NodeId>,
}

fn rank_order(scores: &[f64]) -> impl Fn(&NodeId, &NodeId) -> Ordering + '_ {
    move |&a, &b| {
        scores[b as usize]
            .total_cmp(&scores[a as usize])
            .then(a.cmp(&b))
    }
}

pub fn top_k(sv: &ScoreVector, k: usize) -> Result<TopKRanking, CorrelationError> {
    if k == 0 {
        return Err(CorrelationError::ZeroK);
    }
    let order = rank_order(&sv.scores);
    let mut ids: Vec<NodeId> = (0..sv.scores.len() as NodeId).collect();
    if k < ids.len() {
        ids.select_nth_unstable_by(k - 1, &order);
        ids.truncate(k);
    }
    ids.sort_unstable_by(&order);
    Ok(TopKRanking {
        measure: sv.measure,
        k,
        entries: ids,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoMin {
    pub value: f64,
    /// Set when a rank vector is constant and Pearson is undefined; `value` is then 0.
    pub degenerate: bool,
}

pub fn rho_min(a: &TopKRanking, b: &TopKRanking) -> Result<RhoMin, CorrelationError> {
    if a.k != b.k {
        return Err(CorrelationError::KMismatch(a.k, b.k));
    }
    if a.entries == b.entries {
        return Ok(RhoMin {
            value: 1.0,
            degenerate: false,
        });
    }
    let absent = (a.k + 1) as f64;
    let positions = |r: &TopKRanking| -> HashMap<NodeId, f64> {
        r.entries
            .iter()
            .enumerate()
            .map(|(pos, &id)| (id, (pos + 1) as f64))
            .collect()
    };
    let (pa, pb) = (positions(a), positions(b));
    let mut union: Vec<NodeId> = a.entries.iter().chain(&b.entries).copied().collect();
    union.sort_unstable();
    union.dedup();

    let x: Vec<f64> = union
        .iter()
        .map(|id| pa.get(id).copied().unwrap_or(absent))
        .collect();
    let y: Vec<f64> = union
        .iter()
        .map(|id| pb.get(id).copied().unwrap_or(absent))
        .collect();
    Ok(match pearson(&x, &y) {
        Some(r) => RhoMin {
            value: r.clamp(-1.0, 1.0),
            degenerate: false,
        },
        None => RhoMin {
            value: 0.0,
            degenerate: true,
        },
    })
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.is_empty() {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub k: usize,
    pub measures: Vec<Measure>,
    pub values: Vec<Vec<f64>>,
    pub degenerate: Vec<Vec<bool>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: Measure, b: Measure) -> Option<f64> {
        let i = self.measures.iter().position(|&m| m == a)?;
        let j = self.measures.iter().position(|&m| m == b)?;
        Some(self.values[i][j])
    }

    /// Off-diagonal pair with the largest value (first in row-major order on ties).
    pub fn max_pair(&self) -> Option<(Measure, Measure, f64)> {
        let mut best: Option<(Measure, Measure, f64)> = None;
        for i in 0..self.measures.len() {
            for j in i + 1..self.measures.len() {
                let v = self.values[i][j];
                if best.is_none_or(|(_, _, b)| v > b) {
                    best = Some((self.measures[i], self.measures[j], v));
                }
            }
        }
        best
    }

    /// Header row and column of measure tags.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("measure");
        for m in &self.measures {
            write!(out, ",{m}").unwrap();
        }
        out.push('\n');
        for (m, row) in self.measures.iter().zip(&self.values) {
            out.push_str(m.tag());
            for v in row {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Pairwise `rho_min` of the top-k lists of each vector.
pub fn correlation_matrix(
    vectors: &[ScoreVector],
    k: usize,
) -> Result<CorrelationMatrix, CorrelationError> {
    if let Some(first) = vectors.first() {
        if let Some(other) = vectors.iter().find(|v| v.len() != first.len()) {
            return Err(CorrelationError::LengthMismatch(first.len(), other.len()));
        }
    }
    let rankings = vectors
        .iter()
        .map(|v| top_k(v, k))
        .collect::<Result<Vec<_>, _>>()?;
    let m = rankings.len();
    let mut values = vec![vec![1.0; m]; m];
    let mut degenerate = vec![vec![false; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let r = rho_min(&rankings[i], &rankings[j])?;
            values[i][j] = r.value;
            values[j][i] = r.value;
            degenerate[i][j] = r.degenerate;
            degenerate[j][i] = r.degenerate;
        }
    }
    Ok(CorrelationMatrix {
        k,
        measures: vectors.iter().map(|v| v.measure).collect(),
        values,
        degenerate,
    })
}
