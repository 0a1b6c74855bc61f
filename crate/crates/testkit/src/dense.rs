//! Dense-matrix brute-force oracles.
//!
//! `adj[i][j] == true` means paper `j` cites paper `i`. Nothing in here shares
//! code with the sparse kernels.

#[derive(Debug, Clone)]
pub struct DenseGraph {
    pub n: usize,
    pub adj: Vec<Vec<bool>>,
    pub years: Vec<i32>,
}

impl DenseGraph {
    /// Builds the matrix from `(citing, cited)` pairs; duplicates collapse and
    /// self-citations are ignored.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], years: &[i32]) -> Self {
        assert_eq!(years.len(), n);
        let mut adj = vec![vec![false; n]; n];
        for &(citing, cited) in edges {
            if citing != cited {
                adj[cited][citing] = true;
            }
        }
        DenseGraph {
            n,
            adj,
            years: years.to_vec(),
        }
    }

    pub fn edge_count(&self) -> usize {
        self.adj
            .iter()
            .map(|row| row.iter().filter(|&&a| a).count())
            .sum()
    }

    pub fn in_neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.adj[i][j]).collect()
    }

    pub fn out_degree(&self, j: usize) -> usize {
        (0..self.n).filter(|&i| self.adj[i][j]).count()
    }

    /// Column `j` of the column-normalised transition matrix.
    pub fn transition_column(&self, j: usize) -> Vec<f64> {
        let d = self.out_degree(j);
        (0..self.n)
            .map(|i| {
                if d > 0 && self.adj[i][j] {
                    1.0 / d as f64
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.adj
            .iter()
            .map(|row| row.iter().filter(|&&a| a).count() as f64)
            .collect()
    }

    /// Citations from papers published no later than `window` years after the cited one.
    pub fn incubation_counts(&self, window: i32) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .filter(|&j| self.adj[i][j] && self.years[j] <= self.years[i] + window)
                    .count() as f64
            })
            .collect()
    }

    /// Per-edge `gamma^(tc - t_j)` with the exponent floored at zero.
    pub fn retained_sums(&self, gamma: f64, current_year: i32) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let mut total = 0.0;
                for j in 0..self.n {
                    if self.adj[i][j] {
                        let age = (current_year - self.years[j]).max(0);
                        total += gamma.powi(age);
                    }
                }
                total
            })
            .collect()
    }

    /// Share of in-window citations received by each paper (all zeros when
    /// no citation falls in the window).
    pub fn attention(&self, current_year: i32, window: i32) -> Vec<f64> {
        let first = current_year - window + 1;
        let counts: Vec<f64> = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .filter(|&j| self.adj[i][j] && self.years[j] >= first)
                    .count() as f64
            })
            .collect();
        let total: f64 = counts.iter().sum();
        if total == 0.0 {
            return vec![0.0; self.n];
        }
        counts.iter().map(|c| c / total).collect()
    }

    /// Dense power iteration for `s = alpha * M s + teleport`, where `M` is
    /// the transition matrix with dangling columns replaced by `1/n`.
    /// Runs until successive iterates agree to `tol` in L1.
    pub fn power_iterate(&self, alpha: f64, teleport: &[f64], tol: f64) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![vec![0.0; n]; n];
        for j in 0..n {
            let col = self.transition_column(j);
            let dangling = self.out_degree(j) == 0;
            for (row, &c) in m.iter_mut().zip(&col) {
                row[j] = if dangling { 1.0 / n as f64 } else { c };
            }
        }
        let mut s = vec![1.0 / n as f64; n];
        for _ in 0..100_000 {
            let next: Vec<f64> = (0..n)
                .map(|i| {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += m[i][j] * s[j];
                    }
                    alpha * acc + teleport[i]
                })
                .collect();
            let diff: f64 = next.iter().zip(&s).map(|(a, b)| (a - b).abs()).sum();
            s = next;
            if diff <= tol {
                break;
            }
        }
        s
    }

    pub fn pagerank(&self, alpha: f64, tol: f64) -> Vec<f64> {
        let teleport = vec![(1.0 - alpha) / self.n as f64; self.n];
        self.power_iterate(alpha, &teleport, tol)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn attrank(
        &self,
        alpha: f64,
        beta: f64,
        gamma: f64,
        rho: f64,
        window: i32,
        current_year: i32,
        tol: f64,
    ) -> Vec<f64> {
        let att = self.attention(current_year, window);
        let raw: Vec<f64> = self
            .years
            .iter()
            .map(|&t| (-rho * (current_year - t) as f64).exp())
            .collect();
        let norm: f64 = raw.iter().sum();
        let has_attention = att.iter().any(|&a| a > 0.0);
        let teleport: Vec<f64> = (0..self.n)
            .map(|i| {
                let prior = raw[i] / norm;
                if has_attention {
                    beta * att[i] + gamma * prior
                } else {
                    (beta + gamma) * prior
                }
            })
            .collect();
        self.power_iterate(alpha, &teleport, tol)
    }
}

/// Pearson correlation computed with a two-pass mean-centred formula.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Top-k Spearman over the union of two lists with absent items at rank k+1.
pub fn rho_min(a: &[usize], b: &[usize], k: usize) -> f64 {
    let mut union: Vec<usize> = a.iter().chain(b).copied().collect();
    union.sort_unstable();
    union.dedup();
    let rank = |list: &[usize], item: usize| -> f64 {
        list.iter()
            .position(|&x| x == item)
            .map(|p| (p + 1) as f64)
            .unwrap_or((k + 1) as f64)
    };
    let x: Vec<f64> = union.iter().map(|&z| rank(a, z)).collect();
    let y: Vec<f64> = union.iter().map(|&z| rank(b, z)).collect();
    pearson(&x, &y)
}
