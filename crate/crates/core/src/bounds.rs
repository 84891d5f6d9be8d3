//! Entropy lower bound and exhaustive oracles for tiny instances.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::demand::Conditional;
use crate::{Demand, Distribution, Error, HostNetwork, Result};

/// Conditional entropies at base Δ and the bound derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub delta: usize,
    pub hx_given_y: f64,
    pub hy_given_x: f64,
    /// `max(H_Δ(Y|X), H_Δ(X|Y))`, the quantity inside the asymptotic bound.
    pub raw: f64,
    /// `max(1, raw / log_Δ(Δ+1) - 1)`.
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub optimum: f64,
    pub witness: HostNetwork,
    /// Degree-feasible graphs evaluated.
    pub searched: u64,
}

pub const DEFAULT_ORACLE_MAX_N: usize = 7;
pub const DEFAULT_PREFIX_MAX_K: usize = 8;

/// `max(1, h / log_Δ(Δ+1) - 1)`.
pub fn bound_from_entropy(h: f64, delta: usize) -> f64 {
    let d = delta as f64;
    (h / ((d + 1.0).ln() / d.ln()) - 1.0).max(1.0)
}

pub fn entropy_lower_bound(demand: &Demand, delta: usize) -> Result<BoundReport> {
    if delta < 2 {
        return Err(Error::BadArity(delta));
    }
    let base = delta as f64;
    let hx_given_y = demand.conditional_entropy(Conditional::XGivenY, base)?;
    let hy_given_x = demand.conditional_entropy(Conditional::YGivenX, base)?;
    let raw = hx_given_y.max(hy_given_x);
    Ok(BoundReport {
        delta,
        hx_given_y,
        hy_given_x,
        raw,
        lower_bound: bound_from_entropy(raw, delta),
    })
}

/// Edge `k` of the complete graph on `n` nodes, in lexicographic order.
fn edge_list(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect()
}

/// Lexicographic order on the sorted edge-index sequences of two masks.
fn lex_cmp(a: u32, b: u32) -> Ordering {
    let (mut a, mut b) = (a, b);
    loop {
        match (a == 0, b == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (ta, tb) = (a.trailing_zeros(), b.trailing_zeros());
        if ta != tb {
            return ta.cmp(&tb);
        }
        a &= a - 1;
        b &= b - 1;
    }
}

#[derive(Clone, Copy)]
struct Best {
    epl: f64,
    mask: u32,
}

impl Best {
    const NONE: Best = Best {
        epl: f64::NAN,
        mask: u32::MAX,
    };

    fn better(self, other: Best) -> Best {
        if self.epl.is_nan() {
            return other;
        }
        if other.epl.is_nan() {
            return self;
        }
        let tie = (self.epl - other.epl).abs() <= 1e-12
            || (self.epl.is_infinite() && other.epl.is_infinite());
        if tie {
            if lex_cmp(other.mask, self.mask) == Ordering::Less {
                other
            } else {
                self
            }
        } else if other.epl < self.epl {
            other
        } else {
            self
        }
    }
}

struct Search<'a> {
    delta: usize,
    edges: &'a [(usize, usize)],
    /// `(src, dst, p)` of the demand.
    demand: &'a [(usize, usize, f64)],
}

impl Search<'_> {
    fn evaluate(&self, mask: u32) -> f64 {
        let mut adj = [0u8; 8];
        let mut m = mask;
        while m != 0 {
            let (u, v) = self.edges[m.trailing_zeros() as usize];
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
            m &= m - 1;
        }
        let mut total = 0.0;
        let mut current = usize::MAX;
        let mut dist = [u32::MAX; 8];
        for &(s, t, p) in self.demand {
            if s != current {
                current = s;
                dist = [u32::MAX; 8];
                dist[s] = 0;
                let mut seen: u8 = 1 << s;
                let mut frontier: u8 = seen;
                let mut level = 0;
                while frontier != 0 {
                    level += 1;
                    let mut next = 0u8;
                    let mut f = frontier;
                    while f != 0 {
                        next |= adj[f.trailing_zeros() as usize];
                        f &= f - 1;
                    }
                    next &= !seen;
                    seen |= next;
                    let mut x = next;
                    while x != 0 {
                        dist[x.trailing_zeros() as usize] = level;
                        x &= x - 1;
                    }
                    frontier = next;
                }
            }
            if dist[t] == u32::MAX {
                return f64::INFINITY;
            }
            total += p * dist[t] as f64;
        }
        total
    }

    fn dfs(&self, i: usize, mask: u32, deg: &mut [usize; 8], best: &mut Best, count: &mut u64) {
        if i == self.edges.len() {
            *count += 1;
            *best = best.better(Best {
                epl: self.evaluate(mask),
                mask,
            });
            return;
        }
        self.dfs(i + 1, mask, deg, best, count);
        let (u, v) = self.edges[i];
        if deg[u] < self.delta && deg[v] < self.delta {
            deg[u] += 1;
            deg[v] += 1;
            self.dfs(i + 1, mask | 1 << i, deg, best, count);
            deg[u] -= 1;
            deg[v] -= 1;
        }
    }
}

/// Minimum EPL over all simple graphs on `n` nodes with maximum degree at
/// most `delta`, by exhaustive enumeration. Among optimal graphs the witness
/// has the lexicographically smallest sorted edge list.
pub fn brute_force_bnd(demand: &Demand, delta: usize, n_max: usize) -> Result<OracleResult> {
    let n = demand.n();
    // Adjacency rows are bytes.
    let n_max = n_max.min(8);
    if n > n_max {
        return Err(Error::TooLarge { n, max: n_max });
    }
    if delta == 0 {
        return Err(Error::BadArity(0));
    }
    let edges = edge_list(n);
    let demand_entries: Vec<(usize, usize, f64)> =
        demand.entries().iter().map(|e| (e.src, e.dst, e.p)).collect();
    let search = Search {
        delta,
        edges: &edges,
        demand: &demand_entries,
    };
    // Fix the first few edge decisions and search the rest in parallel.
    let split = edges.len().min(6);
    let results: Vec<(Best, u64)> = (0u32..1 << split)
        .into_par_iter()
        .map(|prefix| {
            let mut deg = [0usize; 8];
            for (i, &(u, v)) in edges.iter().enumerate().take(split) {
                if prefix >> i & 1 == 1 {
                    deg[u] += 1;
                    deg[v] += 1;
                }
            }
            if deg.iter().any(|&d| d > search.delta) {
                return (Best::NONE, 0);
            }
            let mut best = Best::NONE;
            let mut count = 0;
            search.dfs(split, prefix, &mut deg, &mut best, &mut count);
            (best, count)
        })
        .collect();
    let mut best = Best::NONE;
    let mut searched = 0;
    for (b, c) in results {
        best = best.better(b);
        searched += c;
    }
    let mut witness_edges = Vec::new();
    let mut m = best.mask;
    while m != 0 {
        witness_edges.push(edges[m.trailing_zeros() as usize]);
        m &= m - 1;
    }
    Ok(OracleResult {
        optimum: best.epl,
        witness: HostNetwork::from_edges(n, witness_edges)?,
        searched,
    })
}

/// Optimal expected codeword length of a Δ-ary prefix code for `d`, found
/// by enumerating length vectors that satisfy Kraft's inequality exactly in
/// integer arithmetic.
pub fn exhaustive_prefix_code(d: &Distribution, delta: usize, k_max: usize) -> Result<f64> {
    if delta < 2 {
        return Err(Error::BadArity(delta));
    }
    let mut probs: Vec<f64> = d.probs().iter().copied().filter(|&p| p > 0.0).collect();
    let k = probs.len();
    if k > k_max {
        return Err(Error::TooLarge { n: k, max: k_max });
    }
    if k == 0 {
        return Err(Error::EmptyDemand);
    }
    if k == 1 {
        return Ok(0.0);
    }
    // An optimal code assigns non-decreasing lengths to non-increasing
    // probabilities, and never needs a codeword longer than k - 1.
    probs.sort_by(|a, b| b.total_cmp(a));
    let max_len = (k - 1) as u32;
    let full = (delta as u128).pow(max_len);
    let mut best = f64::INFINITY;
    let mut lengths = vec![0u32; k];
    fn go(
        i: usize,
        min_len: u32,
        used: u128,
        probs: &[f64],
        delta: u128,
        max_len: u32,
        full: u128,
        lengths: &mut [u32],
        best: &mut f64,
    ) {
        if i == probs.len() {
            let cost: f64 = probs.iter().zip(lengths.iter()).map(|(p, &l)| p * l as f64).sum();
            if cost < *best {
                *best = cost;
            }
            return;
        }
        for l in min_len..=max_len {
            let share = delta.pow(max_len - l);
            // Every later symbol needs at least one unit of Kraft budget.
            let rest = (probs.len() - i - 1) as u128;
            if used + share + rest > full {
                continue;
            }
            lengths[i] = l;
            go(i + 1, l, used + share, probs, delta, max_len, full, lengths, best);
        }
    }
    go(
        0,
        1,
        0,
        &probs,
        delta as u128,
        max_len,
        full,
        &mut lengths,
        &mut best,
    );
    Ok(best)
}
