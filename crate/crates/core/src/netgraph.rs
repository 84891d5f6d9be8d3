//! Undirected host networks and the quantities measured on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{pairwise_sum, Demand, Error, Result};

/// Marker for "no path" in hop-distance vectors.
pub const UNREACHABLE: u32 = u32::MAX;

/// Simple undirected graph on nodes `0..n` with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HostNetwork {
    adj: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub max_degree: usize,
    pub avg_degree: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    /// Mean spanner distance over the demanded edges.
    pub nd: f64,
    /// Mean `d_S / d_G` over all unordered pairs; `None` when `G` is
    /// disconnected or was too large to evaluate.
    pub apd: Option<f64>,
    /// Largest spanner distance over the demanded edges.
    pub max_demand_distortion: f64,
}

impl HostNetwork {
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
        }
    }

    /// Strict constructor: rejects self-loops, out-of-range ids and repeated
    /// edges (in either orientation).
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::build(n, edges, false)
    }

    /// Like [`HostNetwork::from_edges`] but silently merges repeated edges.
    pub fn from_edges_merged(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        Self::build(n, edges, true)
    }

    fn build(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        merge: bool,
    ) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if !merge {
                if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                    return Err(Error::DuplicatePair(u.min(w[0]), u.max(w[0])));
                }
            }
            list.dedup();
        }
        Ok(Self { adj })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect()
    }

    pub fn degree_stats(&self) -> DegreeStats {
        let n = self.n();
        let total: usize = self.adj.iter().map(Vec::len).sum();
        DegreeStats {
            max_degree: self.adj.iter().map(Vec::len).max().unwrap_or(0),
            avg_degree: if n == 0 { 0.0 } else { total as f64 / n as f64 },
        }
    }

    /// Hop distances from `src`; [`UNREACHABLE`] where there is no path.
    pub fn bfs_distances(&self, src: usize) -> Vec<u32> {
        self.bfs_bounded(src, UNREACHABLE)
    }

    /// BFS that stops expanding past depth `limit`. Nodes farther away are
    /// reported as [`UNREACHABLE`].
    pub fn bfs_bounded(&self, src: usize, limit: u32) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.n()];
        let mut queue = std::collections::VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            if du >= limit {
                continue;
            }
            for &v in &self.adj[u] {
                if dist[v] == UNREACHABLE {
                    dist[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.bfs_distances(0).iter().all(|&d| d != UNREACHABLE)
    }

    /// Distance rows from every node, computed in parallel.
    pub fn all_pairs(&self) -> Vec<Vec<u32>> {
        (0..self.n())
            .into_par_iter()
            .map(|s| self.bfs_distances(s))
            .collect()
    }

    /// Text format: a header line `n m`, then one `u v` line per edge.
    pub fn to_text(&self) -> String {
        let edges = self.edges();
        let mut out = format!("{} {}\n", self.n(), edges.len());
        for (u, v) in edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("missing `n m` header".into()))?;
        let (n, m) = parse_pair(header)?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            edges.push(parse_pair(line)?);
        }
        if edges.len() != m {
            return Err(Error::Format(format!(
                "header announces {m} edges, found {}",
                edges.len()
            )));
        }
        Self::from_edges(n, edges)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&GraphFile {
            n: self.n(),
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
        })
        .expect("graph serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_edges(file.n, file.edges.into_iter().map(|[u, v]| (u, v)))
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace().map(str::parse::<usize>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
        _ => Err(Error::Format(format!("expected two integers, got `{line}`"))),
    }
}

/// JSON mirror of the text format: `{"n": .., "edges": [[u, v], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

fn check_shape(demand_n: usize, g: &HostNetwork) -> Result<()> {
    if demand_n != g.n() {
        return Err(Error::ShapeMismatch {
            demand: demand_n,
            graph: g.n(),
        });
    }
    Ok(())
}

/// Expected path length `sum p(u,v) d_G(u,v)`; `f64::INFINITY` when some
/// demanded pair is disconnected in `g`.
pub fn epl(demand: &Demand, g: &HostNetwork) -> Result<f64> {
    check_shape(demand.n(), g)?;
    let sources: Vec<usize> = {
        let mut s: Vec<usize> = demand.entries().iter().map(|e| e.src).collect();
        s.dedup();
        s
    };
    let per_source: Vec<f64> = sources
        .par_iter()
        .map(|&s| {
            let dist = g.bfs_distances(s);
            let terms: Vec<f64> = demand
                .row(s)
                .iter()
                .map(|e| match dist[e.dst] {
                    UNREACHABLE => f64::INFINITY,
                    d => e.p * d as f64,
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    Ok(pairwise_sum(&per_source))
}

/// Spanner distances of every edge of `g`, grouped by the lower endpoint.
fn edge_distances(g: &HostNetwork, s: &HostNetwork) -> Vec<u32> {
    (0..g.n())
        .into_par_iter()
        .flat_map_iter(|u| {
            let higher: Vec<usize> = g.neighbors(u).iter().copied().filter(|&v| v > u).collect();
            let dist = if higher.is_empty() {
                Vec::new()
            } else {
                s.bfs_distances(u)
            };
            higher.into_iter().map(move |v| dist[v])
        })
        .collect()
}

/// Mean spanner distance over the edges of `g` (all of which have
/// `d_G = 1`). `f64::INFINITY` if the spanner disconnects an edge.
pub fn neighborhood_distortion(g: &HostNetwork, s: &HostNetwork) -> Result<f64> {
    check_shape(g.n(), s)?;
    let dists = edge_distances(g, s);
    if dists.is_empty() {
        return Err(Error::EmptyDemand);
    }
    if dists.contains(&UNREACHABLE) {
        return Ok(f64::INFINITY);
    }
    let as_f: Vec<f64> = dists.iter().map(|&d| d as f64).collect();
    Ok(pairwise_sum(&as_f) / dists.len() as f64)
}

/// Mean of `d_S(u,v) / d_G(u,v)` over all unordered pairs.
pub fn all_pairs_distortion(g: &HostNetwork, s: &HostNetwork) -> Result<f64> {
    check_shape(g.n(), s)?;
    let n = g.n();
    if n < 2 {
        return Ok(1.0);
    }
    let rows: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let dg = g.bfs_distances(u);
            let ds = s.bfs_distances(u);
            let mut terms = Vec::with_capacity(n - u - 1);
            for v in u + 1..n {
                if dg[v] == UNREACHABLE {
                    return None;
                }
                terms.push(if ds[v] == UNREACHABLE {
                    f64::INFINITY
                } else {
                    ds[v] as f64 / dg[v] as f64
                });
            }
            Some(pairwise_sum(&terms))
        })
        .collect();
    let sums: Option<Vec<f64>> = rows.into_iter().collect();
    let sums = sums.ok_or(Error::NotConnected)?;
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(pairwise_sum(&sums) / pairs)
}

/// ND, APD (skipped above `apd_limit` nodes) and the largest demanded-edge
/// stretch.
pub fn distortion_report(
    g: &HostNetwork,
    s: &HostNetwork,
    apd_limit: usize,
) -> Result<DistortionReport> {
    check_shape(g.n(), s)?;
    let dists = edge_distances(g, s);
    if dists.is_empty() {
        return Err(Error::EmptyDemand);
    }
    let max = dists.iter().copied().max().unwrap_or(0);
    let max_demand_distortion = if max == UNREACHABLE {
        f64::INFINITY
    } else {
        max as f64
    };
    let nd = neighborhood_distortion(g, s)?;
    let apd = if g.n() <= apd_limit {
        all_pairs_distortion(g, s).ok()
    } else {
        None
    };
    Ok(DistortionReport {
        nd,
        apd,
        max_demand_distortion,
    })
}
