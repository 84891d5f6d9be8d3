//! Spanners of the demand support graph.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::netgraph::{distortion_report, DistortionReport, UNREACHABLE};
use crate::{Error, HostNetwork, Result};

/// All-pairs distortion is skipped above this many nodes.
pub const APD_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Only edges of the input graph.
    Subgraph,
    /// May add auxiliary edges.
    Metric,
}

/// A 2-net and the 2-layered star clusters around its nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub net_nodes: Vec<usize>,
    /// Cluster head of every node (net nodes map to themselves).
    pub assignment: Vec<usize>,
    /// Edges of the cluster stars.
    pub intra_edges: Vec<(usize, usize)>,
    /// Edges joining communicating clusters (filled in by the spanner).
    pub inter_edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpannerResult {
    pub spanner: HostNetwork,
    pub edge_count: usize,
    pub distortion: DistortionReport,
    pub variant: Variant,
    pub clustering: Option<Clustering>,
}

#[derive(Serialize)]
struct StatsJson {
    edges: usize,
    nd: f64,
    apd: Option<f64>,
    max_stretch: f64,
    variant: Variant,
}

impl SpannerResult {
    fn new(
        g: &HostNetwork,
        spanner: HostNetwork,
        variant: Variant,
        clustering: Option<Clustering>,
    ) -> Result<Self> {
        let distortion = distortion_report(g, &spanner, APD_LIMIT)?;
        Ok(Self {
            edge_count: spanner.edge_count(),
            spanner,
            distortion,
            variant,
            clustering,
        })
    }

    pub fn max_stretch(&self) -> f64 {
        self.distortion.max_demand_distortion
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&StatsJson {
            edges: self.edge_count,
            nd: self.distortion.nd,
            apd: self.distortion.apd,
            max_stretch: self.distortion.max_demand_distortion,
            variant: self.variant,
        })
        .expect("stats serialize")
    }
}

/// Greedy 2-net: repeatedly take the node of largest residual degree (ties
/// to the lower id) and delete everything within two hops of it. Nodes at
/// distance one join their lowest-id adjacent net node; nodes at distance
/// two join the cluster of their lowest-id neighbor at distance one.
pub fn build_2net(g: &HostNetwork) -> Clustering {
    let n = g.n();
    let mut alive = vec![true; n];
    let mut residual: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut net_nodes = Vec::new();
    let mut remaining = n;
    while remaining > 0 {
        let pick = (0..n)
            .filter(|&v| alive[v])
            .max_by(|&a, &b| residual[a].cmp(&residual[b]).then(b.cmp(&a)))
            .expect("some node is alive");
        net_nodes.push(pick);
        let dist = g.bfs_bounded(pick, 2);
        for x in 0..n {
            if dist[x] != UNREACHABLE && alive[x] {
                alive[x] = false;
                remaining -= 1;
                for &y in g.neighbors(x) {
                    residual[y] -= 1;
                }
            }
        }
    }
    net_nodes.sort_unstable();

    let mut is_net = vec![false; n];
    for &v in &net_nodes {
        is_net[v] = true;
    }
    let mut assignment = vec![usize::MAX; n];
    let mut first_layer = vec![false; n];
    let mut intra_edges = Vec::new();
    for v in 0..n {
        if is_net[v] {
            assignment[v] = v;
        } else if let Some(&h) = g.neighbors(v).iter().find(|&&h| is_net[h]) {
            assignment[v] = h;
            first_layer[v] = true;
            intra_edges.push((v.min(h), v.max(h)));
        }
    }
    for v in 0..n {
        if assignment[v] == usize::MAX {
            let via = *g
                .neighbors(v)
                .iter()
                .find(|&&w| first_layer[w])
                .expect("net covers every node within two hops");
            assignment[v] = assignment[via];
            intra_edges.push((v.min(via), v.max(via)));
        }
    }
    intra_edges.sort_unstable();
    Clustering {
        net_nodes,
        assignment,
        intra_edges,
        inter_edges: Vec::new(),
    }
}

/// Cluster spanner for graphs of locally-bounded doubling dimension.
///
/// The subgraph variant adds, for every pair of clusters joined by some edge
/// of `g`, the lexicographically smallest such edge (stretch at most 9). The
/// metric variant joins the two cluster heads directly instead (stretch at
/// most 5).
pub fn build_ldd_spanner(g: &HostNetwork, variant: Variant) -> Result<SpannerResult> {
    let mut clustering = build_2net(g);
    let head = &clustering.assignment;
    let mut chosen: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for (u, v) in g.edges() {
        let (a, b) = (head[u], head[v]);
        if a != b {
            chosen.entry((a.min(b), a.max(b))).or_insert((u, v));
        }
    }
    clustering.inter_edges = match variant {
        Variant::Subgraph => chosen.values().copied().collect(),
        Variant::Metric => chosen.keys().copied().collect(),
    };
    clustering.inter_edges.sort_unstable();
    let edges = clustering
        .intra_edges
        .iter()
        .chain(clustering.inter_edges.iter())
        .copied();
    let spanner = HostNetwork::from_edges_merged(g.n(), edges)?;
    SpannerResult::new(g, spanner, variant, Some(clustering))
}

/// Number of head-to-head edges at each net node of a metric spanner.
pub fn head_aux_degrees(clustering: &Clustering) -> BTreeMap<usize, usize> {
    let mut deg: BTreeMap<usize, usize> = clustering.net_nodes.iter().map(|&h| (h, 0)).collect();
    for &(a, b) in &clustering.inter_edges {
        if let Some(d) = deg.get_mut(&a) {
            *d += 1;
        }
        if let Some(d) = deg.get_mut(&b) {
            *d += 1;
        }
    }
    deg
}

/// Greedy t-spanner: scan edges in lexicographic order and keep an edge
/// when the spanner built so far has no path of length at most `t` between
/// its endpoints.
pub fn greedy_spanner(g: &HostNetwork, t: u32) -> Result<SpannerResult> {
    if t == 0 {
        return Err(Error::BadSpec("spanner stretch must be at least 1".into()));
    }
    let n = g.n();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut kept = Vec::new();
    let mut stamp = vec![0u32; n];
    let mut dist = vec![0u32; n];
    let mut round = 0u32;
    let mut queue = Vec::new();
    for (u, v) in g.edges() {
        round += 1;
        stamp[u] = round;
        dist[u] = 0;
        queue.clear();
        queue.push(u);
        let mut head = 0;
        let mut found = false;
        'bfs: while head < queue.len() {
            let x = queue[head];
            head += 1;
            if dist[x] == t {
                continue;
            }
            for &y in &adj[x] {
                if stamp[y] != round {
                    stamp[y] = round;
                    dist[y] = dist[x] + 1;
                    if y == v {
                        found = true;
                        break 'bfs;
                    }
                    queue.push(y);
                }
            }
        }
        if !found {
            adj[u].push(v);
            adj[v].push(u);
            kept.push((u, v));
        }
    }
    let spanner = HostNetwork::from_edges(n, kept)?;
    SpannerResult::new(g, spanner, Variant::Subgraph, None)
}

/// The `d`-dimensional hypercube on nodes `0..2^d` (edges join ids that
/// differ in one bit).
pub fn hypercube_graph(d: u32) -> Result<HostNetwork> {
    if d == 0 || d > 24 {
        return Err(Error::BadSpec(format!("hypercube dimension {d} out of range")));
    }
    let n = 1usize << d;
    let edges = (0..n).flat_map(|x| {
        (0..d)
            .map(move |j| (x, x ^ (1 << j)))
            .filter(|&(x, y)| x < y)
    });
    HostNetwork::from_edges(n, edges)
}

/// Greedy dominating set of `Q_k`: repeatedly take the node that covers the
/// most uncovered nodes (ties to the lower id).
fn hypercube_dominating_set(k: u32) -> Vec<usize> {
    let n = 1usize << k;
    let mut covered = vec![false; n];
    let mut left = n;
    let mut set = Vec::new();
    let ball = |x: usize| std::iter::once(x).chain((0..k).map(move |j| x ^ (1 << j)));
    while left > 0 {
        let pick = (0..n)
            .max_by(|&a, &b| {
                let ca = ball(a).filter(|&y| !covered[y]).count();
                let cb = ball(b).filter(|&y| !covered[y]).count();
                ca.cmp(&cb).then(b.cmp(&a))
            })
            .expect("nonempty");
        set.push(pick);
        for y in ball(pick) {
            if !covered[y] {
                covered[y] = true;
                left -= 1;
            }
        }
    }
    set.sort_unstable();
    set
}

/// Sparse 3-spanner of the hypercube `Q_d`.
///
/// Write `Q_d = Q_k x Q_{d-k}` with the low `k` bits as the local part. All
/// local edges are kept; an edge flipping a high bit is kept only at nodes
/// whose local part lies in a dominating set of `Q_k`. Any other high edge
/// `x -- x^e` is then bypassed through a dominating neighbor `y` of `x`:
/// `x -- y -- y^e -- x^e`. The split `k` minimizing the edge count is used.
pub fn hypercube_spanner(d: u32) -> Result<SpannerResult> {
    let g = hypercube_graph(d)?;
    let n = 1usize << d;
    let mut best: Option<(usize, u32, Vec<usize>)> = None;
    for k in 0..=d {
        let dom = hypercube_dominating_set(k);
        let edges = n * k as usize / 2 + dom.len() * (1usize << (d - k)) * (d - k) as usize / 2;
        if best.as_ref().is_none_or(|b| edges < b.0) {
            best = Some((edges, k, dom));
        }
    }
    let (_, k, dom) = best.expect("some split");
    let local_mask = (1usize << k) - 1;
    let mut in_dom = vec![false; 1 << k];
    for &x in &dom {
        in_dom[x] = true;
    }
    let edges: Vec<(usize, usize)> = g
        .edges()
        .into_iter()
        .filter(|&(x, y)| {
            let local_flip = (x ^ y) & local_mask != 0;
            local_flip || in_dom[x & local_mask]
        })
        .collect();
    let spanner = HostNetwork::from_edges(n, edges)?;
    let result = SpannerResult::new(&g, spanner, Variant::Subgraph, None)?;
    if result.distortion.nd > 3.0 {
        log::warn!("dimension-grouping spanner missed ND <= 3; using greedy 3-spanner");
        return greedy_spanner(&g, 3);
    }
    Ok(result)
}

/// Upper estimate of the local doubling constant: for every node `u`, a
/// greedy cover of `B(u,2)` by balls `B(y,1)` with `y` in `B(u,3)`; the
/// largest cover size over all nodes.
pub fn local_doubling_estimate(g: &HostNetwork) -> usize {
    (0..g.n())
        .into_par_iter()
        .map(|u| {
            let dist = g.bfs_bounded(u, 3);
            let mut uncovered: Vec<bool> = dist.iter().map(|&d| d <= 2).collect();
            let mut left = uncovered.iter().filter(|&&b| b).count();
            let candidates: Vec<usize> = (0..g.n()).filter(|&y| dist[y] <= 3).collect();
            let mut cover = 0;
            while left > 0 {
                let gain = |y: usize, unc: &[bool]| {
                    usize::from(unc[y]) + g.neighbors(y).iter().filter(|&&z| unc[z]).count()
                };
                let pick = *candidates
                    .iter()
                    .max_by(|&&a, &&b| gain(a, &uncovered).cmp(&gain(b, &uncovered)).then(b.cmp(&a)))
                    .expect("u itself is a candidate");
                cover += 1;
                for z in std::iter::once(pick).chain(g.neighbors(pick).iter().copied()) {
                    if uncovered[z] {
                        uncovered[z] = false;
                        left -= 1;
                    }
                }
            }
            cover
        })
        .max()
        .unwrap_or(0)
}
