//! DAN constructions.
//!
//! * [`build_tree_dan`]: tree-shaped demands, maximum degree 8.
//! * [`build_sparse_dan`]: arbitrary demands, maximum degree `12 * ceil(avg)`.
//! * [`reduce_degree`]: bounded-degree graph that stretches every edge by at
//!   most `2 log2 max_degree`.
//! * [`spanner_to_dan`]: degree reduction applied to a sparse spanner.
//! * [`build_dary_dan`]: one complete Δ-ary tree over all nodes.

use std::collections::HashMap;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::demand::Conditional;
use crate::netgraph::{epl, UNREACHABLE};
use crate::trees::{balanced_tree, huffman_weighted, promote_leaves};
use crate::{Demand, Error, HostNetwork, Result};

/// A demand edge `src -> dst` routed through `helper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Helper {
    pub helper: usize,
    pub src: usize,
    pub dst: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildReport {
    pub algo: String,
    pub network: HostNetwork,
    pub max_degree: usize,
    pub epl: f64,
    /// `H(X|Y)`, base 2.
    pub h_xy: f64,
    /// `H(Y|X)`, base 2.
    pub h_yx: f64,
    /// `h_xy + h_yx`.
    pub entropy_bound: f64,
    /// `epl / (entropy_bound + 2)`.
    pub ratio: f64,
    pub helpers: Vec<Helper>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    algo: &'a str,
    max_degree: usize,
    epl: f64,
    h_xy: f64,
    h_yx: f64,
    ratio: f64,
    helpers: &'a [Helper],
}

impl BuildReport {
    pub fn new(
        algo: &str,
        demand: &Demand,
        network: HostNetwork,
        helpers: Vec<Helper>,
    ) -> Result<Self> {
        let epl = epl(demand, &network)?;
        let h_xy = demand.conditional_entropy(Conditional::XGivenY, 2.0)?;
        let h_yx = demand.conditional_entropy(Conditional::YGivenX, 2.0)?;
        let entropy_bound = h_xy + h_yx;
        Ok(Self {
            algo: algo.to_string(),
            max_degree: network.degree_stats().max_degree,
            network,
            epl,
            h_xy,
            h_yx,
            entropy_bound,
            ratio: epl / (entropy_bound + 2.0),
            helpers,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&ReportJson {
            algo: &self.algo,
            max_degree: self.max_degree,
            epl: self.epl,
            h_xy: self.h_xy,
            h_yx: self.h_yx,
            ratio: self.ratio,
            helpers: &self.helpers,
        })
        .expect("report serializes")
    }
}

/// Edges of a binary Huffman tree over `weights` (leaves promoted) hung off
/// `hub` by one edge to its root.
fn hub_tree_edges(hub: usize, weights: &[(usize, f64)]) -> Result<Vec<(usize, usize)>> {
    let tree = promote_leaves(&huffman_weighted(weights, 2)?);
    let mut edges = tree.item_edges();
    edges.push((hub, tree.root_item().expect("promoted trees are full")));
    Ok(edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TreeRoot {
    /// Node whose removal leaves the lightest heaviest component, weighting
    /// each node by its source plus destination probability.
    #[default]
    Centroid,
    Fixed(usize),
}

/// Parent array of the support tree rooted at `root`, plus BFS order.
fn orient_tree(g: &HostNetwork, root: usize) -> (Vec<Option<usize>>, Vec<usize>) {
    let n = g.n();
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    seen[root] = true;
    order.push(root);
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &v in g.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                order.push(v);
            }
        }
    }
    (parent, order)
}

fn weighted_centroid(demand: &Demand, g: &HostNetwork) -> usize {
    let (src, dst) = demand.marginals();
    let weight: Vec<f64> = (0..demand.n())
        .map(|v| src.probs()[v] + dst.probs()[v])
        .collect();
    let total: f64 = weight.iter().sum();
    let (parent, order) = orient_tree(g, 0);
    let mut below = weight.clone();
    for &v in order.iter().rev() {
        if let Some(p) = parent[v] {
            below[p] += below[v];
        }
    }
    let mut best = (f64::INFINITY, 0);
    for v in 0..demand.n() {
        let mut heaviest = total - below[v];
        for &c in g.neighbors(v) {
            if parent[c] == Some(v) {
                heaviest = heaviest.max(below[c]);
            }
        }
        if heaviest < best.0 - 1e-15 {
            best = (heaviest, v);
        }
    }
    best.1
}

pub fn build_tree_dan(demand: &Demand) -> Result<BuildReport> {
    build_tree_dan_rooted(demand, TreeRoot::Centroid)
}

/// Tree-demand construction: root the support tree, then for every node
/// replace its parent-to-children demand edges by one Huffman tree and its
/// children-to-parent demand edges by another.
pub fn build_tree_dan_rooted(demand: &Demand, root: TreeRoot) -> Result<BuildReport> {
    if !demand.classify().is_tree {
        return Err(Error::WrongFamily("support is not a tree".into()));
    }
    let n = demand.n();
    let g = demand.support_graph();
    let root = match root {
        TreeRoot::Centroid => weighted_centroid(demand, &g),
        TreeRoot::Fixed(r) if r < n => r,
        TreeRoot::Fixed(r) => return Err(Error::NodeOutOfRange { node: r, n }),
    };
    let (parent, _) = orient_tree(&g, root);
    let mut down: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut up: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in demand.entries() {
        if parent[e.dst] == Some(e.src) {
            down[e.src].push((e.dst, e.p));
        } else {
            debug_assert_eq!(parent[e.src], Some(e.dst));
            up[e.dst].push((e.src, e.p));
        }
    }
    let per_node: Vec<Vec<(usize, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Vec<(usize, usize)>> {
            let mut edges = Vec::new();
            for weights in [&down[i], &up[i]] {
                if !weights.is_empty() {
                    edges.extend(hub_tree_edges(i, weights)?);
                }
            }
            Ok(edges)
        })
        .collect::<Result<_>>()?;
    let network = HostNetwork::from_edges_merged(n, per_node.into_iter().flatten())?;
    BuildReport::new("tree", demand, network, Vec::new())
}

/// Node classes and the reweighted matrix of the sparse construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseTransform {
    /// `2 * (directed support size) / n`; node degree is in plus out degree.
    pub avg_degree: f64,
    pub low: Vec<usize>,
    pub high_out: Vec<bool>,
    pub high_in: Vec<bool>,
    pub helpers: Vec<Helper>,
    /// Reweighted rows: `rows[u]` lists `(v, weight)` sorted by `v`.
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseTransform {
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.rows.len()];
        for (u, row) in self.rows.iter().enumerate() {
            for &(v, w) in row {
                cols[v].push((u, w));
            }
        }
        cols
    }
}

/// The `floor(n/2)` nodes of smallest degree, ties to the lower id.
fn low_half(degree: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..degree.len()).collect();
    order.sort_by_key(|&v| (degree[v], v));
    order.truncate(degree.len() / 2);
    order.sort_unstable();
    order
}

/// First phase of the sparse construction: demand edges from a high
/// out-degree node to a high in-degree node are rerouted through low-degree
/// helpers, assigned round-robin in id order.
pub fn sparse_transform(demand: &Demand) -> SparseTransform {
    let n = demand.n();
    let out = demand.out_degrees();
    let inn = demand.in_degrees();
    let degree: Vec<usize> = (0..n).map(|v| out[v] + inn[v]).collect();
    let avg_degree = 2.0 * demand.support_size() as f64 / n as f64;
    let low = low_half(&degree);
    let high_out: Vec<bool> = out.iter().map(|&d| d as f64 > 2.0 * avg_degree).collect();
    let high_in: Vec<bool> = inn.iter().map(|&d| d as f64 > 2.0 * avg_degree).collect();

    let mut weights: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n];
    let mut helpers = Vec::new();
    let mut next = 0;
    for e in demand.entries() {
        if high_out[e.src] && high_in[e.dst] && !low.is_empty() {
            let l = low[next % low.len()];
            next += 1;
            helpers.push(Helper {
                helper: l,
                src: e.src,
                dst: e.dst,
            });
            *weights[e.src].entry(l).or_insert(0.0) += e.p;
            *weights[l].entry(e.dst).or_insert(0.0) += e.p;
        } else {
            *weights[e.src].entry(e.dst).or_insert(0.0) += e.p;
        }
    }
    let rows = weights
        .into_iter()
        .map(|m| {
            let mut row: Vec<(usize, f64)> = m.into_iter().collect();
            row.sort_unstable_by_key(|t| t.0);
            row
        })
        .collect();
    SparseTransform {
        avg_degree,
        low,
        high_out,
        high_in,
        helpers,
        rows,
    }
}

/// Sparse-demand construction: after [`sparse_transform`], every high
/// out-degree node reaches its reweighted row through one Huffman tree and
/// every high in-degree node is reached from its column through another; all
/// other demand edges stay direct.
pub fn build_sparse_dan(demand: &Demand) -> Result<BuildReport> {
    let n = demand.n();
    let t = sparse_transform(demand);
    let cols = t.columns();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (u, row) in t.rows.iter().enumerate() {
        for &(v, _) in row {
            if !t.high_out[u] && !t.high_in[v] {
                edges.push((u, v));
            }
        }
    }
    let trees: Vec<Vec<(usize, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Vec<(usize, usize)>> {
            let mut e = Vec::new();
            if t.high_out[i] {
                e.extend(hub_tree_edges(i, &t.rows[i])?);
            }
            if t.high_in[i] {
                e.extend(hub_tree_edges(i, &cols[i])?);
            }
            Ok(e)
        })
        .collect::<Result<_>>()?;
    edges.extend(trees.into_iter().flatten());
    let network = HostNetwork::from_edges_merged(n, edges)?;
    BuildReport::new("sparse", demand, network, t.helpers)
}

/// Per-edge evidence for [`reduce_degree`].
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeCertificate {
    /// `2 * |E| / n` of the input.
    pub avg_degree: f64,
    pub max_degree_in: usize,
    pub max_degree_out: usize,
    /// `2 * max(1, ceil(log2 max_degree_in))`.
    pub stretch_bound: u32,
    /// Helpers for subdivided edges, reported as `(helper, u, v)`.
    pub helpers: Vec<Helper>,
    /// `(u, v, d_G'(u, v))` for every input edge `u < v`.
    pub stretch: Vec<(usize, usize, u32)>,
}

impl DegreeCertificate {
    pub fn max_stretch(&self) -> u32 {
        self.stretch.iter().map(|t| t.2).max().unwrap_or(0)
    }

    /// True when every input edge is within the stretch bound.
    pub fn holds(&self) -> bool {
        self.stretch.iter().all(|t| t.2 <= self.stretch_bound)
    }
}

pub fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

/// Degree reduction. Nodes of degree above `2 * avg` are high; edges
/// between two high nodes are subdivided by low-degree helpers (the
/// `floor(n/2)` lowest-degree nodes, round-robin), and each high node is then
/// replaced by a balanced binary tree rooted at itself over its neighbors.
pub fn reduce_degree(g: &HostNetwork) -> Result<(HostNetwork, DegreeCertificate)> {
    let n = g.n();
    if n < 2 {
        return Err(Error::BadSpec("degree reduction needs at least 2 nodes".into()));
    }
    let degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let stats = g.degree_stats();
    let avg = stats.avg_degree;
    let low = low_half(&degree);
    let high: Vec<bool> = degree.iter().map(|&d| d as f64 > 2.0 * avg).collect();

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut helpers = Vec::new();
    let mut next = 0;
    for (u, v) in g.edges() {
        if high[u] && high[v] {
            let l = low[next % low.len()];
            next += 1;
            helpers.push(Helper {
                helper: l,
                src: u,
                dst: v,
            });
            for (a, b) in [(u, l), (v, l)] {
                adj[a].push(b);
                adj[b].push(a);
            }
        } else {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for u in 0..n {
        if high[u] {
            let mut items = vec![u];
            items.extend(adj[u].iter().copied());
            edges.extend(balanced_tree(&items, 2)?.item_edges());
        } else {
            // Edges to high neighbors come from their trees.
            edges.extend(adj[u].iter().filter(|&&v| v > u && !high[v]).map(|&v| (u, v)));
        }
    }
    let reduced = HostNetwork::from_edges_merged(n, edges)?;

    let stretch: Vec<(usize, usize, u32)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|u| {
            let higher: Vec<usize> = g.neighbors(u).iter().copied().filter(|&v| v > u).collect();
            let dist = if higher.is_empty() {
                Vec::new()
            } else {
                reduced.bfs_distances(u)
            };
            higher.into_iter().map(move |v| (u, v, dist[v]))
        })
        .collect();
    debug_assert!(stretch.iter().all(|t| t.2 != UNREACHABLE));
    let certificate = DegreeCertificate {
        avg_degree: avg,
        max_degree_in: stats.max_degree,
        max_degree_out: reduced.degree_stats().max_degree,
        stretch_bound: 2 * ceil_log2(stats.max_degree).max(1),
        helpers,
        stretch,
    };
    Ok((reduced, certificate))
}

/// Applies [`reduce_degree`] to a spanner `s` of the demand support.
pub fn spanner_to_dan(demand: &Demand, s: &HostNetwork) -> Result<BuildReport> {
    if s.n() != demand.n() {
        return Err(Error::ShapeMismatch {
            demand: demand.n(),
            graph: s.n(),
        });
    }
    let class = demand.classify();
    if !(class.regular && class.uniform) {
        warn!("demand is not regular and uniform; the EPL guarantee assumes both");
    }
    let (reduced, certificate) = reduce_degree(s)?;
    BuildReport::new("spanner2dan", demand, reduced, certificate.helpers)
}

/// Complete Δ-ary tree over nodes `0..n` in id order (node `k` has children
/// `kΔ+1 ..= kΔ+Δ`), so the maximum degree is `Δ + 1`.
pub fn build_dary_dan(demand: &Demand, delta: usize) -> Result<BuildReport> {
    let items: Vec<usize> = (0..demand.n()).collect();
    let tree = balanced_tree(&items, delta)?;
    let network = HostNetwork::from_edges(demand.n(), tree.item_edges())?;
    BuildReport::new("dary", demand, network, Vec::new())
}
