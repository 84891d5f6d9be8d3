//! Seeded synthetic demand families.
//!
//! Every generator is a pure function of its [`GenSpec`]; randomness comes
//! from [`SeededRng`], so equal specs give byte-identical demands. Unless a
//! Zipf exponent is given, all demanded pairs get equal probability.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::rng::{SeededRng, ALGORITHM};
use crate::trees::balanced_tree;
use crate::{Demand, Error, HostNetwork, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Random tree by preferential attachment; each edge demanded in one
    /// random direction or (with probability 1/2) both.
    Tree,
    /// `k * n` distinct random arcs (default `k = 2`).
    SparseRandom,
    /// Hypercube of dimension `n`, both directions.
    Hypercube,
    /// `k`-regular circulant (default `k = 4`) under a random relabeling,
    /// both directions.
    RegularUniform,
    /// All ordered pairs.
    CompleteUniform,
    /// `n x n` grid, each node joined to all nodes within L-infinity
    /// distance `k` (default 2).
    ThickGrid,
    /// A clique on `round(sqrt n)` nodes, each carrying a line.
    CliqueLines,
    /// Cliques of size `round(log2 n)` whose representatives form a star.
    StarOfCliques,
    /// `p(i,j)` proportional to `w(i) w(j)` over all ordered pairs.
    Product,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::Tree,
        Family::SparseRandom,
        Family::Hypercube,
        Family::RegularUniform,
        Family::CompleteUniform,
        Family::ThickGrid,
        Family::CliqueLines,
        Family::StarOfCliques,
        Family::Product,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Tree => "tree",
            Family::SparseRandom => "sparse_random",
            Family::Hypercube => "hypercube",
            Family::RegularUniform => "regular_uniform",
            Family::CompleteUniform => "complete_uniform",
            Family::ThickGrid => "thick_grid",
            Family::CliqueLines => "clique_lines",
            Family::StarOfCliques => "star_of_cliques",
            Family::Product => "product",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::BadSpec(format!("unknown family {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    /// Node count; the dimension for hypercubes and the side for grids.
    pub n: usize,
    pub seed: u64,
    /// Zipf exponent for pair probabilities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skew: Option<f64>,
    /// Family parameter `k` (see [`Family`]).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

impl GenSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        Self {
            family,
            n,
            seed,
            skew: None,
            k: None,
        }
    }

    pub fn with_skew(mut self, skew: f64) -> Self {
        self.skew = Some(skew);
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    /// Provenance record stored next to generated demands.
    pub fn metadata(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("spec serializes");
        v["rng"] = serde_json::Value::from(ALGORITHM);
        v
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::BadSpec(msg.into())
}

/// Support pairs of the family, before weighting.
fn support(spec: &GenSpec, rng: &mut SeededRng) -> Result<(usize, Vec<(usize, usize)>)> {
    let n = spec.n;
    let both = |edges: Vec<(usize, usize)>| -> Vec<(usize, usize)> {
        edges.into_iter().flat_map(|(u, v)| [(u, v), (v, u)]).collect()
    };
    Ok(match spec.family {
        Family::Tree => {
            if n < 2 {
                return Err(bad("tree needs n >= 2"));
            }
            let mut ends = vec![0usize];
            let mut pairs = Vec::new();
            for v in 1..n {
                let p = ends[rng.index(ends.len())];
                ends.push(p);
                ends.push(v);
                if rng.coin(0.5) {
                    pairs.push((p, v));
                    pairs.push((v, p));
                } else if rng.coin(0.5) {
                    pairs.push((p, v));
                } else {
                    pairs.push((v, p));
                }
            }
            (n, pairs)
        }
        Family::SparseRandom => {
            let k = spec.k.unwrap_or(2);
            let m = k * n;
            if n < 2 || k == 0 || m > n * (n - 1) / 2 {
                return Err(bad(format!("sparse_random needs 1 <= k*n <= n(n-1)/2, got k={k}, n={n}")));
            }
            let mut set = BTreeSet::new();
            while set.len() < m {
                let u = rng.index(n);
                let v = rng.index(n);
                if u != v {
                    set.insert((u, v));
                }
            }
            (n, set.into_iter().collect())
        }
        Family::Hypercube => {
            if n == 0 || n > 20 {
                return Err(bad("hypercube dimension must be in 1..=20"));
            }
            let size = 1usize << n;
            let pairs = (0..size)
                .flat_map(|x| (0..n).map(move |j| (x, x ^ (1 << j))))
                .collect();
            (size, pairs)
        }
        Family::RegularUniform => {
            let r = spec.k.unwrap_or(4);
            if r == 0 || r >= n || (r % 2 == 1 && n % 2 == 1) {
                return Err(bad(format!("no {r}-regular circulant on {n} nodes")));
            }
            let relabel = rng.permutation(n);
            let mut edges = Vec::new();
            for u in 0..n {
                for off in 1..=r / 2 {
                    edges.push((relabel[u], relabel[(u + off) % n]));
                }
                if r % 2 == 1 && u < n / 2 {
                    edges.push((relabel[u], relabel[u + n / 2]));
                }
            }
            (n, both(edges))
        }
        Family::CompleteUniform => {
            if n < 2 {
                return Err(bad("complete_uniform needs n >= 2"));
            }
            let pairs = (0..n)
                .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
                .collect();
            (n, pairs)
        }
        Family::ThickGrid => {
            let radius = spec.k.unwrap_or(2);
            if n < 2 || radius == 0 {
                return Err(bad("thick_grid needs side >= 2 and radius >= 1"));
            }
            let mut edges = Vec::new();
            for r in 0..n {
                for c in 0..n {
                    for r2 in r..(r + radius + 1).min(n) {
                        for c2 in c.saturating_sub(radius)..(c + radius + 1).min(n) {
                            let (a, b) = (r * n + c, r2 * n + c2);
                            if a < b {
                                edges.push((a, b));
                            }
                        }
                    }
                }
            }
            (n * n, both(edges))
        }
        Family::CliqueLines => {
            let (s, line) = clique_lines_shape(n)?;
            (s * line, both(clique_lines_edges(s, line)))
        }
        Family::StarOfCliques => {
            let (c, k) = star_of_cliques_shape(n)?;
            (c * k, both(star_of_cliques_edges(c, k)))
        }
        Family::Product => {
            if n < 2 {
                return Err(bad("product needs n >= 2"));
            }
            return Ok((n, Vec::new()));
        }
    })
}

/// `(clique size, nodes per clique node including itself)`.
fn clique_lines_shape(n: usize) -> Result<(usize, usize)> {
    let s = (n as f64).sqrt().round() as usize;
    if s < 2 || n / s < 1 {
        return Err(bad("clique_lines needs n >= 4"));
    }
    Ok((s, n / s))
}

/// Clique on nodes `0..s`; clique node `i` heads the line
/// `i, s + i*(line-1), .., s + i*(line-1) + line - 2`.
fn clique_lines_edges(s: usize, line: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..s {
        for v in u + 1..s {
            edges.push((u, v));
        }
    }
    edges.extend(line_edges(s, line));
    edges
}

fn line_edges(s: usize, line: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..s {
        let mut prev = i;
        for j in 0..line - 1 {
            let v = s + i * (line - 1) + j;
            edges.push((prev, v));
            prev = v;
        }
    }
    edges
}

/// `(clique size, number of cliques)`.
fn star_of_cliques_shape(n: usize) -> Result<(usize, usize)> {
    if n < 8 {
        return Err(bad("star_of_cliques needs n >= 8"));
    }
    let c = (n as f64).log2().round() as usize;
    Ok((c, n / c))
}

/// Clique `i` occupies `i*c .. (i+1)*c` with representative `i*c`; node 0
/// is the star center joined to every other representative.
fn star_of_cliques_edges(c: usize, k: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..k {
        for a in 0..c {
            for b in a + 1..c {
                edges.push((i * c + a, i * c + b));
            }
        }
        if i > 0 {
            edges.push((0, i * c));
        }
    }
    edges
}

/// Zipf weights `1/(rank+1)^s` over a random ranking of `len` items.
fn zipf_weights(len: usize, s: f64, rng: &mut SeededRng) -> Vec<f64> {
    let rank = rng.permutation(len);
    rank.into_iter().map(|r| 1.0 / ((r + 1) as f64).powf(s)).collect()
}

pub fn generate(spec: &GenSpec) -> Result<Demand> {
    if let Some(s) = spec.skew {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(bad(format!("skew must be a finite nonnegative number, got {s}")));
        }
    }
    let mut rng = SeededRng::split(spec.seed, 0);
    let (n, mut pairs) = support(spec, &mut rng)?;
    let mut weight_rng = SeededRng::split(spec.seed, 1);
    if spec.family == Family::Product {
        let w: Vec<f64> = match spec.skew {
            Some(s) => zipf_weights(n, s, &mut weight_rng),
            None => (0..n).map(|_| 0.1 + weight_rng.unit()).collect(),
        };
        let raw: Vec<_> = (0..n)
            .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
            .map(|(u, v)| (u, v, w[u] * w[v]))
            .collect();
        return Demand::normalize(n, &raw);
    }
    pairs.sort_unstable();
    let weights = match spec.skew {
        Some(s) => zipf_weights(pairs.len(), s, &mut weight_rng),
        None => vec![1.0; pairs.len()],
    };
    let raw: Vec<_> = pairs
        .into_iter()
        .zip(weights)
        .map(|((u, v), w)| (u, v, w))
        .collect();
    Demand::normalize(n, &raw)
}

/// A demand support graph together with a hand-built spanner, from the two
/// families on which the neighborhood and all-pairs distortions diverge.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergencePair {
    pub graph: HostNetwork,
    pub spanner: HostNetwork,
}

/// Clique-with-lines graph and the subgraph spanner that keeps the lines
/// and replaces the clique by a balanced binary tree over its nodes.
pub fn clique_lines_pair(n: usize) -> Result<DivergencePair> {
    let (s, line) = clique_lines_shape(n)?;
    let nodes = s * line;
    let graph = HostNetwork::from_edges(nodes, clique_lines_edges(s, line))?;
    let clique: Vec<usize> = (0..s).collect();
    let mut edges = balanced_tree(&clique, 2)?.item_edges();
    edges.extend(line_edges(s, line));
    let spanner = HostNetwork::from_edges(nodes, edges)?;
    Ok(DivergencePair { graph, spanner })
}

/// Star-of-cliques graph and a spanner with auxiliary edges: every clique
/// becomes a star around its representative and the central star becomes a
/// balanced tree of arity `log2 n` over the representatives.
pub fn star_of_cliques_pair(n: usize) -> Result<DivergencePair> {
    let (c, k) = star_of_cliques_shape(n)?;
    let nodes = c * k;
    let graph = HostNetwork::from_edges(nodes, star_of_cliques_edges(c, k))?;
    let reps: Vec<usize> = (0..k).map(|i| i * c).collect();
    let mut edges = balanced_tree(&reps, c)?.item_edges();
    for i in 0..k {
        for a in 1..c {
            edges.push((i * c, i * c + a));
        }
    }
    let spanner = HostNetwork::from_edges(nodes, edges)?;
    Ok(DivergencePair { graph, spanner })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::Conditional;

    #[test]
    fn hypercube_three() {
        let d = generate(&GenSpec::new(Family::Hypercube, 3, 1)).unwrap();
        assert_eq!(d.n(), 8);
        assert_eq!(d.support_size(), 24);
        assert_eq!(d.undirected_pairs().len(), 12);
        assert!(d.entries().iter().all(|e| (e.p - 1.0 / 24.0).abs() < 1e-15));
        for e in d.entries() {
            assert_eq!((e.src ^ e.dst).count_ones(), 1);
        }
    }

    #[test]
    fn tree_is_tree() {
        let d = generate(&GenSpec::new(Family::Tree, 10, 7)).unwrap();
        assert!(d.classify().is_tree);
        for seed in 0..20 {
            let d = generate(&GenSpec::new(Family::Tree, 300, seed).with_skew(1.5)).unwrap();
            assert!(d.classify().is_tree);
        }
    }

    #[test]
    fn same_spec_same_bytes() {
        for family in Family::ALL {
            let n = match family {
                Family::Hypercube => 4,
                Family::ThickGrid => 6,
                _ => 36,
            };
            let spec = GenSpec::new(family, n, 99).with_skew(1.0);
            let a = generate(&spec).unwrap().to_json_string();
            let b = generate(&spec).unwrap().to_json_string();
            assert_eq!(a, b, "{family}");
            let other = generate(&GenSpec { seed: 100, ..spec }).unwrap().to_json_string();
            if matches!(family, Family::Tree | Family::SparseRandom | Family::RegularUniform) {
                assert_ne!(a, other, "{family}");
            }
        }
    }

    #[test]
    fn regular_uniform_flags() {
        for (n, r) in [(20, 4), (30, 8), (40, 16), (10, 3)] {
            let d = generate(&GenSpec::new(Family::RegularUniform, n, 5).with_k(r)).unwrap();
            let c = d.classify();
            assert!(c.regular && c.uniform && c.symmetric);
            assert_eq!(d.out_degrees()[0], r);
            let h = d.conditional_entropy(Conditional::YGivenX, 2.0).unwrap();
            assert!((h - (r as f64).log2()).abs() < 1e-12);
        }
        assert!(generate(&GenSpec::new(Family::RegularUniform, 9, 5).with_k(3)).is_err());
    }

    #[test]
    fn sparse_random_sizes() {
        let d = generate(&GenSpec::new(Family::SparseRandom, 100, 3).with_k(3)).unwrap();
        assert_eq!(d.support_size(), 300);
        assert!(generate(&GenSpec::new(Family::SparseRandom, 4, 3).with_k(3)).is_err());
    }

    #[test]
    fn thick_grid_neighborhoods() {
        let d = generate(&GenSpec::new(Family::ThickGrid, 10, 0)).unwrap();
        let g = d.support_graph();
        assert_eq!(g.n(), 100);
        // Interior node (5,5) sees the full 5x5 block minus itself.
        assert_eq!(g.degree(55), 24);
        assert_eq!(g.degree(0), 8);
        for (u, v) in g.edges() {
            let (r1, c1, r2, c2) = (u / 10, u % 10, v / 10, v % 10);
            assert!(r1.abs_diff(r2) <= 2 && c1.abs_diff(c2) <= 2);
        }
    }

    #[test]
    fn clique_lines_degrees() {
        for n in [64, 256, 1024] {
            let d = generate(&GenSpec::new(Family::CliqueLines, n, 0)).unwrap();
            assert_eq!(d.n(), n);
            let stats = d.support_graph().degree_stats();
            let s = (n as f64).sqrt() as usize;
            assert_eq!(stats.max_degree, s);
            assert!(stats.avg_degree < 4.0);
            assert!(d.support_graph().is_connected());
        }
    }

    #[test]
    fn star_of_cliques_shape_and_pair() {
        let d = generate(&GenSpec::new(Family::StarOfCliques, 256, 0)).unwrap();
        assert_eq!(d.n(), 256);
        let g = d.support_graph();
        assert_eq!(g.degree(0), 7 + 31);
        let p = star_of_cliques_pair(256).unwrap();
        assert_eq!(p.graph, g);
        assert!(p.spanner.is_connected());
        assert!(p.spanner.degree_stats().max_degree <= 8 + 7 + 1);
    }

    #[test]
    fn clique_lines_pair_is_subgraph() {
        let p = clique_lines_pair(64).unwrap();
        for (u, v) in p.spanner.edges() {
            assert!(p.graph.has_edge(u, v));
        }
        assert_eq!(p.spanner.edge_count(), 63);
    }

    #[test]
    fn product_is_rank_one() {
        let d = generate(&GenSpec::new(Family::Product, 6, 2)).unwrap();
        assert_eq!(d.support_size(), 30);
        // p(i,j) p(k,l) = p(i,l) p(k,j) for distinct indices.
        let lhs = d.prob(0, 1) * d.prob(2, 3);
        let rhs = d.prob(0, 3) * d.prob(2, 1);
        assert!((lhs - rhs).abs() < 1e-15);
    }

    #[test]
    fn skew_makes_nonuniform() {
        let d = generate(&GenSpec::new(Family::CompleteUniform, 6, 2).with_skew(1.0)).unwrap();
        assert!(!d.classify().uniform);
        let d = generate(&GenSpec::new(Family::CompleteUniform, 6, 2).with_skew(0.0)).unwrap();
        assert!(d.classify().uniform);
        assert!(generate(&GenSpec::new(Family::CompleteUniform, 6, 2).with_skew(-1.0)).is_err());
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("grid".parse::<Family>().is_err());
        let meta = GenSpec::new(Family::Tree, 5, 1).metadata();
        assert_eq!(meta["rng"], ALGORITHM);
        assert_eq!(meta["family"], "tree");
    }
}
