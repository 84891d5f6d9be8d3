//! Communication demand distributions.
//!
//! A [`Demand`] stores the positive entries of an `n x n` request matrix whose
//! entries sum to one. Row `i` normalized is the distribution of destinations
//! given source `i`; column `j` normalized is the distribution of sources
//! given destination `j`. Entropies are computed at an arbitrary base.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::netgraph::HostNetwork;
use crate::{pairwise_sum, Error, Result, PROB_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub src: usize,
    pub dst: usize,
    pub p: f64,
}

/// Normalized demand over ordered pairs of distinct nodes `0..n`.
///
/// Entries are kept sorted by `(src, dst)`; zero entries are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Demand {
    n: usize,
    entries: Vec<Entry>,
}

/// A probability vector indexed by node id (or category).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    probs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Destinations given the source (a normalized row).
    Out,
    /// Sources given the destination (a normalized column).
    In,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditional {
    XGivenY,
    YGivenX,
}

/// Source/destination entropies, all at the same base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyStats {
    pub base: f64,
    pub hx: f64,
    pub hy: f64,
    pub hx_given_y: f64,
    pub hy_given_x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub regular: bool,
    pub uniform: bool,
    pub symmetric: bool,
    pub is_tree: bool,
    /// `2 * (undirected support edges) / n`.
    pub avg_degree: f64,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyDemand);
        }
        if let Some(&bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::BadWeight {
                src: 0,
                dst: 0,
                weight: bad,
            });
        }
        let sum = pairwise_sum(&probs);
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::NotNormalized(sum));
        }
        Ok(Self { probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if let Some(&bad) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::BadWeight {
                src: 0,
                dst: 0,
                weight: bad,
            });
        }
        let total = pairwise_sum(weights);
        if total <= 0.0 {
            return Err(Error::EmptyDemand);
        }
        Ok(Self {
            probs: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(support: usize) -> Self {
        Self {
            probs: vec![1.0 / support as f64; support],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `(index, p)` for every positive entry.
    pub fn support(&self) -> Vec<(usize, f64)> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, p)| (i, *p))
            .collect()
    }

    pub fn entropy(&self, base: f64) -> Result<f64> {
        entropy(&self.probs, base)
    }
}

/// Shannon entropy of `probs` in base `base`, with `0 log(1/0) = 0`.
///
/// The input is not required to be normalized; callers pass distributions.
pub fn entropy(probs: &[f64], base: f64) -> Result<f64> {
    if !(base > 1.0) || !base.is_finite() {
        return Err(Error::BadBase(base));
    }
    let terms: Vec<f64> = probs
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| -p * p.ln())
        .collect();
    Ok((pairwise_sum(&terms) / base.ln()).max(0.0))
}

impl Demand {
    /// Validates already-normalized entries.
    pub fn new(n: usize, entries: Vec<Entry>) -> Result<Self> {
        let mut entries: Vec<Entry> = entries.into_iter().filter(|e| e.p != 0.0).collect();
        check_entries(n, entries.iter().map(|e| (e.src, e.dst, e.p)))?;
        entries.sort_by_key(|e| (e.src, e.dst));
        if entries.is_empty() {
            return Err(Error::EmptyDemand);
        }
        let sum = pairwise_sum(&entries.iter().map(|e| e.p).collect::<Vec<_>>());
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::NotNormalized(sum));
        }
        Ok(Self { n, entries })
    }

    /// Builds a demand from nonnegative weights, dividing by their total.
    pub fn normalize(n: usize, raw: &[(usize, usize, f64)]) -> Result<Self> {
        check_entries(n, raw.iter().copied())?;
        let mut kept: Vec<(usize, usize, f64)> =
            raw.iter().copied().filter(|(_, _, w)| *w > 0.0).collect();
        if kept.is_empty() {
            return Err(Error::EmptyDemand);
        }
        kept.sort_by_key(|&(s, d, _)| (s, d));
        let total = pairwise_sum(&kept.iter().map(|t| t.2).collect::<Vec<_>>());
        let entries = kept
            .into_iter()
            .map(|(src, dst, w)| Entry {
                src,
                dst,
                p: w / total,
            })
            .collect();
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Number of positive entries (directed support edges).
    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn prob(&self, src: usize, dst: usize) -> f64 {
        self.entries
            .binary_search_by_key(&(src, dst), |e| (e.src, e.dst))
            .map(|i| self.entries[i].p)
            .unwrap_or(0.0)
    }

    /// Entries with source `src`, sorted by destination.
    pub fn row(&self, src: usize) -> &[Entry] {
        let lo = self.entries.partition_point(|e| e.src < src);
        let hi = self.entries.partition_point(|e| e.src <= src);
        &self.entries[lo..hi]
    }

    /// For each destination, its `(src, p)` entries sorted by source.
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.n];
        for e in &self.entries {
            cols[e.dst].push((e.src, e.p));
        }
        cols
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.entries {
            deg[e.src] += 1;
        }
        deg
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.entries {
            deg[e.dst] += 1;
        }
        deg
    }

    /// Unordered support pairs `(min, max)`, sorted.
    pub fn undirected_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = self
            .entries
            .iter()
            .map(|e| (e.src.min(e.dst), e.src.max(e.dst)))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    /// The support with directions dropped.
    pub fn support_graph(&self) -> HostNetwork {
        HostNetwork::from_edges_merged(self.n, self.undirected_pairs())
            .expect("demand support is a valid simple graph")
    }

    pub fn marginals(&self) -> (Distribution, Distribution) {
        let mut src = vec![0.0; self.n];
        let mut dst = vec![0.0; self.n];
        for e in &self.entries {
            src[e.src] += e.p;
            dst[e.dst] += e.p;
        }
        (Distribution { probs: src }, Distribution { probs: dst })
    }

    /// Row `node` (for [`Direction::Out`]) or column `node` (for
    /// [`Direction::In`]) normalized to a distribution over node ids.
    pub fn conditional(&self, node: usize, direction: Direction) -> Result<Distribution> {
        if node >= self.n {
            return Err(Error::NodeOutOfRange { node, n: self.n });
        }
        let mut probs = vec![0.0; self.n];
        match direction {
            Direction::Out => {
                for e in self.row(node) {
                    probs[e.dst] = e.p;
                }
            }
            Direction::In => {
                for e in self.entries.iter().filter(|e| e.dst == node) {
                    probs[e.src] = e.p;
                }
            }
        }
        let total = pairwise_sum(&probs);
        if total <= 0.0 {
            return Err(Error::NoMass(node));
        }
        probs.iter_mut().for_each(|p| *p /= total);
        Ok(Distribution { probs })
    }

    /// `H(X|Y)` or `H(Y|X)` from the joint form
    /// `sum p(i,j) log(marginal / p(i,j))`.
    pub fn conditional_entropy(&self, which: Conditional, base: f64) -> Result<f64> {
        if !(base > 1.0) || !base.is_finite() {
            return Err(Error::BadBase(base));
        }
        let (src, dst) = self.marginals();
        let terms: Vec<f64> = self
            .entries
            .iter()
            .map(|e| {
                let given = match which {
                    Conditional::YGivenX => src.probs[e.src],
                    Conditional::XGivenY => dst.probs[e.dst],
                };
                e.p * (given / e.p).ln()
            })
            .collect();
        Ok((pairwise_sum(&terms) / base.ln()).max(0.0))
    }

    pub fn entropy_stats(&self, base: f64) -> Result<EntropyStats> {
        let (src, dst) = self.marginals();
        Ok(EntropyStats {
            base,
            hx: src.entropy(base)?,
            hy: dst.entropy(base)?,
            hx_given_y: self.conditional_entropy(Conditional::XGivenY, base)?,
            hy_given_x: self.conditional_entropy(Conditional::YGivenX, base)?,
        })
    }

    pub fn classify(&self) -> Classification {
        let out = self.out_degrees();
        let inn = self.in_degrees();
        let regular = out.iter().all(|d| *d == out[0]) && inn.iter().all(|d| *d == inn[0]);
        let m = self.entries.len() as f64;
        let uniform = self
            .entries
            .iter()
            .all(|e| (e.p - 1.0 / m).abs() <= PROB_TOLERANCE);
        let symmetric = self
            .entries
            .iter()
            .all(|e| (e.p - self.prob(e.dst, e.src)).abs() <= PROB_TOLERANCE);
        let pairs = self.undirected_pairs();
        let is_tree = pairs.len() + 1 == self.n && self.support_graph().is_connected();
        Classification {
            regular,
            uniform,
            symmetric,
            is_tree,
            avg_degree: 2.0 * pairs.len() as f64 / self.n as f64,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: DemandFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        file.into_demand()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&DemandFile::from(self)).expect("demand serializes")
    }
}

fn check_entries(n: usize, items: impl Iterator<Item = (usize, usize, f64)>) -> Result<()> {
    let mut seen = HashSet::new();
    for (src, dst, w) in items {
        for node in [src, dst] {
            if node >= n {
                return Err(Error::NodeOutOfRange { node, n });
            }
        }
        if src == dst {
            return Err(Error::SelfLoop(src));
        }
        if !w.is_finite() || w < 0.0 {
            return Err(Error::BadWeight {
                src,
                dst,
                weight: w,
            });
        }
        if !seen.insert((src, dst)) {
            return Err(Error::DuplicatePair(src, dst));
        }
    }
    Ok(())
}

/// On-disk demand: `{"n", "entries": [{"src","dst","w"}], "normalized"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemandFile {
    pub n: usize,
    pub entries: Vec<WeightedPair>,
    #[serde(default)]
    pub normalized: bool,
    /// Free-form provenance (generator family, seed, RNG algorithm).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeightedPair {
    pub src: usize,
    pub dst: usize,
    pub w: f64,
}

impl DemandFile {
    pub fn into_demand(self) -> Result<Demand> {
        if self.normalized {
            Demand::new(
                self.n,
                self.entries
                    .iter()
                    .map(|e| Entry {
                        src: e.src,
                        dst: e.dst,
                        p: e.w,
                    })
                    .collect(),
            )
        } else {
            let raw: Vec<_> = self.entries.iter().map(|e| (e.src, e.dst, e.w)).collect();
            Demand::normalize(self.n, &raw)
        }
    }
}

impl From<&Demand> for DemandFile {
    fn from(d: &Demand) -> Self {
        DemandFile {
            n: d.n,
            entries: d
                .entries
                .iter()
                .map(|e| WeightedPair {
                    src: e.src,
                    dst: e.dst,
                    w: e.p,
                })
                .collect(),
            normalized: true,
            meta: None,
        }
    }
}
