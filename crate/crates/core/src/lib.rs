//! Design of bounded-degree demand-aware networks.
//!
//! A [`Demand`] is a probability distribution over ordered pairs of distinct
//! nodes. The crate builds undirected host networks of bounded degree whose
//! expected path length under the demand is close to the conditional-entropy
//! lower bound, and ships exhaustive oracles for checking them on small
//! instances.
//!
//! Module map:
//!
//! * [`demand`]: demand distributions, marginals, conditional entropy.
//! * [`netgraph`]: host networks, BFS distances, EPL, distortion metrics.
//! * [`trees`]: Δ-ary Huffman trees, leaf promotion, balanced trees.
//! * [`construct`]: the tree, sparse, degree-reduction, spanner and Δ-ary builders.
//! * [`spanners`]: 2-nets, locally-doubling spanners, greedy and hypercube spanners.
//! * [`bounds`]: entropy lower bound and brute-force oracles.
//! * [`generators`]: seeded synthetic demand families.

pub mod bounds;
pub mod construct;
pub mod demand;
mod error;
pub mod generators;
pub mod netgraph;
pub mod rng;
pub mod spanners;
pub mod trees;

pub use demand::{Demand, Distribution};
pub use error::{Error, Result};
pub use netgraph::HostNetwork;

/// Absolute tolerance for probability sums and equality checks.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Sums `values` with a fixed pairwise reduction tree so that results do not
/// depend on how the values were produced (sequentially or in parallel).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        len if len <= 8 => values.iter().sum(),
        len => {
            let (lo, hi) = values.split_at(len / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}
