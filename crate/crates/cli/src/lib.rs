//! Experiment runner behind the `danforge` binary.
//!
//! A suite expands into a deterministic list of instances, runs them in
//! parallel and returns [`BenchRecord`]s sorted by instance id.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use danforge::bounds::{brute_force_bnd, entropy_lower_bound};
use danforge::demand::Conditional;
use danforge::construct::{
    build_dary_dan, build_sparse_dan, build_tree_dan, spanner_to_dan, sparse_transform,
    BuildReport,
};
use danforge::generators::{
    clique_lines_pair, generate, star_of_cliques_pair, DivergencePair, Family, GenSpec,
};
use danforge::netgraph::{all_pairs_distortion, neighborhood_distortion};
use danforge::rng::SeededRng;
use danforge::spanners::{build_ldd_spanner, hypercube_spanner, Variant};
use danforge::{Demand, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub instance: String,
    pub family: String,
    pub n: usize,
    /// Directed support size of the demand.
    pub m: usize,
    pub algo: String,
    pub delta_bound_claimed: f64,
    pub max_degree_observed: usize,
    pub epl: f64,
    pub h_xy: f64,
    pub h_yx: f64,
    pub lower_bound: f64,
    pub ratio_epl_over_entropy: f64,
    pub wall_time_ms: f64,
}

pub const CSV_HEADER: [&str; 13] = [
    "instance",
    "family",
    "n",
    "m",
    "algo",
    "delta_bound_claimed",
    "max_degree_observed",
    "epl",
    "h_xy",
    "h_yx",
    "lower_bound",
    "ratio_epl_over_entropy",
    "wall_time_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Sandwich,
    TreeFamily,
    SparseFamily,
    LddFamily,
    HypercubeFamily,
    DistortionDivergence,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Sandwich,
        Suite::TreeFamily,
        Suite::SparseFamily,
        Suite::LddFamily,
        Suite::HypercubeFamily,
        Suite::DistortionDivergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Sandwich => "sandwich",
            Suite::TreeFamily => "tree_family",
            Suite::SparseFamily => "sparse_family",
            Suite::LddFamily => "ldd_family",
            Suite::HypercubeFamily => "hypercube_family",
            Suite::DistortionDivergence => "distortion_divergence",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::BadSpec(format!("unknown suite `{s}`")))
    }
}

pub const SANDWICH_INSTANCES: usize = 200;
pub const TREE_INSTANCES: usize = 100;
pub const SPARSE_INSTANCES: usize = 100;
pub const DIVERGENCE_SIZES: [usize; 3] = [64, 256, 1024];

/// Per-instance seed derived from the suite seed.
fn instance_seed(seed: u64, i: usize) -> u64 {
    SeededRng::split(seed, i as u64).next_u64()
}

fn record(
    instance: &str,
    family: &str,
    d: &Demand,
    r: &BuildReport,
    claimed: f64,
    ms: f64,
) -> Result<BenchRecord> {
    let lb = entropy_lower_bound(d, r.max_degree.max(2))?.lower_bound;
    Ok(BenchRecord {
        instance: instance.to_string(),
        family: family.to_string(),
        n: d.n(),
        m: d.support_size(),
        algo: r.algo.clone(),
        delta_bound_claimed: claimed,
        max_degree_observed: r.max_degree,
        epl: r.epl,
        h_xy: r.h_xy,
        h_yx: r.h_yx,
        lower_bound: lb,
        ratio_epl_over_entropy: r.ratio,
        wall_time_ms: ms,
    })
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64() * 1e3))
}

/// Small random demand for the sandwich suite; every fifth one is a tree.
pub fn sandwich_demand(seed: u64, i: usize) -> Demand {
    let mut rng = SeededRng::new(instance_seed(seed, i));
    let n = 3 + i % 4;
    if i.is_multiple_of(5) {
        let raw: Vec<_> = (1..n)
            .map(|v| {
                let p = rng.index(v);
                if rng.coin(0.5) {
                    (p, v, 0.05 + rng.unit())
                } else {
                    (v, p, 0.05 + rng.unit())
                }
            })
            .collect();
        return Demand::normalize(n, &raw).expect("tree weights are positive");
    }
    loop {
        let density = 0.15 + 0.7 * rng.unit();
        let mut raw = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.coin(density) {
                    raw.push((u, v, 0.05 + rng.unit()));
                }
            }
        }
        if !raw.is_empty() {
            return Demand::normalize(n, &raw).expect("weights are positive");
        }
    }
}

fn oracle_record(id: &str, d: &Demand, delta: usize) -> Result<BenchRecord> {
    let (opt, ms) = timed(|| Ok(brute_force_bnd(d, delta, 7)?.optimum))?;
    let lb = entropy_lower_bound(d, delta.max(2))?.lower_bound;
    let h_xy = d.conditional_entropy(Conditional::XGivenY, 2.0)?;
    let h_yx = d.conditional_entropy(Conditional::YGivenX, 2.0)?;
    Ok(BenchRecord {
        instance: id.to_string(),
        family: "random_small".into(),
        n: d.n(),
        m: d.support_size(),
        algo: "oracle".into(),
        delta_bound_claimed: delta as f64,
        max_degree_observed: delta,
        epl: opt,
        h_xy,
        h_yx,
        lower_bound: lb,
        ratio_epl_over_entropy: opt / (h_xy + h_yx + 2.0),
        wall_time_ms: ms,
    })
}

/// Rows of one sandwich instance: constructions, plus an oracle row at Δ = 2,
/// 3 and at every degree a construction reached.
fn sandwich_instance(seed: u64, i: usize) -> Result<Vec<BenchRecord>> {
    let d = sandwich_demand(seed, i);
    let id = format!("sandwich-{i:04}");
    let family = "random_small";
    let mut rows = Vec::new();
    let g = d.support_graph();
    let mut builds: Vec<(BuildReport, f64, f64)> = Vec::new();
    if d.classify().is_tree {
        let (r, ms) = timed(|| build_tree_dan(&d))?;
        builds.push((r, 8.0, ms));
    }
    let avg = sparse_transform(&d).avg_degree;
    let (r, ms) = timed(|| build_sparse_dan(&d))?;
    builds.push((r, 12.0 * avg.ceil(), ms));
    for delta in [2, 3] {
        let (mut r, ms) = timed(|| build_dary_dan(&d, delta))?;
        r.algo = format!("dary{delta}");
        builds.push((r, (delta + 1) as f64, ms));
    }
    let (r, ms) = timed(|| spanner_to_dan(&d, &g))?;
    builds.push((r, 8.0 * g.degree_stats().avg_degree.ceil(), ms));
    if g.is_connected() {
        let (r, ms) = timed(|| {
            let s = build_ldd_spanner(&g, Variant::Metric)?;
            let mut r = spanner_to_dan(&d, &s.spanner)?;
            r.algo = "ldd".into();
            Ok(r)
        })?;
        builds.push((r, f64::NAN, ms));
    }
    let mut degrees = vec![2, 3];
    for (r, claimed, ms) in &builds {
        rows.push(record(&id, family, &d, r, *claimed, *ms)?);
        degrees.push(r.max_degree.max(1));
    }
    degrees.sort_unstable();
    degrees.dedup();
    for delta in degrees {
        rows.push(oracle_record(&id, &d, delta)?);
    }
    Ok(rows)
}

fn tree_instance(seed: u64, i: usize) -> Result<Vec<BenchRecord>> {
    let n = 10 + (i * 37) % 491;
    let spec = GenSpec::new(Family::Tree, n, instance_seed(seed, i)).with_skew((i % 3) as f64);
    let d = generate(&spec)?;
    let (r, ms) = timed(|| build_tree_dan(&d))?;
    Ok(vec![record(&format!("tree-{i:04}"), "tree", &d, &r, 8.0, ms)?])
}

fn sparse_instance(seed: u64, i: usize) -> Result<Vec<BenchRecord>> {
    let n = 20 + (i * 53) % 481;
    let spec = GenSpec::new(Family::SparseRandom, n, instance_seed(seed, i))
        .with_k(1 + i % 4)
        .with_skew((i % 3) as f64);
    let d = generate(&spec)?;
    let avg = sparse_transform(&d).avg_degree;
    let (r, ms) = timed(|| build_sparse_dan(&d))?;
    let claimed = 12.0 * avg.ceil();
    Ok(vec![record(&format!("sparse-{i:04}"), "sparse_random", &d, &r, claimed, ms)?])
}

fn ldd_instance(seed: u64, side: usize) -> Result<Vec<BenchRecord>> {
    let d = generate(&GenSpec::new(Family::ThickGrid, side, seed).with_k(2))?;
    let g = d.support_graph();
    let mut rows = Vec::new();
    for (variant, name) in [(Variant::Subgraph, "ldd"), (Variant::Metric, "ldd-metric")] {
        let ((r, claimed), ms) = timed(|| {
            let s = build_ldd_spanner(&g, variant)?;
            let mut r = spanner_to_dan(&d, &s.spanner)?;
            r.algo = name.into();
            Ok((r, 8.0 * s.spanner.degree_stats().avg_degree.ceil()))
        })?;
        rows.push(record(&format!("grid-{side:02}"), "thick_grid", &d, &r, claimed, ms)?);
    }
    Ok(rows)
}

fn hypercube_instance(dim: usize) -> Result<Vec<BenchRecord>> {
    let d = generate(&GenSpec::new(Family::Hypercube, dim, 0))?;
    let ((r, claimed), ms) = timed(|| {
        let s = hypercube_spanner(dim as u32)?;
        let mut r = spanner_to_dan(&d, &s.spanner)?;
        r.algo = "hypercube".into();
        Ok((r, 8.0 * s.spanner.degree_stats().avg_degree.ceil()))
    })?;
    Ok(vec![record(&format!("cube-{dim:02}"), "hypercube", &d, &r, claimed, ms)?])
}

/// Two rows per pair: `nd` and `apd`, each carrying the distortion in the
/// `epl` column. The demand is uniform on the graph, so the `nd` value is
/// also the demand's EPL on the spanner.
fn divergence_rows(family: &str, n: usize, p: &DivergencePair) -> Result<Vec<BenchRecord>> {
    let ((nd, apd), ms) = timed(|| {
        Ok((
            neighborhood_distortion(&p.graph, &p.spanner)?,
            all_pairs_distortion(&p.graph, &p.spanner)?,
        ))
    })?;
    let max_degree = p.spanner.degree_stats().max_degree;
    let row = |algo: &str, value: f64| BenchRecord {
        instance: format!("{family}-{n:04}"),
        family: family.into(),
        n: p.graph.n(),
        m: 2 * p.graph.edge_count(),
        algo: algo.into(),
        delta_bound_claimed: f64::NAN,
        max_degree_observed: max_degree,
        epl: value,
        h_xy: f64::NAN,
        h_yx: f64::NAN,
        lower_bound: 1.0,
        ratio_epl_over_entropy: f64::NAN,
        wall_time_ms: ms,
    };
    Ok(vec![row("nd", nd), row("apd", apd)])
}

/// Runs every instance of `suite` in parallel. Records come back sorted by
/// instance id; rows of one instance keep their construction order.
pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<BenchRecord>> {
    let jobs: Vec<Box<dyn Fn() -> Result<Vec<BenchRecord>> + Send + Sync>> = match suite {
        Suite::Sandwich => (0..SANDWICH_INSTANCES)
            .map(|i| Box::new(move || sandwich_instance(seed, i)) as _)
            .collect(),
        Suite::TreeFamily => (0..TREE_INSTANCES)
            .map(|i| Box::new(move || tree_instance(seed, i)) as _)
            .collect(),
        Suite::SparseFamily => (0..SPARSE_INSTANCES)
            .map(|i| Box::new(move || sparse_instance(seed, i)) as _)
            .collect(),
        Suite::LddFamily => [10, 15, 20, 25, 30]
            .into_iter()
            .map(|side| Box::new(move || ldd_instance(seed, side)) as _)
            .collect(),
        Suite::HypercubeFamily => (4..=10)
            .map(|dim| Box::new(move || hypercube_instance(dim)) as _)
            .collect(),
        Suite::DistortionDivergence => DIVERGENCE_SIZES
            .into_iter()
            .flat_map(|n| {
                [
                    Box::new(move || divergence_rows("clique_lines", n, &clique_lines_pair(n)?))
                        as _,
                    Box::new(move || {
                        divergence_rows("star_of_cliques", n, &star_of_cliques_pair(n)?)
                    }) as _,
                ]
            })
            .collect(),
    };
    log::info!("suite {suite}: {} instances", jobs.len());
    let batches: Vec<Vec<BenchRecord>> = jobs
        .par_iter()
        .map(|job| job())
        .collect::<Result<_>>()?;
    let mut records: Vec<BenchRecord> = batches.into_iter().flatten().collect();
    records.sort_by(|a, b| a.instance.cmp(&b.instance));
    Ok(records)
}

/// `%g`-style formatting with 6 significant digits.
pub fn fmt_sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        return format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<W: Write>(out: W, records: &[BenchRecord], timing: bool) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let time = if timing { r.wall_time_ms } else { 0.0 };
        w.write_record([
            r.instance.clone(),
            r.family.clone(),
            r.n.to_string(),
            r.m.to_string(),
            r.algo.clone(),
            fmt_sig6(r.delta_bound_claimed),
            r.max_degree_observed.to_string(),
            fmt_sig6(r.epl),
            fmt_sig6(r.h_xy),
            fmt_sig6(r.h_yx),
            fmt_sig6(r.lower_bound),
            fmt_sig6(r.ratio_epl_over_entropy),
            fmt_sig6(time),
        ])?;
    }
    w.flush()?;
    Ok(())
}
