use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use danforge::bounds::{brute_force_bnd, entropy_lower_bound, DEFAULT_ORACLE_MAX_N};
use danforge::construct::{
    build_dary_dan, build_sparse_dan, build_tree_dan, spanner_to_dan, BuildReport,
};
use danforge::demand::{Conditional, DemandFile};
use danforge::generators::{generate, Family, GenSpec};
use danforge::netgraph::{epl, UNREACHABLE};
use danforge::spanners::{build_ldd_spanner, greedy_spanner, hypercube_spanner, Variant};
use danforge::{Demand, HostNetwork};
use danforge_cli::{run_suite, write_csv, Suite};

#[derive(Parser)]
#[command(name = "danforge", version, about = "Bounded-degree demand-aware network design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuildAlgo {
    Tree,
    Sparse,
    Dary,
    Spanner2dan,
    Ldd,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpannerAlgo {
    Ldd,
    LddMetric,
    Greedy,
    Hypercube,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a demand and write it as JSON.
    Gen {
        #[arg(long)]
        family: Family,
        /// Node count (dimension for hypercube, side for thick_grid).
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Zipf exponent for the weights.
        #[arg(long)]
        skew: Option<f64>,
        /// Family parameter: arcs per node, degree, or grid radius.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a network for a demand. Prints the build report.
    Build {
        #[arg(long)]
        demand: PathBuf,
        #[arg(long, value_enum)]
        algo: BuildAlgo,
        #[arg(long, required_if_eq("algo", "dary"))]
        delta: Option<usize>,
        /// Spanner for spanner2dan; defaults to the demand's support.
        #[arg(long)]
        spanner: Option<PathBuf>,
        /// Where to write the network (`.json` selects the JSON form).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected path length of a demand on a graph.
    Eval {
        #[arg(long)]
        demand: PathBuf,
        #[arg(long)]
        graph: PathBuf,
    },
    /// Entropy lower bound at degree delta.
    Lb {
        #[arg(long)]
        demand: PathBuf,
        #[arg(long)]
        delta: usize,
    },
    /// Exact optimum by exhaustive search (small n only).
    Oracle {
        #[arg(long)]
        demand: PathBuf,
        #[arg(long)]
        delta: usize,
        #[arg(long, default_value_t = DEFAULT_ORACLE_MAX_N)]
        max_n: usize,
    },
    /// Build a spanner of a graph or of a demand's support.
    Spanner {
        #[arg(long, value_enum)]
        algo: SpannerAlgo,
        #[arg(long, conflicts_with = "demand")]
        graph: Option<PathBuf>,
        #[arg(long)]
        demand: Option<PathBuf>,
        /// Stretch for greedy.
        #[arg(long, default_value_t = 3)]
        t: u32,
        /// Dimension for hypercube; inferred from the input size if absent.
        #[arg(long)]
        dim: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark suite and write CSV.
    Bench {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write 0 in the wall time column.
        #[arg(long)]
        no_timing: bool,
    },
    /// Check a network against a degree bound and the demand.
    Verify {
        #[arg(long)]
        demand: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        delta: usize,
    },
}

/// A failed check whose report already went to stdout.
#[derive(Debug)]
struct VerifyFailed(String);

impl std::fmt::Display for VerifyFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for VerifyFailed {}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_demand(path: &Path) -> anyhow::Result<Demand> {
    Ok(Demand::from_json_str(&read(path)?)?)
}

fn load_graph(path: &Path) -> anyhow::Result<HostNetwork> {
    let text = read(path)?;
    Ok(if text.trim_start().starts_with('{') {
        HostNetwork::from_json_str(&text)?
    } else {
        HostNetwork::from_text(&text)?
    })
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}

fn write_graph(path: &Path, g: &HostNetwork) -> anyhow::Result<()> {
    let body = if is_json(path) {
        g.to_json_string()
    } else {
        g.to_text()
    };
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, body: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            if !body.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn print_json(v: &serde_json::Value) -> anyhow::Result<()> {
    emit(None, &serde_json::to_string_pretty(v)?)
}

/// JSON has no infinity; unreachable values become null.
fn finite(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

fn build(
    d: &Demand,
    algo: BuildAlgo,
    delta: Option<usize>,
    spanner: Option<&Path>,
) -> anyhow::Result<BuildReport> {
    Ok(match algo {
        BuildAlgo::Tree => build_tree_dan(d)?,
        BuildAlgo::Sparse => build_sparse_dan(d)?,
        BuildAlgo::Dary => {
            build_dary_dan(d, delta.expect("clap requires --delta for dary"))?
        }
        BuildAlgo::Spanner2dan => {
            let s = match spanner {
                Some(p) => load_graph(p)?,
                None => d.support_graph(),
            };
            spanner_to_dan(d, &s)?
        }
        BuildAlgo::Ldd => {
            let s = build_ldd_spanner(&d.support_graph(), Variant::Subgraph)?;
            let mut r = spanner_to_dan(d, &s.spanner)?;
            r.algo = "ldd".into();
            r
        }
    })
}

fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Gen {
            family,
            n,
            seed,
            skew,
            k,
            out,
        } => {
            let mut spec = GenSpec::new(family, n, seed);
            spec.skew = skew;
            spec.k = k;
            let d = generate(&spec)?;
            let mut file = DemandFile::from(&d);
            file.meta = Some(spec.metadata());
            emit(out.as_deref(), &serde_json::to_string_pretty(&file)?)
        }
        Command::Build {
            demand,
            algo,
            delta,
            spanner,
            out,
        } => {
            let d = load_demand(&demand)?;
            let r = build(&d, algo, delta, spanner.as_deref())?;
            if let Some(p) = &out {
                write_graph(p, &r.network)?;
            }
            emit(None, &r.to_json_string())
        }
        Command::Eval { demand, graph } => {
            let d = load_demand(&demand)?;
            let g = load_graph(&graph)?;
            let e = epl(&d, &g)?;
            let stats = g.degree_stats();
            print_json(&json!({
                "epl": finite(e),
                "connected": e.is_finite(),
                "max_degree": stats.max_degree,
                "avg_degree": stats.avg_degree,
                "h_xy": d.conditional_entropy(Conditional::XGivenY, 2.0)?,
                "h_yx": d.conditional_entropy(Conditional::YGivenX, 2.0)?,
            }))
        }
        Command::Lb { demand, delta } => {
            let d = load_demand(&demand)?;
            print_json(&serde_json::to_value(entropy_lower_bound(&d, delta)?)?)
        }
        Command::Oracle {
            demand,
            delta,
            max_n,
        } => {
            let d = load_demand(&demand)?;
            let r = brute_force_bnd(&d, delta, max_n)?;
            print_json(&json!({
                "optimum": finite(r.optimum),
                "witness_edges": r.witness.edges(),
                "searched": r.searched,
            }))
        }
        Command::Spanner {
            algo,
            graph,
            demand,
            t,
            dim,
            out,
        } => {
            let g = match (&graph, &demand) {
                (Some(p), _) => Some(load_graph(p)?),
                (None, Some(p)) => Some(load_demand(p)?.support_graph()),
                (None, None) => None,
            };
            let result = match algo {
                SpannerAlgo::Hypercube => {
                    let dim = match (dim, &g) {
                        (Some(d), _) => d,
                        (None, Some(g)) if g.n().is_power_of_two() => g.n().trailing_zeros(),
                        _ => bail!(danforge::Error::BadSpec(
                            "hypercube needs --dim or a 2^d-node input".into()
                        )),
                    };
                    hypercube_spanner(dim)?
                }
                other => {
                    let Some(g) = &g else {
                        bail!(danforge::Error::BadSpec("needs --graph or --demand".into()));
                    };
                    match other {
                        SpannerAlgo::Ldd => build_ldd_spanner(g, Variant::Subgraph)?,
                        SpannerAlgo::LddMetric => build_ldd_spanner(g, Variant::Metric)?,
                        _ => greedy_spanner(g, t)?,
                    }
                }
            };
            if let Some(p) = &out {
                write_graph(p, &result.spanner)?;
            }
            emit(None, &result.to_json_string())
        }
        Command::Bench {
            suite,
            seed,
            out,
            no_timing,
        } => {
            let suite: Suite = suite.parse()?;
            // Suites feed non-uniform demands to spanner builds on purpose.
            if std::env::var_os("RUST_LOG").is_none() {
                log::set_max_level(log::LevelFilter::Error);
            }
            let records = run_suite(suite, seed)?;
            let mut buf = Vec::new();
            write_csv(&mut buf, &records, !no_timing)?;
            match out {
                Some(p) => fs::write(&p, buf).with_context(|| format!("writing {}", p.display())),
                None => Ok(io::stdout().lock().write_all(&buf)?),
            }
        }
        Command::Verify {
            demand,
            graph,
            delta,
        } => {
            let d = load_demand(&demand)?;
            let g = load_graph(&graph)?;
            let e = epl(&d, &g)?;
            let max_degree = g.degree_stats().max_degree;
            let disconnected = d
                .entries()
                .iter()
                .filter(|x| g.bfs_distances(x.src)[x.dst] == UNREACHABLE)
                .count();
            let lb = if delta >= 2 {
                finite(entropy_lower_bound(&d, delta)?.lower_bound)
            } else {
                serde_json::Value::Null
            };
            let degree_ok = max_degree <= delta;
            let ok = degree_ok && disconnected == 0;
            print_json(&json!({
                "ok": ok,
                "delta": delta,
                "max_degree": max_degree,
                "degree_ok": degree_ok,
                "disconnected_pairs": disconnected,
                "epl": finite(e),
                "lower_bound": lb,
            }))?;
            if !ok {
                return Err(VerifyFailed(if degree_ok {
                    format!("{disconnected} demanded pairs disconnected")
                } else {
                    format!("max degree {max_degree} exceeds {delta}")
                })
                .into());
            }
            Ok(())
        }
    }
}

fn init_threads() {
    if let Some(n) = std::env::var("DANFORGE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = if let Some(de) = e.downcast_ref::<danforge::Error>() {
                de.kind()
            } else if e.downcast_ref::<VerifyFailed>().is_some() {
                "VerificationFailed"
            } else if e.downcast_ref::<io::Error>().is_some() {
                "Io"
            } else {
                "Error"
            };
            let msg = json!({ "error": kind, "message": format!("{e:#}") });
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}
