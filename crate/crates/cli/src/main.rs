use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use krpack::constructions::{
    b1_graph, bottle_graph, canonical_graph, h_qr_graph, k_r_minus, prop3_extremal, prop4_extremal, CanonicalSpec,
};
use krpack::hall::{default_tau, pack_h_qr};
use krpack::io::{parse_edge_list, write_edge_list, ClassFile};
use krpack::pipeline::{run_pipeline, threshold_table, PipelineConfig, TauLadder};
use krpack::rational::parse_rational;
use krpack::solver::{find_perfect_packing_with, max_packing_size_with, SolverConfig};
use krpack::tidy::tidy;
use krpack::{Error, Graph};

#[derive(Parser)]
#[command(name = "krpack", version, about = "Perfect K_r^- packings and the tools around them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Colouring invariants of a pattern graph.
    Invariants { pattern: PathBuf },
    /// Exact perfect (or maximum) packing of a pattern into a host.
    Pack {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        host: PathBuf,
        #[arg(long)]
        max: bool,
        #[arg(long, default_value_t = 60)]
        budget_secs: u64,
    },
    /// Write a named construction as an edge list plus class labels.
    Construct {
        #[command(subcommand)]
        kind: Construction,
        /// Edge-list output; stdout if omitted.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
        /// Class-label JSON output.
        #[arg(long, global = true)]
        classes: Option<PathBuf>,
    },
    /// Pack H_{q,r} into a (q+1)-partite host.
    Hallpack {
        #[arg(long)]
        host: PathBuf,
        #[arg(long)]
        classes: PathBuf,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        tau: Option<String>,
    },
    /// Tidy a host around given sparse sets.
    Tidy {
        #[arg(long)]
        host: PathBuf,
        #[arg(long)]
        sparse: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        tau: String,
    },
    /// Decide a perfect K_r^- packing with the structural pipeline.
    Pipeline {
        #[arg(long)]
        host: PathBuf,
        #[arg(long)]
        r: usize,
        /// JSON list of r-1 rationals, tau_1 first.
        #[arg(long)]
        ladder: Option<PathBuf>,
        #[arg(long, default_value_t = 60)]
        budget_secs: u64,
        /// Write the stage trace here as well.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Minimum-degree threshold for K_r^- packings.
    ThresholdTable {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        n_max: usize,
    },
}

#[derive(Subcommand)]
enum Construction {
    /// K_r minus an edge.
    Krminus {
        #[arg(long)]
        r: usize,
    },
    /// Bottle graph of a pattern file, or of K_r^- with --r.
    Bottle {
        #[arg(long, conflicts_with = "r")]
        pattern: Option<PathBuf>,
        #[arg(long)]
        r: Option<usize>,
    },
    /// Extremal (r-1)-partite host on kr vertices with no perfect K_r^- packing.
    Prop3 {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        k: usize,
    },
    /// Extremal host for a complete multipartite pattern.
    Prop4 {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// K(q, n).
    Canonical {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
    },
    /// q disjoint K_{r-q-1} followed by r-q-2 disjoint K_{r-q}^-.
    B1 {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        q: usize,
    },
    /// Complete (q+1)-partite H_{q,r} with parts r, ..., r, 1.
    Hqr {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        r: usize,
    },
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_edge_list(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_classes(path: &Path) -> Result<ClassFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ClassFile::parse(&text)?)
}

fn emit(text: &str) -> Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn print<T: Serialize>(value: &T) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn solver_config(budget_secs: u64) -> SolverConfig {
    SolverConfig {
        budget: Some(Duration::from_secs(budget_secs)),
        ..SolverConfig::default()
    }
}

fn build(kind: &Construction) -> Result<Graph> {
    Ok(match kind {
        Construction::Krminus { r } => k_r_minus(*r)?,
        Construction::Bottle { pattern, r } => {
            let h = match (pattern, r) {
                (Some(p), _) => read_graph(p)?,
                (None, Some(r)) => k_r_minus(*r)?,
                (None, None) => bail!("bottle needs --pattern or --r"),
            };
            bottle_graph(&h)?
        }
        Construction::Prop3 { r, k } => prop3_extremal(*r, *k)?,
        Construction::Prop4 { pattern, k } => prop4_extremal(&read_graph(pattern)?, *k)?,
        Construction::Canonical { r, q, n } => canonical_graph(&CanonicalSpec::new(*r, *q, *n)?)?,
        Construction::B1 { r, q } => b1_graph(*r, *q)?,
        Construction::Hqr { q, r } => h_qr_graph(*q, *r)?,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Invariants { pattern } => {
            let h = read_graph(&pattern)?;
            print(&krpack::invariants::summarize(&h)?)
        }
        Command::Pack {
            pattern,
            host,
            max,
            budget_secs,
        } => {
            let h = read_graph(&pattern)?;
            let g = read_graph(&host)?;
            let cfg = solver_config(budget_secs);
            if max {
                let rep = max_packing_size_with(&h, &g, &cfg)?;
                print(&json!({
                    "decision": "max",
                    "size": rep.size,
                    "packing": rep.witness,
                    "nodes_explored": rep.nodes_explored,
                    "elapsed": rep.elapsed.as_secs_f64(),
                }))
            } else {
                match find_perfect_packing_with(&h, &g, &cfg) {
                    Ok(rep) => print(&json!({
                        "decision": if rep.packing.is_some() { "packed" } else { "absent" },
                        "packing": rep.packing,
                        "nodes_explored": rep.nodes_explored,
                        "elapsed": rep.elapsed.as_secs_f64(),
                    })),
                    Err(Error::Timeout { nodes }) => print(&json!({
                        "decision": "timeout",
                        "packing": null,
                        "nodes_explored": nodes,
                        "elapsed": budget_secs as f64,
                    })),
                    Err(e) => Err(e.into()),
                }
            }
        }
        Command::Construct { kind, out, classes } => {
            let g = build(&kind)?;
            let text = write_edge_list(&g);
            match &out {
                Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
                None => emit(&text)?,
            }
            if let Some(p) = &classes {
                let cf = ClassFile::from_graph_labels(&g).context("construction carries no class labels")?;
                fs::write(p, cf.to_json()).with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(())
        }
        Command::Hallpack {
            host,
            classes,
            q,
            r,
            tau,
        } => {
            let g = read_graph(&host)?;
            let p = read_classes(&classes)?.to_partition(g.n())?;
            let tau = match tau {
                Some(t) => parse_rational(&t)?,
                None => default_tau(q, r),
            };
            print(&pack_h_qr(&g, &p, q, r, tau)?)
        }
        Command::Tidy { host, sparse, r, tau } => {
            let g = read_graph(&host)?;
            let sets = read_classes(&sparse)?.to_partition(g.n())?.into_classes();
            let result = tidy(&g, &sets, r, parse_rational(&tau)?)?;
            print(&result)
        }
        Command::Pipeline {
            host,
            r,
            ladder,
            budget_secs,
            trace,
        } => {
            let g = read_graph(&host)?;
            let ladder = match ladder {
                Some(p) => {
                    let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    let raw: Vec<String> = serde_json::from_str(&text).context("ladder must be a JSON list of strings")?;
                    let values = raw.iter().map(|s| parse_rational(s)).collect::<krpack::Result<Vec<_>>>()?;
                    Some(TauLadder::new(r, values)?)
                }
                None => None,
            };
            let cfg = PipelineConfig {
                ladder,
                solver: solver_config(budget_secs),
                ..PipelineConfig::default()
            };
            let out = run_pipeline(&g, r, &cfg)?;
            if let Some(p) = &trace {
                fs::write(p, serde_json::to_string_pretty(&out.stage_trace)?)
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            print(&out)
        }
        Command::ThresholdTable { r, n_max } => {
            let rows: Vec<_> = threshold_table(r, n_max)?
                .into_iter()
                .map(|(n, min_degree)| json!({ "n": n, "min_degree": min_degree }))
                .collect();
            print(&rows)
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
