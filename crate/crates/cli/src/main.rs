//! Command-line front end: spectra, nodal counts, Morse reports, ensemble
//! verification and the band/duality scan tables.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::warn;
use serde_json::json;

use nodalmag::criticality::{morse_report_with, CriticalityConfig, CriticalityReport};
use nodalmag::duality::{band_scan, dual_scan, ScanTable};
use nodalmag::harness::io::graph_hash;
use nodalmag::harness::verify::verify_graph;
use nodalmag::harness::{parse_graph_file, run_verify, InstanceSpec, VerificationSummary, VerifyConfig, SCHEMA_VERSION};
use nodalmag::nodal::nodal_report;
use nodalmag::operators::{build_magnetic, build_plain, MagneticPhases};
use nodalmag::spectral::{eig, eigenvalues};
use nodalmag::{CycleStructure, Graph};

#[derive(Parser)]
#[command(name = "nodalmag", version, about = "Nodal surplus and magnetic Morse index on discrete graphs")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the graph operator, optionally with magnetic phases.
    Spectrum {
        graph: PathBuf,
        /// Comma-separated phases, one per surplus edge.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Option<Vec<f64>>,
    },
    /// Nodal count and surplus of every level.
    Nodal { graph: PathBuf },
    /// Hessian of the eigenvalue at zero field and its Morse index.
    Morse {
        graph: PathBuf,
        /// Only this level (1-based).
        #[arg(long)]
        level: Option<usize>,
    },
    /// Check Morse index = nodal surplus on a random ensemble or one graph.
    Verify(VerifyArgs),
    /// Tabulate the bands over the phase torus.
    Bandscan {
        graph: PathBuf,
        #[arg(long)]
        samples: usize,
        /// Only this level (1-based).
        #[arg(long)]
        level: Option<usize>,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Magnetic phase 2x against cut parameter tan(x) on one surplus edge.
    Dualscan {
        graph: PathBuf,
        /// Surplus edge: its index among the surplus edges, or `u,v`.
        #[arg(long)]
        edge: String,
        #[arg(long)]
        samples: usize,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Verify this graph file instead of a random ensemble.
    #[arg(long, conflicts_with_all = ["graphs", "seed"])]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    graphs: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    min_n: usize,
    #[arg(long, default_value_t = 12)]
    max_n: usize,
    #[arg(long, default_value_t = 0)]
    min_beta: usize,
    #[arg(long, default_value_t = 4)]
    max_beta: usize,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    q_low: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    q_high: f64,
    /// Maximum finite-difference gradient.
    #[arg(long, default_value_t = 1e-6, allow_hyphen_values = true)]
    gradient_tol: f64,
    /// Maximum eigenvalue error after transfer to the cut tree.
    #[arg(long, default_value_t = 1e-9, allow_hyphen_values = true)]
    transfer_tol: f64,
    /// Write the JSON summary here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(path: &Path) -> anyhow::Result<Graph> {
    let loaded = parse_graph_file(path)?;
    if loaded.potential_defaulted {
        warn!("{}: no \"q\" given, using the zero potential", path.display());
    }
    Ok(loaded.graph)
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

fn opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map_or_else(|| "-".to_string(), |v| v.to_string())
}

fn spectrum(path: &Path, alpha: Option<Vec<f64>>, json: bool) -> anyhow::Result<String> {
    let g = load(path)?;
    let cs = CycleStructure::new(&g, None);
    let h = match &alpha {
        Some(a) => build_magnetic(&g, &cs, &MagneticPhases::new(a.clone()))?,
        None => build_plain(&g),
    };
    let values = eigenvalues(&h);
    if json {
        return Ok(to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "graph_hash": graph_hash(&g),
            "betti": cs.betti(),
            "alpha": alpha.unwrap_or_else(|| vec![0.0; cs.betti()]),
            "eigenvalues": values,
        })));
    }
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{:>3}  {v:.16e}\n", i + 1))
        .collect())
}

fn nodal(path: &Path, json: bool) -> anyhow::Result<String> {
    let g = load(path)?;
    let cs = CycleStructure::new(&g, None);
    let sd = eig(&build_plain(&g))?;
    let reports = (1..=g.n_vertices())
        .map(|l| nodal_report(&g, &cs, &sd, l))
        .collect::<Result<Vec<_>, _>>()?;
    if json {
        return Ok(to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "graph_hash": graph_hash(&g),
            "betti": cs.betti(),
            "eigenvalues": sd.eigenvalues(),
            "levels": reports,
        })));
    }
    let mut out = format!("betti {}\nlevel  eigenvalue               phi  surplus  note\n", cs.betti());
    for (r, lam) in reports.iter().zip(sd.eigenvalues()) {
        out.push_str(&format!(
            "{:>5}  {lam:>23.16e}  {:>3}  {:>7}  {}\n",
            r.level,
            opt(r.phi),
            opt(r.surplus),
            r.reason.as_deref().unwrap_or("")
        ));
    }
    Ok(out)
}

fn morse_line(r: &CriticalityReport) -> String {
    let status = match (r.theorem_holds, &r.skip_reason) {
        (Some(true), _) => "holds".to_string(),
        (Some(false), _) => "FAILS".to_string(),
        (None, Some(reason)) => format!("skipped ({reason})"),
        (None, None) => "skipped".to_string(),
    };
    format!(
        "{:>5}  {:>23.16e}  {:>7}  {:>5}  {status}\n",
        r.level,
        r.eigenvalue,
        opt(r.surplus),
        opt(r.morse_index)
    )
}

fn morse(path: &Path, level: Option<usize>, json: bool) -> anyhow::Result<String> {
    let g = load(path)?;
    let cs = CycleStructure::new(&g, None);
    let sd = eig(&build_plain(&g))?;
    let config = CriticalityConfig::default();
    let levels: Vec<usize> = match level {
        Some(l) => vec![l],
        None => (1..=g.n_vertices()).collect(),
    };
    let reports = levels
        .iter()
        .map(|&l| morse_report_with(&g, &cs, &sd, l, &config))
        .collect::<Result<Vec<_>, _>>()?;
    if json {
        return Ok(match level {
            Some(_) => to_json(&reports[0]),
            None => to_json(&reports),
        });
    }
    let mut out = format!("betti {}\nlevel  eigenvalue               surplus  morse  theorem\n", cs.betti());
    for r in &reports {
        out.push_str(&morse_line(r));
    }
    Ok(out)
}

fn summary_text(s: &VerificationSummary) -> String {
    let mut out = format!(
        "instances {}  levels {}  generic {}  passes {}  fails {}  skipped {}\n",
        s.instances, s.levels_checked, s.generic_levels, s.passes, s.fails, s.skipped
    );
    for (reason, count) in &s.skipped_by_reason {
        out.push_str(&format!("  skipped {reason}: {count}\n"));
    }
    for f in &s.failures {
        out.push_str(&format!("FAIL instance {} level {}: {}\n", f.instance, f.level, f.reasons.join("; ")));
    }
    for e in &s.instance_errors {
        out.push_str(&format!("ERROR instance {}: {}\n", e.instance, e.message));
    }
    out
}

fn verify(args: VerifyArgs, json: bool) -> anyhow::Result<(String, bool)> {
    let mut config = VerifyConfig::default();
    config.criticality.gradient_tol = args.gradient_tol;
    config.transfer_tol = args.transfer_tol;
    let summary = match &args.graph {
        Some(path) => verify_graph(&load(path)?, &config),
        None => {
            let spec = InstanceSpec {
                seed: args.seed,
                min_n: args.min_n,
                max_n: args.max_n,
                min_beta: args.min_beta,
                max_beta: args.max_beta,
                q_low: args.q_low,
                q_high: args.q_high,
                count: args.graphs,
            };
            run_verify(&spec, &config)?
        }
    };
    if let Some(out) = &args.out {
        fs::write(out, format!("{}\n", summary.to_json())).with_context(|| format!("writing {}", out.display()))?;
    }
    let text = if json {
        format!("{}\n", summary.to_json())
    } else {
        summary_text(&summary)
    };
    Ok((text, summary.ok()))
}

fn parse_edge(spec: &str, cs: &CycleStructure) -> anyhow::Result<(usize, usize)> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [j] => {
            let j: usize = j.parse().with_context(|| format!("invalid edge `{spec}`"))?;
            match cs.surplus_edges().get(j) {
                Some(&e) => Ok(e),
                None => bail!("surplus edge index {j} out of range (betti {})", cs.betti()),
            }
        }
        [u, v] => {
            let u: usize = u.parse().with_context(|| format!("invalid edge `{spec}`"))?;
            let v: usize = v.parse().with_context(|| format!("invalid edge `{spec}`"))?;
            Ok((u, v))
        }
        _ => bail!("invalid edge `{spec}`: expected an index or `u,v`"),
    }
}

fn emit_table(table: &ScanTable, out: Option<&Path>, json: bool) -> anyhow::Result<String> {
    let text = if json {
        format!("{}\n", table.to_json())
    } else {
        table.to_csv()
    };
    match out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn run(cli: Cli) -> anyhow::Result<(String, bool)> {
    let json = cli.json;
    let text = match cli.command {
        Command::Spectrum { graph, alpha } => spectrum(&graph, alpha, json)?,
        Command::Nodal { graph } => nodal(&graph, json)?,
        Command::Morse { graph, level } => morse(&graph, level, json)?,
        Command::Verify(args) => return verify(args, json),
        Command::Bandscan {
            graph,
            samples,
            level,
            out,
        } => {
            let g = load(&graph)?;
            let cs = CycleStructure::new(&g, None);
            emit_table(&band_scan(&g, &cs, level, samples)?, out.as_deref(), json)?
        }
        Command::Dualscan {
            graph,
            edge,
            samples,
            out,
        } => {
            let g = load(&graph)?;
            let cs = CycleStructure::new(&g, None);
            let e = parse_edge(&edge, &cs)?;
            emit_table(&dual_scan(&g, &cs, e, samples)?, out.as_deref(), json)?
        }
    };
    Ok((text, true))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok((text, ok)) => {
            print!("{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            if json {
                eprintln!("{}", json!({ "error": format!("{e:#}") }));
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}
