use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use cdplan::cdtree::CdTree;
use cdplan::constraints::constrained_planar_bounded;
use cdplan::io::export::{cdtree_dot, cdtree_json, witness_json};
use cdplan::io::{generate, parse_instance, GeneratorConfig, Instance, Mode};
use cdplan::planarity::search_capacity;
use cdplan::reductions::{constrained_to_flat_named, flat_to_constrained_named, test_fixed_embedding, Variant};
use cdplan::solver::{classify, test_connected, test_exact_tree, Verdict};
use cdplan::Error;

#[derive(Parser)]
#[command(name = "cdplan", version, about = "C-planarity testing of clustered graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide c-planarity of a clustered instance or feasibility of a constrained one.
    Test {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = AlgorithmArg::Auto)]
        algorithm: AlgorithmArg,
        /// Print the witness rotation systems of a positive answer.
        #[arg(long)]
        emit_witness: bool,
        #[arg(long)]
        json: bool,
    },
    /// Print the cd-tree of a clustered instance.
    Cdtree {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
    },
    /// Translate between flat clustered instances and constrained instances.
    Reduce {
        file: PathBuf,
        #[arg(long)]
        variant: Variant,
        /// Defaults to the direction that fits the input kind.
        #[arg(long, value_enum)]
        direction: Option<Direction>,
    },
    /// Print a random clustered instance.
    Gen {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        extra_edges: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Flat)]
        mode: ModeArg,
        #[arg(long, default_value_t = 2)]
        clusters: usize,
        #[arg(long, default_value_t = 2)]
        min_cluster: usize,
        #[arg(long, default_value_t = 4)]
        max_cluster: usize,
        #[arg(long)]
        connected_clusters: bool,
        #[arg(long)]
        max_outgoing: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Structural profile of a clustered instance as JSON.
    Stats { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Auto,
    Connected,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    ToConstrained,
    ToClustered,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Flat,
    Nested,
}

const FEASIBLE: u8 = 0;
const INFEASIBLE: u8 = 1;
const INPUT_ERROR: u8 = 2;
const CAPACITY: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("cdplan: {e}");
            ExitCode::from(match e {
                Error::Capacity { .. } => CAPACITY,
                _ => INPUT_ERROR,
            })
        }
    }
}

fn read(path: &PathBuf) -> Result<Instance, Error> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map(|_| s)
    } else {
        std::fs::read_to_string(path)
    }
    .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Test { file, algorithm, emit_witness, json } => test(read(&file)?, algorithm, emit_witness, json),
        Command::Cdtree { file, format } => {
            let Instance::Clustered { cg, names, .. } = read(&file)? else {
                return Err(Error::InvalidArgument("cdtree needs a clustered instance".into()));
            };
            let ct = CdTree::build(&cg)?;
            match format {
                Format::Dot => emit(&cdtree_dot(&ct, &names)),
                Format::Json => emit(&format!("{}\n", pretty(&cdtree_json(&ct, &names)))),
            }
            Ok(FEASIBLE)
        }
        Command::Reduce { file, variant, direction } => {
            let out = match (read(&file)?, direction) {
                (Instance::Clustered { cg, names, embedding, .. }, None | Some(Direction::ToConstrained)) => {
                    let r = flat_to_constrained_named(&cg, variant, embedding.as_ref(), &names)?;
                    Instance::Constrained { ci: r.instance, names: r.names, trivially_infeasible: r.trivially_infeasible }
                }
                (Instance::Constrained { ci, names, .. }, None | Some(Direction::ToClustered)) => {
                    let r = constrained_to_flat_named(&ci, variant, &names)?;
                    Instance::Clustered {
                        cg: r.instance,
                        names: r.names,
                        embedding: r.embedding,
                        trivially_infeasible: r.trivially_infeasible,
                    }
                }
                _ => return Err(Error::InvalidArgument("direction does not match the input kind".into())),
            };
            emit(&format!("{}\n", out.to_json()));
            Ok(FEASIBLE)
        }
        Command::Gen { n, extra_edges, mode, clusters, min_cluster, max_cluster, connected_clusters, max_outgoing, seed } => {
            let cfg = GeneratorConfig {
                n,
                extra_edges,
                mode: match mode {
                    ModeArg::Flat => Mode::Flat,
                    ModeArg::Nested => Mode::Nested,
                },
                clusters,
                min_cluster,
                max_cluster,
                connected_clusters,
                max_outgoing,
                seed,
            };
            emit(&format!("{}\n", Instance::clustered(generate(&cfg)?).to_json()));
            Ok(FEASIBLE)
        }
        Command::Stats { file } => {
            let Instance::Clustered { cg, .. } = read(&file)? else {
                return Err(Error::InvalidArgument("stats needs a clustered instance".into()));
            };
            let ct = CdTree::build(&cg)?;
            let g = cg.graph();
            let out = json!({
                "vertices": g.num_vertices(),
                "edges": g.num_edges(),
                "clusters": cg.clusters().len() - 1,
                "size_c": ct.size_c(),
                "total_cut_size": ct.total_cut_size(),
                "profile": classify(&cg)?,
            });
            emit(&format!("{}\n", pretty(&out)));
            Ok(FEASIBLE)
        }
    }
}

fn test(instance: Instance, algorithm: AlgorithmArg, emit_witness: bool, json: bool) -> Result<u8, Error> {
    let (answer, mut report) = match instance {
        Instance::Constrained { ci, trivially_infeasible, .. } => {
            let ok = !trivially_infeasible && constrained_planar_bounded(&ci, search_capacity())?.is_some();
            (ok, json!({"kind": "constrained", "feasible": ok}))
        }
        Instance::Clustered { trivially_infeasible: true, .. } => {
            (false, json!({"kind": "clustered", "c_planar": false, "reason": "trivially infeasible"}))
        }
        Instance::Clustered { cg, embedding: Some(r), .. } => {
            if !cg.is_flat() {
                return Err(Error::Unsupported("a fixed embedding is only supported for flat clusterings".into()));
            }
            let ok = test_fixed_embedding(&cg, &r)?;
            (ok, json!({"kind": "clustered", "c_planar": ok, "fixed_embedding": true}))
        }
        Instance::Clustered { cg, names, embedding: None, .. } => {
            let ct = CdTree::build(&cg)?;
            let verdict: Verdict = match algorithm {
                AlgorithmArg::Exact => test_exact_tree(&ct)?,
                AlgorithmArg::Connected => test_connected(&cg)?,
                AlgorithmArg::Auto if classify(&cg)?.all_connected => test_connected(&cg)?,
                AlgorithmArg::Auto => test_exact_tree(&ct)?,
            };
            let mut report = json!({
                "kind": "clustered",
                "c_planar": verdict.c_planar,
                "algorithm": verdict.algorithm,
                "stats": verdict.stats,
            });
            if emit_witness {
                // The connected route carries no witness; recompute one.
                let w = match verdict.witness {
                    Some(w) => Some(w),
                    None if verdict.c_planar => test_exact_tree(&ct)?.witness,
                    None => None,
                };
                report["witness"] = w.map(|w| witness_json(&ct, &w, &names)).unwrap_or_default();
            }
            (verdict.c_planar, report)
        }
    };
    if json {
        emit(&format!("{}\n", pretty(&report)));
    } else {
        let feasible_word = if report["kind"] == "constrained" { "feasible" } else { "c-planar" };
        emit(&format!("{}{feasible_word}\n", if answer { "" } else { "not " }));
        if let Some(w) = report.get_mut("witness").map(std::mem::take) {
            if !w.is_null() {
                emit(&format!("{}\n", pretty(&w)));
            }
        }
    }
    Ok(if answer { FEASIBLE } else { INFEASIBLE })
}

/// Writes to stdout; a closed pipe is not an error worth reporting.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize")
}
