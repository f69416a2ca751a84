//! `detent`: reproducible determinantal-process experiments from the
//! command line.
//!
//! Every subcommand is a pure function of its input files, flags, and seed:
//! the primary output (stdout, or the `--out` file) is byte-identical
//! across runs. Timing goes to stderr as a side-channel JSON line so it
//! never perturbs the primary bytes. Exit codes: 2 for usage errors, 3 for
//! numerical or domain guard violations, 4 for i/o and file-format errors.

mod output;

use clap::{Args, Parser, Subcommand};
use detent_core::bsstats::{
    ball_distance, decorated_ball, sequence_report, tightness_profile, DEFAULT_MATCH_TOL,
};
use detent_core::entropy::{
    chain_entropy_exact, exact_entropy, hbar_graph_sum, hbar_percolation, lyons_formula,
    matrix_tree_log_z, mc_entropy, EntropyEstimate, LabelOrder,
};
use detent_core::graph::{generate_family, Family, Graph};
use detent_core::io::{read_graph, read_kernel, write_graph, write_kernel};
use detent_core::kernels::{
    dilate, restrict, spectral_summary, transfer_current, validate_kernel, Kernel,
};
use detent_core::sampling::{enumerate_pmf, inclusion_probability, sample_many};
use detent_core::{rng, Error};
use output::{fmt_f64, json_line, key, Json};
use rand::Rng;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "detent",
    version,
    about = "Determinantal point processes on graphs: kernels, sampling, entropy, local statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FamilyArgs {
    /// Family name: cycle, path, complete, torus2d, doubled_star, hypercube,
    /// random_regular.
    #[arg(long)]
    family: String,
    /// Vertex count (cycle, path, complete, random_regular).
    #[arg(long)]
    n: Option<usize>,
    /// Side length (torus2d).
    #[arg(long)]
    side: Option<usize>,
    /// Dimension (hypercube).
    #[arg(long)]
    dim: Option<usize>,
    /// Degree (random_regular).
    #[arg(long)]
    d: Option<usize>,
}

impl FamilyArgs {
    fn build(&self, seed: Option<u64>) -> Result<Graph, CliError> {
        let need = |v: Option<usize>, flag: &str| {
            v.ok_or_else(|| CliError::Usage(format!("--family {} needs --{flag}", self.family)))
        };
        let family = match self.family.as_str() {
            "cycle" => Family::Cycle {
                n: need(self.n, "n")?,
            },
            "path" => Family::Path {
                n: need(self.n, "n")?,
            },
            "complete" => Family::Complete {
                n: need(self.n, "n")?,
            },
            "torus2d" => Family::Torus2d {
                side: need(self.side, "side")?,
            },
            "doubled_star" => Family::DoubledStar,
            "hypercube" => Family::Hypercube {
                dim: need(self.dim, "dim")?,
            },
            "random_regular" => Family::RandomRegular {
                n: need(self.n, "n")?,
                d: need(self.d, "d")?,
                seed: seed.ok_or_else(|| {
                    CliError::Usage("--family random_regular needs --seed".to_string())
                })?,
            },
            other => return Err(CliError::Usage(format!("unknown family `{other}`"))),
        };
        Ok(generate_family(&family)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a named graph family as a graph text file.
    Gen {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the transfer-current projection kernel of a graph.
    TransferCurrent {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lift a contraction kernel to its projection dilation.
    Dilate {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Restrict a kernel to a subset of its labels.
    Restrict {
        #[arg(long)]
        kernel: PathBuf,
        /// Comma-separated label indices.
        #[arg(long)]
        labels: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-validate a kernel file and report its classification.
    Validate {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw exact samples; one line of sorted element ids per draw.
    Sample {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Write a draw,element,probability CSV of the conditional chain.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Joint inclusion probability of a set of elements.
    InclusionProb {
        #[arg(long)]
        kernel: PathBuf,
        /// Comma-separated element ids.
        #[arg(long)]
        elements: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate the exact pmf (ground sets up to 24 elements).
    Pmf {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entropy computations, exact and Monte-Carlo.
    Entropy {
        #[command(subcommand)]
        method: EntropyCommand,
    },
    /// Return-probability tree-entropy value.
    Lyons {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        kmax: usize,
        /// `all`, or a count of uniformly sampled roots (needs --seed).
        #[arg(long, default_value = "all")]
        roots: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Log of the (weighted) spanning-tree count.
    TreeCount {
        #[arg(long, conflicts_with = "family")]
        graph: Option<PathBuf>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        side: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance-resolved squared kernel mass per vertex.
    Tightness {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two decorated balls up to root-preserving isomorphism.
    BallDistance {
        #[arg(long)]
        kernel_a: PathBuf,
        #[arg(long)]
        root_a: usize,
        #[arg(long)]
        kernel_b: PathBuf,
        #[arg(long)]
        root_b: usize,
        #[arg(long)]
        radius: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence/tightness diagnostics across a kernel sequence.
    BsReport {
        /// Comma-separated kernel files, in sequence order.
        #[arg(long)]
        kernels: String,
        #[arg(long)]
        radius: usize,
        #[arg(long, default_value_t = 32)]
        roots: usize,
        #[arg(long, default_value_t = DEFAULT_MATCH_TOL)]
        tol: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multi-size experiments with aligned output columns.
    Experiment {
        #[command(subcommand)]
        kind: ExperimentCommand,
    },
}

#[derive(Subcommand)]
enum EntropyCommand {
    /// Exact entropy from pmf enumeration.
    Exact {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact entropy via the conditional chain rule along an order.
    Chain {
        #[arg(long)]
        kernel: PathBuf,
        /// `identity`, `random` (needs --seed), or a comma-separated
        /// permutation.
        #[arg(long, default_value = "identity")]
        order: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Unbiased Monte-Carlo chain-rule estimator.
    Mc {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Local entropy of one marked element (percolation estimator).
    Hbar {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        element: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-vertex local entropy over sampled roots, radius-truncated.
    Local {
        #[arg(long)]
        kernel: PathBuf,
        /// Ball radius, or `inf` for no truncation.
        #[arg(long)]
        radius: String,
        /// `all`, or a count of uniformly sampled roots.
        #[arg(long)]
        roots: String,
        /// Replicates per root.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Tree-entropy convergence columns over a family of growing graphs.
    Convergence {
        /// `cycle` or `torus2d`.
        #[arg(long)]
        family: String,
        /// Comma-separated ascending sizes (cycle length / torus side).
        #[arg(long)]
        sizes: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        kmax: usize,
        /// Truncation radius for the local estimator.
        #[arg(long, default_value_t = 2)]
        radius: usize,
        /// Sampled roots per size.
        #[arg(long, default_value_t = 50)]
        roots: usize,
        /// Replicates per root.
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The local-indistinguishability pair: equal ball statistics, entropies
    /// apart by log 2.
    TightnessPair {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        roots: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(Error),
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "i/o error on {path}: {source}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 4,
            CliError::Core(e) => match e {
                Error::Io { .. } | Error::ParseGraph { .. } | Error::ParseKernel { .. } => 4,
                _ => 3,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match run(cli.command) {
        Ok(()) => {
            eprintln!("{{\"elapsed_ms\":{}}}", started.elapsed().as_millis());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Writes the primary output to `--out` or stdout, byte-identical per run.
fn emit(primary: String, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, primary).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{primary}");
            Ok(())
        }
    }
}

fn parse_index_list(s: &str, what: &str) -> Result<Vec<usize>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| CliError::Usage(format!("bad {what} `{t}`: {e}")))
        })
        .collect()
}

fn parse_radius(s: &str) -> Result<Option<usize>, CliError> {
    if s == "inf" {
        return Ok(None);
    }
    s.parse::<usize>().map(Some).map_err(|_| {
        CliError::Core(Error::InvalidRadius(format!(
            "`{s}` is neither a non-negative integer nor `inf`"
        )))
    })
}

/// Resolves a `--roots` argument: `all` or a uniformly sampled count.
/// Sampling uses a dedicated substream so replicate streams stay untouched.
fn resolve_roots(
    spec: &str,
    vertex_count: usize,
    seed: Option<u64>,
) -> Result<Vec<usize>, CliError> {
    if spec == "all" {
        return Ok((0..vertex_count).collect());
    }
    let count: usize = spec
        .parse()
        .map_err(|_| CliError::Usage(format!("--roots must be `all` or a count, got `{spec}`")))?;
    let seed = seed.ok_or_else(|| CliError::Usage("--roots <count> needs --seed".to_string()))?;
    let mut rng = rng::substream(seed, u64::MAX);
    Ok((0..count).map(|_| rng.gen_range(0..vertex_count)).collect())
}

fn estimate_json(
    est: &EntropyEstimate,
    seed: Option<u64>,
    k_max: Option<usize>,
    radius: Option<&str>,
    extra: Vec<(String, Json)>,
) -> String {
    let mut fields = vec![
        key("method", Json::Str(est.method.as_str().to_string())),
        key("value", Json::Float(est.value)),
        key("std_error", Json::Float(est.std_error)),
        key("replicates", Json::UInt(est.replicates as u64)),
    ];
    if let Some(s) = seed {
        fields.push(key("seed", Json::UInt(s)));
    }
    if let Some(k) = k_max {
        fields.push(key("k_max", Json::UInt(k as u64)));
    }
    if let Some(r) = radius {
        fields.push(key("radius", Json::Str(r.to_string())));
    }
    fields.extend(extra);
    json_line(fields)
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gen { family, seed, out } => {
            let g = family.build(seed)?;
            match &out {
                Some(path) => write_graph(&g, path)?,
                None => print!("{}", g.to_text()),
            }
            Ok(())
        }
        Command::TransferCurrent { graph, out } => {
            let g = read_graph(&graph)?;
            let k = transfer_current(&g)?;
            write_kernel(&k, &out)?;
            Ok(())
        }
        Command::Dilate { kernel, out } => {
            let k = read_kernel(&kernel)?;
            let p = dilate(&k)?;
            write_kernel(&p, &out)?;
            Ok(())
        }
        Command::Restrict {
            kernel,
            labels,
            out,
        } => {
            let k = read_kernel(&kernel)?;
            let label_set = parse_index_list(&labels, "label index")?;
            let r = restrict(&k, &label_set)?;
            write_kernel(&r, &out)?;
            Ok(())
        }
        Command::Validate { kernel, out } => {
            let k = read_kernel(&kernel)?;
            let revalidated = validate_kernel(k.matrix().clone(), k.ground().clone())?;
            let s = spectral_summary(&revalidated);
            let mut fields = vec![
                key("class", Json::Str(revalidated.class().as_str().to_string())),
                key("elements", Json::UInt(revalidated.size() as u64)),
                key(
                    "labels",
                    Json::Array(
                        revalidated
                            .ground()
                            .labels()
                            .iter()
                            .map(|l| Json::Str(l.clone()))
                            .collect(),
                    ),
                ),
                key("trace", Json::Float(revalidated.trace())),
                key("normalized_trace", Json::Float(s.normalized_trace)),
                key("min_eigenvalue", Json::Float(s.eigenvalues[0])),
                key(
                    "max_eigenvalue",
                    Json::Float(*s.eigenvalues.last().unwrap()),
                ),
            ];
            if let Some(rank) = revalidated.projection_rank() {
                fields.push(key("rank", Json::UInt(rank as u64)));
            }
            emit(json_line(fields), &out)
        }
        Command::Sample {
            kernel,
            n,
            seed,
            trace,
            out,
        } => {
            let k = read_kernel(&kernel)?;
            let draws = sample_many(&k, n, seed)?;
            let mut primary = String::new();
            for d in &draws {
                let ids: Vec<String> = d.elements().iter().map(|e| e.to_string()).collect();
                primary.push_str(&ids.join(" "));
                primary.push('\n');
            }
            if let Some(trace_path) = &trace {
                let mut csv = String::from("draw,element,probability\n");
                for (i, d) in draws.iter().enumerate() {
                    for &(e, p) in d.trace.iter().flatten() {
                        csv.push_str(&format!("{i},{e},{}\n", fmt_f64(p)));
                    }
                }
                std::fs::write(trace_path, csv).map_err(|source| CliError::Io {
                    path: trace_path.display().to_string(),
                    source,
                })?;
            }
            emit(primary, &out)
        }
        Command::InclusionProb {
            kernel,
            elements,
            out,
        } => {
            let k = read_kernel(&kernel)?;
            let f = parse_index_list(&elements, "element id")?;
            let p = inclusion_probability(&k, &f)?;
            emit(json_line(vec![key("probability", Json::Float(p))]), &out)
        }
        Command::Pmf { kernel, out } => {
            let k = read_kernel(&kernel)?;
            let pmf = enumerate_pmf(&k)?;
            let mut csv = String::from("mask,elements,probability\n");
            for &(mask, p) in pmf.atoms() {
                let ids: Vec<String> = (0..pmf.ground_size())
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| i.to_string())
                    .collect();
                csv.push_str(&format!("{mask},{},{}\n", ids.join(" "), fmt_f64(p)));
            }
            emit(csv, &out)
        }
        Command::Entropy { method } => run_entropy(method),
        Command::Lyons {
            graph,
            kmax,
            roots,
            seed,
            out,
        } => {
            let g = read_graph(&graph)?;
            let root_list = resolve_roots(&roots, g.vertex_count(), seed)?;
            let (est, last_increment) = lyons_formula(&g, &root_list, kmax)?;
            emit(
                estimate_json(
                    &est,
                    seed,
                    Some(kmax),
                    None,
                    vec![key("last_increment", Json::Float(last_increment))],
                ),
                &out,
            )
        }
        Command::TreeCount {
            graph,
            family,
            n,
            side,
            dim,
            d,
            seed,
            out,
        } => {
            let g = match (graph, family) {
                (Some(path), None) => read_graph(&path)?,
                (None, Some(family)) => FamilyArgs {
                    family,
                    n,
                    side,
                    dim,
                    d,
                }
                .build(seed)?,
                _ => {
                    return Err(CliError::Usage(
                        "tree-count needs exactly one of --graph or --family".to_string(),
                    ))
                }
            };
            let logz = matrix_tree_log_z(&g)?;
            emit(json_line(vec![key("log_tau", Json::Float(logz))]), &out)
        }
        Command::Tightness { kernel, out } => {
            let k = read_kernel(&kernel)?;
            let profile = tightness_profile(&k)?;
            let mut mass: Vec<(String, Json)> = profile
                .finite
                .iter()
                .map(|(&t, &m)| (t.to_string(), Json::Float(m)))
                .collect();
            mass.push(key("inf", Json::Float(profile.infinite)));
            emit(
                json_line(vec![
                    key("mass", Json::Object(mass)),
                    key("total_mass", Json::Float(profile.total_mass())),
                ]),
                &out,
            )
        }
        Command::BallDistance {
            kernel_a,
            root_a,
            kernel_b,
            root_b,
            radius,
            out,
        } => {
            let ka = read_kernel(&kernel_a)?;
            let kb = read_kernel(&kernel_b)?;
            let a = decorated_ball(&ka, root_a, radius)?;
            let b = decorated_ball(&kb, root_b, radius)?;
            let (isomorphic, deviation) = ball_distance(&a, &b)?;
            emit(
                json_line(vec![
                    key("isomorphic", Json::Bool(isomorphic)),
                    key(
                        "max_deviation",
                        if isomorphic {
                            Json::Float(deviation)
                        } else {
                            Json::Null
                        },
                    ),
                ]),
                &out,
            )
        }
        Command::BsReport {
            kernels,
            radius,
            roots,
            tol,
            seed,
            out,
        } => {
            let paths: Vec<&str> = kernels.split(',').filter(|s| !s.is_empty()).collect();
            let loaded: Vec<Kernel> = paths
                .iter()
                .map(|p| read_kernel(Path::new(p)))
                .collect::<Result<_, _>>()?;
            let refs: Vec<&Kernel> = loaded.iter().collect();
            let report = sequence_report(&refs, radius, roots, tol, seed)?;
            let pairs = report
                .pairs
                .iter()
                .map(|p| {
                    Json::Object(vec![
                        key("empirical_distance", Json::Float(p.empirical_distance)),
                        key("unmatched_fraction", Json::Float(p.unmatched_fraction)),
                    ])
                })
                .collect();
            let items = report
                .items
                .iter()
                .map(|item| {
                    let tail: Vec<(String, Json)> = item
                        .tail_mass
                        .iter()
                        .map(|(&r, &m)| (r.to_string(), Json::Float(m)))
                        .collect();
                    Json::Object(vec![
                        key("tail_mass", Json::Object(tail)),
                        key("infinite_mass", Json::Float(item.infinite_mass)),
                        key("flagged_non_tight", Json::Bool(item.flagged_non_tight)),
                    ])
                })
                .collect();
            emit(
                json_line(vec![
                    key("radius", Json::UInt(radius as u64)),
                    key("reported_radius", Json::UInt(report.reported_radius as u64)),
                    key("match_tol", Json::Float(tol)),
                    key("seed", Json::UInt(seed)),
                    key("pairs", Json::Array(pairs)),
                    key("items", Json::Array(items)),
                ]),
                &out,
            )
        }
        Command::Experiment { kind } => run_experiment(kind),
    }
}

fn run_entropy(method: EntropyCommand) -> Result<(), CliError> {
    match method {
        EntropyCommand::Exact { kernel, out } => {
            let k = read_kernel(&kernel)?;
            let est = exact_entropy(&k)?;
            emit(estimate_json(&est, None, None, None, vec![]), &out)
        }
        EntropyCommand::Chain {
            kernel,
            order,
            seed,
            out,
        } => {
            let k = read_kernel(&kernel)?;
            let label_order = match order.as_str() {
                "identity" => LabelOrder::Permutation((0..k.size()).collect()),
                "random" => {
                    let s = seed.ok_or_else(|| {
                        CliError::Usage("--order random needs --seed".to_string())
                    })?;
                    LabelOrder::random(k.size(), &mut rng::stream(s))
                }
                list => LabelOrder::Permutation(parse_index_list(list, "order entry")?),
            };
            let est = chain_entropy_exact(&k, &label_order)?;
            emit(estimate_json(&est, seed, None, None, vec![]), &out)
        }
        EntropyCommand::Mc {
            kernel,
            n,
            seed,
            out,
        } => {
            let k = read_kernel(&kernel)?;
            let est = mc_entropy(&k, n, seed)?;
            emit(estimate_json(&est, Some(seed), None, None, vec![]), &out)
        }
        EntropyCommand::Hbar {
            kernel,
            element,
            n,
            seed,
            out,
        } => {
            let k = read_kernel(&kernel)?;
            let est = hbar_percolation(&k, element, n, seed)?;
            emit(
                estimate_json(
                    &est,
                    Some(seed),
                    None,
                    None,
                    vec![key("element", Json::UInt(element as u64))],
                ),
                &out,
            )
        }
        EntropyCommand::Local {
            kernel,
            radius,
            roots,
            n,
            seed,
            out,
        } => {
            let k = read_kernel(&kernel)?;
            let r = parse_radius(&radius)?;
            let root_list = resolve_roots(&roots, k.ground().base().vertex_count(), Some(seed))?;
            let est = hbar_graph_sum(&k, &root_list, r, n, seed)?;
            emit(
                estimate_json(&est, Some(seed), None, Some(&radius), vec![]),
                &out,
            )
        }
    }
}

fn run_experiment(kind: ExperimentCommand) -> Result<(), CliError> {
    match kind {
        ExperimentCommand::Convergence {
            family,
            sizes,
            seed,
            kmax,
            radius,
            roots,
            reps,
            out,
        } => {
            let size_list = parse_index_list(&sizes, "size")?;
            if size_list.is_empty() || size_list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::Usage(
                    "--sizes must be a non-empty ascending list".to_string(),
                ));
            }
            let mut csv = String::from(
                "family,size,vertices,edges,log_tau_per_vertex,lyons,lyons_last_increment,\
                 hbar_per_vertex,hbar_std_error,tail_mass_beyond_radius\n",
            );
            for (i, &size) in size_list.iter().enumerate() {
                let g = match family.as_str() {
                    "cycle" => generate_family(&Family::Cycle { n: size })?,
                    "torus2d" => generate_family(&Family::Torus2d { side: size })?,
                    other => {
                        return Err(CliError::Core(Error::BadParams(format!(
                            "experiment family must be cycle or torus2d, got `{other}`"
                        ))))
                    }
                };
                let n_vertices = g.vertex_count();
                let n_edges = g.edge_count();
                let log_tau = matrix_tree_log_z(&g)? / n_vertices as f64;
                let (lyons, last_inc) = lyons_formula(&g, &[0], kmax)?;
                let kern = transfer_current(&g)?;
                let mut root_rng = rng::substream(seed, u64::MAX - i as u64);
                let root_list: Vec<usize> =
                    (0..roots).map(|_| root_rng.gen_range(0..n_edges)).collect();
                let hbar = hbar_graph_sum(&kern, &root_list, Some(radius), reps, seed)?;
                // Per original vertex: the local estimator averages per
                // line-graph vertex, so scale by |E| / |V|.
                let scale = n_edges as f64 / n_vertices as f64;
                let profile = tightness_profile(&kern)?;
                csv.push_str(&format!(
                    "{family},{size},{n_vertices},{n_edges},{},{},{},{},{},{}\n",
                    fmt_f64(log_tau),
                    fmt_f64(lyons.value),
                    fmt_f64(last_inc),
                    fmt_f64(hbar.value * scale),
                    fmt_f64(hbar.std_error * scale),
                    fmt_f64(profile.tail_mass_beyond(radius)),
                ));
            }
            emit(csv, &out)
        }
        ExperimentCommand::TightnessPair { seed, roots, out } => {
            let k4 = transfer_current(&generate_family(&Family::Complete { n: 4 })?)?;
            let ds = transfer_current(&generate_family(&Family::DoubledStar)?)?;
            // Re-decorate both kernels onto edgeless base graphs: local
            // sampling then sees only the matching diagonals.
            let k4 = validate_kernel(
                k4.matrix().clone(),
                detent_core::GroundSet::singleton(Graph::edgeless(k4.size())),
            )?;
            let ds = validate_kernel(
                ds.matrix().clone(),
                detent_core::GroundSet::singleton(Graph::edgeless(ds.size())),
            )?;
            let report = sequence_report(&[&k4, &ds], 2, roots, DEFAULT_MATCH_TOL, seed)?;
            let h_k4 = exact_entropy(&k4)?.value;
            let h_ds = exact_entropy(&ds)?.value;
            let p_k4 = tightness_profile(&k4)?;
            let p_ds = tightness_profile(&ds)?;
            emit(
                json_line(vec![
                    key(
                        "empirical_distance",
                        Json::Float(report.pairs[0].empirical_distance),
                    ),
                    key(
                        "unmatched_fraction",
                        Json::Float(report.pairs[0].unmatched_fraction),
                    ),
                    key("entropy_complete4", Json::Float(h_k4)),
                    key("entropy_doubled_star", Json::Float(h_ds)),
                    key("entropy_difference", Json::Float(h_k4 - h_ds)),
                    key("mass_infinity_complete4", Json::Float(p_k4.infinite)),
                    key("mass_infinity_doubled_star", Json::Float(p_ds.infinite)),
                    key("seed", Json::UInt(seed)),
                ]),
                &out,
            )
        }
    }
}
