use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ftsteiner::decomp::{decompose, verify_decomposition};
use ftsteiner::format::{read_instance, write_instance};
use ftsteiner::graph::subdivide_edges;
use ftsteiner::harness::{
    gen_instance, run_scaling_bench, write_bench_csv, BenchConfig, ExperimentConfig, GraphFamily, TerminalRule,
};
use ftsteiner::labelfile::{
    parse_fault_list, resolve_faults, write_label_file, EdgeMap, LabelFile, LabelSet, SchemeKind,
};
use ftsteiner::scheme::label_stats;
use ftsteiner::verify::{exhaustive_verify, VerifyOptions};
use ftsteiner::warmup::warmup_stats;
use ftsteiner::Error;

#[derive(Parser)]
#[command(name = "ftsteiner", version, about = "Fault-tolerant Steiner connectivity labels")]
struct Cli {
    /// Seed for random generation and sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Main,
    Warmup,
}

impl From<Scheme> for SchemeKind {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Main => SchemeKind::Main,
            Scheme::Warmup => SchemeKind::Warmup,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Gnp,
    Grid,
    Star,
    Tree,
}

#[derive(Clone, Copy, ValueEnum)]
enum Terminals {
    All,
    Leaves,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance in the text format.
    Gen {
        #[arg(long, value_enum, default_value = "gnp")]
        family: Family,
        #[arg(long, default_value_t = 12)]
        n: usize,
        /// Edge probability for gnp (default 2 ln n / n).
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 3)]
        rows: usize,
        #[arg(long, default_value_t = 3)]
        cols: usize,
        #[arg(long, value_enum, default_value = "all")]
        terminals: Terminals,
        /// Terminal count for `--terminals random`.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build labels and write them to a label file.
    Build {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        f: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "main")]
        scheme: Scheme,
        /// Split every edge by a new vertex so edges can fail too.
        #[arg(long)]
        subdivide: bool,
    },
    /// Answer one query from a label file.
    Query {
        #[arg(long)]
        labels: PathBuf,
        /// Comma-separated vertex ids, or `a-b` edges for subdivided builds.
        #[arg(long)]
        faults: String,
    },
    /// Label size statistics.
    Stats {
        #[arg(long)]
        labels: PathBuf,
    },
    /// Compare every query (or a sample) against brute force.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        f: usize,
        #[arg(long, value_enum, default_value = "main")]
        scheme: Scheme,
        #[arg(long, default_value_t = 200_000)]
        budget: u128,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Decompose into a Steiner forest and bad set, and check it.
    Decomp {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        r: usize,
    },
    /// Measure how label entries grow with the number of terminals.
    Bench {
        #[arg(long, value_enum, default_value = "main")]
        scheme: Scheme,
        #[arg(long, default_value_t = 2)]
        f: usize,
        #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 2)]
        n_factor: usize,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: BenchFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit status: 1 for a failed check, 2 for bad input.
enum Failure {
    Check(String),
    Input(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DecompositionFailed { .. } => Failure::Check(e.to_string()),
            other => Failure::Input(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.into())
    }
}

fn print_json(value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(Error::Io(io::Error::other(e))))?;
    println!("{text}");
    Ok(())
}

fn output(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen { family, n, p, rows, cols, terminals, k, out } => {
            let family = match family {
                Family::Gnp => GraphFamily::Gnp { n, p },
                Family::Grid => GraphFamily::Grid { rows, cols },
                Family::Star => GraphFamily::Star { n },
                Family::Tree => GraphFamily::Tree { n },
            };
            let terminals = match terminals {
                Terminals::All => TerminalRule::All,
                Terminals::Leaves => TerminalRule::Leaves,
                Terminals::Random => TerminalRule::RandomK(
                    k.ok_or_else(|| Failure::Input(Error::InvalidArgument("--terminals random needs --k".into())))?,
                ),
            };
            let cfg = ExperimentConfig { family, terminals, f: 1, seed: cli.seed, reps: 1 };
            let (g, u) = gen_instance(&cfg)?;
            output(out.as_ref())?.write_all(write_instance(&g, &u).as_bytes())?;
        }
        Command::Build { graph, f, out, scheme, subdivide } => {
            let (g, u) = read_instance(&graph)?;
            let (g, edges) = if subdivide {
                let s = subdivide_edges(&g);
                let map = EdgeMap::from_subdivision(&s);
                (s.graph, Some(map))
            } else {
                (g, None)
            };
            let labels = LabelSet::build(&g, &u, f, scheme.into())?;
            write_label_file(&out, &labels, edges.as_ref())?;
            if cli.json {
                print_json(&serde_json::json!({ "labels": labels.len(), "out": out }))?;
            } else {
                println!("wrote {} labels to {}", labels.len(), out.display());
            }
        }
        Command::Query { labels, faults } => {
            let mut file = LabelFile::open(&labels)?;
            let faults = resolve_faults(&parse_fault_list(&faults)?, file.edge_map())?;
            let verdict = file.query(&faults)?;
            if cli.json {
                print_json(&serde_json::json!({ "faults": faults, "steiner_cut": verdict }))?;
            } else {
                println!("{}", if verdict { "YES" } else { "NO" });
            }
        }
        Command::Stats { labels } => {
            let set = LabelFile::open(&labels)?.read_all()?;
            match &set {
                LabelSet::Main(l) => {
                    let s = label_stats(l);
                    if cli.json {
                        print_json(&s)?;
                    } else {
                        println!(
                            "labels={} max_star_entries={} mean_star_entries={:.2} max_hat_entries={} max_serialized_bits={} r={} bad={}",
                            s.labels, s.max_star_entries, s.mean_star_entries, s.max_hat_entries, s.max_serialized_bits, s.r, s.bad_count
                        );
                    }
                }
                LabelSet::Warmup(l) => {
                    let s = warmup_stats(l);
                    if cli.json {
                        print_json(&s)?;
                    } else {
                        println!(
                            "labels={} max_star_entries={} mean_star_entries={:.2} max_serialized_bits={}",
                            s.labels, s.max_star_entries, s.mean_star_entries, s.max_serialized_bits
                        );
                    }
                }
            }
        }
        Command::Verify { graph, f, scheme, budget, samples } => {
            let (g, u) = read_instance(&graph)?;
            let opts = VerifyOptions { budget, allow_sampling: true, samples, seed: cli.seed.unwrap_or(0) };
            let report = exhaustive_verify(&g, &u, f, scheme.into(), &opts)?;
            if cli.json {
                print_json(&report)?;
            } else {
                println!("queries={} mismatches={} pass={}", report.queries, report.mismatches.len(), report.pass);
                for m in report.mismatches.iter().take(10) {
                    println!(
                        "  F={:?} scheme={:?} oracle={} {}",
                        m.faults,
                        m.scheme_verdict,
                        m.oracle,
                        m.error.as_deref().unwrap_or("")
                    );
                }
            }
            if !report.pass {
                return Err(Failure::Check(format!("{} mismatches", report.mismatches.len())));
            }
        }
        Command::Decomp { graph, r } => {
            let (g, u) = read_instance(&graph)?;
            let d = decompose(&g, &u, r)?;
            let report = verify_decomposition(&g, &u, r, &d);
            if cli.json {
                print_json(&serde_json::json!({ "forest": d.forest, "bad": d.bad, "r": r, "report": report }))?;
            } else {
                let edges: Vec<String> = d.forest.edges().iter().map(|(a, b)| format!("{a}-{b}")).collect();
                println!("forest: {}", edges.join(" "));
                println!("bad: {:?}", d.bad);
                println!("{report}");
            }
            if !report.all_hold() {
                return Err(Failure::Check("decomposition properties violated".into()));
            }
        }
        Command::Bench { scheme, f, sizes, reps, n_factor, p, format, out } => {
            let cfg = BenchConfig {
                scheme: scheme.into(),
                f,
                u_sizes: sizes,
                reps,
                seed: cli.seed.unwrap_or(0),
                n_factor,
                p,
            };
            let report = run_scaling_bench(&cfg)?;
            let mut sink = output(out.as_ref())?;
            match (format, cli.json) {
                (BenchFormat::Json, _) | (_, true) => {
                    serde_json::to_writer_pretty(&mut sink, &report)
                        .map_err(|e| Failure::Input(Error::Io(io::Error::other(e))))?;
                    writeln!(sink)?;
                }
                (BenchFormat::Csv, false) => write_bench_csv(&report, sink)?,
            }
            if report.rows.iter().any(|r| r.error.is_some()) {
                return Err(Failure::Check("some bench rows failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
