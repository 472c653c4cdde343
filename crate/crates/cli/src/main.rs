//! `graphgen`: sample random graphs and run the verification battery.
//!
//! Edge data goes to `--out` or stdout. Diagnostics go to stderr as
//! `key=value` lines. Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphgen::block::{
    chung_lu_ball, chung_lu_grass_report, sbm_ball, sbm_grass_report, BlockSpec,
};
use graphgen::er::{
    ball_drop_er, ball_drop_er_complement, coin_flip_er, fixed_edge_er, grass_hop_er, symmetrize,
};
use graphgen::io::{read_degrees, read_matrix, write_edges, EdgeFileFormat};
use graphgen::kronecker::{coin_flip_kron, grass_hop_kron_report, Initiator};
use graphgen::verify::{Suite, VerifyConfig};
use graphgen::{EdgeList, Execution, Probability, RandomStream};

const DEFAULT_SEED: u64 = 0x5eed;
const SEED_ENV: &str = "GRAPHGEN_SEED";

#[derive(Parser)]
#[command(
    name = "graphgen",
    version,
    about = "Sample Erdős–Rényi, Chung-Lu, block-model and Kronecker graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one graph and write its edge list.
    Generate(GenerateArgs),
    /// Run a verification suite (or `all`).
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Er,
    ChungLu,
    Sbm,
    Kron,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Method {
    Coin,
    Ball,
    Grass,
    Fixed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Mm,
}

#[derive(Clone, Copy, Debug)]
enum SeedArg {
    Fixed(u64),
    Random,
}

fn parse_u64(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("{s:?} is not a 64-bit decimal or 0x-hex value: {e}"))
}

fn parse_seed(s: &str) -> Result<SeedArg, String> {
    if s == "random" {
        Ok(SeedArg::Random)
    } else {
        parse_u64(s).map(SeedArg::Fixed)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    model: Model,
    /// Node count (er).
    #[arg(long)]
    nodes: Option<u64>,
    /// Edge probability (er).
    #[arg(long)]
    prob: Option<f64>,
    /// Sample a uniform undirected graph with exactly this many edges (er).
    #[arg(long)]
    fixed_edges: Option<u64>,
    /// File with one degree per line (chung-lu).
    #[arg(long, value_name = "FILE")]
    degrees: Option<PathBuf>,
    /// Block sizes (sbm).
    #[arg(long, value_delimiter = ',', value_name = "a,b,c")]
    sizes: Option<Vec<u64>>,
    /// File with the block probability matrix (sbm).
    #[arg(long, value_name = "FILE")]
    qmatrix: Option<PathBuf>,
    /// Within-block probability, with --between (sbm).
    #[arg(long)]
    within: Option<f64>,
    /// Between-block probability, with --within (sbm).
    #[arg(long)]
    between: Option<f64>,
    /// File with the initiator matrix (kron).
    #[arg(long, value_name = "FILE")]
    initiator: Option<PathBuf>,
    /// Kronecker power (kron).
    #[arg(long)]
    power: Option<u32>,
    /// Sampling method; defaults to grass, or fixed with --fixed-edges.
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Decimal or 0x-hex seed, or `random`.
    #[arg(long, value_parser = parse_seed)]
    seed: Option<SeedArg>,
    /// Keep the strict upper triangle and mirror it.
    #[arg(long)]
    undirected: bool,
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Sort edges lexicographically before writing.
    #[arg(long)]
    sort: bool,
    /// Sample regions or blocks on N threads (0: all cores).
    #[arg(long, value_name = "N")]
    parallel_regions: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name, or `all`.
    suite: String,
    /// Override the suite's sample or trial count.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, value_parser = parse_u64)]
    seed: Option<u64>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<graphgen::Error> for Failure {
    fn from(e: graphgen::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn require<T>(value: Option<T>, flag: &str, model: &str) -> Result<T, Failure> {
    match value {
        Some(v) => Ok(v),
        None => usage(format!("{model} requires {flag}")),
    }
}

fn probability(p: f64, flag: &str) -> Result<Probability, Failure> {
    Probability::new(p).map_err(|_| Failure::Runtime(format!("{flag} must be in [0, 1], got {p}")))
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

/// Key-value diagnostics, printed in insertion order.
struct Diagnostics(Vec<(&'static str, String)>);

impl Diagnostics {
    fn put(&mut self, key: &'static str, value: impl ToString) {
        self.0.push((key, value.to_string()));
    }

    fn emit(&self) {
        let mut err = io::stderr().lock();
        for (k, v) in &self.0 {
            let _ = writeln!(err, "{k}={v}");
        }
    }
}

fn resolve_seed(arg: Option<SeedArg>) -> Result<u64, Failure> {
    match arg {
        Some(SeedArg::Fixed(s)) => Ok(s),
        Some(SeedArg::Random) => Ok(rand::random()),
        None => match std::env::var(SEED_ENV) {
            Ok(v) => parse_u64(&v).map_err(|e| Failure::Usage(format!("{SEED_ENV}: {e}"))),
            Err(_) => Ok(DEFAULT_SEED),
        },
    }
}

/// Checks flags that belong to other models and returns the chosen method.
fn validate(args: &GenerateArgs) -> Result<Method, Failure> {
    let model = args
        .model
        .to_possible_value()
        .unwrap()
        .get_name()
        .to_string();
    let present = [
        ("--nodes", args.nodes.is_some(), Model::Er),
        ("--prob", args.prob.is_some(), Model::Er),
        ("--fixed-edges", args.fixed_edges.is_some(), Model::Er),
        ("--degrees", args.degrees.is_some(), Model::ChungLu),
        ("--sizes", args.sizes.is_some(), Model::Sbm),
        ("--qmatrix", args.qmatrix.is_some(), Model::Sbm),
        ("--within", args.within.is_some(), Model::Sbm),
        ("--between", args.between.is_some(), Model::Sbm),
        ("--initiator", args.initiator.is_some(), Model::Kron),
        ("--power", args.power.is_some(), Model::Kron),
    ];
    for (flag, given, owner) in present {
        if given && owner != args.model {
            return usage(format!("{flag} does not apply to {model}"));
        }
    }
    let method = match (args.method, args.fixed_edges.is_some()) {
        (None, true) | (Some(Method::Fixed), true) => Method::Fixed,
        (Some(Method::Fixed), false) => return usage("--method fixed requires --fixed-edges"),
        (Some(m), true) => return usage(format!("--fixed-edges conflicts with --method {m:?}")),
        (Some(m), false) => m,
        (None, false) => Method::Grass,
    };
    let allowed: &[Method] = match args.model {
        Model::Er => &[Method::Coin, Method::Ball, Method::Grass, Method::Fixed],
        Model::ChungLu | Model::Sbm => &[Method::Ball, Method::Grass],
        Model::Kron => &[Method::Coin, Method::Grass],
    };
    if !allowed.contains(&method) {
        return usage(format!("method {method:?} is not available for {model}"));
    }
    if method == Method::Fixed && args.prob.is_some() {
        return usage("--prob conflicts with --fixed-edges");
    }
    if args.parallel_regions.is_some() && !(method == Method::Grass && args.model != Model::Er) {
        return usage("--parallel-regions needs a grass-hopped chung-lu, sbm or kron model");
    }
    Ok(method)
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let method = validate(&args)?;
    let seed = resolve_seed(args.seed)?;
    let execution = match args.parallel_regions {
        Some(threads) => Execution::Parallel { threads },
        None => Execution::Sequential,
    };
    let mut stream = RandomStream::new(seed);
    let mut diag = Diagnostics(Vec::new());
    diag.put("seed", seed);
    diag.put("method", format!("{method:?}").to_lowercase());
    let start = Instant::now();

    let mut edges: EdgeList = match args.model {
        Model::Er => {
            let n = require(args.nodes, "--nodes", "er")?;
            if method == Method::Fixed {
                let m = args.fixed_edges.expect("validated");
                fixed_edge_er(n, m, &mut stream)?
            } else {
                let p = probability(require(args.prob, "--prob", "er")?, "--prob")?;
                match method {
                    Method::Coin => coin_flip_er(n, p, &mut stream),
                    Method::Grass => {
                        let e = grass_hop_er(n, p, &mut stream)?;
                        diag.put("geometric_draws", stream.geometric_draws());
                        e
                    }
                    Method::Ball => {
                        let report = if p.value() > 0.5 {
                            ball_drop_er_complement(n, p, &mut stream)?
                        } else {
                            ball_drop_er(n, p, &mut stream)?
                        };
                        diag.put("complement", report.complemented);
                        diag.put("draws", report.draws);
                        diag.put("duplicates", report.duplicates);
                        report.edges
                    }
                    Method::Fixed => unreachable!(),
                }
            }
        }
        Model::ChungLu => {
            let path = require(args.degrees.as_ref(), "--degrees", "chung-lu")?;
            let d = read_degrees(&read_file(path)?)?;
            if method == Method::Grass {
                let r = chung_lu_grass_report(&d, &mut stream, execution)?;
                diag.put("blocks", r.blocks_visited);
                diag.put("geometric_draws", r.geometric_draws);
                r.edges
            } else {
                let r = chung_lu_ball(&d, &mut stream)?;
                diag.put("draws", r.draws);
                diag.put("duplicates", r.duplicates);
                r.edges
            }
        }
        Model::Sbm => {
            let sizes = require(args.sizes.clone(), "--sizes", "sbm")?;
            let spec = match (&args.qmatrix, args.within, args.between) {
                (Some(path), None, None) => BlockSpec::new(sizes, read_matrix(&read_file(path)?)?)?,
                (None, Some(w), Some(b)) => BlockSpec::planted(
                    sizes,
                    probability(w, "--within")?,
                    probability(b, "--between")?,
                )?,
                _ => return usage("sbm requires either --qmatrix or both --within and --between"),
            };
            if method == Method::Grass {
                let r = sbm_grass_report(&spec, &mut stream, execution)?;
                diag.put("blocks", r.blocks_visited);
                diag.put("geometric_draws", r.geometric_draws);
                r.edges
            } else {
                let r = sbm_ball(&spec, &mut stream)?;
                diag.put("draws", r.draws);
                diag.put("duplicates", r.duplicates);
                r.edges
            }
        }
        Model::Kron => {
            let path = require(args.initiator.as_ref(), "--initiator", "kron")?;
            let k = Initiator::new(read_matrix(&read_file(path)?)?)?;
            let power = require(args.power, "--power", "kron")?;
            if method == Method::Grass {
                let r = grass_hop_kron_report(&k, power, &mut stream, execution)?;
                diag.put("regions", r.regions);
                diag.put("sampled_regions", r.sampled_regions);
                diag.put("geometric_draws", r.geometric_draws);
                r.edges
            } else {
                coin_flip_kron(&k, power, &mut stream)?
            }
        }
    };
    diag.put(
        "sample_ms",
        format!("{:.3}", start.elapsed().as_secs_f64() * 1e3),
    );

    if args.undirected {
        edges = symmetrize(&edges)?;
    }
    if args.sort {
        edges.sort();
    }
    diag.put("nodes", edges.num_rows());
    diag.put("edges", edges.len());

    let format = match args.format {
        Format::Tsv => EdgeFileFormat::Tsv,
        Format::Mm => EdgeFileFormat::MatrixMarket,
    };
    let bytes = match &args.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            write_edges(&edges, format, file)?
        }
        None => write_edges(&edges, format, io::stdout().lock())?,
    };
    diag.put("bytes", bytes);
    diag.emit();
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let suites: Vec<Suite> = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        match Suite::from_name(&args.suite) {
            Some(s) => vec![s],
            None => {
                let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                return usage(format!(
                    "unknown suite {:?}; expected one of {} or all",
                    args.suite,
                    names.join(", ")
                ));
            }
        }
    };
    let config = VerifyConfig {
        seed: args.seed.unwrap_or(VerifyConfig::default().seed),
        samples: args.samples,
    };
    let mut failed = Vec::new();
    for suite in suites {
        let report = suite.run(&config)?;
        println!("{report}");
        let mut err = io::stderr().lock();
        for line in report.records() {
            let _ = writeln!(err, "{line}");
        }
        if !report.passed() {
            failed.push(suite.name());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!(
            "failed suites: {}",
            failed.join(", ")
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Verify(args) => verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
