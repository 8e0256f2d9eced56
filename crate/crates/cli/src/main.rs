//! `quanto`: build identity databases, optimize QASM circuits, compare circuits.
//!
//! Exit codes: 0 success, 1 `verify` mismatch, 2 bad arguments or input, 3 resource guard,
//! 4 optimized output failed verification. Results go to stdout as `key: value` lines;
//! diagnostics go to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use quanto_core::gates::{split_gate_list, GateDef};
use quanto_core::generator::{GenError, DEFAULT_MAX_CIRCUITS};
use quanto_core::optimizer::residual;
use quanto_core::{
    build_database, optimize, qasm, scaling_count, CircuitGrid, GateSet, GeneratorConfig, IdentityDatabase,
    OptimizeOptions, TileSpec,
};

const MAX_CIRCUITS_ENV: &str = "QUANTO_MAX_CIRCUITS";

#[derive(Parser)]
#[command(name = "quanto", version, about = "Circuit-identity database builder and tile optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate circuits and write an identity database.
    GenDb(GenDbArgs),
    /// Optimize a QASM circuit against an identity database.
    Optimize(OptimizeArgs),
    /// Compare the unitaries of two QASM circuits.
    Verify(VerifyArgs),
    /// Evaluate the closed-form circuit count.
    Count(CountArgs),
    /// Summarize a database file.
    Stats(StatsArgs),
}

#[derive(Args)]
struct GateArgs {
    /// Comma-separated gate names, e.g. `I,H,X,Z,CX` or `U1[pi/2],CX`.
    #[arg(long, conflicts_with = "preset")]
    gates: Option<String>,
    /// Named gate set: `standard` or `ibm-legacy`.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct GenDbArgs {
    #[command(flatten)]
    gates: GateArgs,
    #[arg(long)]
    qubits: usize,
    #[arg(long)]
    depth: usize,
    #[arg(long, default_value_t = 8)]
    dp: u32,
    #[arg(long)]
    neighbors_only: bool,
    /// Lift the qubit/depth bound.
    #[arg(long)]
    allow_large: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Database file; when omitted one is built from `--gates`/`--preset` or from the
    /// gates used by the input.
    #[arg(long)]
    db: Option<PathBuf>,
    #[command(flatten)]
    gates: GateArgs,
    /// Qubits of a database built on the fly.
    #[arg(long, default_value_t = 2)]
    qubits: usize,
    /// Depth of a database built on the fly.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = 8)]
    dp: u32,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Tile qubits (defaults to the database qubits).
    #[arg(long)]
    tile_qubits: Option<usize>,
    /// Tile depth (defaults to the database depth).
    #[arg(long)]
    tile_depth: Option<usize>,
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    #[arg(long)]
    neighbors_only: bool,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

#[derive(Args)]
struct VerifyArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long)]
    qubits: usize,
    #[arg(long)]
    depth: usize,
    /// Single-qubit gates, identity included.
    #[arg(long)]
    g: u64,
    /// Two-qubit gates.
    #[arg(long)]
    t: u64,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    db: PathBuf,
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        let code = if matches!(e, GenError::TooManyCircuits { .. }) { 3 } else { 2 };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenDb(a) => gen_db(a),
        Command::Optimize(a) => optimize_cmd(a),
        Command::Verify(a) => verify(a),
        Command::Count(a) => count(a),
        Command::Stats(a) => stats(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn gate_set(args: &GateArgs) -> Result<Option<GateSet>, Failure> {
    match (&args.gates, &args.preset) {
        (Some(list), _) => GateSet::from_names(&split_gate_list(list)).map(Some).map_err(Failure::usage),
        (None, Some(preset)) => GateSet::preset(preset).map(Some).map_err(Failure::usage),
        (None, None) => Ok(None),
    }
}

fn max_circuits() -> Result<u64, Failure> {
    match std::env::var(MAX_CIRCUITS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("{MAX_CIRCUITS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_MAX_CIRCUITS),
    }
}

fn generate(gates: GateSet, qubits: usize, depth: usize, dp: u32, neighbors_only: bool, allow_large: bool) -> Result<IdentityDatabase, Failure> {
    let mut cfg = GeneratorConfig::new(qubits, depth, gates)
        .with_dp(dp)
        .with_neighbors_only(neighbors_only);
    cfg.allow_large = allow_large;
    cfg.max_circuits = max_circuits()?;
    Ok(build_database(&cfg)?)
}

fn gen_db(args: GenDbArgs) -> Result<u8, Failure> {
    let gates = gate_set(&args.gates)?.ok_or_else(|| Failure::usage("one of --gates or --preset is required"))?;
    let db = generate(gates, args.qubits, args.depth, args.dp, args.neighbors_only, args.allow_large)?;
    if let Some(path) = &args.out {
        db.save(path)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
        eprintln!("wrote {}", path.display());
    }
    println!("circuits: {}", db.circuit_count());
    println!("fingerprints: {}", db.bucket_count());
    let histogram: Vec<String> = db.histogram().iter().map(|(size, n)| format!("{size}x{n}")).collect();
    println!("bucket_sizes: {}", histogram.join(" "));
    Ok(0)
}

fn read_circuit(path: &Path) -> Result<CircuitGrid, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    qasm::parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Distinct gates of `c` in order of first appearance.
fn gates_used(c: &CircuitGrid) -> Result<GateSet, Failure> {
    let mut seen: Vec<Arc<GateDef>> = Vec::new();
    for cell in c.layers().iter().flatten() {
        let g = cell.gate();
        if !seen.iter().any(|s| s.name() == g.name()) {
            seen.push(g.clone());
        }
    }
    GateSet::new(seen).map_err(Failure::usage)
}

fn optimize_cmd(args: OptimizeArgs) -> Result<u8, Failure> {
    let input = read_circuit(&args.input)?;
    let db = match &args.db {
        Some(path) => IdentityDatabase::load(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
        None => {
            let gates = match gate_set(&args.gates)? {
                Some(g) => g,
                None => gates_used(&input)?,
            };
            eprintln!("building database over {} gates", gates.len());
            generate(gates, args.qubits, args.depth, args.dp, args.neighbors_only, false)?
        }
    };
    let meta = db.meta();
    let tile = match (args.tile_qubits, args.tile_depth) {
        (None, None) => None,
        (i, j) => Some(TileSpec {
            qubits: i.unwrap_or(meta.qubits),
            depth: j.unwrap_or(meta.depth),
        }),
    };
    let opts = OptimizeOptions {
        tile,
        iterations: args.iterations,
        neighbors_only: args.neighbors_only,
    };
    let (out, report) = optimize(&input, &db, &opts).map_err(Failure::usage)?;
    let text = qasm::emit(&out).map_err(Failure::usage)?;
    fs::write(&args.output, text)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", args.output.display())))?;
    println!("initial_depth: {}", report.initial_depth);
    println!("final_depth: {}", report.final_depth);
    println!("substitutions: {}", report.substitutions.len());
    println!("iterations: {}", report.iterations);
    println!("collisions_skipped: {}", report.collisions_skipped);
    println!("residual: {:e}", report.residual);
    for s in &report.substitutions {
        eprintln!(
            "layer {} qubit {}: {} (cost {}) -> {} (cost {})",
            s.layer_offset, s.qubit_offset, s.before, s.cost_before, s.after, s.cost_after
        );
    }
    if report.residual > args.tolerance {
        eprintln!("error: residual {:e} exceeds tolerance {:e}", report.residual, args.tolerance);
        return Ok(4);
    }
    Ok(0)
}

fn verify(args: VerifyArgs) -> Result<u8, Failure> {
    let a = read_circuit(&args.a)?;
    let b = read_circuit(&args.b)?;
    if a.qubits() != b.qubits() {
        return Err(Failure::usage(format!(
            "circuits act on {} and {} qubits",
            a.qubits(),
            b.qubits()
        )));
    }
    let r = residual(&a, &b).map_err(Failure::usage)?;
    println!("residual: {r:e}");
    if r <= args.tolerance {
        println!("equivalent: true");
        Ok(0)
    } else {
        println!("equivalent: false");
        Ok(1)
    }
}

fn count(args: CountArgs) -> Result<u8, Failure> {
    let c = scaling_count(args.qubits, args.depth, args.g, args.t)?;
    println!("S_l: {}", c.per_layer);
    println!("S: {}", c.total);
    Ok(0)
}

fn stats(args: StatsArgs) -> Result<u8, Failure> {
    let db = IdentityDatabase::load(&args.db).map_err(|e| Failure::usage(format!("{}: {e}", args.db.display())))?;
    let meta = db.meta();
    let names: Vec<&str> = meta.gates.gates().iter().map(|g| g.name()).collect();
    println!("qubits: {}", meta.qubits);
    println!("depth: {}", meta.depth);
    println!("dp: {}", meta.dp);
    println!("neighbors_only: {}", meta.neighbors_only);
    println!("gates: {}", names.join(","));
    println!("circuits: {}", db.circuit_count());
    println!("buckets: {}", db.bucket_count());
    let largest = db.buckets().map(|(_, b)| b.len()).max().unwrap_or(0);
    println!("largest_bucket: {largest}");
    if let Some((_, b)) = db.buckets().find(|(_, b)| b.len() > 1) {
        println!("example_identity: {} = {}", b[1], b[0]);
    }
    Ok(0)
}
