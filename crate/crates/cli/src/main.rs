use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use qmod_cli::cache::Cache;
use qmod_cli::commands::{self, Command, IdealSpec, LatticeSpec};
use qmod_cli::error::{CliError, CliResult};
use qmod_cli::instance::Instance;
use qmod_cli::suite::Fault;
use serde_json::json;

/// Quantum modular invariants of real quadratic function fields.
#[derive(Parser, Debug)]
#[command(name = "qmod", version)]
struct Cli {
    /// Instance file (JSON).
    #[arg(long, global = true)]
    instance: Option<PathBuf>,
    /// Relative precision in Laurent coefficients; overrides the instance.
    #[arg(long, global = true)]
    precision: Option<i64>,
    /// Largest N per quantum-j branch; overrides the instance.
    #[arg(long, global = true)]
    n_max: Option<usize>,
    /// Seed for sampled checks; overrides the instance.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = ".qmod-cache")]
    cache_dir: PathBuf,
    #[arg(long, global = true)]
    no_cache: bool,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Limits of j_ε along every branch l.
    QuantumJ,
    /// j of an ideal: `unit` or the index i of a_i.
    IdealJ {
        #[arg(long)]
        ideal: String,
    },
    /// ζ of weight n over `unit`, `ideal:I` or `epsilon:N:L`.
    Zeta {
        #[arg(long)]
        weight: u64,
        #[arg(long, default_value = "unit")]
        lattice: String,
    },
    /// Basis of the ε-lattice for ε = q^-(N d + l).
    Lattice {
        #[arg(long, num_args = 2, value_names = ["N", "L"])]
        epsilon: Vec<usize>,
        #[arg(long)]
        bound: Option<i64>,
        /// Compare with an independent oracle.
        #[arg(long)]
        check: bool,
    },
    /// ρ_g from the exponential of an ideal lattice.
    Drinfeld {
        #[arg(long, default_value = "0")]
        ideal: String,
        /// Element of A_f, e.g. `f` or `T + (T + 1)*f`.
        #[arg(long, default_value = "f")]
        gen: String,
        #[arg(long)]
        z_bound: Option<u64>,
    },
    /// Product of branch limits against the product of j(a_i).
    Product,
    /// Search for an algebraic expression of the product.
    Recognize {
        #[arg(long, default_value_t = 2)]
        height: usize,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Inject a known fault: `perturbed-recurrence`.
        #[arg(long)]
        inject: Option<String>,
    },
}

fn command(sub: Sub) -> CliResult<Command> {
    Ok(match sub {
        Sub::QuantumJ => Command::QuantumJ,
        Sub::IdealJ { ideal } => Command::IdealJ { ideal: IdealSpec::parse(&ideal)? },
        Sub::Zeta { weight, lattice } => Command::Zeta { weight, lattice: LatticeSpec::parse(&lattice)? },
        Sub::Lattice { epsilon, bound, check } => Command::Lattice { n: epsilon[0], l: epsilon[1], bound, check },
        Sub::Drinfeld { ideal, gen, z_bound } => Command::Drinfeld { ideal: IdealSpec::parse(&ideal)?, gen, z_bound },
        Sub::Product => Command::Product,
        Sub::Recognize { height } => Command::Recognize { height },
        Sub::Verify { suite, inject } => Command::Verify { suite, fault: inject.as_deref().map(Fault::parse).transpose()? },
    })
}

fn run(cli: Cli) -> CliResult<i32> {
    let path = cli.instance.ok_or_else(|| CliError::Instance("--instance is required".into()))?;
    let mut inst = Instance::load(&path)?;
    inst.precision = cli.precision.or(inst.precision);
    inst.n_max = cli.n_max.or(inst.n_max);
    inst.seed = cli.seed.or(inst.seed);
    let r = inst.resolve()?;
    let cmd = command(cli.cmd)?;
    let cache = if cli.no_cache { Cache::disabled() } else { Cache::at(&cli.cache_dir)? };
    let threads = cli.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Instance(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let out = pool.install(|| commands::run(&cmd, &r, &cache))?;
    println!("{}", serde_json::to_string_pretty(&out.document())?);
    eprintln!(
        "{}",
        json!({
            "cache": out.status.label(),
            "elapsed_ms": start.elapsed().as_millis() as u64,
            "compute_ms": out.record.elapsed_ms,
            "diagnostics": out.record.diagnostics,
        })
    );
    Ok(out.exit_code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": "input", "message": e.to_string(), "exit_code": 3 }));
            return ExitCode::from(3);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
