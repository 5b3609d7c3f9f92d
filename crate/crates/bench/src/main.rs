use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use matexpo_bench::{
    build_table, emit_csv, emit_plot, make_backend, run_benchmark, BenchConfig, BenchError,
    BenchmarkRecord, PlotOptions,
};
use matexpo_core::sim::{detect_barrier_race_with, simulate_with, SimOptions};
use matexpo_core::tolerance::power_tolerance;
use matexpo_core::{
    compare, random_matrix, repeated_exponentiate, Dtype, NaiveBackend, Schedule, Strategy,
    TileConfig,
};

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "matexpo",
    version,
    about = "Matrix exponentiation benchmarks and kernel simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep sizes x powers x strategies x backends and report timings.
    Bench(BenchArgs),
    /// Compare A^P by squaring against the f64 repeated-multiply oracle.
    Verify(VerifyArgs),
    /// Run the tiled kernel in the work-group simulator and print its traffic report.
    Simulate(SimulateArgs),
}

#[derive(Args, Clone)]
struct TileArgs {
    /// Tile shape RxC.
    #[arg(long, default_value = "16x16")]
    tile: String,
    #[arg(long, default_value_t = 1)]
    vector_width: usize,
    #[arg(long, default_value_t = 1)]
    unroll: usize,
    /// Local memory per work-group in bytes.
    #[arg(long, default_value_t = matexpo_core::tile::DEFAULT_LOCAL_MEM_BYTES)]
    local_mem: usize,
    /// Allow tile shapes outside the standard menu.
    #[arg(long)]
    experimental_tile: bool,
}

impl TileArgs {
    fn config(&self) -> Result<TileConfig, String> {
        let mut t: TileConfig = self.tile.parse()?;
        t.vector_width = self.vector_width;
        t.unroll_factor = self.unroll;
        t.local_mem_budget_bytes = self.local_mem;
        t.experimental = self.experimental_tile;
        Ok(t)
    }
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "64")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "64,128,256,512,1024")]
    powers: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "repeated,squared")]
    strategies: Vec<Strategy>,
    /// Backends: naive, tiled, sim. Repeatable or comma separated.
    #[arg(long = "backend", value_delimiter = ',', default_value = "tiled")]
    backends: Vec<String>,
    #[command(flatten)]
    tile: TileArgs,
    #[arg(long, default_value = "f32")]
    dtype: Dtype,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Input element range LO,HI (uniform in [LO, HI)).
    #[arg(long, value_delimiter = ',', default_values_t = [-0.5, 0.5], allow_negative_numbers = true)]
    range: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Largest size verified against the f64 oracle.
    #[arg(long, default_value_t = 256)]
    oracle_cap: usize,
    /// Run oracle verification on all cores (never the timed sections).
    #[arg(long)]
    parallel_verify: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Table destination; `-` for stdout.
    #[arg(long)]
    table: Option<PathBuf>,
    /// SVG bar chart; several sizes get one file each (`fig-64.svg`, ...).
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    log_scale: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    size: usize,
    #[arg(long)]
    power: u64,
    #[arg(long, default_value = "tiled")]
    backend: String,
    #[command(flatten)]
    tile: TileArgs,
    #[arg(long, default_value = "f64")]
    dtype: Dtype,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    size: usize,
    #[command(flatten)]
    tile: TileArgs,
    #[arg(long)]
    drop_barriers: bool,
    /// row-major, reversed or shuffle:SEED.
    #[arg(long, default_value = "row-major")]
    schedule: Schedule,
    #[arg(long, default_value = "f32")]
    dtype: Dtype,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Print the report as a CSV header and row instead of key=value lines.
    #[arg(long)]
    csv: bool,
}

enum Failure {
    Validation(String),
    Runtime(String),
    Verification(String),
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Validation(_) => Failure::Validation(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<matexpo_core::Error> for Failure {
    fn from(e: matexpo_core::Error) -> Self {
        use matexpo_core::Error::*;
        match e {
            InvalidDimension(_)
            | InvalidRange { .. }
            | Tiling { .. }
            | LocalMemory { .. }
            | TileConfig(_)
            | WorkGroupSize { .. }
            | ZeroPowerUnsupported => Failure::Validation(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Bench(args) => bench(args),
        Command::Verify(args) => verify(args),
        Command::Simulate(args) => simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(EXIT_VERIFY)
        }
    }
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let &[lo, hi] = args.range.as_slice() else {
        return Err(Failure::Validation(
            "--range takes exactly two values LO,HI".into(),
        ));
    };
    let config = BenchConfig {
        sizes: args.sizes,
        powers: args.powers,
        strategies: args.strategies,
        backends: args.backends,
        tile: args.tile.config().map_err(Failure::Validation)?,
        dtype: args.dtype,
        seed: args.seed,
        input_range: (lo, hi),
        repetitions: args.reps,
        oracle_cap: args.oracle_cap,
        parallel_verify: args.parallel_verify,
        csv: args.csv,
        table: args.table,
        plot: args.plot,
    };
    let outcome = run_benchmark(&config)?;
    for f in &outcome.failures {
        eprintln!(
            "warning: size {} power {} {} {} failed: {}",
            f.size, f.power, f.strategy, f.backend, f.error
        );
    }
    let records = &outcome.records;
    if let Some(path) = &config.csv {
        emit_csv(records, path)?;
    }
    let sizes: Vec<usize> = {
        let mut s: Vec<usize> = records.iter().map(|r| r.size).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let for_size = |n: usize| -> Vec<BenchmarkRecord> {
        records.iter().filter(|r| r.size == n).cloned().collect()
    };
    if let Some(path) = &config.table {
        let mut text = String::new();
        for &n in &sizes {
            match build_table(&for_size(n)) {
                Ok(t) => text.push_str(&t.render()),
                Err(e) => eprintln!("warning: no table for size {n}: {e}"),
            }
            text.push('\n');
        }
        if path == Path::new("-") {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Runtime(e.to_string()))?;
        } else {
            std::fs::write(path, text).map_err(|e| Failure::Runtime(e.to_string()))?;
        }
    }
    if let Some(path) = &config.plot {
        let opts = PlotOptions {
            log_scale: args.log_scale,
            title: None,
        };
        for &n in &sizes {
            let target = if sizes.len() == 1 {
                path.clone()
            } else {
                per_size_path(path, n)
            };
            emit_plot(&for_size(n), &target, &opts)?;
        }
    }
    let flagged = records.iter().filter(|r| r.nonfinite).count();
    if flagged > 0 {
        eprintln!("warning: {flagged} record(s) contain non-finite values");
    }
    if !outcome.failures.is_empty() {
        return Err(Failure::Runtime(format!(
            "{} grid point(s) failed",
            outcome.failures.len()
        )));
    }
    Ok(())
}

fn per_size_path(path: &Path, n: usize) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}-{n}.{ext}"),
        None => format!("{stem}-{n}"),
    };
    path.with_file_name(name)
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let tile = args.tile.config().map_err(Failure::Validation)?;
    let (label, backend) = make_backend(&args.backend, &tile)
        .ok_or_else(|| Failure::Validation(format!("unknown backend `{}`", args.backend)))?;
    if args.backend != "naive" {
        tile.check_problem(args.size, args.dtype)?;
    }
    let a = random_matrix(args.size, args.dtype, args.seed, -0.5, 0.5)?;
    let squared = Strategy::Squared.run(&a, args.power, &backend)?;
    let oracle = if args.power == 0 {
        matexpo_core::identity(args.size, Dtype::F64)?
    } else {
        repeated_exponentiate(&a.to_f64(), args.power, &NaiveBackend)?
    };
    let err = compare(&squared.to_f64(), &oracle)?;
    let tol = power_tolerance(args.power, args.size, args.dtype);
    println!("backend={label}");
    println!("size={}", args.size);
    println!("power={}", args.power);
    println!("dtype={}", args.dtype);
    println!("max_abs={}", err.max_abs);
    println!("max_rel={}", err.max_rel);
    println!("frobenius_rel={}", err.frobenius_rel);
    println!("tolerance={tol}");
    if !squared.all_finite() || !oracle.all_finite() {
        return Err(Failure::Verification(
            "result contains non-finite values".into(),
        ));
    }
    if err.max_rel.is_nan() || err.max_rel > tol {
        return Err(Failure::Verification(format!(
            "max_rel {} exceeds tolerance {tol}",
            err.max_rel
        )));
    }
    println!("status=ok");
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let cfg = args.tile.config().map_err(Failure::Validation)?;
    let a = random_matrix(args.size, args.dtype, args.seed, -0.5, 0.5)?;
    let b = random_matrix(args.size, args.dtype, args.seed.wrapping_add(1), -0.5, 0.5)?;
    let mut opts = SimOptions::default().with_schedule(args.schedule.clone());
    opts.barriers = !args.drop_barriers;
    let out = simulate_with(&a, &b, &cfg, &opts)?;
    if args.csv {
        println!("{}", matexpo_core::TrafficReport::csv_header());
        println!("{}", out.report.to_csv_row());
    } else {
        print!("{}", out.report);
    }
    let mut schedules = matexpo_core::sim::default_schedules();
    if !schedules.contains(&args.schedule) {
        schedules.push(args.schedule);
    }
    let race = detect_barrier_race_with(&a, &b, &cfg, args.drop_barriers, &schedules)?;
    if !args.csv {
        println!("race_accesses={}", out.race_count);
        println!(
            "verdict={}",
            match race.verdict {
                matexpo_core::RaceVerdict::Clean => "CLEAN",
                matexpo_core::RaceVerdict::RaceDetected => "RACE_DETECTED",
            }
        );
    }
    Ok(())
}
