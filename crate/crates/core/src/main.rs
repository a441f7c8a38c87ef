use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use omega_synth::aiger::{parse_aag, print_aag};
use omega_synth::bench::{self, BenchConfig, Mode, Track, WorkerReport};
use omega_synth::gen::{self, ArenaFamily};
use omega_synth::hoa::print_ehoa;
use omega_synth::pipeline::{self, Format, SolverChoice, Spec};
use omega_synth::verify::{Verdict, Witness};

#[derive(Parser)]
#[command(
    name = "omega-synth",
    version,
    about = "Reactive synthesis from parity automata and AIGER safety specifications"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide realizability and optionally write a controller.
    Solve(SolveArgs),
    /// Model-check a controller against its specification.
    Verify(VerifyArgs),
    /// Print the normalized (min-even, complete) form of an eHOA automaton.
    Normalize {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Benchmark runner.
    #[command(subcommand)]
    Bench(BenchCmd),
    /// Generators for arenas and the desk suite.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Single-instance job used by the benchmark runner (prints one JSON line).
    #[command(hide = true)]
    Worker(WorkerArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long, default_value = "zielonka")]
    solver: SolverChoice,
    #[arg(long, default_value = "synth")]
    mode: Mode,
    /// Where to write the controller; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    controller: PathBuf,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct WorkerArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    mode: Mode,
    #[arg(long, default_value = "zielonka")]
    solver: SolverChoice,
    #[arg(long)]
    controller: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Run a suite and write scoreboard.csv, cactus_time.csv, cactus_size.csv, ranking.md.
    Run(RunArgs),
    /// Rebuild the report files from an existing scoreboard.csv.
    Report {
        #[arg(long)]
        scoreboard: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    suite: PathBuf,
    #[arg(long)]
    track: Track,
    #[arg(long, default_value = "real")]
    mode: Mode,
    /// Wall-clock limit per instance in seconds (default 3600, or 10000 with --extended).
    #[arg(long)]
    timeout: Option<f64>,
    /// CPU limit per instance in seconds (default: the wall limit, or 40000 with --extended).
    #[arg(long)]
    cpu_limit: Option<f64>,
    /// Use the extended limits: 10000 s wall-clock, 40000 s CPU.
    #[arg(long)]
    extended: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Solver configurations to run; each becomes one scoreboard configuration.
    #[arg(long = "solver", default_value = "zielonka")]
    solvers: Vec<SolverChoice>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum GenCmd {
    /// Print a generated arena in PGSolver format.
    Arena {
        #[arg(long, default_value = "random")]
        family: ArenaFamily,
        /// Defaults to $OMEGA_SYNTH_SEED, else 0.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        d: u32,
    },
    /// Write the desk suite (.aag safety specs and .ehoa automata) into a directory.
    Suite {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Verify(args) => return verify(args),
        Cmd::Solve(args) => solve(args),
        Cmd::Normalize { spec } => normalize(spec),
        Cmd::Bench(cmd) => run_bench(cmd),
        Cmd::Gen(cmd) => run_gen(cmd),
        Cmd::Worker(args) => worker(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

type AnyResult = Result<(), Box<dyn std::error::Error>>;

fn solve(args: SolveArgs) -> AnyResult {
    let spec = Spec::load(&args.spec, args.format)?;
    let outcome = match args.mode {
        Mode::Realizability => pipeline::realizability(&spec, args.solver)?,
        Mode::Synthesis => pipeline::synthesize(&spec, args.solver)?,
    };
    if !outcome.realizable {
        println!("UNREALIZABLE");
        return Ok(());
    }
    match (&outcome.controller, &args.output) {
        (Some(c), Some(path)) => {
            std::fs::write(path, print_aag(c))?;
            println!("REALIZABLE");
        }
        (Some(c), None) => {
            println!("REALIZABLE");
            print!("{}", print_aag(c));
        }
        (None, _) => println!("REALIZABLE"),
    }
    Ok(())
}

fn worker(args: WorkerArgs) -> AnyResult {
    let spec = Spec::load(&args.spec, None)?;
    let outcome = match args.mode {
        Mode::Realizability => pipeline::realizability(&spec, args.solver)?,
        Mode::Synthesis => pipeline::synthesize(&spec, args.solver)?,
    };
    if let (Some(c), Some(path)) = (&outcome.controller, &args.controller) {
        std::fs::write(path, print_aag(c))?;
    }
    let report = WorkerReport {
        realizable: outcome.realizable,
        gates: outcome.gates().map(|g| g as u64),
    };
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn bits(v: u64, n: usize) -> String {
    (0..n).map(|k| if v >> k & 1 == 1 { '1' } else { '0' }).collect()
}

fn verify(args: VerifyArgs) -> ExitCode {
    let checked = (|| -> Result<(Verdict, Vec<String>), Box<dyn std::error::Error>> {
        let spec = Spec::load(&args.spec, args.format)?;
        let ctrl = parse_aag(&pipeline::read(&args.controller)?)?;
        let verdict = pipeline::verify(&spec, &ctrl)?;
        Ok((verdict, spec.io_names().inputs))
    })();
    match checked {
        Ok((Verdict::Pass, _)) => {
            println!("PASS");
            ExitCode::SUCCESS
        }
        Ok((Verdict::Fail(w), inputs)) => {
            let n = inputs.len();
            let mut out = String::from("FAIL\n");
            let _ = writeln!(out, "inputs: {}", inputs.join(" "));
            match w {
                Witness::Safety { inputs } => {
                    for (k, v) in inputs.iter().enumerate() {
                        let _ = writeln!(out, "step {k}: {}", bits(*v, n));
                    }
                }
                Witness::Parity { prefix, cycle } => {
                    for v in prefix {
                        let _ = writeln!(out, "prefix: {}", bits(v, n));
                    }
                    for v in cycle {
                        let _ = writeln!(out, "cycle: {}", bits(v, n));
                    }
                }
            }
            print!("{out}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn normalize(path: PathBuf) -> AnyResult {
    match Spec::load(&path, Some(Format::Ehoa))? {
        Spec::Parity(a) => print!("{}", print_ehoa(&a)),
        Spec::Safety(_) => unreachable!("loaded as eHOA"),
    }
    Ok(())
}

fn run_bench(cmd: BenchCmd) -> AnyResult {
    match cmd {
        BenchCmd::Report { scoreboard, out } => {
            let board = bench::Scoreboard::read_csv(&scoreboard)?;
            bench::emit_report(&board, &out)?;
        }
        BenchCmd::Run(args) => {
            let mut board = bench::Scoreboard::default();
            let mut seen = Vec::new();
            for solver in args.solvers {
                if seen.contains(&solver) {
                    continue;
                }
                seen.push(solver);
                let mut cfg = BenchConfig::new(args.suite.clone(), args.track, args.mode, args.out.join("runs"))?;
                if args.extended {
                    cfg = cfg.extended_profile();
                }
                if let Some(t) = args.timeout {
                    cfg.wall_limit = t;
                    if args.cpu_limit.is_none() && !args.extended {
                        cfg.cpu_limit = t;
                    }
                }
                if let Some(c) = args.cpu_limit {
                    cfg.cpu_limit = c;
                }
                cfg.workers = args.workers;
                cfg.solver = solver;
                cfg.name = solver.to_string();
                board.merge(bench::run_suite(&cfg)?);
            }
            bench::emit_report(&board, &args.out)?;
            for s in bench::rank(&board).by_solved {
                println!(
                    "{}: solved {} quality {:.3} wall {:.3}s",
                    s.config, s.solved, s.quality, s.wall_time
                );
            }
        }
    }
    Ok(())
}

fn run_gen(cmd: GenCmd) -> AnyResult {
    match cmd {
        GenCmd::Arena { family, seed, n, d } => {
            let seed = seed.unwrap_or_else(|| gen::seed_from_env(0));
            print!("{}", gen::generate_arena(family, seed, n, d).to_pgsolver());
        }
        GenCmd::Suite { out, seed } => {
            let seed = seed.unwrap_or_else(|| gen::seed_from_env(0));
            let suite = gen::write_suite(&out, seed)?;
            println!("wrote {} instances to {}", suite.len(), out.display());
        }
    }
    Ok(())
}
