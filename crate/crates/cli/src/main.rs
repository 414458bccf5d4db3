//! `liftham`: validate base instances, search random lifts for Hamilton
//! cycles, verify cycles and run batch experiments.
//!
//! Exit codes: 0 on completion, 1 when a check (`validate`, `verify`)
//! rejects its input, 2 on unreadable or malformed input.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use liftham::altpath::find_alternating_path;
use liftham::finder::{self, RunOptions, Thresholds, TrialReport};
use liftham::harness::{self, ExperimentSpec, HarnessError, Table};
use liftham::oracle::{cycle_count_stats, verify_hamilton_cycle, ExplicitLift};
use liftham::BaseInstance;

/// Largest lift, in vertices, rendered as DOT.
const DOT_LIMIT: usize = 200;
const DEFAULT_MIN_DEGREE: usize = 5;

#[derive(Parser)]
#[command(
    name = "liftham",
    version,
    about = "Hamilton cycles in random lifts of graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance against the base-graph hypotheses.
    Validate {
        #[arg(long)]
        instance: PathBuf,
        /// Minimum degree required of the base graph.
        #[arg(long, value_name = "K0", default_value_t = DEFAULT_MIN_DEGREE)]
        allow_min_degree: usize,
    },
    /// Sample a lift and search it for a Hamilton cycle.
    Solve(SolveArgs),
    /// Check a cycle file against a lift edge list.
    Verify {
        #[arg(long)]
        cycle: PathBuf,
        #[arg(long)]
        lift: PathBuf,
        /// Also require every lift edge to project onto a base edge.
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Print an alternating path between two base vertices.
    Altpath {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
    },
    /// Cycle-count statistics of uniform random permutations, as CSV.
    Permstats {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a seeded batch experiment and write CSV tables.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Threshold overrides.
    #[arg(long, value_name = "KEY=VAL", num_args = 1..)]
    thresholds: Vec<String>,
    #[arg(long)]
    max_restarts: Option<u32>,
    /// Write the cycle as `base fiber` lines.
    #[arg(long, value_name = "FILE")]
    emit_cycle: Option<PathBuf>,
    /// Write a one-row metrics CSV.
    #[arg(long, value_name = "FILE")]
    emit_metrics: Option<PathBuf>,
    /// Write the fully revealed lift as a `u i v j` edge list.
    #[arg(long, value_name = "FILE")]
    emit_lift: Option<PathBuf>,
    /// Write the fully revealed lift as DOT (small lifts only).
    #[arg(long, value_name = "FILE")]
    emit_dot: Option<PathBuf>,
    /// Record per-phase wall-clock time.
    #[arg(long)]
    timing: bool,
    /// Print the full report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    SuccessRate,
    Deactivation,
    BasicCycles,
    All,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Fiber sizes.
    #[arg(long = "n", value_delimiter = ',', required = true)]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "KEY=VAL", num_args = 1..)]
    thresholds: Vec<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Add wall-clock columns; the tables stop being reproducible.
    #[arg(long)]
    timing: bool,
    #[arg(long, value_enum, default_value_t = Kind::SuccessRate)]
    kind: Kind,
    /// Directory for the CSV files. Required with `--kind all`; otherwise
    /// the table goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Rejected(String),
    Input(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<BaseInstance, Failure> {
    BaseInstance::parse(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rejected(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Validate {
            instance,
            allow_min_degree,
        } => {
            let report = load_instance(&instance)?.validate(allow_min_degree);
            println!("{report}");
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Rejected("instance rejected".into()))
            }
        }
        Command::Solve(args) => solve(args),
        Command::Verify {
            cycle,
            lift,
            instance,
        } => {
            let cycle = finder::parse_cycle(&read(&cycle)?).map_err(input)?;
            let mut lift = ExplicitLift::parse(&read(&lift)?).map_err(input)?;
            if let Some(path) = instance {
                lift = lift.with_base(load_instance(&path)?.graph().as_ref().clone());
            }
            let verdict = verify_hamilton_cycle(&lift, &cycle);
            match verdict.violation {
                None => {
                    println!("valid Hamilton cycle on {} vertices", cycle.len());
                    Ok(())
                }
                Some(v) => Err(Failure::Rejected(format!("invalid: {v}"))),
            }
        }
        Command::Altpath { instance, from, to } => {
            let inst = load_instance(&instance)?;
            let path = find_alternating_path(&inst, from, to).map_err(input)?;
            println!("{path}");
            Ok(())
        }
        Command::Permstats { n, trials, seed } => {
            if n == 0 || trials == 0 {
                return Err(Failure::Input("n and trials must be positive".into()));
            }
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            w.serialize(cycle_count_stats(n, trials, seed)).map_err(input)?;
            w.flush()?;
            Ok(())
        }
        Command::Experiment(args) => experiment(args),
    }
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let inst = load_instance(&args.instance)?;
    if args.n == 0 {
        return Err(Failure::Input("--n must be positive".into()));
    }
    let report = inst.validate(DEFAULT_MIN_DEGREE);
    if !report.passed && report.hamilton_cycles_ok {
        eprintln!("warning: instance fails the hypotheses; searching anyway");
    }
    let mut th = Thresholds::with_overrides(args.n, &args.thresholds).map_err(input)?;
    if let Some(r) = args.max_restarts {
        th.max_restarts = r;
    }
    let wants_lift = args.emit_lift.is_some() || args.emit_dot.is_some();
    if args.emit_dot.is_some() && inst.k() * args.n > DOT_LIMIT {
        return Err(Failure::Input(format!("--emit-dot needs k·n <= {DOT_LIMIT}")));
    }
    let options = RunOptions {
        record_timings: args.timing,
        keep_lift: wants_lift,
    };
    let out = finder::run(&inst, args.n, &th, args.seed, &options).map_err(input)?;
    let r = &out.report;
    if args.json {
        println!("{}", r.to_json());
    } else {
        print_summary(r);
    }
    if let Some(path) = &args.emit_cycle {
        fs::write(path, r.cycle_text().unwrap_or_default())?;
    }
    if let Some(path) = &args.emit_metrics {
        let mut w = csv::Writer::from_path(path).map_err(input)?;
        w.write_record(TrialReport::csv_header(args.timing))
            .map_err(input)?;
        w.write_record(r.csv_record(args.timing)).map_err(input)?;
        w.flush()?;
    }
    if let Some(mut lift) = out.lift {
        lift.reveal_everything();
        if let Some(path) = &args.emit_lift {
            fs::write(path, lift.to_edge_list())?;
        }
        if let Some(path) = &args.emit_dot {
            fs::write(path, lift.to_dot())?;
        }
    }
    Ok(())
}

fn print_summary(r: &TrialReport) {
    println!("outcome: {}", r.outcome.as_str());
    println!("k = {}, n = {}, seed = {}", r.k, r.n, r.seed);
    println!("restarts: {}", r.restarts);
    println!("reveals: {} (all attempts: {})", r.last.reveals, r.total_reveals);
    println!(
        "inactive: {} (budget {}{})",
        r.last.inactive_count,
        r.deactivation_budget,
        if r.deactivation_budget_exceeded {
            ", exceeded"
        } else {
            ""
        }
    );
    println!("basic cycles: {}", r.last.basic_cycles_initial);
    println!("phase calls: {:?}", r.last.phase_invocations);
    for (i, f) in r.attempt_failures.iter().enumerate() {
        println!("attempt {i} failed: {f}");
    }
    if let Some(m) = r.phase_micros {
        println!("phase micros: {m:?}");
    }
}

fn write_table(table: &Table, dir: Option<&Path>, name: &str) -> Result<(), Failure> {
    match dir {
        Some(d) => {
            let path = d.join(name);
            table.write_csv(fs::File::create(&path)?)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut out = io::stdout().lock();
            table.write_csv(&mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<(), Failure> {
    let mut spec = ExperimentSpec::new(load_instance(&args.instance)?, args.ns, args.trials, args.seed);
    spec.overrides = args.thresholds;
    spec.workers = args.workers;
    spec.timing = args.timing;
    spec.check()?;
    let dir = args.out.as_deref();
    if args.kind == Kind::All && dir.is_none() {
        return Err(Failure::Input("--kind all needs --out DIR".into()));
    }
    if let Some(d) = dir {
        fs::create_dir_all(d)?;
    }
    if matches!(args.kind, Kind::SuccessRate | Kind::Deactivation | Kind::All) {
        let batches = harness::run_batches(&spec)?;
        if matches!(args.kind, Kind::SuccessRate | Kind::All) {
            write_table(
                &harness::success_rate_table(&spec, &batches),
                dir,
                "success_rate.csv",
            )?;
        }
        if matches!(args.kind, Kind::Deactivation | Kind::All) {
            write_table(&harness::deactivation_table(&batches), dir, "deactivation.csv")?;
        }
    }
    if matches!(args.kind, Kind::BasicCycles | Kind::All) {
        write_table(&harness::experiment_basic_cycles(&spec)?, dir, "basic_cycles.csv")?;
    }
    Ok(())
}
