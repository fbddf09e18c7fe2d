use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fortify_core::io::{
    generate_grid, generate_kfg, parse_dimacs_road, parse_instance, parse_kfg, parse_spfg, tiny_kfg, tiny_spfg,
    write_bench_csv, write_instance_file, BenchRow, KfgProfile, RoadGame, GRID_BUDGETS,
};
use fortify_core::{
    bruteforce_fortification, solve_fortification, Error, Instance, Settings, SolveStatus, SolverConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

#[derive(Parser)]
#[command(
    name = "fortify",
    version,
    about = "Exact branch-and-cut for 0-1 fortification games"
)]
struct Cli {
    /// Repeat for more log output (-v info, -vv debug, -vvv cut trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print z*, w*, x* and statistics.
    Solve {
        path: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Print every fortification cut added during the run.
        #[arg(long)]
        trace: bool,
    },
    /// Write a generated instance.
    Generate {
        #[command(subcommand)]
        family: Family,
    },
    /// Solve instances under several settings and write a CSV of statistics.
    Bench {
        paths: Vec<PathBuf>,
        #[command(flatten)]
        input: InputArgs,
        /// Comma-separated settings strings.
        #[arg(long, default_value = "IBEG")]
        settings: String,
        /// Solve each instance under the six grid budget pairs instead of its own budgets.
        #[arg(long)]
        paper_budgets: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seconds per solve.
        #[arg(long)]
        time_limit: Option<f64>,
        /// Output file (stdout when absent).
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Worker threads (all cores when absent).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Compare the solver with brute force on random tiny games.
    Verify {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 10)]
        max_n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum Family {
    /// Directed grid shortest-path game.
    Grid {
        #[arg(long, default_value_t = 10)]
        rows: usize,
        #[arg(long, default_value_t = 10)]
        cols: usize,
        #[arg(long, default_value_t = 10)]
        c_max: i64,
        #[arg(long, default_value_t = 10)]
        d_max: i64,
        #[arg(long, default_value_t = 3)]
        bf: i64,
        #[arg(long, default_value_t = 3)]
        bi: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Knapsack game (profile `trs` or `cclw1`..`cclw10`).
    Kfg {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        bf: i64,
        #[arg(long, default_value = "trs")]
        profile: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    /// Pick by header width (KFG or SPFG).
    Auto,
    Kfg,
    Spfg,
    Dimacs,
}

#[derive(Args)]
struct InputArgs {
    #[arg(long, value_enum, default_value_t = Format::Auto)]
    format: Format,
    /// DIMACS source node (1-based).
    #[arg(long, default_value_t = 1)]
    source: usize,
    /// DIMACS sink node (1-based).
    #[arg(long)]
    sink: Option<usize>,
    /// DIMACS fortification budget.
    #[arg(long, default_value_t = 3)]
    bf: i64,
    /// DIMACS interdiction budget.
    #[arg(long, default_value_t = 3)]
    bi: i64,
}

#[derive(Args)]
struct SolverArgs {
    /// Letters from {B, E, G, I}, or `-` for none (default: BEG for
    /// knapsack games, IBEG for shortest-path games).
    #[arg(long)]
    settings: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<usize>,
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    /// Improving attacks collected per separation solve.
    #[arg(long, default_value_t = 1)]
    solution_limit: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::InvalidInstance(_) | Error::Disconnected { .. } | Error::Io(_) => EXIT_PARSE,
            Error::Settings(_) => EXIT_PARSE,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: EXIT_FAILURE,
            message: e.to_string(),
        }
    }
}

/// `FORTIFY_SEED` wins over the command line.
fn effective_seed(cli_seed: u64) -> Result<u64, Failure> {
    match std::env::var("FORTIFY_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| Failure {
            code: EXIT_PARSE,
            message: format!("FORTIFY_SEED={v:?} is not an unsigned integer"),
        }),
        Err(_) => Ok(cli_seed),
    }
}

fn load(path: &Path, input: &InputArgs) -> Result<Instance, Failure> {
    let inst = match input.format {
        Format::Auto => parse_instance(path)?,
        Format::Kfg => parse_kfg(path)?,
        Format::Spfg => parse_spfg(path)?,
        Format::Dimacs => {
            let sink = input.sink.ok_or(Failure {
                code: EXIT_PARSE,
                message: "--sink is required for DIMACS input".into(),
            })?;
            let game = RoadGame {
                source: input.source,
                sink,
                fortify_budget: input.bf,
                interdict_budget: input.bi,
            };
            parse_dimacs_road(path, game)?
        }
    };
    if inst.name.is_empty() {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        return Ok(inst.with_name(stem));
    }
    Ok(inst)
}

fn seconds(limit: Option<f64>) -> Result<Option<Duration>, Failure> {
    limit
        .map(|s| {
            Duration::try_from_secs_f64(s).map_err(|_| Failure {
                code: EXIT_PARSE,
                message: format!("invalid time limit {s}"),
            })
        })
        .transpose()
}

fn config(instance: &Instance, args: &SolverArgs) -> Result<SolverConfig, Failure> {
    let settings = match &args.settings {
        Some(s) => s.parse()?,
        None => Settings::default_for(instance.kind()),
    };
    let mut c = SolverConfig::new(settings).with_seed(effective_seed(args.seed)?);
    c.time_limit = seconds(args.time_limit)?;
    c.node_limit = args.node_limit;
    c.epsilon = args.epsilon;
    c.solution_limit = args.solution_limit.max(1);
    Ok(c)
}

fn solve(path: &Path, input: &InputArgs, args: &SolverArgs, trace: bool) -> Result<(), Failure> {
    let inst = load(path, input)?;
    let mut cfg = config(&inst, args)?;
    cfg.record_trace = trace;
    let r = solve_fortification(&inst, &cfg)?;
    let mut out = io::stdout().lock();
    writeln!(out, "instance   {} ({}, {} assets)", inst.name, inst.kind(), inst.n())?;
    writeln!(out, "settings   {}", cfg.settings)?;
    writeln!(out, "status     {}", r.status)?;
    match r.objective {
        Some(z) => writeln!(out, "z*         {}", inst.to_real(z))?,
        None => writeln!(out, "z*         none")?,
    }
    writeln!(out, "bound      {}", r.bound / inst.scale as f64)?;
    if let Some(w) = &r.fortification {
        writeln!(out, "w*         {w}")?;
    }
    if let Some(x) = &r.attack {
        writeln!(out, "x*         {x}")?;
    }
    let s = &r.stats;
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
    writeln!(out, "root bound {}", opt(s.root_bound))?;
    writeln!(out, "root gap   {}%", opt(s.root_gap_pct))?;
    writeln!(out, "nodes      {}", s.nodes)?;
    writeln!(
        out,
        "fort cuts  {} initial + {} separated ({} local)",
        s.initial_cuts, s.fort_cuts, s.local_cuts
    )?;
    writeln!(out, "int cuts   {}", s.int_cuts)?;
    writeln!(
        out,
        "separation {} calls, {} solved by greedy",
        s.separations, s.greedy_hits
    )?;
    writeln!(
        out,
        "enum       {} trials, {} improved{}",
        s.enum_trials,
        s.enum_improved,
        if s.enum_disabled { ", disabled" } else { "" }
    )?;
    writeln!(out, "seed       {}", s.seed)?;
    writeln!(out, "time       {:.3}s", s.time.as_secs_f64())?;
    if let Some(t) = &r.trace {
        for cut in &t.cuts {
            writeln!(out, "cut {cut}")?;
        }
    }
    if r.status == SolveStatus::Optimal {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_LIMIT,
            message: format!("stopped by {} with gap {:.2}%", r.status, r.gap_pct().unwrap_or(100.0)),
        })
    }
}

fn generate(family: &Family) -> Result<(), Failure> {
    let (inst, out) = match family {
        Family::Grid {
            rows,
            cols,
            c_max,
            d_max,
            bf,
            bi,
            seed,
            out,
        } => (
            generate_grid(*rows, *cols, *c_max, *d_max, (*bf, *bi), effective_seed(*seed)?)?,
            out,
        ),
        Family::Kfg {
            n,
            bf,
            profile,
            seed,
            out,
        } => {
            let profile: KfgProfile = profile.parse()?;
            (generate_kfg(*n, effective_seed(*seed)?, *bf, profile)?, out)
        }
    };
    write_instance_file(&inst, out)?;
    log::info!("wrote {} with {} assets to {}", inst.name, inst.n(), out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bench(
    paths: &[PathBuf],
    input: &InputArgs,
    settings: &str,
    paper_budgets: bool,
    seed: u64,
    time_limit: Option<f64>,
    out: Option<&Path>,
    jobs: Option<usize>,
) -> Result<(), Failure> {
    let settings: Vec<Settings> = settings
        .split(',')
        .map(|s| s.parse::<Settings>())
        .collect::<Result<_, _>>()?;
    let seed = effective_seed(seed)?;
    let limit = seconds(time_limit)?;
    let mut instances = Vec::new();
    for p in paths {
        let inst = load(p, input)?;
        if paper_budgets {
            for (bf, bi) in GRID_BUDGETS {
                let name = format!("{}_bf{bf}_bi{bi}", inst.name);
                instances.push(inst.clone().with_budgets(bf, bi)?.with_name(name));
            }
        } else {
            instances.push(inst);
        }
    }
    let tasks: Vec<(&Instance, Settings)> = instances
        .iter()
        .flat_map(|i| settings.iter().map(move |&s| (i, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure {
            code: EXIT_FAILURE,
            message: e.to_string(),
        })?;
    let rows: Mutex<Vec<(usize, BenchRow)>> = Mutex::new(Vec::new());
    pool.install(|| {
        tasks.par_iter().enumerate().try_for_each(|(k, (inst, s))| {
            let mut cfg = SolverConfig::new(*s).with_seed(seed);
            cfg.time_limit = limit;
            let r = solve_fortification(inst, &cfg)?;
            log::info!(
                "{} [{}]: {} in {:.2}s",
                inst.name,
                s,
                r.status,
                r.stats.time.as_secs_f64()
            );
            rows.lock()
                .unwrap()
                .push((k, BenchRow::new(&inst.name, &s.to_string(), &r)));
            Ok::<(), Error>(())
        })
    })?;
    let mut rows = rows.into_inner().unwrap();
    rows.sort_by_key(|r| r.0);
    let rows: Vec<BenchRow> = rows.into_iter().map(|r| r.1).collect();
    match out {
        Some(p) => write_bench_csv(File::create(p)?, &rows)?,
        None => write_bench_csv(io::stdout().lock(), &rows)?,
    }
    Ok(())
}

fn verify(count: usize, max_n: usize, seed: u64) -> Result<(), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(effective_seed(seed)?);
    let instances: Vec<Instance> = (0..count)
        .map(|k| {
            if k % 2 == 0 {
                tiny_kfg(&mut rng, max_n)
            } else {
                tiny_spfg(&mut rng, max_n)
            }
        })
        .collect();
    let mismatches: Vec<String> = instances
        .par_iter()
        .enumerate()
        .map(|(k, inst)| -> Result<Vec<String>, Error> {
            let (z, _) = bruteforce_fortification(inst)?;
            let mut bad = Vec::new();
            for s in Settings::all() {
                let r = solve_fortification(inst, &SolverConfig::new(s).with_seed(k as u64))?;
                if r.objective != Some(z) {
                    bad.push(format!(
                        "game {k} ({}) [{s}]: solver {:?}, brute force {z}",
                        inst.kind(),
                        r.objective
                    ));
                }
            }
            Ok(bad)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    for m in &mismatches {
        eprintln!("mismatch: {m}");
    }
    println!(
        "verified {count} games (n <= {max_n}) under all 16 settings: {} mismatches",
        mismatches.len()
    );
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_MISMATCH,
            message: format!("{} mismatches", mismatches.len()),
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    let result = match &cli.command {
        Command::Solve {
            path,
            input,
            solver,
            trace,
        } => solve(path, input, solver, *trace),
        Command::Generate { family } => generate(family),
        Command::Bench {
            paths,
            input,
            settings,
            paper_budgets,
            seed,
            time_limit,
            out,
            jobs,
        } => bench(
            paths,
            input,
            settings,
            *paper_budgets,
            *seed,
            *time_limit,
            out.as_deref(),
            *jobs,
        ),
        Command::Verify { count, max_n, seed } => verify(*count, *max_n, *seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fortify: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
