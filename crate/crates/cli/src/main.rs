use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use coco_ttp::bench::{run_experiment, write_reports, ORACLE_LABEL};
use coco_ttp::gen::{benchmark_instance, random_tiny_instance, BenchmarkSpec};
use coco_ttp::oracle::brute_force_optimum;
use coco_ttp::{coco_solve, load_instance, Budget, InstanceF64, NeighborBackend, SolutionF64, SolverConfig, Variant};
use serde::Serialize;
use sha2::{Digest, Sha256};

mod manifest;

#[derive(Parser)]
#[command(name = "coco-ttp", version, about = "Travelling Thief Problem solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance.
    Solve(SolveArgs),
    /// Run a benchmark suite described by a TOML manifest.
    Bench(BenchArgs),
    /// Exhaustive optimum of a tiny instance.
    Oracle(OracleArgs),
    /// Write a generated instance.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "s4")]
    variant: Variant,
    /// Wall-clock budget in seconds.
    #[arg(long, conflicts_with = "restarts")]
    time_limit: Option<f64>,
    /// Number of restarts; makes the run deterministic.
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    alpha: f64,
    /// `delaunay`, `knn` or `knn:K`.
    #[arg(long, default_value = "delaunay")]
    neighbors: NeighborBackend,
    #[arg(long, value_enum, default_value = "text")]
    out: OutFormat,
    /// Write the full tour and plan to this file.
    #[arg(long)]
    dump_solution: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    out: OutFormat,
    #[arg(long)]
    dump_solution: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// eil76 category shape: A, B or C.
    #[arg(long, conflicts_with = "tiny")]
    category: Option<char>,
    /// Random tiny instance with N cities and M items, given as `N,M`.
    #[arg(long, value_parser = parse_pair)]
    tiny: Option<(usize, usize)>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected N,M")?;
    let n = a.trim().parse().map_err(|e| format!("{e}"))?;
    let m = b.trim().parse().map_err(|e| format!("{e}"))?;
    if n < 2 {
        return Err("need at least 2 cities".into());
    }
    Ok((n, m))
}

#[derive(Serialize)]
struct Report<'a> {
    instance: &'a str,
    solver: &'a str,
    seed: u64,
    gain: f64,
    tour_length: f64,
    items_collected: usize,
    digest: String,
    restarts: usize,
    accepted_moves: usize,
    mean_rel_rev_len_pct: f64,
}

fn digest(sol: &SolutionF64) -> String {
    let mut h = Sha256::new();
    for c in sol.tour.to_one_based() {
        h.update((c as u64).to_le_bytes());
    }
    h.update(sol.plan.to_binary());
    h.finalize().iter().take(8).fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn bracketed<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    let parts: Vec<String> = xs.into_iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(","))
}

fn dump(path: &Path, sol: &SolutionF64) -> Result<()> {
    let text = format!("{}\n{}\n", bracketed(sol.tour.to_one_based()), bracketed(sol.plan.to_binary()));
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(report: &Report, out: OutFormat) -> Result<()> {
    match out {
        OutFormat::Json => println!("{}", serde_json::to_string_pretty(report)?),
        OutFormat::Csv => {
            println!("instance,solver,seed,gain,tour_length,items_collected,digest,restarts,accepted_moves,mean_rel_rev_len_pct");
            println!(
                "{},{},{},{},{},{},{},{},{},{}",
                report.instance,
                report.solver,
                report.seed,
                coco_ttp::bench::format_g17(report.gain),
                report.tour_length,
                report.items_collected,
                report.digest,
                report.restarts,
                report.accepted_moves,
                coco_ttp::bench::format_g17(report.mean_rel_rev_len_pct),
            );
        }
        OutFormat::Text => {
            println!("instance: {}", report.instance);
            println!("solver:   {} (seed {})", report.solver, report.seed);
            println!("gain:     {}", report.gain);
            println!(
                "solution: {} (tour length {}, {} items)",
                report.digest, report.tour_length, report.items_collected
            );
            if report.restarts > 0 {
                println!("restarts: {}", report.restarts);
                println!(
                    "moves:    {} accepted, mean reversal {:.2}% of the tour",
                    report.accepted_moves, report.mean_rel_rev_len_pct
                );
            }
        }
    }
    Ok(())
}

fn load(path: &Path) -> Result<InstanceF64> {
    load_instance(path).with_context(|| format!("loading {}", path.display()))
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let inst = load(&args.instance)?;
    let budget = match (args.time_limit, args.restarts) {
        (Some(t), None) => {
            if !(t.is_finite() && t > 0.0) {
                bail!("--time-limit must be positive");
            }
            Budget::Time(Duration::from_secs_f64(t))
        }
        (None, Some(r)) => Budget::Restarts(r),
        (None, None) => Budget::default(),
        (Some(_), Some(_)) => unreachable!("clap rejects both"),
    };
    let config = SolverConfig {
        variant: args.variant,
        budget,
        alpha: args.alpha,
        seed: args.seed,
        neighbors: args.neighbors,
    };
    let res = coco_solve(&inst, &config)?;
    if let Some(p) = &args.dump_solution {
        dump(p, &res.best)?;
    }
    emit(
        &Report {
            instance: inst.name(),
            solver: args.variant.as_str(),
            seed: args.seed,
            gain: res.best_gain,
            tour_length: res.best.tour.length(&inst),
            items_collected: res.best.plan.count(),
            digest: digest(&res.best),
            restarts: res.restarts,
            accepted_moves: res.moves.accepted,
            mean_rel_rev_len_pct: res.moves.mean_rel_len_pct(),
        },
        args.out,
    )
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let inst = load(&args.instance)?;
    let (gain, sol) = brute_force_optimum(&inst)?;
    if let Some(p) = &args.dump_solution {
        dump(p, &sol)?;
    }
    emit(
        &Report {
            instance: inst.name(),
            solver: ORACLE_LABEL,
            seed: 0,
            gain,
            tour_length: sol.tour.length(&inst),
            items_collected: sol.plan.count(),
            digest: digest(&sol),
            restarts: 0,
            accepted_moves: 0,
            mean_rel_rev_len_pct: 0.0,
        },
        args.out,
    )
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let suite = manifest::Manifest::load(&args.manifest)?.resolve(args.manifest.parent().unwrap_or(Path::new(".")))?;
    let exp = run_experiment(&suite.entries, &suite.solvers, &suite.config)?;
    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let (csv, json) = write_reports(&exp, &args.out_dir)?;
    for f in &exp.failures {
        eprintln!("failed: {} {}: {}", f.instance, f.solver, f.error);
    }
    println!("{} runs, {} failures", exp.runs.len(), exp.failures.len());
    for (inst, row) in &exp.rdi {
        let cells: Vec<String> = row.iter().map(|(s, v)| format!("{s}={v:.2}")).collect();
        println!("rdi {inst}: {}", cells.join(" "));
    }
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let inst: InstanceF64 = match (args.category, args.tiny) {
        (Some(c), None) => {
            let spec = BenchmarkSpec::eil76_category(c, args.seed)?;
            let name = spec.stem();
            benchmark_instance(&spec, &name)?
        }
        (None, Some((n, m))) => random_tiny_instance(args.seed, n, m),
        _ => bail!("give exactly one of --category, --tiny"),
    };
    std::fs::write(&args.out, inst.to_ttp_string()).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("TTP_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("TTP_THREADS={v}"))?;
        if n == 0 {
            bail!("TTP_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Generate(a) => cmd_generate(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
