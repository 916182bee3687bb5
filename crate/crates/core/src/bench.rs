//! Multi-run experiments, relative deviation index tables and reports.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::evaluate_full;
use crate::instance::{load_instance, Instance};
use crate::neighbors::{build_candidates, NeighborBackend};
use crate::oracle::brute_force_optimum;
use crate::solver::{coco_solve_with, Budget, SolverConfig, Variant};

/// Label of the exhaustive oracle in reports.
pub const ORACLE_LABEL: &str = "oracle";

/// CSV header, in column order.
pub const CSV_HEADER: [&str; 8] = [
    "instance",
    "variant",
    "seed",
    "gain",
    "time_s",
    "restarts",
    "accepted_moves",
    "mean_rel_rev_len_pct",
];

/// One solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    /// Solver label (variant name unless configured otherwise).
    pub variant: String,
    pub seed: u64,
    pub gain: f64,
    pub time_s: f64,
    pub restarts: usize,
    pub accepted_moves: usize,
    pub mean_rel_rev_len_pct: f64,
    /// JSON only.
    #[serde(default)]
    pub unique_initial_tours_pct: f64,
}

/// Relative deviation index: where `g_mean` lies between the pooled
/// extremes, in percent. 100 when all pooled gains are equal.
pub fn rdi(g_mean: f64, g_min: f64, g_max: f64) -> Result<f64> {
    let tol = 1e-9 * g_mean.abs().max(g_min.abs()).max(g_max.abs()).max(1.0);
    if !(g_min - tol <= g_mean && g_mean <= g_max + tol) {
        return Err(Error::OutOfRange(format!(
            "mean {g_mean} outside [{g_min}, {g_max}]"
        )));
    }
    if g_max == g_min {
        return Ok(100.0);
    }
    Ok(((g_mean - g_min) * 100.0 / (g_max - g_min)).clamp(0.0, 100.0))
}

/// Per-instance pooled extremes and per-solver means and indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RdiTable {
    /// instance -> solver -> RDI
    pub rdi: BTreeMap<String, BTreeMap<String, f64>>,
    /// instance -> solver -> mean gain
    pub mean: BTreeMap<String, BTreeMap<String, f64>>,
    /// instance -> (min, max) over every run of every solver
    pub pool: BTreeMap<String, (f64, f64)>,
}

impl RdiTable {
    pub fn from_records(records: &[RunRecord]) -> Result<Self> {
        let mut gains: BTreeMap<&str, BTreeMap<&str, Vec<f64>>> = BTreeMap::new();
        for r in records {
            gains
                .entry(&r.instance)
                .or_default()
                .entry(&r.variant)
                .or_default()
                .push(r.gain);
        }
        let mut table = RdiTable::default();
        for (inst, per_solver) in gains {
            let all = per_solver.values().flatten().copied();
            let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| (lo.min(g), hi.max(g)));
            table.pool.insert(inst.to_string(), (lo, hi));
            for (solver, gs) in per_solver {
                let mean = gs.iter().sum::<f64>() / gs.len() as f64;
                let value = rdi(mean, lo, hi)?;
                table.mean.entry(inst.to_string()).or_default().insert(solver.to_string(), mean);
                table.rdi.entry(inst.to_string()).or_default().insert(solver.to_string(), value);
            }
        }
        Ok(table)
    }

    pub fn get(&self, instance: &str, solver: &str) -> Option<f64> {
        self.rdi.get(instance)?.get(solver).copied()
    }
}

/// A solver entry of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub label: String,
    pub variant: Variant,
    pub alpha: f64,
    pub neighbors: NeighborBackend,
}

impl SolverSpec {
    pub fn new(variant: Variant) -> Self {
        SolverSpec {
            label: variant.to_string(),
            variant,
            alpha: 1e-4,
            neighbors: NeighborBackend::Delaunay,
        }
    }
}

/// An instance of the suite, or why it could not be loaded.
#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub name: String,
    pub instance: std::result::Result<Instance, Error>,
}

impl SuiteEntry {
    pub fn loaded(instance: Instance) -> Self {
        SuiteEntry {
            name: instance.name().to_string(),
            instance: Ok(instance),
        }
    }

    /// Loads a file; the entry is named after the file stem.
    pub fn from_path(path: &Path) -> Self {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        SuiteEntry {
            name,
            instance: load_instance(path),
        }
    }
}

/// Experiment settings shared by all runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub runs: usize,
    pub budget: Budget,
    pub master_seed: u64,
    /// Add the exhaustive optimum of each instance as an extra solver.
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub instance: String,
    pub solver: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub runs: Vec<RunRecord>,
    pub rdi: BTreeMap<String, BTreeMap<String, f64>>,
    pub pool: BTreeMap<String, (f64, f64)>,
    pub failures: Vec<Failure>,
}

/// Seed of run `run` on instance `instance`, shared by all solvers so that
/// they face the same random streams.
pub fn run_seed(master: u64, instance: usize, run: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(instance as u64);
    rng.set_word_pos(2 * run as u128);
    rng.next_u64()
}

/// Runs every solver `runs` times on every instance, in parallel on the
/// current rayon pool. Records come back in (instance, solver, run) order
/// regardless of scheduling; failures are recorded and skipped.
pub fn run_experiment(suite: &[SuiteEntry], solvers: &[SolverSpec], cfg: &ExperimentConfig) -> Result<Experiment> {
    struct Job<'a> {
        name: &'a str,
        inst: &'a Instance,
        solver: Option<&'a SolverSpec>,
        seed: u64,
    }
    let mut failures = Vec::new();
    let mut jobs = Vec::new();
    for (i, entry) in suite.iter().enumerate() {
        let inst = match &entry.instance {
            Ok(inst) => inst,
            Err(e) => {
                failures.push(Failure {
                    instance: entry.name.clone(),
                    solver: String::new(),
                    error: e.to_string(),
                });
                continue;
            }
        };
        for s in solvers {
            for r in 0..cfg.runs {
                jobs.push(Job { name: &entry.name, inst, solver: Some(s), seed: run_seed(cfg.master_seed, i, r) });
            }
        }
        if cfg.oracle {
            jobs.push(Job { name: &entry.name, inst, solver: None, seed: 0 });
        }
    }

    let outcomes: Vec<std::result::Result<RunRecord, Failure>> = jobs
        .par_iter()
        .map(|job| {
            let label = job.solver.map_or(ORACLE_LABEL, |s| s.label.as_str());
            let fail = |e: Error| Failure {
                instance: job.name.to_string(),
                solver: label.to_string(),
                error: e.to_string(),
            };
            let started = Instant::now();
            match job.solver {
                None => {
                    let (gain, _) = brute_force_optimum(job.inst).map_err(fail)?;
                    Ok(RunRecord {
                        instance: job.name.to_string(),
                        variant: label.to_string(),
                        seed: 0,
                        gain,
                        time_s: started.elapsed().as_secs_f64(),
                        restarts: 0,
                        accepted_moves: 0,
                        mean_rel_rev_len_pct: 0.0,
                        unique_initial_tours_pct: 0.0,
                    })
                }
                Some(s) => {
                    let config = SolverConfig {
                        variant: s.variant,
                        budget: cfg.budget,
                        alpha: s.alpha,
                        seed: job.seed,
                        neighbors: s.neighbors,
                    };
                    let cands = build_candidates(job.inst, s.neighbors);
                    let res = coco_solve_with(job.inst, &cands, &config).map_err(fail)?;
                    let gain = evaluate_full(job.inst, &res.best.tour, &res.best.plan).map_err(fail)?.gain;
                    Ok(RunRecord {
                        instance: job.name.to_string(),
                        variant: label.to_string(),
                        seed: job.seed,
                        gain,
                        time_s: res.elapsed.as_secs_f64(),
                        restarts: res.restarts,
                        accepted_moves: res.moves.accepted,
                        mean_rel_rev_len_pct: res.moves.mean_rel_len_pct(),
                        unique_initial_tours_pct: res.unique_initial_tours_pct,
                    })
                }
            }
        })
        .collect();

    let mut runs = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        match o {
            Ok(r) => runs.push(r),
            Err(f) => {
                log::warn!("{} / {}: {}", f.instance, f.solver, f.error);
                failures.push(f);
            }
        }
    }
    let table = RdiTable::from_records(&runs)?;
    Ok(Experiment {
        runs,
        rdi: table.rdi,
        pool: table.pool,
        failures,
    })
}

/// Formats like C's `%.17g`: enough digits to round-trip any `f64`.
pub fn format_g17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..17).contains(&exp) {
        trim(format!("{:.*}", (16 - exp) as usize, x))
    } else {
        format!("{}e{}{:02}", trim(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Bench(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record([
            r.instance.clone(),
            r.variant.clone(),
            r.seed.to_string(),
            format_g17(r.gain),
            format_g17(r.time_s),
            r.restarts.to_string(),
            r.accepted_moves.to_string(),
            format_g17(r.mean_rel_rev_len_pct),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Bench(e.to_string()))
}

/// Reads records written by [`write_csv`]; the JSON-only column is zero.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers().map_err(|e| Error::Bench(e.to_string()))?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::Bench(format!("unexpected CSV header {headers:?}")));
    }
    let bad = |what: &str, v: &str| Error::Bench(format!("bad {what} '{v}'"));
    rd.records()
        .map(|row| {
            let row = row.map_err(|e| Error::Bench(e.to_string()))?;
            let f = |i: usize| row[i].parse::<f64>().map_err(|_| bad(CSV_HEADER[i], &row[i]));
            let u = |i: usize| row[i].parse::<usize>().map_err(|_| bad(CSV_HEADER[i], &row[i]));
            Ok(RunRecord {
                instance: row[0].to_string(),
                variant: row[1].to_string(),
                seed: row[2].parse().map_err(|_| bad("seed", &row[2]))?,
                gain: f(3)?,
                time_s: f(4)?,
                restarts: u(5)?,
                accepted_moves: u(6)?,
                mean_rel_rev_len_pct: f(7)?,
                unique_initial_tours_pct: 0.0,
            })
        })
        .collect()
}

pub fn to_json(exp: &Experiment) -> Result<String> {
    serde_json::to_string_pretty(exp).map_err(|e| Error::Bench(e.to_string()))
}

pub fn from_json(text: &str) -> Result<Experiment> {
    serde_json::from_str(text).map_err(|e| Error::Bench(e.to_string()))
}

/// Writes `results.csv` and `results.json` into `dir`; returns both paths.
pub fn write_reports(exp: &Experiment, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let io = |e: std::io::Error| Error::Bench(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let csv_path = dir.join("results.csv");
    let json_path = dir.join("results.json");
    write_csv(&exp.runs, std::fs::File::create(&csv_path).map_err(io)?)?;
    std::fs::write(&json_path, to_json(exp)?).map_err(io)?;
    Ok((csv_path, json_path))
}
