//! Restart loop alternating tour search and packing search.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::construct::{init_collection_plan, initial_tour};
use crate::error::{Error, Result};
use crate::eval::{ProfileIndex, Solution};
use crate::instance::Instance;
use crate::kp_search::{kp_solver, kp_solver_standard, BoundaryIndex};
use crate::neighbors::{build_candidates, CandidateLists, NeighborBackend};
use crate::scalar::Scalar;
use crate::tsp_search::{tsp_solver, MoveStats};

/// Optional wall-clock limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn never() -> Self {
        Deadline(None)
    }

    pub fn after(d: Duration) -> Self {
        Deadline(Some(Instant::now() + d))
    }

    #[inline]
    pub fn expired(&self) -> bool {
        self.0.is_some_and(|t| Instant::now() >= t)
    }
}

/// Solver variant: tour move kind times packing search kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Plain reversals, bit-flip over all items.
    S1,
    /// Plain reversals, boundary bit-flip.
    S2,
    /// Profit-guided reversals, bit-flip over all items.
    S3,
    /// Profit-guided reversals, boundary bit-flip.
    S4,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::S1, Variant::S2, Variant::S3, Variant::S4];

    pub fn uses_pgch(self) -> bool {
        matches!(self, Variant::S3 | Variant::S4)
    }

    pub fn uses_boundary(self) -> bool {
        matches!(self, Variant::S2 | Variant::S4)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::S1 => "s1",
            Variant::S2 => "s2",
            Variant::S3 => "s3",
            Variant::S4 => "s4",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s1" => Ok(Variant::S1),
            "s2" => Ok(Variant::S2),
            "s3" => Ok(Variant::S3),
            "s4" | "coco" => Ok(Variant::S4),
            other => Err(Error::OutOfRange(format!("unknown variant '{other}'"))),
        }
    }
}

/// Stopping rule for the restart loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    /// Restart until this much wall time has passed.
    Time(Duration),
    /// Run exactly this many restarts; fully deterministic.
    Restarts(usize),
}

impl Default for Budget {
    fn default() -> Self {
        Budget::Time(Duration::from_secs(600))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub variant: Variant,
    pub budget: Budget,
    /// Minimum relative improvement per tour-search sweep.
    pub alpha: f64,
    pub seed: u64,
    pub neighbors: NeighborBackend,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            variant: Variant::S4,
            budget: Budget::default(),
            alpha: 1e-4,
            seed: 0,
            neighbors: NeighborBackend::Delaunay,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::OutOfRange(format!("alpha must be positive, got {}", self.alpha)));
        }
        match self.budget {
            Budget::Restarts(0) => Err(Error::OutOfRange("restart budget must be positive".into())),
            Budget::Time(d) if d.is_zero() => Err(Error::OutOfRange("time budget must be positive".into())),
            _ => Ok(()),
        }
    }
}

/// Per-restart record.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace<T: Scalar = f64> {
    pub initial_gain: T,
    pub final_gain: T,
    /// Completed tour-then-packing rounds.
    pub inner_iterations: usize,
    pub moves: MoveStats,
    pub flips: usize,
}

#[derive(Debug, Clone)]
pub struct SolveResult<T: Scalar = f64> {
    pub best: Solution<T>,
    pub best_gain: T,
    pub trace: Vec<RestartTrace<T>>,
    pub elapsed: Duration,
    pub restarts: usize,
    /// Budget that was in force.
    pub budget: Budget,
    pub moves: MoveStats,
    /// Share of restarts whose initial tour was new, in percent.
    pub unique_initial_tours_pct: f64,
}

fn same_gain<T: Scalar>(a: T, b: T) -> bool {
    (a - b).abs() <= T::lit(1e-9) * T::one().max(a.abs())
}

/// Runs the solver, building candidate lists first.
pub fn coco_solve<T: Scalar>(inst: &Instance<T>, config: &SolverConfig) -> Result<SolveResult<T>> {
    let cands = build_candidates(inst, config.neighbors);
    coco_solve_with(inst, &cands, config)
}

/// Runs the solver with precomputed candidate lists.
///
/// Every restart builds a fresh tour and plan, then alternates tour search
/// and packing search until a packing round leaves the gain unchanged. The
/// best solution over all restarts is returned.
pub fn coco_solve_with<T: Scalar>(
    inst: &Instance<T>,
    cands: &CandidateLists,
    config: &SolverConfig,
) -> Result<SolveResult<T>> {
    config.validate()?;
    if inst.n() < 2 {
        return Err(Error::InfeasibleInstance("need at least 2 cities".into()));
    }
    let start = Instant::now();
    let (deadline, max_restarts) = match config.budget {
        Budget::Time(d) => (Deadline::after(d), usize::MAX),
        Budget::Restarts(r) => (Deadline::never(), r),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let variant = config.variant;
    let mut best: Option<Solution<T>> = None;
    let mut trace = Vec::new();
    let mut total_moves = MoveStats::default();
    let mut seen_tours = HashSet::new();

    while trace.len() < max_restarts && (trace.is_empty() || !deadline.expired()) {
        let tour = initial_tour(inst, cands, &mut rng);
        seen_tours.insert(tour.order().to_vec());
        let (plan, _) = init_collection_plan(inst, &tour);
        let mut sol = Solution::new(inst, tour, plan)?;
        let initial_gain = sol.gain();
        let mut moves = MoveStats::default();
        let mut flips = 0;
        let mut inner_iterations = 0;
        loop {
            tsp_solver(inst, &mut sol, cands, config.alpha, variant.uses_pgch(), &deadline, &mut moves)?;
            let g_tsp = sol.gain();
            let log = if variant.uses_boundary() {
                let mut profile = ProfileIndex::build(inst, &sol.tour, &sol.plan);
                let mut index = BoundaryIndex::build(&profile, inst.m());
                kp_solver(inst, &mut sol, &mut profile, &mut index, &mut rng, &deadline)
            } else {
                kp_solver_standard(inst, &mut sol, &mut rng, &deadline)
            };
            flips += log.accepted.len();
            inner_iterations += 1;
            if same_gain(sol.gain(), g_tsp) || deadline.expired() {
                break;
            }
        }
        sol.refresh(inst)?;
        total_moves.merge(&moves);
        trace.push(RestartTrace {
            initial_gain,
            final_gain: sol.gain(),
            inner_iterations,
            moves,
            flips,
        });
        if best.as_ref().map_or(true, |b| sol.gain() > b.gain()) {
            best = Some(sol);
        }
    }

    let best = best.expect("at least one restart runs");
    let restarts = trace.len();
    Ok(SolveResult {
        best_gain: best.gain(),
        best,
        trace,
        elapsed: start.elapsed(),
        restarts,
        budget: config.budget,
        moves: total_moves,
        unique_initial_tours_pct: seen_tours.len() as f64 * 100.0 / restarts as f64,
    })
}
