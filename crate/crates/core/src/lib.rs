//! Travelling Thief Problem solver.
//!
//! A thief visits every city once, starting and ending at the depot, and
//! fills a capacity-limited rented knapsack along the way. Carried weight
//! slows the thief down and the knapsack is paid per unit of time, so the
//! objective is `G = profit - R * travel_time`.
//!
//! The solver restarts from constructed tours and alternates a segment
//! reversal search that also swaps low-ratio items for high-ratio ones
//! inside the reversed segment, and a bit-flip search restricted to the
//! items at the running extremes of the tour's profitability profile.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below name the `f64` versions used by the CLI and reports.

pub mod bench;
pub mod construct;
pub mod error;
pub mod eval;
pub mod gen;
pub mod instance;
pub mod kp_search;
pub mod neighbors;
pub mod oracle;
pub mod scalar;
pub mod solver;
pub mod tsp_search;

pub use error::{Error, Result};
pub use eval::{evaluate_full, CollectionPlan, EvalState, ProfileIndex, Solution, Tour};
pub use instance::{load_instance, parse_instance, EdgeWeightKind, Instance, ItemRecord, ItemSpec};
pub use neighbors::{build_candidates, CandidateLists, NeighborBackend};
pub use scalar::Scalar;
pub use solver::{coco_solve, Budget, Deadline, SolveResult, SolverConfig, Variant};

pub type InstanceF64 = Instance<f64>;
pub type InstanceF32 = Instance<f32>;
pub type EvalStateF64 = EvalState<f64>;
pub type EvalStateF32 = EvalState<f32>;
pub type SolutionF64 = Solution<f64>;
pub type SolutionF32 = Solution<f32>;
pub type ProfileIndexF64 = ProfileIndex<f64>;
pub type SolveResultF64 = SolveResult<f64>;
pub type SolveResultF32 = SolveResult<f32>;
