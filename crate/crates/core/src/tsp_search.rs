//! Segment reversal moves and the steepest-ascent tour search.

use crate::error::Result;
use crate::eval::{check_segment, ProfileIndex, Solution};
use crate::instance::Instance;
use crate::neighbors::CandidateLists;
use crate::scalar::{improves, Scalar};
use crate::solver::Deadline;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    TwoOpt,
    Pgch,
}

/// A fully evaluated segment move.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveCandidate<T: Scalar = f64> {
    pub k1: usize,
    pub k2: usize,
    pub kind: MoveKind,
    /// Items dropped inside the segment.
    pub uncollect: Vec<usize>,
    /// Items picked up inside the segment; never heavier than `uncollect`.
    pub collect: Vec<usize>,
    pub gain_after: T,
}

/// Reusable buffers for move evaluation.
#[derive(Debug, Clone)]
pub struct MoveScratch<T: Scalar = f64> {
    dw: Vec<T>,
    dropped: Vec<bool>,
    uncollect: Vec<usize>,
    collect: Vec<usize>,
}

impl<T: Scalar> MoveScratch<T> {
    pub fn new(inst: &Instance<T>) -> Self {
        MoveScratch {
            dw: vec![T::zero(); inst.n()],
            dropped: vec![false; inst.m()],
            uncollect: Vec::new(),
            collect: Vec::new(),
        }
    }
}

/// Plain reversal of positions `k1..=k2`.
pub fn two_opt<T: Scalar>(
    inst: &Instance<T>,
    sol: &Solution<T>,
    k1: usize,
    k2: usize,
) -> Result<MoveCandidate<T>> {
    check_segment(k1, k2, sol.tour.len())?;
    let mut scratch = MoveScratch::new(inst);
    Ok(evaluate_move(inst, sol, None, k1, k2, &mut scratch))
}

/// Profit-guided reversal of positions `k1..=k2`. `profile` must describe
/// `sol` as it is before the move.
///
/// After reversing, collected items in the segment whose ratio is below the
/// original prefix minimum at their new position are dropped (front to
/// back). Then, back to front, uncollected items whose ratio exceeds the
/// original postfix maximum at their new position are picked up, most
/// profitable first, skipping any that would exceed the freed weight. An
/// item both dropped and picked up stays as it was.
pub fn pgch<T: Scalar>(
    inst: &Instance<T>,
    sol: &Solution<T>,
    profile: &ProfileIndex<T>,
    k1: usize,
    k2: usize,
) -> Result<MoveCandidate<T>> {
    check_segment(k1, k2, sol.tour.len())?;
    let mut scratch = MoveScratch::new(inst);
    Ok(evaluate_move(inst, sol, Some(profile), k1, k2, &mut scratch))
}

/// Shared evaluation of both move kinds; positions must already be valid.
/// `profile = None` suppresses substitutions.
pub fn evaluate_move<T: Scalar>(
    inst: &Instance<T>,
    sol: &Solution<T>,
    profile: Option<&ProfileIndex<T>>,
    k1: usize,
    k2: usize,
    s: &mut MoveScratch<T>,
) -> MoveCandidate<T> {
    let tour = &sol.tour;
    let plan = &sol.plan;
    s.uncollect.clear();
    s.collect.clear();
    let mut dw_total = T::zero();
    let mut dprofit = T::zero();
    if let Some(prof) = profile {
        let mut freed = T::zero();
        for k in k1..=k2 {
            let city = tour.city_at(k1 + k2 - k);
            let limit = prof.prefix_min[k];
            for &j in inst.items_at(city) {
                let it = inst.item(j);
                if plan.is_collected(j) && it.ratio < limit {
                    s.uncollect.push(j);
                    s.dropped[j] = true;
                    freed = freed + it.weight;
                    s.dw[city] = s.dw[city] - it.weight;
                    dprofit = dprofit - it.profit;
                }
            }
        }
        let mut added = T::zero();
        if !s.uncollect.is_empty() {
            for k in (k1..=k2).rev() {
                let city = tour.city_at(k1 + k2 - k);
                let limit = prof.postfix_max[k];
                for &j in inst.items_at(city) {
                    let it = inst.item(j);
                    if (plan.is_collected(j) && !s.dropped[j]) || it.ratio <= limit {
                        continue;
                    }
                    if added + it.weight > freed {
                        continue;
                    }
                    added = added + it.weight;
                    s.dw[city] = s.dw[city] + it.weight;
                    dprofit = dprofit + it.profit;
                    if s.dropped[j] {
                        s.dropped[j] = false;
                    } else {
                        s.collect.push(j);
                    }
                }
            }
        }
        dw_total = added - freed;
        s.uncollect.retain(|&j| s.dropped[j]);
    }
    let gain_after = sol
        .state
        .peek_segment_move(inst, tour, k1, k2, &s.dw, dw_total, dprofit);
    for &j in &s.uncollect {
        s.dropped[j] = false;
    }
    if profile.is_some() {
        for k in k1..=k2 {
            s.dw[tour.city_at(k)] = T::zero();
        }
    }
    let kind = if profile.is_some() {
        MoveKind::Pgch
    } else {
        MoveKind::TwoOpt
    };
    MoveCandidate {
        k1,
        k2,
        kind,
        uncollect: s.uncollect.clone(),
        collect: s.collect.clone(),
        gain_after,
    }
}

/// Applies an evaluated move and returns the new gain.
pub fn apply_move<T: Scalar>(
    inst: &Instance<T>,
    sol: &mut Solution<T>,
    mv: &MoveCandidate<T>,
) -> Result<T> {
    sol.state.apply_segment_move(
        inst,
        &mut sol.tour,
        &mut sol.plan,
        mv.k1,
        mv.k2,
        &mv.uncollect,
        &mv.collect,
    )
}

/// Accepted reversal bookkeeping.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MoveStats {
    pub accepted: usize,
    /// Sum over accepted moves of `(k2 - k1 + 1) * 100 / n`.
    pub rel_len_sum: f64,
}

impl MoveStats {
    pub fn record(&mut self, k1: usize, k2: usize, n: usize) {
        self.accepted += 1;
        self.rel_len_sum += (k2 - k1 + 1) as f64 * 100.0 / n as f64;
    }

    pub fn merge(&mut self, other: &MoveStats) {
        self.accepted += other.accepted;
        self.rel_len_sum += other.rel_len_sum;
    }

    /// Mean relative segment length in percent (0 with no moves).
    pub fn mean_rel_len_pct(&self) -> f64 {
        if self.accepted == 0 {
            0.0
        } else {
            self.rel_len_sum / self.accepted as f64
        }
    }
}

/// Steepest ascent over segment moves.
///
/// Each sweep evaluates, for every position `k1` and every candidate
/// neighbour of the city there lying at a later position `k2`, the move on
/// `k1..=k2`; only the best move is applied. Sweeps repeat while the
/// improvement is at least `alpha * |G|`. With `substitute` false the moves
/// are plain reversals. Returns the number of sweeps.
pub fn tsp_solver<T: Scalar>(
    inst: &Instance<T>,
    sol: &mut Solution<T>,
    cands: &CandidateLists,
    alpha: f64,
    substitute: bool,
    deadline: &Deadline,
    stats: &mut MoveStats,
) -> Result<usize> {
    let n = sol.tour.len();
    if n < 3 {
        return Ok(0);
    }
    let alpha = T::lit(alpha);
    let mut scratch = MoveScratch::new(inst);
    let mut sweeps = 0;
    loop {
        let profile = substitute.then(|| ProfileIndex::build(inst, &sol.tour, &sol.plan));
        let g_prev = sol.gain();
        let mut best: Option<MoveCandidate<T>> = None;
        let mut best_gain = g_prev;
        sweeps += 1;
        'sweep: for k1 in 1..n - 1 {
            let city = sol.tour.city_at(k1);
            for &nb in cands.of(city) {
                let k2 = sol.tour.position_of(nb);
                if k2 <= k1 {
                    continue;
                }
                let mv = evaluate_move(inst, sol, profile.as_ref(), k1, k2, &mut scratch);
                if mv.gain_after > best_gain {
                    best_gain = mv.gain_after;
                    best = Some(mv);
                }
            }
            if k1 % 64 == 0 && deadline.expired() {
                break 'sweep;
            }
        }
        let Some(mv) = best.filter(|mv| improves(mv.gain_after, g_prev)) else {
            break;
        };
        let g = apply_move(inst, sol, &mv)?;
        stats.record(mv.k1, mv.k2, n);
        debug_assert!(crate::eval::fits(sol.state.total_weight(), inst.capacity()));
        if g - g_prev < alpha * g_prev.abs() || deadline.expired() {
            break;
        }
    }
    Ok(sweeps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{evaluate_full, CollectionPlan, Tour};
    use crate::gen::random_tiny_instance;
    use crate::instance::{parse_instance, EdgeWeightKind, ItemSpec};
    use crate::neighbors::{build_candidates, NeighborBackend};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn worked() -> (Instance, Solution) {
        let inst: Instance = parse_instance(include_str!("../tests/data/worked5.ttp")).unwrap();
        let sol = Solution::new(&inst, Tour::identity(5), CollectionPlan::from_binary(&[0, 0, 1, 1])).unwrap();
        (inst, sol)
    }

    #[test]
    fn worked_example_moves() {
        let (inst, sol) = worked();
        assert_eq!(sol.gain(), 4.0);
        let two = two_opt(&inst, &sol, 1, 3).unwrap();
        assert!((two.gain_after + 1.5).abs() < 1e-9);
        assert!(two.uncollect.is_empty() && two.collect.is_empty());

        let prof = ProfileIndex::build(&inst, &sol.tour, &sol.plan);
        let mv = pgch(&inst, &sol, &prof, 1, 3).unwrap();
        assert_eq!(mv.uncollect, vec![2]);
        assert_eq!(mv.collect, vec![0]);
        assert!((mv.gain_after - 6.0).abs() < 1e-9);
        let mut after = sol.clone();
        let g = apply_move(&inst, &mut after, &mv).unwrap();
        assert_eq!(after.plan.to_binary(), vec![1, 0, 0, 1]);
        assert_eq!(after.tour.to_one_based(), vec![1, 4, 3, 2, 5]);
        assert!((g - 6.0).abs() < 1e-9);
    }

    #[test]
    fn bad_positions_rejected() {
        let (inst, sol) = worked();
        let prof = ProfileIndex::build(&inst, &sol.tour, &sol.plan);
        assert!(two_opt(&inst, &sol, 2, 2).is_err());
        assert!(two_opt(&inst, &sol, 0, 3).is_err());
        assert!(pgch(&inst, &sol, &prof, 3, 5).is_err());
    }

    fn random_solution(inst: &Instance, rng: &mut ChaCha8Rng) -> Solution {
        let n = inst.n();
        let mut order: Vec<usize> = (1..n).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        order.insert(0, 0);
        let tour = Tour::new(order).unwrap();
        let mut plan = CollectionPlan::empty(inst.m());
        let mut w = 0.0;
        for j in 0..inst.m() {
            if rng.gen_bool(0.5) && w + inst.item(j).weight <= inst.capacity() {
                plan.set(j, true);
                w += inst.item(j).weight;
            }
        }
        Solution::new(inst, tour, plan).unwrap()
    }

    #[test]
    fn candidate_gains_match_full_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for seed in 0..30 {
            let inst: Instance = random_tiny_instance(seed, 8, 12);
            let sol = random_solution(&inst, &mut rng);
            let prof = ProfileIndex::build(&inst, &sol.tour, &sol.plan);
            for _ in 0..20 {
                let k1 = rng.gen_range(1..7);
                let k2 = rng.gen_range(k1 + 1..8);
                for mv in [two_opt(&inst, &sol, k1, k2).unwrap(), pgch(&inst, &sol, &prof, k1, k2).unwrap()] {
                    let mut tour = sol.tour.clone();
                    tour.reverse(k1, k2).unwrap();
                    let mut plan = sol.plan.clone();
                    let freed: f64 = mv.uncollect.iter().map(|&j| inst.item(j).weight).sum();
                    let added: f64 = mv.collect.iter().map(|&j| inst.item(j).weight).sum();
                    assert!(added <= freed);
                    for &j in &mv.uncollect {
                        assert!(plan.is_collected(j));
                        plan.set(j, false);
                    }
                    for &j in &mv.collect {
                        assert!(!plan.is_collected(j));
                        plan.set(j, true);
                    }
                    let full = evaluate_full(&inst, &tour, &plan).unwrap().gain;
                    assert!((full - mv.gain_after).abs() <= 1e-9 * full.abs().max(1.0));
                    let mut applied = sol.clone();
                    let g = apply_move(&inst, &mut applied, &mv).unwrap();
                    assert!((g - full).abs() <= 1e-9 * full.abs().max(1.0));
                }
            }
        }
    }

    fn flat_instance(rng: &mut ChaCha8Rng) -> Instance {
        let coords = (0..10).map(|_| [rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)]).collect();
        let items = (0..20)
            .map(|j| {
                let w = rng.gen_range(1..20) as f64;
                ItemSpec { profit: 3.0 * w, weight: w, city: 1 + j % 9 }
            })
            .collect();
        Instance::new("flat", coords, EdgeWeightKind::Ceil2d, items, 400.0, 0.5, 0.1, 1.0).unwrap()
    }

    #[test]
    fn equal_ratios_degenerate_to_two_opt() {
        // every city keeps a collected item, so no default ratio enters the profile
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let inst = flat_instance(&mut rng);
        for _ in 0..50 {
            let mut sol = random_solution(&inst, &mut rng);
            for j in 0..9 {
                if !sol.plan.is_collected(j) {
                    sol.flip(&inst, j).unwrap();
                }
            }
            let prof = ProfileIndex::build(&inst, &sol.tour, &sol.plan);
            let k1 = rng.gen_range(1..9);
            let k2 = rng.gen_range(k1 + 1..10);
            let a = two_opt(&inst, &sol, k1, k2).unwrap();
            let b = pgch(&inst, &sol, &prof, k1, k2).unwrap();
            assert!(b.uncollect.is_empty() && b.collect.is_empty());
            assert_eq!(a.gain_after, b.gain_after);
        }
    }

    #[test]
    fn default_ratio_drops_items_moved_ahead_of_the_first_pickup() {
        // equal ratios, but nothing collected before the segment: the default
        // prefix minimum exceeds every ratio, so moved items are dropped
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inst = flat_instance(&mut rng);
        let mut plan = CollectionPlan::empty(20);
        let tour = Tour::identity(10);
        for j in 0..20 {
            if inst.item(j).city == 9 {
                plan.set(j, true);
            }
        }
        let sol = Solution::new(&inst, tour, plan).unwrap();
        let prof = ProfileIndex::build(&inst, &sol.tour, &sol.plan);
        let mv = pgch(&inst, &sol, &prof, 1, 9).unwrap();
        assert!(!mv.uncollect.is_empty());
        assert!(mv.uncollect.iter().all(|&j| inst.item(j).city == 9));
    }

    #[test]
    fn solver_is_monotone_and_fixpoint_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for seed in 0..20 {
            let inst: Instance = random_tiny_instance(seed, 8, 10);
            let cands = build_candidates(&inst, NeighborBackend::Delaunay);
            for substitute in [false, true] {
                let mut sol = random_solution(&inst, &mut rng);
                let g0 = sol.gain();
                let mut stats = MoveStats::default();
                tsp_solver(&inst, &mut sol, &cands, 1e-4, substitute, &Deadline::never(), &mut stats).unwrap();
                assert!(sol.gain() >= g0);
                let fresh = evaluate_full(&inst, &sol.tour, &sol.plan).unwrap().gain;
                assert!((fresh - sol.gain()).abs() < 1e-9 * fresh.abs().max(1.0));

                // converge, then one more call changes nothing
                let mut stats = MoveStats::default();
                tsp_solver(&inst, &mut sol, &cands, 1e-300, substitute, &Deadline::never(), &mut stats).unwrap();
                let before = sol.clone();
                let mut stats = MoveStats::default();
                let sweeps =
                    tsp_solver(&inst, &mut sol, &cands, 1e-4, substitute, &Deadline::never(), &mut stats).unwrap();
                assert_eq!(sweeps, 1);
                assert_eq!(stats.accepted, 0);
                assert_eq!(before.tour, sol.tour);
                assert_eq!(before.plan, sol.plan);
            }
        }
    }

    #[test]
    fn infinite_alpha_runs_one_sweep() {
        let inst: Instance = random_tiny_instance(3, 30, 40);
        let cands = build_candidates(&inst, NeighborBackend::Delaunay);
        let mut sol = random_solution(&inst, &mut ChaCha8Rng::seed_from_u64(1));
        let mut stats = MoveStats::default();
        let sweeps =
            tsp_solver(&inst, &mut sol, &cands, f64::INFINITY, true, &Deadline::never(), &mut stats).unwrap();
        assert_eq!(sweeps, 1);
        assert!(stats.accepted <= 1);
    }

    #[test]
    fn stats_mean() {
        let mut s = MoveStats::default();
        assert_eq!(s.mean_rel_len_pct(), 0.0);
        s.record(1, 2, 10);
        s.record(1, 4, 10);
        assert!((s.mean_rel_len_pct() - 30.0).abs() < 1e-12);
    }
}
