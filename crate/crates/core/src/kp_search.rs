//! Bit-flip hill climbing over the collection plan, over all items or only
//! over boundary items.

use rand::Rng;

use crate::eval::{ProfileIndex, Solution};
use crate::instance::Instance;
use crate::scalar::{improves, Scalar};
use crate::solver::Deadline;

/// Items whose flip can change a running extreme of the profile: per
/// position, the least profitable collected item when it realises the prefix
/// minimum and the most profitable uncollected item when it realises the
/// postfix maximum.
#[derive(Debug, Clone)]
pub struct BoundaryIndex {
    low: Vec<Option<usize>>,
    high: Vec<Option<usize>>,
    in_bag: Vec<bool>,
    bag_len: usize,
    /// Bag members not yet probed since the last accepted flip.
    unchecked: Vec<usize>,
    slot: Vec<usize>,
}

const NO_SLOT: usize = usize::MAX;

impl BoundaryIndex {
    /// Builds the bag from a profile in O(n); every member starts unchecked.
    pub fn build<T: Scalar>(profile: &ProfileIndex<T>, m: usize) -> Self {
        let n = profile.p_seq.len();
        let mut idx = BoundaryIndex {
            low: vec![None; n],
            high: vec![None; n],
            in_bag: vec![false; m],
            bag_len: 0,
            unchecked: Vec::new(),
            slot: vec![NO_SLOT; m],
        };
        for k in 0..n {
            idx.refresh(profile, k);
        }
        idx.mark_all_unchecked();
        idx
    }

    fn set_member(&mut self, j: usize, member: bool) {
        if self.in_bag[j] != member {
            self.in_bag[j] = member;
            if member {
                self.bag_len += 1;
            } else {
                self.bag_len -= 1;
                self.uncheck_remove(j);
            }
        }
    }

    fn refresh<T: Scalar>(&mut self, profile: &ProfileIndex<T>, k: usize) {
        let (low, high) = (profile.low_boundary(k), profile.high_boundary(k));
        for old in [self.low[k], self.high[k]].into_iter().flatten() {
            if Some(old) != low && Some(old) != high {
                self.set_member(old, false);
            }
        }
        for new in [low, high].into_iter().flatten() {
            self.set_member(new, true);
        }
        self.low[k] = low;
        self.high[k] = high;
    }

    fn uncheck_remove(&mut self, j: usize) {
        let s = self.slot[j];
        if s == NO_SLOT {
            return;
        }
        self.unchecked.swap_remove(s);
        if let Some(&moved) = self.unchecked.get(s) {
            self.slot[moved] = s;
        }
        self.slot[j] = NO_SLOT;
    }

    /// Refreshes membership after the profile changed at `k` and over the
    /// spans reported by [`ProfileIndex::update_item`].
    pub fn update<T: Scalar>(&mut self, profile: &ProfileIndex<T>, k: usize, span: &crate::eval::ChangedSpan) {
        self.refresh(profile, k);
        for p in span.prefix.clone().chain(span.postfix.clone()) {
            if p != k {
                self.refresh(profile, p);
            }
        }
    }

    pub fn mark_all_unchecked(&mut self) {
        for &j in &self.unchecked {
            self.slot[j] = NO_SLOT;
        }
        self.unchecked.clear();
        for k in 0..self.low.len() {
            for j in [self.low[k], self.high[k]].into_iter().flatten() {
                if self.slot[j] == NO_SLOT {
                    self.slot[j] = self.unchecked.len();
                    self.unchecked.push(j);
                }
            }
        }
    }

    /// Removes and returns a uniformly chosen unchecked member.
    pub fn take_unchecked<R: Rng>(&mut self, rng: &mut R) -> Option<usize> {
        if self.unchecked.is_empty() {
            return None;
        }
        let j = self.unchecked[rng.gen_range(0..self.unchecked.len())];
        self.uncheck_remove(j);
        Some(j)
    }

    pub fn contains(&self, j: usize) -> bool {
        self.in_bag[j]
    }

    pub fn len(&self) -> usize {
        self.bag_len
    }

    pub fn is_empty(&self) -> bool {
        self.bag_len == 0
    }

    pub fn unchecked_len(&self) -> usize {
        self.unchecked.len()
    }

    /// Bag members in ascending item order.
    pub fn members(&self) -> Vec<usize> {
        (0..self.in_bag.len()).filter(|&j| self.in_bag[j]).collect()
    }
}

/// What a bit-flip search did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlipLog {
    /// Accepted flips in order.
    pub accepted: Vec<usize>,
    pub probes: usize,
}

/// Boundary bit-flip search. Repeatedly draws an unchecked bag member,
/// marks it checked and flips it if that strictly improves the gain; after
/// an accepted flip the profile and bag are updated and every member is
/// unchecked again. Stops when all members are checked or at the deadline.
/// `profile` must describe `sol` on entry and is kept in sync.
pub fn kp_solver<T: Scalar, R: Rng>(
    inst: &Instance<T>,
    sol: &mut Solution<T>,
    profile: &mut ProfileIndex<T>,
    index: &mut BoundaryIndex,
    rng: &mut R,
    deadline: &Deadline,
) -> FlipLog {
    let mut log = FlipLog::default();
    while let Some(j) = index.take_unchecked(rng) {
        if log.probes % 64 == 0 && deadline.expired() {
            break;
        }
        log.probes += 1;
        let Some(g) = sol.peek_flip(inst, j) else {
            continue;
        };
        if improves(g, sol.gain()) {
            sol.flip(inst, j).expect("feasibility checked by peek");
            let span = profile.update_item(inst, &sol.tour, &sol.plan, j);
            let k = sol.tour.position_of(inst.item(j).city);
            index.update(profile, k, &span);
            index.mark_all_unchecked();
            log.accepted.push(j);
        }
    }
    log
}

/// The same protocol over all items.
pub fn kp_solver_standard<T: Scalar, R: Rng>(
    inst: &Instance<T>,
    sol: &mut Solution<T>,
    rng: &mut R,
    deadline: &Deadline,
) -> FlipLog {
    let m = inst.m();
    let mut log = FlipLog::default();
    let mut unchecked: Vec<usize> = (0..m).collect();
    while !unchecked.is_empty() {
        if log.probes % 64 == 0 && deadline.expired() {
            break;
        }
        log.probes += 1;
        let j = unchecked.swap_remove(rng.gen_range(0..unchecked.len()));
        let Some(g) = sol.peek_flip(inst, j) else {
            continue;
        };
        if improves(g, sol.gain()) {
            sol.flip(inst, j).expect("feasibility checked by peek");
            log.accepted.push(j);
            unchecked.clear();
            unchecked.extend(0..m);
        }
    }
    log
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{evaluate_full, CollectionPlan, Tour};
    use crate::gen::random_tiny_instance;
    use crate::instance::{EdgeWeightKind, ItemSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Bag straight from the definition, without running extremes.
    pub(crate) fn naive_bag(inst: &Instance, tour: &Tour, plan: &CollectionPlan) -> Vec<usize> {
        let n = tour.len();
        let default_low = 1.0 + inst.items().iter().map(|it| it.ratio).fold(0.0, f64::max);
        let low_at = |k: usize| {
            inst.items_at(tour.city_at(k))
                .iter()
                .copied()
                .filter(|&j| plan.is_collected(j))
                .min_by(|&a, &b| crate::instance::profitability_order(inst.item(b), inst.item(a)))
        };
        let high_at = |k: usize| {
            inst.items_at(tour.city_at(k))
                .iter()
                .copied()
                .filter(|&j| !plan.is_collected(j))
                .min_by(|&a, &b| crate::instance::profitability_order(inst.item(a), inst.item(b)))
        };
        let p = |k: usize| low_at(k).map_or(default_low, |j| inst.item(j).ratio);
        let q = |k: usize| high_at(k).map_or(0.0, |j| inst.item(j).ratio);
        let mut bag = Vec::new();
        for k in 0..n {
            if let Some(j) = low_at(k) {
                if (0..=k).all(|i| p(i) >= p(k)) {
                    bag.push(j);
                }
            }
            if let Some(j) = high_at(k) {
                if (k..n).all(|i| q(i) <= q(k)) {
                    bag.push(j);
                }
            }
        }
        bag.sort_unstable();
        bag
    }

    #[test]
    fn empty_plan_bag_is_high_side_only() {
        let inst: Instance = random_tiny_instance(2, 8, 12);
        let tour = Tour::identity(8);
        let plan = CollectionPlan::empty(12);
        let prof = ProfileIndex::build(&inst, &tour, &plan);
        let idx = BoundaryIndex::build(&prof, 12);
        assert!(!idx.is_empty());
        assert!(idx.members().iter().all(|&j| !plan.is_collected(j)));
        assert_eq!(idx.members(), naive_bag(&inst, &tour, &plan));
    }

    #[test]
    fn decreasing_profile_makes_every_low_item_boundary() {
        let items = (1..6)
            .map(|c| ItemSpec { profit: 100.0 - 10.0 * c as f64, weight: 1.0, city: c })
            .collect();
        let coords = (0..6).map(|i| [i as f64, (i * i) as f64]).collect();
        let inst = Instance::new("dec", coords, EdgeWeightKind::Ceil2d, items, 10.0, 1.0, 0.1, 1.0).unwrap();
        let tour = Tour::identity(6);
        let plan = CollectionPlan::from_binary(&[1, 1, 1, 1, 1]);
        let prof = ProfileIndex::build(&inst, &tour, &plan);
        let idx = BoundaryIndex::build(&prof, 5);
        assert_eq!(idx.members(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn incremental_bag_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for seed in 0..15 {
            let n = rng.gen_range(3..25);
            let m = rng.gen_range(1..50);
            let inst: Instance = random_tiny_instance(seed, n, m);
            let mut sol = Solution::new(&inst, Tour::identity(n), CollectionPlan::empty(m)).unwrap();
            let mut prof = ProfileIndex::build(&inst, &sol.tour, &sol.plan);
            let mut idx = BoundaryIndex::build(&prof, m);
            for _ in 0..60 {
                let j = rng.gen_range(0..m);
                if sol.flip(&inst, j).is_err() {
                    continue;
                }
                let span = prof.update_item(&inst, &sol.tour, &sol.plan, j);
                idx.update(&prof, sol.tour.position_of(inst.item(j).city), &span);
                assert_eq!(idx.members(), naive_bag(&inst, &sol.tour, &sol.plan));
                assert_eq!(idx.len(), idx.members().len());
                for &b in &idx.members() {
                    let low = prof.low_collected.contains(&Some(b));
                    let high = prof.high_uncollected.contains(&Some(b));
                    assert!(low != high);
                }
            }
        }
    }

    #[test]
    fn empty_bag_leaves_plan() {
        let inst: Instance = random_tiny_instance(1, 4, 0);
        let mut sol = Solution::new(&inst, Tour::identity(4), CollectionPlan::empty(0)).unwrap();
        let mut prof = ProfileIndex::build(&inst, &sol.tour, &sol.plan);
        let mut idx = BoundaryIndex::build(&prof, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let log = kp_solver(&inst, &mut sol, &mut prof, &mut idx, &mut rng, &Deadline::never());
        assert!(log.accepted.is_empty() && log.probes == 0);
        let log = kp_solver_standard(&inst, &mut sol, &mut rng, &Deadline::never());
        assert!(log.accepted.is_empty());
    }

    #[test]
    fn single_improving_item_is_flipped_once() {
        let inst = Instance::new(
            "one",
            vec![[0.0, 0.0], [3.0, 0.0], [3.0, 4.0]],
            EdgeWeightKind::Ceil2d,
            vec![ItemSpec { profit: 100.0, weight: 1.0, city: 2 }],
            5.0,
            1.0,
            0.1,
            1.0,
        )
        .unwrap();
        let mut sol = Solution::new(&inst, Tour::identity(3), CollectionPlan::empty(1)).unwrap();
        let mut prof = ProfileIndex::build(&inst, &sol.tour, &sol.plan);
        let mut idx = BoundaryIndex::build(&prof, 1);
        let log = kp_solver(&inst, &mut sol, &mut prof, &mut idx, &mut ChaCha8Rng::seed_from_u64(1), &Deadline::never());
        assert_eq!(log.accepted, vec![0]);
        assert_eq!(log.probes, 2);
        assert_eq!(sol.plan.to_binary(), vec![1]);
    }

    #[test]
    fn capacity_violations_are_rejected() {
        let inst = Instance::new(
            "cap",
            vec![[0.0, 0.0], [3.0, 0.0], [3.0, 4.0]],
            EdgeWeightKind::Ceil2d,
            vec![
                ItemSpec { profit: 100.0, weight: 3.0, city: 1 },
                ItemSpec { profit: 90.0, weight: 3.0, city: 2 },
            ],
            4.0,
            1.0,
            0.1,
            1.0,
        )
        .unwrap();
        let mut sol = Solution::new(&inst, Tour::identity(3), CollectionPlan::empty(2)).unwrap();
        let log = kp_solver_standard(&inst, &mut sol, &mut ChaCha8Rng::seed_from_u64(5), &Deadline::never());
        assert_eq!(log.accepted.len(), 1);
        assert_eq!(sol.plan.count(), 1);
        assert!(sol.state.total_weight() <= 4.0);
    }

    #[test]
    fn replayed_flips_reproduce_gain() {
        for seed in 0..20 {
            let inst: Instance = random_tiny_instance(seed, 8, 10);
            let mut sol = Solution::new(&inst, Tour::identity(8), CollectionPlan::empty(10)).unwrap();
            let start = sol.plan.clone();
            let mut prof = ProfileIndex::build(&inst, &sol.tour, &sol.plan);
            let mut idx = BoundaryIndex::build(&prof, 10);
            let log = kp_solver(&inst, &mut sol, &mut prof, &mut idx, &mut ChaCha8Rng::seed_from_u64(seed), &Deadline::never());
            let mut plan = start;
            let mut g = evaluate_full(&inst, &sol.tour, &plan).unwrap().gain;
            for &j in &log.accepted {
                plan.flip(j);
                let ng = evaluate_full(&inst, &sol.tour, &plan).unwrap().gain;
                assert!(ng > g);
                g = ng;
            }
            assert_eq!(plan, sol.plan);
            assert!((g - sol.gain()).abs() < 1e-9 * g.abs().max(1.0));
            assert_eq!(prof, ProfileIndex::build(&inst, &sol.tour, &sol.plan));
            // no bag member improves any more
            for j in idx.members() {
                if let Some(ng) = sol.peek_flip(&inst, j) {
                    assert!(!improves(ng, sol.gain()));
                }
            }
        }
    }

    #[test]
    fn standard_search_reaches_one_flip_optimum() {
        for seed in 0..30 {
            let inst: Instance = random_tiny_instance(seed, 6, 6);
            let mut sol = Solution::new(&inst, Tour::identity(6), CollectionPlan::empty(6)).unwrap();
            kp_solver_standard(&inst, &mut sol, &mut ChaCha8Rng::seed_from_u64(seed), &Deadline::never());
            for j in 0..6 {
                let mut p = sol.plan.clone();
                p.flip(j);
                if let Ok(st) = evaluate_full(&inst, &sol.tour, &p) {
                    assert!(st.gain <= sol.gain() + 1e-9);
                }
            }
        }
    }
}
