use std::ops::Range;

use super::{CollectionPlan, Tour};
use crate::instance::Instance;
use crate::scalar::Scalar;

/// Per-position profitability profile of a solution.
///
/// For the city at each tour position: the least profitable collected item
/// and the most profitable uncollected one, their ratios, the running
/// minimum of the former from the front and the running maximum of the
/// latter from the back.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileIndex<T: Scalar = f64> {
    /// Least profitable collected item at each position.
    pub low_collected: Vec<Option<usize>>,
    /// Most profitable uncollected item at each position.
    pub high_uncollected: Vec<Option<usize>>,
    /// Ratio of `low_collected`, or `1 + max ratio` when nothing is collected there.
    pub p_seq: Vec<T>,
    /// Ratio of `high_uncollected`, or 0 when nothing is left there.
    pub q_seq: Vec<T>,
    pub prefix_min: Vec<T>,
    pub postfix_max: Vec<T>,
    no_collected: T,
}

/// Positions whose running minimum / maximum changed after an update.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangedSpan {
    pub prefix: Range<usize>,
    pub postfix: Range<usize>,
}

impl<T: Scalar> ProfileIndex<T> {
    /// Builds the profile in O(n + m).
    pub fn build(inst: &Instance<T>, tour: &Tour, plan: &CollectionPlan) -> Self {
        let n = tour.len();
        let no_collected = T::one() + inst.max_ratio();
        let mut idx = ProfileIndex {
            low_collected: vec![None; n],
            high_uncollected: vec![None; n],
            p_seq: vec![no_collected; n],
            q_seq: vec![T::zero(); n],
            prefix_min: vec![T::zero(); n],
            postfix_max: vec![T::zero(); n],
            no_collected,
        };
        for k in 0..n {
            idx.refresh_position(inst, tour, plan, k);
        }
        idx.recompute_prefix(0, false);
        idx.recompute_postfix(n - 1, false);
        idx
    }

    /// Ratio used at positions where nothing is collected.
    pub fn no_collected_ratio(&self) -> T {
        self.no_collected
    }

    fn refresh_position(&mut self, inst: &Instance<T>, tour: &Tour, plan: &CollectionPlan, k: usize) {
        let items = inst.items_at(tour.city_at(k));
        let low = items.iter().rev().copied().find(|&j| plan.is_collected(j));
        let high = items.iter().copied().find(|&j| !plan.is_collected(j));
        self.low_collected[k] = low;
        self.high_uncollected[k] = high;
        self.p_seq[k] = low.map_or(self.no_collected, |j| inst.item(j).ratio);
        self.q_seq[k] = high.map_or(T::zero(), |j| inst.item(j).ratio);
    }

    /// Recomputes `prefix_min` from `from` on; with `early_stop`, stops at
    /// the first position after `from` whose value is unchanged. Returns the
    /// end of the rewritten range.
    fn recompute_prefix(&mut self, from: usize, early_stop: bool) -> usize {
        let n = self.p_seq.len();
        for k in from..n {
            let v = if k == 0 {
                self.p_seq[0]
            } else {
                self.prefix_min[k - 1].min(self.p_seq[k])
            };
            if early_stop && k > from && v == self.prefix_min[k] {
                return k;
            }
            self.prefix_min[k] = v;
        }
        n
    }

    /// Mirror of [`Self::recompute_prefix`]; returns the start of the
    /// rewritten range.
    fn recompute_postfix(&mut self, from: usize, early_stop: bool) -> usize {
        let n = self.q_seq.len();
        for k in (0..=from).rev() {
            let v = if k == n - 1 {
                self.q_seq[k]
            } else {
                self.q_seq[k].max(self.postfix_max[k + 1])
            };
            if early_stop && k < from && v == self.postfix_max[k] {
                return k + 1;
            }
            self.postfix_max[k] = v;
        }
        0
    }

    /// Updates the profile after the collection state of item `j` changed
    /// (the plan passed in is the new one). O(n) worst case.
    pub fn update_item(
        &mut self,
        inst: &Instance<T>,
        tour: &Tour,
        plan: &CollectionPlan,
        j: usize,
    ) -> ChangedSpan {
        let k = tour.position_of(inst.item(j).city);
        self.refresh_position(inst, tour, plan, k);
        let end = self.recompute_prefix(k, true);
        let start = self.recompute_postfix(k, true);
        ChangedSpan {
            prefix: k..end,
            postfix: start..k + 1,
        }
    }

    /// Item at position `k` that realises the running minimum there, if any.
    pub fn low_boundary(&self, k: usize) -> Option<usize> {
        self.low_collected[k].filter(|_| self.prefix_min[k] == self.p_seq[k])
    }

    /// Item at position `k` that realises the running maximum there, if any.
    pub fn high_boundary(&self, k: usize) -> Option<usize> {
        self.high_uncollected[k].filter(|_| self.postfix_max[k] == self.q_seq[k])
    }
}
