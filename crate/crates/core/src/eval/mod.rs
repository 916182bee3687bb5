//! Solution representation and objective evaluation.
//!
//! [`EvalState`] caches per-position weights, leg lengths and arrival times so
//! that flipping one item or reversing one tour segment is re-evaluated in
//! O(n) instead of from scratch.

mod profile;
mod sequence;

pub use profile::{ChangedSpan, ProfileIndex};
pub use sequence::{postfix_max_seq, prefix_min_seq};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::scalar::Scalar;

/// A cyclic tour starting at the depot (city 0), with its inverse map.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tour {
    order: Vec<usize>,
    position: Vec<usize>,
}

impl Tour {
    /// `order[k]` is the city visited at position `k`; `order[0]` must be 0.
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        if n == 0 || order[0] != 0 {
            return Err(Error::InvalidTour("tour must start at the depot".into()));
        }
        let mut position = vec![usize::MAX; n];
        for (k, &c) in order.iter().enumerate() {
            if c >= n || position[c] != usize::MAX {
                return Err(Error::InvalidTour(format!(
                    "not a permutation (city {c} at position {k})"
                )));
            }
            position[c] = k;
        }
        Ok(Tour { order, position })
    }

    /// Builds a tour from 1-based city labels, as written in files and reports.
    pub fn from_one_based(cities: &[usize]) -> Result<Self> {
        if cities.contains(&0) {
            return Err(Error::InvalidTour("city labels are 1-based".into()));
        }
        Tour::new(cities.iter().map(|&c| c - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Tour {
            order: (0..n).collect(),
            position: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    #[inline]
    pub fn city_at(&self, k: usize) -> usize {
        self.order[k]
    }

    #[inline]
    pub fn position_of(&self, city: usize) -> usize {
        self.position[city]
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.order.iter().map(|c| c + 1).collect()
    }

    /// Reverses positions `k1..=k2` in place. Positions must satisfy
    /// `1 <= k1 < k2 < n` so the depot stays first.
    pub fn reverse(&mut self, k1: usize, k2: usize) -> Result<()> {
        check_segment(k1, k2, self.len())?;
        self.order[k1..=k2].reverse();
        for k in k1..=k2 {
            self.position[self.order[k]] = k;
        }
        Ok(())
    }

    /// Total cyclic tour length.
    pub fn length<T: Scalar>(&self, inst: &Instance<T>) -> T {
        let n = self.len();
        (0..n)
            .map(|k| inst.distance(self.order[k], self.order[(k + 1) % n]))
            .sum()
    }
}

pub(crate) fn check_segment(k1: usize, k2: usize, n: usize) -> Result<()> {
    if k1 < 1 || k1 >= k2 || k2 >= n {
        return Err(Error::BadPositions { k1, k2, n });
    }
    Ok(())
}

/// Which items are collected.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CollectionPlan {
    bits: Vec<bool>,
}

impl CollectionPlan {
    pub fn empty(m: usize) -> Self {
        CollectionPlan {
            bits: vec![false; m],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        CollectionPlan { bits }
    }

    /// From a 0/1 vector, e.g. `[1, 0, 0, 1]`.
    pub fn from_binary(bits: &[u8]) -> Self {
        CollectionPlan {
            bits: bits.iter().map(|&b| b != 0).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn is_collected(&self, j: usize) -> bool {
        self.bits[j]
    }

    #[inline]
    pub fn set(&mut self, j: usize, collected: bool) {
        self.bits[j] = collected;
    }

    #[inline]
    pub fn flip(&mut self, j: usize) {
        self.bits[j] = !self.bits[j];
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn collected(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| b.then_some(j))
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn to_binary(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| u8::from(b)).collect()
    }

    pub fn weight<T: Scalar>(&self, inst: &Instance<T>) -> T {
        self.collected().map(|j| inst.item(j).weight).sum()
    }

    pub fn profit<T: Scalar>(&self, inst: &Instance<T>) -> T {
        self.collected().map(|j| inst.item(j).profit).sum()
    }
}

/// Weight comparisons against the capacity allow this relative slack so
/// that plans exactly at capacity survive accumulated rounding.
#[inline]
pub(crate) fn fits<T: Scalar>(weight: T, capacity: T) -> bool {
    weight <= capacity + capacity * T::epsilon() * T::lit(16.0)
}

/// Cached evaluation of one (tour, plan) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalState<T: Scalar = f64> {
    /// Collected weight per city.
    pub city_weight: Vec<T>,
    /// Weight carried when leaving the city at each position.
    pub cum_weight: Vec<T>,
    /// Distance from position `k` to position `k + 1` (position `n` is the depot).
    pub leg: Vec<T>,
    /// Time at which position `k` is reached, `k = 0..=n`; `arrive_time[n]`
    /// is the return to the depot.
    pub arrive_time: Vec<T>,
    pub total_profit: T,
    pub total_time: T,
    pub gain: T,
}

/// Evaluates a solution from scratch in O(n + m).
pub fn evaluate_full<T: Scalar>(
    inst: &Instance<T>,
    tour: &Tour,
    plan: &CollectionPlan,
) -> Result<EvalState<T>> {
    let n = inst.n();
    if tour.len() != n {
        return Err(Error::InvalidTour(format!(
            "tour has {} cities, instance has {n}",
            tour.len()
        )));
    }
    if plan.len() != inst.m() {
        return Err(Error::PlanLength {
            expected: inst.m(),
            found: plan.len(),
        });
    }
    let mut city_weight = vec![T::zero(); n];
    let mut total_profit = T::zero();
    let mut total_weight = T::zero();
    for j in plan.collected() {
        let it = inst.item(j);
        city_weight[it.city] = city_weight[it.city] + it.weight;
        total_profit = total_profit + it.profit;
        total_weight = total_weight + it.weight;
    }
    if !fits(total_weight, inst.capacity()) {
        return Err(Error::CapacityExceeded {
            weight: total_weight.as_f64(),
            capacity: inst.capacity().as_f64(),
        });
    }
    let mut st = EvalState {
        city_weight,
        cum_weight: vec![T::zero(); n],
        leg: (0..n)
            .map(|k| inst.distance(tour.city_at(k), tour.city_at((k + 1) % n)))
            .collect(),
        arrive_time: vec![T::zero(); n + 1],
        total_profit,
        total_time: T::zero(),
        gain: T::zero(),
    };
    st.refresh_from(inst, tour, 0);
    Ok(st)
}

impl<T: Scalar> EvalState<T> {
    /// Total collected weight.
    pub fn total_weight(&self) -> T {
        self.cum_weight.last().copied().unwrap_or_else(T::zero)
    }

    /// Speed when leaving position `k`.
    pub fn speed_at(&self, inst: &Instance<T>, k: usize) -> T {
        inst.speed(self.cum_weight[k])
    }

    /// Recomputes cumulative weights from position `from` and arrival
    /// times after it, then the totals.
    fn refresh_from(&mut self, inst: &Instance<T>, tour: &Tour, from: usize) {
        let n = tour.len();
        let mut cum = if from == 0 {
            T::zero()
        } else {
            self.cum_weight[from - 1]
        };
        for k in from..n {
            cum = cum + self.city_weight[tour.city_at(k)];
            self.cum_weight[k] = cum;
        }
        let mut t = self.arrive_time[from];
        for k in from..n {
            t = t + self.leg[k] / inst.speed(self.cum_weight[k]);
            self.arrive_time[k + 1] = t;
        }
        self.total_time = t;
        self.gain = self.total_profit - inst.renting_rate() * t;
    }

    /// Gain the solution would have after flipping item `j`, or `None` when
    /// collecting it would exceed the capacity. Does not modify anything.
    pub fn peek_flip(
        &self,
        inst: &Instance<T>,
        tour: &Tour,
        plan: &CollectionPlan,
        j: usize,
    ) -> Option<T> {
        let it = inst.item(j);
        let (dw, dp) = if plan.is_collected(j) {
            (-it.weight, -it.profit)
        } else {
            if !fits(self.total_weight() + it.weight, inst.capacity()) {
                return None;
            }
            (it.weight, it.profit)
        };
        let k = tour.position_of(it.city);
        let n = tour.len();
        let mut t = self.arrive_time[k];
        for i in k..n {
            t = t + self.leg[i] / inst.speed(self.cum_weight[i] + dw);
        }
        Some(self.total_profit + dp - inst.renting_rate() * t)
    }

    /// Flips item `j` in `plan` and updates the state in O(n).
    pub fn apply_flip(
        &mut self,
        inst: &Instance<T>,
        tour: &Tour,
        plan: &mut CollectionPlan,
        j: usize,
    ) -> Result<T> {
        let it = inst.item(j);
        if plan.is_collected(j) {
            self.city_weight[it.city] = self.city_weight[it.city] - it.weight;
            self.total_profit = self.total_profit - it.profit;
        } else {
            let w = self.total_weight() + it.weight;
            if !fits(w, inst.capacity()) {
                return Err(Error::CapacityExceeded {
                    weight: w.as_f64(),
                    capacity: inst.capacity().as_f64(),
                });
            }
            self.city_weight[it.city] = self.city_weight[it.city] + it.weight;
            self.total_profit = self.total_profit + it.profit;
        }
        plan.flip(j);
        self.refresh_from(inst, tour, tour.position_of(it.city));
        Ok(self.gain)
    }

    /// Reverses positions `k1..=k2` of `tour` and updates the state.
    pub fn apply_reversal(
        &mut self,
        inst: &Instance<T>,
        tour: &mut Tour,
        k1: usize,
        k2: usize,
    ) -> Result<T> {
        tour.reverse(k1, k2)?;
        let n = tour.len();
        for k in (k1 - 1)..=k2 {
            self.leg[k] = inst.distance(tour.city_at(k), tour.city_at((k + 1) % n));
        }
        self.refresh_from(inst, tour, k1 - 1);
        Ok(self.gain)
    }

    /// Applies a combined move: reverse `k1..=k2`, then flip every item in
    /// `uncollect` off and every item in `collect` on. Items must lie in
    /// the reversed segment.
    pub fn apply_segment_move(
        &mut self,
        inst: &Instance<T>,
        tour: &mut Tour,
        plan: &mut CollectionPlan,
        k1: usize,
        k2: usize,
        uncollect: &[usize],
        collect: &[usize],
    ) -> Result<T> {
        check_segment(k1, k2, tour.len())?;
        let mut total = self.total_weight();
        for &j in uncollect {
            debug_assert!(plan.is_collected(j));
            let it = inst.item(j);
            plan.set(j, false);
            self.city_weight[it.city] = self.city_weight[it.city] - it.weight;
            self.total_profit = self.total_profit - it.profit;
            total = total - it.weight;
        }
        for &j in collect {
            debug_assert!(!plan.is_collected(j));
            let it = inst.item(j);
            plan.set(j, true);
            self.city_weight[it.city] = self.city_weight[it.city] + it.weight;
            self.total_profit = self.total_profit + it.profit;
            total = total + it.weight;
        }
        if !fits(total, inst.capacity()) {
            return Err(Error::CapacityExceeded {
                weight: total.as_f64(),
                capacity: inst.capacity().as_f64(),
            });
        }
        self.apply_reversal(inst, tour, k1, k2)
    }

    /// Gain after reversing `k1..=k2` with per-city weight changes `dw`
    /// (indexed by city, non-zero only for cities inside the segment) and
    /// profit change `dprofit`. `dw_total` is the sum of `dw`. Does not modify
    /// anything; O(k2 - k1) when the total weight is unchanged, O(n - k1)
    /// otherwise.
    #[allow(clippy::too_many_arguments)]
    pub fn peek_segment_move(
        &self,
        inst: &Instance<T>,
        tour: &Tour,
        k1: usize,
        k2: usize,
        dw: &[T],
        dw_total: T,
        dprofit: T,
    ) -> T {
        let n = tour.len();
        let mut t = self.arrive_time[k1 - 1];
        let mut cum = self.cum_weight[k1 - 1];
        let mut prev = tour.city_at(k1 - 1);
        // leaving position k1 - 1 with unchanged load
        for i in k1..=k2 {
            let city = tour.city_at(k1 + k2 - i);
            t = t + inst.distance(prev, city) / inst.speed(cum);
            cum = cum + self.city_weight[city] + dw[city];
            prev = city;
        }
        let next = tour.city_at((k2 + 1) % n);
        t = t + inst.distance(prev, next) / inst.speed(cum);
        if k2 + 1 < n {
            if dw_total == T::zero() {
                t = t + (self.arrive_time[n] - self.arrive_time[k2 + 1]);
            } else {
                for i in (k2 + 1)..n {
                    cum = cum + self.city_weight[tour.city_at(i)];
                    t = t + self.leg[i] / inst.speed(cum);
                }
            }
        }
        self.total_profit + dprofit - inst.renting_rate() * t
    }
}

/// A tour, a plan and their cached evaluation, kept consistent.
#[derive(Debug, Clone)]
pub struct Solution<T: Scalar = f64> {
    pub tour: Tour,
    pub plan: CollectionPlan,
    pub state: EvalState<T>,
}

impl<T: Scalar> Solution<T> {
    pub fn new(inst: &Instance<T>, tour: Tour, plan: CollectionPlan) -> Result<Self> {
        let state = evaluate_full(inst, &tour, &plan)?;
        Ok(Solution { tour, plan, state })
    }

    #[inline]
    pub fn gain(&self) -> T {
        self.state.gain
    }

    pub fn flip(&mut self, inst: &Instance<T>, j: usize) -> Result<T> {
        self.state.apply_flip(inst, &self.tour, &mut self.plan, j)
    }

    pub fn peek_flip(&self, inst: &Instance<T>, j: usize) -> Option<T> {
        self.state.peek_flip(inst, &self.tour, &self.plan, j)
    }

    pub fn reverse(&mut self, inst: &Instance<T>, k1: usize, k2: usize) -> Result<T> {
        self.state.apply_reversal(inst, &mut self.tour, k1, k2)
    }

    /// Re-evaluates from scratch, e.g. to drop accumulated rounding.
    pub fn refresh(&mut self, inst: &Instance<T>) -> Result<()> {
        self.state = evaluate_full(inst, &self.tour, &self.plan)?;
        Ok(())
    }
}
