//! Exhaustive search over all tours and all feasible plans.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::{fits, CollectionPlan, Solution, Tour};
use crate::instance::Instance;
use crate::scalar::Scalar;

/// Largest `(n - 1)! * 2^m` the oracle accepts.
pub const ORACLE_LIMIT: f64 = 1e8;

/// Number of (tour, plan) pairs the oracle would enumerate.
pub fn search_space(n: usize, m: usize) -> f64 {
    let tours: f64 = (1..n).map(|k| k as f64).product();
    tours * 2f64.powi(m as i32)
}

struct Best<T> {
    gain: T,
    order: Vec<usize>,
    mask: u64,
}

fn better<T: Scalar>(a: Best<T>, b: Best<T>) -> Best<T> {
    // ties keep the lexicographically first (tour, plan) for determinism
    if b.gain > a.gain || (b.gain == a.gain && (&b.order, b.mask) < (&a.order, a.mask)) {
        b
    } else {
        a
    }
}

fn gain_of<T: Scalar>(inst: &Instance<T>, order: &[usize], city_weight: &[T], profit: T) -> T {
    let n = order.len();
    let mut cum = T::zero();
    let mut t = T::zero();
    for k in 0..n {
        cum = cum + city_weight[order[k]];
        t = t + inst.distance(order[k], order[(k + 1) % n]) / inst.speed(cum);
    }
    profit - inst.renting_rate() * t
}

/// Advances `perm` to the next lexicographic permutation; false at the end.
fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = perm.iter().rposition(|&x| x > perm[i]).expect("pivot has a successor");
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

/// Exact optimum by enumeration: every tour starting at the depot and every
/// capacity-feasible plan. Branches on the first city after the depot run in
/// parallel.
pub fn brute_force_optimum<T: Scalar>(inst: &Instance<T>) -> Result<(T, Solution<T>)> {
    let (n, m) = (inst.n(), inst.m());
    let space = search_space(n, m);
    if space > ORACLE_LIMIT || m >= 64 {
        return Err(Error::TooLarge(space));
    }
    let plans: Vec<(u64, Vec<T>, T)> = (0..1u64 << m)
        .filter_map(|mask| {
            let mut cw = vec![T::zero(); n];
            let (mut w, mut p) = (T::zero(), T::zero());
            for j in (0..m).filter(|j| mask >> j & 1 == 1) {
                let it = inst.item(j);
                cw[it.city] = cw[it.city] + it.weight;
                w = w + it.weight;
                p = p + it.profit;
            }
            fits(w, inst.capacity()).then_some((mask, cw, p))
        })
        .collect();

    let search = |first: usize| -> Best<T> {
        let mut rest: Vec<usize> = (1..n).filter(|&c| c != first).collect();
        let mut order = Vec::with_capacity(n);
        let mut best = Best { gain: T::neg_infinity(), order: Vec::new(), mask: 0 };
        loop {
            order.clear();
            order.push(0);
            if n > 1 {
                order.push(first);
            }
            order.extend_from_slice(&rest);
            for (mask, cw, p) in &plans {
                let g = gain_of(inst, &order, cw, *p);
                if g > best.gain {
                    best = Best { gain: g, order: order.clone(), mask: *mask };
                }
            }
            if !next_permutation(&mut rest) {
                return best;
            }
        }
    };
    let best = (1..n)
        .into_par_iter()
        .map(search)
        .reduce_with(better)
        .expect("n >= 2 gives at least one branch");
    let plan = CollectionPlan::from_bits((0..m).map(|j| best.mask >> j & 1 == 1).collect());
    let sol = Solution::new(inst, Tour::new(best.order)?, plan)?;
    Ok((sol.gain(), sol))
}
