//! Initial tours and initial collection plans for each restart.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;

use crate::eval::{evaluate_full, fits, CollectionPlan, EvalState, Tour};
use crate::instance::Instance;
use crate::neighbors::CandidateLists;
use crate::scalar::Scalar;

/// Randomised nearest-neighbour choice width.
const NN_WIDTH: usize = 3;
/// Double-bridge kicks applied after the first descent.
const MAX_KICKS: usize = 100;

fn tour_length<T: Scalar>(inst: &Instance<T>, order: &[usize]) -> T {
    let n = order.len();
    (0..n).map(|k| inst.distance(order[k], order[(k + 1) % n])).sum()
}

/// Nearest-neighbour tour from the depot, choosing uniformly among the
/// `width` closest unvisited cities at every step.
pub fn nearest_neighbor_order<T: Scalar, R: Rng>(
    inst: &Instance<T>,
    width: usize,
    rng: &mut R,
) -> Vec<usize> {
    let n = inst.n();
    let width = width.max(1);
    let mut visited = vec![false; n];
    visited[0] = true;
    let mut order = Vec::with_capacity(n);
    order.push(0);
    let mut best: Vec<(T, usize)> = Vec::with_capacity(width + 1);
    while order.len() < n {
        let cur = *order.last().unwrap();
        best.clear();
        for c in (0..n).filter(|&c| !visited[c]) {
            let d = inst.distance(cur, c);
            if best.len() < width || d < best[best.len() - 1].0 {
                let at = best.partition_point(|&(bd, _)| bd <= d);
                best.insert(at, (d, c));
                best.truncate(width);
            }
        }
        let (_, next) = best[rng.gen_range(0..best.len())];
        visited[next] = true;
        order.push(next);
    }
    order
}

fn reverse_positions(order: &mut [usize], pos: &mut [usize], a: usize, b: usize) {
    order[a..=b].reverse();
    for (k, &c) in order.iter().enumerate().take(b + 1).skip(a) {
        pos[c] = k;
    }
}

/// 2-opt descent on distances alone, restricted to candidate edges. The
/// depot stays at position 0.
pub fn two_opt_descent<T: Scalar>(inst: &Instance<T>, cands: &CandidateLists, order: &mut [usize]) {
    let n = order.len();
    if n < 4 {
        return;
    }
    let eps = T::lit(1e-9);
    let mut pos = vec![0; n];
    for (k, &c) in order.iter().enumerate() {
        pos[c] = k;
    }
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n {
            let a = order[i];
            let a_next = order[(i + 1) % n];
            let d_a = inst.distance(a, a_next);
            for &b in cands.of(a) {
                let d_ab = inst.distance(a, b);
                if d_ab >= d_a {
                    break;
                }
                let j = pos[b];
                let b_next = order[(j + 1) % n];
                if b == a_next || b_next == a {
                    continue;
                }
                let delta = d_ab + inst.distance(a_next, b_next) - d_a - inst.distance(b, b_next);
                if delta < -eps {
                    // new edges (a, b) and (a_next, b_next)
                    let (s, e) = if i < j { (i + 1, j) } else { (j + 1, i) };
                    reverse_positions(order, &mut pos, s, e);
                    improved = true;
                    break;
                }
            }
        }
    }
}

/// Double-bridge perturbation of the non-depot part of the tour.
pub fn double_bridge<R: Rng>(order: &[usize], rng: &mut R) -> Vec<usize> {
    let n = order.len();
    if n < 8 {
        return order.to_vec();
    }
    let mut cuts = [0usize; 3];
    loop {
        for c in cuts.iter_mut() {
            *c = rng.gen_range(2..n);
        }
        cuts.sort_unstable();
        if cuts[0] < cuts[1] && cuts[1] < cuts[2] {
            break;
        }
    }
    let [p, q, r] = cuts;
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&order[..p]);
    out.extend_from_slice(&order[q..r]);
    out.extend_from_slice(&order[p..q]);
    out.extend_from_slice(&order[r..]);
    out
}

/// Initial tour of a restart: randomised nearest neighbour, 2-opt descent,
/// then a chain of double-bridge kicks each followed by re-descent, keeping
/// the shortest tour seen.
pub fn initial_tour<T: Scalar, R: Rng>(inst: &Instance<T>, cands: &CandidateLists, rng: &mut R) -> Tour {
    let n = inst.n();
    let mut order = nearest_neighbor_order(inst, NN_WIDTH, rng);
    two_opt_descent(inst, cands, &mut order);
    let mut len = tour_length(inst, &order);
    if n >= 8 {
        for _ in 0..MAX_KICKS.min(n) {
            let mut cand = double_bridge(&order, rng);
            two_opt_descent(inst, cands, &mut cand);
            let l = tour_length(inst, &cand);
            if l < len {
                order = cand;
                len = l;
            }
        }
    }
    Tour::new(order).expect("constructed order is a permutation starting at the depot")
}

/// Packing score exponent search: golden-section steps over `[0, 5]`.
const ALPHA_EVALS: usize = 20;
const ALPHA_HI: f64 = 5.0;

fn pack_with_exponent<T: Scalar>(
    inst: &Instance<T>,
    tour: &Tour,
    to_end: &[T],
    alpha: f64,
) -> (CollectionPlan, T) {
    let m = inst.m();
    let a = T::lit(alpha);
    let tiny = T::lit(1e-9);
    let mut scored: Vec<(T, usize)> = (0..m)
        .map(|j| {
            let it = inst.item(j);
            let d = to_end[tour.position_of(it.city)].max(tiny);
            (it.profit.powf(a) / (it.weight.powf(a) * d), j)
        })
        .collect();
    scored.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(Ordering::Equal).then(x.1.cmp(&y.1)));
    let mut plan = CollectionPlan::empty(m);
    let mut st = evaluate_full(inst, tour, &plan).expect("empty plan is feasible");
    for (_, j) in scored {
        if let Some(g) = st.peek_flip(inst, tour, &plan, j) {
            if g > st.gain {
                st.apply_flip(inst, tour, &mut plan, j).expect("checked feasible");
            }
        }
    }
    (plan, st.gain)
}

/// Score-ordered packing: items ranked by `profit^a / (weight^a * d)` with
/// `d` the remaining tour distance from the item's city, each added if it
/// fits and strictly raises the gain. The exponent `a` is tuned by a
/// golden-section search; the empty plan is the fallback.
pub fn pack_iterative<T: Scalar>(inst: &Instance<T>, tour: &Tour) -> CollectionPlan {
    let n = tour.len();
    let m = inst.m();
    let empty = CollectionPlan::empty(m);
    if m == 0 {
        return empty;
    }
    let mut to_end = vec![T::zero(); n + 1];
    for k in (0..n).rev() {
        to_end[k] = to_end[k + 1] + inst.distance(tour.city_at(k), tour.city_at((k + 1) % n));
    }
    let empty_gain = evaluate_full(inst, tour, &empty).expect("empty plan").gain;
    let mut best = (empty, empty_gain);
    let eval = |alpha: f64, best: &mut (CollectionPlan, T)| {
        let (plan, g) = pack_with_exponent(inst, tour, &to_end, alpha);
        if g > best.1 {
            *best = (plan, g);
        }
        g
    };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, ALPHA_HI);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = eval(x1, &mut best);
    let mut f2 = eval(x2, &mut best);
    for _ in 2..ALPHA_EVALS {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = eval(x1, &mut best);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = eval(x2, &mut best);
        }
    }
    best.0
}

#[derive(Clone, Copy)]
struct Bound<T> {
    delta: T,
    item: usize,
}

impl<T: Scalar> PartialEq for Bound<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Scalar> Eq for Bound<T> {}
impl<T: Scalar> PartialOrd for Bound<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Bound<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.delta
            .partial_cmp(&other.delta)
            .unwrap_or(Ordering::Equal)
            .then(other.item.cmp(&self.item))
    }
}

/// Greedy insertion: repeatedly collects the item with the largest positive
/// exact gain change.
///
/// Travel time is convex in the carried weight, so an item's gain change can
/// only shrink as other items are added. Stale values are therefore upper
/// bounds and a lazy priority queue finds the exact best item each round.
pub fn insertion_pack<T: Scalar>(inst: &Instance<T>, tour: &Tour) -> CollectionPlan {
    let m = inst.m();
    let mut plan = CollectionPlan::empty(m);
    let mut st: EvalState<T> = evaluate_full(inst, tour, &plan).expect("empty plan is feasible");
    let mut heap: BinaryHeap<Bound<T>> = (0..m)
        .filter_map(|j| {
            let g = st.peek_flip(inst, tour, &plan, j)?;
            let delta = g - st.gain;
            (delta > T::zero()).then_some(Bound { delta, item: j })
        })
        .collect();
    while let Some(top) = heap.pop() {
        let j = top.item;
        if !fits(st.total_weight() + inst.item(j).weight, inst.capacity()) {
            continue;
        }
        let Some(g) = st.peek_flip(inst, tour, &plan, j) else {
            continue;
        };
        let delta = g - st.gain;
        if delta <= T::zero() {
            continue;
        }
        let fresh = Bound { delta, item: j };
        if heap.peek().map_or(true, |next| fresh >= *next) {
            st.apply_flip(inst, tour, &mut plan, j).expect("checked feasible");
        } else {
            heap.push(fresh);
        }
    }
    plan
}

/// The better of [`pack_iterative`] and [`insertion_pack`] (ties keep the
/// former), with its gain.
pub fn init_collection_plan<T: Scalar>(inst: &Instance<T>, tour: &Tour) -> (CollectionPlan, T) {
    let a = pack_iterative(inst, tour);
    let b = insertion_pack(inst, tour);
    let ga = evaluate_full(inst, tour, &a).expect("packer output is feasible").gain;
    let gb = evaluate_full(inst, tour, &b).expect("packer output is feasible").gain;
    if gb > ga {
        (b, gb)
    } else {
        (a, ga)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{random_tiny_instance, EIL76};
    use crate::instance::{EdgeWeightKind, ItemSpec};
    use crate::neighbors::{build_candidates, NeighborBackend};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn best_plan_for_tour(inst: &Instance, tour: &Tour) -> f64 {
        let m = inst.m();
        let mut best = f64::NEG_INFINITY;
        for mask in 0u32..(1 << m) {
            let plan = CollectionPlan::from_bits((0..m).map(|j| mask >> j & 1 == 1).collect());
            if let Ok(st) = evaluate_full(inst, tour, &plan) {
                best = best.max(st.gain);
            }
        }
        best
    }

    #[test]
    fn tiny_tours() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let two: Instance = random_tiny_instance(1, 2, 0);
        let c = build_candidates(&two, NeighborBackend::Delaunay);
        assert_eq!(initial_tour(&two, &c, &mut rng).order(), &[0, 1]);
        let three: Instance = random_tiny_instance(2, 3, 0);
        let c = build_candidates(&three, NeighborBackend::Delaunay);
        let t = initial_tour(&three, &c, &mut rng);
        assert_eq!(t.city_at(0), 0);
        let l = t.length(&three);
        let other = Tour::new(vec![0, 2, 1]).unwrap().length(&three);
        assert_eq!(l, other);
    }

    #[test]
    fn tours_are_valid_and_seed_dependent() {
        let inst: Instance = random_tiny_instance(4, 60, 0);
        let c = build_candidates(&inst, NeighborBackend::Delaunay);
        let mut seen = std::collections::HashSet::new();
        for seed in 0..10 {
            let t = initial_tour(&inst, &c, &mut ChaCha8Rng::seed_from_u64(seed));
            assert_eq!(t.position_of(0), 0);
            let mut sorted = t.order().to_vec();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..60).collect::<Vec<_>>());
            seen.insert(t.order().to_vec());
        }
        assert!(seen.len() > 1);
        let a = initial_tour(&inst, &c, &mut ChaCha8Rng::seed_from_u64(3));
        let b = initial_tour(&inst, &c, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }

    fn greedy_two_opt_baseline(inst: &Instance) -> f64 {
        // deterministic nearest neighbour + exhaustive first-improvement 2-opt
        let n = inst.n();
        let mut order = vec![0];
        let mut used = vec![false; n];
        used[0] = true;
        while order.len() < n {
            let cur = *order.last().unwrap();
            let next = (0..n)
                .filter(|&c| !used[c])
                .min_by(|&a, &b| inst.distance(cur, a).total_cmp(&inst.distance(cur, b)))
                .unwrap();
            used[next] = true;
            order.push(next);
        }
        let d = |a: usize, b: usize| inst.distance(a, b);
        let mut improved = true;
        while improved {
            improved = false;
            for i in 1..n - 1 {
                for j in i + 1..n {
                    let (a, b, c, e) = (order[i - 1], order[i], order[j], order[(j + 1) % n]);
                    if d(a, c) + d(b, e) < d(a, b) + d(c, e) - 1e-9 {
                        order[i..=j].reverse();
                        improved = true;
                    }
                }
            }
        }
        (0..n).map(|k| d(order[k], order[(k + 1) % n])).sum()
    }

    #[test]
    fn eil76_tour_quality() {
        let inst = Instance::<f64>::new(
            "eil76",
            EIL76.to_vec(),
            EdgeWeightKind::Ceil2d,
            vec![],
            1.0,
            1.0,
            0.1,
            1.0,
        )
        .unwrap();
        let base = greedy_two_opt_baseline(&inst);
        let c = build_candidates(&inst, NeighborBackend::Delaunay);
        for seed in 0..5 {
            let t = initial_tour(&inst, &c, &mut ChaCha8Rng::seed_from_u64(seed));
            assert!(t.length(&inst) <= 1.05 * base, "{} vs {base}", t.length(&inst));
        }
    }

    #[test]
    fn free_time_collects_everything() {
        let items = vec![
            ItemSpec { profit: 3.0, weight: 2.0, city: 1 },
            ItemSpec { profit: 1.0, weight: 5.0, city: 2 },
            ItemSpec { profit: 7.0, weight: 1.0, city: 3 },
        ];
        let inst = Instance::new(
            "free",
            vec![[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]],
            EdgeWeightKind::Ceil2d,
            items,
            8.0,
            0.0,
            0.1,
            1.0,
        )
        .unwrap();
        let tour = Tour::identity(4);
        assert_eq!(pack_iterative(&inst, &tour).count(), 3);
        assert_eq!(insertion_pack(&inst, &tour).count(), 3);
    }

    #[test]
    fn unprofitable_items_are_left() {
        let items = vec![
            ItemSpec { profit: 1.0, weight: 9.0, city: 1 },
            ItemSpec { profit: 2.0, weight: 9.0, city: 2 },
        ];
        let inst = Instance::new(
            "costly",
            vec![[0.0, 0.0], [100.0, 0.0], [100.0, 100.0]],
            EdgeWeightKind::Ceil2d,
            items,
            10.0,
            5.0,
            0.1,
            1.0,
        )
        .unwrap();
        let tour = Tour::identity(3);
        let empty = evaluate_full(&inst, &tour, &CollectionPlan::empty(2)).unwrap().gain;
        for j in 0..2 {
            let mut plan = CollectionPlan::empty(2);
            plan.set(j, true);
            assert!(evaluate_full(&inst, &tour, &plan).unwrap().gain < empty);
        }
        assert_eq!(pack_iterative(&inst, &tour).count(), 0);
        assert_eq!(insertion_pack(&inst, &tour).count(), 0);
        assert_eq!(init_collection_plan(&inst, &tour).0.count(), 0);
    }

    #[test]
    fn no_items_and_single_item() {
        let inst: Instance = random_tiny_instance(1, 5, 0);
        let tour = Tour::identity(5);
        assert!(insertion_pack(&inst, &tour).is_empty());
        let one = Instance::new(
            "one",
            vec![[0.0, 0.0], [1.0, 0.0]],
            EdgeWeightKind::Ceil2d,
            vec![ItemSpec { profit: 50.0, weight: 1.0, city: 1 }],
            1.0,
            1.0,
            0.1,
            1.0,
        )
        .unwrap();
        assert_eq!(insertion_pack(&one, &Tour::identity(2)).to_binary(), vec![1]);
    }

    #[test]
    fn packers_near_optimal_on_small_instances() {
        let mut within = 0;
        for seed in 0..30 {
            let inst: Instance = random_tiny_instance(seed, 6, 6);
            let tour = Tour::identity(6);
            let opt = best_plan_for_tour(&inst, &tour);
            let (plan, g) = init_collection_plan(&inst, &tour);
            assert!(g <= opt + 1e-9);
            assert_eq!(evaluate_full(&inst, &tour, &plan).unwrap().gain, g);
            let pg = evaluate_full(&inst, &tour, &pack_iterative(&inst, &tour)).unwrap().gain;
            let empty = evaluate_full(&inst, &tour, &CollectionPlan::empty(6)).unwrap().gain;
            assert!(pg >= empty);
            if opt - pg <= 0.1 * opt.abs() {
                within += 1;
            }
        }
        assert!(within >= 27, "pack_iterative within 10% on {within}/30");
    }

    #[test]
    fn insertion_steps_each_improve() {
        for seed in 0..20 {
            let inst: Instance = random_tiny_instance(seed, 6, 6);
            let tour = Tour::identity(6);
            let plan = insertion_pack(&inst, &tour);
            // replay: greedy by exact best delta must reproduce the set, each step improving
            let mut cur = CollectionPlan::empty(6);
            let mut g = evaluate_full(&inst, &tour, &cur).unwrap().gain;
            loop {
                let best = (0..6)
                    .filter(|&j| !cur.is_collected(j))
                    .filter_map(|j| {
                        let mut p = cur.clone();
                        p.set(j, true);
                        evaluate_full(&inst, &tour, &p).ok().map(|s| (s.gain, j))
                    })
                    .filter(|&(ng, _)| ng > g)
                    .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
                match best {
                    Some((ng, j)) => {
                        assert!(ng > g);
                        cur.set(j, true);
                        g = ng;
                    }
                    None => break,
                }
            }
            assert_eq!(cur, plan, "seed {seed}");
        }
    }
}
