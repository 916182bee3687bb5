//! Seeded instance generators: tiny random instances for exhaustive checks
//! and benchmark-style instances laid over a fixed city set.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::construct::initial_tour;
use crate::error::{Error, Result};
use crate::eval::{evaluate_full, CollectionPlan};
use crate::instance::{EdgeWeightKind, Instance, ItemSpec};
use crate::neighbors::{build_candidates, NeighborBackend};
use crate::scalar::Scalar;

/// The 76 cities of TSPLIB `eil76` (EUC_2D), in file order.
pub const EIL76: [[f64; 2]; 76] = [
    [22.0, 22.0], [36.0, 26.0], [21.0, 45.0], [45.0, 35.0], [55.0, 20.0], [33.0, 34.0],
    [50.0, 50.0], [55.0, 45.0], [26.0, 59.0], [40.0, 66.0], [55.0, 65.0], [35.0, 51.0],
    [62.0, 35.0], [62.0, 57.0], [62.0, 24.0], [21.0, 36.0], [33.0, 44.0], [9.0, 56.0],
    [62.0, 48.0], [66.0, 14.0], [44.0, 13.0], [26.0, 13.0], [11.0, 28.0], [7.0, 43.0],
    [17.0, 64.0], [41.0, 46.0], [55.0, 34.0], [35.0, 16.0], [52.0, 26.0], [43.0, 26.0],
    [31.0, 76.0], [22.0, 53.0], [26.0, 29.0], [50.0, 40.0], [55.0, 50.0], [54.0, 10.0],
    [60.0, 15.0], [47.0, 66.0], [30.0, 60.0], [30.0, 50.0], [12.0, 17.0], [15.0, 14.0],
    [16.0, 19.0], [21.0, 48.0], [50.0, 30.0], [51.0, 42.0], [50.0, 15.0], [48.0, 21.0],
    [12.0, 38.0], [15.0, 56.0], [29.0, 39.0], [54.0, 38.0], [55.0, 57.0], [67.0, 41.0],
    [10.0, 70.0], [6.0, 25.0], [65.0, 27.0], [40.0, 60.0], [70.0, 64.0], [64.0, 4.0],
    [36.0, 6.0], [30.0, 20.0], [20.0, 30.0], [15.0, 5.0], [50.0, 70.0], [57.0, 72.0],
    [45.0, 42.0], [38.0, 33.0], [50.0, 4.0], [66.0, 8.0], [59.0, 5.0], [35.0, 60.0],
    [27.0, 24.0], [40.0, 20.0], [40.0, 37.0], [40.0, 40.0],
];

/// Random instance for exhaustive testing: coordinates uniform in
/// `[0, 100]^2`, integer weights and profits in `[1, 50]`, capacity half the
/// total item weight, renting rate uniform in `[0.1, 5]`, CEIL_2D distances,
/// `v_min = 0.1`, `v_max = 1`.
///
/// # Panics
/// If `n < 2`.
pub fn random_tiny_instance<T: Scalar>(seed: u64, n: usize, m: usize) -> Instance<T> {
    assert!(n >= 2, "need at least two cities");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n)
        .map(|_| [rng.gen_range(0.0..=100.0), rng.gen_range(0.0..=100.0)])
        .collect();
    let items: Vec<ItemSpec<T>> = (0..m)
        .map(|_| ItemSpec {
            profit: T::lit(rng.gen_range(1..=50) as f64),
            weight: T::lit(rng.gen_range(1..=50) as f64),
            city: rng.gen_range(1..n),
        })
        .collect();
    let total: f64 = items.iter().map(|it| it.weight.as_f64()).sum();
    let rate = rng.gen_range(0.1..=5.0);
    Instance::new(
        format!("tiny_s{seed}_n{n}_m{m}"),
        coords,
        EdgeWeightKind::Ceil2d,
        items,
        T::lit(0.5 * total),
        T::lit(rate),
        T::lit(0.1),
        T::lit(1.0),
    )
    .expect("generated instance is valid")
}

/// Knapsack type of a benchmark-style instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KnapsackType {
    /// Weights in `[1, 1000]`, profit = weight + 100.
    BoundedStronglyCorr,
    /// Weights in `[1000, 1010]`, profits in `[1, 1000]`.
    UncorrSimilarWeights,
    /// Weights and profits independent in `[1, 1000]`.
    Uncorr,
}

impl KnapsackType {
    /// Tag used in file names.
    pub fn tag(self) -> &'static str {
        match self {
            KnapsackType::BoundedStronglyCorr => "bounded-strongly-corr",
            KnapsackType::UncorrSimilarWeights => "uncorr-similar-weights",
            KnapsackType::Uncorr => "uncorr",
        }
    }

    /// Value of the `KNAPSACK DATA TYPE` header.
    pub fn header(self) -> &'static str {
        match self {
            KnapsackType::BoundedStronglyCorr => "bounded strongly corr",
            KnapsackType::UncorrSimilarWeights => "uncorrelated, similar weights",
            KnapsackType::Uncorr => "uncorrelated",
        }
    }

    fn draw<R: Rng>(self, rng: &mut R) -> (f64, f64) {
        match self {
            KnapsackType::BoundedStronglyCorr => {
                let w = rng.gen_range(1..=1000) as f64;
                (w + 100.0, w)
            }
            KnapsackType::UncorrSimilarWeights => (
                rng.gen_range(1..=1000) as f64,
                rng.gen_range(1000..=1010) as f64,
            ),
            KnapsackType::Uncorr => (
                rng.gen_range(1..=1000) as f64,
                rng.gen_range(1..=1000) as f64,
            ),
        }
    }
}

impl fmt::Display for KnapsackType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for KnapsackType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounded-strongly-corr" => Ok(KnapsackType::BoundedStronglyCorr),
            "uncorr-similar-weights" => Ok(KnapsackType::UncorrSimilarWeights),
            "uncorr" => Ok(KnapsackType::Uncorr),
            other => Err(Error::OutOfRange(format!("unknown knapsack type '{other}'"))),
        }
    }
}

/// Parameters of a benchmark-style instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    /// Base name of the city set, e.g. `eil76`.
    pub base: String,
    pub coords: Vec<[f64; 2]>,
    pub edge_weight_kind: EdgeWeightKind,
    /// Items per non-depot city.
    pub item_factor: usize,
    pub knapsack: KnapsackType,
    /// Capacity level `1..=10`; the capacity is `level / 11` of the total weight.
    pub capacity_level: u32,
    pub seed: u64,
}

impl BenchmarkSpec {
    /// The three eil76 category shapes: `A` (1 item per city, bounded
    /// strongly correlated, level 1), `B` (5, uncorrelated similar weights,
    /// level 5) and `C` (10, uncorrelated, level 10).
    pub fn eil76_category(category: char, seed: u64) -> Result<Self> {
        let (item_factor, knapsack, capacity_level) = match category.to_ascii_uppercase() {
            'A' => (1, KnapsackType::BoundedStronglyCorr, 1),
            'B' => (5, KnapsackType::UncorrSimilarWeights, 5),
            'C' => (10, KnapsackType::Uncorr, 10),
            other => return Err(Error::OutOfRange(format!("unknown category '{other}'"))),
        };
        Ok(BenchmarkSpec {
            base: "eil76".into(),
            coords: EIL76.to_vec(),
            edge_weight_kind: EdgeWeightKind::Ceil2d,
            item_factor,
            knapsack,
            capacity_level,
            seed,
        })
    }

    /// Benchmark-style file name stem, e.g. `eil76_n375_uncorr-similar-weights_05`.
    pub fn stem(&self) -> String {
        format!(
            "{}_n{}_{}_{:02}",
            self.base,
            (self.coords.len() - 1) * self.item_factor,
            self.knapsack.tag(),
            self.capacity_level
        )
    }
}

/// Generates a benchmark-style instance. Item `j` is placed in city
/// `1 + j mod (n - 1)`. The renting rate makes one reference solution (a
/// constructed tour with a greedy ratio packing) worth exactly zero, rounded
/// to two decimals.
pub fn benchmark_instance<T: Scalar>(spec: &BenchmarkSpec, name: &str) -> Result<Instance<T>> {
    let n = spec.coords.len();
    if n < 2 {
        return Err(Error::InfeasibleInstance("need at least 2 cities".into()));
    }
    if !(1..=10).contains(&spec.capacity_level) {
        return Err(Error::OutOfRange(format!(
            "capacity level {} outside 1..=10",
            spec.capacity_level
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let m = (n - 1) * spec.item_factor;
    let items: Vec<ItemSpec<T>> = (0..m)
        .map(|j| {
            let (p, w) = spec.knapsack.draw(&mut rng);
            ItemSpec {
                profit: T::lit(p),
                weight: T::lit(w),
                city: 1 + j % (n - 1),
            }
        })
        .collect();
    let total: f64 = items.iter().map(|it| it.weight.as_f64()).sum();
    let capacity = (spec.capacity_level as f64 * total / 11.0).floor();
    let build = |rate: f64| {
        Instance::new(
            name,
            spec.coords.clone(),
            spec.edge_weight_kind,
            items.clone(),
            T::lit(capacity),
            T::lit(rate),
            T::lit(0.1),
            T::lit(1.0),
        )
        .map(|i| i.with_knapsack_data_type(spec.knapsack.header()))
    };
    let probe = build(0.0)?;
    let cands = build_candidates(&probe, NeighborBackend::Delaunay);
    let tour = initial_tour(&probe, &cands, &mut rng);
    let plan = greedy_ratio_plan(&probe);
    let st = evaluate_full(&probe, &tour, &plan)?;
    let rate = if st.total_time > T::zero() {
        (st.total_profit / st.total_time).as_f64()
    } else {
        0.0
    };
    build((rate * 100.0).round() / 100.0)
}

/// Adds items in decreasing profitability while they fit.
pub fn greedy_ratio_plan<T: Scalar>(inst: &Instance<T>) -> CollectionPlan {
    let mut order: Vec<usize> = (0..inst.m()).collect();
    order.sort_by(|&a, &b| crate::instance::profitability_order(inst.item(a), inst.item(b)));
    let mut plan = CollectionPlan::empty(inst.m());
    let mut weight = T::zero();
    for j in order {
        let w = weight + inst.item(j).weight;
        if w <= inst.capacity() {
            plan.set(j, true);
            weight = w;
        }
    }
    plan
}
