//! TTP instances: the `.ttp` benchmark text format, validation and distances.
//!
//! Cities and items are 0-based inside the library. The file format (and the
//! CLI output) is 1-based; conversion happens only at that boundary. City 0
//! is the depot where the tour starts and ends and it never holds items.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Instances up to this many cities keep a full distance matrix.
pub const DISTANCE_CACHE_LIMIT: usize = 2000;

/// TSPLIB edge weight conventions supported by the benchmark files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeWeightKind {
    /// Euclidean distance rounded up.
    Ceil2d,
    /// Euclidean distance rounded to the nearest integer.
    Euc2d,
}

impl EdgeWeightKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeWeightKind::Ceil2d => "CEIL_2D",
            EdgeWeightKind::Euc2d => "EUC_2D",
        }
    }

    /// Integer TSPLIB distance between two points.
    pub fn distance(self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let dx = a[0] - b[0];
        let dy = a[1] - b[1];
        let e = (dx * dx + dy * dy).sqrt();
        match self {
            EdgeWeightKind::Ceil2d => e.ceil(),
            EdgeWeightKind::Euc2d => (e + 0.5).floor(),
        }
    }
}

impl FromStr for EdgeWeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "CEIL_2D" => Ok(EdgeWeightKind::Ceil2d),
            "EUC_2D" => Ok(EdgeWeightKind::Euc2d),
            other => Err(Error::MalformedHeader(format!(
                "unsupported EDGE_WEIGHT_TYPE '{other}'"
            ))),
        }
    }
}

/// One item: where it lies and what it is worth.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemRecord<T: Scalar = f64> {
    /// 0-based item index.
    pub id: usize,
    pub profit: T,
    pub weight: T,
    /// 0-based city index, never 0.
    pub city: usize,
    /// `profit / weight`
    pub ratio: T,
}

/// Raw item description handed to [`Instance::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItemSpec<T: Scalar = f64> {
    pub profit: T,
    pub weight: T,
    /// 0-based city index.
    pub city: usize,
}

/// Immutable problem data.
#[derive(Debug, Clone)]
pub struct Instance<T: Scalar = f64> {
    name: String,
    knapsack_data_type: String,
    coords: Vec<[f64; 2]>,
    edge_weight_kind: EdgeWeightKind,
    items: Vec<ItemRecord<T>>,
    /// Items of each city, most profitable first.
    city_items: Vec<Vec<usize>>,
    capacity: T,
    renting_rate: T,
    v_min: T,
    v_max: T,
    max_ratio: T,
    matrix: Option<Vec<T>>,
}

/// Total order "a is more profitable than b" puts `a` first: higher ratio,
/// then higher profit, then lower id.
pub fn profitability_order<T: Scalar>(a: &ItemRecord<T>, b: &ItemRecord<T>) -> Ordering {
    b.ratio
        .partial_cmp(&a.ratio)
        .unwrap_or(Ordering::Equal)
        .then_with(|| b.profit.partial_cmp(&a.profit).unwrap_or(Ordering::Equal))
        .then_with(|| a.id.cmp(&b.id))
}

impl<T: Scalar> Instance<T> {
    /// Builds and validates an instance. Item cities are 0-based.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        coords: Vec<[f64; 2]>,
        edge_weight_kind: EdgeWeightKind,
        items: Vec<ItemSpec<T>>,
        capacity: T,
        renting_rate: T,
        v_min: T,
        v_max: T,
    ) -> Result<Self> {
        let n = coords.len();
        if n < 2 {
            return Err(Error::InfeasibleInstance(format!(
                "need at least 2 cities, got {n}"
            )));
        }
        if coords.iter().any(|c| !c[0].is_finite() || !c[1].is_finite()) {
            return Err(Error::MalformedRow("non-finite coordinate".into()));
        }
        if !(v_min > T::zero()) || !(v_max > T::zero()) {
            return Err(Error::NonPositiveValue(format!(
                "speeds must be positive (min {v_min}, max {v_max})"
            )));
        }
        if v_min > v_max {
            return Err(Error::MalformedHeader(format!(
                "MIN SPEED {v_min} exceeds MAX SPEED {v_max}"
            )));
        }
        if !(capacity >= T::zero()) || !capacity.is_finite() {
            return Err(Error::NonPositiveValue(format!("capacity {capacity}")));
        }
        if !(renting_rate >= T::zero()) || !renting_rate.is_finite() {
            return Err(Error::NonPositiveValue(format!("renting ratio {renting_rate}")));
        }

        let mut records = Vec::with_capacity(items.len());
        for (id, spec) in items.into_iter().enumerate() {
            if spec.city == 0 || spec.city >= n {
                return Err(Error::BadItemCity {
                    item: id + 1,
                    city: spec.city + 1,
                    n,
                });
            }
            if !(spec.profit > T::zero()) || !(spec.weight > T::zero()) {
                return Err(Error::NonPositiveValue(format!(
                    "item {} has profit {} and weight {}",
                    id + 1,
                    spec.profit,
                    spec.weight
                )));
            }
            let ratio = spec.profit / spec.weight;
            if !ratio.is_finite() {
                return Err(Error::NonPositiveValue(format!(
                    "item {} has a non-finite profit/weight ratio",
                    id + 1
                )));
            }
            records.push(ItemRecord {
                id,
                profit: spec.profit,
                weight: spec.weight,
                city: spec.city,
                ratio,
            });
        }

        let mut city_items = vec![Vec::new(); n];
        for it in &records {
            city_items[it.city].push(it.id);
        }
        for list in &mut city_items {
            list.sort_by(|&a, &b| profitability_order(&records[a], &records[b]));
        }
        let max_ratio = records
            .iter()
            .map(|it| it.ratio)
            .fold(T::zero(), |a, b| a.max(b));

        let matrix = (n <= DISTANCE_CACHE_LIMIT).then(|| {
            let mut m = vec![T::zero(); n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = T::lit(edge_weight_kind.distance(coords[i], coords[j]));
                    m[i * n + j] = d;
                    m[j * n + i] = d;
                }
            }
            m
        });

        Ok(Instance {
            name: name.into(),
            knapsack_data_type: String::new(),
            coords,
            edge_weight_kind,
            items: records,
            city_items,
            capacity,
            renting_rate,
            v_min,
            v_max,
            max_ratio,
            matrix,
        })
    }

    pub fn with_knapsack_data_type(mut self, kind: impl Into<String>) -> Self {
        self.knapsack_data_type = kind.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn knapsack_data_type(&self) -> &str {
        &self.knapsack_data_type
    }

    /// Number of cities.
    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Number of items.
    pub fn m(&self) -> usize {
        self.items.len()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn edge_weight_kind(&self) -> EdgeWeightKind {
        self.edge_weight_kind
    }

    pub fn items(&self) -> &[ItemRecord<T>] {
        &self.items
    }

    pub fn item(&self, j: usize) -> &ItemRecord<T> {
        &self.items[j]
    }

    /// Items at `city`, most profitable first.
    pub fn items_at(&self, city: usize) -> &[usize] {
        &self.city_items[city]
    }

    pub fn capacity(&self) -> T {
        self.capacity
    }

    pub fn renting_rate(&self) -> T {
        self.renting_rate
    }

    pub fn v_min(&self) -> T {
        self.v_min
    }

    pub fn v_max(&self) -> T {
        self.v_max
    }

    /// Largest profit/weight ratio over all items (0 without items).
    pub fn max_ratio(&self) -> T {
        self.max_ratio
    }

    /// Speed loss per unit of carried weight, `(v_max - v_min) / W`.
    pub fn speed_slope(&self) -> T {
        if self.capacity > T::zero() {
            (self.v_max - self.v_min) / self.capacity
        } else {
            T::zero()
        }
    }

    /// Travel speed while carrying `weight`.
    #[inline]
    pub fn speed(&self, weight: T) -> T {
        self.v_max - weight * self.speed_slope()
    }

    /// Symmetric TSPLIB distance between two 0-based cities.
    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> T {
        match &self.matrix {
            Some(m) => m[a * self.coords.len() + b],
            None => {
                if a == b {
                    T::zero()
                } else {
                    T::lit(
                        self.edge_weight_kind
                            .distance(self.coords[a], self.coords[b]),
                    )
                }
            }
        }
    }

    pub fn total_item_weight(&self) -> T {
        self.items.iter().map(|it| it.weight).sum()
    }

    /// Serialises to the `.ttp` text format.
    pub fn to_ttp_string(&self) -> String {
        let mut s = String::new();
        let kind = if self.knapsack_data_type.is_empty() {
            "unspecified"
        } else {
            &self.knapsack_data_type
        };
        let _ = writeln!(s, "PROBLEM NAME: \t{}", self.name);
        let _ = writeln!(s, "KNAPSACK DATA TYPE: \t{kind}");
        let _ = writeln!(s, "DIMENSION:\t{}", self.n());
        let _ = writeln!(s, "NUMBER OF ITEMS: \t{}", self.m());
        let _ = writeln!(s, "CAPACITY OF KNAPSACK: \t{}", self.capacity);
        let _ = writeln!(s, "MIN SPEED: \t{}", self.v_min);
        let _ = writeln!(s, "MAX SPEED: \t{}", self.v_max);
        let _ = writeln!(s, "RENTING RATIO: \t{}", self.renting_rate);
        let _ = writeln!(s, "EDGE_WEIGHT_TYPE:\t{}", self.edge_weight_kind.as_str());
        let _ = writeln!(s, "NODE_COORD_SECTION\t(INDEX, X, Y): ");
        for (i, c) in self.coords.iter().enumerate() {
            let _ = writeln!(s, "{}\t{}\t{}", i + 1, c[0], c[1]);
        }
        let _ = writeln!(
            s,
            "ITEMS SECTION\t(INDEX, PROFIT, WEIGHT, ASSIGNED NODE NUMBER): "
        );
        for it in &self.items {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}",
                it.id + 1,
                it.profit,
                it.weight,
                it.city + 1
            );
        }
        s
    }
}

#[derive(Default)]
struct Header {
    name: Option<String>,
    data_type: Option<String>,
    dimension: Option<usize>,
    items: Option<usize>,
    capacity: Option<f64>,
    min_speed: Option<f64>,
    max_speed: Option<f64>,
    renting: Option<f64>,
    edge: Option<EdgeWeightKind>,
}

fn set_once<V>(slot: &mut Option<V>, key: &str, value: V) -> Result<()> {
    if slot.is_some() {
        return Err(Error::MalformedHeader(format!("duplicate key '{key}'")));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_num<V: FromStr>(key: &str, raw: &str) -> Result<V> {
    raw.trim()
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("bad value '{}' for '{key}'", raw.trim())))
}

fn require<V>(slot: Option<V>, key: &str) -> Result<V> {
    slot.ok_or_else(|| Error::MalformedHeader(format!("missing key '{key}'")))
}

#[derive(PartialEq)]
enum Section {
    Header,
    Nodes,
    Items,
}

/// Parses the contents of a `.ttp` file.
pub fn parse_instance<T: Scalar>(text: &str) -> Result<Instance<T>> {
    let mut header = Header::default();
    let mut section = Section::Header;
    let mut node_rows: Vec<(usize, [f64; 2])> = Vec::new();
    let mut item_rows: Vec<(usize, f64, f64, usize)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line == "EOF" {
            continue;
        }
        let upper = line.to_ascii_uppercase();
        if upper.starts_with("NODE_COORD_SECTION") {
            section = Section::Nodes;
            continue;
        }
        if upper.starts_with("ITEMS SECTION") {
            section = Section::Items;
            continue;
        }
        let bad_row = || Error::MalformedRow(format!("line {}: '{}'", lineno + 1, line));
        match section {
            Section::Header => {
                let (key, value) = line.split_once(':').ok_or_else(|| {
                    Error::MalformedHeader(format!("line {}: expected 'KEY: value'", lineno + 1))
                })?;
                let key = key.trim().to_ascii_uppercase();
                let value = value.trim();
                match key.as_str() {
                    "PROBLEM NAME" => set_once(&mut header.name, &key, value.to_string())?,
                    "KNAPSACK DATA TYPE" => {
                        set_once(&mut header.data_type, &key, value.to_string())?
                    }
                    "DIMENSION" => set_once(&mut header.dimension, &key, parse_num(&key, value)?)?,
                    "NUMBER OF ITEMS" => {
                        set_once(&mut header.items, &key, parse_num(&key, value)?)?
                    }
                    "CAPACITY OF KNAPSACK" => {
                        set_once(&mut header.capacity, &key, parse_num(&key, value)?)?
                    }
                    "MIN SPEED" => set_once(&mut header.min_speed, &key, parse_num(&key, value)?)?,
                    "MAX SPEED" => set_once(&mut header.max_speed, &key, parse_num(&key, value)?)?,
                    "RENTING RATIO" => {
                        set_once(&mut header.renting, &key, parse_num(&key, value)?)?
                    }
                    "EDGE_WEIGHT_TYPE" => set_once(&mut header.edge, &key, value.parse()?)?,
                    _ => log::debug!("ignoring unknown header key '{key}'"),
                }
            }
            Section::Nodes => {
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() < 3 {
                    return Err(bad_row());
                }
                let idx: usize = f[0].parse().map_err(|_| bad_row())?;
                let x: f64 = f[1].parse().map_err(|_| bad_row())?;
                let y: f64 = f[2].parse().map_err(|_| bad_row())?;
                node_rows.push((idx, [x, y]));
            }
            Section::Items => {
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() < 4 {
                    return Err(bad_row());
                }
                let idx: usize = f[0].parse().map_err(|_| bad_row())?;
                let profit: f64 = f[1].parse().map_err(|_| bad_row())?;
                let weight: f64 = f[2].parse().map_err(|_| bad_row())?;
                let city: usize = f[3].parse().map_err(|_| bad_row())?;
                item_rows.push((idx, profit, weight, city));
            }
        }
    }

    let name = require(header.name, "PROBLEM NAME")?;
    let data_type = require(header.data_type, "KNAPSACK DATA TYPE")?;
    let n = require(header.dimension, "DIMENSION")?;
    let m = require(header.items, "NUMBER OF ITEMS")?;
    let capacity = require(header.capacity, "CAPACITY OF KNAPSACK")?;
    let v_min = require(header.min_speed, "MIN SPEED")?;
    let v_max = require(header.max_speed, "MAX SPEED")?;
    let renting = require(header.renting, "RENTING RATIO")?;
    let edge = require(header.edge, "EDGE_WEIGHT_TYPE")?;

    if node_rows.len() != n {
        return Err(Error::CountMismatch {
            section: "NODE_COORD_SECTION",
            declared: n,
            found: node_rows.len(),
        });
    }
    if item_rows.len() != m {
        return Err(Error::CountMismatch {
            section: "ITEMS SECTION",
            declared: m,
            found: item_rows.len(),
        });
    }

    let mut coords = vec![None; n];
    for (idx, c) in node_rows {
        if idx == 0 || idx > n || coords[idx - 1].is_some() {
            return Err(Error::MalformedRow(format!("node index {idx}")));
        }
        coords[idx - 1] = Some(c);
    }
    let coords: Vec<[f64; 2]> = coords.into_iter().map(|c| c.unwrap()).collect();

    let mut items = vec![None; m];
    for (idx, profit, weight, city) in item_rows {
        if idx == 0 || idx > m || items[idx - 1].is_some() {
            return Err(Error::MalformedRow(format!("item index {idx}")));
        }
        if city <= 1 || city > n {
            return Err(Error::BadItemCity { item: idx, city, n });
        }
        items[idx - 1] = Some(ItemSpec {
            profit: T::lit(profit),
            weight: T::lit(weight),
            city: city - 1,
        });
    }
    let items: Vec<ItemSpec<T>> = items.into_iter().map(|i| i.unwrap()).collect();

    Ok(Instance::new(
        name,
        coords,
        edge,
        items,
        T::lit(capacity),
        T::lit(renting),
        T::lit(v_min),
        T::lit(v_max),
    )?
    .with_knapsack_data_type(data_type))
}

/// Reads and parses a `.ttp` file.
pub fn load_instance<T: Scalar>(path: impl AsRef<std::path::Path>) -> Result<Instance<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::MalformedHeader(format!("cannot read {}: {e}", path.display())))?;
    parse_instance(&text)
}
