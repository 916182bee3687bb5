//! Candidate neighbour lists restricting which segment reversals are tried.

use std::fmt;
use std::str::FromStr;

use spade::{DelaunayTriangulation, Point2, Triangulation};

use crate::error::Error;
use crate::instance::Instance;
use crate::scalar::Scalar;

pub const DEFAULT_KNN: usize = 8;

/// How candidate lists are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeighborBackend {
    /// Delaunay triangulation adjacency.
    #[default]
    Delaunay,
    /// The `k` geometrically nearest cities.
    Knn(usize),
}

impl fmt::Display for NeighborBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NeighborBackend::Delaunay => write!(f, "delaunay"),
            NeighborBackend::Knn(k) => write!(f, "knn:{k}"),
        }
    }
}

impl FromStr for NeighborBackend {
    type Err = Error;

    /// Accepts `delaunay`, `knn` or `knn:K`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim().to_ascii_lowercase();
        if s == "delaunay" {
            return Ok(NeighborBackend::Delaunay);
        }
        if s == "knn" {
            return Ok(NeighborBackend::Knn(DEFAULT_KNN));
        }
        if let Some(k) = s.strip_prefix("knn:") {
            let k: usize = k
                .parse()
                .map_err(|_| Error::OutOfRange(format!("bad knn size '{k}'")))?;
            if k == 0 {
                return Err(Error::OutOfRange("knn size must be positive".into()));
            }
            return Ok(NeighborBackend::Knn(k));
        }
        Err(Error::OutOfRange(format!("unknown neighbour backend '{s}'")))
    }
}

/// Per-city candidate neighbours, each list sorted by ascending distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateLists {
    lists: Vec<Vec<usize>>,
    backend: NeighborBackend,
}

impl CandidateLists {
    pub fn of(&self, city: usize) -> &[usize] {
        &self.lists[city]
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// Backend that actually produced the lists (after any fallback).
    pub fn backend(&self) -> NeighborBackend {
        self.backend
    }

    /// Number of undirected edges, counting `i -- j` once when listed both ways.
    pub fn edge_count(&self) -> usize {
        let directed: usize = self.lists.iter().map(Vec::len).sum();
        directed / 2
    }
}

fn euclid(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn sort_by_distance(coords: &[[f64; 2]], city: usize, list: &mut [usize]) {
    let c = coords[city];
    list.sort_by(|&a, &b| {
        euclid(c, coords[a])
            .total_cmp(&euclid(c, coords[b]))
            .then(a.cmp(&b))
    });
}

fn knn(coords: &[[f64; 2]], k: usize) -> Vec<Vec<usize>> {
    let n = coords.len();
    (0..n)
        .map(|i| {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            sort_by_distance(coords, i, &mut others);
            others.truncate(k.min(n - 1));
            others
        })
        .collect()
}

/// Delaunay adjacency, or `None` for degenerate input (duplicate points,
/// all points collinear, coordinates the triangulator rejects).
fn delaunay(coords: &[[f64; 2]]) -> Option<Vec<Vec<usize>>> {
    let n = coords.len();
    if n < 3 {
        return None;
    }
    let mut tri: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    let mut city_of = vec![usize::MAX; n];
    for (city, c) in coords.iter().enumerate() {
        let p = spade::mitigate_underflow(Point2::new(c[0], c[1]));
        let handle = tri.insert(p).ok()?;
        let idx = handle.index();
        if idx >= n || city_of[idx] != usize::MAX {
            return None;
        }
        city_of[idx] = city;
    }
    if tri.num_inner_faces() == 0 {
        return None;
    }
    let mut lists = vec![Vec::new(); n];
    for edge in tri.undirected_edges() {
        let [a, b] = edge.vertices();
        let (a, b) = (city_of[a.fix().index()], city_of[b.fix().index()]);
        lists[a].push(b);
        lists[b].push(a);
    }
    if lists.iter().any(Vec::is_empty) {
        return None;
    }
    for (city, list) in lists.iter_mut().enumerate() {
        sort_by_distance(coords, city, list);
    }
    Some(lists)
}

/// Builds candidate lists. Degenerate geometry under the Delaunay backend
/// falls back to `knn(DEFAULT_KNN)` with a logged warning.
pub fn build_candidates<T: Scalar>(inst: &Instance<T>, backend: NeighborBackend) -> CandidateLists {
    let coords = inst.coords();
    match backend {
        NeighborBackend::Knn(k) => CandidateLists {
            lists: knn(coords, k),
            backend,
        },
        NeighborBackend::Delaunay => match delaunay(coords) {
            Some(lists) => CandidateLists { lists, backend },
            None => {
                if coords.len() >= 3 {
                    log::warn!(
                        "degenerate geometry in '{}', using knn:{DEFAULT_KNN} candidates",
                        inst.name()
                    );
                }
                let backend = NeighborBackend::Knn(DEFAULT_KNN);
                CandidateLists {
                    lists: knn(coords, DEFAULT_KNN),
                    backend,
                }
            }
        },
    }
}
