//! Random Euclidean TSP instances on the unit square.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Version tag of the on-disk instance format.
pub const INSTANCE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct City {
    pub x: f64,
    pub y: f64,
}

impl City {
    pub fn distance(&self, other: &City) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A symmetric Euclidean TSP instance. The distance matrix is always derived
/// from the coordinates and is never stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TspInstance {
    seed: u64,
    cities: Vec<City>,
    dist: Vec<f64>,
}

impl TspInstance {
    /// Builds an instance from explicit coordinates. Coordinates must lie in
    /// `[0, 1)` and no two cities may coincide.
    pub fn from_cities(cities: Vec<City>, seed: u64) -> Result<Self> {
        let n = cities.len();
        if n < 3 {
            return Err(Error::InvalidInstance(format!(
                "need at least 3 cities, got {n}"
            )));
        }
        for (i, c) in cities.iter().enumerate() {
            let ok = |v: f64| (0.0..1.0).contains(&v);
            if !ok(c.x) || !ok(c.y) {
                return Err(Error::InvalidInstance(format!(
                    "city {i} at ({}, {}) lies outside [0,1)^2",
                    c.x, c.y
                )));
            }
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = cities[i].distance(&cities[j]);
                if d <= 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "cities {i} and {j} coincide"
                    )));
                }
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(TspInstance { seed, cities, dist })
    }

    pub fn n(&self) -> usize {
        self.cities.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cities(&self) -> &[City] {
        &self.cities
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.cities.len() + j]
    }

    pub fn max_distance(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Cities other than `i`, by ascending distance from `i`; ties go to the
    /// lower index.
    pub fn neighbor_ranks(&self, i: usize) -> Vec<usize> {
        assert!(i < self.n(), "city index {i} out of range");
        let mut others: Vec<usize> = (0..self.n()).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| self.d(i, a).total_cmp(&self.d(i, b)).then(a.cmp(&b)));
        others
    }

    /// Length of the closed tour visiting `order` cyclically.
    pub fn cycle_length(&self, order: &[usize]) -> f64 {
        let m = order.len();
        (0..m).map(|k| self.d(order[k], order[(k + 1) % m])).sum()
    }
}

/// Draws `n` cities i.i.d. uniform on `[0,1)^2` from the stream seeded by
/// `seed`. Each city consumes two draws, `x` then `y`.
pub fn generate_instance(n: usize, seed: u64) -> Result<TspInstance> {
    if n < 3 {
        return Err(Error::InvalidInstance(format!(
            "need at least 3 cities, got {n}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    loop {
        let cities: Vec<City> = (0..n)
            .map(|_| {
                let x: f64 = rng.gen();
                let y: f64 = rng.gen();
                City { x, y }
            })
            .collect();
        match TspInstance::from_cities(cities, seed) {
            Ok(inst) => return Ok(inst),
            // Coincident draws are astronomically unlikely; redraw from the
            // same stream if one ever happens.
            Err(Error::InvalidInstance(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Instances `seed, seed+1, ..., seed+count-1`.
pub fn generate_ensemble(n: usize, count: usize, seed: u64) -> Result<Vec<TspInstance>> {
    (0..count as u64)
        .map(|k| generate_instance(n, seed.wrapping_add(k)))
        .collect()
}

/// A closed tour. `length` is always recomputed from the instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub order: Vec<usize>,
    pub length: f64,
}

impl Tour {
    pub fn new(inst: &TspInstance, order: Vec<usize>) -> Result<Self> {
        let n = inst.n();
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::Precondition(format!(
                "tour has {} cities, instance has {n}",
                order.len()
            )));
        }
        for &c in &order {
            if c >= n || seen[c] {
                return Err(Error::Precondition(format!(
                    "tour is not a permutation (city {c})"
                )));
            }
            seen[c] = true;
        }
        let length = inst.cycle_length(&order);
        Ok(Tour { order, length })
    }

    /// Undirected edge set `(min, max)` sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        cycle_edges(&self.order)
    }

    /// Same cycle regardless of starting city and direction.
    pub fn same_cycle(&self, other: &Tour) -> bool {
        self.edges() == other.edges()
    }

    /// Rotates to start at city 0 and orients so the second city is the
    /// smaller of city 0's two neighbours.
    pub fn canonical(&self) -> Tour {
        Tour {
            order: canonical_cycle(&self.order),
            length: self.length,
        }
    }
}

pub(crate) fn cycle_edges(order: &[usize]) -> Vec<(usize, usize)> {
    let m = order.len();
    let mut e: Vec<(usize, usize)> = (0..m)
        .map(|k| {
            let (a, b) = (order[k], order[(k + 1) % m]);
            (a.min(b), a.max(b))
        })
        .collect();
    e.sort_unstable();
    e
}

pub(crate) fn canonical_cycle(order: &[usize]) -> Vec<usize> {
    let m = order.len();
    if m == 0 {
        return Vec::new();
    }
    let start = (0..m).min_by_key(|&k| order[k]).unwrap();
    let fwd: Vec<usize> = (0..m).map(|k| order[(start + k) % m]).collect();
    let bwd: Vec<usize> = (0..m).map(|k| order[(start + m - k) % m]).collect();
    if m > 2 && bwd[1] < fwd[1] {
        bwd
    } else {
        fwd
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    seed: u64,
    cities: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    command: Option<String>,
}

/// Serializes an instance as a JSON document with fields `n`, `seed`,
/// `cities` and an optional `command` naming the producing command line.
pub fn instance_to_json(inst: &TspInstance, command: Option<&str>) -> String {
    let file = InstanceFile {
        n: inst.n(),
        seed: inst.seed(),
        cities: inst.cities().iter().map(|c| [c.x, c.y]).collect(),
        command: command.map(str::to_owned),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("instance serializes");
    s.push('\n');
    s
}

pub fn instance_from_json(text: &str, context: &str) -> Result<TspInstance> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::parse(context, e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::parse(context, "top level must be an object"))?;
    for field in ["n", "seed", "cities"] {
        if !obj.contains_key(field) {
            return Err(Error::parse(context, format!("missing field `{field}`")));
        }
    }
    let file: InstanceFile =
        serde_json::from_value(value).map_err(|e| Error::parse(context, e.to_string()))?;
    if file.cities.len() != file.n {
        return Err(Error::parse(
            context,
            format!(
                "field `n` is {} but `cities` has {} entries",
                file.n,
                file.cities.len()
            ),
        ));
    }
    let cities = file.cities.iter().map(|&[x, y]| City { x, y }).collect();
    TspInstance::from_cities(cities, file.seed)
}

pub fn save_instance(inst: &TspInstance, path: &Path) -> Result<()> {
    save_instance_with_command(inst, path, None)
}

pub fn save_instance_with_command(
    inst: &TspInstance,
    path: &Path,
    command: Option<&str>,
) -> Result<()> {
    fs::write(path, instance_to_json(inst, command)).map_err(|e| Error::io(path, e))
}

pub fn load_instance(path: &Path) -> Result<TspInstance> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    instance_from_json(&text, &path.display().to_string())
}
