use serde::{Deserialize, Serialize};

use super::model::{QuadraticModel, VariableMap};
use crate::error::{Error, Result};
use crate::instances::{Tour, TspInstance};
use crate::oracles::CycleCover;

/// A constraint broken by a configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// City `city` occupies `count` timesteps instead of one.
    Row { city: usize, count: usize },
    /// Timestep `step` holds `count` cities instead of one.
    Column { step: usize, count: usize },
    /// City `city` has `degree` selected edges instead of two.
    Degree { city: usize, degree: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl std::fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| match v {
                Violation::Row { city, count } => format!("city {city} visited {count} times"),
                Violation::Column { step, count } => format!("step {step} holds {count} cities"),
                Violation::Degree { city, degree } => format!("city {city} has degree {degree}"),
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decoded {
    Tour(Tour),
    Cover(CycleCover),
    Violation(ViolationReport),
}

impl Decoded {
    pub fn tag(&self) -> String {
        match self {
            Decoded::Tour(_) => "tour".into(),
            Decoded::Cover(c) if c.cycles.len() == 1 => "tour".into(),
            Decoded::Cover(c) => format!("cover{}", c.cycles.len()),
            Decoded::Violation(_) => "violation".into(),
        }
    }
}

/// Splits a degree-2 edge set into its cycles, or names every city whose
/// degree differs from two.
pub fn cycles_from_edges(n: usize, edges: &[(usize, usize)]) -> std::result::Result<Vec<Vec<usize>>, ViolationReport> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j) in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let violations: Vec<Violation> = adj
        .iter()
        .enumerate()
        .filter(|(_, a)| a.len() != 2)
        .map(|(city, a)| Violation::Degree { city, degree: a.len() })
        .collect();
    if !violations.is_empty() {
        return Err(ViolationReport { violations });
    }
    let mut seen = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let (mut prev, mut cur) = (start, adj[start][0]);
        while cur != start {
            seen[cur] = true;
            cycle.push(cur);
            let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
            prev = cur;
            cur = next;
        }
        cycles.push(cycle);
    }
    Ok(cycles)
}

/// Interprets a configuration of a TSP-mapped model.
///
/// Permutation models yield a [`Tour`], edge models a [`CycleCover`] (a single
/// cycle is a tour). Broken constraints produce a [`ViolationReport`].
pub fn decode(inst: &TspInstance, model: &QuadraticModel, config: &[bool]) -> Result<Decoded> {
    if config.len() != model.num_vars() {
        return Err(Error::Precondition(format!(
            "configuration has {} bits, model has {} variables",
            config.len(),
            model.num_vars()
        )));
    }
    match model.varmap() {
        VariableMap::Generic => Err(Error::Unsupported("model carries no TSP variable map".into())),
        VariableMap::Permutation(grid) => {
            let n = grid.n;
            let occ = grid.occupancy(config);
            let mut violations = Vec::new();
            for (city, row) in occ.iter().enumerate() {
                let count = row.iter().filter(|&&b| b).count();
                if count != 1 {
                    violations.push(Violation::Row { city, count });
                }
            }
            for step in 0..n {
                let count = (0..n).filter(|&i| occ[i][step]).count();
                if count != 1 {
                    violations.push(Violation::Column { step, count });
                }
            }
            if !violations.is_empty() {
                return Ok(Decoded::Violation(ViolationReport { violations }));
            }
            let order: Vec<usize> = (0..n)
                .map(|k| (0..n).find(|&i| occ[i][k]).expect("column has one city"))
                .collect();
            Ok(Decoded::Tour(Tour::new(inst, order)?))
        }
        VariableMap::Edge(set) => match cycles_from_edges(set.n, &set.selected_edges(config)) {
            Ok(cycles) => Ok(Decoded::Cover(CycleCover::new(inst, cycles))),
            Err(report) => Ok(Decoded::Violation(report)),
        },
    }
}
