//! Exact ground-truth solvers.

mod cycle_cover;
mod exhaustive;
mod held_karp;

use serde::{Deserialize, Serialize};

use crate::instances::{canonical_cycle, cycle_edges, Tour, TspInstance};

pub(crate) use cycle_cover::CycleTables;
pub use cycle_cover::{min_cycle_cover, MAX_COVER_CITIES};
pub use exhaustive::{exhaustive_ground_state, MAX_EXHAUSTIVE_VARS};
pub use held_karp::{optimal_tour, MAX_TOUR_CITIES};

/// Disjoint cycles covering every city, each in canonical orientation and
/// sorted by smallest member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleCover {
    pub cycles: Vec<Vec<usize>>,
    pub total_weight: f64,
}

impl CycleCover {
    pub fn new(inst: &TspInstance, cycles: Vec<Vec<usize>>) -> Self {
        let mut cycles: Vec<Vec<usize>> = cycles.iter().map(|c| canonical_cycle(c)).collect();
        cycles.sort();
        let total_weight = cycles.iter().map(|c| inst.cycle_length(c)).sum();
        CycleCover { cycles, total_weight }
    }

    pub fn is_single_tour(&self) -> bool {
        self.cycles.len() == 1
    }

    pub fn into_tour(self, inst: &TspInstance) -> Option<Tour> {
        if self.cycles.len() == 1 {
            Tour::new(inst, self.cycles.into_iter().next().unwrap()).ok()
        } else {
            None
        }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self.cycles.iter().flat_map(|c| cycle_edges(c)).collect();
        e.sort_unstable();
        e
    }

    pub fn cycle_sizes(&self) -> Vec<usize> {
        self.cycles.iter().map(Vec::len).collect()
    }
}

/// How many edges of the optimal tour cross the cut around one subtour.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionStat {
    pub subset: Vec<usize>,
    pub required_connections: usize,
}

/// Number of tour edges with exactly one endpoint in `subset`.
pub fn cut_count(tour: &Tour, subset: &[usize]) -> usize {
    let n = tour.order.len();
    let mut inside = vec![false; n];
    for &c in subset {
        inside[c] = true;
    }
    (0..n)
        .filter(|&k| inside[tour.order[k]] != inside[tour.order[(k + 1) % n]])
        .count()
}

/// For each cycle of a multi-cycle cover, the number of optimal-tour edges
/// leaving its city set. A single-cycle cover yields nothing.
pub fn connection_stats_against(optimal: &Tour, cover: &CycleCover) -> Vec<ConnectionStat> {
    if cover.cycles.len() < 2 {
        return Vec::new();
    }
    cover
        .cycles
        .iter()
        .map(|c| {
            let mut subset = c.clone();
            subset.sort_unstable();
            let required_connections = cut_count(optimal, &subset);
            ConnectionStat {
                subset,
                required_connections,
            }
        })
        .collect()
}

/// [`connection_stats_against`] with the optimal tour computed here.
pub fn connection_stats(inst: &TspInstance, cover: &CycleCover) -> crate::error::Result<Vec<ConnectionStat>> {
    if cover.cycles.len() < 2 {
        return Ok(Vec::new());
    }
    let tour = optimal_tour(inst)?;
    Ok(connection_stats_against(&tour, cover))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{decode, encode_edge, Decoded, PenaltyWeights};
    use crate::instances::{generate_instance, City};

    #[test]
    fn single_cycle_has_no_stats() {
        let inst = generate_instance(5, 0).unwrap();
        let cover = min_cycle_cover(&inst).unwrap();
        assert!(connection_stats(&inst, &cover).unwrap().is_empty());
    }

    #[test]
    fn alternating_membership_needs_six_connections() {
        // The optimal tour runs around a hexagon 0..5; the cover groups
        // alternate corners, so every tour edge crosses the cut.
        let cities: Vec<City> = (0..6)
            .map(|k| {
                let a = k as f64 * std::f64::consts::TAU / 6.0;
                City { x: 0.5 + 0.4 * a.cos(), y: 0.5 + 0.4 * a.sin() }
            })
            .collect();
        let inst = TspInstance::from_cities(cities, 0).unwrap();
        let tour = optimal_tour(&inst).unwrap();
        assert_eq!(tour.order, vec![0, 1, 2, 3, 4, 5]);
        let cover = CycleCover::new(&inst, vec![vec![0, 2, 4], vec![1, 3, 5]]);
        let stats = connection_stats(&inst, &cover).unwrap();
        assert_eq!(stats.len(), 2);
        // Direct count of tour edges (k, k+1) joining an even and an odd corner.
        let direct = (0..6).filter(|k| k % 2 != (k + 1) % 6 % 2).count();
        assert!(stats.iter().all(|s| s.required_connections == direct));
        assert_eq!(direct, 6);
    }

    #[test]
    fn connection_counts_are_even_and_positive() {
        for seed in 0..30 {
            let inst = generate_instance(10, seed).unwrap();
            let cover = min_cycle_cover(&inst).unwrap();
            for s in connection_stats(&inst, &cover).unwrap() {
                assert!(s.required_connections >= 2 && s.required_connections % 2 == 0);
            }
        }
    }

    #[test]
    fn edge_ground_state_is_min_cycle_cover() {
        for seed in 0..5 {
            let inst = generate_instance(6, seed).unwrap();
            let m = encode_edge(&inst, &PenaltyWeights::defaults_for(&inst), None).unwrap();
            let (cfg, e) = exhaustive_ground_state(&m).unwrap();
            let cover = min_cycle_cover(&inst).unwrap();
            assert!((e - cover.total_weight).abs() < 1e-9);
            match decode(&inst, &m, &cfg).unwrap() {
                Decoded::Cover(c) => assert_eq!(c.edges(), cover.edges()),
                other => panic!("{other:?}"),
            }
        }
    }
}
