//! Minimum-weight covers of the cities by disjoint cycles of length >= 3.

use crate::error::{Error, Result};
use crate::instances::{canonical_cycle, TspInstance};

use super::CycleCover;

pub const MAX_COVER_CITIES: usize = 14;

/// Subset tables over a symmetric weight matrix (`INFINITY` marks a missing
/// edge):
///
/// * `path[X][j]`: shortest path from `min(X)` through all of `X` ending at `j`;
/// * `cycle[X]`: shortest Hamiltonian cycle on `X` (`|X| >= 3`);
/// * `cover[S]`: cheapest partition of `S` into such cycles.
pub(crate) struct CycleTables {
    pub n: usize,
    pub w: Vec<f64>,
    pub path: Vec<f64>,
    pub cycle: Vec<f64>,
    pub cover: Vec<f64>,
}

impl CycleTables {
    pub fn new(n: usize, w: Vec<f64>) -> Self {
        let size = 1usize << n;
        let mut path = vec![f64::INFINITY; size * n];
        for a in 0..n {
            path[(1 << a) * n + a] = 0.0;
        }
        for x in 1..size {
            let a = x.trailing_zeros() as usize;
            if x == 1 << a {
                continue;
            }
            let mut ends = x & !(1 << a);
            while ends != 0 {
                let j = ends.trailing_zeros() as usize;
                ends &= ends - 1;
                let prev_set = x & !(1 << j);
                let mut best = f64::INFINITY;
                let mut prevs = prev_set;
                while prevs != 0 {
                    let i = prevs.trailing_zeros() as usize;
                    prevs &= prevs - 1;
                    // The path may only sit at its anchor when nothing else is visited.
                    if i == a && prev_set != 1 << a {
                        continue;
                    }
                    let c = path[prev_set * n + i] + w[i * n + j];
                    if c < best {
                        best = c;
                    }
                }
                path[x * n + j] = best;
            }
        }

        let mut cycle = vec![f64::INFINITY; size];
        for x in 1..size {
            if x.count_ones() < 3 {
                continue;
            }
            let a = x.trailing_zeros() as usize;
            let mut best = f64::INFINITY;
            let mut ends = x & !(1 << a);
            while ends != 0 {
                let j = ends.trailing_zeros() as usize;
                ends &= ends - 1;
                let c = path[x * n + j] + w[j * n + a];
                if c < best {
                    best = c;
                }
            }
            cycle[x] = best;
        }

        let mut cover = vec![f64::INFINITY; size];
        cover[0] = 0.0;
        for s in 1..size {
            let a = s.trailing_zeros() as usize;
            let rest = s & !(1 << a);
            let mut best = f64::INFINITY;
            let mut sub = rest;
            loop {
                let part = sub | 1 << a;
                let c = cycle[part] + cover[s & !part];
                if c < best {
                    best = c;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            cover[s] = best;
        }

        CycleTables { n, w, path, cycle, cover }
    }

    pub fn from_instance(inst: &TspInstance) -> Self {
        let n = inst.n();
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                w[i * n + j] = inst.d(i, j);
            }
        }
        CycleTables::new(n, w)
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    #[inline]
    pub fn path(&self, x: usize, j: usize) -> f64 {
        self.path[x * self.n + j]
    }

    /// An optimal cycle on `x`, starting at `min(x)`.
    pub fn cycle_order(&self, x: usize) -> Vec<usize> {
        let n = self.n;
        let a = x.trailing_zeros() as usize;
        let target = self.cycle[x];
        let mut j = (0..n)
            .filter(|&j| j != a && x >> j & 1 == 1)
            .find(|&j| self.path(x, j) + self.weight(j, a) == target)
            .expect("cycle end attains the minimum");
        let mut set = x;
        let mut rev = Vec::with_capacity(x.count_ones() as usize);
        while j != a {
            rev.push(j);
            let prev_set = set & !(1 << j);
            let target = self.path(set, j);
            let i = (0..n)
                .filter(|&i| prev_set >> i & 1 == 1)
                .filter(|&i| i != a || prev_set == 1 << a)
                .find(|&i| self.path(prev_set, i) + self.weight(i, j) == target)
                .expect("predecessor attains the minimum");
            set = prev_set;
            j = i;
        }
        rev.push(a);
        rev.reverse();
        rev
    }

    /// An optimal partition of `s` into cycles (`None` if no cover exists).
    pub fn cover_cycles(&self, s: usize) -> Option<Vec<Vec<usize>>> {
        if !self.cover[s].is_finite() {
            return None;
        }
        let mut cycles = Vec::new();
        let mut s = s;
        while s != 0 {
            let a = s.trailing_zeros() as usize;
            let rest = s & !(1 << a);
            let target = self.cover[s];
            let mut sub = rest;
            let part = loop {
                let part = sub | 1 << a;
                if self.cycle[part] + self.cover[s & !part] == target {
                    break part;
                }
                assert!(sub != 0, "cover table inconsistent");
                sub = (sub - 1) & rest;
            };
            cycles.push(canonical_cycle(&self.cycle_order(part)));
            s &= !part;
        }
        Some(cycles)
    }
}

/// Exact minimum-weight cycle cover (every cycle has at least three cities).
///
/// `cover(S) = min over S' containing min(S) of cycle(S') + cover(S \ S')`,
/// where `cycle` comes from a path DP anchored at the smallest city of each
/// subset. Ties resolve to the first partition met when enumerating the
/// submasks of `S` from the largest down.
pub fn min_cycle_cover(inst: &TspInstance) -> Result<CycleCover> {
    let n = inst.n();
    if n > MAX_COVER_CITIES {
        return Err(Error::Capacity {
            what: "min_cycle_cover",
            limit: MAX_COVER_CITIES,
            got: n,
        });
    }
    let tables = CycleTables::from_instance(inst);
    let cycles = tables
        .cover_cycles((1 << n) - 1)
        .expect("complete graph with n >= 3 has a cycle cover");
    Ok(CycleCover::new(inst, cycles))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{generate_instance, City};
    use crate::oracles::optimal_tour;

    /// Every labelled 2-regular graph on `n` vertices, as edge lists.
    pub(crate) fn all_two_factors(n: usize) -> Vec<Vec<(usize, usize)>> {
        fn extend(n: usize, deg: &mut [usize], edges: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
            // Pick the lowest vertex still short of degree two and try each partner.
            let Some(v) = (0..n).find(|&v| deg[v] < 2) else {
                out.push(edges.clone());
                return;
            };
            for u in (v + 1)..n {
                if deg[u] < 2 && !edges.contains(&(v, u)) {
                    deg[v] += 1;
                    deg[u] += 1;
                    edges.push((v, u));
                    extend(n, deg, edges, out);
                    edges.pop();
                    deg[v] -= 1;
                    deg[u] -= 1;
                }
            }
        }
        let mut out = Vec::new();
        extend(n, &mut vec![0; n], &mut Vec::new(), &mut out);
        // Each graph is generated once per ordering of the two partners of a
        // vertex; keep distinct edge sets only.
        for e in out.iter_mut() {
            e.sort_unstable();
        }
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn two_factor_counts() {
        let counts: Vec<usize> = (3..=7).map(|n| all_two_factors(n).len()).collect();
        assert_eq!(counts, vec![1, 3, 12, 70, 465]);
    }

    #[test]
    fn five_cities_form_one_cycle() {
        for seed in 0..10 {
            let inst = generate_instance(5, seed).unwrap();
            let cover = min_cycle_cover(&inst).unwrap();
            assert_eq!(cover.cycles.len(), 1);
            assert!((cover.total_weight - optimal_tour(&inst).unwrap().length).abs() < 1e-12);
        }
    }

    #[test]
    fn two_tight_triangles_split() {
        let pts = [(0.1, 0.1), (0.15, 0.1), (0.1, 0.15), (0.9, 0.9), (0.85, 0.9), (0.9, 0.85)];
        let inst = TspInstance::from_cities(pts.iter().map(|&(x, y)| City { x, y }).collect(), 0).unwrap();
        let cover = min_cycle_cover(&inst).unwrap();
        assert_eq!(cover.cycles, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert!(cover.total_weight < optimal_tour(&inst).unwrap().length);
    }

    #[test]
    fn matches_enumeration_of_two_factors() {
        for n in 3..=7 {
            let factors = all_two_factors(n);
            for seed in 0..8 {
                let inst = generate_instance(n, 100 + seed).unwrap();
                let brute = factors
                    .iter()
                    .map(|f| f.iter().map(|&(i, j)| inst.d(i, j)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min);
                let cover = min_cycle_cover(&inst).unwrap();
                assert!((cover.total_weight - brute).abs() < 1e-12, "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn relaxation_and_relabeling() {
        for seed in 0..20 {
            let inst = generate_instance(9, seed).unwrap();
            let cover = min_cycle_cover(&inst).unwrap();
            assert!(cover.total_weight <= optimal_tour(&inst).unwrap().length + 1e-12);

            let mut cities = inst.cities().to_vec();
            cities.reverse();
            let relabeled = TspInstance::from_cities(cities, 0).unwrap();
            let other = min_cycle_cover(&relabeled).unwrap();
            assert!((cover.total_weight - other.total_weight).abs() < 1e-12);
        }
    }

    #[test]
    fn capacity_enforced() {
        let inst = generate_instance(15, 0).unwrap();
        assert!(matches!(min_cycle_cover(&inst), Err(Error::Capacity { .. })));
    }
}
