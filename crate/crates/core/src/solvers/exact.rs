//! Exact ground states of edge-mapped models with subtour penalties.
//!
//! The search runs over degree-feasible configurations only, that is over
//! cycle covers of the retained edge graph. Every other configuration pays
//! at least `2 eta` in degree penalty (the degree deviations sum to an even
//! number), and edge weights and cut penalties are nonnegative, so whenever
//! the best cover costs at most `2 eta` it is the global ground state. The
//! outcome reports that certificate.

use super::SolveResult;
use crate::encoding::{EdgeSet, QuadraticModel};
use crate::error::{Error, Result};
use crate::instances::TspInstance;
use crate::oracles::{CycleTables, MAX_COVER_CITIES};

#[derive(Debug, Clone, PartialEq)]
pub struct ExactOutcome {
    pub result: SolveResult,
    /// The best cover provably minimizes the whole model, not just the
    /// degree-feasible sector.
    pub certified: bool,
    /// Complete covers evaluated during the search.
    pub covers_evaluated: u64,
}

struct Cut {
    mask: usize,
    target: i64,
    weight: f64,
}

/// Smallest `(target - c)^2` over even `c >= partial`.
fn min_cut_penalty(target: i64, partial: i64) -> i64 {
    if partial >= target {
        (partial - target).pow(2)
    } else if target % 2 == 0 {
        0
    } else {
        1
    }
}

struct Search<'a> {
    tables: CycleTables,
    cuts: Vec<Cut>,
    model: &'a QuadraticModel,
    set: &'a EdgeSet,
    best_energy: f64,
    best_cycles: Option<Vec<Vec<usize>>>,
    chosen: Vec<Vec<usize>>,
    partial: Vec<i64>,
    evaluated: u64,
}

impl Search<'_> {
    fn penalty_bound(&self, uncovered: usize) -> f64 {
        self.cuts
            .iter()
            .zip(&self.partial)
            .map(|(c, &p)| {
                let frozen = uncovered & c.mask == 0 || uncovered & !c.mask == 0;
                let k = if frozen { (c.target - p).pow(2) } else { min_cut_penalty(c.target, p) };
                c.weight * k as f64
            })
            .sum()
    }

    fn config_of(&self, cycles: &[Vec<usize>]) -> Vec<bool> {
        let mut cfg = vec![false; self.model.num_vars()];
        for c in cycles {
            for k in 0..c.len() {
                let (i, j) = (c[k], c[(k + 1) % c.len()]);
                cfg[self.set.edge_var(i, j).expect("cover uses retained edges")] = true;
            }
        }
        cfg
    }

    fn evaluate_leaf(&mut self) {
        self.evaluated += 1;
        let cfg = self.config_of(&self.chosen);
        let e = self.model.energy(&cfg);
        if e < self.best_energy {
            self.best_energy = e;
            self.best_cycles = Some(self.chosen.clone());
        }
    }

    fn cover(&mut self, uncovered: usize, weight: f64) {
        if uncovered == 0 {
            self.evaluate_leaf();
            return;
        }
        let pen = self.penalty_bound(uncovered);
        let a = uncovered.trailing_zeros() as usize;
        let rest_bits = uncovered & !(1 << a);
        let mut candidates: Vec<(f64, usize)> = Vec::new();
        let mut sub = rest_bits;
        loop {
            let part = sub | 1 << a;
            if part.count_ones() >= 3 {
                let lb = self.tables.cycle[part] + self.tables.cover[uncovered & !part];
                if lb.is_finite() {
                    candidates.push((lb, part));
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest_bits;
        }
        candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for (lb, part) in candidates {
            if weight + lb + pen >= self.best_energy {
                break;
            }
            let rest = uncovered & !part;
            let mut path = vec![a];
            self.cycles_on(part, rest, weight, pen, 1 << a, a, 0.0, &mut path);
        }
    }

    /// Extends `path` (from `min(part)`, visiting `visited`, ending at `cur`)
    /// into every Hamiltonian cycle on `part` that can still beat the
    /// incumbent, recursing into the remaining cities for each.
    #[allow(clippy::too_many_arguments)]
    fn cycles_on(
        &mut self,
        part: usize,
        rest: usize,
        weight: f64,
        pen: f64,
        visited: usize,
        cur: usize,
        path_weight: f64,
        path: &mut Vec<usize>,
    ) {
        let a = path[0];
        let mut next = part & !visited;
        while next != 0 {
            let k = next.trailing_zeros() as usize;
            next &= next - 1;
            let w = self.tables.weight(cur, k);
            if !w.is_finite() {
                continue;
            }
            let nw = path_weight + w;
            let remaining = part & !visited & !(1 << k);
            let budget = self.best_energy - weight - self.tables.cover[rest] - pen;
            if remaining == 0 {
                // Each cycle is met in both directions; keep the one whose
                // second city is smaller than its last.
                if path[1] > k {
                    continue;
                }
                let cw = nw + self.tables.weight(k, a);
                if cw >= budget {
                    continue;
                }
                path.push(k);
                let cycle = path.clone();
                path.pop();
                self.descend(cycle, rest, weight + cw);
            } else {
                let completion = self.tables.path(remaining | 1 << a | 1 << k, k);
                if nw + completion >= budget {
                    continue;
                }
                path.push(k);
                self.cycles_on(part, rest, weight, pen, visited | 1 << k, k, nw, path);
                path.pop();
            }
        }
    }

    fn descend(&mut self, cycle: Vec<usize>, rest: usize, weight: f64) {
        let saved = self.partial.clone();
        let m = cycle.len();
        for (c, p) in self.cuts.iter().zip(self.partial.iter_mut()) {
            let crossings = (0..m)
                .filter(|&k| (c.mask >> cycle[k] & 1) != (c.mask >> cycle[(k + 1) % m] & 1))
                .count();
            *p += crossings as i64;
        }
        self.chosen.push(cycle);
        self.cover(rest, weight);
        self.chosen.pop();
        self.partial = saved;
    }
}

/// Exact minimum of an edge-mapped model (with any registered Eq.-style cut
/// penalties) over cycle covers of its retained edges, found by branch and
/// bound with subset-DP lower bounds.
pub fn exact_edge_ground_state(inst: &TspInstance, model: &QuadraticModel) -> Result<ExactOutcome> {
    let set = model
        .edge_set()
        .ok_or_else(|| Error::Unsupported("exact edge solver needs an edge-mapped model".into()))?;
    if !set.slack_blocks.is_empty() {
        return Err(Error::Unsupported("exact edge solver does not handle slack variables".into()));
    }
    let n = set.n;
    if n != inst.n() {
        return Err(Error::Precondition("model and instance disagree on n".into()));
    }
    if n > MAX_COVER_CITIES {
        return Err(Error::Capacity {
            what: "exact_edge_ground_state",
            limit: MAX_COVER_CITIES,
            got: n,
        });
    }
    let mut w = vec![f64::INFINITY; n * n];
    for &(i, j) in &set.edges {
        w[i * n + j] = inst.d(i, j);
        w[j * n + i] = inst.d(i, j);
    }
    let tables = CycleTables::new(n, w);
    let full = (1usize << n) - 1;
    let cuts: Vec<Cut> = set
        .constraints
        .iter()
        .map(|c| Cut {
            mask: c.subset.iter().fold(0, |m, &i| m | 1 << i),
            target: i64::from(c.target),
            weight: c.weight,
        })
        .collect();
    let mut search = Search {
        partial: vec![0; cuts.len()],
        tables,
        cuts,
        model,
        set,
        best_energy: f64::INFINITY,
        best_cycles: None,
        chosen: Vec::new(),
        evaluated: 0,
    };
    // Seed the incumbent with the unpenalized optimum.
    if let Some(seed_cycles) = search.tables.cover_cycles(full) {
        let cfg = search.config_of(&seed_cycles);
        search.best_energy = model.energy(&cfg);
        search.best_cycles = Some(seed_cycles);
    }
    search.cover(full, 0.0);

    let cycles = search
        .best_cycles
        .take()
        .ok_or_else(|| Error::Precondition("retained edges admit no cycle cover".into()))?;
    let best_config = search.config_of(&cycles);
    let best_energy = model.energy(&best_config);
    Ok(ExactOutcome {
        certified: best_energy <= 2.0 * set.degree_weight,
        covers_evaluated: search.evaluated,
        result: SolveResult {
            best_config,
            best_energy,
            energy_trace: None,
            seed: 0,
            sweeps_used: 0,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{decode, encode_edge, Decoded, PenaltyWeights};
    use crate::instances::generate_instance;
    use crate::oracles::{exhaustive_ground_state, min_cycle_cover};

    #[test]
    fn penalty_floor() {
        assert_eq!(min_cut_penalty(2, 0), 0);
        assert_eq!(min_cut_penalty(2, 4), 4);
        assert_eq!(min_cut_penalty(3, 0), 1);
        assert_eq!(min_cut_penalty(3, 2), 1);
        assert_eq!(min_cut_penalty(3, 6), 9);
    }

    #[test]
    fn unconstrained_matches_min_cycle_cover() {
        for seed in 0..10 {
            let inst = generate_instance(10, seed).unwrap();
            let m = encode_edge(&inst, &PenaltyWeights::defaults_for(&inst), None).unwrap();
            let out = exact_edge_ground_state(&inst, &m).unwrap();
            let cover = min_cycle_cover(&inst).unwrap();
            assert!((out.result.best_energy - cover.total_weight).abs() < 1e-9);
            assert!(out.certified);
        }
    }

    #[test]
    fn agrees_with_exhaustive_search_under_penalties() {
        // n = 7 has 21 edge variables: small enough to enumerate every configuration.
        for seed in 0..12 {
            let inst = generate_instance(7, 50 + seed).unwrap();
            let mut w = PenaltyWeights::defaults_for(&inst);
            w.eta *= 4.0;
            let mut m = encode_edge(&inst, &w, None).unwrap();
            let target = if seed % 2 == 0 { 2 } else { 3 };
            m.add_subtour_penalty(&[0, 1, 2], target, 0.3).unwrap();
            m.add_subtour_penalty(&[1, 4, 5, 6], 2, 0.2).unwrap();
            let out = exact_edge_ground_state(&inst, &m).unwrap();
            let (cfg, e) = exhaustive_ground_state(&m).unwrap();
            assert!(out.certified);
            assert!((out.result.best_energy - e).abs() < 1e-9, "seed {seed}");
            assert!(matches!(decode(&inst, &m, &cfg).unwrap(), Decoded::Cover(_)));
        }
    }

    #[test]
    fn truncated_graphs_are_respected() {
        let inst = generate_instance(9, 4).unwrap();
        let m = encode_edge(&inst, &PenaltyWeights::defaults_for(&inst), Some(4)).unwrap();
        let out = exact_edge_ground_state(&inst, &m).unwrap();
        let set = m.edge_set().unwrap();
        assert_eq!(out.result.best_config.len(), set.num_edge_vars());
        match decode(&inst, &m, &out.result.best_config).unwrap() {
            Decoded::Cover(c) => assert!((c.total_weight - out.result.best_energy).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }
}
