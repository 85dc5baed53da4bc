use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::instances::{Tour, TspInstance};
use crate::rng::rng_from_seed;

pub const DEFAULT_RESTARTS: usize = 20;

/// Steepest-descent 2-opt from `order`: repeatedly applies the reversal with
/// the largest length decrease until none improves.
pub fn two_opt_descent(inst: &TspInstance, mut order: Vec<usize>) -> Vec<usize> {
    let n = order.len();
    loop {
        let mut best = (-1e-12, 0, 0);
        for i in 0..n - 1 {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                // Replace edges (i, i+1) and (j, j+1) by (i, j) and (i+1, j+1).
                let (a, b) = (order[i], order[i + 1]);
                let (c, d) = (order[j], order[(j + 1) % n]);
                let gain = inst.d(a, c) + inst.d(b, d) - inst.d(a, b) - inst.d(c, d);
                if gain < best.0 {
                    best = (gain, i, j);
                }
            }
        }
        if best.1 == 0 && best.2 == 0 {
            return order;
        }
        order[best.1 + 1..=best.2].reverse();
    }
}

/// Best of `restarts` steepest-descent 2-opt runs from random tours.
pub fn two_opt_baseline(inst: &TspInstance, restarts: usize, seed: u64) -> Result<Tour> {
    if inst.n() < 4 {
        return Err(Error::Precondition("2-opt needs at least 4 cities".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut best: Option<Tour> = None;
    for _ in 0..restarts.max(1) {
        let mut order: Vec<usize> = (0..inst.n()).collect();
        order.shuffle(&mut rng);
        let tour = Tour::new(inst, two_opt_descent(inst, order))?;
        if best.as_ref().is_none_or(|b| tour.length < b.length) {
            best = Some(tour);
        }
    }
    Ok(best.expect("at least one restart").canonical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{generate_instance, City};
    use crate::oracles::optimal_tour;

    #[test]
    fn uncrosses_a_square() {
        let pts = [(0.2, 0.2), (0.8, 0.2), (0.8, 0.8), (0.2, 0.8)];
        let inst = TspInstance::from_cities(pts.iter().map(|&(x, y)| City { x, y }).collect(), 0).unwrap();
        let crossed = vec![0, 2, 1, 3];
        let fixed = two_opt_descent(&inst, crossed.clone());
        assert!((inst.cycle_length(&fixed) - 2.4).abs() < 1e-12);
        assert!(inst.cycle_length(&crossed) > 2.4);
    }

    #[test]
    fn never_beats_the_optimum() {
        for seed in 0..10 {
            let inst = generate_instance(8, seed).unwrap();
            let t = two_opt_baseline(&inst, 3, seed).unwrap();
            assert!(t.length >= optimal_tour(&inst).unwrap().length - 1e-12);
        }
    }

    #[test]
    fn small_instances_rejected() {
        let inst = generate_instance(3, 0).unwrap();
        assert!(two_opt_baseline(&inst, 1, 0).is_err());
    }
}
