use crate::error::{Error, Result};
use crate::instances::{canonical_cycle, Tour, TspInstance};

pub const MAX_TOUR_CITIES: usize = 20;

/// Exact shortest tour by subset dynamic programming.
///
/// `cost[S][j]` is the shortest path that starts at `j`, visits every city of
/// `S` (a subset of `1..n` not containing `j`) and ends at city 0. The tour is
/// rebuilt forward from city 0, always taking the smallest next city that
/// attains the optimum, then oriented so the second city is the smaller of
/// city 0's neighbours.
pub fn optimal_tour(inst: &TspInstance) -> Result<Tour> {
    let n = inst.n();
    if n > MAX_TOUR_CITIES {
        return Err(Error::Capacity {
            what: "optimal_tour",
            limit: MAX_TOUR_CITIES,
            got: n,
        });
    }
    let m = n - 1; // cities 1..n map to bits 0..m
    let full = (1usize << m) - 1;
    let mut cost = vec![f64::INFINITY; (1usize << m) * n];
    let at = |s: usize, j: usize| s * n + j;

    for j in 1..n {
        cost[at(0, j)] = inst.d(j, 0);
    }
    for s in 1..=full {
        for j in 1..n {
            if s >> (j - 1) & 1 == 1 {
                continue;
            }
            let mut best = f64::INFINITY;
            let mut rest = s;
            while rest != 0 {
                let k = rest.trailing_zeros() as usize + 1;
                rest &= rest - 1;
                let c = inst.d(j, k) + cost[at(s & !(1 << (k - 1)), k)];
                if c < best {
                    best = c;
                }
            }
            cost[at(s, j)] = best;
        }
    }

    let start_cost = |k: usize| inst.d(0, k) + cost[at(full & !(1 << (k - 1)), k)];
    let best_total = (1..n).map(start_cost).fold(f64::INFINITY, f64::min);
    let mut order = vec![0];
    let mut cur = (1..n).find(|&k| start_cost(k) == best_total).expect("some start attains the minimum");
    let mut remaining = full & !(1 << (cur - 1));
    order.push(cur);
    while remaining != 0 {
        let target = cost[at(remaining, cur)];
        let next = (1..n)
            .filter(|&k| remaining >> (k - 1) & 1 == 1)
            .find(|&k| inst.d(cur, k) + cost[at(remaining & !(1 << (k - 1)), k)] == target)
            .expect("some successor attains the minimum");
        remaining &= !(1 << (next - 1));
        order.push(next);
        cur = next;
    }
    // The reverse orientation has the same length up to rounding; report the
    // canonical one.
    Tour::new(inst, canonical_cycle(&order))
}
