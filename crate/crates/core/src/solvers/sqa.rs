//! Path-integral (Suzuki-Trotter) simulated quantum annealing.

use rand::Rng;

use super::{AnnealSchedule, SolveResult};
use crate::encoding::{bits_from_spins, QuadraticModel};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Lower clamp on `beta * Gamma / P`; below it `ln tanh` loses all precision.
pub const TROTTER_ARG_FLOOR: f64 = 1e-12;

/// Ferromagnetic coupling between neighbouring Trotter slices,
/// `J_perp = -(P / (2 beta)) ln tanh(beta Gamma / P)`, with the argument
/// clamped at [`TROTTER_ARG_FLOOR`].
pub fn interslice_coupling(gamma: f64, beta: f64, slices: usize) -> f64 {
    let p = slices as f64;
    let x = (beta * gamma / p).max(TROTTER_ARG_FLOOR);
    -(p / (2.0 * beta)) * x.tanh().ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqaStats {
    pub acceptance_rate: f64,
}

pub fn simulated_quantum_annealing(model: &QuadraticModel, schedule: &AnnealSchedule, seed: u64) -> Result<SolveResult> {
    simulated_quantum_annealing_with_stats(model, schedule, seed).map(|(r, _)| r)
}

/// Anneals `P` coupled replicas of the Ising form of `model`. Each sweep
/// visits slices in order and, within a slice, spins in index order. The
/// replica weight is `exp(-(beta/P) sum_k [B E(s_k) - J_perp sum_i s_ki s_(k+1)i])`
/// with periodic slice index; `Gamma` and `B` follow the schedule. The output
/// is the lowest-energy single slice seen at the end of any sweep.
pub fn simulated_quantum_annealing_with_stats(
    model: &QuadraticModel,
    schedule: &AnnealSchedule,
    seed: u64,
) -> Result<(SolveResult, SqaStats)> {
    let sched = schedule.resolve(model)?;
    if sched.slices < 2 {
        return Err(Error::Precondition(format!(
            "SQA needs at least 2 Trotter slices, got {}",
            sched.slices
        )));
    }
    let ising = model.to_ising();
    let nb = ising.neighbors();
    let n = ising.num_spins();
    let p = sched.slices;
    let mut rng = rng_from_seed(seed);

    let mut spins: Vec<i8> = (0..n * p).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
    let mut field = vec![0.0; n * p];
    let mut slice_energy = vec![0.0; p];
    for k in 0..p {
        let s = &spins[k * n..(k + 1) * n];
        for i in 0..n {
            field[k * n + i] = ising.h[i] + nb.of(i).iter().map(|&(j, c)| c * f64::from(s[j])).sum::<f64>();
        }
        slice_energy[k] = ising.energy(s);
    }

    let pick_best = |energies: &[f64]| -> (usize, f64) {
        energies
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, e)| if e < acc.1 { (k, e) } else { acc })
    };
    let (k0, e0) = pick_best(&slice_energy);
    let mut best_spins = spins[k0 * n..(k0 + 1) * n].to_vec();
    let mut best_energy = e0;
    let mut trace = Vec::new();
    let (mut accepted, mut proposed) = (0u64, 0u64);

    let slice_beta = sched.beta / p as f64;
    for s in 0..sched.sweeps {
        let b = sched.problem_weight(s);
        let j_perp = interslice_coupling(sched.gamma(s), sched.beta, p);
        for k in 0..p {
            let up = ((k + 1) % p) * n;
            let down = ((k + p - 1) % p) * n;
            let base = k * n;
            for i in 0..n {
                let sigma = f64::from(spins[base + i]);
                let d_problem = -2.0 * sigma * field[base + i];
                let neighbours = f64::from(spins[up + i]) + f64::from(spins[down + i]);
                let d_eff = b * d_problem + 2.0 * j_perp * sigma * neighbours;
                proposed += 1;
                let u: f64 = rng.gen();
                if d_eff <= 0.0 || u < (-slice_beta * d_eff).exp() {
                    accepted += 1;
                    spins[base + i] = -spins[base + i];
                    slice_energy[k] += d_problem;
                    // sigma is the old value; the new spin is -sigma.
                    for &(j, c) in nb.of(i) {
                        field[base + j] -= 2.0 * c * sigma;
                    }
                }
            }
        }
        let (kb, eb) = pick_best(&slice_energy);
        if eb < best_energy {
            best_energy = eb;
            best_spins.copy_from_slice(&spins[kb * n..(kb + 1) * n]);
        }
        if sched.trace {
            trace.push(best_energy);
        }
    }

    let best_config = bits_from_spins(&best_spins);
    let best_energy = model.energy(&best_config);
    let stats = SqaStats {
        acceptance_rate: if proposed == 0 { 0.0 } else { accepted as f64 / proposed as f64 },
    };
    Ok((
        SolveResult {
            best_config,
            best_energy,
            energy_trace: sched.trace.then_some(trace),
            seed,
            sweeps_used: sched.sweeps,
        },
        stats,
    ))
}
