use crate::encoding::QuadraticModel;
use crate::error::{Error, Result};

pub const MAX_EXHAUSTIVE_VARS: usize = 26;

/// Global minimum by visiting all `2^n` assignments in Gray-code order with
/// incremental local fields. Among assignments whose energies agree to
/// within rounding, the lexicographically smallest (variable 0 first,
/// `false < true`) wins. The returned energy is re-evaluated from scratch.
pub fn exhaustive_ground_state(model: &QuadraticModel) -> Result<(Vec<bool>, f64)> {
    let n = model.num_vars();
    if n > MAX_EXHAUSTIVE_VARS {
        return Err(Error::Capacity {
            what: "exhaustive_ground_state",
            limit: MAX_EXHAUSTIVE_VARS,
            got: n,
        });
    }
    let nb = model.neighbors();
    let scale = 1.0 + model.max_local_field() * n as f64;
    let tol = 1e-9 * scale;

    let mut config = vec![false; n];
    // field[i] = h_i + sum_j J_ij a_j: the energy change of setting bit i.
    let mut field: Vec<f64> = model.linear().to_vec();
    let mut energy = model.offset();
    let mut best = config.clone();
    let mut best_energy = energy;

    for step in 1u64..(1u64 << n) {
        let i = step.trailing_zeros() as usize;
        let delta = if config[i] { -field[i] } else { field[i] };
        let sign = if config[i] { -1.0 } else { 1.0 };
        config[i] = !config[i];
        energy += delta;
        for &(j, q) in nb.of(i) {
            field[j] += sign * q;
        }
        if energy < best_energy - tol || (energy <= best_energy + tol && config < best) {
            best_energy = energy;
            best.copy_from_slice(&config);
        }
    }
    let e = model.energy(&best);
    Ok((best, e))
}
