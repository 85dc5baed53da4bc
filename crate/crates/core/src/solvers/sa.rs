use rand::Rng;

use super::{AnnealSchedule, SolveResult};
use crate::encoding::{Neighbors, QuadraticModel};
use crate::error::Result;
use crate::rng::{rng_from_seed, SimRng};

/// Single-spin-flip Metropolis chain over a QUBO with cached local fields.
pub struct MetropolisChain<'m> {
    nb: Neighbors,
    config: Vec<bool>,
    /// `field[i]`: energy change from setting bit `i` (given the others).
    field: Vec<f64>,
    energy: f64,
    model: &'m QuadraticModel,
    accepted: u64,
    proposed: u64,
}

impl<'m> MetropolisChain<'m> {
    pub fn new(model: &'m QuadraticModel, start: Vec<bool>) -> Self {
        assert_eq!(start.len(), model.num_vars());
        let nb = model.neighbors();
        let mut field = model.linear().to_vec();
        for (i, f) in field.iter_mut().enumerate() {
            for &(j, q) in nb.of(i) {
                if start[j] {
                    *f += q;
                }
            }
        }
        let energy = model.energy(&start);
        MetropolisChain {
            nb,
            config: start,
            field,
            energy,
            model,
            accepted: 0,
            proposed: 0,
        }
    }

    /// Chain started from independent fair bits.
    pub fn random_start(model: &'m QuadraticModel, rng: &mut SimRng) -> Self {
        let start = (0..model.num_vars()).map(|_| rng.gen_bool(0.5)).collect();
        MetropolisChain::new(model, start)
    }

    pub fn config(&self) -> &[bool] {
        &self.config
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    #[inline]
    fn delta(&self, i: usize) -> f64 {
        if self.config[i] {
            -self.field[i]
        } else {
            self.field[i]
        }
    }

    fn flip(&mut self, i: usize) {
        let delta = self.delta(i);
        let sign = if self.config[i] { -1.0 } else { 1.0 };
        self.config[i] = !self.config[i];
        self.energy += delta;
        for &(j, q) in self.nb.of(i) {
            self.field[j] += sign * q;
        }
    }

    /// One sweep at temperature `t`: propose a flip of every variable in index
    /// order, accepting with probability `min(1, exp(-dE / t))`. Calls
    /// `on_accept` after each accepted flip.
    pub fn sweep(&mut self, t: f64, rng: &mut SimRng, mut on_accept: impl FnMut(&Self)) {
        for i in 0..self.config.len() {
            let d = self.delta(i);
            self.proposed += 1;
            // Always draw, so the stream position does not depend on the outcome.
            let u: f64 = rng.gen();
            if d <= 0.0 || u < (-d / t).exp() {
                self.flip(i);
                self.accepted += 1;
                on_accept(self);
            }
        }
    }

    pub fn exact_energy(&self) -> f64 {
        self.model.energy(&self.config)
    }
}

/// Classical simulated annealing with best-ever tracking.
pub fn simulated_annealing(model: &QuadraticModel, schedule: &AnnealSchedule, seed: u64) -> Result<SolveResult> {
    let sched = schedule.resolve(model)?;
    let mut rng = rng_from_seed(seed);
    let mut chain = MetropolisChain::random_start(model, &mut rng);
    let mut best = chain.config().to_vec();
    let mut best_energy = chain.energy();
    let mut trace = Vec::new();

    for s in 0..sched.sweeps {
        let t = sched.temperature(s);
        chain.sweep(t, &mut rng, |c| {
            if c.energy() < best_energy {
                best_energy = c.energy();
                best.copy_from_slice(c.config());
            }
        });
        if sched.trace {
            trace.push(best_energy);
        }
    }
    let best_energy = model.energy(&best);
    Ok(SolveResult {
        best_config: best,
        best_energy,
        energy_trace: sched.trace.then_some(trace),
        seed,
        sweeps_used: sched.sweeps,
    })
}
