//! Minimizers for quadratic binary models.

mod exact;
mod sa;
mod schedule;
mod sqa;
mod two_opt;

use serde::{Deserialize, Serialize};

pub use exact::{exact_edge_ground_state, ExactOutcome};
pub use sa::{simulated_annealing, MetropolisChain};
pub use schedule::{AnnealSchedule, ResolvedSchedule, DEFAULT_SLICES, DEFAULT_SWEEPS};
pub use sqa::{interslice_coupling, simulated_quantum_annealing, simulated_quantum_annealing_with_stats, SqaStats, TROTTER_ARG_FLOOR};
pub use two_opt::{two_opt_baseline, two_opt_descent, DEFAULT_RESTARTS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub best_config: Vec<bool>,
    /// Model energy of `best_config`, evaluated from scratch.
    pub best_energy: f64,
    pub energy_trace: Option<Vec<f64>>,
    pub seed: u64,
    pub sweeps_used: usize,
}
