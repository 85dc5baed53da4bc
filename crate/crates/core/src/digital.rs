//! Statevector emulation of digitized quantum annealing on the edge mapping,
//! with the multi-controlled phase gadget that penalizes an empty cut.
//!
//! Qubit `q` is bit `q` of the amplitude index; problem variable `i` lives on
//! qubit `i` and the value 1 means the variable is set. `hbar = 1`.

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{decode, encode_edge, Decoded, PenaltyWeights, QuadraticModel};
use crate::error::{Error, Result};
use crate::instances::TspInstance;
use crate::rng::rng_from_seed;

pub const MAX_QUBITS: usize = 26;
const PAR_THRESHOLD: usize = 1 << 15;
/// Largest squared amplitude tolerated on an ancilla that should be `|0>`.
const ANCILLA_TOL: f64 = 1e-24;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::Capacity {
            what: "statevector qubits",
            limit: MAX_QUBITS,
            got: n,
        });
    }
    Ok(())
}

impl QuantumState {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        QuantumState::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_capacity(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Precondition(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { n_qubits, amps })
    }

    /// `|+>` on the low `problem_qubits` qubits, `|0>` on the rest: the
    /// ground state of `-sum_i X_i` over the problem register.
    pub fn uniform(problem_qubits: usize, n_qubits: usize) -> Result<Self> {
        check_capacity(n_qubits)?;
        if problem_qubits > n_qubits {
            return Err(Error::Precondition("more problem qubits than qubits".into()));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        let a = (1.0 / (1u64 << problem_qubits) as f64).sqrt();
        for amp in &mut amps[..1 << problem_qubits] {
            *amp = Complex64::new(a, 0.0);
        }
        Ok(QuantumState { n_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::Precondition(format!("{} amplitudes is not a power of two", amps.len())));
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        check_capacity(n_qubits)?;
        let s = QuantumState { n_qubits, amps };
        if (s.norm_sqr() - 1.0).abs() > 1e-10 {
            return Err(Error::Precondition(format!("state norm^2 is {}", s.norm_sqr())));
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_qubits(&self, qs: &[usize]) -> Result<()> {
        for (k, &q) in qs.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::Precondition(format!("qubit {q} out of range for {} qubits", self.n_qubits)));
            }
            if qs[..k].contains(&q) {
                return Err(Error::Precondition(format!("qubit {q} used twice in one gate")));
            }
        }
        Ok(())
    }

    /// Multiplies every amplitude by `phase(index)`.
    fn map_diagonal(&mut self, phase: impl Fn(usize) -> Option<Complex64> + Sync) {
        let f = |(i, a): (usize, &mut Complex64)| {
            if let Some(p) = phase(i) {
                *a *= p;
            }
        };
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_iter_mut().enumerate().for_each(f);
        } else {
            self.amps.iter_mut().enumerate().for_each(f);
        }
    }
}

/// `exp(-i angle)`.
fn phasor(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, -angle)
}

/// Gates of the emulator. Phase angles follow the propagator sign: the
/// selected amplitudes are multiplied by `exp(-i angle)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    X(usize),
    /// `exp(-i angle X / 2)`.
    Rx { qubit: usize, angle: f64 },
    /// Phase on `|1>`.
    Phase { qubit: usize, angle: f64 },
    /// Phase when both qubits are `|1>`.
    CPhase { a: usize, b: usize, angle: f64 },
    Toffoli { controls: [usize; 2], target: usize },
    GlobalPhase(f64),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X(q) | Gate::Rx { qubit: q, .. } | Gate::Phase { qubit: q, .. } => vec![q],
            Gate::CPhase { a, b, .. } => vec![a, b],
            Gate::Toffoli { controls, target } => vec![controls[0], controls[1], target],
            Gate::GlobalPhase(_) => Vec::new(),
        }
    }

    pub fn is_toffoli(&self) -> bool {
        matches!(self, Gate::Toffoli { .. })
    }
}

pub fn apply_gate(state: &mut QuantumState, gate: &Gate) -> Result<()> {
    state.check_qubits(&gate.qubits())?;
    match *gate {
        Gate::X(q) => {
            let m = 1 << q;
            for i in 0..state.amps.len() {
                if i & m == 0 {
                    state.amps.swap(i, i | m);
                }
            }
        }
        Gate::Rx { qubit, angle } => {
            let m = 1 << qubit;
            let c = Complex64::new((angle / 2.0).cos(), 0.0);
            let s = Complex64::new(0.0, -(angle / 2.0).sin());
            for i in 0..state.amps.len() {
                if i & m == 0 {
                    let (a0, a1) = (state.amps[i], state.amps[i | m]);
                    state.amps[i] = c * a0 + s * a1;
                    state.amps[i | m] = s * a0 + c * a1;
                }
            }
        }
        Gate::Phase { qubit, angle } => {
            let (m, p) = (1 << qubit, phasor(angle));
            state.map_diagonal(|i| (i & m != 0).then_some(p));
        }
        Gate::CPhase { a, b, angle } => {
            let (m, p) = ((1 << a) | (1 << b), phasor(angle));
            state.map_diagonal(|i| (i & m == m).then_some(p));
        }
        Gate::Toffoli { controls, target } => {
            let c = (1 << controls[0]) | (1 << controls[1]);
            let t = 1 << target;
            for i in 0..state.amps.len() {
                if i & c == c && i & t == 0 {
                    state.amps.swap(i, i | t);
                }
            }
        }
        Gate::GlobalPhase(angle) => {
            let p = phasor(angle);
            state.map_diagonal(|_| Some(p));
        }
    }
    Ok(())
}

pub fn apply_gates(state: &mut QuantumState, gates: &[Gate]) -> Result<()> {
    gates.iter().try_for_each(|g| apply_gate(state, g))
}

/// Rotates each listed qubit by `exp(-i angle X / 2)`. Evolving under
/// `A (-sum X)` for a time `dt` is `angle = -2 A dt`.
pub fn apply_driver(state: &mut QuantumState, qubits: &[usize], angle: f64) -> Result<()> {
    for &qubit in qubits {
        apply_gate(state, &Gate::Rx { qubit, angle })?;
    }
    Ok(())
}

/// Single- and two-qubit phase gates whose product is `exp(-i scale E(z))`.
pub fn problem_phase_gates(model: &QuadraticModel, scale: f64) -> Vec<Gate> {
    let mut gates = vec![Gate::GlobalPhase(scale * model.offset())];
    for (qubit, &h) in model.linear().iter().enumerate() {
        if h != 0.0 {
            gates.push(Gate::Phase { qubit, angle: scale * h });
        }
    }
    for (&(a, b), &q) in model.quadratic() {
        gates.push(Gate::CPhase { a, b, angle: scale * q });
    }
    gates
}

fn check_problem_register(state: &QuantumState, model: &QuadraticModel) -> Result<()> {
    if model.num_vars() > state.n_qubits {
        return Err(Error::Precondition(format!(
            "model has {} variables but the state only {} qubits",
            model.num_vars(),
            state.n_qubits
        )));
    }
    Ok(())
}

/// Applies `exp(-i scale E(z))` gate by gate; `z` is read from the low
/// `model.num_vars()` qubits.
pub fn apply_problem_phase(state: &mut QuantumState, model: &QuadraticModel, scale: f64) -> Result<()> {
    check_problem_register(state, model)?;
    apply_gates(state, &problem_phase_gates(model, scale))
}

/// `E(z)` for every problem configuration `z`, indexed like amplitudes.
pub fn diagonal_energies(model: &QuadraticModel) -> Result<Vec<f64>> {
    let n = model.num_vars();
    check_capacity(n)?;
    let mut bits = vec![false; n];
    Ok((0..1usize << n)
        .map(|z| {
            for (k, b) in bits.iter_mut().enumerate() {
                *b = z >> k & 1 == 1;
            }
            model.energy(&bits)
        })
        .collect())
}

/// Multiplies amplitude `i` by `exp(-i scale energies[i mod len])`.
pub fn apply_diagonal_phase(state: &mut QuantumState, energies: &[f64], scale: f64) -> Result<()> {
    if !energies.len().is_power_of_two() || energies.len() > state.amps.len() {
        return Err(Error::Precondition("diagonal does not fit the state".into()));
    }
    let mask = energies.len() - 1;
    state.map_diagonal(|i| Some(phasor(scale * energies[i & mask])));
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ToffoliSchedule {
    /// Pairwise reduction, logarithmic depth.
    #[default]
    Tree,
    /// Linear accumulation chain.
    Ladder,
}

/// Wires of one cut gadget: the cut's edge qubits, `m - 2` ancillas in `|0>`
/// and the phase `theta = B eta' dt` charged when no cut edge is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GadgetLayout {
    pub connections: Vec<usize>,
    pub ancillas: Vec<usize>,
    pub theta: f64,
    pub schedule: ToffoliSchedule,
}

impl GadgetLayout {
    pub fn new(connections: Vec<usize>, ancillas: Vec<usize>, theta: f64) -> Result<Self> {
        let layout = GadgetLayout {
            connections,
            ancillas,
            theta,
            schedule: ToffoliSchedule::Tree,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn with_schedule(mut self, schedule: ToffoliSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn m(&self) -> usize {
        self.connections.len()
    }

    fn validate(&self) -> Result<()> {
        let m = self.m();
        if m < 2 {
            return Err(Error::Precondition(format!("gadget needs at least 2 connection qubits, got {m}")));
        }
        if self.ancillas.len() != m - 2 {
            return Err(Error::Precondition(format!("gadget with m = {m} needs {} ancillas, got {}", m - 2, self.ancillas.len())));
        }
        let mut all: Vec<usize> = self.connections.iter().chain(&self.ancillas).copied().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition("gadget qubit indices must be disjoint".into()));
        }
        Ok(())
    }

    /// Negate inputs, AND them pairwise into ancillas down to two wires,
    /// phase the pair, uncompute, restore inputs.
    pub fn circuit(&self) -> Vec<Gate> {
        let mut compute = Vec::new();
        let mut fresh = self.ancillas.iter().copied();
        let root = match self.schedule {
            ToffoliSchedule::Tree => {
                let mut wires = self.connections.clone();
                while wires.len() > 2 {
                    let mut next = Vec::with_capacity(wires.len() / 2 + 1);
                    for pair in wires.chunks(2) {
                        if let [a, b] = *pair {
                            let target = fresh.next().expect("m - 2 ancillas");
                            compute.push(Gate::Toffoli { controls: [a, b], target });
                            next.push(target);
                        } else {
                            next.push(pair[0]);
                        }
                    }
                    wires = next;
                }
                [wires[0], wires[1]]
            }
            ToffoliSchedule::Ladder => {
                let m = self.m();
                let mut acc = self.connections[0];
                for &x in &self.connections[1..m - 1] {
                    let target = fresh.next().expect("m - 2 ancillas");
                    compute.push(Gate::Toffoli { controls: [acc, x], target });
                    acc = target;
                }
                [acc, self.connections[m - 1]]
            }
        };
        let negate = self.connections.iter().map(|&q| Gate::X(q));
        let mut gates: Vec<Gate> = negate.clone().collect();
        gates.extend(compute.iter().copied());
        gates.push(Gate::CPhase {
            a: root[0],
            b: root[1],
            angle: self.theta,
        });
        gates.extend(compute.iter().rev().copied());
        gates.extend(negate);
        gates
    }

    pub fn toffoli_count(&self) -> usize {
        self.circuit().iter().filter(|g| g.is_toffoli()).count()
    }

    pub fn depth(&self) -> usize {
        circuit_depth(&self.circuit())
    }
}

/// Depth of `gates` under as-soon-as-possible scheduling, where gates that
/// share a qubit cannot run in the same layer. Global phases are free.
pub fn circuit_depth(gates: &[Gate]) -> usize {
    let mut busy: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    let mut depth = 0;
    for g in gates {
        let qs = g.qubits();
        if qs.is_empty() {
            continue;
        }
        let layer = qs.iter().map(|q| busy.get(q).copied().unwrap_or(0)).max().unwrap_or(0) + 1;
        for q in qs {
            busy.insert(q, layer);
        }
        depth = depth.max(layer);
    }
    depth
}

/// Multiplies by `exp(-i theta)` exactly the basis states whose connection
/// qubits are all 0, leaving ancillas in `|0>`. Fails if an ancilla has
/// support on `|1>`.
pub fn apply_subtour_gadget(state: &mut QuantumState, layout: &GadgetLayout) -> Result<()> {
    layout.validate()?;
    let mut all = layout.connections.clone();
    all.extend(&layout.ancillas);
    state.check_qubits(&all)?;
    let mask = layout.ancillas.iter().fold(0usize, |m, &q| m | 1 << q);
    if mask != 0 {
        let dirty = state
            .amps
            .iter()
            .enumerate()
            .any(|(i, a)| i & mask != 0 && a.norm_sqr() > ANCILLA_TOL);
        if dirty {
            return Err(Error::Precondition("gadget ancillas are not in |0>".into()));
        }
    }
    apply_gates(state, &layout.circuit())
}

/// Parameters of a digital annealing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitalConfig {
    pub steps: usize,
    pub dt: f64,
    /// City subsets whose empty cut is charged `eta'` by a gadget.
    pub subsets: Vec<(Vec<usize>, f64)>,
    /// `None` uses [`PenaltyWeights::defaults_for`].
    pub weights: Option<PenaltyWeights>,
    pub truncation: Option<usize>,
    pub schedule: ToffoliSchedule,
}

impl DigitalConfig {
    pub fn new(steps: usize, dt: f64) -> Self {
        DigitalConfig {
            steps,
            dt,
            subsets: Vec::new(),
            weights: None,
            truncation: None,
            schedule: ToffoliSchedule::Tree,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DigitalOutcome {
    pub model: QuadraticModel,
    pub ancilla_qubits: usize,
    /// Exact probability of each edge configuration, indexed by bitmask.
    pub probabilities: Vec<f64>,
    pub most_probable: usize,
    pub decoded: Decoded,
}

impl DigitalOutcome {
    pub fn problem_qubits(&self) -> usize {
        self.model.num_vars()
    }

    /// Edge configuration for a bitmask index.
    pub fn config(&self, index: usize) -> Vec<bool> {
        config_from_index(index, self.problem_qubits())
    }

    /// Probability mass on configurations selecting no retained edge across
    /// the cut of `subset`.
    pub fn empty_cut_mass(&self, subset: &[usize]) -> f64 {
        let set = self.model.edge_set().expect("edge model");
        let mask = set.cut_vars(subset).iter().fold(0usize, |m, &v| m | 1 << v);
        self.probabilities
            .iter()
            .enumerate()
            .filter(|(z, _)| z & mask == 0)
            .map(|(_, p)| p)
            .sum()
    }
}

pub fn config_from_index(index: usize, n: usize) -> Vec<bool> {
    (0..n).map(|k| index >> k & 1 == 1).collect()
}

/// Bitstring with variable 0 first.
pub fn bitstring(index: usize, n: usize) -> String {
    (0..n).map(|k| if index >> k & 1 == 1 { '1' } else { '0' }).collect()
}

/// First-order Trotterized annealing of the edge model from the uniform
/// superposition: each step `k` at `t = (k + 1/2) / steps` applies the driver
/// with weight `A = 1 - t`, the problem phase with weight `B = t` and one
/// gadget per registered subset. Returns exact outcome probabilities.
pub fn run_digital_qa(inst: &TspInstance, cfg: &DigitalConfig) -> Result<DigitalOutcome> {
    if !(cfg.dt >= 0.0 && cfg.dt.is_finite()) {
        return Err(Error::Precondition(format!("dt must be finite and >= 0, got {}", cfg.dt)));
    }
    let w = cfg.weights.unwrap_or_else(|| PenaltyWeights::defaults_for(inst));
    let model = encode_edge(inst, &w, cfg.truncation)?;
    let set = model.edge_set().expect("edge model").clone();
    let nq = model.num_vars();

    let mut cuts = Vec::with_capacity(cfg.subsets.len());
    for (subset, eta_prime) in &cfg.subsets {
        // Validation via the penalty builder keeps the subset rules in one place.
        model.clone().add_subtour_penalty(subset, 2, *eta_prime)?;
        cuts.push((set.cut_vars(subset), *eta_prime));
    }
    let ancillas = cuts.iter().map(|(c, _)| c.len().saturating_sub(2)).max().unwrap_or(0);
    let total = nq + ancillas;
    check_capacity(total)?;
    let pool: Vec<usize> = (nq..total).collect();

    let energies = diagonal_energies(&model)?;
    let mut state = QuantumState::uniform(nq, total)?;
    let problem: Vec<usize> = (0..nq).collect();
    for k in 0..cfg.steps {
        let t = (k as f64 + 0.5) / cfg.steps as f64;
        let (a, b) = (1.0 - t, t);
        apply_driver(&mut state, &problem, -2.0 * a * cfg.dt)?;
        apply_diagonal_phase(&mut state, &energies, b * cfg.dt)?;
        for (cut, eta_prime) in &cuts {
            let layout = GadgetLayout::new(cut.clone(), pool[..cut.len() - 2].to_vec(), b * eta_prime * cfg.dt)?
                .with_schedule(cfg.schedule);
            apply_subtour_gadget(&mut state, &layout)?;
        }
    }

    let mut probabilities = vec![0.0; 1 << nq];
    let low = (1usize << nq) - 1;
    for (i, a) in state.amplitudes().iter().enumerate() {
        probabilities[i & low] += a.norm_sqr();
    }
    let most_probable = probabilities
        .iter()
        .enumerate()
        .fold(0, |best, (i, &p)| if p > probabilities[best] { i } else { best });
    let decoded = decode(inst, &model, &config_from_index(most_probable, nq))?;
    Ok(DigitalOutcome {
        model,
        ancilla_qubits: ancillas,
        probabilities,
        most_probable,
        decoded,
    })
}

/// Draws `shots` measurement outcomes from exact probabilities; returns
/// counts indexed like `probabilities`.
pub fn sample_outcomes(probabilities: &[f64], shots: usize, seed: u64) -> Result<Vec<u64>> {
    let dist = WeightedIndex::new(probabilities).map_err(|e| Error::Precondition(format!("bad distribution: {e}")))?;
    let mut rng = rng_from_seed(seed);
    let mut counts = vec![0u64; probabilities.len()];
    for _ in 0..shots {
        counts[dist.sample(&mut rng)] += 1;
    }
    Ok(counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetResources {
    pub m: usize,
    pub ancillas: usize,
    pub toffolis: usize,
    /// Layers of the tree schedule, negations included.
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitalResources {
    /// Edge qubits of the untruncated mapping, `n (n - 1) / 2`.
    pub problem_qubits: usize,
    pub gadgets: Vec<GadgetResources>,
    /// Ancillas when gadgets run one after another and share a pool.
    pub shared_ancillas: usize,
}

fn ceil_log2(m: usize) -> usize {
    m.next_power_of_two().trailing_zeros() as usize
}

/// Closed-form gadget costs: `m - 2` ancillas, `2 (m - 2)` Toffolis and
/// depth `2 ceil(log2 m) + 1`.
pub fn resource_report_digital(n: usize, ms: &[usize]) -> DigitalResources {
    let gadgets: Vec<GadgetResources> = ms
        .iter()
        .map(|&m| GadgetResources {
            m,
            ancillas: m.saturating_sub(2),
            toffolis: 2 * m.saturating_sub(2),
            depth: if m == 0 { 0 } else { 2 * ceil_log2(m.max(2)) + 1 },
        })
        .collect();
    DigitalResources {
        problem_qubits: n * n.saturating_sub(1) / 2,
        shared_ancillas: gadgets.iter().map(|g| g.ancillas).max().unwrap_or(0),
        gadgets,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::VariableMap;
    use crate::instances::generate_instance;
    use crate::oracles::optimal_tour;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn random_state(n: usize, seed: u64) -> QuantumState {
        let mut rng = rng_from_seed(seed);
        let mut amps: Vec<Complex64> = (0..1 << n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        QuantumState::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn driver_basics() {
        let s0 = random_state(3, 1);
        let mut s = s0.clone();
        apply_driver(&mut s, &[0, 1, 2], 0.0).unwrap();
        assert_eq!(s, s0);

        let mut s = QuantumState::zero(1).unwrap();
        apply_driver(&mut s, &[0], std::f64::consts::FRAC_PI_2).unwrap();
        let p = s.probabilities();
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-15);

        let (mut a, mut b) = (s0.clone(), s0);
        apply_driver(&mut a, &[0, 1, 2], 0.3).unwrap();
        apply_driver(&mut a, &[0, 1, 2], 0.9).unwrap();
        apply_driver(&mut b, &[0, 1, 2], 1.2).unwrap();
        assert!(a.amps.iter().zip(&b.amps).all(|(x, y)| close(*x, *y, 1e-12)));
        assert_abs_diff_eq!(a.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn problem_phase_matches_dense_diagonal() {
        let n = 8;
        let mut rng = rng_from_seed(4);
        let mut m = QuadraticModel::new(n, VariableMap::Generic);
        m.add_offset(0.37);
        for i in 0..n {
            m.add_linear(i, rng.gen::<f64>() * 2.0 - 1.0);
            for j in (i + 1)..n {
                if rng.gen_bool(0.5) {
                    m.add_quadratic(i, j, rng.gen::<f64>() * 2.0 - 1.0);
                }
            }
        }
        let s0 = random_state(n, 2);
        let mut gatewise = s0.clone();
        apply_problem_phase(&mut gatewise, &m, 0.73).unwrap();
        let mut dense = s0.clone();
        apply_diagonal_phase(&mut dense, &diagonal_energies(&m).unwrap(), 0.73).unwrap();
        assert!(gatewise.amps.iter().zip(&dense.amps).all(|(x, y)| close(*x, *y, 1e-10)));

        let mut same = s0.clone();
        apply_problem_phase(&mut same, &m, 0.0).unwrap();
        assert!(same.amps.iter().zip(&s0.amps).all(|(x, y)| close(*x, *y, 1e-15)));
    }

    #[test]
    fn single_qubit_relative_phase() {
        let mut m = QuadraticModel::new(1, VariableMap::Generic);
        m.add_linear(0, 0.8);
        let mut s = QuantumState::uniform(1, 1).unwrap();
        apply_problem_phase(&mut s, &m, 0.5).unwrap();
        let rel = (s.amps[1] / s.amps[0]).arg();
        assert_abs_diff_eq!(rel, -0.4, epsilon = 1e-14);
    }

    fn layout(m: usize, theta: f64, schedule: ToffoliSchedule) -> GadgetLayout {
        GadgetLayout::new((0..m).collect(), (m..2 * m - 2).collect(), theta)
            .unwrap()
            .with_schedule(schedule)
    }

    #[test]
    fn gadget_phases_only_the_empty_cut() {
        let g = layout(4, 0.9, ToffoliSchedule::Tree);
        let mut s = QuantumState::basis(6, 0b0000).unwrap();
        apply_subtour_gadget(&mut s, &g).unwrap();
        assert!(close(s.amps[0], phasor(0.9), 1e-15));
        let mut s = QuantumState::basis(6, 0b1000).unwrap();
        apply_subtour_gadget(&mut s, &g).unwrap();
        assert!(close(s.amps[0b1000], Complex64::new(1.0, 0.0), 1e-15));
        assert_eq!(g.toffoli_count(), 4);
    }

    #[test]
    fn gadget_unitary_on_the_ancilla_free_subspace() {
        for m in 2..=6 {
            for schedule in [ToffoliSchedule::Tree, ToffoliSchedule::Ladder] {
                let g = layout(m, 1.1, schedule);
                let total = 2 * m - 2;
                for x in 0..1usize << m {
                    let mut s = QuantumState::basis(total, x).unwrap();
                    apply_subtour_gadget(&mut s, &g).unwrap();
                    let expect = if x == 0 { phasor(1.1) } else { Complex64::new(1.0, 0.0) };
                    for (i, a) in s.amps.iter().enumerate() {
                        let want = if i == x { expect } else { Complex64::new(0.0, 0.0) };
                        assert!(close(*a, want, 1e-12), "m={m} x={x} i={i}");
                    }
                }
                assert_eq!(g.toffoli_count(), 2 * (m - 2));
            }
        }
    }

    #[test]
    fn dirty_ancilla_rejected() {
        let g = layout(3, 0.5, ToffoliSchedule::Tree);
        let mut s = QuantumState::basis(4, 0b1000).unwrap();
        assert!(matches!(apply_subtour_gadget(&mut s, &g), Err(Error::Precondition(_))));
        assert!(GadgetLayout::new(vec![0, 1, 2], vec![], 0.1).is_err());
        assert!(GadgetLayout::new(vec![0, 1, 2], vec![2], 0.1).is_err());
        assert!(GadgetLayout::new(vec![0], vec![], 0.1).is_err());
    }

    #[test]
    fn tree_depth_matches_formula() {
        for m in 2..=16 {
            let tree = layout(m, 0.2, ToffoliSchedule::Tree);
            let r = resource_report_digital(6, &[m]).gadgets[0];
            assert_eq!(tree.depth(), r.depth, "m={m}");
            assert_eq!(tree.toffoli_count(), r.toffolis);
            if m >= 6 {
                assert!(layout(m, 0.2, ToffoliSchedule::Ladder).depth() > tree.depth());
            }
        }
        let r = resource_report_digital(6, &[2, 4, 16]);
        assert_eq!(r.problem_qubits, 15);
        assert_eq!((r.gadgets[0].ancillas, r.gadgets[0].toffolis), (0, 0));
        assert_eq!((r.gadgets[1].ancillas, r.gadgets[1].toffolis), (2, 4));
        assert_eq!((r.gadgets[2].ancillas, r.gadgets[2].toffolis, r.gadgets[2].depth), (14, 28, 9));
        assert_eq!(r.shared_ancillas, 14);
    }

    #[test]
    fn phase_and_gadget_commute() {
        let mut model = QuadraticModel::new(4, VariableMap::Generic);
        model.add_linear(1, 0.4);
        model.add_quadratic(0, 3, -0.7);
        let g = layout(4, 0.6, ToffoliSchedule::Tree);
        let mut s = QuantumState::uniform(4, 6).unwrap();
        apply_driver(&mut s, &[0, 1, 2, 3], 0.3).unwrap();
        let (mut a, mut b) = (s.clone(), s);
        apply_problem_phase(&mut a, &model, 0.8).unwrap();
        apply_subtour_gadget(&mut a, &g).unwrap();
        apply_subtour_gadget(&mut b, &g).unwrap();
        apply_problem_phase(&mut b, &model, 0.8).unwrap();
        assert!(a.amps.iter().zip(&b.amps).all(|(x, y)| close(*x, *y, 1e-12)));
    }

    #[test]
    fn zero_steps_is_uniform() {
        let inst = generate_instance(5, 0).unwrap();
        let out = run_digital_qa(&inst, &DigitalConfig::new(0, 0.1)).unwrap();
        assert_eq!(out.problem_qubits(), 10);
        assert!(out.probabilities.iter().all(|&p| (p - 1.0 / 1024.0).abs() < 1e-15));
    }

    #[test]
    fn slow_anneal_finds_the_optimal_five_cycle() {
        let inst = generate_instance(5, 1).unwrap();
        let out = run_digital_qa(&inst, &DigitalConfig::new(400, 0.25)).unwrap();
        assert_abs_diff_eq!(out.probabilities.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        let opt = optimal_tour(&inst).unwrap();
        match &out.decoded {
            Decoded::Cover(c) => assert!(c.clone().into_tour(&inst).unwrap().same_cycle(&opt)),
            other => panic!("{other:?}"),
        }
        let again = run_digital_qa(&inst, &DigitalConfig::new(400, 0.25)).unwrap();
        assert_eq!(again.probabilities, out.probabilities);
    }

    #[test]
    fn gadget_suppresses_empty_cut() {
        let inst = generate_instance(5, 2).unwrap();
        let subset = vec![0, 1];
        let plain = run_digital_qa(&inst, &DigitalConfig::new(60, 0.2)).unwrap();
        let mut cfg = DigitalConfig::new(60, 0.2);
        cfg.subsets.push((subset.clone(), 2.0 * inst.max_distance()));
        let with = run_digital_qa(&inst, &cfg).unwrap();
        assert_eq!(with.ancilla_qubits, 4);
        assert!(with.empty_cut_mass(&subset) < plain.empty_cut_mass(&subset));
    }

    #[test]
    fn sampling_follows_probabilities() {
        let counts = sample_outcomes(&[0.25, 0.75], 40_000, 3).unwrap();
        assert_eq!(counts.iter().sum::<u64>(), 40_000);
        assert!((counts[1] as f64 / 40_000.0 - 0.75).abs() < 0.01);
        assert_eq!(counts, sample_outcomes(&[0.25, 0.75], 40_000, 3).unwrap());
    }

    #[test]
    fn capacity_enforced() {
        assert!(matches!(QuantumState::zero(27), Err(Error::Capacity { .. })));
    }
}
