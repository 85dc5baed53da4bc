use serde::{Deserialize, Serialize};

use super::model::{EdgeSet, GridCell, PermutationGrid, QuadraticModel, VariableMap};
use crate::error::{Error, Result};
use crate::instances::TspInstance;

/// Penalty weights: `eta` for the permutation / degree constraints, `eta_prime`
/// for subtour cut penalties and `eta_double_prime` for slack normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    pub eta: f64,
    pub eta_prime: f64,
    pub eta_double_prime: f64,
}

impl PenaltyWeights {
    /// `eta = 2 max d_ij`, `eta' = eta`, `eta'' = 4 eta'`.
    pub fn defaults_for(inst: &TspInstance) -> Self {
        let eta = 2.0 * inst.max_distance();
        PenaltyWeights {
            eta,
            eta_prime: eta,
            eta_double_prime: 4.0 * eta,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta", self.eta),
            ("eta_prime", self.eta_prime),
            ("eta_double_prime", self.eta_double_prime),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Precondition(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Lower bound on `eta` for the permutation mapping: `max d_ij / 2`.
pub fn permutation_eta_bound(inst: &TspInstance) -> f64 {
    inst.max_distance() / 2.0
}

/// Permutation-matrix mapping: tour length
/// `sum_{i,j,k} d_ij a_ik a_j(k+1 mod n)` plus `eta` times the squared
/// row and column deviations from one.
pub fn encode_permutation(inst: &TspInstance, w: &PenaltyWeights, reduced: bool) -> Result<QuadraticModel> {
    w.validate()?;
    let bound = permutation_eta_bound(inst);
    if w.eta < bound {
        return Err(Error::Precondition(format!(
            "eta = {} is below the permutation bound max d_ij / 2 = {bound}",
            w.eta
        )));
    }
    let n = inst.n();
    let grid = PermutationGrid { n, reduced };
    let mut model = QuadraticModel::new(grid.num_vars(), VariableMap::Permutation(grid));

    for k in 0..n {
        let next = (k + 1) % n;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = inst.d(i, j);
                match (grid.cell(i, k), grid.cell(j, next)) {
                    (GridCell::Var(u), GridCell::Var(v)) => model.add_quadratic(u, v, d),
                    (GridCell::Var(u), GridCell::Fixed(true)) | (GridCell::Fixed(true), GridCell::Var(u)) => {
                        model.add_linear(u, d)
                    }
                    (GridCell::Fixed(true), GridCell::Fixed(true)) => model.add_offset(d),
                    _ => {}
                }
            }
        }
    }

    // Row (each city once) and column (each step once) constraints.
    for line in 0..n {
        for by_row in [true, false] {
            let mut constant = -1.0;
            let mut terms = Vec::with_capacity(n);
            for other in 0..n {
                let (city, step) = if by_row { (line, other) } else { (other, line) };
                match grid.cell(city, step) {
                    GridCell::Var(v) => terms.push((v, 1.0)),
                    GridCell::Fixed(true) => constant += 1.0,
                    GridCell::Fixed(false) => {}
                }
            }
            // (1 - sum a)^2 == (sum a - 1)^2
            model.add_squared_linear(w.eta, constant, &terms);
        }
    }
    Ok(model)
}

/// Undirected edges kept by the `L`-nearest-neighbour truncation: the union
/// over cities of the edges to their `L` nearest cities. `None` keeps all.
pub fn retained_edges(inst: &TspInstance, truncation: Option<usize>) -> Result<Vec<(usize, usize)>> {
    let n = inst.n();
    let mut edges = Vec::new();
    match truncation {
        None => {
            for i in 0..n {
                for j in (i + 1)..n {
                    edges.push((i, j));
                }
            }
        }
        Some(l) => {
            if l < 2 || l > n - 1 {
                return Err(Error::Precondition(format!(
                    "truncation L = {l} outside 2..={}",
                    n - 1
                )));
            }
            for i in 0..n {
                for &j in inst.neighbor_ranks(i).iter().take(l) {
                    edges.push((i.min(j), i.max(j)));
                }
            }
            edges.sort_unstable();
            edges.dedup();
        }
    }
    Ok(edges)
}

/// Edge mapping: `sum d_ij a_ij + eta * sum_i (2 - deg_i)^2` over the
/// retained edges.
pub fn encode_edge(inst: &TspInstance, w: &PenaltyWeights, truncation: Option<usize>) -> Result<QuadraticModel> {
    w.validate()?;
    let n = inst.n();
    let edges = retained_edges(inst, truncation)?;
    let set = EdgeSet::new(n, truncation, edges, w.eta);
    let mut model = QuadraticModel::new(set.num_edge_vars(), VariableMap::Edge(set.clone()));
    for (v, &(i, j)) in set.edges.iter().enumerate() {
        model.add_linear(v, inst.d(i, j));
    }
    let mut incident: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (v, &(i, j)) in set.edges.iter().enumerate() {
        incident[i].push((v, 1.0));
        incident[j].push((v, 1.0));
    }
    for terms in &incident {
        model.add_squared_linear(w.eta, -2.0, terms);
    }
    Ok(model)
}
