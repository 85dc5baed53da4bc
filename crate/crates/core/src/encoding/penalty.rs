//! Cut penalties that discourage a subset of cities from closing on itself.

use super::model::{QuadraticModel, SlackBlock, SubtourConstraint, VariableMap};
use crate::error::{Error, Result};

/// What a cut penalty touched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutPenaltyNote {
    /// Retained edges crossing the cut.
    pub cut_edges: usize,
    /// True when truncation removed every cut edge, so the penalty is a
    /// constant and cannot influence the ground state.
    pub vacuous: bool,
}

fn checked_subset(model: &QuadraticModel, subset: &[usize]) -> Result<Vec<usize>> {
    let set = match model.varmap() {
        VariableMap::Edge(e) => e,
        _ => {
            return Err(Error::Unsupported(
                "subtour penalties need an edge-mapped model".into(),
            ))
        }
    };
    let mut s = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != subset.len() {
        return Err(Error::Precondition("subset contains duplicate cities".into()));
    }
    if s.is_empty() || s.len() >= set.n {
        return Err(Error::Precondition(format!(
            "subset must be a proper nonempty subset of the {} cities",
            set.n
        )));
    }
    if let Some(&c) = s.iter().find(|&&c| c >= set.n) {
        return Err(Error::Precondition(format!("city {c} out of range")));
    }
    Ok(s)
}

impl QuadraticModel {
    /// Adds `eta_prime * (target - sum_{i in A, j not in A} a_ij)^2` over the
    /// retained cut edges. `target` is 2 (favour two connections) or 3 (favour
    /// two and four equally).
    pub fn add_subtour_penalty(&mut self, subset: &[usize], target: u32, eta_prime: f64) -> Result<CutPenaltyNote> {
        let subset = checked_subset(self, subset)?;
        if !(target == 2 || target == 3) {
            return Err(Error::Precondition(format!("cut target must be 2 or 3, got {target}")));
        }
        if !(eta_prime >= 0.0) {
            return Err(Error::Precondition(format!("eta_prime must be >= 0, got {eta_prime}")));
        }
        let set = self.edge_set().expect("checked above");
        let cut = set.cut_vars(&subset);
        let terms: Vec<(usize, f64)> = cut.iter().map(|&v| (v, -1.0)).collect();
        self.add_squared_linear(eta_prime, f64::from(target), &terms);
        if let VariableMap::Edge(set) = self.varmap_mut() {
            set.constraints.push(SubtourConstraint {
                subset,
                target,
                weight: eta_prime,
            });
        }
        Ok(CutPenaltyNote {
            cut_edges: cut.len(),
            vacuous: cut.is_empty(),
        })
    }

    /// Adds `m = |A|` slack bits `s_1..s_m` and the penalty
    /// `eta' (cut - sum_k 2k s_k)^2 + eta'' (sum_k s_k - 1)^2`.
    pub fn add_slack_subtour_penalty(
        &mut self,
        subset: &[usize],
        eta_prime: f64,
        eta_double_prime: f64,
    ) -> Result<CutPenaltyNote> {
        let subset = checked_subset(self, subset)?;
        if !(eta_prime >= 0.0 && eta_double_prime >= 0.0) {
            return Err(Error::Precondition("slack penalty weights must be >= 0".into()));
        }
        let cut = self.edge_set().expect("checked above").cut_vars(&subset);
        let m = subset.len();
        let first = self.push_vars(m);
        let mut terms: Vec<(usize, f64)> = cut.iter().map(|&v| (v, 1.0)).collect();
        terms.extend((0..m).map(|k| (first + k, -2.0 * (k + 1) as f64)));
        self.add_squared_linear(eta_prime, 0.0, &terms);
        let slack: Vec<(usize, f64)> = (0..m).map(|k| (first + k, 1.0)).collect();
        self.add_squared_linear(eta_double_prime, -1.0, &slack);
        if let VariableMap::Edge(set) = self.varmap_mut() {
            set.slack_blocks.push(SlackBlock {
                subset,
                first_var: first,
                count: m,
                eta_prime,
                eta_double_prime,
            });
        }
        Ok(CutPenaltyNote {
            cut_edges: cut.len(),
            vacuous: cut.is_empty(),
        })
    }
}

#[cfg(test)]
mod tests {
    use crate::encoding::{encode_edge, encode_permutation, PenaltyWeights, QuadraticModel};
    use crate::error::Error;
    use crate::instances::{generate_instance, TspInstance};

    fn setup() -> (TspInstance, QuadraticModel, PenaltyWeights) {
        let inst = generate_instance(6, 3).unwrap();
        let w = PenaltyWeights::defaults_for(&inst);
        let m = encode_edge(&inst, &w, None).unwrap();
        (inst, m, w)
    }

    /// Configuration selecting `k` edges across the {0,1,2} cut and nothing else.
    fn with_cut_edges(m: &QuadraticModel, k: usize) -> Vec<bool> {
        let set = m.edge_set().unwrap();
        let cut = [(0, 3), (1, 4), (2, 5), (0, 4), (1, 5), (2, 3)];
        set.config_for_edges(&cut[..k], m.num_vars()).unwrap()
    }

    fn added(before: &QuadraticModel, after: &QuadraticModel, cfg: &[bool]) -> f64 {
        let mut c = cfg.to_vec();
        c.resize(after.num_vars(), false);
        after.energy(&c) - before.energy(&cfg[..before.num_vars()])
    }

    #[test]
    fn target_two_penalty_values() {
        let (_, base, _) = setup();
        let mut m = base.clone();
        let eta_p = 1.5;
        let note = m.add_subtour_penalty(&[0, 1, 2], 2, eta_p).unwrap();
        assert_eq!(note.cut_edges, 9);
        assert!(!note.vacuous);
        assert!(added(&base, &m, &with_cut_edges(&base, 2)).abs() < 1e-12);
        assert!((added(&base, &m, &with_cut_edges(&base, 0)) - 4.0 * eta_p).abs() < 1e-12);
        assert!((added(&base, &m, &with_cut_edges(&base, 4)) - 4.0 * eta_p).abs() < 1e-12);
    }

    #[test]
    fn target_three_favours_two_and_four_equally() {
        let (_, base, _) = setup();
        let mut m = base.clone();
        m.add_subtour_penalty(&[0, 1, 2], 3, 2.0).unwrap();
        let two = added(&base, &m, &with_cut_edges(&base, 2));
        let four = added(&base, &m, &with_cut_edges(&base, 4));
        assert!((two - 2.0).abs() < 1e-12);
        assert!((four - 2.0).abs() < 1e-12);
    }

    #[test]
    fn slack_penalty_zero_on_matching_slack() {
        let (_, base, _) = setup();
        let mut m = base.clone();
        let (ep, epp) = (1.25, 3.0);
        m.add_slack_subtour_penalty(&[0, 1, 2], ep, epp).unwrap();
        assert_eq!(m.num_vars(), base.num_vars() + 3);
        let s0 = base.num_vars();

        let mut c = with_cut_edges(&base, 2);
        c.resize(m.num_vars(), false);
        let all_zero = m.energy(&c) - base.energy(&c[..s0]);
        assert!((all_zero - (4.0 * ep + epp)).abs() < 1e-12);
        c[s0] = true;
        assert!((m.energy(&c) - base.energy(&c[..s0])).abs() < 1e-12);

        let mut c = with_cut_edges(&base, 4);
        c.resize(m.num_vars(), false);
        c[s0 + 1] = true;
        assert!((m.energy(&c) - base.energy(&c[..s0])).abs() < 1e-12);
    }

    #[test]
    fn permutation_models_are_rejected() {
        let (inst, _, w) = setup();
        let mut m = encode_permutation(&inst, &w, true).unwrap();
        assert!(matches!(m.add_subtour_penalty(&[0, 1, 2], 2, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn bad_subsets_and_targets() {
        let (_, mut m, _) = setup();
        assert!(m.add_subtour_penalty(&[], 2, 1.0).is_err());
        assert!(m.add_subtour_penalty(&[0, 1, 2, 3, 4, 5], 2, 1.0).is_err());
        assert!(m.add_subtour_penalty(&[0, 0, 1], 2, 1.0).is_err());
        assert!(m.add_subtour_penalty(&[0, 1, 2], 4, 1.0).is_err());
        assert!(m.edge_set().unwrap().constraints.is_empty());
    }

    #[test]
    fn fully_truncated_cut_is_vacuous() {
        use crate::instances::City;
        // Two clusters of three; with L = 2 every city keeps only its cluster mates.
        let pts = [(0.1, 0.1), (0.12, 0.1), (0.1, 0.12), (0.8, 0.8), (0.82, 0.8), (0.8, 0.82)];
        let inst = TspInstance::from_cities(pts.iter().map(|&(x, y)| City { x, y }).collect(), 0).unwrap();
        let w = PenaltyWeights::defaults_for(&inst);
        let mut m = encode_edge(&inst, &w, Some(2)).unwrap();
        let note = m.add_subtour_penalty(&[0, 1, 2], 2, 1.0).unwrap();
        assert!(note.vacuous);
        assert_eq!(note.cut_edges, 0);
    }
}
