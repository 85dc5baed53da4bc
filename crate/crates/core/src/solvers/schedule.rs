use serde::{Deserialize, Serialize};

use crate::encoding::QuadraticModel;
use crate::error::{Error, Result};

pub const DEFAULT_SWEEPS: usize = 1000;
pub const DEFAULT_SLICES: usize = 32;

/// Annealing parameters. Unset temperatures and fields are filled from the
/// model's energy scale `T0 = max_i (|h_i| + sum_j |J_ij|)` by
/// [`resolve`](Self::resolve):
///
/// * SA: `T` geometric from `T0` to `1e-3 T0`;
/// * SQA: `Gamma` linear from `3 T0` to `1e-4 T0`, `P = 32`, `beta = 64 / T0`,
///   problem weight `B` ramping linearly to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub sweeps: usize,
    pub t0: Option<f64>,
    pub tf: Option<f64>,
    pub gamma0: Option<f64>,
    pub gammaf: Option<f64>,
    pub slices: usize,
    pub beta: Option<f64>,
    /// Record the best energy after every sweep.
    pub trace: bool,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            sweeps: DEFAULT_SWEEPS,
            t0: None,
            tf: None,
            gamma0: None,
            gammaf: None,
            slices: DEFAULT_SLICES,
            beta: None,
            trace: false,
        }
    }
}

impl AnnealSchedule {
    pub fn with_sweeps(sweeps: usize) -> Self {
        AnnealSchedule {
            sweeps,
            ..Default::default()
        }
    }

    pub fn resolve(&self, model: &QuadraticModel) -> Result<ResolvedSchedule> {
        let scale = model.max_local_field();
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let r = ResolvedSchedule {
            sweeps: self.sweeps,
            t0: self.t0.unwrap_or(scale),
            tf: self.tf.unwrap_or(1e-3 * self.t0.unwrap_or(scale)),
            gamma0: self.gamma0.unwrap_or(3.0 * scale),
            gammaf: self.gammaf.unwrap_or(1e-4 * scale),
            slices: self.slices,
            beta: self.beta.unwrap_or(64.0 / scale),
            trace: self.trace,
        };
        r.validate()?;
        Ok(r)
    }
}

/// A schedule with every parameter pinned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSchedule {
    pub sweeps: usize,
    pub t0: f64,
    pub tf: f64,
    pub gamma0: f64,
    pub gammaf: f64,
    pub slices: usize,
    pub beta: f64,
    pub trace: bool,
}

impl ResolvedSchedule {
    fn validate(&self) -> Result<()> {
        if self.sweeps < 1 {
            return Err(Error::Precondition("schedule needs at least one sweep".into()));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.t0) || !positive(self.tf) || self.tf > self.t0 {
            return Err(Error::Precondition(format!(
                "temperatures must satisfy 0 < tf <= t0 (t0={}, tf={})",
                self.t0, self.tf
            )));
        }
        if !positive(self.gamma0) || !positive(self.gammaf) || self.gammaf > self.gamma0 {
            return Err(Error::Precondition(format!(
                "transverse field must satisfy 0 < gammaf <= gamma0 (gamma0={}, gammaf={})",
                self.gamma0, self.gammaf
            )));
        }
        if !positive(self.beta) {
            return Err(Error::Precondition(format!("beta must be positive, got {}", self.beta)));
        }
        Ok(())
    }

    /// Temperature for sweep `s` of `sweeps`.
    pub fn temperature(&self, s: usize) -> f64 {
        if self.sweeps == 1 {
            return self.tf;
        }
        let f = s as f64 / (self.sweeps - 1) as f64;
        self.t0 * (self.tf / self.t0).powf(f)
    }

    pub fn gamma(&self, s: usize) -> f64 {
        if self.sweeps == 1 {
            return self.gammaf;
        }
        let f = s as f64 / (self.sweeps - 1) as f64;
        self.gamma0 + (self.gammaf - self.gamma0) * f
    }

    /// Problem weight `B` for sweep `s`, rising linearly to one.
    pub fn problem_weight(&self, s: usize) -> f64 {
        (s + 1) as f64 / self.sweeps as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::VariableMap;

    fn model() -> QuadraticModel {
        let mut m = QuadraticModel::new(2, VariableMap::Generic);
        m.add_linear(0, -2.0);
        m.add_quadratic(0, 1, 1.0);
        m
    }

    #[test]
    fn defaults_scale_with_model() {
        let r = AnnealSchedule::default().resolve(&model()).unwrap();
        assert_eq!(r.t0, 3.0);
        assert!((r.tf - 3e-3).abs() < 1e-15);
        assert_eq!(r.gamma0, 9.0);
        assert_eq!(r.beta, 64.0 / 3.0);
        assert_eq!(r.temperature(0), r.t0);
        assert!((r.temperature(r.sweeps - 1) - r.tf).abs() < 1e-12);
        assert!((0..r.sweeps - 1).all(|s| r.temperature(s + 1) <= r.temperature(s)));
        assert!((0..r.sweeps - 1).all(|s| r.gamma(s + 1) <= r.gamma(s)));
        assert_eq!(r.problem_weight(r.sweeps - 1), 1.0);
    }

    #[test]
    fn invalid_schedules_rejected() {
        let m = model();
        assert!(AnnealSchedule::with_sweeps(0).resolve(&m).is_err());
        let s = AnnealSchedule {
            t0: Some(1.0),
            tf: Some(2.0),
            ..Default::default()
        };
        assert!(s.resolve(&m).is_err());
        let s = AnnealSchedule {
            gammaf: Some(-1.0),
            ..Default::default()
        };
        assert!(s.resolve(&m).is_err());
    }
}
