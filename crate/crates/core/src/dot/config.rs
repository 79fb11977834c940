use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framelet::ChannelKey;

/// Strategy for the U-subproblem linear system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum USolve {
    /// Dense Cholesky up to [`crate::graph::DENSE_SOLVE_LIMIT`] nodes, CG above.
    #[default]
    Auto,
    Cholesky,
    ConjugateGradient,
    /// First-order Neumann expansion around the diagonal part of the system.
    /// Accurate only when the coupling term is small relative to the diagonal.
    TaylorApprox,
}

/// Row threshold used in the E-update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EThreshold {
    /// 1/μ₁ for every row.
    #[default]
    Uniform,
    /// λ₁·d_i/μ₁, the exact prox of the degree-weighted group norm.
    DegreeWeighted,
}

/// Order of the primal block updates inside one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    /// U, Y, Z, E, Q. Each multiplier is updated with the blocks its prox
    /// step saw.
    #[default]
    ProxConsistent,
    /// U, Z, E, Y, Q.
    Listed,
}

/// How the Y-subproblem treats the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum YDiagonal {
    /// Unconstrained minimizer B·M⁻¹. The diagonal of Λ₄ is then free to
    /// grow past 1.
    Free,
    /// Minimizer restricted to diag(Y) = 0.
    #[default]
    Zero,
}

/// Explicit weight for one framelet channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelWeight {
    pub k: usize,
    pub l: usize,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub nu0: f64,
    /// Overrides the geometric ν schedule channel by channel.
    pub nu: Option<Vec<ChannelWeight>>,
    pub rho: f64,
    pub mu_init: [f64; 4],
    pub mu_max: [f64; 4],
    pub max_iter: usize,
    pub u_solve: USolve,
    pub e_threshold_mode: EThreshold,
    pub sweep_order: SweepOrder,
    pub y_diagonal: YDiagonal,
    pub tol_residual: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda1: 1.0,
            lambda2: 1.0,
            nu0: 1.0,
            nu: None,
            rho: 1.1,
            mu_init: [1.0; 4],
            mu_max: [1e6; 4],
            max_iter: 10,
            u_solve: USolve::Auto,
            e_threshold_mode: EThreshold::Uniform,
            sweep_order: SweepOrder::ProxConsistent,
            y_diagonal: YDiagonal::Zero,
            tol_residual: 1e-2,
        }
    }
}

/// Largest node count for the dense n×n self-expression blocks.
pub const DENSE_STRUCTURE_LIMIT: usize = 5000;
pub const CG_TOL: f64 = 1e-8;

impl SolverConfig {
    /// Collects every violated constraint instead of stopping at the first.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.lambda1 > 0.0) {
            out.push(format!("lambda1 must be positive, got {}", self.lambda1));
        }
        if !(self.lambda2 > 0.0) {
            out.push(format!("lambda2 must be positive, got {}", self.lambda2));
        }
        if !(self.nu0 >= 0.0) {
            out.push(format!("nu0 must be nonnegative, got {}", self.nu0));
        }
        if let Some(nu) = &self.nu {
            for w in nu.iter().filter(|w| !(w.nu >= 0.0)) {
                out.push(format!("nu for channel ({}, {}) must be nonnegative, got {}", w.k, w.l, w.nu));
            }
        }
        if !(self.rho >= 1.0) {
            out.push(format!("rho must be at least 1, got {}", self.rho));
        }
        for i in 0..4 {
            if !(self.mu_init[i] > 0.0) {
                out.push(format!("mu_init[{i}] must be positive, got {}", self.mu_init[i]));
            }
            if !(self.mu_init[i] <= self.mu_max[i]) {
                out.push(format!(
                    "mu_init[{i}] = {} exceeds mu_max[{i}] = {}",
                    self.mu_init[i], self.mu_max[i]
                ));
            }
        }
        if !(self.tol_residual > 0.0) {
            out.push(format!("tol_residual must be positive, got {}", self.tol_residual));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(problems.join("; ")))
        }
    }

    /// ν for one channel: 0 on the low pass, 4^{−l−1}·ν₀ on high passes,
    /// unless overridden.
    pub fn nu_for(&self, key: ChannelKey) -> f64 {
        if let Some(w) = self.nu.iter().flatten().find(|w| (w.k, w.l) == key) {
            return w.nu;
        }
        let (k, l) = key;
        if k == 0 {
            0.0
        } else {
            0.25f64.powi(l as i32 + 1) * self.nu0
        }
    }

    /// Row threshold for the E-update given the current μ₁.
    pub fn e_thresholds(&self, degrees: &[f64], mu1: f64) -> Vec<f64> {
        match self.e_threshold_mode {
            EThreshold::Uniform => vec![1.0 / mu1; degrees.len()],
            EThreshold::DegreeWeighted => degrees.iter().map(|d| self.lambda1 * d / mu1).collect(),
        }
    }

    /// Dual bound on ‖Λ₁[i,:]‖₂ implied by the E threshold.
    pub fn lambda1_row_bounds(&self, degrees: &[f64]) -> Vec<f64> {
        self.e_thresholds(degrees, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn all_problems_reported() {
        let cfg = SolverConfig {
            lambda1: 0.0,
            rho: 0.5,
            mu_init: [1.0, 1.0, 1.0, 2e6],
            ..SolverConfig::default()
        };
        let p = cfg.problems();
        assert_eq!(p.len(), 3, "{p:?}");
    }

    #[test]
    fn nu_schedule() {
        let cfg = SolverConfig {
            nu0: 16.0,
            ..SolverConfig::default()
        };
        assert_eq!(cfg.nu_for((0, 2)), 0.0);
        assert_eq!(cfg.nu_for((1, 1)), 1.0);
        assert_eq!(cfg.nu_for((1, 2)), 0.25);
        let over = SolverConfig {
            nu: Some(vec![ChannelWeight { k: 1, l: 2, nu: 3.0 }]),
            ..cfg
        };
        assert_eq!(over.nu_for((1, 2)), 3.0);
        assert_eq!(over.nu_for((1, 1)), 1.0);
    }

    #[test]
    fn json_round_trip_with_partial_document() {
        let cfg: SolverConfig = serde_json::from_str(r#"{"lambda2": 4.0, "u_solve": "cholesky"}"#).unwrap();
        assert_eq!(cfg.lambda2, 4.0);
        assert_eq!(cfg.u_solve, USolve::Cholesky);
        assert_eq!(cfg.max_iter, 10);
        let back: SolverConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
