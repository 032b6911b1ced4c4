use serde::{Deserialize, Serialize};

use crate::error::{Result, ShamError};
use crate::solver::switching_index;

/// Empirical surrogates for the constants appearing in the rate bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConstants {
    /// Largest observed `||grad f||` along the iterates.
    pub b_f: f64,
    /// Largest observed constraint subgradient norm.
    pub b_h: f64,
    /// Linear regularity constant lower estimate.
    pub c: f64,
    /// `m min_j p_j` of the sampler.
    pub rho: f64,
}

/// Informational report; none of these values feed back into the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstantsReport {
    pub b_f_emp: f64,
    pub b_h_emp: f64,
    pub c_emp: f64,
    pub rho: f64,
    pub beta: f64,
    pub gamma: f64,
    pub m: usize,
    /// `B^2`; absent when `beta` is outside `(0, 1)` where the bound is stated.
    pub b_sq: Option<f64>,
    /// `1 - mu / L_f`.
    pub theta: f64,
    /// Switching index; absent for `mu = 0`.
    pub k0: Option<i64>,
}

fn b_sq_formula(b_f: f64, b_h: f64, c: f64, rho: f64, beta: f64, gamma: f64, m: usize) -> Option<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return None;
    }
    let sampling = 1.0 + rho / (2.0 * m as f64 * c * c * b_h * b_h);
    Some(b_f * b_f * (1.0 / (1.0 - beta) + beta * (1.0 - beta) * (1.0 - gamma).powi(2) * sampling))
}

impl TheoryConstantsReport {
    /// `B^2` recomputed from the stored fields.
    pub fn recompute_b_sq(&self) -> Option<f64> {
        b_sq_formula(
            self.b_f_emp, self.b_h_emp, self.c_emp, self.rho, self.beta, self.gamma, self.m,
        )
    }
}

/// `B^2 = B_f^2 (1/(1-beta) + beta(1-beta)(1-gamma)^2 (1 + rho/(2 m c^2 B_h^2)))`,
/// `theta = 1 - mu/L_f` and `k0 = floor(2 L_f/mu - 1)`.
pub fn theory_constants(
    l_f: f64,
    mu: f64,
    m: usize,
    beta: f64,
    gamma: f64,
    emp: EmpiricalConstants,
) -> Result<TheoryConstantsReport> {
    if !(emp.c > 0.0) {
        return Err(ShamError::DegenerateConstant(format!(
            "regularity constant estimate must be positive, got {}",
            emp.c
        )));
    }
    if !(emp.b_h > 0.0) {
        return Err(ShamError::DegenerateConstant(format!(
            "subgradient bound estimate must be positive, got {}",
            emp.b_h
        )));
    }
    let k0 = if mu > 0.0 { Some(switching_index(l_f, mu)?) } else { None };
    Ok(TheoryConstantsReport {
        b_f_emp: emp.b_f,
        b_h_emp: emp.b_h,
        c_emp: emp.c,
        rho: emp.rho,
        beta,
        gamma,
        m,
        b_sq: b_sq_formula(emp.b_f, emp.b_h, emp.c, emp.rho, beta, gamma, m),
        theta: 1.0 - mu / l_f,
        k0,
    })
}
