//! Measure assignment by constrained minimization of the divergence.
//!
//! Minimizes `H(w | u)` subject to linear equalities `Σᵢ f_{k,i} wᵢ = F_k`.
//! Stationarity gives `wᵢ = uᵢ exp(Σₖ λₖ f_{k,i})`; the multipliers are found
//! by damped Newton iteration on the convex dual
//!
//! ```text
//! φ(λ) = Σᵢ wᵢ(λ) − Σₖ λₖ F_k
//! ```
//!
//! whose gradient is the constraint residual and whose Hessian is
//! `J_{kl} = Σᵢ f_{k,i} f_{l,i} wᵢ`. Redundant constraints make `J` singular,
//! so the Newton step is the minimum-norm least-squares solution.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::potential::{divergence, PotentialError};

/// Exponent beyond which `exp` is treated as overflow.
const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaxentError {
    #[error("source entry {index} is {value}; must be finite and strictly positive")]
    InvalidSource { index: usize, value: f64 },
    #[error("constraint {index}: {reason}")]
    InvalidConstraint { index: usize, reason: String },
    #[error("no convergence after {iterations} iterations (max constraint residual {residual:e}); constraints may be infeasible")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        residuals: Vec<f64>,
    },
    #[error("non-finite intermediate ({0}); try rescaling the constraints")]
    Numeric(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// `Σᵢ coeffs[i]·wᵢ = target`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    coeffs: Vec<f64>,
    target: f64,
}

impl LinearConstraint {
    pub fn new(coeffs: Vec<f64>, target: f64) -> Result<Self, MaxentError> {
        let bad = |reason: &str| MaxentError::InvalidConstraint {
            index: 0,
            reason: reason.to_string(),
        };
        if coeffs.iter().any(|c| !c.is_finite()) || !target.is_finite() {
            return Err(bad("coefficients and target must be finite"));
        }
        if coeffs.iter().all(|&c| c == 0.0) {
            return Err(bad("coefficients are all zero"));
        }
        Ok(LinearConstraint { coeffs, target })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    /// `Σᵢ coeffs[i]·w[i]`.
    pub fn apply(&self, w: &[f64]) -> f64 {
        self.coeffs.iter().zip(w).map(|(c, x)| c * x).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub w: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub iterations: usize,
    pub max_constraint_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 100,
        }
    }
}

fn validate(u: &[f64], constraints: &[LinearConstraint]) -> Result<(), MaxentError> {
    if let Some(index) = u.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(MaxentError::InvalidSource {
            index,
            value: u[index],
        });
    }
    for (index, c) in constraints.iter().enumerate() {
        if c.coeffs.len() != u.len() {
            return Err(MaxentError::InvalidConstraint {
                index,
                reason: format!("{} coefficients for {} atoms", c.coeffs.len(), u.len()),
            });
        }
    }
    Ok(())
}

/// `wᵢ = uᵢ exp(Σₖ λₖ f_{k,i})`.
pub fn primal_from_dual(
    u: &[f64],
    constraints: &[LinearConstraint],
    lambdas: &[f64],
) -> Result<Vec<f64>, MaxentError> {
    u.iter()
        .enumerate()
        .map(|(i, &ui)| {
            let s: f64 = constraints
                .iter()
                .zip(lambdas)
                .map(|(c, l)| l * c.coeffs[i])
                .sum();
            if !s.is_finite() || s > MAX_EXPONENT {
                return Err(MaxentError::Numeric(format!("exponent {s} at atom {i}")));
            }
            Ok(ui * s.exp())
        })
        .collect()
}

/// Dual gradient (constraint residuals at `w(λ)`) and its Jacobian.
pub fn dual_gradient(
    u: &[f64],
    constraints: &[LinearConstraint],
    lambdas: &[f64],
) -> Result<(Vec<f64>, DMatrix<f64>), MaxentError> {
    validate(u, constraints)?;
    if lambdas.len() != constraints.len() || lambdas.iter().any(|l| !l.is_finite()) {
        return Err(MaxentError::Numeric(
            "multipliers must be finite, one per constraint".into(),
        ));
    }
    let w = primal_from_dual(u, constraints, lambdas)?;
    Ok(gradient_and_jacobian(&w, constraints))
}

fn gradient_and_jacobian(w: &[f64], constraints: &[LinearConstraint]) -> (Vec<f64>, DMatrix<f64>) {
    let k = constraints.len();
    let values = constraints.iter().map(|c| c.apply(w) - c.target).collect();
    let jac = DMatrix::from_fn(k, k, |a, b| {
        let (fa, fb) = (&constraints[a].coeffs, &constraints[b].coeffs);
        // summed in a fixed order so the matrix is exactly symmetric
        let (fa, fb) = if a <= b { (fa, fb) } else { (fb, fa) };
        fa.iter()
            .zip(fb)
            .zip(w)
            .map(|((x, y), wi)| x * y * wi)
            .sum()
    });
    (values, jac)
}

fn dual_objective(w: &[f64], constraints: &[LinearConstraint], lambdas: &[f64]) -> f64 {
    w.iter().sum::<f64>()
        - constraints
            .iter()
            .zip(lambdas)
            .map(|(c, l)| l * c.target)
            .sum::<f64>()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimum-divergence measure from source `u` under equality constraints.
pub fn solve(
    u: &[f64],
    constraints: &[LinearConstraint],
    opts: SolverOptions,
) -> Result<SolveResult, MaxentError> {
    validate(u, constraints)?;
    let k = constraints.len();
    let mut lambdas = vec![0.0; k];
    let mut w = u.to_vec();
    let (mut g, mut jac) = gradient_and_jacobian(&w, constraints);
    let mut residual = max_abs(&g);
    let mut iterations = 0;

    while residual > opts.tol {
        if iterations >= opts.max_iter {
            return Err(MaxentError::NoConvergence {
                iterations,
                residual,
                residuals: g,
            });
        }
        iterations += 1;

        let svd = jac.clone().svd(true, true);
        let eps = 1e-13 * svd.singular_values.max().max(f64::MIN_POSITIVE);
        let step = svd
            .solve(&(-DVector::from_column_slice(&g)), eps)
            .map_err(|e| MaxentError::Numeric(e.to_string()))?;
        if step.iter().any(|s| !s.is_finite()) {
            return Err(MaxentError::Numeric("Newton step".into()));
        }

        let phi = dual_objective(&w, constraints, &lambdas);
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = lambdas
                .iter()
                .zip(step.iter())
                .map(|(l, s)| l + scale * s)
                .collect();
            if let Ok(tw) = primal_from_dual(u, constraints, &trial) {
                let (tg, tj) = gradient_and_jacobian(&tw, constraints);
                let tphi = dual_objective(&tw, constraints, &trial);
                // Near the optimum φ stalls at rounding level; a smaller
                // residual is then the better acceptance signal.
                if tphi.is_finite() && (tphi < phi || max_abs(&tg) < residual) {
                    lambdas = trial;
                    w = tw;
                    g = tg;
                    jac = tj;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        residual = max_abs(&g);
        if !accepted {
            return Err(MaxentError::NoConvergence {
                iterations,
                residual,
                residuals: g,
            });
        }
    }

    Ok(SolveResult {
        w,
        lambdas,
        iterations,
        max_constraint_residual: residual,
    })
}

/// `H(w | u)` of a solution, for reporting.
pub fn solution_divergence(result: &SolveResult, u: &[f64]) -> Result<f64, MaxentError> {
    Ok(divergence(&result.w, u)?)
}

/// Row-sum and column-sum constraints for an `rows × cols` grid laid out row-major.
pub fn marginal_constraints(
    row_targets: &[f64],
    col_targets: &[f64],
) -> Result<Vec<LinearConstraint>, MaxentError> {
    let (n, m) = (row_targets.len(), col_targets.len());
    let mut out = Vec::with_capacity(n + m);
    for (i, &t) in row_targets.iter().enumerate() {
        let coeffs = (0..n * m)
            .map(|k| if k / m == i { 1.0 } else { 0.0 })
            .collect();
        out.push(LinearConstraint::new(coeffs, t)?);
    }
    for (j, &t) in col_targets.iter().enumerate() {
        let coeffs = (0..n * m)
            .map(|k| if k % m == j { 1.0 } else { 0.0 })
            .collect();
        out.push(LinearConstraint::new(coeffs, t)?);
    }
    Ok(out)
}
