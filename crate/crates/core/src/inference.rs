//! Probability as a ratio of measures.
//!
//! `Pr(x | t) = m(x ∧ t) / m(t)` for any context `t ≠ ⊥`. Probabilities are
//! never stored; they are evaluated from the measure on demand.

use thiserror::Error;

use crate::lattice::{Element, LatticeError};
use crate::valuation::{Measure, ValuationError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error("conditioning context has zero measure")]
    UndefinedContext,
    #[error("elements do not form a chain x ≤ y ≤ z")]
    NotAChain,
    #[error("datum has zero evidence under the prior")]
    ImpossibleDatum,
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("invalid likelihood: {0}")]
    InvalidLikelihood(String),
}

impl From<LatticeError> for InferenceError {
    fn from(e: LatticeError) -> Self {
        InferenceError::Valuation(e.into())
    }
}

/// A measure together with a conditioning context.
#[derive(Debug, Clone, PartialEq)]
pub struct Bivaluation {
    measure: Measure,
    context: Element,
    context_value: f64,
}

impl Bivaluation {
    pub fn new(measure: Measure, context: Element) -> Result<Self, InferenceError> {
        let context_value = measure.value(&context)?;
        if context_value <= 0.0 {
            return Err(InferenceError::UndefinedContext);
        }
        Ok(Bivaluation {
            measure,
            context,
            context_value,
        })
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn context(&self) -> &Element {
        &self.context
    }

    /// `Pr(x | t)`. Defined for any `x`, comparable with `t` or not.
    pub fn probability(&self, x: &Element) -> Result<f64, InferenceError> {
        let joint = x.meet(&self.context)?;
        Ok(self.measure.value(&joint)? / self.context_value)
    }
}

/// `Pr(x | t)` without building a [`Bivaluation`].
pub fn conditional(m: &Measure, x: &Element, t: &Element) -> Result<f64, InferenceError> {
    Bivaluation::new(m.clone(), t.clone())?.probability(x)
}

/// Residual `p(x|z) − p(x|y)·p(y|z)` of the chain-product rule for `x ≤ y ≤ z`.
pub fn check_chain_product(
    m: &Measure,
    x: &Element,
    y: &Element,
    z: &Element,
) -> Result<f64, InferenceError> {
    if !(x.leq(y)? && y.leq(z)?) {
        return Err(InferenceError::NotAChain);
    }
    let xz = conditional(m, x, z)?;
    let xy = conditional(m, x, y)?;
    let yz = conditional(m, y, z)?;
    Ok(xz - xy * yz)
}

/// Both sides of the general product rule: `(p(a∧b | c), p(a | b∧c)·p(b | c))`.
pub fn general_product(
    m: &Measure,
    a: &Element,
    b: &Element,
    c: &Element,
) -> Result<(f64, f64), InferenceError> {
    let ab = a.meet(b)?;
    let bc = b.meet(c)?;
    let lhs = conditional(m, &ab, c)?;
    let rhs = conditional(m, a, &bc)? * conditional(m, b, c)?;
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub posterior: Vec<f64>,
    pub evidence: f64,
}

/// Bayes' theorem on explicit tables.
///
/// `likelihood[d][θ]` is `Pr(datum d | θ)`; the returned posterior is
/// `likelihood[datum][θ]·prior[θ] / evidence`. The context `t` of the lattice
/// form is implicit.
pub fn bayes(
    prior: &[f64],
    likelihood: &[Vec<f64>],
    datum: usize,
) -> Result<Posterior, InferenceError> {
    if prior.is_empty() {
        return Err(InferenceError::InvalidPrior("empty".into()));
    }
    if prior.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(InferenceError::InvalidPrior(
            "entries must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = prior.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(InferenceError::InvalidPrior(format!(
            "sums to {total}, not 1"
        )));
    }
    let row = likelihood.get(datum).ok_or_else(|| {
        InferenceError::InvalidLikelihood(format!(
            "datum {datum} out of range for {} rows",
            likelihood.len()
        ))
    })?;
    for r in likelihood {
        if r.len() != prior.len() {
            return Err(InferenceError::InvalidLikelihood(format!(
                "row has {} entries, prior has {}",
                r.len(),
                prior.len()
            )));
        }
        if r.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(InferenceError::InvalidLikelihood(
                "entries must be finite and nonnegative".into(),
            ));
        }
    }
    let joint: Vec<f64> = row.iter().zip(prior).map(|(l, p)| l * p).collect();
    let evidence: f64 = joint.iter().sum();
    if evidence <= 0.0 {
        return Err(InferenceError::ImpossibleDatum);
    }
    Ok(Posterior {
        posterior: joint.iter().map(|j| j / evidence).collect(),
        evidence,
    })
}
