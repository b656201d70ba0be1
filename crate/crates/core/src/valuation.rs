//! Positive measures on lattices and order-preserving regrades.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Element, Lattice, LatticeDoc, LatticeError, ProductLattice};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValuationError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("atom `{label}` has value {value}; measures must be finite and strictly positive")]
    NonPositive { label: String, value: f64 },
    #[error("expected {expected} atom values, got {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("no value given for atom `{0}`")]
    MissingAtom(String),
    #[error("value {0} lies outside the regrade's domain")]
    Domain(f64),
    #[error("invalid regrade: {0}")]
    InvalidRegrade(String),
}

/// A strictly positive valuation: one value per atom, elements valued by
/// summing their atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    lattice: Arc<Lattice>,
    values: Vec<f64>,
}

impl Measure {
    pub fn new(lattice: Arc<Lattice>, values: Vec<f64>) -> Result<Self, ValuationError> {
        if values.len() != lattice.atom_count() {
            return Err(ValuationError::WrongLength {
                expected: lattice.atom_count(),
                found: values.len(),
            });
        }
        for (label, &v) in lattice.labels().iter().zip(&values) {
            if !(v.is_finite() && v > 0.0) {
                return Err(ValuationError::NonPositive {
                    label: label.clone(),
                    value: v,
                });
            }
        }
        Ok(Measure { lattice, values })
    }

    /// Every atom valued 1.
    pub fn uniform(lattice: Arc<Lattice>) -> Self {
        let n = lattice.atom_count();
        Measure {
            lattice,
            values: vec![1.0; n],
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn lattice_arc(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn atom_values(&self) -> &[f64] {
        &self.values
    }

    /// `m(x)`: the sum of atom values over `x`; `m(⊥) = 0`.
    pub fn value(&self, x: &Element) -> Result<f64, ValuationError> {
        self.lattice.check(x)?;
        Ok(x.atoms().map(|i| self.values[i]).sum())
    }

    /// `m(x ∨ y) + m(x ∧ y) − m(x) − m(y)`, which the sum rule makes zero.
    pub fn check_inclusion_exclusion(
        &self,
        x: &Element,
        y: &Element,
    ) -> Result<f64, ValuationError> {
        let join = x.join(y)?;
        let meet = x.meet(y)?;
        Ok(self.value(&join)? + self.value(&meet)? - self.value(x)? - self.value(y)?)
    }

    /// Checks that every strictly ordered pair `x < y` has `m(x) < m(y)`.
    pub fn check_fidelity(
        &self,
        pairs: &[(Element, Element)],
    ) -> Result<FidelityReport, ValuationError> {
        let mut report = FidelityReport::default();
        for (k, (x, y)) in pairs.iter().enumerate() {
            if !x.lt(y)? {
                continue;
            }
            report.strict_pairs += 1;
            let (vx, vy) = (self.value(x)?, self.value(y)?);
            if vx >= vy {
                report.violations.push(FidelityViolation {
                    pair_index: k,
                    lower_value: vx,
                    upper_value: vy,
                });
            }
        }
        Ok(report)
    }

    pub fn to_doc(&self) -> MeasureDoc {
        MeasureDoc {
            lattice: self.lattice.to_doc(),
            values: self
                .lattice
                .labels()
                .iter()
                .cloned()
                .zip(self.values.iter().copied())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FidelityReport {
    pub strict_pairs: usize,
    pub violations: Vec<FidelityViolation>,
}

impl FidelityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityViolation {
    pub pair_index: usize,
    pub lower_value: f64,
    pub upper_value: f64,
}

/// JSON form: `{"lattice": {"atoms": [...]}, "values": {"a1": 1.0, ...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDoc {
    pub lattice: LatticeDoc,
    pub values: BTreeMap<String, f64>,
}

impl TryFrom<MeasureDoc> for Measure {
    type Error = ValuationError;

    fn try_from(doc: MeasureDoc) -> Result<Self, Self::Error> {
        let lattice = Lattice::try_from(doc.lattice)?;
        for label in doc.values.keys() {
            lattice.index_of(label)?;
        }
        let values = lattice
            .labels()
            .iter()
            .map(|l| {
                doc.values
                    .get(l)
                    .copied()
                    .ok_or_else(|| ValuationError::MissingAtom(l.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Measure::new(Arc::new(lattice), values)
    }
}

/// Measure on a direct product: composite atom `(i, j)` gets `m1(aᵢ)·m2(bⱼ)`.
pub fn product_measure(
    m1: &Measure,
    m2: &Measure,
    p: &ProductLattice,
) -> Result<Measure, ValuationError> {
    for (m, factor) in [(m1, p.left()), (m2, p.right())] {
        if m.lattice() != factor {
            return Err(LatticeError::DimensionMismatch {
                expected: factor.atom_count(),
                found: m.lattice().atom_count(),
            }
            .into());
        }
    }
    let values = m1
        .values
        .iter()
        .flat_map(|&a| m2.values.iter().map(move |&b| a * b))
        .collect();
    Measure::new(Arc::new(p.lattice().clone()), values)
}

/// A monotone piecewise-linear table through `(x, Θ(x))` knots.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl MonotoneTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, ValuationError> {
        if points.len() < 2 {
            return Err(ValuationError::InvalidRegrade(
                "a table needs at least two knots".into(),
            ));
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        let strictly_up = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) || !strictly_up(&xs) || !strictly_up(&ys) {
            return Err(ValuationError::InvalidRegrade(
                "table knots must be finite and strictly increasing in both coordinates".into(),
            ));
        }
        Ok(MonotoneTable { xs, ys })
    }

    fn eval(&self, x: f64) -> Result<f64, ValuationError> {
        let (lo, hi) = (self.xs[0], *self.xs.last().unwrap());
        if !(lo..=hi).contains(&x) {
            return Err(ValuationError::Domain(x));
        }
        let k = self
            .xs
            .partition_point(|&k| k <= x)
            .clamp(1, self.xs.len() - 1);
        let (x0, x1, y0, y1) = (self.xs[k - 1], self.xs[k], self.ys[k - 1], self.ys[k]);
        Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }

    /// Inverse by bisection on the monotone interpolant.
    fn invert(&self, y: f64) -> Result<f64, ValuationError> {
        let (ylo, yhi) = (self.ys[0], *self.ys.last().unwrap());
        if !(ylo..=yhi).contains(&y) {
            return Err(ValuationError::Domain(y));
        }
        let (mut lo, mut hi) = (self.xs[0], *self.xs.last().unwrap());
        // Runs to float resolution, well inside the 1e-12 round-trip tolerance.
        for _ in 0..2100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid)? < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// A strictly increasing scalar map `Θ` together with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub enum Regrade {
    Identity,
    /// `Θ(x) = k·x`, `k > 0`.
    Linear {
        k: f64,
    },
    /// `Θ(x) = x^p` on `x > 0`, `p > 0`.
    Power {
        p: f64,
    },
    /// `Θ(x) = exp(k·x)`, `k > 0`.
    Exponential {
        k: f64,
    },
    /// `Θ(x) = ln x` on `x > 0`.
    Logarithmic,
    Table(MonotoneTable),
}

impl Regrade {
    pub fn linear(k: f64) -> Result<Self, ValuationError> {
        Self::positive_param(k, "linear scale").map(|k| Regrade::Linear { k })
    }

    pub fn power(p: f64) -> Result<Self, ValuationError> {
        Self::positive_param(p, "power").map(|p| Regrade::Power { p })
    }

    pub fn exponential(k: f64) -> Result<Self, ValuationError> {
        Self::positive_param(k, "exponential rate").map(|k| Regrade::Exponential { k })
    }

    fn positive_param(v: f64, what: &str) -> Result<f64, ValuationError> {
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(ValuationError::InvalidRegrade(format!(
                "{what} must be positive, got {v}"
            )))
        }
    }

    pub fn forward(&self, x: f64) -> Result<f64, ValuationError> {
        if !x.is_finite() {
            return Err(ValuationError::Domain(x));
        }
        let y = match self {
            Regrade::Identity => x,
            Regrade::Linear { k } => k * x,
            Regrade::Power { p } if x > 0.0 => x.powf(*p),
            Regrade::Exponential { k } => (k * x).exp(),
            Regrade::Logarithmic if x > 0.0 => x.ln(),
            Regrade::Table(t) => t.eval(x)?,
            Regrade::Power { .. } | Regrade::Logarithmic => return Err(ValuationError::Domain(x)),
        };
        if y.is_finite() {
            Ok(y)
        } else {
            Err(ValuationError::Domain(x))
        }
    }

    pub fn inverse(&self, y: f64) -> Result<f64, ValuationError> {
        if !y.is_finite() {
            return Err(ValuationError::Domain(y));
        }
        let x = match self {
            Regrade::Identity => y,
            Regrade::Linear { k } => y / k,
            Regrade::Power { p } if y > 0.0 => y.powf(p.recip()),
            Regrade::Exponential { k } if y > 0.0 => y.ln() / k,
            Regrade::Logarithmic => y.exp(),
            Regrade::Table(t) => t.invert(y)?,
            Regrade::Power { .. } | Regrade::Exponential { .. } => {
                return Err(ValuationError::Domain(y))
            }
        };
        if x.is_finite() {
            Ok(x)
        } else {
            Err(ValuationError::Domain(y))
        }
    }
}

/// `x ⊕ y = Θ⁻¹(Θ(x) + Θ(y))`.
pub fn regrade_combine(x: f64, y: f64, theta: &Regrade) -> Result<f64, ValuationError> {
    theta.inverse(theta.forward(x)? + theta.forward(y)?)
}
