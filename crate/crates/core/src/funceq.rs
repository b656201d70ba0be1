//! Residual checks for the product and variational functional equations.

use num::bigint::BigInt;
use num::rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assoc::SurdValue;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FunceqError {
    #[error("invalid solution parameters: {0}")]
    InvalidSolution(String),
    #[error("non-finite intermediate value: {0}")]
    Numeric(String),
    #[error("argument must be strictly positive, got {0}")]
    Domain(f64),
    #[error("|{name}| = {value} exceeds the limit {limit}")]
    OutOfRange {
        name: &'static str,
        value: i64,
        limit: i64,
    },
}

/// `Ψ(x) = C·e^{Ax}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpSolution {
    a: f64,
    c: f64,
}

impl ExpSolution {
    pub fn new(a: f64, c: f64) -> Result<Self, FunceqError> {
        if !(a.is_finite() && a != 0.0) {
            return Err(FunceqError::InvalidSolution(format!(
                "A must be finite and nonzero, got {a}"
            )));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(FunceqError::InvalidSolution(format!(
                "C must be finite and positive, got {c}"
            )));
        }
        Ok(ExpSolution { a, c })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn psi(&self, x: f64) -> f64 {
        self.c * (self.a * x).exp()
    }

    /// The doubling step `A⁻¹·log 2`.
    pub fn doubling_step(&self) -> f64 {
        std::f64::consts::LN_2 / self.a
    }

    /// The golden step `A⁻¹·log φ`.
    pub fn golden_step(&self) -> f64 {
        golden_ratio().ln() / self.a
    }
}

pub fn golden_ratio() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

fn finite(x: f64, what: &str) -> Result<f64, FunceqError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(FunceqError::Numeric(what.to_string()))
    }
}

/// `ζ(ξ, η) = A⁻¹·log(e^{Aξ} + e^{Aη})`, evaluated without overflow.
pub fn zeta(a: f64, xi: f64, eta: f64) -> f64 {
    let (p, q) = (a * xi, a * eta);
    let hi = p.max(q);
    (hi + (-(p - q).abs()).exp().ln_1p()) / a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductResidual {
    /// `Ψ(τ+ξ) + Ψ(τ+η) − Ψ(τ+ζ)`.
    pub residual: f64,
    /// `residual / (Ψ(τ+ξ) + Ψ(τ+η))`.
    pub relative: f64,
}

/// Product-equation residual for an arbitrary `Ψ`, with `ζ` built from `A`.
pub fn product_residual_with<F: Fn(f64) -> f64>(
    psi: F,
    a: f64,
    tau: f64,
    xi: f64,
    eta: f64,
) -> Result<ProductResidual, FunceqError> {
    if ![tau, xi, eta].iter().all(|v| v.is_finite()) {
        return Err(FunceqError::Numeric("arguments must be finite".into()));
    }
    let z = finite(zeta(a, xi, eta), "zeta")?;
    let lhs = finite(psi(tau + xi) + psi(tau + eta), "psi(tau+xi) + psi(tau+eta)")?;
    let rhs = finite(psi(tau + z), "psi(tau+zeta)")?;
    let residual = lhs - rhs;
    let relative = if lhs != 0.0 {
        residual / lhs.abs()
    } else {
        residual
    };
    Ok(ProductResidual { residual, relative })
}

pub fn product_residual(
    sol: &ExpSolution,
    tau: f64,
    xi: f64,
    eta: f64,
) -> Result<ProductResidual, FunceqError> {
    product_residual_with(|x| sol.psi(x), sol.a, tau, xi, eta)
}

pub const MAX_TWO_TERM_N: i64 = 40;
pub const MAX_THREE_TERM_M: i64 = 60;

/// `Ψ(θ + n·a) − 2ⁿ·Ψ(θ)` with `a = A⁻¹·log 2`, plus the residual relative to `2ⁿ·Ψ(θ)`.
pub fn two_term_check(sol: &ExpSolution, theta: f64, n: i64) -> Result<(f64, f64), FunceqError> {
    if n.abs() > MAX_TWO_TERM_N {
        return Err(FunceqError::OutOfRange {
            name: "n",
            value: n,
            limit: MAX_TWO_TERM_N,
        });
    }
    let lhs = finite(
        sol.psi(theta + n as f64 * sol.doubling_step()),
        "psi(theta + n a)",
    )?;
    let rhs = finite(2f64.powi(n as i32) * sol.psi(theta), "2^n psi(theta)")?;
    let residual = lhs - rhs;
    Ok((residual, residual / rhs))
}

fn check_m(m: i64) -> Result<(), FunceqError> {
    if m.abs() > MAX_THREE_TERM_M {
        return Err(FunceqError::OutOfRange {
            name: "m",
            value: m,
            limit: MAX_THREE_TERM_M,
        });
    }
    Ok(())
}

/// `Ψ(θ + m·b)` from the golden-ratio closed form of the 3-term recurrence,
/// given `psi0 = Ψ(θ)` and `psi_b = Ψ(θ + b)`.
pub fn three_term_closed_form(psi0: f64, psi_b: f64, m: i64) -> Result<f64, FunceqError> {
    check_m(m)?;
    let r5 = 5f64.sqrt();
    let up = 2.0 * psi0 / (5.0 + r5) + psi_b / r5;
    let down = 2.0 * psi0 / (5.0 - r5) - psi_b / r5;
    let phi = (1.0 + r5) / 2.0;
    let conj = -2.0 / (1.0 + r5);
    finite(
        up * phi.powi(m as i32) + down * conj.powi(m as i32),
        "closed form",
    )
}

/// The same closed form evaluated exactly in `Q(√5)`.
pub fn three_term_exact(
    psi0: &BigRational,
    psi_b: &BigRational,
    m: i64,
) -> Result<SurdValue, FunceqError> {
    check_m(m)?;
    let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let r5 = SurdValue::sqrt(5);
    // 2/(5+√5) = (5−√5)/10, 2/(5−√5) = (5+√5)/10, 1/√5 = √5/5
    let two_over_plus = (SurdValue::from_integer(5) - r5.clone()).scale(&q(1, 10));
    let two_over_minus = (SurdValue::from_integer(5) + r5.clone()).scale(&q(1, 10));
    let inv_r5 = r5.scale(&q(1, 5));
    let up = two_over_plus.scale(psi0) + inv_r5.scale(psi_b);
    let down = two_over_minus.scale(psi0) - inv_r5.scale(psi_b);
    let half = q(1, 2);
    let phi = (SurdValue::one() + r5.clone()).scale(&half);
    let conj = (SurdValue::one() - r5.clone()).scale(&half);
    // φ⁻¹ = (√5−1)/2 and (−1/φ)⁻¹ = −φ
    let (phi_base, conj_base) = if m >= 0 {
        (phi, conj)
    } else {
        (
            (r5.clone() - SurdValue::one()).scale(&half),
            -(SurdValue::one() + r5).scale(&half),
        )
    };
    let e = m.unsigned_abs() as u32;
    Ok(up * phi_base.pow(e) + down * conj_base.pow(e))
}

/// `H(m) = A + B·m + C·(m log m − m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSolution {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl PotentialSolution {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, FunceqError> {
        if ![a, b, c].iter().all(|v| v.is_finite()) {
            return Err(FunceqError::InvalidSolution(
                "A, B, C must be finite".into(),
            ));
        }
        Ok(PotentialSolution { a, b, c })
    }

    pub fn value(&self, m: f64) -> Result<f64, FunceqError> {
        if !(m > 0.0) {
            return Err(FunceqError::Domain(m));
        }
        Ok(self.a + self.b * m + self.c * (m * m.ln() - m))
    }

    /// `H′(m) = B + C·log m`.
    pub fn derivative(&self, m: f64) -> Result<f64, FunceqError> {
        if !(m > 0.0) {
            return Err(FunceqError::Domain(m));
        }
        Ok(self.b + self.c * m.ln())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalCheck {
    /// `H′(mx·my) − λ(mx) − μ(my)`.
    pub residual: f64,
    /// `|FD(H) − H′| / max(|H′|, 1)` at `mx·my` by central differences.
    pub derivative_error: f64,
}

/// Checks `H′(mx·my) = λ(mx) + μ(my)` with `λ(x) = B₁ + C log x` and
/// `μ(x) = (B − B₁) + C log x`.
pub fn variational_residual(
    sol: &PotentialSolution,
    b1: f64,
    mx: f64,
    my: f64,
) -> Result<VariationalCheck, FunceqError> {
    for v in [mx, my] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(FunceqError::Domain(v));
        }
    }
    let b2 = sol.b - b1;
    let m = mx * my;
    let h1 = sol.derivative(m)?;
    let lambda = b1 + sol.c * mx.ln();
    let mu = b2 + sol.c * my.ln();
    let residual = h1 - (lambda + mu);
    let h = 1e-5 * m;
    let fd = (sol.value(m + h)? - sol.value(m - h)?) / (2.0 * h);
    let derivative_error = (fd - h1).abs() / h1.abs().max(1.0);
    Ok(VariationalCheck {
        residual,
        derivative_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyFailure {
    pub x: String,
    pub y: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    /// `f(x+y) = f(x) + f(y)` on every pair of sample points.
    pub additive: bool,
    /// `f(q·t0) = q·f(t0)` for every sample multiplier `q`.
    pub homogeneous: bool,
    pub additivity_witness: Option<CauchyFailure>,
    pub homogeneity_witness: Option<CauchyFailure>,
}

/// Exact Cauchy checks of `f` on the points `q·t0` for each multiplier `q`.
pub fn cauchy_check_with<F: Fn(&BigRational) -> BigRational>(
    f: F,
    t0: &BigRational,
    multipliers: &[BigRational],
) -> CauchyReport {
    let points: Vec<BigRational> = multipliers.iter().map(|q| q * t0).collect();
    let mut additivity_witness = None;
    'outer: for x in &points {
        for y in &points {
            let lhs = f(&(x + y));
            let rhs = f(x) + f(y);
            if lhs != rhs {
                additivity_witness = Some(failure(x, y, &lhs, &rhs));
                break 'outer;
            }
        }
    }
    let ft0 = f(t0);
    let homogeneity_witness = multipliers.iter().zip(&points).find_map(|(q, p)| {
        let lhs = f(p);
        let rhs = q * &ft0;
        (lhs != rhs).then(|| failure(q, t0, &lhs, &rhs))
    });
    CauchyReport {
        additive: additivity_witness.is_none(),
        homogeneous: homogeneity_witness.is_none(),
        additivity_witness,
        homogeneity_witness,
    }
}

fn failure(
    x: &BigRational,
    y: &BigRational,
    lhs: &BigRational,
    rhs: &BigRational,
) -> CauchyFailure {
    CauchyFailure {
        x: x.to_string(),
        y: y.to_string(),
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
    }
}

/// [`cauchy_check_with`] for the linear solution `f(t) = c·t`.
pub fn cauchy_check(
    c: &BigRational,
    t0: &BigRational,
    multipliers: &[BigRational],
) -> CauchyReport {
    cauchy_check_with(|t| c * t, t0, multipliers)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn product_examples() {
        for (a, c) in [(1.0, 1.0), (-0.7, 3.0), (2.5, 0.2)] {
            let sol = ExpSolution::new(a, c).unwrap();
            assert!((zeta(a, 0.0, 0.0) - std::f64::consts::LN_2 / a).abs() < 1e-15);
            assert!(
                product_residual(&sol, 0.0, 0.0, 0.0)
                    .unwrap()
                    .residual
                    .abs()
                    < 1e-15
            );
        }
        assert!(ExpSolution::new(0.0, 1.0).is_err());
        assert!(ExpSolution::new(1.0, -1.0).is_err());
        let big = ExpSolution::new(10.0, 1.0).unwrap();
        assert!(matches!(
            product_residual(&big, 100.0, 0.0, 0.0),
            Err(FunceqError::Numeric(_))
        ));
    }

    #[test]
    fn perturbed_solution_fails() {
        let psi = |x: f64| x.exp() + 0.01 * x;
        let worst = (-3..=3)
            .flat_map(|t| {
                (-3..=3).flat_map(move |x| (-3..=3).map(move |e| (t as f64, x as f64, e as f64)))
            })
            .map(|(t, x, e)| {
                product_residual_with(psi, 1.0, t, x, e)
                    .unwrap()
                    .residual
                    .abs()
            })
            .fold(0.0, f64::max);
        assert!(worst > 1e-4);
    }

    #[test]
    fn two_term_examples() {
        let sol = ExpSolution::new(1.0, 1.0).unwrap();
        assert_eq!(two_term_check(&sol, 0.3, 0).unwrap().0, 0.0);
        assert!(two_term_check(&sol, 0.0, 1).unwrap().0.abs() < 1e-15);
        assert!(matches!(
            two_term_check(&sol, 0.0, 41),
            Err(FunceqError::OutOfRange { .. })
        ));
    }

    #[test]
    fn three_term_examples() {
        assert!((three_term_closed_form(1.5, -2.0, 0).unwrap() - 1.5).abs() < 1e-15);
        assert!((three_term_closed_form(1.5, -2.0, 1).unwrap() + 2.0).abs() < 1e-15);
        assert_eq!(
            three_term_exact(&q(1, 1), &q(1, 1), 10).unwrap(),
            SurdValue::from_integer(89)
        );
        assert_eq!(
            three_term_exact(&q(1, 1), &q(1, 1), -1).unwrap(),
            SurdValue::zero()
        );
        assert_eq!(
            three_term_exact(&q(0, 1), &q(1, 1), -2).unwrap(),
            SurdValue::from_integer(-1)
        );
        assert!(three_term_closed_form(1.0, 1.0, 61).is_err());
    }

    #[test]
    fn variational_examples() {
        let flat = PotentialSolution::new(2.0, 0.5, 0.0).unwrap();
        assert_eq!(
            variational_residual(&flat, 0.2, 3.0, 4.0).unwrap().residual,
            0.0
        );
        let e = std::f64::consts::E;
        let sol = PotentialSolution::new(0.0, 0.0, 1.0).unwrap();
        let chk = variational_residual(&sol, 0.0, e, e).unwrap();
        assert!(chk.residual.abs() < 1e-15);
        assert!((sol.derivative(e * e).unwrap() - 2.0).abs() < 1e-15);
        assert!(chk.derivative_error < 1e-6);
        assert_eq!(
            variational_residual(&sol, 0.0, -1.0, 1.0).unwrap_err(),
            FunceqError::Domain(-1.0)
        );
    }

    #[test]
    fn cauchy_examples() {
        let ms = [q(1, 1), q(3, 2), q(7, 3)];
        let r = cauchy_check(&q(2, 1), &q(1, 1), &ms);
        assert!(r.additive && r.homogeneous);
        let r = cauchy_check(&q(0, 1), &q(5, 7), &ms);
        assert!(r.additive && r.homogeneous);
        let r = cauchy_check_with(|t| t * t, &q(1, 1), &ms);
        assert!(!r.additive);
        let w = r.additivity_witness.unwrap();
        assert_eq!(
            (w.x.as_str(), w.y.as_str(), w.lhs.as_str(), w.rhs.as_str()),
            ("1", "1", "4", "2")
        );
    }
}
