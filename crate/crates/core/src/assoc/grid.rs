//! Grid points over old atom types plus copies of a new atom.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::surd::SurdValue;
use super::AssocError;

/// `r` copies of type a, …, `t` copies of the last type, plus `u` new atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridPoint {
    pub multiplicities: Vec<u64>,
    pub u: u64,
}

impl GridPoint {
    pub fn new(multiplicities: Vec<u64>, u: u64) -> Self {
        GridPoint { multiplicities, u }
    }

    /// A point with no new atoms.
    pub fn old(multiplicities: Vec<u64>) -> Self {
        GridPoint::new(multiplicities, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.u == 0 && self.multiplicities.iter().all(|&m| m == 0)
    }

    /// The n-fold repetition of this point.
    pub fn repeated(&self, n: u64) -> GridPoint {
        GridPoint {
            multiplicities: self.multiplicities.iter().map(|m| m * n).collect(),
            u: self.u * n,
        }
    }
}

/// Letter for the i-th old type: a, b, c, … then t26, t27, ….
pub fn type_letter(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("t{i}")
    }
}

/// Renders multiplicities as a coefficient combo such as `8a+7c`.
pub fn format_combo(multiplicities: &[u64]) -> String {
    let parts: Vec<String> = multiplicities
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0)
        .map(|(i, &m)| {
            if m == 1 {
                type_letter(i)
            } else {
                format!("{m}{}", type_letter(i))
            }
        })
        .collect();
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join("+")
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_combo(&self.multiplicities))?;
        if self.u > 0 {
            write!(f, "; {} new", self.u)?;
        }
        Ok(())
    }
}

/// Exact `Σ mᵢ·valueᵢ` over the old types.
pub fn combo_value(
    multiplicities: &[u64],
    atom_values: &[SurdValue],
) -> Result<SurdValue, AssocError> {
    if multiplicities.len() != atom_values.len() {
        return Err(AssocError::DimensionMismatch {
            expected: atom_values.len(),
            found: multiplicities.len(),
        });
    }
    let mut total = SurdValue::zero();
    for (&m, v) in multiplicities.iter().zip(atom_values) {
        if m > 0 {
            total = &total + &v.scale_int(m);
        }
    }
    Ok(total)
}

/// Exact `Σ rᵢ·valueᵢ + u·δ`.
pub fn grid_value(
    p: &GridPoint,
    atom_values: &[SurdValue],
    delta: &SurdValue,
) -> Result<SurdValue, AssocError> {
    let old = combo_value(&p.multiplicities, atom_values)?;
    Ok(if p.u > 0 {
        &old + &delta.scale_int(p.u)
    } else {
        old
    })
}

/// Position of a grid value relative to a target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Class {
    /// Below the target.
    A,
    /// Exactly at the target.
    B,
    /// Above the target.
    C,
}

impl Class {
    fn from_sign(s: i32) -> Class {
        match s {
            s if s < 0 => Class::A,
            0 => Class::B,
            _ => Class::C,
        }
    }
}

/// Classifies the old combo `multiplicities` against `target`, which must
/// contain at least one new atom.
pub fn classify(
    multiplicities: &[u64],
    target: &GridPoint,
    atom_values: &[SurdValue],
    delta: &SurdValue,
) -> Result<Class, AssocError> {
    if target.u == 0 {
        return Err(AssocError::NoNewAtoms);
    }
    let v = combo_value(multiplicities, atom_values)?;
    let t = grid_value(target, atom_values, delta)?;
    Ok(Class::from_sign((&v - &t).signum()))
}

/// Classifies one full grid point against another.
pub fn compare_points(
    p: &GridPoint,
    target: &GridPoint,
    atom_values: &[SurdValue],
    delta: &SurdValue,
) -> Result<Class, AssocError> {
    let v = grid_value(p, atom_values, delta)?;
    let t = grid_value(target, atom_values, delta)?;
    Ok(Class::from_sign((&v - &t).signum()))
}

/// Whether `p` vs `target` classifies the same as `n·p` vs `n·target`.
pub fn repetition_check(
    p: &GridPoint,
    target: &GridPoint,
    n: u64,
    atom_values: &[SurdValue],
    delta: &SurdValue,
) -> Result<bool, AssocError> {
    if n == 0 {
        return Err(AssocError::InvalidRepetition);
    }
    let once = compare_points(p, target, atom_values, delta)?;
    let many = compare_points(&p.repeated(n), &target.repeated(n), atom_values, delta)?;
    Ok(once == many)
}
