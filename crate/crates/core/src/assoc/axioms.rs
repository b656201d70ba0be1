//! Order and associativity axioms for binary operations on a sample set.
//!
//! Axiom 1a: `x < y ⇒ x∘z < y∘z`. Axiom 1b: `x < y ⇒ z∘x < z∘y`.
//! Axiom 2: `(x∘y)∘z = x∘(y∘z)`. Evaluation is exact over the binary values
//! of the samples.

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::AssocError;

/// A binary operation on reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule")]
pub enum OpTable {
    Addition,
    /// `⌊x⌋ + y`
    FloorLeft,
    /// `x + ⌊y⌋`
    FloorRight,
    /// `x² + y²`
    SumOfSquares,
    Max,
    /// `table[i][j] = samples[i] ∘ samples[j]`.
    Sampled {
        samples: Vec<f64>,
        table: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomWitness {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// `x∘z` (1a), `z∘x` (1b) or `(x∘y)∘z` (2).
    pub lhs: f64,
    /// `y∘z` (1a), `z∘y` (1b) or `x∘(y∘z)` (2).
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomOutcome {
    pub passed: bool,
    pub witness: Option<AxiomWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom1a: AxiomOutcome,
    pub axiom1b: AxiomOutcome,
    pub axiom2: AxiomOutcome,
}

type Q = BigRational;

struct Evaluator {
    op: OpTable,
    table: BTreeMap<(Q, Q), Q>,
}

impl Evaluator {
    fn new(op: &OpTable) -> Result<Self, AssocError> {
        let mut table = BTreeMap::new();
        if let OpTable::Sampled {
            samples,
            table: rows,
        } = op
        {
            if rows.len() != samples.len() || rows.iter().any(|r| r.len() != samples.len()) {
                return Err(AssocError::DimensionMismatch {
                    expected: samples.len(),
                    found: rows.len(),
                });
            }
            for (x, row) in samples.iter().zip(rows) {
                for (y, v) in samples.iter().zip(row) {
                    table.insert((exact(*x)?, exact(*y)?), exact(*v)?);
                }
            }
        }
        Ok(Evaluator {
            op: op.clone(),
            table,
        })
    }

    /// `x∘y`, or `None` outside a sampled table's domain.
    fn apply(&self, x: &Q, y: &Q) -> Option<Q> {
        Some(match &self.op {
            OpTable::Addition => x + y,
            OpTable::FloorLeft => x.floor() + y,
            OpTable::FloorRight => x + y.floor(),
            OpTable::SumOfSquares => x * x + y * y,
            OpTable::Max => x.max(y).clone(),
            OpTable::Sampled { .. } => return self.table.get(&(x.clone(), y.clone())).cloned(),
        })
    }
}

fn exact(x: f64) -> Result<Q, AssocError> {
    BigRational::from_float(x).ok_or_else(|| AssocError::NonFinite(x))
}

fn f(q: &Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Index triples with pairwise distinct entries first, then the rest; each
/// group in lexicographic order.
fn triples(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    let all =
        move || (0..n).flat_map(move |i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k))));
    let distinct = |&(i, j, k): &(usize, usize, usize)| i != j && j != k && i != k;
    all()
        .filter(distinct)
        .chain(all().filter(move |t| !distinct(t)))
}

/// Exhaustively checks the three axioms over `samples`, reporting the first
/// witness of each failure.
pub fn axiom_check(op: &OpTable, samples: &[f64]) -> Result<AxiomReport, AssocError> {
    let mut xs: Vec<Q> = samples
        .iter()
        .map(|&x| exact(x))
        .collect::<Result<_, _>>()?;
    xs.sort();
    xs.dedup();
    if xs.len() < 3 {
        return Err(AssocError::TooFewSamples(xs.len()));
    }
    let ev = Evaluator::new(op)?;
    let apply = |a: &Q, b: &Q| -> Result<Q, AssocError> {
        ev.apply(a, b)
            .ok_or_else(|| AssocError::OutsideTable(f(a), f(b)))
    };
    let mut a1 = None;
    let mut b1 = None;
    let mut two = None;
    for (i, j, k) in triples(xs.len()) {
        let (x, y, z) = (&xs[i], &xs[j], &xs[k]);
        if x < y {
            if a1.is_none() {
                let (l, r) = (apply(x, z)?, apply(y, z)?);
                if l >= r {
                    a1 = Some(witness(x, y, z, &l, &r));
                }
            }
            if b1.is_none() {
                let (l, r) = (apply(z, x)?, apply(z, y)?);
                if l >= r {
                    b1 = Some(witness(x, y, z, &l, &r));
                }
            }
        }
        if two.is_none() {
            let xy = apply(x, y)?;
            let yz = apply(y, z)?;
            // A sampled table may not contain the intermediate results.
            if let (Some(l), Some(r)) = (ev.apply(&xy, z), ev.apply(x, &yz)) {
                if !(&l - &r).is_zero() {
                    two = Some(witness(x, y, z, &l, &r));
                }
            }
        }
    }
    let outcome = |w: Option<AxiomWitness>| AxiomOutcome {
        passed: w.is_none(),
        witness: w,
    };
    Ok(AxiomReport {
        axiom1a: outcome(a1),
        axiom1b: outcome(b1),
        axiom2: outcome(two),
    })
}

fn witness(x: &Q, y: &Q, z: &Q, l: &Q, r: &Q) -> AxiomWitness {
    AxiomWitness {
        x: f(x),
        y: f(y),
        z: f(z),
        lhs: f(l),
        rhs: f(r),
    }
}
