//! Interval narrowing for the value δ of a new atom.
//!
//! For each copy count `u`, the old-type combos are scanned for the largest
//! value below `u·δ` and the smallest value above it. Floats steer the scan;
//! every decision close enough to a boundary for rounding to matter is made
//! by an exact comparison through the oracle, and each per-u bracket is
//! verified exactly before it is reported.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{combo_value, format_combo, GridPoint};
use super::surd::SurdValue;
use super::AssocError;

/// Ordering oracle for the unknown δ.
pub trait DeltaOracle: Sync {
    /// Ordering of `value` relative to `u·δ`.
    fn compare(&self, value: &SurdValue, u: u64) -> Ordering;

    /// A float approximation of δ used only to steer the search.
    fn approx(&self) -> f64 {
        bisect_approx(self)
    }
}

impl DeltaOracle for SurdValue {
    fn compare(&self, value: &SurdValue, u: u64) -> Ordering {
        value.cmp(&self.scale_int(u))
    }

    fn approx(&self) -> f64 {
        self.to_f64()
    }
}

/// Black-box oracle built from a comparison callback.
pub struct ComparatorOracle<F> {
    compare: F,
}

impl<F> ComparatorOracle<F>
where
    F: Fn(&SurdValue, u64) -> Ordering + Sync,
{
    pub fn new(compare: F) -> Self {
        ComparatorOracle { compare }
    }
}

impl<F> DeltaOracle for ComparatorOracle<F>
where
    F: Fn(&SurdValue, u64) -> Ordering + Sync,
{
    fn compare(&self, value: &SurdValue, u: u64) -> Ordering {
        (self.compare)(value, u)
    }
}

fn bisect_approx<O: DeltaOracle + ?Sized>(oracle: &O) -> f64 {
    let cmp = |x: f64| oracle.compare(&SurdValue::from_f64(x).expect("finite probe"), 1);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while cmp(hi) == Ordering::Less && hi < 1e300 {
        lo = hi;
        hi *= 2.0;
    }
    if lo == 0.0 {
        let mut probe = 0.5;
        while cmp(probe) != Ordering::Less && probe > 1e-300 {
            hi = probe;
            probe *= 0.5;
        }
        lo = probe;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        match cmp(mid) {
            Ordering::Less => lo = mid,
            Ordering::Greater => hi = mid,
            Ordering::Equal => return mid,
        }
    }
}

/// An old-type combo bracketing `u·δ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub multiplicities: Vec<u64>,
    pub u: u64,
    /// Exact value of the combo.
    pub value: SurdValue,
}

impl Witness {
    /// The bound on δ this witness implies: `value / u`.
    pub fn ratio(&self) -> SurdValue {
        self.value.div_int(self.u)
    }

    pub fn combo(&self) -> String {
        format_combo(&self.multiplicities)
    }

    pub fn grid_point(&self) -> GridPoint {
        GridPoint::old(self.multiplicities.clone())
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.u == 1 {
            write!(f, "{}", self.combo())
        } else {
            write!(f, "{} / {}", self.combo(), self.u)
        }
    }
}

/// Result of scanning a single copy count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bracket {
    /// `lower < u·δ < upper`; `lower` is absent when no nonzero combo lies below.
    Between {
        lower: Option<Witness>,
        upper: Witness,
    },
    /// An old combo equals `u·δ` exactly.
    Hit(Witness),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaBounds {
    pub max_u: u64,
    pub lower: Witness,
    pub upper: Witness,
}

impl DeltaBounds {
    pub fn lower_ratio(&self) -> SurdValue {
        self.lower.ratio()
    }

    pub fn upper_ratio(&self) -> SurdValue {
        self.upper.ratio()
    }

    pub fn lower_decimal(&self, places: usize) -> String {
        self.lower_ratio().to_decimal(places)
    }

    pub fn upper_decimal(&self, places: usize) -> String {
        self.upper_ratio().to_decimal(places)
    }
}

/// Outcome of narrowing: an enclosure, or an exact equality certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Narrowing {
    Bounds(DeltaBounds),
    /// `value = u·δ` exactly for the witness combo.
    Exact(Witness),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NarrowOptions {
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

struct Basis<'a> {
    values: &'a [SurdValue],
    floats: Vec<f64>,
    delta: f64,
}

impl<'a> Basis<'a> {
    fn new<O: DeltaOracle + ?Sized>(
        values: &'a [SurdValue],
        oracle: &O,
    ) -> Result<Self, AssocError> {
        if values.is_empty() {
            return Err(AssocError::EmptyBasis);
        }
        for (i, v) in values.iter().enumerate() {
            if v.signum() <= 0 {
                return Err(AssocError::NonPositive(format!(
                    "atom value {} = {v}",
                    super::grid::type_letter(i)
                )));
            }
        }
        if oracle.compare(&SurdValue::zero(), 1) != Ordering::Less {
            return Err(AssocError::NonPositive("delta".into()));
        }
        let floats: Vec<f64> = values.iter().map(SurdValue::to_f64).collect();
        let delta = oracle.approx();
        if !(delta.is_finite() && delta > 0.0) || floats.iter().any(|f| !f.is_finite()) {
            return Err(AssocError::NonPositive(
                "values are out of floating-point range".into(),
            ));
        }
        Ok(Basis {
            values,
            floats,
            delta,
        })
    }
}

struct Best {
    multiplicities: Vec<u64>,
    approx: f64,
    exact: Option<SurdValue>,
}

impl Best {
    fn exact(&mut self, values: &[SurdValue]) -> &SurdValue {
        if self.exact.is_none() {
            self.exact = Some(combo_value(&self.multiplicities, values).expect("basis length"));
        }
        self.exact.as_ref().unwrap()
    }
}

/// Visits every vector of multiplicities for `rest` with weighted sum below `limit`.
fn walk<F: FnMut(&[u64], f64)>(
    rest: &[f64],
    depth: usize,
    acc: f64,
    limit: f64,
    mult: &mut Vec<u64>,
    leaf: &mut F,
) {
    if depth == rest.len() {
        leaf(mult, acc);
        return;
    }
    let v = rest[depth];
    let mut m = 0u64;
    loop {
        let w = acc + m as f64 * v;
        if w >= limit {
            break;
        }
        mult[depth] = m;
        walk(rest, depth + 1, w, limit, mult, leaf);
        m += 1;
    }
    mult[depth] = 0;
}

fn scan_u<O: DeltaOracle + ?Sized>(
    basis: &Basis,
    oracle: &O,
    u: u64,
) -> Result<Bracket, AssocError> {
    let values = basis.values;
    let v0 = basis.floats[0];
    let rest = &basis.floats[1..];
    let target = u as f64 * basis.delta;
    let scale = target + basis.floats.iter().cloned().fold(0.0, f64::max);
    let eps = 1e-10 * (1.0 + scale);
    let limit = target + v0 + eps;

    let full = |r: u64, rest_mult: &[u64]| -> Vec<u64> {
        let mut m = Vec::with_capacity(rest_mult.len() + 1);
        m.push(r);
        m.extend_from_slice(rest_mult);
        m
    };

    let mut lower: Option<Best> = None;
    let mut upper: Option<Best> = None;
    let mut hit: Option<Vec<u64>> = None;

    let offer = |slot: &mut Option<Best>, mult: Vec<u64>, approx: f64, want: Ordering| {
        let replace = match slot {
            None => true,
            Some(best) => {
                let diff = approx - best.approx;
                if diff.abs() > eps {
                    diff.partial_cmp(&0.0) == Some(want)
                } else {
                    let cand = combo_value(&mult, values).expect("basis length");
                    let ord = cand.cmp(best.exact(values));
                    if ord == want {
                        *slot = Some(Best {
                            multiplicities: mult,
                            approx,
                            exact: Some(cand),
                        });
                    }
                    return;
                }
            }
        };
        if replace {
            *slot = Some(Best {
                multiplicities: mult,
                approx,
                exact: None,
            });
        }
    };

    let mut mult = vec![0u64; rest.len()];
    walk(
        rest,
        0,
        0.0,
        limit,
        &mut mult,
        &mut |rest_mult: &[u64], w: f64| {
            if hit.is_some() {
                return;
            }
            let f = (target - w) / v0;
            let nearest = f.round();
            // r_lo is the largest count of type a keeping the combo below u·δ, r_hi the smallest above.
            let (r_lo, r_hi): (i64, i64) = if (f - nearest).abs() * v0 <= eps {
                let r0 = nearest as i64;
                if r0 < 0 {
                    (-1, 0)
                } else {
                    let exact =
                        combo_value(&full(r0 as u64, rest_mult), values).expect("basis length");
                    match oracle.compare(&exact, u) {
                        Ordering::Less => (r0, r0 + 1),
                        Ordering::Greater => (r0 - 1, r0),
                        Ordering::Equal => {
                            hit = Some(full(r0 as u64, rest_mult));
                            return;
                        }
                    }
                }
            } else {
                let c = f.ceil() as i64;
                if c <= 0 {
                    (-1, 0)
                } else {
                    (c - 1, c)
                }
            };
            let rest_zero = rest_mult.iter().all(|&m| m == 0);
            if r_lo >= 0 && !(r_lo == 0 && rest_zero) {
                offer(
                    &mut lower,
                    full(r_lo as u64, rest_mult),
                    r_lo as f64 * v0 + w,
                    Ordering::Greater,
                );
            }
            offer(
                &mut upper,
                full(r_hi as u64, rest_mult),
                r_hi as f64 * v0 + w,
                Ordering::Less,
            );
        },
    );

    if let Some(m) = hit {
        let value = combo_value(&m, values)?;
        return Ok(Bracket::Hit(Witness {
            multiplicities: m,
            u,
            value,
        }));
    }
    let finish = |best: Best| -> Witness {
        let value = combo_value(&best.multiplicities, values).expect("basis length");
        Witness {
            multiplicities: best.multiplicities,
            u,
            value,
        }
    };
    let upper = finish(upper.expect("the pure type-a combo always lies above"));
    let lower = lower.map(finish);
    if oracle.compare(&upper.value, u) != Ordering::Greater {
        return Err(AssocError::Inconsistent(format!(
            "upper bracket {upper} is not above {u}δ"
        )));
    }
    if let Some(l) = &lower {
        if oracle.compare(&l.value, u) != Ordering::Less {
            return Err(AssocError::Inconsistent(format!(
                "lower bracket {l} is not below {u}δ"
            )));
        }
    }
    Ok(Bracket::Between { lower, upper })
}

fn run_with_jobs<T: Send>(
    jobs: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, AssocError> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(AssocError::InvalidJobs),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| AssocError::Inconsistent(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn scan_all<O: DeltaOracle + ?Sized>(
    values: &[SurdValue],
    oracle: &O,
    us: &[u64],
    options: NarrowOptions,
) -> Result<Vec<Bracket>, AssocError> {
    if us.contains(&0) {
        return Err(AssocError::InvalidMaxU);
    }
    let basis = Basis::new(values, oracle)?;
    run_with_jobs(options.jobs, || {
        us.par_iter().map(|&u| scan_u(&basis, oracle, u)).collect()
    })?
}

/// Sign of `a/ua − b/ub`, decided exactly when the floats are too close.
fn cmp_ratio(a: &Witness, b: &Witness) -> Ordering {
    let fa = a.value.to_f64() / a.u as f64;
    let fb = b.value.to_f64() / b.u as f64;
    if (fa - fb).abs() > 1e-9 * fa.abs().max(fb.abs()) {
        return fa.partial_cmp(&fb).unwrap();
    }
    a.value.scale_int(b.u).cmp(&b.value.scale_int(a.u))
}

/// Tightest bracket of `u·δ` by old-type combos for each requested `u`.
pub fn interval_table<O: DeltaOracle + ?Sized>(
    atom_values: &[SurdValue],
    oracle: &O,
    u_list: &[u64],
) -> Result<Vec<(u64, Bracket)>, AssocError> {
    interval_table_with(atom_values, oracle, u_list, NarrowOptions::default())
}

pub fn interval_table_with<O: DeltaOracle + ?Sized>(
    atom_values: &[SurdValue],
    oracle: &O,
    u_list: &[u64],
    options: NarrowOptions,
) -> Result<Vec<(u64, Bracket)>, AssocError> {
    let rows = scan_all(atom_values, oracle, u_list, options)?;
    let mut out = Vec::with_capacity(rows.len());
    for (&u, b) in u_list.iter().zip(rows) {
        if let Bracket::Between { lower: None, .. } = b {
            return Err(AssocError::Unbounded(Side::Below));
        }
        out.push((u, b));
    }
    Ok(out)
}

/// Which side of δ has no grid ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// δ lies below every ratio, so nothing bounds it from below.
    Below,
    /// δ lies above every ratio.
    Above,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Below => write!(f, "delta lies below every grid ratio; no lower bound"),
            Side::Above => write!(f, "delta lies above every grid ratio; no upper bound"),
        }
    }
}

/// Supremum of lower ratios and infimum of upper ratios over `1 ≤ u ≤ max_u`.
pub fn narrow_delta<O: DeltaOracle + ?Sized>(
    atom_values: &[SurdValue],
    oracle: &O,
    max_u: u64,
) -> Result<Narrowing, AssocError> {
    narrow_delta_with(atom_values, oracle, max_u, NarrowOptions::default())
}

pub fn narrow_delta_with<O: DeltaOracle + ?Sized>(
    atom_values: &[SurdValue],
    oracle: &O,
    max_u: u64,
    options: NarrowOptions,
) -> Result<Narrowing, AssocError> {
    if max_u == 0 {
        return Err(AssocError::InvalidMaxU);
    }
    let us: Vec<u64> = (1..=max_u).collect();
    let rows = scan_all(atom_values, oracle, &us, options)?;
    let mut lower: Option<Witness> = None;
    let mut upper: Option<Witness> = None;
    for row in rows {
        match row {
            Bracket::Hit(w) => return Ok(Narrowing::Exact(w)),
            Bracket::Between { lower: l, upper: h } => {
                if let Some(l) = l {
                    if lower
                        .as_ref()
                        .map_or(true, |b| cmp_ratio(&l, b) == Ordering::Greater)
                    {
                        lower = Some(l);
                    }
                }
                if upper
                    .as_ref()
                    .map_or(true, |b| cmp_ratio(&h, b) == Ordering::Less)
                {
                    upper = Some(h);
                }
            }
        }
    }
    let lower = lower.ok_or(AssocError::Unbounded(Side::Below))?;
    let upper = upper.ok_or(AssocError::Unbounded(Side::Above))?;
    Ok(Narrowing::Bounds(DeltaBounds {
        max_u,
        lower,
        upper,
    }))
}
