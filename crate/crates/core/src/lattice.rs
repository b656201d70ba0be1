//! Finite Boolean lattices of statements.
//!
//! A [`Lattice`] is identified by its atoms; an [`Element`] is any subset of
//! those atoms, stored as a bit-vector. Join is union, meet is intersection and
//! the lattice order is inclusion. Bottom (the empty set) is always present.
//!
//! Atom identity is positional. Labels are carried for I/O only.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

/// Largest lattice for which [`Lattice::elements`] will enumerate all subsets.
pub const MAX_ENUMERABLE_ATOMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("dimension mismatch: element has {found} atoms, lattice has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("lattice must have at least one atom")]
    Empty,
    #[error("duplicate atom label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown atom label `{0}`")]
    UnknownLabel(String),
    #[error("atom index {index} out of range for {atom_count} atoms")]
    IndexOutOfRange { index: usize, atom_count: usize },
    #[error("refusing to enumerate 2^{0} elements (limit is {MAX_ENUMERABLE_ATOMS} atoms)")]
    TooLargeToEnumerate(usize),
}

type Blocks = SmallVec<[u64; 1]>;

fn block_count(atom_count: usize) -> usize {
    atom_count.div_ceil(64)
}

/// A set of atoms of a lattice with `len` atoms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Element {
    len: usize,
    blocks: Blocks,
}

impl Element {
    pub fn bottom(atom_count: usize) -> Self {
        Element {
            len: atom_count,
            blocks: SmallVec::from_elem(0, block_count(atom_count)),
        }
    }

    pub fn top(atom_count: usize) -> Self {
        let mut e = Element::bottom(atom_count);
        for i in 0..atom_count {
            e.insert(i);
        }
        e
    }

    /// Builds an element from atom indices. Indices must be `< atom_count`.
    pub fn from_indices(atom_count: usize, indices: &[usize]) -> Result<Self, LatticeError> {
        let mut e = Element::bottom(atom_count);
        for &i in indices {
            if i >= atom_count {
                return Err(LatticeError::IndexOutOfRange {
                    index: i,
                    atom_count,
                });
            }
            e.insert(i);
        }
        Ok(e)
    }

    /// Element whose atoms are the set bits of `mask` (only for `atom_count <= 64`).
    pub fn from_mask(atom_count: usize, mask: u64) -> Self {
        assert!(atom_count <= 64, "from_mask needs atom_count <= 64");
        let keep = if atom_count == 64 {
            u64::MAX
        } else {
            (1u64 << atom_count) - 1
        };
        let mut blocks = Blocks::new();
        blocks.push(mask & keep);
        if atom_count == 0 {
            blocks.clear();
        }
        Element {
            len: atom_count,
            blocks,
        }
    }

    fn insert(&mut self, i: usize) {
        self.blocks[i / 64] |= 1u64 << (i % 64);
    }

    pub fn atom_count(&self) -> usize {
        self.len
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.blocks[i / 64] & (1u64 << (i % 64)) != 0
    }

    pub fn is_bottom(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    /// Number of atoms in the element.
    pub fn cardinality(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Indices of the atoms below this element, ascending.
    pub fn atoms(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(k, &block)| {
            let mut rest = block;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(k * 64 + bit)
            })
        })
    }

    fn check_same(&self, other: &Element) -> Result<(), LatticeError> {
        if self.len != other.len {
            return Err(LatticeError::DimensionMismatch {
                expected: self.len,
                found: other.len,
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Element, f: impl Fn(u64, u64) -> u64) -> Element {
        Element {
            len: self.len,
            blocks: self
                .blocks
                .iter()
                .zip(other.blocks.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Least upper bound (atom-set union).
    pub fn join(&self, other: &Element) -> Result<Element, LatticeError> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a | b))
    }

    /// Greatest lower bound (atom-set intersection).
    pub fn meet(&self, other: &Element) -> Result<Element, LatticeError> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a & b))
    }

    /// Lattice order: `self <= other` iff every atom of `self` is in `other`.
    pub fn leq(&self, other: &Element) -> Result<bool, LatticeError> {
        self.check_same(other)?;
        Ok(self
            .blocks
            .iter()
            .zip(other.blocks.iter())
            .all(|(&a, &b)| a & !b == 0))
    }

    /// Strict order `self < other`.
    pub fn lt(&self, other: &Element) -> Result<bool, LatticeError> {
        Ok(self.leq(other)? && self != other)
    }

    /// The zeta function of the lattice: 1 if `self <= other`, else 0.
    pub fn zeta(&self, other: &Element) -> Result<u8, LatticeError> {
        Ok(u8::from(self.leq(other)?))
    }

    /// True iff the meet is bottom.
    pub fn disjoint(&self, other: &Element) -> Result<bool, LatticeError> {
        self.check_same(other)?;
        Ok(self
            .blocks
            .iter()
            .zip(other.blocks.iter())
            .all(|(&a, &b)| a & b == 0))
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.atoms()).finish()
    }
}

/// A finite Boolean lattice given by its labelled atoms.
#[derive(Clone, PartialEq, Eq)]
pub struct Lattice {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lattice")
            .field("atoms", &self.labels)
            .finish()
    }
}

impl Lattice {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self, LatticeError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(LatticeError::Empty);
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(LatticeError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Lattice { labels, index })
    }

    /// Lattice with atoms labelled `a1..aN`.
    pub fn with_atoms(n: usize) -> Result<Self, LatticeError> {
        Lattice::new((1..=n).map(|i| format!("a{i}")))
    }

    pub fn atom_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Bottom is always part of the lattice and is valued zero by every measure.
    pub fn includes_bottom(&self) -> bool {
        true
    }

    pub fn index_of(&self, label: &str) -> Result<usize, LatticeError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| LatticeError::UnknownLabel(label.to_string()))
    }

    pub fn bottom(&self) -> Element {
        Element::bottom(self.atom_count())
    }

    pub fn top(&self) -> Element {
        Element::top(self.atom_count())
    }

    pub fn atom(&self, i: usize) -> Result<Element, LatticeError> {
        Element::from_indices(self.atom_count(), &[i])
    }

    pub fn element_from_indices(&self, indices: &[usize]) -> Result<Element, LatticeError> {
        Element::from_indices(self.atom_count(), indices)
    }

    /// Element made of the named atoms. Repeated labels are allowed.
    pub fn element<S: AsRef<str>>(&self, labels: &[S]) -> Result<Element, LatticeError> {
        let idx = labels
            .iter()
            .map(|l| self.index_of(l.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        self.element_from_indices(&idx)
    }

    /// Labels of the element's atoms in atom order.
    pub fn element_labels(&self, e: &Element) -> Result<Vec<String>, LatticeError> {
        self.check(e)?;
        Ok(e.atoms().map(|i| self.labels[i].clone()).collect())
    }

    pub fn check(&self, e: &Element) -> Result<(), LatticeError> {
        if e.atom_count() != self.atom_count() {
            return Err(LatticeError::DimensionMismatch {
                expected: self.atom_count(),
                found: e.atom_count(),
            });
        }
        Ok(())
    }

    /// All `2^N` elements in mask order. Only offered for `N <= 20`.
    pub fn elements(&self) -> Result<impl Iterator<Item = Element>, LatticeError> {
        let n = self.atom_count();
        if n > MAX_ENUMERABLE_ATOMS {
            return Err(LatticeError::TooLargeToEnumerate(n));
        }
        Ok((0u64..(1u64 << n)).map(move |mask| Element::from_mask(n, mask)))
    }

    pub fn to_doc(&self) -> LatticeDoc {
        LatticeDoc {
            atoms: self.labels.clone(),
        }
    }
}

/// JSON form of a lattice: `{"atoms": ["a1", "a2", ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeDoc {
    pub atoms: Vec<String>,
}

impl TryFrom<LatticeDoc> for Lattice {
    type Error = LatticeError;

    fn try_from(doc: LatticeDoc) -> Result<Self, Self::Error> {
        Lattice::new(doc.atoms)
    }
}

/// Direct product of two lattices. Composite atom `(i, j)` has index `i * M + j`
/// where `M` is the right factor's atom count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductLattice {
    left: Lattice,
    right: Lattice,
    composite: Lattice,
}

impl ProductLattice {
    pub fn left(&self) -> &Lattice {
        &self.left
    }

    pub fn right(&self) -> &Lattice {
        &self.right
    }

    /// The joint lattice of composite atoms.
    pub fn lattice(&self) -> &Lattice {
        &self.composite
    }

    pub fn composite_index(&self, i: usize, j: usize) -> Result<usize, LatticeError> {
        let (n, m) = (self.left.atom_count(), self.right.atom_count());
        if i >= n {
            return Err(LatticeError::IndexOutOfRange {
                index: i,
                atom_count: n,
            });
        }
        if j >= m {
            return Err(LatticeError::IndexOutOfRange {
                index: j,
                atom_count: m,
            });
        }
        Ok(i * m + j)
    }

    pub fn split_index(&self, k: usize) -> Result<(usize, usize), LatticeError> {
        let m = self.right.atom_count();
        if k >= self.composite.atom_count() {
            return Err(LatticeError::IndexOutOfRange {
                index: k,
                atom_count: self.composite.atom_count(),
            });
        }
        Ok((k / m, k % m))
    }

    /// `x × y`: every composite atom whose factors lie in `x` and `y`.
    pub fn element_product(&self, x: &Element, y: &Element) -> Result<Element, LatticeError> {
        self.left.check(x)?;
        self.right.check(y)?;
        let m = self.right.atom_count();
        let idx: Vec<usize> = x
            .atoms()
            .flat_map(|i| y.atoms().map(move |j| i * m + j))
            .collect();
        self.composite.element_from_indices(&idx)
    }
}

/// Joint lattice of two independent systems; composite labels are `l×r`.
pub fn direct_product(left: &Lattice, right: &Lattice) -> ProductLattice {
    let labels = left
        .labels()
        .iter()
        .flat_map(|l| right.labels().iter().map(move |r| format!("{l}×{r}")))
        .collect::<Vec<_>>();
    // Distinct factor labels give distinct composite labels except when a label
    // itself contains `×`; fall back to positional labels then.
    let composite = Lattice::new(labels)
        .or_else(|_| Lattice::with_atoms(left.atom_count() * right.atom_count()))
        .expect("non-empty factors give a non-empty product");
    ProductLattice {
        left: left.clone(),
        right: right.clone(),
        composite,
    }
}
