//! Finite F-semilattices.
//!
//! An algebra is stored as its raw tables ([`AlgebraTables`], which is also the
//! JSON interchange form) plus a few cached derived values. The group acts
//! through one carrier permutation per cyclic factor of the [`GroupSpec`];
//! arbitrary group elements act by exponentiation, with exponents reduced
//! modulo the order of the permutation. This lets an infinite cyclic factor act
//! on a finite carrier.
//!
//! [`FSemilattice`] values are always valid: constructing one runs
//! [`validate_axioms`] and refuses tables that violate an axiom.

mod congruence;
mod hom;
mod validate;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{GroupElement, GroupError, GroupSpec};

pub use congruence::{Congruence, DEFAULT_CONGRUENCE_LIMIT};
pub use hom::{
    hom_extend, is_isomorphic_1gen, unary_terms, HomExtension, Homomorphism, IsoVerdict,
};
pub use validate::{validate_axioms, Axiom, ShapeError, Validation, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("malformed algebra tables: {0}")]
    Shape(#[from] ShapeError),
    #[error("axiom {} violated: {}", .0.axiom, .0.detail)]
    Axiom(Violation),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("element {0} is out of range")]
    NoSuchElement(usize),
    #[error("no element labelled {0:?}")]
    UnknownLabel(String),
    #[error("element {0} does not generate the algebra")]
    NotGenerating(usize),
    #[error("algebras are over different groups ({0:?} vs {1:?})")]
    GroupMismatch(Vec<u64>, Vec<u64>),
    #[error("carrier has {size} elements, above the congruence limit {limit}")]
    LimitExceeded { size: usize, limit: usize },
    #[error("invalid congruence: {0}")]
    InvalidCongruence(String),
}

/// Raw algebra data in the interchange layout.
///
/// Serializes as
/// `{"group":{"orders":[..]},"carrier":[..],"meet":[[..],..],"action":[[..],..]}`
/// with 0-based indices; `action[i]` is the permutation of the `i`-th
/// generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraTables {
    pub group: GroupSpec,
    pub carrier: Vec<String>,
    pub meet: Vec<Vec<usize>>,
    pub action: Vec<Vec<usize>>,
}

/// A validated finite F-semilattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AlgebraTables", into = "AlgebraTables")]
pub struct FSemilattice {
    tables: AlgebraTables,
    inverse: Vec<Vec<usize>>,
    perm_order: Vec<u64>,
    zero: usize,
}

impl TryFrom<AlgebraTables> for FSemilattice {
    type Error = AlgebraError;

    fn try_from(tables: AlgebraTables) -> Result<Self, Self::Error> {
        FSemilattice::new(tables)
    }
}

impl From<FSemilattice> for AlgebraTables {
    fn from(a: FSemilattice) -> Self {
        a.tables
    }
}

/// A subalgebra together with its embedding into the parent carrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subalgebra {
    pub algebra: FSemilattice,
    /// `embedding[i]` is the parent index of the subalgebra's element `i`;
    /// strictly increasing.
    pub embedding: Vec<usize>,
}

impl Subalgebra {
    /// Subalgebra index of a parent element, if it belongs to the subalgebra.
    pub fn index_of(&self, parent_index: usize) -> Option<usize> {
        self.embedding.binary_search(&parent_index).ok()
    }
}

fn cycle_order(perm: &[usize]) -> u64 {
    use num_integer::Integer;
    let mut seen = vec![false; perm.len()];
    let mut order = 1u64;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0u64;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = perm[x];
            len += 1;
        }
        order = order.lcm(&len);
    }
    order
}

impl FSemilattice {
    /// Checks shape and all axioms, then caches derived data.
    pub fn new(tables: AlgebraTables) -> Result<Self, AlgebraError> {
        match validate_axioms(&tables)? {
            Validation::Valid => {}
            Validation::Invalid(v) => return Err(AlgebraError::Axiom(v)),
        }
        let n = tables.carrier.len();
        let inverse = tables
            .action
            .iter()
            .map(|perm| {
                let mut inv = vec![0; n];
                for (x, &y) in perm.iter().enumerate() {
                    inv[y] = x;
                }
                inv
            })
            .collect();
        let perm_order = tables.action.iter().map(|p| cycle_order(p)).collect();
        let zero = (1..n).fold(0, |acc, x| tables.meet[acc][x]);
        Ok(FSemilattice {
            tables,
            inverse,
            perm_order,
            zero,
        })
    }

    pub fn tables(&self) -> &AlgebraTables {
        &self.tables
    }

    pub fn group(&self) -> &GroupSpec {
        &self.tables.group
    }

    pub fn size(&self) -> usize {
        self.tables.carrier.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.size() == 1
    }

    pub fn labels(&self) -> &[String] {
        &self.tables.carrier
    }

    pub fn label(&self, x: usize) -> &str {
        &self.tables.carrier[x]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, AlgebraError> {
        self.tables
            .carrier
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| AlgebraError::UnknownLabel(label.to_string()))
    }

    pub fn generator_count(&self) -> usize {
        self.tables.action.len()
    }

    #[inline]
    pub fn meet(&self, x: usize, y: usize) -> usize {
        self.tables.meet[x][y]
    }

    /// Image of `x` under the `i`-th generator.
    #[inline]
    pub fn apply_generator(&self, i: usize, x: usize) -> usize {
        self.tables.action[i][x]
    }

    /// Image of `x` under the inverse of the `i`-th generator.
    #[inline]
    pub fn apply_generator_inv(&self, i: usize, x: usize) -> usize {
        self.inverse[i][x]
    }

    /// Order of the `i`-th generator's permutation.
    pub fn generator_perm_order(&self, i: usize) -> u64 {
        self.perm_order[i]
    }

    /// The finite group `Z_{m0} x Z_{m1} x ...` through which the action
    /// factors, where `m_i` is the order of factor `i` when finite and the
    /// order of its permutation otherwise.
    pub fn effective_group(&self) -> GroupSpec {
        let orders = self
            .group()
            .orders()
            .iter()
            .zip(&self.perm_order)
            .map(|(&k, &m)| if k == 0 { m } else { k })
            .collect();
        GroupSpec::new(orders).expect("nonempty")
    }

    /// Group elements that represent every distinct action; equal to the
    /// group's elements when it is finite.
    pub fn effective_elements(&self) -> Vec<GroupElement> {
        let eff = self.effective_group();
        eff.elements()
            .expect("effective group is finite")
            .into_iter()
            .map(|g| {
                self.group()
                    .element(g.coords().to_vec())
                    .expect("same rank")
            })
            .collect()
    }

    fn check_element(&self, x: usize) -> Result<(), AlgebraError> {
        if x >= self.size() {
            return Err(AlgebraError::NoSuchElement(x));
        }
        Ok(())
    }

    /// `g(x)` for an arbitrary group element.
    pub fn act(&self, g: &GroupElement, x: usize) -> Result<usize, AlgebraError> {
        self.check_element(x)?;
        if g.len() != self.group().rank() {
            return Err(GroupError::LengthMismatch {
                expected: self.group().rank(),
                found: g.len(),
            }
            .into());
        }
        Ok(self.act_unchecked(g.coords(), x))
    }

    pub(crate) fn act_unchecked(&self, coords: &[i64], mut x: usize) -> usize {
        for (i, &c) in coords.iter().enumerate() {
            let e = c.rem_euclid(self.perm_order[i] as i64);
            for _ in 0..e {
                x = self.tables.action[i][x];
            }
        }
        x
    }

    /// Least element (meet of the whole carrier).
    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.meet(x, y) == x
    }

    fn lt(&self, x: usize, y: usize) -> bool {
        x != y && self.leq(x, y)
    }

    /// Elements covering the zero.
    pub fn atoms(&self) -> Vec<usize> {
        let z = self.zero;
        (0..self.size())
            .filter(|&x| x != z && !(0..self.size()).any(|y| self.lt(z, y) && self.lt(y, x)))
            .collect()
    }

    /// Maximal elements of the order.
    pub fn maximal(&self) -> Vec<usize> {
        (0..self.size())
            .filter(|&x| !(0..self.size()).any(|y| self.lt(x, y)))
            .collect()
    }

    /// Hasse diagram edges `(lower, upper)`, sorted.
    pub fn cover_edges(&self) -> Vec<(usize, usize)> {
        let n = self.size();
        let mut edges = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if self.lt(x, y) && !(0..n).any(|z| self.lt(x, z) && self.lt(z, y)) {
                    edges.push((x, y));
                }
            }
        }
        edges
    }

    /// Whether every generator acts as the identity.
    pub fn is_group_trivial(&self) -> bool {
        self.tables
            .action
            .iter()
            .all(|p| p.iter().enumerate().all(|(x, &y)| x == y))
    }

    /// Least subset containing `seeds` closed under meet and every generator
    /// and its inverse, sorted by index.
    pub fn closure(&self, seeds: &[usize]) -> Vec<usize> {
        let n = self.size();
        let mut member = vec![false; n];
        let mut order: Vec<usize> = Vec::new();
        let mut queue = Vec::new();
        for &s in seeds {
            if !member[s] {
                member[s] = true;
                order.push(s);
                queue.push(s);
            }
        }
        while let Some(x) = queue.pop() {
            let mut fresh = Vec::new();
            for i in 0..self.generator_count() {
                fresh.push(self.apply_generator(i, x));
                fresh.push(self.apply_generator_inv(i, x));
            }
            for &y in &order {
                fresh.push(self.meet(x, y));
            }
            for y in fresh {
                if !member[y] {
                    member[y] = true;
                    order.push(y);
                    queue.push(y);
                }
            }
        }
        order.sort_unstable();
        order
    }

    pub fn generates(&self, a: usize) -> bool {
        a < self.size() && self.closure(&[a]).len() == self.size()
    }

    /// The subalgebra generated by `b`.
    pub fn subalgebra_generated(&self, b: usize) -> Result<Subalgebra, AlgebraError> {
        self.check_element(b)?;
        self.restrict(&self.closure(&[b]))
    }

    /// Restriction to a subset that is closed under all operations.
    pub fn restrict(&self, subset: &[usize]) -> Result<Subalgebra, AlgebraError> {
        let embedding: Vec<usize> = subset
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let pos = |x: usize| {
            embedding
                .binary_search(&x)
                .map_err(|_| AlgebraError::NoSuchElement(x))
        };
        let meet = embedding
            .iter()
            .map(|&x| embedding.iter().map(|&y| pos(self.meet(x, y))).collect())
            .collect::<Result<Vec<Vec<usize>>, _>>()?;
        let action = self
            .tables
            .action
            .iter()
            .map(|perm| embedding.iter().map(|&x| pos(perm[x])).collect())
            .collect::<Result<Vec<Vec<usize>>, _>>()?;
        let tables = AlgebraTables {
            group: self.group().clone(),
            carrier: embedding
                .iter()
                .map(|&x| self.label(x).to_string())
                .collect(),
            meet,
            action,
        };
        Ok(Subalgebra {
            algebra: FSemilattice::new(tables)?,
            embedding,
        })
    }

    /// Same semilattice, every generator replaced by its inverse.
    pub fn opposite(&self) -> FSemilattice {
        let mut tables = self.tables.clone();
        tables.action = self.inverse.clone();
        FSemilattice::new(tables).expect("inverse action of a valid algebra is valid")
    }

    /// Replaces the labels, keeping all structure.
    pub fn relabel(&self, labels: Vec<String>) -> Result<FSemilattice, AlgebraError> {
        let mut tables = self.tables.clone();
        tables.carrier = labels;
        FSemilattice::new(tables)
    }

    pub fn congruences(&self, limit: usize) -> Result<Vec<Congruence>, AlgebraError> {
        congruence::congruences(self, limit)
    }

    pub fn quotient(&self, rho: &Congruence) -> Result<FSemilattice, AlgebraError> {
        congruence::quotient(self, rho)
    }
}
