//! Finitely generated abelian groups presented as products of cyclic factors.
//!
//! A [`GroupSpec`] lists the factor orders; `0` stands for an infinite cyclic
//! factor. Elements are integer vectors reduced coordinate-wise, so equality of
//! [`GroupElement`]s is equality of reduced vectors. Subgroup enumeration,
//! cosets and transversals are only available for finite groups.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("a group needs at least one cyclic factor (use [1] for the trivial group)")]
    EmptyOrders,
    #[error("element has {found} coordinates, group has {expected} factors")]
    LengthMismatch { expected: usize, found: usize },
    #[error("operation requires a finite group, got orders {0:?}")]
    InfiniteGroup(Vec<u64>),
    #[error("not a subgroup: {0}")]
    NotASubgroup(String),
    #[error("element {0} does not belong to the group")]
    NotMember(GroupElement),
    #[error("invalid transversal: {0}")]
    InvalidTransversal(String),
    #[error("group is too large to enumerate ({0} elements)")]
    TooLarge(u64),
}

/// Upper bound on the number of elements we are willing to list.
pub const ENUMERATION_LIMIT: u64 = 1 << 16;

/// An abelian group `Z_{k0} x Z_{k1} x ...`, with `k = 0` meaning `Z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawGroupSpec", into = "RawGroupSpec")]
pub struct GroupSpec {
    orders: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawGroupSpec {
    orders: Vec<u64>,
}

impl TryFrom<RawGroupSpec> for GroupSpec {
    type Error = GroupError;

    fn try_from(raw: RawGroupSpec) -> Result<Self, Self::Error> {
        GroupSpec::new(raw.orders)
    }
}

impl From<GroupSpec> for RawGroupSpec {
    fn from(spec: GroupSpec) -> Self {
        RawGroupSpec {
            orders: spec.orders,
        }
    }
}

/// An element of a [`GroupSpec`], stored in reduced form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(Vec<i64>);

impl GroupElement {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for GroupElement {
    /// Comma-joined coordinates, e.g. `1,0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl GroupSpec {
    /// Builds a group from its cyclic factor orders.
    pub fn new(orders: Vec<u64>) -> Result<Self, GroupError> {
        if orders.is_empty() {
            return Err(GroupError::EmptyOrders);
        }
        Ok(GroupSpec { orders })
    }

    pub fn trivial() -> Self {
        GroupSpec { orders: vec![1] }
    }

    pub fn infinite_cyclic() -> Self {
        GroupSpec { orders: vec![0] }
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    /// Number of cyclic factors, which is also the number of generators.
    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn is_finite(&self) -> bool {
        self.orders.iter().all(|&k| k >= 1)
    }

    /// Group order, `None` when some factor is infinite.
    pub fn order(&self) -> Option<u64> {
        if self.is_finite() {
            Some(self.orders.iter().product())
        } else {
            None
        }
    }

    fn require_finite(&self) -> Result<u64, GroupError> {
        self.order()
            .ok_or_else(|| GroupError::InfiniteGroup(self.orders.clone()))
    }

    /// Reduces an arbitrary integer vector into canonical coordinates.
    pub fn element(&self, coords: Vec<i64>) -> Result<GroupElement, GroupError> {
        self.check_len(coords.len())?;
        Ok(self.reduce(coords))
    }

    fn reduce(&self, mut coords: Vec<i64>) -> GroupElement {
        for (c, &k) in coords.iter_mut().zip(&self.orders) {
            if k >= 1 {
                *c = c.rem_euclid(k as i64);
            }
        }
        GroupElement(coords)
    }

    fn check_len(&self, found: usize) -> Result<(), GroupError> {
        if found != self.rank() {
            return Err(GroupError::LengthMismatch {
                expected: self.rank(),
                found,
            });
        }
        Ok(())
    }

    /// Whether `g` has the right length and is in reduced form.
    pub fn contains(&self, g: &GroupElement) -> bool {
        g.len() == self.rank()
            && g.0
                .iter()
                .zip(&self.orders)
                .all(|(&c, &k)| k == 0 || (0..k as i64).contains(&c))
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    /// The `i`-th standard generator (unit vector), reduced.
    pub fn generator(&self, i: usize) -> GroupElement {
        let mut coords = vec![0; self.rank()];
        coords[i] = 1;
        self.reduce(coords)
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_len(g.len())?;
        self.check_len(h.len())?;
        Ok(self.reduce(g.0.iter().zip(&h.0).map(|(a, b)| a + b).collect()))
    }

    pub fn inv(&self, g: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_len(g.len())?;
        Ok(self.reduce(g.0.iter().map(|a| -a).collect()))
    }

    /// `g * h^-1`.
    pub fn div(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_len(g.len())?;
        self.check_len(h.len())?;
        Ok(self.reduce(g.0.iter().zip(&h.0).map(|(a, b)| a - b).collect()))
    }

    /// `g^n`.
    pub fn pow(&self, g: &GroupElement, n: i64) -> Result<GroupElement, GroupError> {
        self.check_len(g.len())?;
        Ok(self.reduce(g.0.iter().map(|a| a * n).collect()))
    }

    /// Order of an element; `None` for elements of infinite order.
    pub fn element_order(&self, g: &GroupElement) -> Option<u64> {
        let mut acc = 1u64;
        for (&c, &k) in g.0.iter().zip(&self.orders) {
            if k == 0 {
                if c != 0 {
                    return None;
                }
                continue;
            }
            let c = c.rem_euclid(k as i64) as u64;
            acc = acc.lcm(&(k / c.gcd(&k)));
        }
        Some(acc)
    }

    /// All elements in lexicographic order.
    pub fn elements(&self) -> Result<Vec<GroupElement>, GroupError> {
        let order = self.require_finite()?;
        if order > ENUMERATION_LIMIT {
            return Err(GroupError::TooLarge(order));
        }
        let mut out = Vec::with_capacity(order as usize);
        let mut coords = vec![0i64; self.rank()];
        loop {
            out.push(GroupElement(coords.clone()));
            // odometer, last coordinate fastest
            let mut i = self.rank();
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                coords[i] += 1;
                if coords[i] < self.orders[i] as i64 {
                    break;
                }
                coords[i] = 0;
            }
        }
    }

    /// Invariant factors `d1 | d2 | ... | dr` (all > 1); empty for the trivial group.
    pub fn invariant_factors(&self) -> Result<Vec<u64>, GroupError> {
        Ok(Subgroup::full(self)?.invariant_factors())
    }

    /// Every subgroup, sorted by order and then by element list.
    pub fn subgroups(&self) -> Result<Vec<Subgroup>, GroupError> {
        let elements = self.elements()?;
        let trivial = Subgroup::trivial(self)?;
        let mut seen: HashSet<Vec<GroupElement>> = HashSet::new();
        seen.insert(trivial.elements.clone());
        let mut queue = VecDeque::from([trivial]);
        let mut found = Vec::new();
        while let Some(s) = queue.pop_front() {
            let members: HashSet<&GroupElement> = s.elements.iter().collect();
            for g in &elements {
                if members.contains(g) {
                    continue;
                }
                let mut gens = s.generators.clone();
                gens.push(g.clone());
                let next = Subgroup::generated_by(self, &gens)?;
                if seen.insert(next.elements.clone()) {
                    queue.push_back(next);
                }
            }
            found.push(s);
        }
        found.sort_by(|a, b| (a.elements.len(), &a.elements).cmp(&(b.elements.len(), &b.elements)));
        Ok(found)
    }
}

/// Subgroup generated by `gens` inside a finite group, as a sorted element list.
fn closure(spec: &GroupSpec, gens: &[GroupElement]) -> Result<Vec<GroupElement>, GroupError> {
    spec.require_finite()?;
    for g in gens {
        if !spec.contains(g) {
            return Err(GroupError::NotMember(g.clone()));
        }
    }
    let mut set: BTreeSet<GroupElement> = BTreeSet::from([spec.identity()]);
    let mut frontier = vec![spec.identity()];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = spec.mul(&x, g)?;
            if set.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// A subgroup of a finite group in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subgroup {
    parent: GroupSpec,
    elements: Vec<GroupElement>,
    generators: Vec<GroupElement>,
}

impl Subgroup {
    pub fn trivial(parent: &GroupSpec) -> Result<Self, GroupError> {
        parent.require_finite()?;
        Ok(Subgroup {
            parent: parent.clone(),
            elements: vec![parent.identity()],
            generators: Vec::new(),
        })
    }

    pub fn full(parent: &GroupSpec) -> Result<Self, GroupError> {
        let gens: Vec<GroupElement> = (0..parent.rank()).map(|i| parent.generator(i)).collect();
        Subgroup::generated_by(parent, &gens)
    }

    /// Subgroup generated by the given elements.
    pub fn generated_by(parent: &GroupSpec, gens: &[GroupElement]) -> Result<Self, GroupError> {
        let elements = closure(parent, gens)?;
        let generators = irredundant_generators(parent, &elements)?;
        Ok(Subgroup {
            parent: parent.clone(),
            elements,
            generators,
        })
    }

    /// Accepts an explicit element set, which must already be a subgroup.
    pub fn from_elements(parent: &GroupSpec, elems: &[GroupElement]) -> Result<Self, GroupError> {
        parent.require_finite()?;
        let mut set = BTreeSet::new();
        for g in elems {
            if !parent.contains(g) {
                return Err(GroupError::NotMember(g.clone()));
            }
            set.insert(g.clone());
        }
        if !set.contains(&parent.identity()) {
            return Err(GroupError::NotASubgroup("identity missing".into()));
        }
        for a in &set {
            for b in &set {
                let c = parent.div(a, b)?;
                if !set.contains(&c) {
                    return Err(GroupError::NotASubgroup(format!(
                        "{a} * ({b})^-1 = {c} is missing"
                    )));
                }
            }
        }
        let elements: Vec<GroupElement> = set.into_iter().collect();
        let generators = irredundant_generators(parent, &elements)?;
        Ok(Subgroup {
            parent: parent.clone(),
            elements,
            generators,
        })
    }

    pub fn parent(&self) -> &GroupSpec {
        &self.parent
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    /// Irredundant generating sequence: no generator lies in the span of the others.
    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn index(&self) -> u64 {
        // parent is finite by construction
        self.parent.order().unwrap_or(0) / self.order()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn is_full(&self) -> bool {
        Some(self.order()) == self.parent.order()
    }

    /// Invariant factors of the subgroup as an abstract group.
    ///
    /// For each prime p, the sizes of `{x : p^j x = 0}` determine the p-primary
    /// part; the p-parts are then recombined into divisor-chain form.
    pub fn invariant_factors(&self) -> Vec<u64> {
        let orders: Vec<u64> = self
            .elements
            .iter()
            .map(|g| self.parent.element_order(g).unwrap_or(1))
            .collect();
        let n = self.order();
        let mut primes = Vec::new();
        let mut m = n;
        let mut p = 2;
        while m > 1 {
            if m.is_multiple_of(p) {
                primes.push(p);
                while m.is_multiple_of(p) {
                    m /= p;
                }
            }
            p += 1;
        }
        // exponents per prime, largest first
        let mut parts: Vec<(u64, Vec<u32>)> = Vec::new();
        for &p in &primes {
            let mut exps = Vec::new();
            let mut prev_log = 0u32;
            let mut j = 1u32;
            loop {
                let pj = p.pow(j);
                let count = orders.iter().filter(|&&o| pj % o == 0).count() as u64;
                let log = log_p(count, p);
                let diff = log - prev_log;
                if diff == 0 {
                    break;
                }
                // diff = number of cyclic p-factors with exponent >= j
                exps.push(diff);
                prev_log = log;
                j += 1;
            }
            // exps[j-1] = #{factors with exponent >= j}; convert to exponent list
            let mut list = Vec::new();
            for j in 0..exps.len() {
                let at_least = exps[j];
                let more = exps.get(j + 1).copied().unwrap_or(0);
                for _ in 0..(at_least - more) {
                    list.push(j as u32 + 1);
                }
            }
            list.sort_unstable_by(|a, b| b.cmp(a));
            parts.push((p, list));
        }
        let width = parts.iter().map(|(_, l)| l.len()).max().unwrap_or(0);
        let mut factors = vec![1u64; width];
        for (p, list) in &parts {
            for (i, e) in list.iter().enumerate() {
                factors[i] *= p.pow(*e);
            }
        }
        factors.reverse();
        factors
    }

    /// Left cosets `gH`, each sorted, ordered by their least element.
    pub fn cosets(&self) -> Result<Vec<Vec<GroupElement>>, GroupError> {
        let mut assigned: BTreeMap<GroupElement, usize> = BTreeMap::new();
        let mut blocks = Vec::new();
        for g in self.parent.elements()? {
            if assigned.contains_key(&g) {
                continue;
            }
            let mut block: Vec<GroupElement> = self
                .elements
                .iter()
                .map(|h| self.parent.mul(&g, h))
                .collect::<Result<_, _>>()?;
            block.sort();
            for x in &block {
                assigned.insert(x.clone(), blocks.len());
            }
            blocks.push(block);
        }
        Ok(blocks)
    }
}

fn log_p(mut count: u64, p: u64) -> u32 {
    let mut l = 0;
    while count > 1 {
        count /= p;
        l += 1;
    }
    l
}

fn irredundant_generators(
    parent: &GroupSpec,
    elements: &[GroupElement],
) -> Result<Vec<GroupElement>, GroupError> {
    let mut gens: Vec<GroupElement> = Vec::new();
    let mut span: BTreeSet<GroupElement> = BTreeSet::from([parent.identity()]);
    for g in elements {
        if span.contains(g) {
            continue;
        }
        gens.push(g.clone());
        span = closure(parent, &gens)?.into_iter().collect();
        if span.len() == elements.len() {
            break;
        }
    }
    // later generators may have absorbed earlier ones
    let mut i = 0;
    while i < gens.len() {
        let mut rest = gens.clone();
        rest.remove(i);
        if closure(parent, &rest)?.len() == elements.len() {
            gens = rest;
        } else {
            i += 1;
        }
    }
    Ok(gens)
}

/// One representative per coset of a subgroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transversal {
    subgroup: Subgroup,
    reps: Vec<GroupElement>,
}

impl Transversal {
    /// Lexicographically least element of each coset; the coset of `K`
    /// is therefore represented by the identity.
    pub fn normalized(subgroup: &Subgroup) -> Result<Self, GroupError> {
        let reps = subgroup
            .cosets()?
            .into_iter()
            .map(|block| block[0].clone())
            .collect();
        Ok(Transversal {
            subgroup: subgroup.clone(),
            reps,
        })
    }

    /// Validates a caller-supplied representative system and orders it by coset.
    pub fn new(subgroup: &Subgroup, reps: Vec<GroupElement>) -> Result<Self, GroupError> {
        let cosets = subgroup.cosets()?;
        if reps.len() != cosets.len() {
            return Err(GroupError::InvalidTransversal(format!(
                "{} representatives for {} cosets",
                reps.len(),
                cosets.len()
            )));
        }
        let mut ordered: Vec<Option<GroupElement>> = vec![None; cosets.len()];
        for r in reps {
            if !subgroup.parent.contains(&r) {
                return Err(GroupError::NotMember(r));
            }
            let idx = cosets
                .iter()
                .position(|b| b.binary_search(&r).is_ok())
                .ok_or_else(|| GroupError::NotMember(r.clone()))?;
            if ordered[idx].is_some() {
                return Err(GroupError::InvalidTransversal(format!(
                    "two representatives for the coset of {r}"
                )));
            }
            ordered[idx] = Some(r);
        }
        Ok(Transversal {
            subgroup: subgroup.clone(),
            reps: ordered
                .into_iter()
                .map(|r| r.expect("one per coset"))
                .collect(),
        })
    }

    pub fn parent(&self) -> &GroupSpec {
        &self.subgroup.parent
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    /// Representatives, ordered like [`Subgroup::cosets`].
    pub fn reps(&self) -> &[GroupElement] {
        &self.reps
    }

    pub fn is_normalized(&self) -> bool {
        self.reps.contains(&self.subgroup.parent.identity())
    }

    /// Index of the representative whose coset contains `g`.
    pub fn coset_of(&self, g: &GroupElement) -> Result<usize, GroupError> {
        let spec = &self.subgroup.parent;
        for (i, r) in self.reps.iter().enumerate() {
            if self.subgroup.contains(&spec.div(g, r)?) {
                return Ok(i);
            }
        }
        Err(GroupError::NotMember(g.clone()))
    }
}
