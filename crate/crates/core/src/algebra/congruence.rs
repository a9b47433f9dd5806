use std::collections::BTreeSet;

use serde::Serialize;

use super::{AlgebraError, AlgebraTables, FSemilattice};

pub const DEFAULT_CONGRUENCE_LIMIT: usize = 24;

/// A partition of the carrier, stored canonically: `class[x]` numbers the
/// blocks in order of their least element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Congruence {
    #[serde(skip)]
    class: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Congruence {
    fn from_roots(roots: &[usize]) -> Congruence {
        let n = roots.len();
        let mut class = vec![usize::MAX; n];
        let mut label_of_root = vec![usize::MAX; n];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            let r = roots[x];
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = blocks.len();
                blocks.push(Vec::new());
            }
            class[x] = label_of_root[r];
            blocks[class[x]].push(x);
        }
        Congruence { class, blocks }
    }

    /// Builds a partition from blocks; does not check compatibility.
    pub fn from_blocks(size: usize, blocks: &[Vec<usize>]) -> Result<Congruence, AlgebraError> {
        let mut roots = vec![usize::MAX; size];
        for block in blocks {
            let Some(&first) = block.iter().min() else {
                return Err(AlgebraError::InvalidCongruence("empty block".into()));
            };
            for &x in block {
                if x >= size || roots[x] != usize::MAX {
                    return Err(AlgebraError::InvalidCongruence(format!(
                        "element {x} is out of range or in two blocks"
                    )));
                }
                roots[x] = first;
            }
        }
        if roots.contains(&usize::MAX) {
            return Err(AlgebraError::InvalidCongruence(
                "blocks do not cover the carrier".into(),
            ));
        }
        Ok(Congruence::from_roots(&roots))
    }

    pub fn identity(size: usize) -> Congruence {
        Congruence::from_roots(&(0..size).collect::<Vec<_>>())
    }

    pub fn total(size: usize) -> Congruence {
        Congruence::from_roots(&vec![0; size])
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class[x]
    }

    pub fn related(&self, x: usize, y: usize) -> bool {
        self.class[x] == self.class[y]
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.len() == self.class.len()
    }

    pub fn is_total(&self) -> bool {
        self.blocks.len() == 1
    }

    /// Compatibility with meet and with every generator.
    pub fn is_compatible(&self, a: &FSemilattice) -> bool {
        let n = a.size();
        if self.class.len() != n {
            return false;
        }
        for x in 0..n {
            for y in (x + 1)..n {
                if !self.related(x, y) {
                    continue;
                }
                for z in 0..n {
                    if !self.related(a.meet(x, z), a.meet(y, z)) {
                        return false;
                    }
                }
                for i in 0..a.generator_count() {
                    if !self.related(a.apply_generator(i, x), a.apply_generator(i, y)) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true if two classes were merged.
    fn union(&mut self, x: usize, y: usize) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        // keep the smaller index as root
        let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
        self.parent[hi] = lo;
        true
    }

    fn roots(&mut self) -> Vec<usize> {
        (0..self.parent.len()).map(|x| self.find(x)).collect()
    }
}

/// Smallest congruence containing the given pairs.
fn generated(a: &FSemilattice, uf: &mut UnionFind) -> Congruence {
    let n = a.size();
    loop {
        let mut changed = false;
        for x in 0..n {
            let r = uf.find(x);
            if r == x {
                continue;
            }
            for z in 0..n {
                changed |= uf.union(a.meet(x, z), a.meet(r, z));
            }
            // on a finite carrier, closure under g gives closure under g^-1
            for i in 0..a.generator_count() {
                changed |= uf.union(a.apply_generator(i, x), a.apply_generator(i, r));
            }
        }
        if !changed {
            return Congruence::from_roots(&uf.roots());
        }
    }
}

fn join(a: &FSemilattice, s: &Congruence, t: &Congruence) -> Congruence {
    let mut uf = UnionFind::new(a.size());
    for c in [s, t] {
        for block in &c.blocks {
            for &x in &block[1..] {
                uf.union(block[0], x);
            }
        }
    }
    // the join of congruences is their equivalence join, already compatible
    Congruence::from_roots(&uf.roots())
}

/// All congruences: principal congruences closed under joins.
///
/// Sorted from finest (most blocks) to coarsest, ties broken by blocks.
pub(super) fn congruences(a: &FSemilattice, limit: usize) -> Result<Vec<Congruence>, AlgebraError> {
    let n = a.size();
    if n > limit {
        return Err(AlgebraError::LimitExceeded { size: n, limit });
    }
    let mut all: BTreeSet<Congruence> = BTreeSet::new();
    all.insert(Congruence::identity(n));
    let mut principal = Vec::new();
    for x in 0..n {
        for y in (x + 1)..n {
            let mut uf = UnionFind::new(n);
            uf.union(x, y);
            let c = generated(a, &mut uf);
            if all.insert(c.clone()) {
                principal.push(c);
            }
        }
    }
    // join closure: joining with principal congruences suffices
    let mut frontier: Vec<Congruence> = all.iter().cloned().collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for c in &frontier {
            for p in &principal {
                let j = join(a, c, p);
                if all.insert(j.clone()) {
                    next.push(j);
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<Congruence> = all.into_iter().collect();
    out.sort_by(|s, t| {
        t.blocks
            .len()
            .cmp(&s.blocks.len())
            .then_with(|| s.blocks.cmp(&t.blocks))
    });
    Ok(out)
}

/// Quotient algebra; block `i` becomes element `i`, labelled `{l1,l2,..}`.
pub(super) fn quotient(a: &FSemilattice, rho: &Congruence) -> Result<FSemilattice, AlgebraError> {
    if !rho.is_compatible(a) {
        return Err(AlgebraError::InvalidCongruence(
            "not compatible with the operations".into(),
        ));
    }
    let reps: Vec<usize> = rho.blocks.iter().map(|b| b[0]).collect();
    let carrier = rho
        .blocks
        .iter()
        .map(|b| {
            if b.len() == 1 {
                a.label(b[0]).to_string()
            } else {
                let labels: Vec<&str> = b.iter().map(|&x| a.label(x)).collect();
                format!("{{{}}}", labels.join(","))
            }
        })
        .collect();
    let meet = reps
        .iter()
        .map(|&x| reps.iter().map(|&y| rho.class_of(a.meet(x, y))).collect())
        .collect();
    let action = (0..a.generator_count())
        .map(|i| {
            reps.iter()
                .map(|&x| rho.class_of(a.apply_generator(i, x)))
                .collect()
        })
        .collect();
    FSemilattice::new(AlgebraTables {
        group: a.group().clone(),
        carrier,
        meet,
        action,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fixtures::a7;
    use crate::algebra::is_isomorphic_1gen;
    use crate::constructions::maroti;
    use crate::group::{GroupSpec, Subgroup};

    #[test]
    fn maroti_z2_is_simple() {
        let f = GroupSpec::new(vec![2]).unwrap();
        let m = maroti(&f, &Subgroup::trivial(&f).unwrap()).unwrap();
        let cons = m.congruences(DEFAULT_CONGRUENCE_LIMIT).unwrap();
        assert_eq!(cons.len(), 2);
        assert!(cons[0].is_identity());
        assert!(cons[1].is_total());
    }

    #[test]
    fn a7_has_the_bottom_collapse() {
        let a = a7();
        let cons = a.congruences(DEFAULT_CONGRUENCE_LIMIT).unwrap();
        let theta =
            Congruence::from_blocks(7, &[vec![0], vec![1], vec![2], vec![3], vec![4, 5, 6]])
                .unwrap();
        assert!(cons.contains(&theta));
        for c in &cons {
            assert!(c.is_compatible(&a));
        }
        let q = a.quotient(&theta).unwrap();
        assert_eq!(q.size(), 5);
        assert_eq!(q.atoms(), vec![0, 1, 2, 3]);
        assert_eq!(q.tables().action[0], vec![1, 2, 3, 0, 4]);
    }

    #[test]
    fn trivial_quotients() {
        let a = a7();
        let delta = a.quotient(&Congruence::identity(7)).unwrap();
        assert!(is_isomorphic_1gen(&a, 0, &delta, 0)
            .unwrap()
            .is_isomorphic());
        assert_eq!(a.quotient(&Congruence::total(7)).unwrap().size(), 1);
    }

    #[test]
    fn limit_is_enforced() {
        let a = a7();
        assert_eq!(
            a.congruences(6),
            Err(AlgebraError::LimitExceeded { size: 7, limit: 6 })
        );
    }

    #[test]
    fn incompatible_partition_has_no_quotient() {
        let a = a7();
        let bad = Congruence::from_blocks(
            7,
            &[vec![0, 1], vec![2], vec![3], vec![4], vec![5], vec![6]],
        )
        .unwrap();
        assert!(!bad.is_compatible(&a));
        assert!(a.quotient(&bad).is_err());
    }
}
