//! Concrete F-semilattices: Maróti semilattices, twisted multiples and the
//! small F-trivial algebras.
//!
//! Zero elements are labelled `o` and placed last. Maróti atoms carry the
//! least member of their coset as label; twisted pairs are labelled `u@t`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::algebra::{AlgebraError, AlgebraTables, FSemilattice, Homomorphism};
use crate::group::{GroupElement, GroupError, GroupSpec, Subgroup, Transversal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("subgroup belongs to group {found:?}, expected {expected:?}")]
    ForeignSubgroup { expected: Vec<u64>, found: Vec<u64> },
    #[error("the number of copies must be positive")]
    ZeroCopies,
    #[error("expected an algebra over the infinite cyclic group, got orders {0:?}")]
    NotInfiniteCyclic(Vec<u64>),
    #[error("invalid identification of the inner group with the subgroup: {0}")]
    Identification(String),
    #[error("constructed map is not an isomorphism: {0}")]
    VerificationFailed(String),
}

fn labels<I: IntoIterator<Item = String>>(it: I) -> Vec<String> {
    it.into_iter().collect()
}

fn index_table(elements: &[GroupElement]) -> BTreeMap<GroupElement, usize> {
    elements
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, g)| (g, i))
        .collect()
}

fn check_parent(group: &GroupSpec, sub: &Subgroup) -> Result<(), ConstructionError> {
    if sub.parent() != group {
        return Err(ConstructionError::ForeignSubgroup {
            expected: group.orders().to_vec(),
            found: sub.parent().orders().to_vec(),
        });
    }
    Ok(())
}

/// The one-element algebra `{o}`.
pub fn one_element(group: &GroupSpec) -> FSemilattice {
    FSemilattice::new(AlgebraTables {
        group: group.clone(),
        carrier: vec!["o".into()],
        meet: vec![vec![0]],
        action: vec![vec![0]; group.rank()],
    })
    .expect("one-element algebra is valid")
}

/// The chain `0 < 1` with trivial action.
pub fn two_element(group: &GroupSpec) -> FSemilattice {
    FSemilattice::new(AlgebraTables {
        group: group.clone(),
        carrier: vec!["0".into(), "1".into()],
        meet: vec![vec![0, 0], vec![0, 1]],
        action: vec![vec![0, 1]; group.rank()],
    })
    .expect("two-element chain is valid")
}

/// Cosets of `h` as atoms above a common zero, `F` acting by translation.
pub fn maroti(group: &GroupSpec, h: &Subgroup) -> Result<FSemilattice, ConstructionError> {
    check_parent(group, h)?;
    let cosets = h.cosets()?;
    let n = cosets.len();
    let mut coset_of = BTreeMap::new();
    for (i, block) in cosets.iter().enumerate() {
        for g in block {
            coset_of.insert(g.clone(), i);
        }
    }
    let zero = n;
    let mut meet = vec![vec![zero; n + 1]; n + 1];
    for (i, row) in meet.iter_mut().enumerate().take(n) {
        row[i] = i;
    }
    let mut action = Vec::with_capacity(group.rank());
    for i in 0..group.rank() {
        let gen = group.generator(i);
        let mut perm: Vec<usize> = cosets
            .iter()
            .map(|block| group.mul(&gen, &block[0]).map(|g| coset_of[&g]))
            .collect::<Result<_, GroupError>>()?;
        perm.push(zero);
        action.push(perm);
    }
    let carrier = labels(
        cosets
            .iter()
            .map(|b| b[0].to_string())
            .chain(std::iter::once("o".to_string())),
    );
    Ok(FSemilattice::new(AlgebraTables {
        group: group.clone(),
        carrier,
        meet,
        action,
    })?)
}

/// An isomorphism from the group of an inner algebra `U` onto a subgroup `K`,
/// given by the images of `U`'s generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KIdentification {
    images: Vec<GroupElement>,
    /// Coordinates in `U`'s group of each element of `K`.
    inverse: BTreeMap<GroupElement, Vec<i64>>,
}

impl KIdentification {
    /// Checks that generator `i` of `u_group` may be sent to `images[i]` and
    /// that the resulting homomorphism is a bijection onto `k`.
    pub fn new(
        u_group: &GroupSpec,
        k: &Subgroup,
        images: Vec<GroupElement>,
    ) -> Result<Self, ConstructionError> {
        let f = k.parent();
        if images.len() != u_group.rank() {
            return Err(ConstructionError::Identification(format!(
                "{} images for {} generators",
                images.len(),
                u_group.rank()
            )));
        }
        if let Some(bad) = images.iter().find(|g| !k.contains(g)) {
            return Err(ConstructionError::Identification(format!(
                "{bad} is not in the subgroup"
            )));
        }
        for (img, &ord) in images.iter().zip(u_group.orders()) {
            let o = f.element_order(img).expect("finite parent");
            if ord == 0 || ord % o != 0 {
                return Err(ConstructionError::Identification(format!(
                    "{img} has order {o}, which does not divide {ord}"
                )));
            }
        }
        let elems = u_group.elements()?;
        if elems.len() as u64 != k.order() {
            return Err(ConstructionError::Identification(format!(
                "inner group has {} elements, subgroup has {}",
                elems.len(),
                k.order()
            )));
        }
        let mut inverse = BTreeMap::new();
        for e in elems {
            let mut acc = f.identity();
            for (&c, img) in e.coords().iter().zip(&images) {
                acc = f.mul(&acc, &f.pow(img, c)?)?;
            }
            if inverse.insert(acc.clone(), e.coords().to_vec()).is_some() {
                return Err(ConstructionError::Identification(format!(
                    "two inner elements map to {acc}"
                )));
            }
        }
        Ok(KIdentification { images, inverse })
    }

    /// First identification in lexicographic order of the image tuple.
    pub fn find(u_group: &GroupSpec, k: &Subgroup) -> Result<Self, ConstructionError> {
        let f = k.parent();
        let u_order = u_group
            .order()
            .ok_or_else(|| GroupError::InfiniteGroup(u_group.orders().to_vec()))?;
        if u_order != k.order() {
            return Err(ConstructionError::Identification(format!(
                "inner group has {u_order} elements, subgroup has {}",
                k.order()
            )));
        }
        let candidates: Vec<Vec<GroupElement>> = u_group
            .orders()
            .iter()
            .map(|&ord| {
                k.elements()
                    .iter()
                    .filter(|g| ord % f.element_order(g).expect("finite") == 0)
                    .cloned()
                    .collect()
            })
            .collect();
        let mut choice = Vec::with_capacity(candidates.len());
        fn search(
            u_group: &GroupSpec,
            k: &Subgroup,
            candidates: &[Vec<GroupElement>],
            choice: &mut Vec<GroupElement>,
        ) -> Option<KIdentification> {
            if choice.len() == candidates.len() {
                return KIdentification::new(u_group, k, choice.clone()).ok();
            }
            for g in &candidates[choice.len()] {
                choice.push(g.clone());
                if let Some(found) = search(u_group, k, candidates, choice) {
                    return Some(found);
                }
                choice.pop();
            }
            None
        }
        search(u_group, k, &candidates, &mut choice).ok_or_else(|| {
            ConstructionError::Identification(format!(
                "no isomorphism from {:?} onto a subgroup of order {}",
                u_group.orders(),
                k.order()
            ))
        })
    }

    pub fn images(&self) -> &[GroupElement] {
        &self.images
    }

    /// Coordinates in the inner group of an element of `K`.
    pub fn pull_back(&self, k: &GroupElement) -> Option<&[i64]> {
        self.inverse.get(k).map(Vec::as_slice)
    }
}

/// Inputs of the twisted multiple `Q^K_F(U)`.
#[derive(Debug, Clone)]
pub struct TwistedSpec {
    pub transversal: Transversal,
    pub inner: FSemilattice,
    pub identification: KIdentification,
}

impl TwistedSpec {
    /// Normalized transversal and the first identification found.
    pub fn new(k: &Subgroup, inner: FSemilattice) -> Result<Self, ConstructionError> {
        let identification = KIdentification::find(inner.group(), k)?;
        Ok(TwistedSpec {
            transversal: Transversal::normalized(k)?,
            inner,
            identification,
        })
    }

    pub fn with_transversal(&self, transversal: Transversal) -> Result<Self, ConstructionError> {
        if transversal.subgroup() != self.transversal.subgroup() {
            return Err(ConstructionError::VerificationFailed(
                "transversal belongs to another subgroup".into(),
            ));
        }
        Ok(TwistedSpec {
            transversal,
            ..self.clone()
        })
    }

    pub fn group(&self) -> &GroupSpec {
        self.transversal.parent()
    }

    pub fn subgroup(&self) -> &Subgroup {
        self.transversal.subgroup()
    }

    /// Carrier index of `<u, reps[t]>`; the zero is last.
    pub fn pair_index(&self, u: usize, t: usize) -> usize {
        t * self.inner.size() + u
    }

    /// `k(u)` for `k` in `K`.
    fn act_inner(&self, k: &GroupElement, u: usize) -> usize {
        let coords = self
            .identification
            .pull_back(k)
            .expect("element lies in the subgroup");
        self.inner.act_unchecked(coords, u)
    }
}

/// Builds `Q^K_F(U)`: copies of `U` indexed by the transversal, glued at a
/// new zero, with `g<u,t> = <(g t f^-1)(u), f>` for the representative `f`
/// of `gtK`.
pub fn twisted_multiple(spec: &TwistedSpec) -> Result<FSemilattice, ConstructionError> {
    let f = spec.group();
    let reps = spec.transversal.reps();
    let u = &spec.inner;
    let (nu, nt) = (u.size(), reps.len());
    let zero = nu * nt;

    // coset lookup, built once
    let elements = f.elements()?;
    let element_index = index_table(&elements);
    let mut rep_of = vec![0; elements.len()];
    for g in &elements {
        rep_of[element_index[g]] = spec.transversal.coset_of(g)?;
    }

    let mut meet = vec![vec![zero; zero + 1]; zero + 1];
    for t in 0..nt {
        for a in 0..nu {
            for b in 0..nu {
                meet[spec.pair_index(a, t)][spec.pair_index(b, t)] =
                    spec.pair_index(u.meet(a, b), t);
            }
        }
    }

    let mut action = Vec::with_capacity(f.rank());
    for i in 0..f.rank() {
        let gen = f.generator(i);
        let mut perm = vec![zero; zero + 1];
        for (t, rep) in reps.iter().enumerate() {
            let gt = f.mul(&gen, rep)?;
            let target = rep_of[element_index[&gt]];
            let k = f.div(&gt, &reps[target])?;
            for a in 0..nu {
                perm[spec.pair_index(a, t)] = spec.pair_index(spec.act_inner(&k, a), target);
            }
        }
        action.push(perm);
    }

    let mut carrier = Vec::with_capacity(zero + 1);
    for rep in reps {
        for a in 0..nu {
            carrier.push(format!("{}@{}", u.label(a), rep));
        }
    }
    carrier.push("o".into());
    Ok(FSemilattice::new(AlgebraTables {
        group: f.clone(),
        carrier,
        meet,
        action,
    })?)
}

/// The `n`-fold twisted multiple of an algebra over `Z`: `g` moves copy `i`
/// to copy `i + 1` and wraps the last copy back to copy 0 through `g`.
pub fn n_fold_twisted_multiple(
    a: &FSemilattice,
    n: usize,
) -> Result<FSemilattice, ConstructionError> {
    if n == 0 {
        return Err(ConstructionError::ZeroCopies);
    }
    if a.group().orders() != [0] {
        return Err(ConstructionError::NotInfiniteCyclic(
            a.group().orders().to_vec(),
        ));
    }
    let m = a.size();
    let idx = |x: usize, i: usize| i * m + x;
    let zero = n * m;
    let mut meet = vec![vec![zero; zero + 1]; zero + 1];
    let mut perm = vec![zero; zero + 1];
    let mut carrier = Vec::with_capacity(zero + 1);
    for i in 0..n {
        for x in 0..m {
            for y in 0..m {
                meet[idx(x, i)][idx(y, i)] = idx(a.meet(x, y), i);
            }
            perm[idx(x, i)] = if i + 1 < n {
                idx(x, i + 1)
            } else {
                idx(a.apply_generator(0, x), 0)
            };
            carrier.push(format!("{}@{}", a.label(x), i));
        }
    }
    carrier.push("o".into());
    Ok(FSemilattice::new(AlgebraTables {
        group: a.group().clone(),
        carrier,
        meet,
        action: vec![perm],
    })?)
}

/// `A_k`: `k` atoms over `Z`, rotated by the generator, above a zero.
///
/// Atoms are labelled `a0 .. a{k-1}`.
pub fn a_k(k: usize) -> Result<FSemilattice, ConstructionError> {
    let base = n_fold_twisted_multiple(&one_element(&GroupSpec::infinite_cyclic()), k)?;
    let labels = (0..k)
        .map(|i| format!("a{i}"))
        .chain(std::iter::once("o".into()));
    Ok(base.relabel(labels.collect())?)
}

/// Reinterprets `a` over `target`, where generator `i` of `target` acts as
/// `images[i]` does in `a`. Fails unless this is an action of `target`.
pub fn change_of_groups(
    a: &FSemilattice,
    target: &GroupSpec,
    images: &[GroupElement],
) -> Result<FSemilattice, ConstructionError> {
    if images.len() != target.rank() {
        return Err(GroupError::LengthMismatch {
            expected: target.rank(),
            found: images.len(),
        }
        .into());
    }
    let action = images
        .iter()
        .map(|g| (0..a.size()).map(|x| a.act(g, x)).collect())
        .collect::<Result<Vec<Vec<usize>>, _>>()?;
    Ok(FSemilattice::new(AlgebraTables {
        group: target.clone(),
        carrier: a.labels().to_vec(),
        meet: a.tables().meet.clone(),
        action,
    })?)
}

/// Builds the twisted multiple for two transversals and checks that
/// `<u,t> -> <(t'^-1 t)(u), t'>` with `t' ∈ T2 ∩ tK` is an isomorphism.
pub fn transversal_independence_check(
    spec: &TwistedSpec,
    second: &Transversal,
) -> Result<Homomorphism, ConstructionError> {
    let other = spec.with_transversal(second.clone())?;
    let (a1, a2) = (twisted_multiple(spec)?, twisted_multiple(&other)?);
    let f = spec.group();
    let nu = spec.inner.size();
    let mut map = vec![0; a1.size()];
    map[a1.zero()] = a2.zero();
    for (t, rep) in spec.transversal.reps().iter().enumerate() {
        let t2 = second.coset_of(rep)?;
        let k = f.div(rep, &second.reps()[t2])?;
        for u in 0..nu {
            map[spec.pair_index(u, t)] = other.pair_index(spec.act_inner(&k, u), t2);
        }
    }
    let phi = Homomorphism::new(map);
    if !phi.is_isomorphism(&a1, &a2) {
        return Err(ConstructionError::VerificationFailed(format!(
            "transversals {:?} and {:?}",
            spec.transversal.reps(),
            second.reps()
        )));
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{is_isomorphic_1gen, validate_axioms, Validation};

    fn spec(orders: &[u64]) -> GroupSpec {
        GroupSpec::new(orders.to_vec()).unwrap()
    }

    fn el(f: &GroupSpec, c: &[i64]) -> GroupElement {
        f.element(c.to_vec()).unwrap()
    }

    fn sub(f: &GroupSpec, elems: &[&[i64]]) -> Subgroup {
        let gens: Vec<_> = elems.iter().map(|c| el(f, c)).collect();
        Subgroup::generated_by(f, &gens).unwrap()
    }

    #[test]
    fn maroti_shapes() {
        let z4 = spec(&[4]);
        let m = maroti(&z4, &sub(&z4, &[&[2]])).unwrap();
        assert_eq!(m.labels(), &["0", "1", "o"]);
        assert_eq!(m.act(&el(&z4, &[1]), 0).unwrap(), 1);
        assert_eq!(m.act(&el(&z4, &[1]), 2).unwrap(), 2);

        let v4 = spec(&[2, 2]);
        let m = maroti(&v4, &Subgroup::trivial(&v4).unwrap()).unwrap();
        assert_eq!(m.size(), 5);
        assert_eq!(m.atoms().len(), 4);
        for atom in m.atoms() {
            assert!(m.generates(atom));
        }

        let full = maroti(&v4, &Subgroup::full(&v4).unwrap()).unwrap();
        assert_eq!(full.size(), 2);
        assert!(full.is_group_trivial());
        assert_eq!(
            full.cover_edges(),
            two_element(&v4)
                .cover_edges()
                .iter()
                .map(|&(x, y)| (1 - x, 1 - y))
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn maroti_rejects_foreign_subgroup() {
        let z4 = spec(&[4]);
        let z2 = spec(&[2]);
        assert!(matches!(
            maroti(&z4, &Subgroup::full(&z2).unwrap()),
            Err(ConstructionError::ForeignSubgroup { .. })
        ));
    }

    #[test]
    fn twisted_over_one_element_is_maroti() {
        let z4 = spec(&[4]);
        let k = sub(&z4, &[&[2]]);
        let tw =
            twisted_multiple(&TwistedSpec::new(&k, one_element(&spec(&[2]))).unwrap()).unwrap();
        let m = maroti(&z4, &k).unwrap();
        assert_eq!(tw.size(), 3);
        assert!(is_isomorphic_1gen(&tw, 0, &m, 0).unwrap().is_isomorphic());
    }

    #[test]
    fn twisted_over_chain_has_five_elements() {
        let z4 = spec(&[4]);
        let k = sub(&z4, &[&[2]]);
        let tw =
            twisted_multiple(&TwistedSpec::new(&k, two_element(&spec(&[2]))).unwrap()).unwrap();
        assert_eq!(tw.size(), 5);
        assert_eq!(tw.labels(), &["0@0", "1@0", "0@1", "1@1", "o"]);
    }

    #[test]
    fn twisted_uses_the_inner_action() {
        // U = Maróti(Z2, trivial), K = {0,2} in Z4: g^2 must swap the two atoms of each copy.
        let z4 = spec(&[4]);
        let z2 = spec(&[2]);
        let k = sub(&z4, &[&[2]]);
        let inner = maroti(&z2, &Subgroup::trivial(&z2).unwrap()).unwrap();
        let s = TwistedSpec::new(&k, inner).unwrap();
        let tw = twisted_multiple(&s).unwrap();
        let g2 = el(&z4, &[2]);
        assert_eq!(tw.act(&g2, s.pair_index(0, 0)).unwrap(), s.pair_index(1, 0));
        assert_eq!(tw.act(&g2, s.pair_index(0, 1)).unwrap(), s.pair_index(1, 1));
        assert!(tw.generates(s.pair_index(0, 0)));
    }

    #[test]
    fn transversal_choice_does_not_matter() {
        let z4 = spec(&[4]);
        let k = sub(&z4, &[&[2]]);
        let s = TwistedSpec::new(&k, one_element(&spec(&[2]))).unwrap();
        let t2 = Transversal::new(&k, vec![el(&z4, &[0]), el(&z4, &[3])]).unwrap();
        transversal_independence_check(&s, &t2).unwrap();
        let same = transversal_independence_check(&s, &s.transversal.clone()).unwrap();
        assert_eq!(same.map(), &[0, 1, 2]);

        let z6 = spec(&[6]);
        let k = sub(&z6, &[&[3]]);
        let s = TwistedSpec::new(&k, two_element(&spec(&[2]))).unwrap();
        let t2 = Transversal::new(&k, vec![el(&z6, &[3]), el(&z6, &[4]), el(&z6, &[2])]).unwrap();
        transversal_independence_check(&s, &t2).unwrap();
    }

    #[test]
    fn identification_search() {
        let v4 = spec(&[2, 2]);
        let full = Subgroup::full(&v4).unwrap();
        let id = KIdentification::find(&spec(&[2, 2]), &full).unwrap();
        assert_eq!(id.images(), &[el(&v4, &[0, 1]), el(&v4, &[1, 0])]);
        assert!(KIdentification::find(&spec(&[4]), &full).is_err());
        assert!(KIdentification::new(
            &spec(&[2, 2]),
            &full,
            vec![el(&v4, &[1, 0]), el(&v4, &[1, 0])]
        )
        .is_err());
    }

    #[test]
    fn a_k_examples() {
        let a1 = a_k(1).unwrap();
        assert_eq!(a1.size(), 2);
        assert!(a1.is_group_trivial());
        let a3 = a_k(3).unwrap();
        assert_eq!(a3.labels(), &["a0", "a1", "a2", "o"]);
        assert_eq!(a3.tables().action[0], vec![1, 2, 0, 3]);
        for k in 1..=8 {
            assert_eq!(
                validate_axioms(a_k(k).unwrap().tables()).unwrap(),
                Validation::Valid
            );
        }
        assert_eq!(a_k(0), Err(ConstructionError::ZeroCopies));
    }

    #[test]
    fn a_k_is_a_twisted_multiple_after_change_of_groups() {
        // over Z_n the action of A_n factors; K = trivial, U = one-element.
        // n = 1 gives the two-element chain, which is not 1-generated.
        for n in 2..=6u64 {
            let zn = spec(&[n]);
            let reduced = change_of_groups(
                &a_k(n as usize).unwrap(),
                &zn,
                &[el(&GroupSpec::infinite_cyclic(), &[1])],
            )
            .unwrap();
            let tw = twisted_multiple(
                &TwistedSpec::new(&Subgroup::trivial(&zn).unwrap(), one_element(&spec(&[1])))
                    .unwrap(),
            )
            .unwrap();
            assert_eq!(reduced.size(), tw.size());
            assert!(is_isomorphic_1gen(&reduced, 0, &tw, 0)
                .unwrap()
                .is_isomorphic());
        }
    }

    #[test]
    fn n_fold_over_a_nontrivial_base() {
        // twm(A_2, 3) over Z acts with period 6 on the atoms of each copy
        let twm = n_fold_twisted_multiple(&a_k(2).unwrap(), 3).unwrap();
        assert_eq!(twm.size(), 10);
        assert_eq!(twm.generator_perm_order(0), 6);
        let z6 = spec(&[6]);
        let k = sub(&z6, &[&[3]]);
        let inner = change_of_groups(
            &a_k(2).unwrap(),
            &spec(&[2]),
            &[el(&GroupSpec::infinite_cyclic(), &[1])],
        )
        .unwrap();
        let reduced =
            change_of_groups(&twm, &z6, &[el(&GroupSpec::infinite_cyclic(), &[1])]).unwrap();
        let ident = KIdentification::new(inner.group(), &k, vec![el(&z6, &[3])]).unwrap();
        let s = TwistedSpec {
            transversal: Transversal::new(&k, vec![el(&z6, &[0]), el(&z6, &[1]), el(&z6, &[2])])
                .unwrap(),
            inner,
            identification: ident,
        };
        let tw = twisted_multiple(&s).unwrap();
        assert!(reduced.generates(0) && tw.generates(0));
        assert!(is_isomorphic_1gen(&reduced, 0, &tw, 0)
            .unwrap()
            .is_isomorphic());
    }

    #[test]
    fn change_of_groups_rejects_non_actions() {
        assert!(change_of_groups(
            &a_k(3).unwrap(),
            &spec(&[2]),
            &[el(&GroupSpec::infinite_cyclic(), &[1])]
        )
        .is_err());
    }
}
