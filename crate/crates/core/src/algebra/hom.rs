use serde::Serialize;

use super::{AlgebraError, FSemilattice};
use crate::term::Term;

/// A map between carriers, stored as an index table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Homomorphism {
    map: Vec<usize>,
}

impl Homomorphism {
    pub fn new(map: Vec<usize>) -> Self {
        Homomorphism { map }
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn is_bijective(&self, target_size: usize) -> bool {
        let mut hit = vec![false; target_size];
        for &y in &self.map {
            if y >= target_size || hit[y] {
                return false;
            }
            hit[y] = true;
        }
        self.map.len() == target_size
    }

    /// Sorted, deduplicated image.
    pub fn image(&self) -> Vec<usize> {
        let mut img = self.map.clone();
        img.sort_unstable();
        img.dedup();
        img
    }

    /// Checks that the map preserves meet and every generator.
    pub fn preserves_operations(&self, source: &FSemilattice, target: &FSemilattice) -> bool {
        let n = source.size();
        if self.map.len() != n || self.map.iter().any(|&y| y >= target.size()) {
            return false;
        }
        if source.group() != target.group() {
            return false;
        }
        for x in 0..n {
            for y in 0..n {
                if self.map[source.meet(x, y)] != target.meet(self.map[x], self.map[y]) {
                    return false;
                }
            }
            for i in 0..source.generator_count() {
                if self.map[source.apply_generator(i, x)] != target.apply_generator(i, self.map[x])
                {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_isomorphism(&self, source: &FSemilattice, target: &FSemilattice) -> bool {
        self.is_bijective(target.size()) && self.preserves_operations(source, target)
    }
}

/// Outcome of extending `a -> b` along the terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HomExtension {
    /// `t(a) -> t(b)` is well defined; the map is onto `<b>`.
    Defined(Homomorphism),
    /// Two terms agree at `a` but not at `b`.
    NotWellDefined {
        left: Term,
        right: Term,
        /// `left(a) = right(a)`
        source_value: usize,
        /// `left(b)` and `right(b)`
        target_values: (usize, usize),
    },
}

struct Closure {
    map: Vec<Option<(usize, Term)>>,
}

/// Closes `{(a, b)}` under meets of pairs and generator actions (and their
/// inverses), keeping for each reached source element the first term that
/// produced it. Stops at the first source element sent to two targets.
fn pair_closure(
    src: &FSemilattice,
    a: usize,
    dst: &FSemilattice,
    b: usize,
) -> Result<Closure, HomExtension> {
    let group = src.group();
    let gens: Vec<_> = (0..group.rank())
        .map(|i| group.generator(i))
        .chain((0..group.rank()).map(|i| group.inv(&group.generator(i)).expect("same rank")))
        .collect();
    let r = group.rank();
    let mut map: Vec<Option<(usize, Term)>> = vec![None; src.size()];
    map[a] = Some((b, Term::var(group, 0)));
    let mut order = vec![a];
    let mut next = 0;
    while next < order.len() {
        let x = order[next];
        next += 1;
        let (y, t) = map[x].clone().expect("queued elements are mapped");
        let mut candidates: Vec<(usize, usize, Term)> = Vec::new();
        for (k, g) in gens.iter().enumerate() {
            let (sx, sy) = if k < r {
                (src.apply_generator(k, x), dst.apply_generator(k, y))
            } else {
                (
                    src.apply_generator_inv(k - r, x),
                    dst.apply_generator_inv(k - r, y),
                )
            };
            candidates.push((sx, sy, t.apply(group, g)));
        }
        for &z in &order[..next] {
            let (w, s) = map[z].clone().expect("mapped");
            candidates.push((src.meet(x, z), dst.meet(y, w), t.meet(&s)));
        }
        for (sx, sy, st) in candidates {
            match &map[sx] {
                None => {
                    map[sx] = Some((sy, st));
                    order.push(sx);
                }
                Some((y0, t0)) if *y0 != sy => {
                    return Err(HomExtension::NotWellDefined {
                        left: t0.clone(),
                        right: st,
                        source_value: sx,
                        target_values: (*y0, sy),
                    });
                }
                Some(_) => {}
            }
        }
    }
    Ok(Closure { map })
}

/// The canonical map `t(a) -> t(b)` from the algebra generated by `a`.
///
/// Fails if `a` does not generate `src` or the algebras are over different
/// groups.
pub fn hom_extend(
    src: &FSemilattice,
    a: usize,
    dst: &FSemilattice,
    b: usize,
) -> Result<HomExtension, AlgebraError> {
    if src.group() != dst.group() {
        return Err(AlgebraError::GroupMismatch(
            src.group().orders().to_vec(),
            dst.group().orders().to_vec(),
        ));
    }
    src.check_element(a)?;
    dst.check_element(b)?;
    if !src.generates(a) {
        return Err(AlgebraError::NotGenerating(a));
    }
    match pair_closure(src, a, dst, b) {
        Ok(c) => Ok(HomExtension::Defined(Homomorphism::new(
            c.map
                .into_iter()
                .map(|e| e.expect("a generates src").0)
                .collect(),
        ))),
        Err(conflict) => Ok(conflict),
    }
}

/// For each element of `<a>`, a unary term `t` with `t(a)` equal to it.
pub fn unary_terms(alg: &FSemilattice, a: usize) -> Result<Vec<Option<Term>>, AlgebraError> {
    alg.check_element(a)?;
    match pair_closure(alg, a, alg, a) {
        Ok(c) => Ok(c.map.into_iter().map(|e| e.map(|(_, t)| t)).collect()),
        Err(_) => unreachable!("the diagonal relation is always a function"),
    }
}

/// Isomorphism test for 1-generated algebras with fixed generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoVerdict {
    Isomorphic(Homomorphism),
    SizeMismatch(usize, usize),
    /// `a -> b` does not extend; certificate from the forward direction.
    ForwardFails(HomExtension),
    /// `b -> a` does not extend.
    BackwardFails(HomExtension),
}

impl IsoVerdict {
    pub fn is_isomorphic(&self) -> bool {
        matches!(self, IsoVerdict::Isomorphic(_))
    }

    pub fn witness(&self) -> Option<&Homomorphism> {
        match self {
            IsoVerdict::Isomorphic(h) => Some(h),
            _ => None,
        }
    }
}

/// Whether `(A, a)` and `(B, b)` are isomorphic via a map sending `a` to `b`.
///
/// Both `a -> b` and `b -> a` must extend to homomorphisms; the forward map is
/// then the witness.
pub fn is_isomorphic_1gen(
    src: &FSemilattice,
    a: usize,
    dst: &FSemilattice,
    b: usize,
) -> Result<IsoVerdict, AlgebraError> {
    if !dst.generates(b) {
        dst.check_element(b)?;
        return Err(AlgebraError::NotGenerating(b));
    }
    let forward = hom_extend(src, a, dst, b)?;
    if src.size() != dst.size() {
        return Ok(IsoVerdict::SizeMismatch(src.size(), dst.size()));
    }
    let HomExtension::Defined(phi) = forward else {
        return Ok(IsoVerdict::ForwardFails(forward));
    };
    let backward = hom_extend(dst, b, src, a)?;
    if !matches!(backward, HomExtension::Defined(_)) {
        return Ok(IsoVerdict::BackwardFails(backward));
    }
    Ok(IsoVerdict::Isomorphic(phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fixtures::a7;
    use crate::constructions::maroti;
    use crate::group::{GroupSpec, Subgroup};

    #[test]
    fn maroti_atom_swap() {
        let f = GroupSpec::new(vec![2]).unwrap();
        let m = maroti(&f, &Subgroup::trivial(&f).unwrap()).unwrap();
        let (a0, a1) = (m.index_of("0").unwrap(), m.index_of("1").unwrap());
        let HomExtension::Defined(h) = hom_extend(&m, a0, &m, a1).unwrap() else {
            panic!("should extend");
        };
        assert_eq!(h.apply(a0), a1);
        assert_eq!(h.apply(a1), a0);
        assert_eq!(h.apply(m.zero()), m.zero());
        assert!(h.is_isomorphism(&m, &m));
    }

    #[test]
    fn a7_onto_p_subalgebra() {
        let a = a7();
        let sub = a.subalgebra_generated(a.index_of("p").unwrap()).unwrap();
        let p = sub.algebra.index_of("p").unwrap();
        let HomExtension::Defined(h) = hom_extend(&a, 0, &sub.algebra, p).unwrap() else {
            panic!("a0 -> p should extend");
        };
        assert_eq!(h.image().len(), 3);
        assert!(h.preserves_operations(&a, &sub.algebra));
    }

    #[test]
    fn p_to_a0_is_not_well_defined() {
        let a = a7();
        let sub = a.subalgebra_generated(a.index_of("p").unwrap()).unwrap();
        let p = sub.algebra.index_of("p").unwrap();
        let HomExtension::NotWellDefined {
            left,
            right,
            source_value,
            target_values,
        } = hom_extend(&sub.algebra, p, &a, 0).unwrap()
        else {
            panic!("p -> a0 must not extend");
        };
        // the witness is replayable: equal at p, different at a0
        assert_eq!(left.eval(&sub.algebra, &[p]).unwrap(), source_value);
        assert_eq!(right.eval(&sub.algebra, &[p]).unwrap(), source_value);
        assert_eq!(left.eval(&a, &[0]).unwrap(), target_values.0);
        assert_eq!(right.eval(&a, &[0]).unwrap(), target_values.1);
        assert_ne!(target_values.0, target_values.1);
    }

    #[test]
    fn not_generating_is_an_error() {
        let a = a7();
        let p = a.index_of("p").unwrap();
        assert_eq!(
            hom_extend(&a, p, &a, 0),
            Err(AlgebraError::NotGenerating(p))
        );
    }

    #[test]
    fn iso_examples() {
        let a = a7();
        let sub = a.subalgebra_generated(a.index_of("p").unwrap()).unwrap();
        let p = sub.algebra.index_of("p").unwrap();
        assert_eq!(
            is_isomorphic_1gen(&a, 0, &sub.algebra, p).unwrap(),
            IsoVerdict::SizeMismatch(7, 3)
        );
        let same = is_isomorphic_1gen(&a, 0, &a, 0).unwrap();
        assert_eq!(same.witness().unwrap().map(), &[0, 1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn unary_terms_reach_everything() {
        let a = a7();
        let terms = unary_terms(&a, 0).unwrap();
        for (x, t) in terms.iter().enumerate() {
            assert_eq!(t.as_ref().unwrap().eval(&a, &[0]).unwrap(), x);
        }
    }
}
