//! Quasi-identities and minimal quasivarieties at finite scale.
//!
//! The central test is [`is_minimal_free`]: a nontrivial algebra generated by
//! `a` generates a minimal quasivariety exactly when every nonzero element
//! generates a copy of it. The remaining functions build certificates around
//! that criterion: separating quasi-identities, the subgroup correspondence for
//! finite groups, and the `(K, U)` decomposition.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{
    is_isomorphic_1gen, unary_terms, AlgebraError, AlgebraTables, Congruence, FSemilattice,
    Homomorphism, IsoVerdict,
};
use crate::constructions::{
    change_of_groups, maroti, twisted_multiple, two_element, ConstructionError, KIdentification,
    TwistedSpec,
};
use crate::group::{GroupElement, GroupError, GroupSpec, Subgroup, Transversal};
use crate::term::{QuasiIdentity, Term, TermError};

/// Largest number of valuations a model check will enumerate.
pub const VALUATION_LIMIT: u64 = 1 << 26;

/// Default bound on the number of translates in the block-condition check of
/// [`decompose_ku`].
pub const DEFAULT_BLOCK_BOUND: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuasivarError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error("the algebra is trivial")]
    Trivial,
    #[error("{count} valuations exceed the limit {limit}")]
    TooManyValuations { count: String, limit: u64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("K must be a proper subgroup")]
    ImproperSubgroup,
    #[error("internal check failed: {0}")]
    CheckFailed(String),
}

/// Result of checking a quasi-identity in a finite algebra.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ModelCheck {
    Holds,
    /// First failing valuation in lexicographic order, `x` most significant.
    Fails {
        valuation: Vec<usize>,
    },
}

impl ModelCheck {
    pub fn holds(&self) -> bool {
        matches!(self, ModelCheck::Holds)
    }
}

/// Checks `qi` under every valuation of its variables.
pub fn holds_quasi_identity(
    a: &FSemilattice,
    qi: &QuasiIdentity,
) -> Result<ModelCheck, QuasivarError> {
    let arity = qi.arity() as u32;
    let n = a.size() as u64;
    let total = n
        .checked_pow(arity)
        .filter(|&t| t <= VALUATION_LIMIT)
        .ok_or_else(|| QuasivarError::TooManyValuations {
            count: format!("{n}^{arity}"),
            limit: VALUATION_LIMIT,
        })?;
    let decode = |mut i: u64| {
        let mut v = vec![0usize; arity as usize];
        for slot in v.iter_mut().rev() {
            *slot = (i % n) as usize;
            i /= n;
        }
        v
    };
    // surface evaluation errors before the search
    qi.holds_at(a, &decode(0))?;
    let failing = (0..total)
        .into_par_iter()
        .find_first(|&i| !qi.holds_at(a, &decode(i)).expect("checked above"));
    Ok(match failing {
        None => ModelCheck::Holds,
        Some(i) => ModelCheck::Fails {
            valuation: decode(i),
        },
    })
}

fn require_generator(a: &FSemilattice, gen: usize) -> Result<(), QuasivarError> {
    if gen >= a.size() {
        return Err(AlgebraError::NoSuchElement(gen).into());
    }
    if a.is_trivial() {
        return Err(QuasivarError::Trivial);
    }
    if !a.generates(gen) {
        return Err(AlgebraError::NotGenerating(gen).into());
    }
    Ok(())
}

/// `s(x) = t(x) -> x = x ^ y`.
pub fn collapse_quasi_identity(group: &GroupSpec, s: Term, t: Term) -> QuasiIdentity {
    let x = Term::var(group, 0);
    let y = Term::var(group, 1);
    QuasiIdentity {
        premises: vec![(s, t)],
        conclusion: (x.clone(), x.meet(&y)),
    }
}

/// `x = g(x) -> x = x ^ y` for the first `g` (in element order of the acting
/// group) that moves the generator.
///
/// It holds in every algebra whose nonzero elements all generate copies of
/// `A`, and fails in the two-element chain.
pub fn separating_quasi_identity(
    a: &FSemilattice,
    gen: usize,
) -> Result<QuasiIdentity, QuasivarError> {
    require_generator(a, gen)?;
    let g = a
        .effective_elements()
        .into_iter()
        .find(|g| a.act_unchecked(g.coords(), gen) != gen)
        .ok_or_else(|| {
            QuasivarError::Precondition("no group element moves the generator".into())
        })?;
    let group = a.group();
    Ok(collapse_quasi_identity(
        group,
        Term::var(group, 0),
        Term::translate(g, 0),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Minimality {
    Minimal,
    /// `<witness>` is not isomorphic to the algebra via `gen -> witness`.
    NotMinimal {
        witness: usize,
        verdict: IsoVerdict,
    },
}

impl Minimality {
    pub fn is_minimal(&self) -> bool {
        matches!(self, Minimality::Minimal)
    }
}

/// Whether every nonzero element generates a subalgebra isomorphic to `A`
/// (with the generator going to that element). The first counterexample in
/// index order is returned otherwise.
pub fn is_minimal_free(a: &FSemilattice, gen: usize) -> Result<Minimality, QuasivarError> {
    require_generator(a, gen)?;
    for b in (0..a.size()).filter(|&b| b != a.zero()) {
        let sub = a.subalgebra_generated(b)?;
        let local = sub.index_of(b).expect("b lies in its own subalgebra");
        let verdict = is_isomorphic_1gen(a, gen, &sub.algebra, local)?;
        if !verdict.is_isomorphic() {
            return Ok(Minimality::NotMinimal {
                witness: b,
                verdict,
            });
        }
    }
    Ok(Minimality::Minimal)
}

/// `{g ∈ F : g(x) = x}` for a finite group.
pub fn stabilizer(a: &FSemilattice, x: usize) -> Result<Subgroup, QuasivarError> {
    if x >= a.size() {
        return Err(AlgebraError::NoSuchElement(x).into());
    }
    let group = a.group();
    let fixing: Vec<_> = group
        .elements()?
        .into_iter()
        .filter(|g| a.act_unchecked(g.coords(), x) == x)
        .collect();
    Ok(Subgroup::from_elements(group, &fixing)?)
}

/// The stabilizer inside the finite group through which the action factors
/// ([`FSemilattice::effective_group`]); for an infinite group this is the
/// image of the true stabilizer.
pub fn stabilizer_image(a: &FSemilattice, x: usize) -> Result<Subgroup, QuasivarError> {
    if x >= a.size() {
        return Err(AlgebraError::NoSuchElement(x).into());
    }
    let eff = a.effective_group();
    let fixing: Vec<_> = eff
        .elements()?
        .into_iter()
        .filter(|g| a.act_unchecked(g.coords(), x) == x)
        .collect();
    Ok(Subgroup::from_elements(&eff, &fixing)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct BijectionEntry {
    pub subgroup: Vec<GroupElement>,
    pub generators: Vec<GroupElement>,
    pub carrier_size: usize,
    /// `None` for the full group, whose representative is the two-element
    /// chain and is not 1-generated.
    pub minimal: Option<bool>,
    /// Stabilizer of the atom `1H`.
    pub stabilizer: Vec<GroupElement>,
    pub round_trip: bool,
    /// Separating quasi-identity, checked to hold in the representative and to
    /// fail in the two-element chain.
    pub separating_quasi_identity: Option<String>,
    pub two_element_witness: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BijectionReport {
    pub orders: Vec<u64>,
    pub subgroup_count: usize,
    pub representative_count: usize,
    pub pairs_checked: usize,
    /// Pairs of distinct subgroups whose representatives turned out isomorphic.
    pub isomorphic_pairs: Vec<(usize, usize)>,
    pub entries: Vec<BijectionEntry>,
    pub ok: bool,
    pub summary: String,
}

fn bijection_entry(f: &GroupSpec, h: &Subgroup) -> Result<(BijectionEntry, bool), QuasivarError> {
    let m = maroti(f, h)?;
    let atom = 0; // the coset of the identity comes first
    let stab = stabilizer(&m, atom)?;
    let round_trip = &stab == h;
    let mut ok = round_trip;
    let (minimal, qi, witness) = if h.is_full() {
        (None, None, None)
    } else {
        let minimal = is_minimal_free(&m, atom)?.is_minimal();
        let qi = separating_quasi_identity(&m, atom)?;
        let in_m = holds_quasi_identity(&m, &qi)?;
        let in_two = holds_quasi_identity(&two_element(f), &qi)?;
        let witness = match &in_two {
            ModelCheck::Fails { valuation } => Some(valuation.clone()),
            ModelCheck::Holds => None,
        };
        ok &= minimal && in_m.holds() && witness.is_some();
        (Some(minimal), Some(qi.to_string()), witness)
    };
    Ok((
        BijectionEntry {
            subgroup: h.elements().to_vec(),
            generators: h.generators().to_vec(),
            carrier_size: m.size(),
            minimal,
            stabilizer: stab.elements().to_vec(),
            round_trip,
            separating_quasi_identity: qi,
            two_element_witness: witness,
        },
        ok,
    ))
}

/// Whether the Maróti algebras of two subgroups are isomorphic, trying every
/// atom of the second as image of the first atom of the first.
fn maroti_isomorphic(f: &GroupSpec, h1: &Subgroup, h2: &Subgroup) -> Result<bool, QuasivarError> {
    let (m1, m2) = (maroti(f, h1)?, maroti(f, h2)?);
    if m1.size() != m2.size() {
        return Ok(false);
    }
    if h1.is_full() || h2.is_full() {
        // both are the two-element chain
        return Ok(true);
    }
    for b in m2.atoms() {
        if is_isomorphic_1gen(&m1, 0, &m2, b)?.is_isomorphic() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Checks the correspondence between subgroups of a finite group and the
/// minimal quasivarieties generated by Maróti semilattices.
pub fn verify_bijection(f: &GroupSpec) -> Result<BijectionReport, QuasivarError> {
    let subgroups = f.subgroups()?;
    let checked = subgroups
        .par_iter()
        .map(|h| bijection_entry(f, h))
        .collect::<Result<Vec<_>, _>>()?;
    let pairs: Vec<(usize, usize)> = (0..subgroups.len())
        .flat_map(|i| ((i + 1)..subgroups.len()).map(move |j| (i, j)))
        .collect();
    let isomorphic_pairs = pairs
        .par_iter()
        .map(|&(i, j)| {
            maroti_isomorphic(f, &subgroups[i], &subgroups[j]).map(|iso| iso.then_some((i, j)))
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    let mut entries = Vec::with_capacity(checked.len());
    let mut good = 0;
    for (entry, ok) in checked {
        good += ok as usize;
        entries.push(entry);
    }
    // representatives that passed their own checks and are not isomorphic to another
    let clashing: BTreeSet<usize> = isomorphic_pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
    let representative_count = good - clashing.len().min(good);
    let n = subgroups.len();
    let ok = good == n && isomorphic_pairs.is_empty();
    let summary = if ok {
        format!("{n} subgroups, {representative_count} minimal representatives, all round-trips OK")
    } else {
        format!(
            "{n} subgroups, {representative_count} minimal representatives, {} failed checks, {} isomorphic pairs",
            n - good,
            isomorphic_pairs.len()
        )
    };
    Ok(BijectionReport {
        orders: f.orders().to_vec(),
        subgroup_count: n,
        representative_count,
        pairs_checked: pairs.len(),
        isomorphic_pairs,
        entries,
        ok,
        summary,
    })
}

/// `A ≅ Q^K_F(U)` with explicit data.
#[derive(Debug, Clone)]
pub struct DecompositionResult {
    /// The finite group the decomposition is computed over. Equal to the
    /// algebra's group when that is finite; otherwise each infinite factor is
    /// replaced by the order of its permutation, and `k` describes the image
    /// of the true subgroup (its preimage is `k` plus the kernel).
    pub acting_group: GroupSpec,
    pub k: Subgroup,
    pub u: FSemilattice,
    /// Elements of the original algebra forming `U`.
    pub u_embedding: Vec<usize>,
    pub twisted: FSemilattice,
    /// `<u,t> -> t(u)`, from the twisted multiple onto the algebra.
    pub isomorphism: Homomorphism,
    /// Number of translate sets checked for the block condition.
    pub block_checks: usize,
    pub block_bound: usize,
}

fn k_closure(a: &FSemilattice, seed: usize, k: &Subgroup) -> Vec<usize> {
    let mut member = BTreeSet::from([seed]);
    let mut frontier = vec![seed];
    while let Some(x) = frontier.pop() {
        let mut fresh: Vec<usize> = k
            .elements()
            .iter()
            .map(|g| a.act_unchecked(g.coords(), x))
            .collect();
        fresh.extend(member.iter().map(|&y| a.meet(x, y)));
        for y in fresh {
            if member.insert(y) {
                frontier.push(y);
            }
        }
    }
    member.into_iter().collect()
}

/// Calls `visit` on every set of at most `bound` distinct elements (as sorted
/// index lists), stopping early when it returns false.
fn for_small_subsets(n: usize, bound: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn go(
        start: usize,
        n: usize,
        bound: usize,
        cur: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if !cur.is_empty() && !visit(cur) {
            return false;
        }
        if cur.len() == bound {
            return true;
        }
        for i in start..n {
            cur.push(i);
            let cont = go(i + 1, n, bound, cur, visit);
            cur.pop();
            if !cont {
                return false;
            }
        }
        true
    }
    go(0, n, bound, &mut Vec::new(), visit)
}

/// Recovers `K = {g : a ^ g(a) ≠ o}` and `U = <a>_K` from a minimal free
/// algebra and rebuilds it as a twisted multiple.
pub fn decompose_ku(
    a: &FSemilattice,
    gen: usize,
    block_bound: usize,
) -> Result<DecompositionResult, QuasivarError> {
    if let Minimality::NotMinimal { witness, .. } = is_minimal_free(a, gen)? {
        return Err(QuasivarError::Precondition(format!(
            "element {} generates a non-isomorphic subalgebra",
            a.label(witness)
        )));
    }
    let eff = a.effective_group();
    let reduced = if a.group().is_finite() {
        a.clone()
    } else {
        let images: Vec<_> = (0..a.group().rank())
            .map(|i| a.group().generator(i))
            .collect();
        change_of_groups(a, &eff, &images)?
    };
    let zero = reduced.zero();
    let elements = eff.elements()?;
    let k_elems: Vec<_> = elements
        .iter()
        .filter(|g| reduced.meet(gen, reduced.act_unchecked(g.coords(), gen)) != zero)
        .cloned()
        .collect();
    let k = Subgroup::from_elements(&eff, &k_elems)
        .map_err(|e| QuasivarError::CheckFailed(format!("K is not a subgroup: {e}")))?;

    // translates sharing a nonzero meet lie in one coset of K
    let transversal = Transversal::normalized(&k)?;
    let coset: Vec<usize> = elements
        .iter()
        .map(|g| transversal.coset_of(g))
        .collect::<Result<_, _>>()?;
    let translates: Vec<usize> = elements
        .iter()
        .map(|g| reduced.act_unchecked(g.coords(), gen))
        .collect();
    let mut block_checks = 0;
    let mut violation = None;
    for_small_subsets(elements.len(), block_bound, &mut |set| {
        block_checks += 1;
        let m = set.iter().skip(1).fold(translates[set[0]], |acc, &i| {
            reduced.meet(acc, translates[i])
        });
        if m != zero && set.iter().any(|&i| coset[i] != coset[set[0]]) {
            violation = Some(set.to_vec());
            return false;
        }
        true
    });
    if let Some(set) = violation {
        return Err(QuasivarError::CheckFailed(format!(
            "translates {set:?} meet above zero across cosets"
        )));
    }

    // U: the K-subalgebra generated by the generator, over an abstract copy of K
    let u_embedding = k_closure(&reduced, gen, &k);
    let factors = k.invariant_factors();
    let u_group = GroupSpec::new(if factors.is_empty() { vec![1] } else { factors })?;
    let ident = KIdentification::find(&u_group, &k)?;
    let pos = |x: usize| u_embedding.binary_search(&x).expect("closed under K");
    let u = FSemilattice::new(AlgebraTables {
        group: u_group,
        carrier: u_embedding
            .iter()
            .map(|&x| reduced.label(x).to_string())
            .collect(),
        meet: u_embedding
            .iter()
            .map(|&x| {
                u_embedding
                    .iter()
                    .map(|&y| pos(reduced.meet(x, y)))
                    .collect()
            })
            .collect(),
        action: ident
            .images()
            .iter()
            .map(|g| {
                u_embedding
                    .iter()
                    .map(|&x| pos(reduced.act_unchecked(g.coords(), x)))
                    .collect()
            })
            .collect(),
    })?;

    let spec = TwistedSpec {
        transversal,
        inner: u.clone(),
        identification: ident,
    };
    let twisted = twisted_multiple(&spec)?;
    let mut map = vec![zero; twisted.size()];
    for (t, rep) in spec.transversal.reps().iter().enumerate() {
        for (i, &x) in u_embedding.iter().enumerate() {
            map[spec.pair_index(i, t)] = reduced.act_unchecked(rep.coords(), x);
        }
    }
    let isomorphism = Homomorphism::new(map);
    if !isomorphism.is_isomorphism(&twisted, &reduced) {
        return Err(QuasivarError::CheckFailed(
            "<u,t> -> t(u) is not an isomorphism".into(),
        ));
    }
    Ok(DecompositionResult {
        acting_group: eff,
        k,
        u,
        u_embedding,
        twisted,
        isomorphism,
        block_checks,
        block_bound,
    })
}

/// The minimal free algebra `Q^K_F(U)` for a proper subgroup `K` and a
/// 1-generated `U`, with its generator `<u0, 1>`.
pub fn delta_map(k: &Subgroup, u: &FSemilattice) -> Result<(FSemilattice, usize), QuasivarError> {
    if k.is_full() {
        return Err(QuasivarError::ImproperSubgroup);
    }
    let u_gen = (0..u.size())
        .find(|&x| u.generates(x))
        .ok_or_else(|| QuasivarError::Precondition("U is not 1-generated".into()))?;
    let spec = TwistedSpec::new(k, u.clone())?;
    let algebra = twisted_multiple(&spec)?;
    let gen = spec.pair_index(u_gen, 0);
    match is_minimal_free(&algebra, gen)? {
        Minimality::Minimal => Ok((algebra, gen)),
        Minimality::NotMinimal { witness, .. } => Err(QuasivarError::Precondition(format!(
            "the twisted multiple is not minimal: {} is a counterexample",
            algebra.label(witness)
        ))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuotientCheck {
    pub blocks: Vec<Vec<usize>>,
    pub quasi_identity: String,
    pub holds_in_algebra: bool,
    /// Failing valuation in the quotient, if any.
    pub quotient_witness: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimplicityReport {
    pub congruence_count: usize,
    pub simple: bool,
    pub quotients: Vec<QuotientCheck>,
    /// Every proper nontrivial quotient falls outside the quasivariety.
    pub ok: bool,
}

/// For each congruence other than the two trivial ones, builds
/// `s(x) = t(x) -> x = x ^ y` from a pair `(s(a), t(a))` it collapses, and
/// checks that this holds in `A` and fails in the quotient.
pub fn simplicity_report(
    a: &FSemilattice,
    gen: usize,
    limit: usize,
) -> Result<SimplicityReport, QuasivarError> {
    if let Minimality::NotMinimal { witness, .. } = is_minimal_free(a, gen)? {
        return Err(QuasivarError::Precondition(format!(
            "element {} generates a non-isomorphic subalgebra",
            a.label(witness)
        )));
    }
    let congruences = a.congruences(limit)?;
    let terms = unary_terms(a, gen)?;
    let mut quotients = Vec::new();
    for rho in congruences
        .iter()
        .filter(|c| !c.is_identity() && !c.is_total())
    {
        quotients.push(check_quotient(a, rho, &terms)?);
    }
    let ok = quotients
        .iter()
        .all(|q| q.holds_in_algebra && q.quotient_witness.is_some());
    Ok(SimplicityReport {
        congruence_count: congruences.len(),
        simple: quotients.is_empty(),
        quotients,
        ok,
    })
}

fn check_quotient(
    a: &FSemilattice,
    rho: &Congruence,
    terms: &[Option<Term>],
) -> Result<QuotientCheck, QuasivarError> {
    let block = rho
        .blocks()
        .iter()
        .find(|b| b.len() > 1)
        .expect("a congruence other than the identity has a nontrivial block");
    let term = |x: usize| {
        terms[x]
            .clone()
            .expect("the generator reaches every element")
    };
    let qi = collapse_quasi_identity(a.group(), term(block[0]), term(block[1]));
    let holds = holds_quasi_identity(a, &qi)?.holds();
    let q = a.quotient(rho)?;
    let witness = match holds_quasi_identity(&q, &qi)? {
        ModelCheck::Fails { valuation } => Some(valuation),
        ModelCheck::Holds => None,
    };
    Ok(QuotientCheck {
        blocks: rho.blocks().to_vec(),
        quasi_identity: qi.to_string(),
        holds_in_algebra: holds,
        quotient_witness: witness,
    })
}
