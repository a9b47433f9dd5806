//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod oracles;

use std::time::{Duration, Instant};

use fsemilattice::algebra::{
    validate_axioms, AlgebraTables, FSemilattice, Validation, DEFAULT_CONGRUENCE_LIMIT,
};
use fsemilattice::constructions::{
    a_k, maroti, one_element, transversal_independence_check, twisted_multiple, two_element,
    TwistedSpec,
};
use fsemilattice::group::{GroupSpec, Subgroup, Transversal};
use fsemilattice::irrational::{check_separating_identity, rational_between, QuadraticIrrational};
use fsemilattice::quasivar::{
    decompose_ku, delta_map, holds_quasi_identity, is_minimal_free, separating_quasi_identity,
    simplicity_report, verify_bijection, Minimality, ModelCheck, DEFAULT_BLOCK_BOUND,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn groups_up_to(max: u64) -> Vec<GroupSpec> {
    oracles::factor_multisets(max)
        .into_iter()
        .map(|o| GroupSpec::new(o).expect("valid orders"))
        .collect()
}

fn proper_subgroups(f: &GroupSpec) -> Result<Vec<Subgroup>, String> {
    Ok(f.subgroups()
        .map_err(err)?
        .into_iter()
        .filter(|h| !h.is_full())
        .collect())
}

fn subgroup_group(k: &Subgroup) -> GroupSpec {
    let factors = k.invariant_factors();
    GroupSpec::new(if factors.is_empty() { vec![1] } else { factors }).expect("valid orders")
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let groups = groups_up_to(16);
    let mut subgroups = 0;
    for f in &groups {
        let report = verify_bijection(f).map_err(err)?;
        ensure!(report.ok, "{:?}: {}", f.orders(), report.summary);
        ensure!(
            report.subgroup_count == report.representative_count,
            "{:?}: {} subgroups vs {} representatives",
            f.orders(),
            report.subgroup_count,
            report.representative_count
        );
        ensure!(
            report.isomorphic_pairs.is_empty(),
            "{:?}: isomorphic pairs {:?}",
            f.orders(),
            report.isomorphic_pairs
        );
        for e in &report.entries {
            ensure!(
                e.round_trip,
                "{:?}: round trip fails for {:?}",
                f.orders(),
                e.subgroup
            );
            let proper = e.subgroup.len() as u64 != f.order().unwrap_or(0);
            ensure!(
                !proper || e.minimal == Some(true),
                "{:?}: representative of {:?} not minimal",
                f.orders(),
                e.subgroup
            );
        }
        subgroups += report.subgroup_count;
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:.1?}");
    Ok(format!(
        "{} groups, {subgroups} subgroups, {elapsed:.1?}",
        groups.len()
    ))
}

fn criterion_2() -> Outcome {
    let expected = [(vec![2, 2], 5), (vec![6], 4), (vec![8], 4), (vec![2, 4], 8)];
    for (orders, count) in &expected {
        let oracle = oracles::subgroup_count(orders);
        let library = GroupSpec::new(orders.clone())
            .map_err(err)?
            .subgroups()
            .map_err(err)?
            .len();
        ensure!(
            oracle == *count && library == *count,
            "{orders:?}: expected {count}, oracle {oracle}, library {library}"
        );
    }
    let mut checked = 0;
    for f in groups_up_to(16) {
        let oracle = oracles::subgroup_count(f.orders());
        let library = f.subgroups().map_err(err)?.len();
        ensure!(
            oracle == library,
            "{:?}: oracle {oracle}, library {library}",
            f.orders()
        );
        checked += 1;
    }
    Ok(format!(
        "Z2xZ2=5 Z6=4 Z8=4 Z2xZ4=8; {checked} groups agree with the closure oracle"
    ))
}

fn random_transversal(k: &Subgroup, rng: &mut ChaCha8Rng) -> Result<Transversal, String> {
    let reps = k
        .cosets()
        .map_err(err)?
        .into_iter()
        .map(|coset| coset.choose(rng).expect("cosets are nonempty").clone())
        .collect();
    Transversal::new(k, reps).map_err(err)
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut checks = 0;
    for f in groups_up_to(12) {
        for k in proper_subgroups(&f)?
            .into_iter()
            .filter(|k| !k.is_trivial())
        {
            let kg = subgroup_group(&k);
            for u in [one_element(&kg), two_element(&kg)] {
                let base = TwistedSpec::new(&k, u).map_err(err)?;
                for _ in 0..20 {
                    let t1 = random_transversal(&k, &mut rng)?;
                    let t2 = random_transversal(&k, &mut rng)?;
                    let spec = base.with_transversal(t1).map_err(err)?;
                    let hom = transversal_independence_check(&spec, &t2).map_err(err)?;
                    let a1 = twisted_multiple(&spec).map_err(err)?;
                    let a2 =
                        twisted_multiple(&spec.with_transversal(t2).map_err(err)?).map_err(err)?;
                    ensure!(
                        oracles::is_homomorphism(a1.tables(), a2.tables(), hom.map())
                            && hom.is_bijective(a2.size()),
                        "{:?}, K={:?}: returned map is not an isomorphism",
                        f.orders(),
                        k.elements()
                    );
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{checks} transversal pairs"))
}

fn criterion_4() -> Outcome {
    let mut count = 0;
    for f in groups_up_to(16) {
        let chain = two_element(&f);
        for h in proper_subgroups(&f)? {
            let m = maroti(&f, &h).map_err(err)?;
            let qi = separating_quasi_identity(&m, 0).map_err(err)?;
            let in_m = holds_quasi_identity(&m, &qi).map_err(err)?;
            let in_chain = holds_quasi_identity(&chain, &qi).map_err(err)?;
            ensure!(
                in_m == ModelCheck::Holds,
                "{:?}, H={:?}: {qi} fails in the representative",
                f.orders(),
                h.elements()
            );
            ensure!(
                in_chain
                    == ModelCheck::Fails {
                        valuation: vec![1, 0]
                    },
                "{:?}, H={:?}: {qi} gives {in_chain:?} in the chain",
                f.orders(),
                h.elements()
            );
            // the witness really is a failure
            ensure!(
                !qi.holds_at(&chain, &[1, 0]).map_err(err)?,
                "{qi} holds at (1,0)"
            );
            count += 1;
        }
    }
    Ok(format!(
        "{count} algebras, each fails in the chain at (x,y)=(1,0)"
    ))
}

/// Seven elements over `Z4`: `a0..a3` rotated by the generator,
/// `a0 ^ a2 = p`, `a1 ^ a3 = q`, and `o` below everything else.
#[allow(clippy::needless_range_loop)]
fn a7_tables() -> AlgebraTables {
    let carrier: Vec<String> = ["a0", "a1", "a2", "a3", "p", "q", "o"]
        .map(String::from)
        .to_vec();
    let (p, q, o) = (4, 5, 6);
    // down-set of each element
    let below = |x: usize| -> Vec<usize> {
        match x {
            0 | 2 => vec![x, p, o],
            1 | 3 => vec![x, q, o],
            4 | 5 => vec![x, o],
            _ => vec![o],
        }
    };
    let mut meet = vec![vec![o; 7]; 7];
    for x in 0..7 {
        for y in 0..7 {
            // the common lower bound with the largest down-set
            let common = below(x).into_iter().filter(|z| below(y).contains(z));
            meet[x][y] = common.max_by_key(|&z| below(z).len()).unwrap();
        }
    }
    AlgebraTables {
        group: GroupSpec::new(vec![4]).unwrap(),
        carrier,
        meet,
        action: vec![vec![1, 2, 3, 0, q, p, o]],
    }
}

fn criterion_5() -> Outcome {
    let tables = a7_tables();
    ensure!(
        oracles::satisfies_axioms(&tables),
        "A7 tables fail the axiom oracle"
    );
    let verdict = validate_axioms(&tables).map_err(err)?;
    ensure!(verdict == Validation::Valid, "validator says {verdict:?}");
    let a7 = FSemilattice::new(tables).map_err(err)?;
    let a0 = a7.index_of("a0").map_err(err)?;
    let p = a7.index_of("p").map_err(err)?;
    ensure!(a7.generates(a0), "a0 does not generate A7");
    ensure!(
        oracles::generated_by_normal_form(a7.tables(), a0).len() == 7,
        "oracle closure of a0 is not everything"
    );
    match is_minimal_free(&a7, a0).map_err(err)? {
        Minimality::NotMinimal { witness, .. } if witness == p => {}
        other => return Err(format!("expected witness p, got {other:?}")),
    }
    let sub = oracles::generated_by_normal_form(a7.tables(), p);
    ensure!(
        sub.len() == 3,
        "oracle closure of p has {} elements",
        sub.len()
    );
    Ok("valid, generated by a0, not minimal with witness p (3 < 7)".into())
}

fn criterion_6() -> Outcome {
    let mut count = 0;
    for f in groups_up_to(12) {
        for k in proper_subgroups(&f)? {
            let u = one_element(&subgroup_group(&k));
            let (a, gen) = delta_map(&k, &u).map_err(err)?;
            let d = decompose_ku(&a, gen, DEFAULT_BLOCK_BOUND).map_err(err)?;
            ensure!(
                d.k == k,
                "{:?}: K={:?} came back as {:?}",
                f.orders(),
                k.elements(),
                d.k.elements()
            );
            ensure!(d.u.size() == 1, "{:?}: |U| = {}", f.orders(), d.u.size());
            ensure!(
                d.isomorphism.is_bijective(a.size())
                    && oracles::is_homomorphism(
                        d.twisted.tables(),
                        a.tables(),
                        d.isomorphism.map()
                    ),
                "{:?}, K={:?}: reconstruction is not an isomorphism",
                f.orders(),
                k.elements()
            );
            count += 1;
        }
    }
    Ok(format!("{count} (F, K) pairs round-trip"))
}

fn normalized(blocks: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = blocks
        .iter()
        .map(|b| {
            let mut b = b.clone();
            b.sort_unstable();
            b
        })
        .collect();
    out.sort();
    out
}

fn simple_with_oracle(a: &FSemilattice, name: &str) -> Result<bool, String> {
    let library = a.congruences(DEFAULT_CONGRUENCE_LIMIT).map_err(err)?;
    let count = match (0..a.size()).find(|&x| a.generates(x)) {
        Some(gen) => {
            let report = simplicity_report(a, gen, DEFAULT_CONGRUENCE_LIMIT).map_err(err)?;
            ensure!(report.simple && report.ok, "{name}: reported not simple");
            report.congruence_count
        }
        None => library.len(),
    };
    ensure!(count == 2, "{name}: {count} congruences");
    if a.size() <= 7 {
        let oracle = oracles::congruences_by_partitions(a.tables());
        let mine: std::collections::BTreeSet<_> =
            library.iter().map(|c| normalized(c.blocks())).collect();
        ensure!(
            mine == oracle,
            "{name}: partition oracle finds {} congruences",
            oracle.len()
        );
        return Ok(true);
    }
    Ok(false)
}

fn criterion_7() -> Outcome {
    let (mut count, mut cross_checked) = (0, 0);
    for f in groups_up_to(12) {
        for h in f.subgroups().map_err(err)? {
            let m = maroti(&f, &h).map_err(err)?;
            let name = format!("Maroti({:?}, {:?})", f.orders(), h.generators());
            cross_checked += simple_with_oracle(&m, &name)? as usize;
            count += 1;
        }
    }
    for k in 1..=6 {
        let a = a_k(k).map_err(err)?;
        cross_checked += simple_with_oracle(&a, &format!("A_{k}"))? as usize;
        count += 1;
    }
    Ok(format!(
        "{count} algebras simple, {cross_checked} cross-checked by partitions"
    ))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let alpha = QuadraticIrrational::sqrt(2).map_err(err)?;
    let beta = QuadraticIrrational::sqrt(3).map_err(err)?;
    let (p, q) = rational_between(&alpha, &beta).map_err(err)?;
    ensure!((p, q) == (3, 2), "got {p}/{q}");
    ensure!(
        oracles::stern_brocot_sqrt(2, 3) == (3, 2),
        "oracle disagrees"
    );
    let report = check_separating_identity(&alpha, &beta, p, q, 25, 8).map_err(err)?;
    let a = &report.in_alpha;
    let b = &report.in_beta;
    ensure!(
        a.holds && a.surd_square == "8" && a.rational_square == "9",
        "alpha certificate {a:?}"
    );
    ensure!(
        !b.holds && b.surd_square == "12" && b.rational_square == "9",
        "beta certificate {b:?}"
    );
    ensure!(
        report.alpha_samples.agrees && report.beta_samples.agrees,
        "samples disagree with the certificate"
    );
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:.1?}");
    Ok(format!("3/2, 8 < 9 < 12, {elapsed:.1?}"))
}

fn criterion_9() -> Outcome {
    let f = GroupSpec::new(vec![2, 2]).map_err(err)?;
    let base = maroti(&f, &Subgroup::trivial(&f).map_err(err)?).map_err(err)?;
    ensure!(
        base.size() == 5,
        "base algebra has {} elements",
        base.size()
    );
    let n = base.size();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let (mut rejected, mut accepted) = (0, 0);
    for _ in 0..100 {
        let mut t = base.tables().clone();
        let meet_cells = n * n;
        let cell = rng.gen_range(0..meet_cells + t.action.len() * n);
        let slot = if cell < meet_cells {
            &mut t.meet[cell / n][cell % n]
        } else {
            let c = cell - meet_cells;
            &mut t.action[c / n][c % n]
        };
        let old = *slot;
        *slot = (old + rng.gen_range(1..n)) % n;
        let oracle_valid = oracles::satisfies_axioms(&t);
        match validate_axioms(&t).map_err(err)? {
            Validation::Invalid(v) => {
                ensure!(
                    !v.witness.is_empty(),
                    "{:?} violation without witness",
                    v.axiom
                );
                ensure!(
                    !oracle_valid,
                    "validator rejects ({:?}) what the oracle accepts",
                    v.axiom
                );
                rejected += 1;
            }
            Validation::Valid => {
                ensure!(oracle_valid, "validator accepts a table the oracle rejects");
                accepted += 1;
            }
        }
    }
    ensure!(rejected >= 99, "only {rejected}/100 rejected");
    Ok(format!(
        "{rejected}/100 rejected with axiom and witness, {accepted} accepted and oracle-verified"
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "subgroup / minimal representative bijection, |F| <= 16",
            criterion_1,
        ),
        ("subgroup counts vs closure oracle", criterion_2),
        (
            "twisted multiple independent of transversal, |F| <= 12",
            criterion_3,
        ),
        (
            "separating quasi-identity fails in the chain at (1,0)",
            criterion_4,
        ),
        ("A7 is 1-generated but not minimal", criterion_5),
        (
            "decompose(delta(K, trivial U)) round trip, |F| <= 12",
            criterion_6,
        ),
        ("simplicity reports", criterion_7),
        ("rational between sqrt 2 and sqrt 3", criterion_8),
        ("validator rejects single-entry mutations", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}  [{detail}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}  [{why}]", i + 1);
            }
        }
    }
    println!("acceptance: {}/9 passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
