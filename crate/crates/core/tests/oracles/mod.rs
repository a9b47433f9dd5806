//! Brute-force reference implementations used to cross-check the library.
//!
//! Nothing here calls the library's algorithms; only raw tables are read.

#![allow(dead_code)]

use std::collections::BTreeSet;

use fsemilattice::algebra::AlgebraTables;

/// Factor multisets `k1 <= k2 <= ...` (each at least 2) with product at most
/// `max`, plus `[1]` for the trivial group.
pub fn factor_multisets(max: u64) -> Vec<Vec<u64>> {
    fn go(min: u64, left: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        for k in min..=left {
            cur.push(k);
            go(k, left / k, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![vec![1]];
    go(2, max, &mut Vec::new(), &mut out);
    out
}

pub fn elements(orders: &[u64]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for &k in orders {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| {
                (0..k as i64).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

fn add(orders: &[u64], a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter()
        .zip(b)
        .zip(orders)
        .map(|((x, y), &k)| (x + y).rem_euclid(k as i64))
        .collect()
}

fn close(orders: &[u64], gens: &[Vec<i64>]) -> BTreeSet<Vec<i64>> {
    let mut set: BTreeSet<Vec<i64>> = BTreeSet::from([vec![0; orders.len()]]);
    loop {
        let mut grown = set.clone();
        for x in &set {
            for g in gens {
                grown.insert(add(orders, x, g));
            }
        }
        if grown.len() == set.len() {
            return set;
        }
        set = grown;
    }
}

/// Number of subgroups, by closing every subset of at most `log2 |G|`
/// elements (every subgroup of a group of order n has a generating set of
/// that size).
pub fn subgroup_count(orders: &[u64]) -> usize {
    let elems = elements(orders);
    let n = elems.len();
    let max_gens = (usize::BITS - n.leading_zeros()) as usize;
    let mut found: BTreeSet<BTreeSet<Vec<i64>>> = BTreeSet::new();
    fn go(
        start: usize,
        left: usize,
        elems: &[Vec<i64>],
        orders: &[u64],
        cur: &mut Vec<Vec<i64>>,
        found: &mut BTreeSet<BTreeSet<Vec<i64>>>,
    ) {
        found.insert(close(orders, cur));
        if left == 0 {
            return;
        }
        for i in start..elems.len() {
            cur.push(elems[i].clone());
            go(i + 1, left - 1, elems, orders, cur, found);
            cur.pop();
        }
    }
    go(0, max_gens, &elems, orders, &mut Vec::new(), &mut found);
    found.len()
}

/// Axiom check written independently of the library's validator.
pub fn satisfies_axioms(t: &AlgebraTables) -> bool {
    let n = t.carrier.len();
    let m = &t.meet;
    if m.len() != n || m.iter().any(|r| r.len() != n || r.iter().any(|&v| v >= n)) {
        return false;
    }
    let semilattice = (0..n).all(|x| {
        m[x][x] == x
            && (0..n).all(|y| m[x][y] == m[y][x] && (0..n).all(|z| m[m[x][y]][z] == m[x][m[y][z]]))
    });
    if !semilattice {
        return false;
    }
    for (perm, &k) in t.action.iter().zip(t.group.orders()) {
        let image: BTreeSet<_> = perm.iter().collect();
        if perm.len() != n || image.len() != n || perm.iter().any(|&v| v >= n) {
            return false;
        }
        if !(0..n).all(|x| (0..n).all(|y| perm[m[x][y]] == m[perm[x]][perm[y]])) {
            return false;
        }
        if k > 0 {
            let mut power: Vec<usize> = (0..n).collect();
            for _ in 0..k {
                power = power.iter().map(|&x| perm[x]).collect();
            }
            if power.iter().enumerate().any(|(x, &y)| x != y) {
                return false;
            }
        }
    }
    t.action
        .iter()
        .all(|p| t.action.iter().all(|q| (0..n).all(|x| p[q[x]] == q[p[x]])))
}

/// Distinct images of `b` under the group, found by repeatedly applying
/// generators and their inverses.
pub fn orbit(t: &AlgebraTables, b: usize) -> Vec<usize> {
    let mut seen = BTreeSet::from([b]);
    let mut stack = vec![b];
    while let Some(x) = stack.pop() {
        for perm in &t.action {
            let forward = perm[x];
            let backward = perm.iter().position(|&y| y == x).unwrap();
            for y in [forward, backward] {
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().collect()
}

/// Subalgebra generated by `b` in normal form: all meets of nonempty sets of
/// translates of `b`.
pub fn generated_by_normal_form(t: &AlgebraTables, b: usize) -> BTreeSet<usize> {
    let translates = orbit(t, b);
    assert!(
        translates.len() <= 16,
        "oracle is exponential in the orbit size"
    );
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << translates.len()) {
        let mut acc: Option<usize> = None;
        for (i, &x) in translates.iter().enumerate() {
            if mask & (1 << i) != 0 {
                acc = Some(acc.map_or(x, |a| t.meet[a][x]));
            }
        }
        out.insert(acc.unwrap());
    }
    out
}

/// Every congruence, by testing each set partition for compatibility.
pub fn congruences_by_partitions(t: &AlgebraTables) -> BTreeSet<Vec<Vec<usize>>> {
    let n = t.carrier.len();
    assert!(n <= 9, "Bell numbers grow fast");
    let mut out = BTreeSet::new();
    // restricted growth strings
    let mut rgs = vec![0usize; n];
    loop {
        let compatible = (0..n).all(|x| {
            (0..n).all(|y| {
                rgs[x] != rgs[y]
                    || ((0..n).all(|z| rgs[t.meet[x][z]] == rgs[t.meet[y][z]])
                        && t.action.iter().all(|p| rgs[p[x]] == rgs[p[y]]))
            })
        });
        if compatible {
            let blocks = *rgs.iter().max().unwrap() + 1;
            let mut partition = vec![Vec::new(); blocks];
            for (x, &c) in rgs.iter().enumerate() {
                partition[c].push(x);
            }
            out.insert(partition);
        }
        // next restricted growth string
        let mut i = n;
        loop {
            if i == 1 {
                return out;
            }
            i -= 1;
            let max_prefix = *rgs[..i].iter().max().unwrap();
            if rgs[i] <= max_prefix {
                rgs[i] += 1;
                for r in rgs.iter_mut().skip(i + 1) {
                    *r = 0;
                }
                break;
            }
        }
    }
}

/// Least `q`, then least `p`, with `√d1 < p/q < √d2`, by direct search.
pub fn stern_brocot_sqrt(d1: i64, d2: i64) -> (i64, i64) {
    for q in 1.. {
        for p in 1..=(q * (d2 + 1)) {
            if p * p > d1 * q * q && p * p < d2 * q * q {
                return (p, q);
            }
        }
    }
    unreachable!()
}

/// Whether `map` preserves meet and every generator, read from raw tables.
pub fn is_homomorphism(src: &AlgebraTables, dst: &AlgebraTables, map: &[usize]) -> bool {
    let n = src.carrier.len();
    (0..n).all(|x| (0..n).all(|y| map[src.meet[x][y]] == dst.meet[map[x]][map[y]]))
        && src
            .action
            .iter()
            .zip(&dst.action)
            .all(|(p, q)| (0..n).all(|x| map[p[x]] == q[map[x]]))
}
