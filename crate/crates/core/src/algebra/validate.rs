use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::AlgebraTables;

/// Tables that cannot even be read as an algebra.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("carrier is empty")]
    EmptyCarrier,
    #[error("meet table has {rows} rows for {size} elements")]
    MeetRows { rows: usize, size: usize },
    #[error("meet row {row} has {len} entries for {size} elements")]
    MeetRow { row: usize, len: usize, size: usize },
    #[error("meet[{0}][{1}] = {2} is out of range")]
    MeetEntry(usize, usize, usize),
    #[error("{found} action maps for a group with {expected} generators")]
    ActionCount { expected: usize, found: usize },
    #[error("action map {generator} has {len} entries for {size} elements")]
    ActionLength {
        generator: usize,
        len: usize,
        size: usize,
    },
    #[error("action[{0}][{1}] = {2} is out of range")]
    ActionEntry(usize, usize, usize),
}

/// The four defining laws of an F-semilattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axiom {
    /// `^` is associative, idempotent and commutative.
    #[serde(rename = "i")]
    Semilattice,
    /// The identity of the group acts trivially.
    #[serde(rename = "ii")]
    Identity,
    /// `f(g(x)) = (fg)(x)`.
    #[serde(rename = "iii")]
    Composition,
    /// `g(x) ^ g(y) = g(x ^ y)`.
    #[serde(rename = "iv")]
    Automorphism,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::Semilattice => "(i)",
            Axiom::Identity => "(ii)",
            Axiom::Composition => "(iii)",
            Axiom::Automorphism => "(iv)",
        };
        f.write_str(s)
    }
}

/// First violated law, with the carrier elements that witness it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<usize>,
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validation {
    Valid,
    Invalid(Violation),
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validation::Valid)
    }
}

fn check_shape(t: &AlgebraTables) -> Result<(), ShapeError> {
    let n = t.carrier.len();
    if n == 0 {
        return Err(ShapeError::EmptyCarrier);
    }
    if t.meet.len() != n {
        return Err(ShapeError::MeetRows {
            rows: t.meet.len(),
            size: n,
        });
    }
    for (x, row) in t.meet.iter().enumerate() {
        if row.len() != n {
            return Err(ShapeError::MeetRow {
                row: x,
                len: row.len(),
                size: n,
            });
        }
        if let Some(y) = row.iter().position(|&v| v >= n) {
            return Err(ShapeError::MeetEntry(x, y, row[y]));
        }
    }
    if t.action.len() != t.group.rank() {
        return Err(ShapeError::ActionCount {
            expected: t.group.rank(),
            found: t.action.len(),
        });
    }
    for (i, perm) in t.action.iter().enumerate() {
        if perm.len() != n {
            return Err(ShapeError::ActionLength {
                generator: i,
                len: perm.len(),
                size: n,
            });
        }
        if let Some(x) = perm.iter().position(|&v| v >= n) {
            return Err(ShapeError::ActionEntry(i, x, perm[x]));
        }
    }
    Ok(())
}

fn violation(
    axiom: Axiom,
    generator: Option<usize>,
    witness: Vec<usize>,
    detail: String,
) -> Validation {
    Validation::Invalid(Violation {
        axiom,
        detail,
        generator,
        witness,
    })
}

/// Checks the F-semilattice laws on raw tables.
///
/// Shape problems are returned as `Err`; a well-shaped table yields either
/// [`Validation::Valid`] or the first violated law in this order:
/// idempotence, commutativity, associativity, invertibility of each generator,
/// the automorphism law, `g^k = id` for a factor of order `k`, and pairwise
/// commutation of generators.
#[allow(clippy::needless_range_loop)] // pairs of indices read more clearly than zipped iterators
pub fn validate_axioms(t: &AlgebraTables) -> Result<Validation, ShapeError> {
    check_shape(t)?;
    let n = t.carrier.len();
    let m = &t.meet;

    for x in 0..n {
        if m[x][x] != x {
            return Ok(violation(
                Axiom::Semilattice,
                None,
                vec![x],
                format!("idempotence fails: {x} ^ {x} = {}", m[x][x]),
            ));
        }
    }
    for x in 0..n {
        for y in (x + 1)..n {
            if m[x][y] != m[y][x] {
                return Ok(violation(
                    Axiom::Semilattice,
                    None,
                    vec![x, y],
                    format!(
                        "commutativity fails: {x} ^ {y} = {} but {y} ^ {x} = {}",
                        m[x][y], m[y][x]
                    ),
                ));
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let left = m[m[x][y]][z];
                let right = m[x][m[y][z]];
                if left != right {
                    return Ok(violation(
                        Axiom::Semilattice,
                        None,
                        vec![x, y, z],
                        format!("associativity fails: ({x} ^ {y}) ^ {z} = {left} but {x} ^ ({y} ^ {z}) = {right}"),
                    ));
                }
            }
        }
    }

    for (i, perm) in t.action.iter().enumerate() {
        let mut preimage = vec![None; n];
        for x in 0..n {
            if let Some(w) = preimage[perm[x]] {
                return Ok(violation(
                    Axiom::Composition,
                    Some(i),
                    vec![w, x],
                    format!(
                        "generator {i} is not invertible: it sends both {w} and {x} to {}",
                        perm[x]
                    ),
                ));
            }
            preimage[perm[x]] = Some(x);
        }
    }

    for (i, perm) in t.action.iter().enumerate() {
        for x in 0..n {
            for y in 0..n {
                let lhs = perm[m[x][y]];
                let rhs = m[perm[x]][perm[y]];
                if lhs != rhs {
                    return Ok(violation(
                        Axiom::Automorphism,
                        Some(i),
                        vec![x, y],
                        format!("g{i}({x} ^ {y}) = {lhs} but g{i}({x}) ^ g{i}({y}) = {rhs}"),
                    ));
                }
            }
        }
    }

    for (i, (perm, &k)) in t.action.iter().zip(t.group.orders()).enumerate() {
        if k == 0 {
            continue;
        }
        for x in 0..n {
            let mut y = x;
            for _ in 0..k {
                y = perm[y];
            }
            if y != x {
                return Ok(violation(
                    Axiom::Identity,
                    Some(i),
                    vec![x],
                    format!("g{i}^{k} is the identity of the group but moves {x} to {y}"),
                ));
            }
        }
    }

    for i in 0..t.action.len() {
        for j in (i + 1)..t.action.len() {
            let (p, q) = (&t.action[i], &t.action[j]);
            for x in 0..n {
                if p[q[x]] != q[p[x]] {
                    return Ok(violation(
                        Axiom::Composition,
                        Some(i),
                        vec![x],
                        format!(
                            "g{i}(g{j}({x})) = {} but g{j}(g{i}({x})) = {}",
                            p[q[x]], q[p[x]]
                        ),
                    ));
                }
            }
        }
    }

    Ok(Validation::Valid)
}
