//! Terms and quasi-identities in normal form.
//!
//! Every term over the signature `{^} ∪ F` equals a meet of translated
//! variables, so a [`Term`] is stored as a nonempty set of
//! `(group element, variable)` pairs. Two terms are syntactically equal iff
//! their sets are equal.
//!
//! Text grammar (whitespace is insignificant):
//!
//! ```text
//! qi       := [ premises ] "->" equation | equation
//! premises := equation { "&" equation }
//! equation := term "=" term
//! term     := factor { "^" factor }
//! factor   := var | gK "(" term ")" | gK "^" N "(" term ")" | "(" term ")"
//! var      := x | y | z | u | v | w
//! ```

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::algebra::FSemilattice;
use crate::group::{GroupElement, GroupSpec};

/// Variable names, by index.
pub const VARIABLES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("variable {0} has no value")]
    UnboundVariable(usize),
    #[error("valuation refers to element {0}, outside the carrier")]
    BadValue(usize),
    #[error("term group element does not match the algebra's group")]
    GroupMismatch,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pairs: BTreeSet<(GroupElement, usize)>,
}

impl Term {
    /// The bare variable `v`.
    pub fn var(group: &GroupSpec, v: usize) -> Term {
        Term::translate(group.identity(), v)
    }

    /// `g(v)`.
    pub fn translate(g: GroupElement, v: usize) -> Term {
        Term {
            pairs: BTreeSet::from([(g, v)]),
        }
    }

    /// Builds a term from pairs; `None` if empty.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (GroupElement, usize)>) -> Option<Term> {
        let pairs: BTreeSet<_> = pairs.into_iter().collect();
        (!pairs.is_empty()).then_some(Term { pairs })
    }

    /// Unary term `⋀ { h(x) : h ∈ elems }`; `None` if `elems` is empty.
    pub fn unary(elems: impl IntoIterator<Item = GroupElement>) -> Option<Term> {
        Term::from_pairs(elems.into_iter().map(|g| (g, 0)))
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(GroupElement, usize)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of variables mentioned, i.e. one past the largest index.
    pub fn arity(&self) -> usize {
        self.pairs.iter().map(|(_, v)| v + 1).max().unwrap_or(0)
    }

    pub fn meet(&self, other: &Term) -> Term {
        Term {
            pairs: self.pairs.union(&other.pairs).cloned().collect(),
        }
    }

    /// `g(t)`: shifts every translate by `g`.
    pub fn apply(&self, group: &GroupSpec, g: &GroupElement) -> Term {
        Term {
            pairs: self
                .pairs
                .iter()
                .map(|(h, v)| (group.mul(g, h).expect("same group"), *v))
                .collect(),
        }
    }

    /// Substitutes the unary term `inner` for every variable (used on unary
    /// terms, where this is composition).
    pub fn compose(&self, group: &GroupSpec, inner: &Term) -> Term {
        let mut pairs = BTreeSet::new();
        for (h, _) in &self.pairs {
            pairs.extend(inner.apply(group, h).pairs);
        }
        Term { pairs }
    }

    /// Value of the term in `a` under `valuation` (variable index -> element).
    pub fn eval(&self, a: &FSemilattice, valuation: &[usize]) -> Result<usize, TermError> {
        let mut acc: Option<usize> = None;
        for (g, v) in &self.pairs {
            let x = *valuation.get(*v).ok_or(TermError::UnboundVariable(*v))?;
            if x >= a.size() {
                return Err(TermError::BadValue(x));
            }
            if g.len() != a.group().rank() {
                return Err(TermError::GroupMismatch);
            }
            let y = a.act_unchecked(g.coords(), x);
            acc = Some(match acc {
                None => y,
                Some(z) => a.meet(z, y),
            });
        }
        Ok(acc.expect("terms are nonempty"))
    }
}

fn var_name(v: usize) -> String {
    VARIABLES
        .get(v)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("x{v}"))
}

impl fmt::Display for Term {
    /// Meet of translates, e.g. `x ^ g0(x) ^ g0^2(g1(y))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (g, v) in &self.pairs {
            let mut s = var_name(*v);
            for (i, &c) in g.coords().iter().enumerate().rev() {
                s = match c {
                    0 => s,
                    1 => format!("g{i}({s})"),
                    _ => format!("g{i}^{c}({s})"),
                };
            }
            parts.push(s);
        }
        f.write_str(&parts.join(" ^ "))
    }
}

/// `premises -> conclusion`, where each equation is a pair of terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiIdentity {
    pub premises: Vec<(Term, Term)>,
    pub conclusion: (Term, Term),
}

impl QuasiIdentity {
    pub fn identity(lhs: Term, rhs: Term) -> Self {
        QuasiIdentity {
            premises: Vec::new(),
            conclusion: (lhs, rhs),
        }
    }

    /// Number of variables the quasi-identity quantifies over.
    pub fn arity(&self) -> usize {
        self.premises
            .iter()
            .chain(std::iter::once(&self.conclusion))
            .flat_map(|(s, t)| [s.arity(), t.arity()])
            .max()
            .unwrap_or(0)
    }

    /// Whether the quasi-identity is true under one valuation.
    pub fn holds_at(&self, a: &FSemilattice, valuation: &[usize]) -> Result<bool, TermError> {
        for (s, t) in &self.premises {
            if s.eval(a, valuation)? != t.eval(a, valuation)? {
                return Ok(true);
            }
        }
        let (p, q) = &self.conclusion;
        Ok(p.eval(a, valuation)? == q.eval(a, valuation)?)
    }

    /// Parses the text grammar against `group`.
    pub fn parse(text: &str, group: &GroupSpec) -> Result<Self, TermError> {
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
            group,
        };
        let qi = p.quasi_identity()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(qi)
    }
}

impl fmt::Display for QuasiIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let eqs: Vec<String> = self
            .premises
            .iter()
            .map(|(s, t)| format!("{s} = {t}"))
            .collect();
        let (p, q) = &self.conclusion;
        if eqs.is_empty() {
            write!(f, "-> {p} = {q}")
        } else {
            write!(f, "{} -> {p} = {q}", eqs.join(" & "))
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    group: &'a GroupSpec,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> TermError {
        TermError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), TermError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{s}`")))
        }
    }

    fn quasi_identity(&mut self) -> Result<QuasiIdentity, TermError> {
        if self.eat("->") {
            let conclusion = self.equation()?;
            return Ok(QuasiIdentity {
                premises: Vec::new(),
                conclusion,
            });
        }
        let mut eqs = vec![self.equation()?];
        while self.eat("&") {
            eqs.push(self.equation()?);
        }
        if self.eat("->") {
            let conclusion = self.equation()?;
            Ok(QuasiIdentity {
                premises: eqs,
                conclusion,
            })
        } else if eqs.len() == 1 {
            Ok(QuasiIdentity {
                premises: Vec::new(),
                conclusion: eqs.pop().expect("one equation"),
            })
        } else {
            Err(self.error("premises without `->`"))
        }
    }

    fn equation(&mut self) -> Result<(Term, Term), TermError> {
        let lhs = self.term()?;
        self.expect("=")?;
        let rhs = self.term()?;
        Ok((lhs, rhs))
    }

    fn term(&mut self) -> Result<Term, TermError> {
        let mut t = self.factor()?;
        while self.eat("^") {
            t = t.meet(&self.factor()?);
        }
        Ok(t)
    }

    fn number(&mut self) -> Result<i64, TermError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.src.len() && self.src[self.pos] == b'-' {
            self.pos += 1;
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| TermError::Parse {
                pos: start,
                msg: "expected an integer".into(),
            })
    }

    fn factor(&mut self) -> Result<Term, TermError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(")")?;
                Ok(t)
            }
            Some(b'g') => {
                self.pos += 1;
                let start = self.pos;
                let k = self.number()?;
                if k < 0 || k as usize >= self.group.rank() {
                    return Err(TermError::Parse {
                        pos: start,
                        msg: format!(
                            "generator g{k} does not exist (group has {})",
                            self.group.rank()
                        ),
                    });
                }
                // `^` right after gK is an exponent: gK on its own is not a term
                let power = if self.eat("^") { self.number()? } else { 1 };
                self.expect("(")?;
                let inner = self.term()?;
                self.expect(")")?;
                let g = self
                    .group
                    .pow(&self.group.generator(k as usize), power)
                    .expect("generator has the right length");
                Ok(inner.apply(self.group, &g))
            }
            Some(c) => {
                let name = (c as char).to_string();
                match VARIABLES.iter().position(|v| *v == name) {
                    Some(v) => {
                        self.pos += 1;
                        Ok(Term::var(self.group, v))
                    }
                    None => Err(self.error(&format!("unexpected `{name}`"))),
                }
            }
            None => Err(self.error("unexpected end of input")),
        }
    }
}
