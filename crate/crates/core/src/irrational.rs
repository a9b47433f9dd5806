//! Exact arithmetic for the semilattices `B_α = {m + nα}` over `Z²`, with `α`
//! a quadratic irrational.
//!
//! Signs of numbers `A + B√d` are decided by comparing `A²` with `B²d` in big
//! integers, so nothing here is approximate.

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IrrationalError {
    #[error("cannot parse {0:?}: expected sqrt:D or (P+Q*sqrt:D)/R")]
    Parse(String),
    #[error("the number is rational")]
    Rational,
    #[error("denominator must be nonzero")]
    ZeroDenominator,
    #[error("radicand must be at least 2")]
    BadRadicand,
    #[error("{0} is not less than {1}")]
    NotOrdered(String, String),
    #[error("{p}/{q} is not strictly between {alpha} and {beta}")]
    NotBetween {
        p: i64,
        q: i64,
        alpha: String,
        beta: String,
    },
    #[error("arithmetic overflow")]
    Overflow,
}

/// Sign of `a + b√d` for `d ≥ 2` not a perfect square.
fn sign_surd(a: &BigInt, b: &BigInt, d: u64) -> Ordering {
    let zero = BigInt::from(0);
    let (sa, sb) = (a.cmp(&zero), b.cmp(&zero));
    match (sa, sb) {
        (Ordering::Equal, s) | (s, Ordering::Equal) => s,
        (x, y) if x == y => x,
        _ => {
            let lhs = a * a;
            let rhs = b * b * BigInt::from(d);
            // |a| vs |b|√d decides; the sign follows the larger part
            match lhs.cmp(&rhs) {
                Ordering::Greater => sa,
                Ordering::Less => sb,
                Ordering::Equal => Ordering::Equal,
            }
        }
    }
}

/// Sign of `x + y√d1 + z√d2`.
fn sign_two_surds(x: &BigInt, y: &BigInt, d1: u64, z: &BigInt, d2: u64) -> Ordering {
    if d1 == d2 {
        return sign_surd(x, &(y + z), d1);
    }
    // u = x + y√d1, v = -z√d2, sign(u - v)
    let su = sign_surd(x, y, d1);
    let sv = BigInt::from(0).cmp(z);
    if su != sv || su == Ordering::Equal {
        return match (su, sv) {
            (Ordering::Equal, v) => v.reverse(),
            (u, _) => u,
        };
    }
    // same sign s: sign(u - v) = s * sign(u² - v²)
    let a = x * x + y * y * BigInt::from(d1) - z * z * BigInt::from(d2);
    let b = BigInt::from(2) * x * y;
    let diff = sign_surd(&a, &b, d1);
    if su == Ordering::Greater {
        diff
    } else {
        diff.reverse()
    }
}

/// `(p + q√d) / r` with `q ≠ 0`, `r > 0`, `d` square-free and
/// `gcd(p, q, r) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadraticIrrational {
    p: i64,
    q: i64,
    r: i64,
    d: u64,
}

impl QuadraticIrrational {
    /// Normalizes; square factors of `d` move into `q`.
    pub fn new(p: i64, q: i64, r: i64, d: u64) -> Result<Self, IrrationalError> {
        if r == 0 {
            return Err(IrrationalError::ZeroDenominator);
        }
        if d < 2 {
            return Err(IrrationalError::BadRadicand);
        }
        let (mut d, mut q) = (d, q);
        let mut f = 2u64;
        while f * f <= d {
            while d % (f * f) == 0 {
                d /= f * f;
                q = q.checked_mul(f as i64).ok_or(IrrationalError::Overflow)?;
            }
            f += 1;
        }
        if q == 0 || d == 1 {
            return Err(IrrationalError::Rational);
        }
        let (mut p, mut r) = (p, r);
        if r < 0 {
            p = -p;
            q = -q;
            r = -r;
        }
        let g = p.gcd(&q).gcd(&r);
        Ok(QuadraticIrrational {
            p: p / g,
            q: q / g,
            r: r / g,
            d,
        })
    }

    /// `√d`.
    pub fn sqrt(d: u64) -> Result<Self, IrrationalError> {
        QuadraticIrrational::new(0, 1, 1, d)
    }

    pub fn parts(&self) -> (i64, i64, i64, u64) {
        (self.p, self.q, self.r, self.d)
    }

    pub fn to_f64(&self) -> f64 {
        (self.p as f64 + self.q as f64 * (self.d as f64).sqrt()) / self.r as f64
    }

    /// `floor(q√d)`, using that `q√d` is never an integer.
    fn floor_surd(&self) -> BigInt {
        let q = BigInt::from(self.q);
        let root = (&q * &q * BigInt::from(self.d)).sqrt();
        if self.q > 0 {
            root
        } else {
            -root - 1
        }
    }

    pub fn floor(&self) -> BigInt {
        (BigInt::from(self.p) + self.floor_surd()).div_floor(&BigInt::from(self.r))
    }

    /// Sign of `self - num/den` for `den > 0`.
    pub fn cmp_rational(&self, num: i128, den: i128) -> Ordering {
        debug_assert!(den > 0);
        let a = BigInt::from(den) * self.p - BigInt::from(num) * self.r;
        let b = BigInt::from(den) * self.q;
        sign_surd(&a, &b, self.d)
    }

    /// Exact comparison of two quadratic irrationals, possibly with
    /// different radicands.
    pub fn cmp_exact(&self, other: &QuadraticIrrational) -> Ordering {
        let (r1, r2) = (BigInt::from(self.r), BigInt::from(other.r));
        let x = BigInt::from(self.p) * &r2 - BigInt::from(other.p) * &r1;
        let y = BigInt::from(self.q) * &r2;
        let z = -(BigInt::from(other.q) * &r1);
        sign_two_surds(&x, &y, self.d, &z, other.d)
    }
}

impl fmt::Display for QuadraticIrrational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p == 0 && self.q == 1 && self.r == 1 {
            return write!(f, "sqrt:{}", self.d);
        }
        let sign = if self.q < 0 { '-' } else { '+' };
        write!(
            f,
            "({}{}{}*sqrt:{})/{}",
            self.p,
            sign,
            self.q.abs(),
            self.d,
            self.r
        )
    }
}

impl FromStr for QuadraticIrrational {
    type Err = IrrationalError;

    /// Accepts `sqrt:D` and `(P+Q*sqrt:D)/R` (also with `-Q`), ignoring spaces.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || IrrationalError::Parse(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(d) = t.strip_prefix("sqrt:") {
            return QuadraticIrrational::sqrt(d.parse().map_err(|_| err())?);
        }
        let inner = t.strip_prefix('(').ok_or_else(err)?;
        let (body, r) = inner.split_once(")/").ok_or_else(err)?;
        let (head, d) = body.split_once("*sqrt:").ok_or_else(err)?;
        // split P and ±Q at the last sign that is not the leading one
        let split = head
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .last()
            .ok_or_else(err)?;
        let (p, q) = head.split_at(split);
        let q = q.strip_prefix('+').unwrap_or(q);
        QuadraticIrrational::new(
            p.parse().map_err(|_| err())?,
            q.parse().map_err(|_| err())?,
            r.parse().map_err(|_| err())?,
            d.parse().map_err(|_| err())?,
        )
    }
}

/// `m + nα`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BAlphaElement {
    pub m: i64,
    pub n: i64,
}

impl BAlphaElement {
    pub fn new(m: i64, n: i64) -> Self {
        BAlphaElement { m, n }
    }
}

impl fmt::Display for BAlphaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}α", self.m, self.n)
    }
}

/// Order of `x` and `y` as real numbers.
pub fn cmp(alpha: &QuadraticIrrational, x: BAlphaElement, y: BAlphaElement) -> Ordering {
    let dm = BigInt::from(x.m) - y.m;
    let dn = BigInt::from(x.n) - y.n;
    // r·(dm + dn·α) = r·dm + p·dn + q·dn·√d
    let a = BigInt::from(alpha.r) * &dm + BigInt::from(alpha.p) * &dn;
    let b = BigInt::from(alpha.q) * &dn;
    sign_surd(&a, &b, alpha.d)
}

/// The meet (minimum) of two elements.
pub fn meet(alpha: &QuadraticIrrational, x: BAlphaElement, y: BAlphaElement) -> BAlphaElement {
    if cmp(alpha, x, y) == Ordering::Greater {
        y
    } else {
        x
    }
}

/// `(g^i, g^j)(m + nα) = (m + i) + (n + j)α`.
pub fn act(g: (i64, i64), x: BAlphaElement) -> BAlphaElement {
    BAlphaElement::new(x.m + g.0, x.n + g.1)
}

fn mediant(a: (i128, i128), b: (i128, i128), k: i128) -> (i128, i128) {
    (a.0 + k * b.0, a.1 + k * b.1)
}

/// Largest `k ≥ 1` with `still(k)`, assuming `still(1)` and monotonicity.
fn run_length(still: impl Fn(i128) -> bool) -> i128 {
    let mut hi = 2;
    while still(hi) {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if still(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// The fraction `p/q` with least `q > 0` strictly between `α < β`, found by
/// Stern–Brocot descent.
pub fn rational_between(
    alpha: &QuadraticIrrational,
    beta: &QuadraticIrrational,
) -> Result<(i64, i64), IrrationalError> {
    if alpha.cmp_exact(beta) != Ordering::Less {
        return Err(IrrationalError::NotOrdered(
            alpha.to_string(),
            beta.to_string(),
        ));
    }
    let floor: i128 = i128::try_from(alpha.floor()).map_err(|_| IrrationalError::Overflow)?;
    let below_beta = |f: (i128, i128)| beta.cmp_rational(f.0, f.1) == Ordering::Greater;
    let above_alpha = |f: (i128, i128)| alpha.cmp_rational(f.0, f.1) == Ordering::Less;
    // floor(α) < α < floor(α) + 1 are Farey neighbours
    let mut left = (floor, 1i128);
    let mut right = (floor + 1, 1i128);
    let found = loop {
        if below_beta(right) {
            break right;
        }
        let m = mediant(left, right, 1);
        if !above_alpha(m) {
            // move left towards α as far as possible in one run
            let k = run_length(|k| !above_alpha(mediant(left, right, k)));
            left = mediant(left, right, k);
        } else if !below_beta(m) {
            let k = run_length(|k| !below_beta(mediant(right, left, k)));
            right = mediant(right, left, k);
        } else {
            break m;
        }
    };
    let conv = |x: i128| i64::try_from(x).map_err(|_| IrrationalError::Overflow);
    Ok((conv(found.0)?, conv(found.1)?))
}

/// Integer facts deciding the sign of `p - qα = (A + B√d) / r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignCertificate {
    pub alpha: String,
    pub rational_part: String,
    pub surd_coefficient: String,
    pub radicand: u64,
    /// `A²`
    pub rational_square: String,
    /// `B²d`
    pub surd_square: String,
    /// Whether `qα < p`, i.e. the identity holds.
    pub holds: bool,
}

fn certificate(alpha: &QuadraticIrrational, p: i64, q: i64) -> SignCertificate {
    let a = BigInt::from(p) * alpha.r - BigInt::from(q) * alpha.p;
    let b = -(BigInt::from(q) * alpha.q);
    let holds = sign_surd(&a, &b, alpha.d) == Ordering::Greater;
    SignCertificate {
        alpha: alpha.to_string(),
        rational_part: a.to_string(),
        surd_coefficient: b.to_string(),
        radicand: alpha.d,
        rational_square: (&a * &a).to_string(),
        surd_square: (&b * &b * BigInt::from(alpha.d)).to_string(),
        holds,
    }
}

/// Evaluation of the identity over a window of elements of one `B_α`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleTrace {
    pub samples: usize,
    pub holding: usize,
    pub first_failure: Option<BAlphaElement>,
    /// Whether every sample agrees with the certificate.
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparationReport {
    pub identity: String,
    pub p: i64,
    pub q: i64,
    pub in_alpha: SignCertificate,
    pub in_beta: SignCertificate,
    pub alpha_samples: SampleTrace,
    pub beta_samples: SampleTrace,
    pub window: i64,
    pub verdict: String,
}

/// Window elements ordered by `(|m| + |n|, m, n)`.
pub fn window_elements(window: i64) -> Vec<BAlphaElement> {
    let mut v: Vec<_> = (-window..=window)
        .flat_map(|m| (-window..=window).map(move |n| BAlphaElement::new(m, n)))
        .collect();
    v.sort_by_key(|x| (x.m.abs() + x.n.abs(), x.m, x.n));
    v
}

/// Truth of `(g^p,1)(x) ^ (1,g^q)(x) = (1,g^q)(x)` at `x`.
pub fn identity_holds_at(alpha: &QuadraticIrrational, p: i64, q: i64, x: BAlphaElement) -> bool {
    let rhs = act((0, q), x);
    meet(alpha, act((p, 0), x), rhs) == rhs
}

fn trace(
    alpha: &QuadraticIrrational,
    p: i64,
    q: i64,
    samples: &[BAlphaElement],
    expected: bool,
) -> SampleTrace {
    let results: Vec<bool> = samples
        .iter()
        .map(|&x| identity_holds_at(alpha, p, q, x))
        .collect();
    SampleTrace {
        samples: samples.len(),
        holding: results.iter().filter(|&&h| h).count(),
        first_failure: samples
            .iter()
            .zip(&results)
            .find(|(_, &h)| !h)
            .map(|(&x, _)| x),
        agrees: results.iter().all(|&h| h == expected),
    }
}

/// Certifies that the identity with exponents `p, q` holds in `B_α` and
/// fails in `B_β` (given `α < p/q < β`), and evaluates it on the first
/// `sample_count` window elements of each.
pub fn check_separating_identity(
    alpha: &QuadraticIrrational,
    beta: &QuadraticIrrational,
    p: i64,
    q: i64,
    sample_count: usize,
    window: i64,
) -> Result<SeparationReport, IrrationalError> {
    let between = q > 0
        && alpha.cmp_rational(p as i128, q as i128) == Ordering::Less
        && beta.cmp_rational(p as i128, q as i128) == Ordering::Greater;
    if !between {
        return Err(IrrationalError::NotBetween {
            p,
            q,
            alpha: alpha.to_string(),
            beta: beta.to_string(),
        });
    }
    let in_alpha = certificate(alpha, p, q);
    let in_beta = certificate(beta, p, q);
    let samples: Vec<_> = window_elements(window)
        .into_iter()
        .take(sample_count)
        .collect();
    let alpha_samples = trace(alpha, p, q, &samples, in_alpha.holds);
    let beta_samples = trace(beta, p, q, &samples, in_beta.holds);
    let verdict = format!(
        "holds in B_{} ({} < {}), fails in B_{} ({} > {})",
        alpha,
        in_alpha.surd_square,
        in_alpha.rational_square,
        beta,
        in_beta.surd_square,
        in_beta.rational_square
    );
    Ok(SeparationReport {
        identity: format!("(g^{p},1)(x) ^ (1,g^{q})(x) = (1,g^{q})(x)"),
        p,
        q,
        in_alpha,
        in_beta,
        alpha_samples,
        beta_samples,
        window,
        verdict,
    })
}

/// Breadth-first search from `from` using the four generator moves and meets,
/// restricted to the square window. Returns the number of window elements
/// reached and the largest depth needed.
pub fn generation_window_check(
    alpha: &QuadraticIrrational,
    from: BAlphaElement,
    window: i64,
) -> (usize, usize) {
    let inside = |x: BAlphaElement| x.m.abs() <= window && x.n.abs() <= window;
    let mut seen = HashSet::from([from]);
    let mut queue = VecDeque::from([(from, 0usize)]);
    let mut depth = 0;
    while let Some((x, dist)) = queue.pop_front() {
        depth = depth.max(dist);
        let mut next: Vec<_> = [(1, 0), (-1, 0), (0, 1), (0, -1)]
            .iter()
            .map(|&g| act(g, x))
            .collect();
        // meets with the start never leave {x, from}, but are part of the closure
        next.push(meet(alpha, x, from));
        for y in next {
            if inside(y) && seen.insert(y) {
                queue.push_back((y, dist + 1));
            }
        }
    }
    (seen.len(), depth)
}
