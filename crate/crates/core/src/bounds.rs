//! Closed-form quantities: partial binomial sums, the Sauer–Shelah guarantee,
//! binary entropy and the binomial-tail inequality it controls, and the
//! constants of the similarity upper bound.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};

/// The similarity expansion factor 4.55, as the exact fraction 91/20.
pub const DELTA_NUMERATOR: u64 = 91;
pub const DELTA_DENOMINATOR: u64 = 20;

/// Entropy parameter from which the 4.55 factor is derived.
pub const BOUND_EPSILON: f64 = 0.11;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundConstants {
    pub epsilon: f64,
    pub delta: f64,
}

impl BoundConstants {
    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) || binary_entropy(epsilon)? >= 0.5 {
            return Err(Error::OutOfRange(epsilon));
        }
        Ok(Self { epsilon, delta: 1.0 / (2.0 * epsilon) })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SauerQuery {
    pub space_size: u128,
    pub domain_size: u32,
}

/// Exact `Σ_{k=0}^{min(m,n)} C(n, k)`.
pub fn binom_partial_sum(n: u32, m: u32) -> BigUint {
    let mut term = BigUint::one();
    let mut sum = BigUint::one();
    for k in 1..=m.min(n) {
        term = term * BigUint::from(n - k + 1) / BigUint::from(k);
        sum += &term;
    }
    sum
}

/// Largest `m` with `|H| > Σ_{k<m} C(|X|, k)`, which forces `vc(H) ≥ m`;
/// 0 when no `m ≥ 1` qualifies.
pub fn sauer_guaranteed_vc(q: SauerQuery) -> Result<u32> {
    if q.space_size == 0 {
        return Err(Error::InvalidQuery("space_size must be at least 1".into()));
    }
    if q.domain_size < 128 && q.space_size > 1u128 << q.domain_size {
        return Err(Error::InvalidQuery(format!(
            "space_size {} exceeds 2^{}",
            q.space_size, q.domain_size
        )));
    }
    let size = BigUint::from(q.space_size);
    let mut best = 0;
    for m in 1..=q.domain_size {
        if size > binom_partial_sum(q.domain_size, m - 1) {
            best = m;
        } else {
            break;
        }
    }
    Ok(best)
}

/// `ε log2(1/ε) + (1-ε) log2(1/(1-ε))`, with `0 · log(1/0) = 0`.
pub fn binary_entropy(eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::OutOfRange(eps));
    }
    let term = |p: f64| if p == 0.0 { 0.0 } else { -p * p.log2() };
    Ok(term(eps) + term(1.0 - eps))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropySum {
    pub n: u32,
    pub epsilon: f64,
    /// `Σ_{i=0}^{⌊εn⌋} C(n, i)`, exact.
    #[serde(serialize_with = "serialize_biguint")]
    pub left: BigUint,
    /// `2^{H(ε) n}`.
    pub right: f64,
    pub holds: bool,
}

fn serialize_biguint<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Evaluates both sides of `Σ_{i ≤ ⌊εn⌋} C(n, i) ≤ 2^{H(ε) n}` for `0 < ε < 1/2`.
pub fn entropy_sum_holds(n: u32, eps: f64) -> Result<EntropySum> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::OutOfRange(eps));
    }
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    let top = (eps * n as f64).floor() as u32;
    let left = binom_partial_sum(n, top);
    let exponent = binary_entropy(eps)? * n as f64;
    let right = exponent.exp2();
    // Compare in log space so large n cannot overflow the f64 conversion.
    let holds = match left.to_f64() {
        Some(l) if l.is_finite() => l <= right,
        _ => (left.bits() as f64 - 1.0) <= exponent,
    };
    Ok(EntropySum { n, epsilon: eps, left, right, holds })
}

/// `(max(d - 1, 0), ⌊(91/20) d⌋)`.
pub fn theorem_bounds(d: u64) -> (u64, u64) {
    (d.saturating_sub(1), DELTA_NUMERATOR * d / DELTA_DENOMINATOR)
}

/// Bisection for the root `ε*` of `H(ε) = 1/2` on `(0, 1/2)`, stopping once
/// the bracket is narrower than `tolerance`; `δ* = 1/(2ε*)`.
pub fn solve_optimal_delta(tolerance: f64) -> Result<BoundConstants> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::OutOfRange(tolerance));
    }
    let f = |e: f64| binary_entropy(e).map(|h| h - 0.5);
    // H is increasing on (0, 1/2): f(lo) < 0 < f(hi).
    let (mut lo, mut hi) = (1e-12, 0.5 - 1e-12);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let epsilon = 0.5 * (lo + hi);
    Ok(BoundConstants { epsilon, delta: 1.0 / (2.0 * epsilon) })
}

/// `2d log2(2d)`, used only as a comparison curve in reports.
pub fn urner_bound(d: u64) -> Result<f64> {
    if d < 1 {
        return Err(Error::OutOfRange(d as f64));
    }
    let two_d = 2.0 * d as f64;
    Ok(two_d * two_d.log2())
}

/// Smallest `d ≥ 1` at which `2d log2(2d)` exceeds `(91/20) d`.
pub fn urner_crossover() -> u64 {
    (1..).find(|&d| urner_bound(d).unwrap() > DELTA_NUMERATOR as f64 * d as f64 / DELTA_DENOMINATOR as f64).unwrap()
}
