//! Dimension vectors and their arithmetic invariants.
//!
//! A [`DimVec`] is an ordered list of positive subsystem dimensions, stored
//! sorted ascending. The derived quantities are
//!
//! - `N(k_1,...,k_n)`: the gcd inclusion-exclusion sum, equal to the number of
//!   rationals in `(0,1]` whose reduced denominator divides some `k_i`,
//! - `R(d) = prod d_i - N(d_1^2,...,d_n^2)`: LME states exist iff `R >= 0`,
//! - `Delta(d) = (prod d_i - 1) - sum (d_i^2 - 1)`: the expected complex
//!   dimension of the quotient of projective state space by local SLOCC,
//! - `g_max(d)`: the largest pairwise gcd.
//!
//! All arithmetic is exact over `i128` with overflow checks; the sign of `R`
//! must never be a rounding artifact.

use std::fmt;
use std::str::FromStr;

use num::integer::gcd;
use serde::Serialize;

use crate::{Error, Result};

/// Sorted vector of positive subsystem dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct DimVec {
    parts: Vec<u64>,
}

impl DimVec {
    /// Build from arbitrary order; parts are sorted ascending. Parts equal to
    /// 1 are retained.
    pub fn new(mut parts: Vec<u64>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::EmptyDims);
        }
        if parts.iter().any(|&d| d == 0) {
            return Err(Error::ZeroPart);
        }
        parts.sort_unstable();
        Ok(DimVec { parts })
    }

    pub fn n(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    /// Largest part.
    pub fn max_part(&self) -> u64 {
        *self.parts.last().expect("nonempty")
    }

    /// Parts with the 1s removed, still sorted. May be empty.
    pub fn stripped_parts(&self) -> Vec<u64> {
        self.parts.iter().copied().filter(|&d| d > 1).collect()
    }

    /// Exact product of all parts.
    pub fn product(&self) -> Result<i128> {
        checked_product(self.parts.iter().map(|&d| d as i128))
    }
}

impl fmt::Display for DimVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for d in &self.parts {
            if !first {
                write!(f, "x")?;
            }
            write!(f, "{d}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for DimVec {
    type Err = Error;

    /// Accepts `"2x3x6"` and `"2,3,6"`.
    fn from_str(s: &str) -> Result<Self> {
        let sep = if s.contains(',') { ',' } else { 'x' };
        let parts = s
            .split(sep)
            .map(|tok| {
                tok.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("bad dimension `{tok}` in `{s}`")))
            })
            .collect::<Result<Vec<u64>>>()?;
        DimVec::new(parts)
    }
}

fn checked_product(it: impl Iterator<Item = i128>) -> Result<i128> {
    let mut acc: i128 = 1;
    for v in it {
        acc = acc.checked_mul(v).ok_or(Error::Overflow)?;
    }
    Ok(acc)
}

/// Inclusion-exclusion gcd sum over all nonempty subsets:
/// `N(k) = sum_l (-1)^(l+1) sum_{i_1<...<i_l} gcd(k_{i_1},...,k_{i_l})`.
///
/// Equals the number of rationals in `(0,1]` whose reduced denominator
/// divides some `k_i`.
pub fn count_rationals(k: &[u64]) -> Result<i128> {
    if k.is_empty() {
        return Err(Error::EmptyDims);
    }
    if k.iter().any(|&v| v == 0) {
        return Err(Error::ZeroPart);
    }
    if k.len() > 32 {
        return Err(Error::ResourceCap(format!(
            "inclusion-exclusion over {} parts",
            k.len()
        )));
    }
    let n = k.len();
    let mut total: i128 = 0;
    for mask in 1u64..(1u64 << n) {
        let mut g: u64 = 0;
        for (i, &ki) in k.iter().enumerate() {
            if mask >> i & 1 == 1 {
                g = gcd(g, ki);
            }
        }
        let sign = if mask.count_ones() % 2 == 1 { 1 } else { -1 };
        total = total
            .checked_add(sign * g as i128)
            .ok_or(Error::Overflow)?;
    }
    Ok(total)
}

/// Existence invariant `R(d) = prod d_i - N(d_1^2,...,d_n^2)`.
///
/// LME states exist for `d` iff `R(d) >= 0`.
pub fn capital_r(d: &DimVec) -> Result<i128> {
    let squares = d
        .parts()
        .iter()
        .map(|&x| x.checked_mul(x).ok_or(Error::Overflow))
        .collect::<Result<Vec<u64>>>()?;
    let prod = d.product()?;
    let n = count_rationals(&squares)?;
    prod.checked_sub(n).ok_or(Error::Overflow)
}

/// Expected complex dimension `Delta(d) = (prod d_i - 1) - sum (d_i^2 - 1)`.
pub fn expected_dim(d: &DimVec) -> Result<i128> {
    let prod = d.product()?;
    let mut acc = prod.checked_sub(1).ok_or(Error::Overflow)?;
    for &x in d.parts() {
        let sq = (x as i128).checked_mul(x as i128).ok_or(Error::Overflow)?;
        acc = acc.checked_sub(sq - 1).ok_or(Error::Overflow)?;
    }
    Ok(acc)
}

/// Largest pairwise gcd, `max_{i<j} gcd(d_i, d_j)`. Needs at least two parts.
pub fn g_max(d: &DimVec) -> Result<u64> {
    if d.n() < 2 {
        return Err(Error::TooFewParts {
            need: 2,
            got: d.n(),
        });
    }
    let p = d.parts();
    let mut best = 1;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            best = best.max(gcd(p[i], p[j]));
        }
    }
    Ok(best)
}
