//! Sporadic nonempty triples `(A, d2, d3)` with expected dimension at most -2,
//! generated by second-order linear recurrences, plus grid-scan data for the
//! `(A, B, C)` plane.
//!
//! For fixed smallest dimension `A`, every nonempty triple below the expected
//! dimension threshold arises as consecutive terms `(f_i, f_{i+1})` of a
//! sequence `f_{i+1} = A f_i - f_{i-1}` started either at `(k, kA)` or at a
//! pair from a finite seed set; [`compute_seed_set`] scans that set out of its
//! defining inequalities.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::classify::{classify, ClassifyCache};
use crate::dimvec::{expected_dim, DimVec};
use crate::{Error, Result};

/// Starting pair for the recurrence at fixed smallest dimension `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SporadicSeed {
    pub a: u64,
    pub f0: u64,
    pub f1: u64,
}

/// First `count` terms of `f_{i+1} = a f_i - f_{i-1}`.
pub fn sequence(seed: &SporadicSeed, count: usize) -> Result<Vec<u64>> {
    if count < 2 {
        return Err(Error::InvalidParameter(
            "sequence needs at least two terms".into(),
        ));
    }
    let mut terms: Vec<i128> = vec![seed.f0 as i128, seed.f1 as i128];
    while terms.len() < count {
        let m = terms.len();
        let next = (seed.a as i128)
            .checked_mul(terms[m - 1])
            .and_then(|v| v.checked_sub(terms[m - 2]))
            .ok_or(Error::Overflow)?;
        terms.push(next);
    }
    terms
        .into_iter()
        .map(|t| u64::try_from(t).map_err(|_| Error::InvalidParameter("sequence term left the positive range".into())))
        .collect()
}

/// Check `terms` against the closed generating function
/// `(f0 + (f1 - a f0) x) / (1 - a x + x^2)` by the convolution identity:
/// multiplying the series back by the denominator must reproduce the
/// numerator (all higher coefficients zero).
pub fn check_generating_function(seed: &SporadicSeed, terms: &[u64]) -> bool {
    if terms.len() < 2 || terms[0] != seed.f0 || terms[1] != seed.f1 {
        return false;
    }
    let c = |i: usize| terms[i] as i128;
    let a = seed.a as i128;
    // coefficient of x^1 in series * (1 - a x + x^2)
    if c(1) - a * c(0) != seed.f1 as i128 - a * seed.f0 as i128 {
        return false;
    }
    for i in 2..terms.len() {
        if c(i) - a * c(i - 1) + c(i - 2) != 0 {
            return false;
        }
    }
    true
}

/// The finite seed set for `a >= 3`: pairs `(b, c)` with
/// `2b <= ac`, `2c <= ab`, `bc >= a`, `abc - a^2 - b^2 - c^2 + 4 <= 0`,
/// and a nonempty quotient for the sorted multiset `{a, b, c}`.
///
/// For `a = 2` the region degenerates to the unbounded diagonal
/// `{(b, b) : b >= 2}`; that family is handled directly by
/// [`enumerate_sporadic`], and this function rejects `a = 2`.
pub fn compute_seed_set(a: u64) -> Result<BTreeSet<(u64, u64)>> {
    if a < 3 {
        return Err(Error::InvalidParameter(format!(
            "seed set is unbounded for a = {a}; need a >= 3"
        )));
    }
    let mut out = BTreeSet::new();
    // For a >= 3 every solution has b, c <= 2a (the band around bc = a is
    // that narrow); scanning farther only re-verifies emptiness.
    for b in 1..=2 * a {
        for c in 1..=2 * a {
            if !seed_region_contains(a, b, c) {
                continue;
            }
            let triple = DimVec::new(vec![a, b, c])?;
            if classify(&triple)?.exists {
                out.insert((b, c));
            }
        }
    }
    Ok(out)
}

fn seed_region_contains(a: u64, b: u64, c: u64) -> bool {
    let (a, b, c) = (a as i128, b as i128, c as i128);
    2 * b <= a * c && 2 * c <= a * b && b * c >= a && a * b * c - a * a - b * b - c * c + 4 <= 0
}

/// All nonempty triples `(a, d2, d3)` with smallest part `a`, expected
/// dimension at most -2, and `d3 <= max_dim`, deduplicated and sorted.
pub fn enumerate_sporadic(a: u64, max_dim: u64) -> Result<BTreeSet<DimVec>> {
    if a < 2 {
        return Err(Error::InvalidParameter("need a >= 2".into()));
    }
    if max_dim < a {
        return Err(Error::InvalidParameter("need max_dim >= a".into()));
    }
    let mut seeds: Vec<SporadicSeed> = (1..=max_dim / a)
        .map(|k| SporadicSeed {
            a,
            f0: k,
            f1: k * a,
        })
        .collect();
    if a == 2 {
        seeds.extend((2..=max_dim).map(|b| SporadicSeed { a, f0: b, f1: b }));
    } else {
        seeds.extend(
            compute_seed_set(a)?
                .into_iter()
                .map(|(f0, f1)| SporadicSeed { a, f0, f1 }),
        );
    }

    let cache = ClassifyCache::new();
    let mut out = BTreeSet::new();
    for seed in &seeds {
        for (x, y) in seed_pairs(seed, max_dim) {
            if x.min(y) < a {
                continue;
            }
            let triple = DimVec::new(vec![a, x, y])?;
            if expected_dim(&triple)? <= -2 && cache.classify(&triple)?.exists {
                out.insert(triple);
            }
        }
    }
    Ok(out)
}

/// Consecutive pairs of the seed's sequence with both members in
/// `[1, max_dim]`.
fn seed_pairs(seed: &SporadicSeed, max_dim: u64) -> Vec<(u64, u64)> {
    let a = seed.a as i128;
    let mut prev = seed.f0 as i128;
    let mut cur = seed.f1 as i128;
    let mut pairs = Vec::new();
    for _ in 0..256 {
        if prev >= 1 && cur >= 1 && prev <= max_dim as i128 && cur <= max_dim as i128 {
            pairs.push((prev as u64, cur as u64));
        }
        let next = a * cur - prev;
        let constant = next == cur && cur == prev;
        if next <= 0 || constant || (cur > max_dim as i128 && next >= cur) {
            break;
        }
        prev = cur;
        cur = next;
    }
    pairs
}

/// Row classification for the `(A, B, C)` scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridStatus {
    /// No LME states.
    Empty,
    /// Nonempty with dimension equal to the expected dimension.
    ExpectedDim,
    /// Nonempty single point below the expected-dimension threshold.
    Point,
    /// Expected dimension exactly -2: dimension governed by the largest
    /// pairwise gcd.
    GmaxCase,
}

impl GridStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            GridStatus::Empty => "empty",
            GridStatus::ExpectedDim => "expected-dim",
            GridStatus::Point => "point",
            GridStatus::GmaxCase => "gmax-case",
        }
    }
}

/// One grid cell: the raw `(A, B, C)` position plus the classification of the
/// sorted triple.
#[derive(Clone, Debug, Serialize)]
pub struct GridRow {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub status: GridStatus,
    pub dim_complex: Option<u64>,
    pub r: i128,
    pub delta: i128,
}

/// Classify every `(B, C)` with `a <= B <= b_max` and `B <= C <= a B`.
pub fn scan_grid(a: u64, b_max: u64) -> Result<Vec<GridRow>> {
    if a < 2 {
        return Err(Error::InvalidParameter("need a >= 2".into()));
    }
    let cache = ClassifyCache::new();
    let mut rows = Vec::new();
    for b in a..=b_max {
        rows.extend(scan_grid_row_cached(a, b, &cache)?);
    }
    Ok(rows)
}

/// One `B` slice of the grid: every `C` in `B..=a*B`.
pub fn scan_grid_row(a: u64, b: u64) -> Result<Vec<GridRow>> {
    if a < 2 {
        return Err(Error::InvalidParameter("need a >= 2".into()));
    }
    scan_grid_row_cached(a, b, &ClassifyCache::new())
}

fn scan_grid_row_cached(a: u64, b: u64, cache: &ClassifyCache) -> Result<Vec<GridRow>> {
    let mut rows = Vec::new();
    for c in b..=a * b {
        let d = DimVec::new(vec![a, b, c])?;
        let res = cache.classify(&d)?;
        let status = if !res.exists {
            GridStatus::Empty
        } else if res.delta_value == -2 {
            GridStatus::GmaxCase
        } else if res.delta_value < -2 {
            GridStatus::Point
        } else {
            GridStatus::ExpectedDim
        };
        rows.push(GridRow {
            a,
            b,
            c,
            status,
            dim_complex: res.dim,
            r: res.r_value,
            delta: res.delta_value,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimvec::capital_r;

    fn set(pairs: &[(u64, u64)]) -> BTreeSet<(u64, u64)> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn sequence_examples() {
        let s = SporadicSeed { a: 3, f0: 1, f1: 3 };
        assert_eq!(sequence(&s, 5).unwrap(), vec![1, 3, 8, 21, 55]);

        let s = SporadicSeed { a: 2, f0: 4, f1: 4 };
        assert_eq!(sequence(&s, 5).unwrap(), vec![4, 4, 4, 4, 4]);

        let s = SporadicSeed { a: 2, f0: 3, f1: 6 };
        assert_eq!(sequence(&s, 4).unwrap(), vec![3, 6, 9, 12]);
    }

    #[test]
    fn generating_function_matches_first_ten_terms() {
        for seed in [
            SporadicSeed { a: 3, f0: 1, f1: 3 },
            SporadicSeed { a: 3, f0: 2, f1: 3 },
            SporadicSeed { a: 4, f0: 2, f1: 2 },
            SporadicSeed { a: 2, f0: 3, f1: 6 },
            SporadicSeed { a: 5, f0: 2, f1: 10 },
        ] {
            let terms = sequence(&seed, 10).unwrap();
            assert!(check_generating_function(&seed, &terms), "{seed:?}");
        }
        let seed = SporadicSeed { a: 3, f0: 1, f1: 3 };
        assert!(!check_generating_function(&seed, &[1, 3, 8, 20]));
    }

    #[test]
    fn seed_sets_for_small_a() {
        assert_eq!(
            compute_seed_set(3).unwrap(),
            set(&[(3, 2), (2, 2), (2, 3)])
        );
        // (2,2) qualifies for a = 4: it satisfies all four region
        // inequalities, (2,2,4) is nonempty, and its sequence reaches the
        // genuine sporadic triple (4,6,22).
        assert_eq!(
            compute_seed_set(4).unwrap(),
            set(&[(4, 2), (3, 2), (2, 3), (2, 4), (2, 2)])
        );
        assert_eq!(
            compute_seed_set(5).unwrap(),
            set(&[(5, 2), (4, 2), (2, 4), (2, 5)])
        );
        assert!(compute_seed_set(2).is_err());
    }

    #[test]
    fn seed_set_scan_bound_is_wide_enough() {
        // re-scan with a much larger window; nothing new may appear
        for a in 3u64..=9 {
            let base = compute_seed_set(a).unwrap();
            let mut wide = BTreeSet::new();
            for b in 1..=4 * a {
                for c in 1..=4 * a {
                    if seed_region_contains(a, b, c)
                        && classify(&DimVec::new(vec![a, b, c]).unwrap())
                            .unwrap()
                            .exists
                    {
                        wide.insert((b, c));
                    }
                }
            }
            assert_eq!(base, wide, "a = {a}");
        }
    }

    #[test]
    fn enumerate_examples_a3() {
        let got = enumerate_sporadic(3, 25).unwrap();
        for parts in [[3u64, 3, 7], [3, 3, 8], [3, 8, 21], [3, 7, 18]] {
            assert!(
                got.contains(&DimVec::new(parts.to_vec()).unwrap()),
                "{parts:?} missing"
            );
        }
        // (3,4,9) is nonempty but sits above the expected-dimension
        // threshold (Delta = 4), so it is not sporadic
        assert!(!got.contains(&DimVec::new(vec![3, 4, 9]).unwrap()));
        assert_eq!(
            expected_dim(&DimVec::new(vec![3, 4, 9]).unwrap()).unwrap(),
            4
        );
    }

    #[test]
    fn enumerate_a2_matches_closed_form() {
        let got = enumerate_sporadic(2, 13).unwrap();
        let mut want = BTreeSet::new();
        for b in 2u64..=13 {
            want.insert(DimVec::new(vec![2, b, b]).unwrap());
        }
        for b in 1u64..=13 {
            for k in 1u64.. {
                if (k + 1) * b > 13 {
                    break;
                }
                if k * b >= 2 {
                    want.insert(DimVec::new(vec![2, k * b, (k + 1) * b]).unwrap());
                }
            }
        }
        assert_eq!(got, want);
    }

    #[test]
    fn emitted_triples_have_nonnegative_r() {
        for a in 2u64..=5 {
            for d in enumerate_sporadic(a, 40).unwrap() {
                assert!(capital_r(&d).unwrap() >= 0, "{d}");
            }
        }
    }

    #[test]
    fn enumerate_matches_exhaustive_small() {
        for a in 2u64..=4 {
            let got = enumerate_sporadic(a, 30).unwrap();
            let mut want = BTreeSet::new();
            for d2 in a..=30 {
                for d3 in d2..=30 {
                    let d = DimVec::new(vec![a, d2, d3]).unwrap();
                    let res = classify(&d).unwrap();
                    if res.exists && res.delta_value <= -2 {
                        want.insert(d);
                    }
                }
            }
            assert_eq!(got, want, "a = {a}");
        }
    }

    #[test]
    fn grid_rows() {
        let rows = scan_grid(2, 8).unwrap();
        for r in rows.iter().filter(|r| r.c == r.b) {
            assert_eq!(r.status, GridStatus::GmaxCase, "B = {}", r.b);
            let want = if r.b > 3 { r.b - 3 } else { 0 };
            assert_eq!(r.dim_complex, Some(want));
        }

        let rows = scan_grid(3, 9).unwrap();
        let find = |b, c| rows.iter().find(|r| r.b == b && r.c == c).unwrap();
        assert_eq!(find(3, 9).status, GridStatus::Point);
        let r45 = find(4, 5);
        assert_eq!(r45.status, GridStatus::ExpectedDim);
        assert_eq!(r45.delta, 12);
        assert_eq!(r45.dim_complex, Some(12));
        // row count: no silent skips
        let expected: u64 = (3..=9u64).map(|b| 3 * b - b + 1).sum();
        assert_eq!(rows.len() as u64, expected);
    }
}
