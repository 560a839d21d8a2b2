//! Existence and dimension of the space of LME states modulo local unitaries.
//!
//! Two independent routes are implemented and cross-checked in the tests:
//! the four-case recursion ([`classify`]) and the closed-form trichotomy in
//! the expected dimension ([`dim_by_trichotomy`]). Both report complex
//! dimensions.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;

use crate::dimvec::{capital_r, expected_dim, g_max, DimVec};
use crate::{Error, Result};

/// Which case of the recursion fired at each step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseTag {
    /// Largest part exceeds the product of the rest: empty.
    Case1,
    /// Largest part equals the product of the rest: a single point.
    Case2,
    /// Largest part at most half the product of the rest: nonempty with a
    /// closed-form dimension.
    Case3,
    /// Middle range: substitute `d_n -> prod_{i<n} d_i - d_n` and recurse.
    Case4Step,
}

/// Outcome of [`classify`].
#[derive(Clone, Debug, Serialize)]
pub struct ClassifyResult {
    /// Whether LME states exist for these dimensions.
    pub exists: bool,
    /// Complex dimension of the space of LME states up to local unitaries;
    /// present exactly when `exists`.
    pub dim: Option<u64>,
    /// Dimensions at which the recursion terminated, padded with 1s back to
    /// the input length.
    pub terminal_dims: DimVec,
    /// Case tags in the order they fired; ends in Case1, Case2 or Case3.
    pub case_trace: Vec<CaseTag>,
    /// Exact value of the existence invariant R.
    pub r_value: i128,
    /// Exact value of the expected dimension Delta.
    pub delta_value: i128,
}

/// Run the four-case recursion on `d`.
///
/// Parts equal to 1 are stripped before the case analysis (and whenever the
/// substitution produces new ones); they are reinserted only in
/// `terminal_dims` for display.
pub fn classify(d: &DimVec) -> Result<ClassifyResult> {
    let r_value = capital_r(d)?;
    let delta_value = expected_dim(d)?;
    let n_input = d.n();

    let mut work = d.stripped_parts();
    let mut case_trace = Vec::new();
    let (exists, dim) = loop {
        work.sort_unstable();
        match case_of(&work)? {
            CaseTag::Case1 => {
                case_trace.push(CaseTag::Case1);
                break (false, None);
            }
            CaseTag::Case2 => {
                case_trace.push(CaseTag::Case2);
                break (true, Some(0));
            }
            CaseTag::Case3 => {
                case_trace.push(CaseTag::Case3);
                break (true, Some(case3_dim(&work)?));
            }
            CaseTag::Case4Step => {
                case_trace.push(CaseTag::Case4Step);
                let t = work.pop().expect("nonempty in case 4");
                let m: u64 = work.iter().product();
                let replaced = m - t;
                if replaced > 1 {
                    work.push(replaced);
                }
                // replaced == 1 is dropped: unit parts do not affect any case
            }
        }
    };

    let mut terminal = work;
    while terminal.len() < n_input {
        terminal.push(1);
    }
    let terminal_dims = DimVec::new(terminal)?;

    Ok(ClassifyResult {
        exists,
        dim,
        terminal_dims,
        case_trace,
        r_value,
        delta_value,
    })
}

/// Case selection on stripped, sorted parts. An empty list (all parts were 1)
/// counts as Case2: the one-dimensional state space holds the scalar state,
/// trivially LME.
fn case_of(parts: &[u64]) -> Result<CaseTag> {
    let Some((&t, rest)) = parts.split_last() else {
        return Ok(CaseTag::Case2);
    };
    let m: i128 = checked_prod(rest)?;
    let t = t as i128;
    Ok(if t > m {
        CaseTag::Case1
    } else if t == m {
        CaseTag::Case2
    } else if 2 * t <= m {
        CaseTag::Case3
    } else {
        CaseTag::Case4Step
    })
}

fn checked_prod(parts: &[u64]) -> Result<i128> {
    let mut acc: i128 = 1;
    for &p in parts {
        acc = acc.checked_mul(p as i128).ok_or(Error::Overflow)?;
    }
    Ok(acc)
}

/// Dimension in case 3 on stripped sorted parts: the two exceptional shapes
/// `(2,2,2)` and `(2,d,d)`, otherwise the expected dimension.
fn case3_dim(parts: &[u64]) -> Result<u64> {
    if parts == [2, 2, 2] {
        return Ok(0);
    }
    if parts.len() == 3 && parts[0] == 2 && parts[1] == parts[2] {
        return Ok(parts[1] - 3);
    }
    let delta = expected_dim(&DimVec::new(parts.to_vec())?)?;
    u64::try_from(delta).map_err(|_| {
        Error::InvalidParameter(format!("negative expected dimension {delta} in case 3"))
    })
}

/// Closed-form existence and dimension:
///
/// - `Delta > -2`: nonempty with dimension `Delta`,
/// - `Delta = -2`: nonempty with dimension `max(g_max - 3, 0)`,
/// - `Delta < -2`: a point iff `R = 0`, empty iff `R < 0`.
///
/// Parts equal to 1 are stripped first; a vector with fewer than two
/// nontrivial parts is handled directly (scalar: a point; single part >= 2:
/// empty).
pub fn dim_by_trichotomy(d: &DimVec) -> Result<(bool, Option<u64>)> {
    let stripped = d.stripped_parts();
    if stripped.is_empty() {
        return Ok((true, Some(0)));
    }
    if stripped.len() == 1 {
        return Ok((false, None));
    }
    let sd = DimVec::new(stripped)?;
    let delta = expected_dim(&sd)?;
    if delta > -2 {
        let dim = u64::try_from(delta).map_err(|_| {
            Error::InvalidParameter(format!("expected dimension {delta} not realizable"))
        })?;
        Ok((true, Some(dim)))
    } else if delta == -2 {
        let g = g_max(&sd)?;
        Ok((true, Some(g.saturating_sub(3))))
    } else if capital_r(&sd)? == 0 {
        Ok((true, Some(0)))
    } else {
        Ok((false, None))
    }
}

/// Threshold `d_*` above which the expected dimension of `(prefix, d_n)`
/// falls below -2:
/// `d_* = P/2 + sqrt(P^2 - 4Q + 8)/2` with `P = prod d_i`, `Q = sum (d_i^2 - 1)`
/// over the prefix.
///
/// Unit parts are stripped; at least two nontrivial parts are required (the
/// discriminant is then provably nonnegative).
pub fn d_star(prefix: &DimVec) -> Result<f64> {
    let (p, disc) = d_star_parts(prefix)?;
    Ok(p as f64 / 2.0 + (disc as f64).sqrt() / 2.0)
}

/// Integer value of `d_*` when it is exactly integral, else `None`.
pub fn d_star_exact(prefix: &DimVec) -> Result<Option<u64>> {
    let (p, disc) = d_star_parts(prefix)?;
    let root = (disc as f64).sqrt().round() as i128;
    for cand in root.saturating_sub(1)..=root + 1 {
        if cand >= 0 && cand * cand == disc && (p + cand) % 2 == 0 {
            return Ok(Some(u64::try_from((p + cand) / 2).map_err(|_| Error::Overflow)?));
        }
    }
    Ok(None)
}

fn d_star_parts(prefix: &DimVec) -> Result<(i128, i128)> {
    let stripped = prefix.stripped_parts();
    if stripped.len() < 2 {
        return Err(Error::TooFewParts {
            need: 2,
            got: stripped.len(),
        });
    }
    let sd = DimVec::new(stripped)?;
    let p = sd.product()?;
    let mut q: i128 = 0;
    for &x in sd.parts() {
        q += (x as i128) * (x as i128) - 1;
    }
    let disc = p
        .checked_mul(p)
        .ok_or(Error::Overflow)?
        .checked_sub(4 * q - 8)
        .ok_or(Error::Overflow)?;
    assert!(disc >= 0, "negative discriminant for prefix {sd}");
    Ok((p, disc))
}

/// The generic SLOCC stabilizer is trivial exactly when `Delta(d) > 3`.
///
/// Note this is strictly stronger than the stabilizer having dimension zero:
/// shapes like `(3,3,3)` or `(2,2,2,2)` have zero-dimensional but finite
/// nontrivial stabilizers and return `false` here.
pub fn generic_stabilizer_trivial(d: &DimVec) -> Result<bool> {
    Ok(expected_dim(d)? > 3)
}

/// Memo table for grid scans, keyed on the normalized dimension vector.
/// Safe for concurrent use.
#[derive(Default)]
pub struct ClassifyCache {
    map: Mutex<HashMap<Vec<u64>, ClassifyResult>>,
}

impl ClassifyCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn classify(&self, d: &DimVec) -> Result<ClassifyResult> {
        if let Some(hit) = self.map.lock().unwrap().get(d.parts()) {
            return Ok(hit.clone());
        }
        let res = classify(d)?;
        self.map
            .lock()
            .unwrap()
            .insert(d.parts().to_vec(), res.clone());
        Ok(res)
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
