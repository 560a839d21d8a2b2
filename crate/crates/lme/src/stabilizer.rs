//! Generic SLOCC stabilizer dimension by randomized rank.
//!
//! The local special-linear Lie algebra acts on a state through
//! `(g . psi)_{j_1..j_n} = sum_i (g_i)_{j_i k} psi_{..k..}`; stacking the
//! images of a traceless-matrix basis gives a `(prod d_i) x (sum d_i^2 - 1)`
//! matrix whose rank at a generic state determines the generic orbit
//! dimension. The method of record evaluates that rank exactly over the prime
//! field of size 2^61 - 1 at uniformly random states; a floating SVD serves
//! as a cross-check.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dimvec::DimVec;
use crate::flow::random_state;
use crate::tensor::StateTensor;
use crate::{Error, Result};

/// Default cap on the state-space dimension for [`stabilizer_report`].
pub const DEFAULT_DIM_CAP: i128 = 4096;

/// How ranks are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RankMethod {
    /// Exact Gaussian elimination over F_p, p = 2^61 - 1.
    FiniteField,
    /// Singular values with relative threshold 1e-10.
    NumericSvd,
}

/// Rank measurement and the derived dimensions.
#[derive(Clone, Debug, Serialize)]
pub struct StabilizerReport {
    pub dims: DimVec,
    /// Maximum action-matrix rank over the trials: the generic orbit
    /// dimension.
    pub rank: usize,
    /// dim G = sum (d_i^2 - 1).
    pub dim_g: usize,
    /// dim P(H) = prod d_i - 1.
    pub dim_ph: usize,
    /// Generic stabilizer dimension, dim G - rank.
    pub dim_s: usize,
    /// dim P(H) - rank; negative means the generic orbit is dense and the
    /// quotient is empty.
    pub quotient_dim: i64,
    pub trials: usize,
    pub method: RankMethod,
    /// The closed-form predicate for the generic stabilizer being trivial
    /// (not merely zero-dimensional): expected dimension > 3.
    pub generic_stabilizer_trivial: bool,
}

/// Traceless basis element of one factor: either an off-diagonal unit matrix
/// or a difference of adjacent diagonal units.
#[derive(Clone, Copy, Debug)]
enum BasisElem {
    Off { j: usize, k: usize },
    Diag { j: usize },
}

fn traceless_basis(d: usize) -> Vec<BasisElem> {
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in 0..d {
            if j != k {
                out.push(BasisElem::Off { j, k });
            }
        }
    }
    for j in 0..d - 1 {
        out.push(BasisElem::Diag { j });
    }
    out
}

/// Lie-algebra action matrix at `s`, shape `(prod d_i) x (sum d_i^2 - 1)`,
/// columns ordered factor by factor in the fixed basis order.
pub fn action_matrix(s: &StateTensor) -> Result<DMatrix<C64>> {
    if s.norm2() <= 0.0 {
        return Err(Error::ZeroState);
    }
    let dims = s.dims();
    let rows = s.coeffs().len();
    let cols: usize = dims.iter().map(|&d| d * d - 1).sum();
    let mut m = DMatrix::from_element(rows, cols, C64::new(0.0, 0.0));
    let mut col = 0;
    for (factor, &d) in dims.iter().enumerate() {
        let stride: usize = dims[factor + 1..].iter().product();
        let block = d * stride;
        let outer: usize = dims[..factor].iter().product();
        for elem in traceless_basis(d) {
            for o in 0..outer {
                let base = o * block;
                for off in 0..stride {
                    match elem {
                        BasisElem::Off { j, k } => {
                            m[(base + j * stride + off, col)] =
                                s.coeffs()[base + k * stride + off];
                        }
                        BasisElem::Diag { j } => {
                            m[(base + j * stride + off, col)] =
                                s.coeffs()[base + j * stride + off];
                            m[(base + (j + 1) * stride + off, col)] =
                                -s.coeffs()[base + (j + 1) * stride + off];
                        }
                    }
                }
            }
            col += 1;
        }
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// arithmetic modulo the Mersenne prime 2^61 - 1

pub(crate) const FF_PRIME: u64 = (1 << 61) - 1;

#[inline]
fn ff_mul(a: u64, b: u64) -> u64 {
    let wide = a as u128 * b as u128;
    let folded = (wide & FF_PRIME as u128) as u64 + (wide >> 61) as u64;
    let folded = (folded & FF_PRIME) + (folded >> 61);
    if folded >= FF_PRIME {
        folded - FF_PRIME
    } else {
        folded
    }
}

#[inline]
fn ff_sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + FF_PRIME - b
    }
}

fn ff_pow(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ff_mul(acc, base);
        }
        base = ff_mul(base, base);
        exp >>= 1;
    }
    acc
}

#[inline]
fn ff_inv(a: u64) -> u64 {
    ff_pow(a, FF_PRIME - 2)
}

/// Row-echelon rank of a dense row-major matrix over F_p. Consumes the rows.
fn ff_rank(rows: &mut [Vec<u64>], cols: usize) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = ff_inv(rows[rank][col]);
        for r in rank + 1..rows.len() {
            let lead = rows[r][col];
            if lead == 0 {
                continue;
            }
            let factor = ff_mul(lead, inv);
            let (top, bottom) = rows.split_at_mut(r);
            let prow = &top[rank];
            let row = &mut bottom[0];
            for c in col..cols {
                if prow[c] != 0 {
                    row[c] = ff_sub(row[c], ff_mul(factor, prow[c]));
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Action matrix over F_p at field-valued coefficients `psi`.
fn ff_action_rows(dims: &[usize], psi: &[u64]) -> Vec<Vec<u64>> {
    let rows = psi.len();
    let cols: usize = dims.iter().map(|&d| d * d - 1).sum();
    let mut m = vec![vec![0u64; cols]; rows];
    let mut col = 0;
    for (factor, &d) in dims.iter().enumerate() {
        let stride: usize = dims[factor + 1..].iter().product();
        let block = d * stride;
        let outer: usize = dims[..factor].iter().product();
        for elem in traceless_basis(d) {
            for o in 0..outer {
                let base = o * block;
                for off in 0..stride {
                    match elem {
                        BasisElem::Off { j, k } => {
                            m[base + j * stride + off][col] = psi[base + k * stride + off];
                        }
                        BasisElem::Diag { j } => {
                            m[base + j * stride + off][col] = psi[base + j * stride + off];
                            m[base + (j + 1) * stride + off][col] =
                                ff_sub(0, psi[base + (j + 1) * stride + off]);
                        }
                    }
                }
            }
            col += 1;
        }
    }
    m
}

fn ff_rank_at_random_state(dims: &[usize], rng: &mut ChaCha8Rng) -> usize {
    let len: usize = dims.iter().product();
    let psi: Vec<u64> = (0..len).map(|_| rng.gen_range(1..FF_PRIME)).collect();
    let cols: usize = dims.iter().map(|&d| d * d - 1).sum();
    let mut rows = ff_action_rows(dims, &psi);
    ff_rank(&mut rows, cols)
}

/// Numeric rank of a complex matrix: singular values above
/// `1e-10 * sigma_max`.
pub fn svd_rank(m: &DMatrix<C64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-10 * max).count()
}

/// Seed for one trial; trials are independent, so batches may fan out over
/// workers and reduce with `max` in any order.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Rank of the action matrix at one random state.
pub fn rank_one_trial(d: &DimVec, trial_seed: u64, method: RankMethod) -> Result<usize> {
    let dims: Vec<usize> = d.parts().iter().map(|&x| x as usize).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    Ok(match method {
        RankMethod::FiniteField => ff_rank_at_random_state(&dims, &mut rng),
        RankMethod::NumericSvd => {
            let s = random_state(dims.clone(), &mut rng)?;
            svd_rank(&action_matrix(&s)?)
        }
    })
}

/// Maximum action-matrix rank over `trials` random states.
pub fn generic_rank(d: &DimVec, trials: usize, seed: u64, method: RankMethod) -> Result<usize> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let mut best = 0;
    for t in 0..trials {
        best = best.max(rank_one_trial(d, trial_seed(seed, t), method)?);
    }
    Ok(best)
}

/// Full report at the default state-space cap.
pub fn stabilizer_report(
    d: &DimVec,
    trials: usize,
    seed: u64,
    method: RankMethod,
) -> Result<StabilizerReport> {
    stabilizer_report_with_cap(d, trials, seed, method, DEFAULT_DIM_CAP)
}

pub fn stabilizer_report_with_cap(
    d: &DimVec,
    trials: usize,
    seed: u64,
    method: RankMethod,
    dim_cap: i128,
) -> Result<StabilizerReport> {
    let product = d.product()?;
    if product > dim_cap {
        return Err(Error::ResourceCap(format!(
            "state space dimension {product} exceeds the cap {dim_cap}"
        )));
    }
    let rank = generic_rank(d, trials, seed, method)?;
    let dim_g: usize = d.parts().iter().map(|&x| (x * x - 1) as usize).sum();
    let dim_ph = (product - 1) as usize;
    let trivial = crate::classify::generic_stabilizer_trivial(d)?;
    Ok(StabilizerReport {
        dims: d.clone(),
        rank,
        dim_g,
        dim_ph,
        dim_s: dim_g - rank,
        quotient_dim: dim_ph as i64 - rank as i64,
        trials,
        method,
        generic_stabilizer_trivial: trivial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::bell;
    use num_complex::Complex64 as C64;

    fn dv(parts: &[u64]) -> DimVec {
        DimVec::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn ff_arithmetic() {
        assert_eq!(ff_mul(FF_PRIME - 1, FF_PRIME - 1), 1);
        assert_eq!(ff_mul(2, ff_inv(2)), 1);
        assert_eq!(ff_sub(3, 5), FF_PRIME - 2);
        let a = 123_456_789_012_345_678u64 % FF_PRIME;
        assert_eq!(ff_mul(a, ff_inv(a)), 1);
    }

    #[test]
    fn ff_rank_of_known_matrices() {
        // identity-ish and a dependent row
        let mut rows = vec![
            vec![1, 0, 0],
            vec![0, 1, 0],
            vec![1, 1, 0],
            vec![0, 0, 5],
        ];
        assert_eq!(ff_rank(&mut rows, 3), 3);
        let mut rows = vec![vec![2, 4], vec![1, 2]];
        assert_eq!(ff_rank(&mut rows, 2), 1);
        let mut rows = vec![vec![0, 0], vec![0, 0]];
        assert_eq!(ff_rank(&mut rows, 2), 0);
    }

    #[test]
    fn action_matrix_shape_and_ranks() {
        let b = bell(2).unwrap();
        let m = action_matrix(&b).unwrap();
        assert_eq!(m.nrows(), 4);
        assert_eq!(m.ncols(), 6);
        assert_eq!(svd_rank(&m), 3);

        // product state |00>: columns span {|00>, |10>, |01>}
        let mut coeffs = vec![C64::new(0.0, 0.0); 4];
        coeffs[0] = C64::new(1.0, 0.0);
        let p = StateTensor::new(vec![2, 2], coeffs).unwrap();
        assert_eq!(svd_rank(&action_matrix(&p).unwrap()), 3);
    }

    #[test]
    fn generic_ranks_for_small_shapes() {
        for (parts, want) in [
            (&[2u64, 2][..], 3usize),
            (&[2, 2, 2], 7),
            (&[3, 3, 3], 24),
            (&[2, 2, 2, 2], 12),
        ] {
            let d = dv(parts);
            let ff = generic_rank(&d, 3, 42, RankMethod::FiniteField).unwrap();
            assert_eq!(ff, want, "{parts:?} finite field");
            let svd = generic_rank(&d, 3, 42, RankMethod::NumericSvd).unwrap();
            assert_eq!(svd, want, "{parts:?} svd");
        }
    }

    #[test]
    fn reports() {
        let r = stabilizer_report(&dv(&[2, 2, 2]), 5, 1, RankMethod::FiniteField).unwrap();
        assert_eq!(r.dim_g, 9);
        assert_eq!(r.dim_ph, 7);
        assert_eq!(r.dim_s, 2);
        assert_eq!(r.quotient_dim, 0);
        assert!(!r.generic_stabilizer_trivial);

        let r = stabilizer_report(&dv(&[3, 3, 3]), 5, 1, RankMethod::FiniteField).unwrap();
        assert_eq!(r.dim_s, 0);
        assert_eq!(r.quotient_dim, 2);

        let r = stabilizer_report(&dv(&[2, 2, 2, 2]), 5, 1, RankMethod::FiniteField).unwrap();
        assert_eq!(r.dim_s, 0);
        assert_eq!(r.quotient_dim, 3);

        // dense generic orbit: (2,2,5) has negative quotient dimension
        let r = stabilizer_report(&dv(&[2, 2, 5]), 5, 1, RankMethod::FiniteField).unwrap();
        assert!(r.quotient_dim < 0);

        assert!(stabilizer_report(&dv(&[64, 65]), 1, 1, RankMethod::FiniteField)
            .unwrap_err()
            .is_resource());
    }

    #[test]
    fn rank_is_monotone_in_trials() {
        let d = dv(&[2, 3, 4]);
        let mut prev = 0;
        for t in 1..=4 {
            let r = generic_rank(&d, t, 7, RankMethod::FiniteField).unwrap();
            assert!(r >= prev);
            prev = r;
        }
    }

    #[test]
    fn rank_is_basis_independent() {
        // replace the E_jk basis with its symmetric/antisymmetric combination
        // over F_p; the column space is unchanged, so the rank must agree
        let dims = [2usize, 2, 2];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let len: usize = dims.iter().product();
        let psi: Vec<u64> = (0..len).map(|_| rng.gen_range(1..FF_PRIME)).collect();
        let cols: usize = dims.iter().map(|&d| d * d - 1).sum();
        let mut rows = ff_action_rows(&dims, &psi);
        let base_rank = ff_rank(&mut rows.clone(), cols);

        // mix columns pairwise: (c1 + c2, c1 - c2) for the off-diagonal pairs
        for r in rows.iter_mut() {
            let mut col = 0;
            for &d in &dims {
                let off_count = d * (d - 1);
                let mut k = 0;
                while k + 1 < off_count {
                    let a = r[col + k];
                    let b = r[col + k + 1];
                    r[col + k] = (a + b) % FF_PRIME;
                    r[col + k + 1] = ff_sub(a, b);
                    k += 2;
                }
                col += d * d - 1;
            }
        }
        assert_eq!(ff_rank(&mut rows, cols), base_rank);
    }
}
