//! Wigner 3j symbols by the Racah sum over exact big rationals, and the
//! tripartite LME state they define.
//!
//! The alternating factorial sum cancels catastrophically in floating point
//! already at moderate angular momenta, so the sum and the squared prefactor
//! are kept as exact `BigRational`s; only the final square root is floating.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use num_complex::Complex64 as C64;

use crate::tensor::StateTensor;
use crate::{Error, Result};

/// Half-integer stored as twice its value, so `HalfInt::new_twice(3)` is 3/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct HalfInt(i64);

impl HalfInt {
    pub fn new_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub fn from_int(v: i64) -> Self {
        HalfInt(2 * v)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl std::fmt::Display for HalfInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

fn factorial(n: i64) -> BigInt {
    debug_assert!(n >= 0);
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

/// Wigner 3j symbol. Zero when a selection rule fails (m-sum, triangle,
/// |m| > j, or half-integer parity of the triple); a domain error when an
/// argument is malformed (negative j, or j and m of different integrality).
pub fn wigner_3j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> Result<f64> {
    for (j, m) in [(j1, m1), (j2, m2), (j3, m3)] {
        if j.twice() < 0 {
            return Err(Error::BadHalfInteger(format!("negative j = {j}")));
        }
        if (j.twice() + m.twice()) % 2 != 0 {
            return Err(Error::BadHalfInteger(format!(
                "j = {j} and m = {m} differ in integrality"
            )));
        }
    }
    if m1.twice() + m2.twice() + m3.twice() != 0 {
        return Ok(0.0);
    }
    if m1.twice().abs() > j1.twice()
        || m2.twice().abs() > j2.twice()
        || m3.twice().abs() > j3.twice()
    {
        return Ok(0.0);
    }
    // triangle conditions with integer perimeter
    let (tj1, tj2, tj3) = (j1.twice(), j2.twice(), j3.twice());
    if (tj1 + tj2 + tj3) % 2 != 0 {
        return Ok(0.0);
    }
    if tj3 > tj1 + tj2 || tj3 < (tj1 - tj2).abs() {
        return Ok(0.0);
    }

    // every combination below is a genuine integer (in units of twice-values)
    let int = |twice: i64| -> i64 {
        debug_assert!(twice % 2 == 0);
        twice / 2
    };
    let a1 = int(tj1 + tj2 - tj3);
    let a2 = int(tj1 - tj2 + tj3);
    let a3 = int(-tj1 + tj2 + tj3);
    let jpm = [
        int(j1.twice() + m1.twice()),
        int(j1.twice() - m1.twice()),
        int(j2.twice() + m2.twice()),
        int(j2.twice() - m2.twice()),
        int(j3.twice() + m3.twice()),
        int(j3.twice() - m3.twice()),
    ];

    // squared prefactor: triangle coefficient times the (j +- m)! products
    let mut pref2 = BigRational::new(
        factorial(a1) * factorial(a2) * factorial(a3),
        factorial(int(tj1 + tj2 + tj3) + 1),
    );
    for f in jpm {
        pref2 *= BigRational::from_integer(factorial(f));
    }

    // alternating sum over t with all six factorial arguments nonnegative
    let b1 = a1; // j1 + j2 - j3
    let b2 = int(tj1 - m1.twice()); // j1 - m1
    let b3 = int(tj2 + m2.twice()); // j2 + m2
    let c1 = int(tj3 - tj2 + m1.twice()); // j3 - j2 + m1 (+ t >= 0)
    let c2 = int(tj3 - tj1 - m2.twice()); // j3 - j1 - m2 (+ t >= 0)
    let t_lo = 0.max(-c1).max(-c2);
    let t_hi = b1.min(b2).min(b3);
    let mut sum = BigRational::zero();
    for t in t_lo..=t_hi {
        let denom = factorial(t)
            * factorial(b1 - t)
            * factorial(b2 - t)
            * factorial(b3 - t)
            * factorial(c1 + t)
            * factorial(c2 + t);
        let term = BigRational::new(BigInt::one(), denom);
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return Ok(0.0);
    }

    // overall phase (-1)^(j1 - j2 - m3): the exponent is an integer here
    let phase_negative = int(tj1 - tj2 - m3.twice()).rem_euclid(2) == 1;
    let square = &sum * &sum * pref2;
    let value = square.to_f64().unwrap_or(f64::NAN).sqrt();
    let negative = sum.is_negative() != phase_negative;
    Ok(if negative { -value } else { value })
}

/// LME state on `(A, B, C)` whose coefficients are the 3j symbols at
/// `j = (d-1)/2`, basis index `i` carrying `m = i - j`. Requires the
/// dimension triangle condition and an odd dimension sum.
pub fn wigner3j_state(a: usize, b: usize, c: usize) -> Result<StateTensor> {
    if a == 0 || b == 0 || c == 0 {
        return Err(Error::ZeroPart);
    }
    if (a + b + c) % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "dimension sum {} must be odd",
            a + b + c
        )));
    }
    let (tj1, tj2, tj3) = ((a - 1) as i64, (b - 1) as i64, (c - 1) as i64);
    if tj3 > tj1 + tj2 || tj3 < (tj1 - tj2).abs() {
        return Err(Error::InvalidParameter(format!(
            "dimensions ({a},{b},{c}) violate the triangle condition"
        )));
    }
    let j = [
        HalfInt::new_twice(tj1),
        HalfInt::new_twice(tj2),
        HalfInt::new_twice(tj3),
    ];
    let s = StateTensor::from_fn(vec![a, b, c], |idx| {
        let m: Vec<HalfInt> = idx
            .iter()
            .zip(&j)
            .map(|(&i, &jj)| HalfInt::new_twice(2 * i as i64 - jj.twice()))
            .collect();
        let v = wigner_3j(j[0], j[1], j[2], m[0], m[1], m[2]).expect("validated arguments");
        C64::new(v, 0.0)
    })?;
    s.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::is_lme;
    use approx::assert_abs_diff_eq;

    fn h(twice: i64) -> HalfInt {
        HalfInt::new_twice(twice)
    }

    #[test]
    fn special_values() {
        // (1/2 1/2 0; 1/2 -1/2 0) = 1/sqrt(2)
        let v = wigner_3j(h(1), h(1), h(0), h(1), h(-1), h(0)).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 2f64.sqrt(), epsilon = 1e-15);

        // m-sum selection rule
        let v = wigner_3j(h(2), h(2), h(2), h(2), h(2), h(2)).unwrap();
        assert_eq!(v, 0.0);

        // odd permutation parity zero: (1 1 1; 0 0 0) = 0
        let v = wigner_3j(h(2), h(2), h(2), h(0), h(0), h(0)).unwrap();
        assert_eq!(v, 0.0);

        // (j j 0; m -m 0) = (-1)^(j-m)/sqrt(2j+1)
        for (tj, tm) in [(4i64, 2i64), (3, 1), (5, -3)] {
            let v = wigner_3j(h(tj), h(tj), h(0), h(tm), h(-tm), h(0)).unwrap();
            let sign = if ((tj - tm) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let want = sign / ((tj + 1) as f64).sqrt();
            assert_abs_diff_eq!(v, want, epsilon = 1e-15);
        }

        // (1 1 1; 1 -1 0) = 1/sqrt(6)
        let v = wigner_3j(h(2), h(2), h(2), h(2), h(-2), h(0)).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 6f64.sqrt(), epsilon = 1e-15);

        // (2 2 2; 1 -1 0): sum has genuine cancellation (1/2 - 1/4); the
        // exact route gives 1/sqrt(70)
        let v = wigner_3j(h(4), h(4), h(4), h(2), h(-2), h(0)).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 70f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn malformed_arguments() {
        assert!(wigner_3j(h(-2), h(0), h(2), h(0), h(0), h(0)).is_err());
        // j integer with m half-integer
        assert!(wigner_3j(h(2), h(2), h(2), h(1), h(-1), h(0)).is_err());
        // |m| > j is a selection-rule zero
        assert_eq!(
            wigner_3j(h(2), h(2), h(2), h(4), h(-4), h(0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn orthogonality() {
        // sum_{m1 m2} (2 j3 + 1) 3j(...; m1 m2 m3)^2 = 1 for each valid m3
        for (tj1, tj2, tj3) in [(2i64, 2i64, 2i64), (3, 2, 3), (4, 3, 5), (3, 3, 4)] {
            for tm3 in (-tj3..=tj3).step_by(2) {
                let mut acc = 0.0;
                for tm1 in (-tj1..=tj1).step_by(2) {
                    for tm2 in (-tj2..=tj2).step_by(2) {
                        let v = wigner_3j(h(tj1), h(tj2), h(tj3), h(tm1), h(tm2), h(tm3))
                            .unwrap();
                        acc += (tj3 + 1) as f64 * v * v;
                    }
                }
                assert_abs_diff_eq!(acc, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn states_are_lme() {
        for (a, b, c) in [(2, 2, 3), (3, 3, 3), (2, 3, 4), (4, 5, 6), (3, 4, 4)] {
            let s = wigner3j_state(a, b, c).unwrap();
            let (ok, dev) = is_lme(&s, 1e-12).unwrap();
            assert!(ok, "({a},{b},{c}) dev = {dev}");
        }
    }

    #[test]
    fn state_preconditions() {
        // even dimension sum
        assert!(wigner3j_state(2, 2, 2).is_err());
        // triangle violation: j = (0, 1/2, 3/2)
        assert!(wigner3j_state(1, 2, 4).is_err());
    }
}
