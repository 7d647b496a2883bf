//! Exact arithmetic substrate: arbitrary-precision integers and rationals,
//! binomial coefficients and Narayana numbers.
//!
//! Counting identities here are summed over ranges whose out-of-range terms
//! must vanish, so [`binom`] is total: any argument outside `0 <= k <= n`
//! (including negative `n`) yields zero.

use num_traits::{Signed, Zero};

pub use num_bigint::BigInt;
pub use num_rational::BigRational as Rational;

/// Binomial coefficient `C(n, k)` as an exact integer.
///
/// Returns zero when `k < 0`, `k > n` or `n < 0`.
pub fn binom(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

/// Narayana number `N(e, f) = C(e, f+1) * C(e, f) / e` for `e >= 1`.
///
/// The division is always exact; zero arguments of the binomials give zero.
///
/// # Panics
///
/// Panics when `e <= 0`.
pub fn narayana(e: i64, f: i64) -> BigInt {
    assert!(e >= 1, "narayana requires e >= 1, got e = {e}");
    let prod = binom(e, f + 1) * binom(e, f);
    let (q, r) = num_integer::div_rem(prod, BigInt::from(e));
    assert!(r.is_zero(), "narayana division must be exact");
    q
}

/// `n!` as an exact integer. Negative input yields zero.
pub fn factorial(n: i64) -> BigInt {
    if n < 0 {
        return BigInt::zero();
    }
    (1..=n).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i))
}

/// Rational from an integer pair; `den` must be nonzero.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from a big-integer pair; `den` must be nonzero.
pub fn ratio(num: BigInt, den: BigInt) -> Rational {
    Rational::new(num, den)
}

/// Exact quotient `num / den` of two integers as a rational.
pub fn int_over(num: &BigInt, den: &BigInt) -> Rational {
    Rational::new(num.clone(), den.clone())
}

/// Renders a rational as `numerator/denominator` with no rounding.
pub fn rational_string(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// True exactly when `x > 0`.
pub fn is_positive(x: &Rational) -> bool {
    x.numer().is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use proptest::prelude::*;

    #[test]
    fn binom_standard_value() {
        assert_eq!(binom(5, 2), BigInt::from(10));
    }

    #[test]
    fn binom_negative_k_is_zero() {
        for n in -3..10 {
            assert!(binom(n, -1).is_zero());
        }
    }

    #[test]
    fn binom_k_above_n_is_zero() {
        assert!(binom(3, 5).is_zero());
        assert!(binom(-2, 1).is_zero());
        assert!(binom(-1, -1).is_zero());
    }

    #[test]
    fn narayana_small_values() {
        assert_eq!(narayana(1, 0), BigInt::one());
        assert_eq!(narayana(4, 0), BigInt::one());
    }

    /// Brute-force count of Dyck paths of semilength `e` with exactly
    /// `f + 1` peaks (an `UD` factor), the classical Narayana refinement.
    fn dyck_paths_with_peaks(e: usize, peaks: usize) -> u64 {
        fn go(steps: Vec<i8>, e: usize, peaks: usize) -> u64 {
            if steps.len() == 2 * e {
                let mut count = 0;
                for w in steps.windows(2) {
                    if w == [1, -1] {
                        count += 1;
                    }
                }
                return u64::from(count == peaks as u32);
            }
            let height: i32 = steps.iter().map(|&s| i32::from(s)).sum();
            let remaining = 2 * e - steps.len();
            let mut total = 0;
            if (height as usize) < remaining {
                let mut up = steps.clone();
                up.push(1);
                total += go(up, e, peaks);
            }
            if height > 0 {
                let mut down = steps;
                down.push(-1);
                total += go(down, e, peaks);
            }
            total
        }
        go(Vec::new(), e, peaks)
    }

    #[test]
    fn narayana_counts_dyck_paths_by_peaks() {
        // N(e, f) = #{Dyck paths of semilength e with f+1 peaks}.
        assert_eq!(dyck_paths_with_peaks(3, 2), 3);
        assert_eq!(narayana(3, 1), BigInt::from(3));
        for e in 1..=5i64 {
            for f in 0..e {
                assert_eq!(
                    narayana(e, f),
                    BigInt::from(dyck_paths_with_peaks(e as usize, f as usize + 1)),
                    "narayana({e},{f})"
                );
            }
        }
    }

    #[test]
    fn narayana_row_sums_are_catalan() {
        for e in 1..=12i64 {
            let sum: BigInt = (0..e).map(|f| narayana(e, f)).sum();
            let catalan = {
                let (q, r) = num_integer::div_rem(binom(2 * e, e), BigInt::from(e + 1));
                assert!(r.is_zero());
                q
            };
            assert_eq!(sum, catalan, "e = {e}");
        }
    }

    #[test]
    #[should_panic(expected = "narayana requires e >= 1")]
    fn narayana_rejects_nonpositive_e() {
        let _ = narayana(0, 0);
    }

    #[test]
    fn factorial_values() {
        assert_eq!(factorial(0), BigInt::one());
        assert_eq!(factorial(5), BigInt::from(120));
        assert!(factorial(-1).is_zero());
    }

    proptest! {
        #[test]
        fn binom_pascal_recurrence(n in 1i64..40, k in 0i64..40) {
            prop_assume!(k <= n);
            prop_assert_eq!(binom(n, k), binom(n - 1, k - 1) + binom(n - 1, k));
        }

        #[test]
        fn rational_construction_normalizes(p in -200i64..200, q in 1i64..200, s in 1i64..20) {
            let a = rat(p, q);
            let b = rat(p * s, q * s);
            prop_assert_eq!(&a, &b);
            prop_assert!(a.denom().is_positive());
        }

        #[test]
        fn rational_field_laws(a in -50i64..50, b in 1i64..50, c in -50i64..50, d in 1i64..50) {
            let x = rat(a, b);
            let y = rat(c, d);
            prop_assert_eq!(&x + &y, &y + &x);
            prop_assert_eq!(&x * &y, &y * &x);
        }
    }
}
