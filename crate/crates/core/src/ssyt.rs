//! Counting of two- and three-column constrained semistandard Young
//! tableaux, plus a brute-force generator used as the counting oracle.
//!
//! A semistandard Young tableau (SSYT) has entries strictly increasing down
//! columns and weakly increasing along rows. All counting functions here are
//! total: parameters describing an impossible shape or constraint yield zero
//! rather than an error, because the correlation formulas sum them over
//! ranges whose out-of-range terms must vanish.

use crate::combinatorics::{binom, narayana, BigInt};
use num_integer::div_rem;
use num_traits::Zero;
use thiserror::Error;

/// A filled tableau in column-major storage. `columns[c][i]` is the entry in
/// column `c` (0-based), `i` rows below the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    pub columns: Vec<Vec<u32>>,
    pub max_entry: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShapeError {
    #[error("column lengths must be weakly decreasing, got {0:?}")]
    NotWeaklyDecreasing(Vec<u32>),
    #[error("entry bound must be at least 1")]
    ZeroBound,
}

fn exact_div(num: BigInt, den: BigInt) -> BigInt {
    let (q, r) = div_rem(num, den);
    assert!(r.is_zero(), "hook-content division must be exact");
    q
}

/// Number of SSYT on two columns of lengths `r >= l` with entries at most
/// `m`: `(r-l+1)/(r+1) * C(m,r) * C(m+1,l)`, and zero outside
/// `m >= r >= l >= 0`.
pub fn ssyt_two_columns(r: i64, l: i64, m: i64) -> BigInt {
    if !(m >= r && r >= l && l >= 0) {
        return BigInt::zero();
    }
    // Products first, exact division last: a nonzero remainder would mean a
    // transcription bug in the formula.
    let num = BigInt::from(r - l + 1) * binom(m, r) * binom(m + 1, l);
    exact_div(num, BigInt::from(r + 1))
}

/// Number of SSYT on three columns of lengths `a >= b >= c` with entries at
/// most `m`; zero outside `m >= a >= b >= c >= 0`. The empty shape counts 1.
pub fn ssyt_three_columns(a: i64, b: i64, c: i64, m: i64) -> BigInt {
    if !(m >= a && a >= b && b >= c && c >= 0) {
        return BigInt::zero();
    }
    let num = BigInt::from(a - b + 1)
        * BigInt::from(a - c + 2)
        * BigInt::from(b - c + 1)
        * binom(m, a)
        * binom(m + 1, b)
        * binom(m + 2, c);
    let den = BigInt::from(a + 1) * BigInt::from(a + 2) * BigInt::from(b + 1);
    exact_div(num, den)
}

/// Number of SSYT of shape two columns of equal length `r` whose last row is
/// exactly `(alpha, beta)`:
/// `C(beta,r-1)*C(alpha-1,r-1) - C(beta-1,r-2)*C(alpha,r)`.
pub fn count_fixed_last_row(r: i64, alpha: i64, beta: i64) -> BigInt {
    if r < 1 || alpha > beta || alpha < 1 {
        return BigInt::zero();
    }
    binom(beta, r - 1) * binom(alpha - 1, r - 1) - binom(beta - 1, r - 2) * binom(alpha, r)
}

/// Number of SSYT of shape `(r, l)` (column lengths), entries at most `m`,
/// whose first row is exactly `(alpha, beta)`.
///
/// Shifts to first-row `(1, beta-alpha+1)` form and evaluates the signed
/// double sum over smaller two-column counts.
pub fn count_fixed_first_row(r: i64, l: i64, alpha: i64, beta: i64, m: i64) -> BigInt {
    if !(1 <= alpha && alpha <= beta && beta <= m && 1 <= l && l <= r && r <= m) {
        return BigInt::zero();
    }
    // Z_{r,l}^{alpha,beta}(m) = Z_{r,l}^{1,beta-alpha+1}(m-alpha+1).
    let b = beta - alpha + 1;
    let mm = m - alpha + 1;
    let mut total = BigInt::zero();
    for i in 1..=b {
        for j in i..=b {
            let coeff = if i == 1 {
                // The closed form's i = 1 coefficient degenerates to the
                // single leading term (j = 1 only).
                if j == 1 {
                    BigInt::from(1)
                } else {
                    BigInt::zero()
                }
            } else {
                let mag = binom(j - 2, i - 2) * binom(b - j + i - 1, i - 1);
                if i % 2 == 1 {
                    mag
                } else {
                    -mag
                }
            };
            if !coeff.is_zero() {
                total += coeff * ssyt_two_columns(r - i, l - i, mm - j);
            }
        }
    }
    total
}

/// Number of SSYT on two columns `r >= l`, entries at most `m`, such that
/// the value `beta` appears somewhere in the second column.
///
/// Dispatches on `beta`: the top value `beta = m` has a two-product closed
/// form; `beta < m` is the Narayana-weighted sum over smaller two-column
/// counts.
pub fn count_second_column_value(r: i64, l: i64, beta: i64, m: i64) -> BigInt {
    if !(1 <= l && l <= r && r <= m && 1 <= beta && beta <= m) {
        return BigInt::zero();
    }
    if beta == m {
        return binom(m, l - 1) * binom(m, r) - binom(m - 1, l - 2) * binom(m + 1, r + 1);
    }
    let mut total = BigInt::zero();
    for e in 1..=beta {
        for f in 1..=e {
            let coeff = if e == 1 {
                BigInt::from(1)
            } else {
                narayana(e - 1, f - 1)
            };
            if !coeff.is_zero() {
                total += coeff * ssyt_two_columns(r - f, l - f, m - e);
            }
        }
    }
    total
}

/// Generates every SSYT with the given column lengths (weakly decreasing)
/// and entries in `1..=max_entry`, in column-major lexicographic order.
pub fn enumerate_tableaux(
    column_lengths: &[u32],
    max_entry: u32,
) -> Result<impl Iterator<Item = Tableau>, ShapeError> {
    if column_lengths.windows(2).any(|w| w[0] < w[1]) {
        return Err(ShapeError::NotWeaklyDecreasing(column_lengths.to_vec()));
    }
    if max_entry == 0 {
        return Err(ShapeError::ZeroBound);
    }
    let mut out = Vec::new();
    let shape: Vec<u32> = column_lengths.iter().copied().filter(|&c| c > 0).collect();
    let mut columns: Vec<Vec<u32>> = shape
        .iter()
        .map(|&c| Vec::with_capacity(c as usize))
        .collect();
    fill(&shape, max_entry, 0, 0, &mut columns, &mut out);
    Ok(out.into_iter())
}

fn fill(
    shape: &[u32],
    m: u32,
    col: usize,
    row: usize,
    columns: &mut Vec<Vec<u32>>,
    out: &mut Vec<Tableau>,
) {
    if col == shape.len() {
        out.push(Tableau {
            columns: columns.clone(),
            max_entry: m,
        });
        return;
    }
    if row == shape[col] as usize {
        fill(shape, m, col + 1, 0, columns, out);
        return;
    }
    // Strictly larger than the entry above, at least the entry to the left.
    let mut lo = 1;
    if row > 0 {
        lo = lo.max(columns[col][row - 1] + 1);
    }
    if col > 0 {
        lo = lo.max(columns[col - 1][row]);
    }
    for v in lo..=m {
        columns[col].push(v);
        fill(shape, m, col, row + 1, columns, out);
        columns[col].pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle_count(shape: &[u32], m: u32) -> BigInt {
        BigInt::from(enumerate_tableaux(shape, m).unwrap().count())
    }

    #[test]
    fn two_column_examples() {
        assert_eq!(ssyt_two_columns(1, 0, 4), BigInt::from(4));
        assert_eq!(ssyt_two_columns(2, 2, 3), BigInt::from(6));
        assert_eq!(oracle_count(&[2, 2], 3), BigInt::from(6));
        assert_eq!(ssyt_two_columns(2, 3, 5), BigInt::zero());
    }

    #[test]
    fn three_column_examples() {
        assert_eq!(ssyt_three_columns(0, 0, 0, 7), BigInt::from(1));
        assert_eq!(ssyt_three_columns(1, 1, 1, 3), BigInt::from(10));
        assert_eq!(oracle_count(&[1, 1, 1], 3), BigInt::from(10));
        assert_eq!(ssyt_three_columns(2, 1, 0, 2), oracle_count(&[2, 1], 2));
    }

    #[test]
    fn generator_minimal_shapes() {
        assert_eq!(oracle_count(&[1], 3), BigInt::from(3));
        let tabs: Vec<_> = enumerate_tableaux(&[2, 1], 2).unwrap().collect();
        assert_eq!(tabs.len(), 2);
        assert_eq!(tabs[0].columns, vec![vec![1, 2], vec![1]]);
        assert_eq!(tabs[1].columns, vec![vec![1, 2], vec![2]]);
    }

    #[test]
    fn generator_rejects_bad_shape() {
        assert!(enumerate_tableaux(&[1, 2], 3).is_err());
    }

    #[test]
    fn two_column_formula_matches_oracle_small() {
        for m in 0..=6i64 {
            for r in 0..=m {
                for l in 0..=r {
                    let shape = [r as u32, l as u32];
                    assert_eq!(
                        ssyt_two_columns(r, l, m),
                        oracle_count(&shape, m.max(1) as u32),
                        "(r,l,m)=({r},{l},{m})"
                    );
                }
            }
        }
    }

    #[test]
    fn three_column_formula_matches_oracle_small() {
        for m in 1..=5i64 {
            for a in 0..=m {
                for b in 0..=a {
                    for c in 0..=b {
                        let shape = [a as u32, b as u32, c as u32];
                        assert_eq!(
                            ssyt_three_columns(a, b, c, m),
                            oracle_count(&shape, m as u32),
                            "(a,b,c,m)=({a},{b},{c},{m})"
                        );
                    }
                }
            }
        }
    }

    fn oracle_fixed_last_row(r: i64, alpha: i64, beta: i64) -> BigInt {
        let shape = [r as u32, r as u32];
        let hits = enumerate_tableaux(&shape, beta.max(1) as u32)
            .unwrap()
            .filter(|t| {
                let last = r as usize - 1;
                i64::from(t.columns[0][last]) == alpha && i64::from(t.columns[1][last]) == beta
            })
            .count();
        BigInt::from(hits)
    }

    #[test]
    fn fixed_last_row_examples() {
        // A single row (alpha, beta) is one tableau for any alpha <= beta.
        for alpha in 1..=4 {
            for beta in alpha..=5 {
                assert_eq!(count_fixed_last_row(1, alpha, beta), BigInt::from(1));
            }
        }
        assert_eq!(count_fixed_last_row(2, 2, 2), BigInt::from(1));
        assert_eq!(count_fixed_last_row(2, 2, 3), BigInt::from(2));
    }

    #[test]
    fn fixed_last_row_matches_oracle() {
        for r in 1..=4i64 {
            for alpha in 1..=6 {
                for beta in alpha..=6 {
                    assert_eq!(
                        count_fixed_last_row(r, alpha, beta),
                        oracle_fixed_last_row(r, alpha, beta),
                        "(r,a,b)=({r},{alpha},{beta})"
                    );
                }
            }
        }
    }

    fn oracle_fixed_first_row(r: i64, l: i64, alpha: i64, beta: i64, m: i64) -> BigInt {
        let shape = [r as u32, l as u32];
        let hits = enumerate_tableaux(&shape, m as u32)
            .unwrap()
            .filter(|t| i64::from(t.columns[0][0]) == alpha && i64::from(t.columns[1][0]) == beta)
            .count();
        BigInt::from(hits)
    }

    #[test]
    fn fixed_first_row_examples() {
        // Single row (1, beta): exactly one tableau.
        for m in 1..=5 {
            for beta in 1..=m {
                assert_eq!(count_fixed_first_row(1, 1, 1, beta, m), BigInt::from(1));
            }
        }
        assert_eq!(count_fixed_first_row(2, 2, 1, 2, 3), BigInt::from(2));
        assert_eq!(
            count_fixed_first_row(2, 2, 1, 2, 3),
            oracle_fixed_first_row(2, 2, 1, 2, 3)
        );
    }

    #[test]
    fn fixed_first_row_tail_shape_is_binomial() {
        // Shape (r-l+1, 1) with first row (y, m) and bound m leaves a free
        // strictly increasing tail in column one: C(m-y, r-l).
        for m in 2..=7i64 {
            for rl in 0..=3 {
                for y in 1..=m {
                    assert_eq!(
                        count_fixed_first_row(rl + 1, 1, y, m, m),
                        binom(m - y, rl),
                        "(r-l,y,m)=({rl},{y},{m})"
                    );
                }
            }
        }
    }

    #[test]
    fn fixed_first_row_matches_oracle_small() {
        for m in 1..=5i64 {
            for r in 1..=m {
                for l in 1..=r {
                    for alpha in 1..=m {
                        for beta in alpha..=m {
                            assert_eq!(
                                count_fixed_first_row(r, l, alpha, beta, m),
                                oracle_fixed_first_row(r, l, alpha, beta, m),
                                "(r,l,a,b,m)=({r},{l},{alpha},{beta},{m})"
                            );
                        }
                    }
                }
            }
        }
    }

    fn oracle_second_column_value(r: i64, l: i64, beta: i64, m: i64) -> BigInt {
        let shape = [r as u32, l as u32];
        let hits = enumerate_tableaux(&shape, m as u32)
            .unwrap()
            .filter(|t| t.columns[1].iter().any(|&v| i64::from(v) == beta))
            .count();
        BigInt::from(hits)
    }

    #[test]
    fn second_column_value_examples() {
        assert_eq!(
            count_second_column_value(3, 2, 2, 4),
            oracle_second_column_value(3, 2, 2, 4)
        );
        // beta = 1 forces a (1,1) first row.
        for m in 2..=6 {
            for r in 1..=m {
                for l in 1..=r {
                    assert_eq!(
                        count_second_column_value(r, l, 1, m),
                        ssyt_two_columns(r - 1, l - 1, m - 1),
                        "(r,l,m)=({r},{l},{m})"
                    );
                }
            }
        }
    }

    #[test]
    fn second_column_value_matches_oracle_small() {
        for m in 1..=6i64 {
            for r in 1..=m {
                for l in 1..=r {
                    for beta in 1..=m {
                        assert_eq!(
                            count_second_column_value(r, l, beta, m),
                            oracle_second_column_value(r, l, beta, m),
                            "(r,l,beta,m)=({r},{l},{beta},{m})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn second_column_value_constant_window() {
        // For l+m-r <= beta <= m the count no longer depends on beta.
        for m in 1..=6i64 {
            for r in 1..=m {
                for l in 1..=r {
                    let top = count_second_column_value(r, l, m, m);
                    for beta in (l + m - r).max(1)..=m {
                        assert_eq!(
                            count_second_column_value(r, l, beta, m),
                            top,
                            "(r,l,beta,m)=({r},{l},{beta},{m})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn second_column_value_bounded_by_total() {
        for m in 1..=6i64 {
            for r in 1..=m {
                for l in 1..=r {
                    for beta in 1..=m {
                        assert!(
                            count_second_column_value(r, l, beta, m) <= ssyt_two_columns(r, l, m)
                        );
                    }
                }
            }
        }
    }
}
