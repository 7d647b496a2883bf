//! Closed forms for stationary correlations in the distinct-species TASEP
//! on a ring of `n` sites.
//!
//! Conventions: `E(w_1, ..., w_r)` is the stationary probability of seeing
//! the listed species on the first `r` ring positions. Three-point
//! arrangements are named by the relative order pattern of the three sites;
//! with values `i < j < k`, pattern 312 for instance puts `k, i, j` on
//! sites 1, 2, 3.

use std::fmt;
use std::str::FromStr;

use crate::combinatorics::{binom, factorial, int_over, rat, ratio, BigInt, Rational};
use crate::ssyt::count_second_column_value;

use super::CorrError;

/// Whether a closed form is proved or merely conjectured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Status {
    Proved,
    Conjectural,
}

/// A formula value carrying its provenance status, so conjectural values can
/// never silently pass for proved ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaValue {
    pub value: Rational,
    pub status: Status,
}

fn check_n(n: i64) -> Result<(), CorrError> {
    if n < 2 {
        return Err(CorrError::BadParameters(format!("need n >= 2, got {n}")));
    }
    Ok(())
}

/// Two adjacent sites: exact `P(w_1 = a, w_2 = b)` for distinct labels.
///
/// For a descent `a > b` the value is `(a-b) / (n*C(n,2))`. For an ascent it
/// is `1/n^2`, plus `a(n-a)/(n^2(n-1))` exactly when `b = a+1`.
pub fn two_point_adjacent(n: i64, a: i64, b: i64) -> Result<Rational, CorrError> {
    check_n(n)?;
    if a == b || !(1..=n).contains(&a) || !(1..=n).contains(&b) {
        return Err(CorrError::BadLabels(format!("(a,b)=({a},{b}) for n={n}")));
    }
    if a > b {
        return Ok(rat(a - b, n * n * (n - 1) / 2));
    }
    let mut value = rat(1, n * n);
    if b == a + 1 {
        value += rat(a * (n - a), n * n * (n - 1));
    }
    Ok(value)
}

/// Descent pair at distance: exact `P(w_1 = j, w_a = i)` for `j > i` and
/// `2 <= a <= n`, via the four-term quotient of second-column tableau
/// counts. The particle-hole rewrite is evaluated as well and must agree.
pub fn two_point_distance(n: i64, j: i64, i: i64, a: i64) -> Result<Rational, CorrError> {
    check_n(n)?;
    if !(1 <= i && i < j && j <= n) {
        return Err(CorrError::BadLabels(format!(
            "need 1 <= i < j <= n, got i={i}, j={j}"
        )));
    }
    if !(2..=n).contains(&a) {
        return Err(CorrError::BadParameters(format!(
            "need 2 <= a <= n, got a={a}"
        )));
    }
    let direct = distance_quotient(n, j, i, a);
    // Particle-hole symmetry turns (j, i) into (n+1-i, n+1-j), again a
    // descent pair; both evaluations of the same probability must agree.
    let mirrored = distance_quotient(n, n + 1 - i, n + 1 - j, a);
    assert_eq!(direct, mirrored, "the two tableau routes must agree");
    Ok(direct)
}

fn distance_quotient(n: i64, j: i64, i: i64, a: i64) -> Rational {
    let y = |r: i64, l: i64| count_second_column_value(r, l, a - 1, n - 1);
    let term = |num: BigInt, c1: i64, c2: i64| int_over(&num, &(binom(n, c1) * binom(n, c2)));
    term(y(n - i, n - j + 1), i - 1, j - 1)
        - term(y(n - i, n - j), i - 1, j)
        - term(y(n - i - 1, n - j + 1), i, j - 1)
        + term(y(n - i - 1, n - j), i, j)
}

/// Exact `P(w_1 = u, w_a = v)` for any distinct labels, rotating ascents
/// into the descent form: `P(w_1=u, w_a=v) = P(w_1=v, w_{n-a+2}=u)`.
pub fn two_point_any(n: i64, u: i64, v: i64, a: i64) -> Result<Rational, CorrError> {
    if u > v {
        two_point_distance(n, u, v, a)
    } else {
        two_point_distance(n, v, u, n - a + 2)
    }
}

/// Top-species closed form: exact `P(w_1 = n, w_a = i)`.
pub fn top_species_distance(n: i64, i: i64, a: i64) -> Result<Rational, CorrError> {
    check_n(n)?;
    if !(1..=n - 1).contains(&i) || !(2..=n).contains(&a) {
        return Err(CorrError::BadParameters(format!(
            "(i,a)=({i},{a}) for n={n}"
        )));
    }
    let correction = ratio(
        BigInt::from(n - i) * binom(i - 1, a - 2) - binom(i - 1, a - 1),
        BigInt::from(a * n) * binom(n, a),
    );
    Ok(rat(1, n * n) + correction)
}

/// Relative-order pattern of three adjacent sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum TriplePattern {
    P321,
    P213,
    P132,
    P312,
    P231,
    P123,
}

impl TriplePattern {
    pub const ALL: [TriplePattern; 6] = [
        TriplePattern::P321,
        TriplePattern::P213,
        TriplePattern::P132,
        TriplePattern::P312,
        TriplePattern::P231,
        TriplePattern::P123,
    ];

    /// Site labels `(w_1, w_2, w_3)` when the ordered values are `i < j < k`.
    pub fn arrange(self, i: i64, j: i64, k: i64) -> (i64, i64, i64) {
        match self {
            TriplePattern::P321 => (k, j, i),
            TriplePattern::P213 => (j, i, k),
            TriplePattern::P132 => (i, k, j),
            TriplePattern::P312 => (k, i, j),
            TriplePattern::P231 => (j, k, i),
            TriplePattern::P123 => (i, j, k),
        }
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TriplePattern::P321 => "321",
            TriplePattern::P213 => "213",
            TriplePattern::P132 => "132",
            TriplePattern::P312 => "312",
            TriplePattern::P231 => "231",
            TriplePattern::P123 => "123",
        };
        f.write_str(s)
    }
}

impl FromStr for TriplePattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "321" => Ok(TriplePattern::P321),
            "213" => Ok(TriplePattern::P213),
            "132" => Ok(TriplePattern::P132),
            "312" => Ok(TriplePattern::P312),
            "231" => Ok(TriplePattern::P231),
            "123" => Ok(TriplePattern::P123),
            other => Err(format!("unknown pattern {other}")),
        }
    }
}

/// Three adjacent sites: exact `P` of seeing values `i < j < k` arranged by
/// `pattern` on sites 1, 2, 3. The increasing arrangement 123 is returned as
/// [`Status::Conjectural`]; everything else is proved.
pub fn three_point_adjacent(
    n: i64,
    pattern: TriplePattern,
    i: i64,
    j: i64,
    k: i64,
) -> Result<FormulaValue, CorrError> {
    check_n(n)?;
    if !(1 <= i && i < j && j < k && k <= n) {
        return Err(CorrError::BadLabels(format!(
            "need 1 <= i < j < k <= n, got ({i},{j},{k})"
        )));
    }
    let (value, status) = match pattern {
        TriplePattern::P321 => (decreasing_triple(n, i, j, k), Status::Proved),
        TriplePattern::P213 => (mid_low_high(n, i, j, k), Status::Proved),
        TriplePattern::P132 => (
            mid_low_high(n, n + 1 - k, n + 1 - j, n + 1 - i),
            Status::Proved,
        ),
        TriplePattern::P231 => (mid_high_low(n, i, j, k), Status::Proved),
        TriplePattern::P312 => (
            mid_high_low(n, n + 1 - k, n + 1 - j, n + 1 - i),
            Status::Proved,
        ),
        TriplePattern::P123 => (increasing_triple(n, i, j, k), Status::Conjectural),
    };
    Ok(FormulaValue { value, status })
}

/// Arrangement `(k, j, i)`.
fn decreasing_triple(n: i64, i: i64, j: i64, k: i64) -> Rational {
    ratio(
        BigInt::from(6 * (j - i) * (k - i) * (k - j)),
        BigInt::from(n) * n * n * (n - 1) * (n - 1) * (n - 2),
    )
}

/// Arrangement `(j, i, k)`.
fn mid_low_high(n: i64, i: i64, j: i64, k: i64) -> Rational {
    if k > j + 1 {
        ratio(BigInt::from(2 * (j - i)), BigInt::from(n) * n * n * (n - 1))
    } else {
        let adjacent = rat(1, n * n) + rat(j * (n - j), n * n * (n - 1));
        rat(2 * (j - i), n * (n - 1)) * adjacent
            + ratio(
                BigInt::from(2 * j * (j - 1) * (n - j)),
                BigInt::from(n) * n * n * (n - 1) * (n - 1) * (n - 2),
            )
    }
}

/// Arrangement `(j, k, i)`.
fn mid_high_low(n: i64, i: i64, j: i64, k: i64) -> Rational {
    if k > j + 1 {
        ratio(
            BigInt::from(3 * (j - i) * (2 * n - j - i - 1)),
            BigInt::from(n) * n * n * (n - 1) * (n - 2),
        ) - ratio(
            BigInt::from(4 * (j - i) * (n - k)),
            BigInt::from(n) * n * n * (n - 1) * (n - 1),
        )
    } else {
        let front = ratio(
            BigInt::from((j - i) * (n - 1 - j)),
            BigInt::from(n) * n * (n - 1) * (n - 1),
        );
        let inner = rat(1, n - 2) + rat(3 * (n - i - 1), n)
            - rat((n - 1 - j) * (3 * n - 3 * i + j - 1), n * (n - 2));
        let tail = ratio(
            BigInt::from(6 * (j - i) * (n - i)),
            BigInt::from(n) * n * n * (n - 1) * (n - 2),
        );
        front * inner + tail
    }
}

/// Arrangement `(i, j, k)` — conjectural.
fn increasing_triple(n: i64, i: i64, j: i64, k: i64) -> Rational {
    let tight_low = j == i + 1;
    let tight_high = k == j + 1;
    match (tight_low, tight_high) {
        (false, false) => rat(1, n * n * n),
        (true, false) => ratio(
            BigInt::from(n - 1 + i * (n - i)),
            BigInt::from(n) * n * n * (n - 1),
        ),
        (false, true) => ratio(
            BigInt::from(n - 1 + j * (n - j)),
            BigInt::from(n) * n * n * (n - 1),
        ),
        (true, true) => {
            let a = BigInt::from(n - 1 + i * (n - i));
            let b = BigInt::from(n - 1 + (i + 1) * (n - i - 1));
            ratio(a * b, BigInt::from(n) * n * n * (n - 1) * (n - 1))
                + ratio(
                    BigInt::from(2 * i * (i + 1) * (n - i) * (n - i - 1)),
                    BigInt::from(n) * n * n * (n - 1) * (n - 1) * (n - 2),
                )
        }
    }
}

/// Strictly decreasing run on the first `r` sites: exact
/// `P(w_1 = l_1 > ... > w_r = l_r)` as the Vandermonde product
/// `r! * prod_{a<b}(l_a - l_b) / prod_{t=0}^{r-1} (n-t)^{r-t}`.
pub fn decreasing_run(n: i64, labels: &[i64]) -> Result<Rational, CorrError> {
    check_n(n)?;
    let r = labels.len() as i64;
    if r == 0 || r > n {
        return Err(CorrError::BadParameters(format!(
            "run length {r} for n={n}"
        )));
    }
    if labels.windows(2).any(|w| w[0] <= w[1]) || labels.iter().any(|&l| !(1..=n).contains(&l)) {
        return Err(CorrError::BadLabels(format!(
            "{labels:?} must strictly decrease within 1..={n}"
        )));
    }
    let mut num = factorial(r);
    for a in 0..labels.len() {
        for b in a + 1..labels.len() {
            num *= BigInt::from(labels[a] - labels[b]);
        }
    }
    let mut den = BigInt::from(1);
    for t in 0..r {
        for _ in 0..(r - t) {
            den *= BigInt::from(n - t);
        }
    }
    Ok(ratio(num, den))
}

/// Exact aggregate two-point probabilities
/// `(P[w1 > w2], P[w1 = w2 - 1], P[w1 < w2 - 1])`; the three sum to one.
pub fn aggregate_two_point(n: i64) -> Result<[Rational; 3], CorrError> {
    check_n(n)?;
    Ok([
        rat(1, 3) + rat(1, 3 * n),
        rat(1, 6) + rat(7 * n - 6, 6 * n * n),
        rat(1, 2) - rat(3 * n - 2, 2 * n * n),
    ])
}

/// One aggregate three-point class: the total stationary probability of an
/// arrangement shape summed over its value ranges.
#[derive(Debug, Clone)]
pub struct TripleAggregate {
    /// Shape of the three sites, e.g. `(k,j,i)` or `(i,k,i+1)`.
    pub arrangement: &'static str,
    pub pattern: TriplePattern,
    /// Which value ranges the class sums over.
    pub class: TripleClass,
    pub value: Rational,
    pub status: Status,
}

/// Value ranges of an aggregate class, with `i < j < k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum TripleClass {
    /// All `i < j < k`.
    All,
    /// Middle gap open: `j - i >= 2`.
    LowGap,
    /// Middle gap tight: `j = i + 1`.
    LowTight,
    /// Upper gap open: `k - j >= 2`.
    HighGap,
    /// Upper gap tight: `k = j + 1`.
    HighTight,
    /// Both gaps open.
    BothGaps,
    /// `j = i + 1`, upper gap open.
    LowTightHighGap,
    /// `k = j + 1`, lower gap open.
    LowGapHighTight,
    /// `j = i + 1` and `k = j + 1`.
    BothTight,
}

impl TripleClass {
    pub fn admits(self, i: i64, j: i64, k: i64) -> bool {
        let low_tight = j == i + 1;
        let high_tight = k == j + 1;
        match self {
            TripleClass::All => true,
            TripleClass::LowGap => !low_tight,
            TripleClass::LowTight => low_tight,
            TripleClass::HighGap => !high_tight,
            TripleClass::HighTight => high_tight,
            TripleClass::BothGaps => !low_tight && !high_tight,
            TripleClass::LowTightHighGap => low_tight && !high_tight,
            TripleClass::LowGapHighTight => !low_tight && high_tight,
            TripleClass::BothTight => low_tight && high_tight,
        }
    }
}

/// The thirteen aggregate three-point classes with their closed forms.
/// Requires `n >= 5` so every class is populated.
pub fn aggregate_three_point(n: i64) -> Result<Vec<TripleAggregate>, CorrError> {
    if n < 5 {
        return Err(CorrError::BadParameters(format!("need n >= 5, got {n}")));
    }
    let decreasing = ratio(
        BigInt::from((n + 1) * (n + 2)),
        BigInt::from(30 * n * (n - 1)),
    );
    let spread_mid = rat((n - 2) * (n - 3), 12 * n * n);
    let tight_mid = ratio(
        BigInt::from(n * n * n + 8 * n * n - 23 * n + 10),
        BigInt::from(20 * n * n * (n - 1)),
    );
    let spread_high = ratio(
        BigInt::from((n + 1) * (n - 3) * (7 * n - 10)),
        BigInt::from(60 * n * n * (n - 1)),
    );
    let tight_high = ratio(
        BigInt::from((n + 1) * (n * n + 7 * n - 10)),
        BigInt::from(20 * n * n * (n - 1)),
    );
    let increasing_spread = ratio(
        BigInt::from((n - 2) * (n - 3) * (n - 4)),
        BigInt::from(6 * n * n * n),
    );
    let increasing_mixed = ratio(
        BigInt::from((n - 2) * (n - 3) * (n + 8)),
        BigInt::from(12 * n * n * n),
    );
    let increasing_tight = ratio(
        BigInt::from(n * n * n * n + 13 * n * n * n + 32 * n * n - 160 * n + 120),
        BigInt::from(30 * n * n * n * (n - 1)),
    );

    use Status::{Conjectural, Proved};
    use TriplePattern as P;
    let row = |arrangement, pattern, class, value: &Rational, status| TripleAggregate {
        arrangement,
        pattern,
        class,
        value: value.clone(),
        status,
    };
    Ok(vec![
        row("(k,j,i)", P::P321, TripleClass::All, &decreasing, Proved),
        row("(i,k,j)", P::P132, TripleClass::LowGap, &spread_mid, Proved),
        row(
            "(j,i,k)",
            P::P213,
            TripleClass::HighGap,
            &spread_mid,
            Proved,
        ),
        row(
            "(i,k,i+1)",
            P::P132,
            TripleClass::LowTight,
            &tight_mid,
            Proved,
        ),
        row(
            "(j,i,j+1)",
            P::P213,
            TripleClass::HighTight,
            &tight_mid,
            Proved,
        ),
        row(
            "(k,i,j)",
            P::P312,
            TripleClass::LowGap,
            &spread_high,
            Proved,
        ),
        row(
            "(j,k,i)",
            P::P231,
            TripleClass::HighGap,
            &spread_high,
            Proved,
        ),
        row(
            "(k,i,i+1)",
            P::P312,
            TripleClass::LowTight,
            &tight_high,
            Proved,
        ),
        row(
            "(j,j+1,i)",
            P::P231,
            TripleClass::HighTight,
            &tight_high,
            Proved,
        ),
        row(
            "(i,j,k)",
            P::P123,
            TripleClass::BothGaps,
            &increasing_spread,
            Conjectural,
        ),
        row(
            "(i,i+1,k)",
            P::P123,
            TripleClass::LowTightHighGap,
            &increasing_mixed,
            Conjectural,
        ),
        row(
            "(i,j,j+1)",
            P::P123,
            TripleClass::LowGapHighTight,
            &increasing_mixed,
            Conjectural,
        ),
        row(
            "(i,i+1,i+2)",
            P::P123,
            TripleClass::BothTight,
            &increasing_tight,
            Conjectural,
        ),
    ])
}
