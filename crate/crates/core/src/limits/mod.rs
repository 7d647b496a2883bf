//! Limit objects of the ring TASEP: the limiting walk direction computed two
//! ways, the n-core growth process, and the limit-shape distance.

mod curve;
mod ncore;

pub use curve::*;
pub use ncore::*;

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::combinatorics::{binom, is_positive, rat, Rational};
use crate::correlations::{two_point_adjacent, CorrError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LimitsError {
    #[error("direction vectors need n >= 2")]
    BadN,
    #[error(transparent)]
    Formula(#[from] CorrError),
}

/// A direction in the root lattice: exact unnormalized components summing to
/// zero, plus a float unit-normalized copy.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionVector {
    pub components: Vec<Rational>,
    pub unit: Vec<f64>,
}

impl DirectionVector {
    fn from_components(components: Vec<Rational>) -> Self {
        let floats: Vec<f64> = components
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect();
        let norm = floats.iter().map(|f| f * f).sum::<f64>().sqrt();
        DirectionVector {
            unit: floats.iter().map(|f| f / norm).collect(),
            components,
        }
    }

    pub fn component_sum(&self) -> Rational {
        self.components.iter().sum()
    }
}

/// Closed-form limiting direction: components proportional to `n+1-2k`,
/// unit-normalized by `sqrt(2*C(n+1,3))`.
pub fn direction_closed(n: usize) -> Result<DirectionVector, LimitsError> {
    if n < 2 {
        return Err(LimitsError::BadN);
    }
    let components: Vec<Rational> = (1..=n as i64)
        .map(|k| rat(n as i64 + 1 - 2 * k, 1))
        .collect();
    Ok(DirectionVector::from_components(components))
}

/// Direction assembled from adjacent descent correlations:
/// `sum_{j>i} P(w1=j, w2=i) (e_i - e_j)`, unnormalized.
pub fn direction_from_correlations(n: usize) -> Result<DirectionVector, LimitsError> {
    if n < 2 {
        return Err(LimitsError::BadN);
    }
    let ni = n as i64;
    let mut components = vec![Rational::zero(); n];
    for j in 2..=ni {
        for i in 1..j {
            let e = two_point_adjacent(ni, j, i)?;
            components[(i - 1) as usize] += &e;
            components[(j - 1) as usize] -= &e;
        }
    }
    Ok(DirectionVector::from_components(components))
}

/// True exactly when `b = c * a` componentwise for a single positive
/// rational `c`.
pub fn exactly_collinear_positive(a: &DirectionVector, b: &DirectionVector) -> bool {
    if a.components.len() != b.components.len() {
        return false;
    }
    let Some(k) = a.components.iter().position(|c| !c.is_zero()) else {
        return false;
    };
    if b.components[k].is_zero() {
        return false;
    }
    let ratio = &b.components[k] / &a.components[k];
    if !is_positive(&ratio) {
        return false;
    }
    a.components
        .iter()
        .zip(&b.components)
        .all(|(x, y)| y == &(x * &ratio))
}

/// Sanity: the closed-form unit normalizer squared is `2*C(n+1,3)` exactly.
pub fn unit_norm_squared(n: usize) -> Rational {
    Rational::from_integer(binom(n as i64 + 1, 3) * 2)
}
