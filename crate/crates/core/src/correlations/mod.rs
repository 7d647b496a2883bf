//! Closed-form correlation formulas for the stationary multispecies TASEP,
//! empirical marginalization, the projection principle, and the
//! verification/conjecture harness.
//!
//! Everything here compares exact rationals for equality; there are no
//! tolerances in this module.

mod formulas;
mod verify;

pub use formulas::*;
pub use verify::*;

use thiserror::Error;

use crate::combinatorics::Rational;
use crate::mlq::{ExactDist, MlqError, Sector, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorrError {
    #[error("query inconsistent with the distribution: {0}")]
    InconsistentQuery(String),
    #[error("labels must be distinct and within 1..=n: {0}")]
    BadLabels(String),
    #[error("parameters out of range: {0}")]
    BadParameters(String),
    #[error(transparent)]
    Enumeration(#[from] MlqError),
}

/// A conjunction of fixed species labels at fixed ring positions.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct PatternQuery {
    /// `(position, label)` pairs; positions 1-based and pairwise distinct.
    pub assignments: Vec<(u32, u8)>,
}

impl PatternQuery {
    pub fn new(assignments: Vec<(u32, u8)>) -> Self {
        PatternQuery { assignments }
    }

    /// The event `w_1 = a, w_2 = b, ...` on the first positions.
    pub fn prefix(labels: &[u8]) -> Self {
        PatternQuery {
            assignments: labels
                .iter()
                .enumerate()
                .map(|(i, &l)| (i as u32 + 1, l))
                .collect(),
        }
    }

    pub fn matches(&self, word: &Word) -> bool {
        self.matches_letters(word.letters())
    }

    /// Match against a raw letter slice (1-based positions).
    pub fn matches_letters(&self, letters: &[u8]) -> bool {
        self.assignments
            .iter()
            .all(|&(pos, label)| letters[pos as usize - 1] == label)
    }

    /// Checks positions and labels against a sector.
    pub fn validate_for(&self, sector: &Sector) -> Result<(), CorrError> {
        let ring = sector.ring_size();
        let species = sector.species() as u8;
        let mut seen = std::collections::HashSet::new();
        for &(pos, label) in &self.assignments {
            if pos == 0 || pos > ring {
                return Err(CorrError::InconsistentQuery(format!(
                    "position {pos} outside the ring of size {ring}"
                )));
            }
            if label == 0 || label > species {
                return Err(CorrError::InconsistentQuery(format!(
                    "species {label} absent from sector {sector}"
                )));
            }
            if !seen.insert(pos) {
                return Err(CorrError::InconsistentQuery(format!(
                    "position {pos} constrained twice"
                )));
            }
        }
        Ok(())
    }
}

/// Exact probability of the query event under the distribution.
pub fn marginal(dist: &ExactDist, query: &PatternQuery) -> Result<Rational, CorrError> {
    query.validate_for(dist.sector())?;
    Ok(dist.probability_where(|w| query.matches(w)))
}

/// Reduces `n` distinct species to the banded sector cut at the queried
/// labels: bands `1..=v_1 < v_1+1..=v_2 < ... < v_r+1..=n` (an empty final
/// band is dropped). Returns the sector together with the map from original
/// label to band species, under which each queried label keeps a species of
/// its own.
pub fn project_sector(n: usize, labels: &[u8]) -> Result<(Sector, Vec<u8>), CorrError> {
    if labels.is_empty()
        || labels.windows(2).any(|w| w[0] >= w[1])
        || labels[0] == 0
        || usize::from(labels[labels.len() - 1]) > n
    {
        return Err(CorrError::BadLabels(format!("{labels:?} for n={n}")));
    }
    let mut counts: Vec<u32> = Vec::with_capacity(labels.len() + 1);
    let mut prev = 0u8;
    for &v in labels {
        counts.push(u32::from(v - prev));
        prev = v;
    }
    if usize::from(prev) < n {
        counts.push(n as u32 - u32::from(prev));
    }
    let mut relabel = vec![0u8; n];
    let mut band = 1u8;
    let mut cut_idx = 0;
    for (i, slot) in relabel.iter_mut().enumerate() {
        *slot = band;
        if cut_idx < labels.len() && labels[cut_idx] == i as u8 + 1 {
            band += 1;
            cut_idx += 1;
        }
    }
    Ok((Sector::new(counts).expect("bands are nonempty"), relabel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::rat;
    use crate::mlq::{stationary_from_queues, DEFAULT_QUEUE_BUDGET};

    #[test]
    fn marginal_single_site_uniform() {
        let sector = Sector::distinct(4);
        let dist = stationary_from_queues(&sector, DEFAULT_QUEUE_BUDGET).unwrap();
        for i in 1..=4u8 {
            let q = PatternQuery::new(vec![(1, i)]);
            assert_eq!(marginal(&dist, &q).unwrap(), rat(1, 4));
        }
    }

    #[test]
    fn marginal_rejects_absent_species() {
        let sector = Sector::distinct(3);
        let dist = stationary_from_queues(&sector, DEFAULT_QUEUE_BUDGET).unwrap();
        let q = PatternQuery::new(vec![(1, 5)]);
        assert!(matches!(
            marginal(&dist, &q),
            Err(CorrError::InconsistentQuery(_))
        ));
        let dup = PatternQuery::new(vec![(1, 1), (1, 2)]);
        assert!(marginal(&dist, &dup).is_err());
    }

    #[test]
    fn marginal_rotation_invariance() {
        // Shifting every queried position by the same rotation leaves the
        // marginal unchanged.
        for counts in [vec![1, 1, 1, 1], vec![2, 1, 2]] {
            let sector = Sector::new(counts).unwrap();
            let ring = sector.ring_size();
            let dist = stationary_from_queues(&sector, DEFAULT_QUEUE_BUDGET).unwrap();
            let n = sector.species() as u8;
            for a in 1..=n {
                for b in 1..=n {
                    if a == b && sector.counts()[a as usize - 1] < 2 {
                        continue;
                    }
                    let base = marginal(&dist, &PatternQuery::new(vec![(1, a), (2, b)])).unwrap();
                    for shift in 1..ring {
                        let rot = |pos: u32| (pos - 1 + shift) % ring + 1;
                        let q = PatternQuery::new(vec![(rot(1), a), (rot(2), b)]);
                        assert_eq!(marginal(&dist, &q).unwrap(), base, "shift {shift}");
                    }
                }
            }
        }
    }

    #[test]
    fn projection_bands() {
        // Cutting at {i, j} gives the three-band family (i, j-i, n-j).
        let (sector, relabel) = project_sector(5, &[2, 4]).unwrap();
        assert_eq!(sector.counts(), &[2, 2, 1]);
        assert_eq!(relabel, vec![1, 1, 2, 2, 3]);
        // Cutting at three labels gives four bands.
        let (sector, _) = project_sector(7, &[1, 3, 4]).unwrap();
        assert_eq!(sector.counts(), &[1, 2, 1, 3]);
        // Cutting at every label is the identity sector.
        let (sector, relabel) = project_sector(4, &[1, 2, 3, 4]).unwrap();
        assert_eq!(sector.counts(), &[1, 1, 1, 1]);
        assert_eq!(relabel, vec![1, 2, 3, 4]);
    }

    #[test]
    fn projection_rejects_bad_labels() {
        assert!(project_sector(4, &[]).is_err());
        assert!(project_sector(4, &[2, 2]).is_err());
        assert!(project_sector(4, &[0, 2]).is_err());
        assert!(project_sector(4, &[3, 5]).is_err());
    }
}
