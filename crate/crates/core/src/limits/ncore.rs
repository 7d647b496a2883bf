//! Partitions with no hook length divisible by `n` and their content-residue
//! growth process.
//!
//! Two representations cooperate. [`grow_step`] works on row lengths and
//! costs `O(rows)` per step; it is the reference implementation and the
//! oracle. [`GrowthEngine`] tracks, per content residue class, the largest
//! first-column code (`row length - row index`) of the class; one growth
//! step is then a constant-time update, which is what makes million-step
//! trajectories affordable. The two are equivalent and tested against each
//! other.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoreError {
    #[error("row lengths must be weakly decreasing and positive, got {0:?}")]
    InvalidPartition(Vec<u64>),
    #[error("the growth modulus must be at least 1")]
    BadModulus,
}

/// A partition stored as weakly decreasing positive row lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorePartition {
    rows: Vec<u64>,
}

impl CorePartition {
    pub fn new(rows: Vec<u64>) -> Result<Self, CoreError> {
        if rows.windows(2).any(|w| w[0] < w[1]) || rows.contains(&0) {
            return Err(CoreError::InvalidPartition(rows));
        }
        Ok(CorePartition { rows })
    }

    pub fn empty() -> Self {
        CorePartition { rows: Vec::new() }
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn boxes(&self) -> u128 {
        self.rows.iter().map(|&r| u128::from(r)).sum()
    }

    /// Hook length of the cell at `(row, col)` (1-based).
    pub fn hook_length(&self, row: usize, col: u64) -> u64 {
        let arm = self.rows[row - 1] - col;
        let leg = self
            .rows
            .iter()
            .skip(row)
            .take_while(|&&r| r >= col)
            .count() as u64;
        arm + leg + 1
    }
}

/// True when no cell's hook length is divisible by `n`.
///
/// Uses the first-column code set `{row length - row index}`: the hooks of a
/// row are the gaps below its code, so the partition avoids hooks divisible
/// by `n` exactly when the code set is closed under subtracting `n`.
pub fn is_n_core(p: &CorePartition, n: u32) -> bool {
    assert!(n >= 1);
    let len = p.rows.len() as i64;
    let codes: HashSet<i64> = p
        .rows
        .iter()
        .enumerate()
        .map(|(i, &r)| r as i64 - (i as i64 + 1))
        .collect();
    let in_set = |x: i64| x < -len || codes.contains(&x);
    codes.iter().all(|&c| in_set(c - i64::from(n)))
}

/// One growth step on row lengths: adds a box at every growth corner whose
/// content `col - row` is congruent to `t` mod `n`. Corners are read off the
/// current shape before any box is added.
pub fn grow_step(p: &CorePartition, n: u32, t: u32) -> CorePartition {
    debug_assert!(t < n);
    let rows = &p.rows;
    let matches = |content: i64| content.rem_euclid(i64::from(n)) == i64::from(t);
    let mut next = rows.clone();
    for i in 0..rows.len() {
        let addable = i == 0 || rows[i - 1] > rows[i];
        // Candidate cell (i+1, rows[i]+1), content = col - row.
        if addable && matches(rows[i] as i64 + 1 - (i as i64 + 1)) {
            next[i] += 1;
        }
    }
    // The new-row cell (len+1, 1).
    if matches(-(rows.len() as i64)) {
        next.push(1);
    }
    CorePartition { rows: next }
}

/// Replays an explicit residue sequence from the empty shape.
pub fn replay_growth(n: u32, residues: &[u32]) -> Result<CorePartition, CoreError> {
    if n == 0 {
        return Err(CoreError::BadModulus);
    }
    let mut p = CorePartition::empty();
    for &t in residues {
        if t >= n {
            return Err(CoreError::BadModulus);
        }
        p = grow_step(&p, n, t);
    }
    Ok(p)
}

/// Constant-time growth state: `tops[r]` is the largest first-column code
/// congruent to `r` mod `n` present in the code set. The empty shape has
/// `tops[r] = r - n`.
#[derive(Debug, Clone)]
pub struct GrowthEngine {
    n: u32,
    tops: Vec<i64>,
    boxes: u128,
}

impl GrowthEngine {
    pub fn new(n: u32) -> Result<Self, CoreError> {
        if n == 0 {
            return Err(CoreError::BadModulus);
        }
        Ok(GrowthEngine {
            n,
            tops: (0..i64::from(n)).map(|r| r - i64::from(n)).collect(),
            boxes: 0,
        })
    }

    pub fn boxes(&self) -> u128 {
        self.boxes
    }

    /// Adds a box with content residue `t` at every growth corner: the codes
    /// in class `t-1` sitting above the top of class `t` each shift up by
    /// one, which swaps the two adjusted class tops.
    pub fn step(&mut self, t: u32) {
        debug_assert!(t < self.n);
        let n = i64::from(self.n);
        let a = ((t as i64 - 1).rem_euclid(n)) as usize;
        let b = t as usize;
        let gap = self.tops[a] - self.tops[b];
        if gap >= n - 1 {
            debug_assert_eq!((gap + 1) % n, 0);
            self.boxes += ((gap + 1) / n) as u128;
            let (ta, tb) = (self.tops[a], self.tops[b]);
            self.tops[a] = tb - 1;
            self.tops[b] = ta + 1;
        }
    }

    /// Reconstructs the partition: collect the explicit codes, sort them
    /// decreasingly, and read row lengths as `code + index`.
    pub fn to_partition(&self) -> CorePartition {
        let n = i64::from(self.n);
        let floor = *self.tops.iter().min().unwrap();
        let ceil = *self.tops.iter().max().unwrap();
        let mut rows = Vec::new();
        let mut index = 0i64;
        for code in (floor..=ceil).rev() {
            if code <= self.tops[code.rem_euclid(n) as usize] {
                index += 1;
                let row = code + index;
                if row > 0 {
                    rows.push(row as u64);
                }
            }
        }
        // Below the floor every code is present and the implied row length
        // is the constant floor + index, which balance keeps at zero.
        debug_assert_eq!(floor + index, 0);
        let p = CorePartition { rows };
        debug_assert_eq!(p.boxes(), self.boxes);
        p
    }
}

/// Down-step counts of the boundary over content-aligned windows of length
/// `n`, from the y-axis side toward the x-axis: entry `w` counts the
/// first-column codes present in `[wn, wn+n)`. For an n-core the counts are
/// weakly decreasing, which is the deterministic-slope structure of the
/// boundary: a stretch of windows with count `i` descends `i` rows per `n-i`
/// columns.
pub fn content_window_profile(p: &CorePartition, n: u32) -> Vec<u32> {
    let rows = p.rows();
    if rows.is_empty() {
        return Vec::new();
    }
    let len = rows.len() as i64;
    let codes: HashSet<i64> = rows
        .iter()
        .enumerate()
        .map(|(i, &r)| r as i64 - (i as i64 + 1))
        .collect();
    let nn = i64::from(n);
    let lo = (-len).div_euclid(nn);
    let hi = (rows[0] as i64 - 1).div_euclid(nn);
    (lo..=hi)
        .map(|w| {
            (0..nn)
                .filter(|k| {
                    let z = w * nn + k;
                    z < -len || codes.contains(&z)
                })
                .count() as u32
        })
        .collect()
}

/// Grows an n-core with i.i.d. uniform residues for `steps` steps.
/// Deterministic given the seed (ChaCha8 keyed by `seed`).
pub fn random_growth(n: u32, steps: u64, seed: u64) -> Result<CorePartition, CoreError> {
    Ok(random_growth_engine(n, steps, seed)?.to_partition())
}

pub fn random_growth_engine(n: u32, steps: u64, seed: u64) -> Result<GrowthEngine, CoreError> {
    let mut engine = GrowthEngine::new(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..steps {
        engine.step(rng.gen_range(0..n));
    }
    Ok(engine)
}
