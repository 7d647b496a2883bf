//! Multiline queues: representation, full enumeration, the bully-path
//! projection, and exact stationary distributions of the multispecies TASEP
//! obtained by queue counting.
//!
//! A queue for a sector `m = (m_1, ..., m_n)` on a ring of `N` columns has
//! `n-1` cyclic rows; row `i` (from the top) carries `M_i = m_1 + ... + m_i`
//! occupied sites. Queues are uniform at stationarity, and projecting each
//! queue along bully paths yields a ring word whose frequency is its exact
//! stationary probability.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::combinatorics::{binom, factorial, int_over, Rational};

/// Widest ring the bit-packed enumeration supports.
pub const MAX_RING: u32 = 16;
/// Most species the 4-bit word packing supports.
pub const MAX_SPECIES: usize = 15;
/// Default ceiling on the number of queues a single call may scan.
pub const DEFAULT_QUEUE_BUDGET: u64 = 200_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MlqError {
    #[error("sector must have at least one species, all with positive counts")]
    InvalidSector,
    #[error("queue enumeration needs at least two species")]
    TooFewSpecies,
    #[error("ring size {0} exceeds the enumeration width {MAX_RING}")]
    RingTooWide(u32),
    #[error("{0} species exceeds the packed-word limit {MAX_SPECIES}")]
    TooManySpecies(usize),
    #[error("enumeration of {required} queues exceeds the budget {budget}")]
    BudgetExceeded { required: String, budget: u64 },
    #[error("path ordering interleaves rows")]
    InterleavedOrder,
    #[error("path ordering is not a permutation of the row's starts")]
    BadOrderRanks,
}

/// Species counts `m = (m_1, ..., m_n)`; `N` is their sum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sector {
    counts: Vec<u32>,
}

impl Sector {
    pub fn new(counts: Vec<u32>) -> Result<Self, MlqError> {
        if counts.is_empty() || counts.contains(&0) {
            return Err(MlqError::InvalidSector);
        }
        Ok(Sector { counts })
    }

    /// The sector `(1, 1, ..., 1)` of `n` distinct species.
    pub fn distinct(n: usize) -> Self {
        Sector { counts: vec![1; n] }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Number of species `n`.
    pub fn species(&self) -> usize {
        self.counts.len()
    }

    /// Ring size `N`.
    pub fn ring_size(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// Partial sums `M_1, ..., M_{n-1}` (the row fillings of a queue).
    pub fn row_fillings(&self) -> Vec<u32> {
        let mut acc = 0;
        self.counts[..self.counts.len() - 1]
            .iter()
            .map(|&c| {
                acc += c;
                acc
            })
            .collect()
    }

    /// The reversed sector `(m_n, ..., m_1)` of the particle-hole image.
    pub fn reversed(&self) -> Sector {
        let mut counts = self.counts.clone();
        counts.reverse();
        Sector { counts }
    }

    /// Exact number of multiline queues, the product of row binomials.
    pub fn queue_count(&self) -> BigInt {
        let n = i64::from(self.ring_size());
        self.row_fillings()
            .iter()
            .map(|&k| binom(n, i64::from(k)))
            .product()
    }

    /// Exact number of ring words of this type (a multinomial).
    pub fn word_count(&self) -> BigInt {
        let mut num = factorial(i64::from(self.ring_size()));
        for &c in &self.counts {
            let (q, r) = num_integer::div_rem(num, factorial(i64::from(c)));
            debug_assert!(r.is_zero());
            num = q;
        }
        num
    }

    /// True when `word` uses exactly this sector's letter multiplicities.
    pub fn admits(&self, word: &Word) -> bool {
        let mut seen = vec![0u32; self.counts.len()];
        for &l in word.letters() {
            let idx = l as usize;
            if idx == 0 || idx > self.counts.len() {
                return false;
            }
            seen[idx - 1] += 1;
        }
        seen == self.counts
    }

    /// The lexicographically smallest word of the sector: `1..1 2..2 ...`.
    pub fn sorted_word(&self) -> Word {
        let mut letters = Vec::with_capacity(self.ring_size() as usize);
        for (i, &c) in self.counts.iter().enumerate() {
            letters.extend(std::iter::repeat_n(i as u8 + 1, c as usize));
        }
        Word(letters)
    }

    /// All words of the sector (multiset permutations), lexicographic.
    pub fn words(&self) -> Vec<Word> {
        let mut remaining = self.counts.clone();
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(self.ring_size() as usize);
        fn go(remaining: &mut [u32], current: &mut Vec<u8>, size: u32, out: &mut Vec<Word>) {
            if current.len() == size as usize {
                out.push(Word(current.clone()));
                return;
            }
            for i in 0..remaining.len() {
                if remaining[i] > 0 {
                    remaining[i] -= 1;
                    current.push(i as u8 + 1);
                    go(remaining, current, size, out);
                    current.pop();
                    remaining[i] += 1;
                }
            }
        }
        go(&mut remaining, &mut current, self.ring_size(), &mut out);
        out
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A ring configuration: letters in `1..=n`, letter `i` occurring `m_i`
/// times.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(letters: Vec<u8>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Letter at 1-based ring position.
    pub fn at(&self, position: usize) -> u8 {
        self.0[position - 1]
    }

    /// The left rotation `(w_2, ..., w_N, w_1)`.
    pub fn rotated_left(&self) -> Word {
        let mut v = self.0.clone();
        v.rotate_left(1);
        Word(v)
    }

    /// The particle-hole image `(n+1-w_N, ..., n+1-w_1)`.
    pub fn particle_hole(&self, species: u8) -> Word {
        Word(self.0.iter().rev().map(|&l| species + 1 - l).collect())
    }

    fn unpack(packed: u64, len: u32) -> Word {
        Word(
            (0..len)
                .map(|c| ((packed >> (4 * c)) & 0xf) as u8)
                .collect(),
        )
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "-")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// `n-1` cyclic rows of occupied/vacant marks, row `i` holding `M_i`
/// occupied sites. Bit `c` of `rows[i]` set means column `c+1` is occupied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilineQueue {
    rows: Vec<u32>,
    columns: u32,
}

impl MultilineQueue {
    pub fn from_masks(rows: Vec<u32>, columns: u32) -> Self {
        debug_assert!(columns <= MAX_RING);
        MultilineQueue { rows, columns }
    }

    /// Builds a queue from 1-based occupied column lists, top row first.
    pub fn from_occupied_columns(sites: &[Vec<u32>], columns: u32) -> Self {
        let rows = sites
            .iter()
            .map(|row| row.iter().fold(0u32, |m, &c| m | (1 << (c - 1))))
            .collect();
        MultilineQueue { rows, columns }
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn columns(&self) -> u32 {
        self.columns
    }
}

#[inline]
fn first_occupied_at_or_after(mask: u32, col: u32) -> u32 {
    debug_assert!(mask != 0, "bully path found no free occupied site");
    let ge = mask & (u32::MAX << col);
    if ge != 0 {
        ge.trailing_zeros()
    } else {
        mask.trailing_zeros()
    }
}

/// Bully projection on raw row masks, packing the word 4 bits per column.
fn project_packed(rows: &[u32], columns: u32) -> u64 {
    let n_rows = rows.len();
    let mut avail = [0u32; MAX_SPECIES];
    avail[..n_rows].copy_from_slice(rows);
    let mut word = 0u64;
    for start_row in 0..n_rows {
        // Sites of this row not consumed by paths from rows above start
        // their own paths; left-to-right order (any same-row order gives the
        // same word).
        let mut starts = avail[start_row];
        while starts != 0 {
            let mut col = starts.trailing_zeros();
            starts &= starts - 1;
            for row in &mut avail[start_row + 1..n_rows] {
                let site = first_occupied_at_or_after(*row, col);
                *row &= !(1 << site);
                col = site;
            }
            word |= ((start_row as u64) + 1) << (4 * col);
        }
    }
    // Label n under the vacant sites of the bottom row.
    let n = (n_rows + 1) as u64;
    let bottom = rows[n_rows - 1];
    for c in 0..columns {
        if bottom & (1 << c) == 0 {
            word |= n << (4 * c);
        }
    }
    word
}

/// Projects a queue to its ring word along bully paths, rows top to bottom,
/// same-row starts left to right.
///
/// # Panics
///
/// Panics when row occupation counts are not weakly increasing downward;
/// such a stack is not a multiline queue and some path would starve.
pub fn bully_project(queue: &MultilineQueue) -> Word {
    assert!(
        queue
            .rows
            .windows(2)
            .all(|w| w[0].count_ones() <= w[1].count_ones()),
        "row occupation counts must weakly increase downward"
    );
    Word::unpack(project_packed(&queue.rows, queue.columns), queue.columns)
}

/// Bully projection running same-row paths in a caller-chosen order.
///
/// `order` lists every path as `(row, rank)` with rows 0-based top-down and
/// `rank` indexing the row's start sites left to right at the moment the row
/// is processed. Orders that interleave rows or repeat a rank are rejected;
/// admissible orders all produce the same word.
pub fn bully_project_with_order(
    queue: &MultilineQueue,
    order: &[(usize, usize)],
) -> Result<Word, MlqError> {
    let n_rows = queue.rows.len();
    let mut avail = queue.rows.clone();
    let mut word = vec![0u8; queue.columns as usize];

    let mut cursor = 0;
    for row in 0..n_rows {
        let start_mask = avail[row];
        let start_cols: Vec<u32> = (0..queue.columns)
            .filter(|c| start_mask & (1 << c) != 0)
            .collect();
        let k = start_cols.len();
        let ranks = &order[cursor..(cursor + k).min(order.len())];
        if ranks.len() != k || ranks.iter().any(|&(r, _)| r != row) {
            return Err(MlqError::InterleavedOrder);
        }
        let mut seen = vec![false; k];
        for &(_, rank) in ranks {
            if rank >= k || seen[rank] {
                return Err(MlqError::BadOrderRanks);
            }
            seen[rank] = true;
            let mut col = start_cols[rank];
            for lower in &mut avail[row + 1..n_rows] {
                let site = first_occupied_at_or_after(*lower, col);
                *lower &= !(1 << site);
                col = site;
            }
            word[col as usize] = row as u8 + 1;
        }
        cursor += k;
    }
    if cursor != order.len() {
        return Err(MlqError::InterleavedOrder);
    }
    let bottom = queue.rows[n_rows - 1];
    for c in 0..queue.columns {
        if bottom & (1 << c) == 0 {
            word[c as usize] = n_rows as u8 + 1;
        }
    }
    Ok(Word(word))
}

/// All `C(columns, k)` masks with `k` bits set, ascending (colexicographic).
fn combination_masks(columns: u32, k: u32) -> Vec<u32> {
    if k == 0 {
        return vec![0];
    }
    if k > columns {
        return Vec::new();
    }
    let limit = 1u64 << columns;
    let mut v: u64 = (1u64 << k) - 1;
    let mut out = Vec::new();
    while v < limit {
        out.push(v as u32);
        // Gosper's hack: next larger integer with the same popcount.
        let t = v | (v - 1);
        v = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
    }
    out
}

fn check_enumerable(sector: &Sector, budget: u64) -> Result<(Vec<Vec<u32>>, u64), MlqError> {
    if sector.species() < 2 {
        return Err(MlqError::TooFewSpecies);
    }
    if sector.ring_size() > MAX_RING {
        return Err(MlqError::RingTooWide(sector.ring_size()));
    }
    if sector.species() > MAX_SPECIES {
        return Err(MlqError::TooManySpecies(sector.species()));
    }
    let total = sector.queue_count();
    let within = total.to_u64().map(|t| t <= budget).unwrap_or(false);
    if !within {
        return Err(MlqError::BudgetExceeded {
            required: total.to_string(),
            budget,
        });
    }
    let columns = sector.ring_size();
    let lists = sector
        .row_fillings()
        .iter()
        .map(|&k| combination_masks(columns, k))
        .collect();
    Ok((lists, total.to_u64().unwrap()))
}

/// Streams every multiline queue of the sector exactly once, outermost row
/// in colexicographic order first.
pub fn enumerate_queues(sector: &Sector, budget: u64) -> Result<QueueIter, MlqError> {
    let (lists, _) = check_enumerable(sector, budget)?;
    Ok(QueueIter {
        columns: sector.ring_size(),
        indices: vec![0; lists.len()],
        lists,
        done: false,
    })
}

pub struct QueueIter {
    lists: Vec<Vec<u32>>,
    indices: Vec<usize>,
    columns: u32,
    done: bool,
}

impl Iterator for QueueIter {
    type Item = MultilineQueue;

    fn next(&mut self) -> Option<MultilineQueue> {
        if self.done {
            return None;
        }
        let rows: Vec<u32> = self
            .indices
            .iter()
            .zip(&self.lists)
            .map(|(&i, list)| list[i])
            .collect();
        // Odometer step, last row fastest.
        let mut pos = self.lists.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.indices[pos] += 1;
            if self.indices[pos] < self.lists[pos].len() {
                break;
            }
            self.indices[pos] = 0;
        }
        Some(MultilineQueue {
            rows,
            columns: self.columns,
        })
    }
}

/// One row of an exact distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistEntry {
    /// Number of queues projecting to the word, when obtained by counting.
    pub count: Option<u64>,
    pub prob: Rational,
}

/// An exact stationary distribution: every word of the sector mapped to a
/// positive rational probability, probabilities summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDist {
    sector: Sector,
    entries: BTreeMap<Word, DistEntry>,
    /// Common denominator (the queue total) when counts are known.
    denominator: Option<BigInt>,
}

impl ExactDist {
    pub fn from_counts(sector: Sector, counts: BTreeMap<Word, u64>, total: BigInt) -> ExactDist {
        let entries = counts
            .into_iter()
            .map(|(w, c)| {
                let prob = int_over(&BigInt::from(c), &total);
                (
                    w,
                    DistEntry {
                        count: Some(c),
                        prob,
                    },
                )
            })
            .collect();
        ExactDist {
            sector,
            entries,
            denominator: Some(total),
        }
    }

    pub fn from_probabilities(sector: Sector, probs: BTreeMap<Word, Rational>) -> ExactDist {
        let entries = probs
            .into_iter()
            .map(|(w, prob)| (w, DistEntry { count: None, prob }))
            .collect();
        ExactDist {
            sector,
            entries,
            denominator: None,
        }
    }

    pub fn sector(&self) -> &Sector {
        &self.sector
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn probability(&self, word: &Word) -> Rational {
        self.entries
            .get(word)
            .map(|e| e.prob.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn count(&self, word: &Word) -> Option<u64> {
        self.entries.get(word).and_then(|e| e.count)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &DistEntry)> {
        self.entries.iter()
    }

    /// Exact total probability of the words satisfying `pred`.
    pub fn probability_where<F: Fn(&Word) -> bool>(&self, pred: F) -> Rational {
        let mut total = Rational::zero();
        for (w, e) in &self.entries {
            if pred(w) {
                total += &e.prob;
            }
        }
        total
    }

    pub fn total(&self) -> Rational {
        let mut total = Rational::zero();
        for e in self.entries.values() {
            total += &e.prob;
        }
        total
    }

    /// CSV rows `word,count,numerator,denominator`, one entry per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("word,count,numerator,denominator\n");
        for (w, e) in &self.entries {
            let count = e.count.map(|c| c.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{w},{count},{},{}\n",
                e.prob.numer(),
                e.prob.denom()
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "sector": self.sector.counts(),
            "queue_total": self.denominator.as_ref().map(|d| d.to_string()),
            "entries": self
                .entries
                .iter()
                .map(|(w, e)| {
                    serde_json::json!({
                        "word": w.letters(),
                        "count": e.count,
                        "numerator": e.prob.numer().to_string(),
                        "denominator": e.prob.denom().to_string(),
                    })
                })
                .collect::<Vec<_>>(),
        })
    }
}

/// Exact stationary distribution of the sector's TASEP by scanning every
/// multiline queue and counting bully-path projections.
///
/// The scan is sharded by the first row's configuration and runs in
/// parallel; each shard accumulates its own word counts and the shard maps
/// are merged at the end.
pub fn stationary_from_queues(sector: &Sector, budget: u64) -> Result<ExactDist, MlqError> {
    let (lists, total) = check_enumerable(sector, budget)?;
    let columns = sector.ring_size();

    fn scan_rest(
        lists: &[Vec<u32>],
        depth: usize,
        rows: &mut [u32],
        columns: u32,
        acc: &mut HashMap<u64, u64>,
    ) {
        if depth == lists.len() {
            *acc.entry(project_packed(rows, columns)).or_insert(0) += 1;
            return;
        }
        for &mask in &lists[depth] {
            rows[depth] = mask;
            scan_rest(lists, depth + 1, rows, columns, acc);
        }
    }

    let merged: HashMap<u64, u64> = lists[0]
        .par_iter()
        .fold(HashMap::new, |mut acc, &first| {
            let mut rows = vec![0u32; lists.len()];
            rows[0] = first;
            scan_rest(&lists, 1, &mut rows, columns, &mut acc);
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });

    let scanned: u64 = merged.values().sum();
    assert_eq!(scanned, total, "queue scan must cover the whole product");

    let counts: BTreeMap<Word, u64> = merged
        .into_iter()
        .map(|(packed, c)| (Word::unpack(packed, columns), c))
        .collect();
    assert_eq!(
        BigInt::from(counts.len()),
        sector.word_count(),
        "bully projection must reach every word of the sector"
    );
    Ok(ExactDist::from_counts(
        sector.clone(),
        counts,
        BigInt::from(total),
    ))
}
