//! The multispecies TASEP Markov chain itself: exact generator, exact
//! rational stationary solve (an oracle independent of queue counting), and
//! continuous-time Monte Carlo for sectors too large to enumerate.
//!
//! Dynamics on the ring: each particle carries a rate-1 exponential clock;
//! when particle `j`'s clock rings it exchanges with the particle to its
//! immediate left exactly when that particle's label `k` satisfies `k > j`.
//! Equivalently every cyclically adjacent descent `w_p > w_{p+1}` flips at
//! rate 1. The orientation is pinned by the cross-check against multiline
//! queue counting.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_traits::{ToPrimitive, Zero};
use rand::distributions::Distribution;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use thiserror::Error;

use crate::combinatorics::Rational;
use crate::mlq::{ExactDist, Sector, Word};

/// Default ceiling on the number of chain states built exactly.
pub const DEFAULT_STATE_BUDGET: u64 = 100_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TasepError {
    #[error("generator of {required} states exceeds the budget {budget}")]
    StateBudgetExceeded { required: String, budget: u64 },
    #[error("chain is not irreducible; the stationary law is not unique")]
    NotIrreducible,
    #[error("null space dimension is not one")]
    NullSpaceDimension,
    #[error("simulation needs at least one pattern query")]
    EmptyPatterns,
    #[error("pattern query inconsistent with the sector: {0}")]
    BadPattern(String),
    #[error("horizon must exceed burn-in and burn-in must be nonnegative")]
    BadHorizon,
}

/// Exact rate matrix of the sector's TASEP. Off-diagonal entries are 0 or 1;
/// the diagonal carries minus the number of transitions leaving the state,
/// so every column sums to zero.
pub struct Generator {
    sector: Sector,
    states: Vec<Word>,
    index: HashMap<Word, usize>,
    /// `targets[src]` lists the states reachable from `src` at rate 1.
    targets: Vec<Vec<u32>>,
}

impl Generator {
    pub fn sector(&self) -> &Sector {
        &self.sector
    }

    pub fn states(&self) -> &[Word] {
        &self.states
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn targets_of(&self, src: usize) -> &[u32] {
        &self.targets[src]
    }

    pub fn out_degree(&self, src: usize) -> usize {
        self.targets[src].len()
    }

    /// Matrix entry: the rate from `from` into `to` off the diagonal, minus
    /// the out-degree on it.
    pub fn rate_between(&self, to: &Word, from: &Word) -> i64 {
        let src = self.index[from];
        if to == from {
            return -(self.targets[src].len() as i64);
        }
        let dst = self.index[to] as u32;
        i64::from(self.targets[src].contains(&dst))
    }
}

/// Applies the swap at cyclic position `p` (0-based pair `(p, p+1 mod N)`).
fn swapped(word: &Word, p: usize) -> Word {
    let mut letters = word.letters().to_vec();
    let q = (p + 1) % letters.len();
    letters.swap(p, q);
    Word::new(letters)
}

/// Builds the exact generator over every word of the sector.
pub fn build_generator(sector: &Sector, state_budget: u64) -> Result<Generator, TasepError> {
    let total = sector.word_count();
    if total.to_u64().map(|t| t > state_budget).unwrap_or(true) {
        return Err(TasepError::StateBudgetExceeded {
            required: total.to_string(),
            budget: state_budget,
        });
    }
    let states = sector.words();
    let index: HashMap<Word, usize> = states
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect();
    let ring = sector.ring_size() as usize;
    let targets = states
        .iter()
        .map(|w| {
            let mut out = Vec::new();
            for p in 0..ring {
                let q = (p + 1) % ring;
                if w.letters()[p] > w.letters()[q] {
                    out.push(index[&swapped(w, p)] as u32);
                }
            }
            out
        })
        .collect();
    Ok(Generator {
        sector: sector.clone(),
        states,
        index,
        targets,
    })
}

fn is_strongly_connected(targets: &[Vec<u32>]) -> bool {
    let s = targets.len();
    if s == 0 {
        return false;
    }
    let reach = |adj: &dyn Fn(usize) -> Vec<usize>| {
        let mut seen = vec![false; s];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for w in adj(v) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == s
    };
    let forward = |v: usize| targets[v].iter().map(|&t| t as usize).collect::<Vec<_>>();
    if !reach(&forward) {
        return false;
    }
    let mut reverse = vec![Vec::new(); s];
    for (src, outs) in targets.iter().enumerate() {
        for &dst in outs {
            reverse[dst as usize].push(src);
        }
    }
    let backward = |v: usize| reverse[v].clone();
    reach(&backward)
}

/// Exact stationary distribution: the unique positive rational null vector
/// of the rate matrix, normalized to total mass one.
///
/// The dynamics commute with ring rotation, so states are first lumped into
/// rotation orbits and the dense rational elimination runs on the far
/// smaller orbit chain; the lifted vector is then certified on the full
/// generator — exact zero residual, positivity, total mass one — with
/// irreducibility (checked directly) guaranteeing uniqueness. Nothing in
/// the result rests on the symmetry argument itself.
pub fn solve_stationary(gen: &Generator) -> Result<ExactDist, TasepError> {
    let s = gen.states.len();
    if !is_strongly_connected(&gen.targets) {
        return Err(TasepError::NotIrreducible);
    }
    if s == 1 {
        let mut probs = BTreeMap::new();
        probs.insert(gen.states[0].clone(), Rational::from_integer(1.into()));
        return Ok(ExactDist::from_probabilities(gen.sector.clone(), probs));
    }

    // Rotation orbits via canonical (lexicographically least) rotations.
    let canonical = |w: &Word| {
        let mut best = w.clone();
        let mut cur = w.clone();
        for _ in 1..w.len() {
            cur = cur.rotated_left();
            if cur < best {
                best = cur.clone();
            }
        }
        best
    };
    let mut orbit_ids: HashMap<Word, usize> = HashMap::new();
    let mut orbit_of = vec![0usize; s];
    let mut orbit_rep: Vec<usize> = Vec::new();
    let mut orbit_size: Vec<u32> = Vec::new();
    for (i, w) in gen.states.iter().enumerate() {
        let canon = canonical(w);
        let next_id = orbit_rep.len();
        let id = *orbit_ids.entry(canon).or_insert(next_id);
        if id == next_id {
            orbit_rep.push(i);
            orbit_size.push(0);
        }
        orbit_of[i] = id;
        orbit_size[id] += 1;
    }
    let orbits = orbit_rep.len();

    // Lumped rate matrix on orbits, columns summing to zero.
    let zero = Rational::zero();
    let one = Rational::from_integer(1.into());
    let mut m = vec![vec![zero.clone(); orbits]; orbits];
    for (a, &rep) in orbit_rep.iter().enumerate() {
        let outs = &gen.targets[rep];
        for &dst in outs {
            m[orbit_of[dst as usize]][a] += &one;
        }
        m[a][a] -= Rational::from_integer((outs.len() as i64).into());
    }
    let y = dense_null_vector(m)?;

    // Lift uniformly within orbits and normalize to mass one.
    let mut x: Vec<Rational> = (0..s)
        .map(|i| &y[orbit_of[i]] / Rational::from_integer(orbit_size[orbit_of[i]].into()))
        .collect();
    let total: Rational = x.iter().sum();
    if total.is_zero() {
        return Err(TasepError::NullSpaceDimension);
    }
    for v in &mut x {
        *v /= &total;
    }
    if x.iter()
        .any(|v| !v.numer().sign().eq(&num_bigint::Sign::Plus))
    {
        return Err(TasepError::NullSpaceDimension);
    }

    // Certify: apply the sparse generator to x and demand an exact zero.
    let mut image = vec![zero.clone(); s];
    for (src, outs) in gen.targets.iter().enumerate() {
        for &dst in outs {
            image[dst as usize] += &x[src];
        }
        image[src] -= Rational::from_integer((outs.len() as i64).into()) * &x[src];
    }
    assert!(
        image.iter().all(Rational::is_zero),
        "solved vector must lie in the generator's null space"
    );

    let probs: BTreeMap<Word, Rational> = gen.states.iter().cloned().zip(x).collect();
    Ok(ExactDist::from_probabilities(gen.sector.clone(), probs))
}

/// Null vector of a square rate matrix whose columns sum to zero, by exact
/// rational Gaussian elimination with the redundant last row dropped.
/// Fails unless the null space is exactly one-dimensional.
fn dense_null_vector(mut m: Vec<Vec<Rational>>) -> Result<Vec<Rational>, TasepError> {
    let s = m.len();
    if s == 1 {
        return Ok(vec![Rational::from_integer(1.into())]);
    }
    let zero = Rational::zero();
    let one = Rational::from_integer(1.into());
    m.pop();

    // Row echelon with exact arithmetic; pivot rows are scaled to 1.
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut free_cols = Vec::new();
    let mut next_row = 0;
    for col in 0..s {
        let Some(r) = (next_row..s - 1).find(|&r| !m[r][col].is_zero()) else {
            free_cols.push(col);
            continue;
        };
        m.swap(next_row, r);
        let p = std::mem::replace(&mut m[next_row][col], one.clone());
        for cell in &mut m[next_row][col + 1..s] {
            if !cell.is_zero() {
                let v = std::mem::take(cell);
                *cell = v / &p;
            }
        }
        let (pivot_rows, rest) = m.split_at_mut(next_row + 1);
        let pivot_row = &pivot_rows[next_row];
        rest.par_iter_mut().for_each(|row| {
            if row[col].is_zero() {
                return;
            }
            let f = std::mem::replace(&mut row[col], Rational::zero());
            for c in col + 1..s {
                if !pivot_row[c].is_zero() {
                    let t = &pivot_row[c] * &f;
                    row[c] -= t;
                }
            }
        });
        pivots.push((next_row, col));
        next_row += 1;
    }
    if free_cols.len() != 1 {
        return Err(TasepError::NullSpaceDimension);
    }

    let mut x = vec![zero.clone(); s];
    x[free_cols[0]] = one;
    for &(row, col) in pivots.iter().rev() {
        let mut acc = zero.clone();
        for c in col + 1..s {
            if !m[row][c].is_zero() && !x[c].is_zero() {
                acc += &m[row][c] * &x[c];
            }
        }
        x[col] = -acc;
    }
    Ok(x)
}

pub use crate::correlations::PatternQuery;

/// Time-weighted estimate for one pattern.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PatternStat {
    pub pattern: PatternQuery,
    pub estimate: f64,
    #[serde(rename = "stdError")]
    pub std_error: f64,
}

/// Outcome of a single continuous-time trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryStats {
    pub sector: Sector,
    pub seed: u64,
    pub horizon: f64,
    pub burn_in: f64,
    pub events: u64,
    pub measured_time: f64,
    pub patterns: Vec<PatternStat>,
    /// Per-pattern, per-batch time-weighted means behind the estimates.
    batch_means: Vec<Vec<f64>>,
}

impl TrajectoryStats {
    /// Estimate and standard error for the union of the given patterns.
    /// Exact for pairwise disjoint pattern events, where the union's batch
    /// mean is the sum of the per-pattern batch means.
    pub fn union_estimate(&self, indices: &[usize]) -> (f64, f64) {
        let batches = self.batch_means[0].len();
        let sums: Vec<f64> = (0..batches)
            .map(|b| indices.iter().map(|&i| self.batch_means[i][b]).sum())
            .collect();
        let mean = sums.iter().sum::<f64>() / batches as f64;
        let var = sums.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
        (mean, (var / batches as f64).sqrt())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "sector": self.sector.counts(),
            "seed": self.seed,
            "horizon": self.horizon,
            "burnIn": self.burn_in,
            "events": self.events,
            "measuredTime": self.measured_time,
            "patterns": self.patterns,
        })
    }
}

/// Number of batch means used for the standard-error estimate.
const BATCHES: usize = 256;

/// Simulates the sector's TASEP with the race-of-exponentials scheme and
/// returns time-weighted pattern occupancies over `(burn_in, horizon]`.
///
/// The enabled swaps (cyclic descents) are maintained incrementally; waiting
/// times are exponential with rate equal to their number and the swap is
/// chosen uniformly among them. Estimates are time-weighted — the embedded
/// jump chain has a different stationary law. Reproducible given the seed;
/// the generator is ChaCha8 seeded with `seed`.
pub fn simulate(
    sector: &Sector,
    horizon: f64,
    burn_in: f64,
    seed: u64,
    patterns: &[PatternQuery],
) -> Result<TrajectoryStats, TasepError> {
    if patterns.is_empty() {
        return Err(TasepError::EmptyPatterns);
    }
    if !(burn_in >= 0.0 && horizon > burn_in) {
        return Err(TasepError::BadHorizon);
    }
    for p in patterns {
        p.validate_for(sector)
            .map_err(|e| TasepError::BadPattern(e.to_string()))?;
    }

    let ring = sector.ring_size() as usize;
    let mut word: Vec<u8> = sector.sorted_word().letters().to_vec();

    // Indexed set of enabled positions for O(1) insert/remove/sample.
    let mut enabled: Vec<u32> = Vec::with_capacity(ring);
    let mut slot: Vec<usize> = vec![usize::MAX; ring];
    let is_descent = |w: &[u8], p: usize| w[p] > w[(p + 1) % ring];
    for (p, entry) in slot.iter_mut().enumerate() {
        if is_descent(&word, p) {
            *entry = enabled.len();
            enabled.push(p as u32);
        }
    }

    // Patterns indexed by the positions they read.
    let mut by_position: Vec<Vec<usize>> = vec![Vec::new(); ring];
    for (i, pat) in patterns.iter().enumerate() {
        for &(pos, _) in &pat.assignments {
            by_position[(pos - 1) as usize].push(i);
        }
    }
    let mut indicator: Vec<bool> = patterns.iter().map(|p| p.matches_letters(&word)).collect();

    let window = horizon - burn_in;
    let batch_len = window / BATCHES as f64;
    let mut batch_acc = vec![[0.0f64; BATCHES]; patterns.len()];

    let accumulate = |indicator: &[bool], from: f64, to: f64, acc: &mut Vec<[f64; BATCHES]>| {
        let lo = from.max(burn_in);
        let hi = to.min(horizon);
        if hi <= lo {
            return;
        }
        // Split the interval across batch boundaries.
        let mut t = lo;
        while t < hi {
            let b = (((t - burn_in) / batch_len) as usize).min(BATCHES - 1);
            let end = (burn_in + (b + 1) as f64 * batch_len).min(hi);
            for (i, &on) in indicator.iter().enumerate() {
                if on {
                    acc[i][b] += end - t;
                }
            }
            t = end;
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0.0f64;
    let mut events = 0u64;
    loop {
        let k = enabled.len();
        assert!(k > 0, "a multispecies ring always has an enabled swap");
        let wait: f64 = Exp1.sample(&mut rng);
        let t_next = t + wait / k as f64;
        if t_next >= horizon {
            accumulate(&indicator, t, horizon, &mut batch_acc);
            break;
        }
        accumulate(&indicator, t, t_next, &mut batch_acc);
        t = t_next;

        let p = enabled[rng.gen_range(0..k)] as usize;
        assert!(is_descent(&word, p), "only enabled descents may swap");
        let q = (p + 1) % ring;
        word.swap(p, q);
        events += 1;

        for pos in [if p == 0 { ring - 1 } else { p - 1 }, p, q] {
            let now = is_descent(&word, pos);
            let was = slot[pos] != usize::MAX;
            if now && !was {
                slot[pos] = enabled.len();
                enabled.push(pos as u32);
            } else if !now && was {
                let idx = slot[pos];
                let last = enabled.len() - 1;
                enabled.swap(idx, last);
                slot[enabled[idx] as usize] = idx;
                enabled.pop();
                slot[pos] = usize::MAX;
            }
        }
        for pos in [p, q] {
            for &i in &by_position[pos] {
                indicator[i] = patterns[i].matches_letters(&word);
            }
        }
    }

    let mut batch_means: Vec<Vec<f64>> = Vec::with_capacity(patterns.len());
    let stats = patterns
        .iter()
        .zip(batch_acc.iter())
        .map(|(pat, acc)| {
            let means: Vec<f64> = acc.iter().map(|a| a / batch_len).collect();
            let mean = means.iter().sum::<f64>() / BATCHES as f64;
            let var =
                means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (BATCHES as f64 - 1.0);
            batch_means.push(means);
            PatternStat {
                pattern: pat.clone(),
                estimate: mean,
                std_error: (var / BATCHES as f64).sqrt(),
            }
        })
        .collect();

    Ok(TrajectoryStats {
        sector: sector.clone(),
        seed,
        horizon,
        burn_in,
        events,
        measured_time: window,
        patterns: stats,
        batch_means,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::rat;
    use crate::mlq::{stationary_from_queues, DEFAULT_QUEUE_BUDGET};

    fn sector(counts: &[u32]) -> Sector {
        Sector::new(counts.to_vec()).unwrap()
    }

    #[test]
    fn two_state_chain() {
        let gen = build_generator(&sector(&[1, 1]), 100).unwrap();
        assert_eq!(gen.state_count(), 2);
        for s in 0..2 {
            assert_eq!(gen.out_degree(s), 1);
        }
        let dist = solve_stationary(&gen).unwrap();
        assert_eq!(dist.probability(&Word::new(vec![1, 2])), rat(1, 2));
        assert_eq!(dist.probability(&Word::new(vec![2, 1])), rat(1, 2));
    }

    #[test]
    fn descent_counts_on_permutations() {
        let gen = build_generator(&sector(&[1, 1, 1]), 100).unwrap();
        assert_eq!(gen.state_count(), 6);
        // A cyclic word of distinct letters always wraps back up, so the
        // reverse triple has two enabled swaps and the sorted one a single
        // wrap-around swap; nine transitions in total.
        let degree = |letters: [u8; 3]| {
            let idx = gen
                .states()
                .iter()
                .position(|w| w.letters() == letters)
                .unwrap();
            gen.out_degree(idx)
        };
        assert_eq!(degree([3, 2, 1]), 2);
        assert_eq!(degree([1, 2, 3]), 1);
        let total: usize = (0..6).map(|s| gen.out_degree(s)).sum();
        assert_eq!(total, 9);
    }

    #[test]
    fn columns_sum_to_zero() {
        let gen = build_generator(&sector(&[2, 1, 1]), 1000).unwrap();
        for from in gen.states() {
            let sum: i64 = gen
                .states()
                .iter()
                .map(|to| gen.rate_between(to, from))
                .sum();
            assert_eq!(sum, 0, "column of {from}");
        }
    }

    #[test]
    fn solver_matches_queue_counting_small() {
        for counts in [
            vec![1, 1],
            vec![1, 1, 1],
            vec![2, 1],
            vec![1, 1, 1, 1],
            vec![2, 1, 2],
        ] {
            let s = sector(&counts);
            let by_queues = stationary_from_queues(&s, DEFAULT_QUEUE_BUDGET).unwrap();
            let by_solve = solve_stationary(&build_generator(&s, 10_000).unwrap()).unwrap();
            for (w, e) in by_queues.iter() {
                assert_eq!(by_solve.probability(w), e.prob, "sector {s} word {w}");
            }
        }
    }

    #[test]
    fn solver_matches_queue_counting_ring_eight_sample() {
        // Spot checks on ring size 8 with up to five species; the full
        // sweep lives behind `--ignored`.
        for counts in [
            vec![2, 2, 4],
            vec![1, 3, 4],
            vec![1, 1, 2, 4],
            vec![1, 1, 1, 1, 4],
        ] {
            let s = sector(&counts);
            let by_queues = stationary_from_queues(&s, DEFAULT_QUEUE_BUDGET).unwrap();
            let by_solve = solve_stationary(&build_generator(&s, 10_000).unwrap()).unwrap();
            for (w, e) in by_queues.iter() {
                assert_eq!(by_solve.probability(w), e.prob, "sector {s} word {w}");
            }
        }
    }

    #[test]
    #[ignore]
    fn solver_matches_queue_counting_ring_eight_full() {
        for sector in crate::correlations::small_sectors(5, 8) {
            let by_queues = stationary_from_queues(&sector, DEFAULT_QUEUE_BUDGET).unwrap();
            let by_solve = solve_stationary(&build_generator(&sector, 100_000).unwrap()).unwrap();
            for (w, e) in by_queues.iter() {
                assert_eq!(by_solve.probability(w), e.prob, "sector {sector} word {w}");
            }
        }
    }

    #[test]
    fn reverse_triple_probability() {
        let gen = build_generator(&sector(&[1, 1, 1]), 100).unwrap();
        let dist = solve_stationary(&gen).unwrap();
        assert_eq!(dist.probability(&Word::new(vec![3, 2, 1])), rat(1, 9));
    }

    #[test]
    fn state_budget_enforced() {
        assert!(matches!(
            build_generator(&sector(&[1; 9]), 1000),
            Err(TasepError::StateBudgetExceeded { .. })
        ));
    }

    #[test]
    fn simulation_is_reproducible() {
        let s = sector(&[1, 1, 1]);
        let pats = vec![PatternQuery::new(vec![(1, 1), (2, 2)])];
        let a = simulate(&s, 200.0, 10.0, 42, &pats).unwrap();
        let b = simulate(&s, 200.0, 10.0, 42, &pats).unwrap();
        assert_eq!(a.events, b.events);
        assert_eq!(a.patterns[0].estimate, b.patterns[0].estimate);
        let c = simulate(&s, 200.0, 10.0, 43, &pats).unwrap();
        assert_ne!(a.events, c.events);
    }

    #[test]
    fn simulation_two_species_half() {
        let s = sector(&[1, 1]);
        let pats = vec![PatternQuery::new(vec![(1, 1)])];
        let stats = simulate(&s, 50_000.0, 100.0, 7, &pats).unwrap();
        let p = &stats.patterns[0];
        assert!(
            (p.estimate - 0.5).abs() <= 3.0 * p.std_error,
            "estimate {} se {}",
            p.estimate,
            p.std_error
        );
    }

    #[test]
    fn simulation_rejects_bad_input() {
        let s = sector(&[1, 1]);
        assert_eq!(
            simulate(&s, 10.0, 0.0, 1, &[]).unwrap_err(),
            TasepError::EmptyPatterns
        );
        let pats = vec![PatternQuery::new(vec![(9, 1)])];
        assert!(matches!(
            simulate(&s, 10.0, 0.0, 1, &pats),
            Err(TasepError::BadPattern(_))
        ));
        let pats = vec![PatternQuery::new(vec![(1, 1)])];
        assert_eq!(
            simulate(&s, 1.0, 2.0, 1, &pats).unwrap_err(),
            TasepError::BadHorizon
        );
    }
}
