//! Acceptance suite: one test per criterion, each printing a pass line.
//! Every expected value is pinned exactly here; all comparisons of closed
//! forms against enumeration are exact rational equality.

use mtasep::combinatorics::{rat, Rational};
use mtasep::correlations::{
    marginal, project_sector, two_point_scaled_matrix, verify_aggregates, verify_conjecture,
    verify_decreasing, verify_lumping, verify_ssyt, verify_symmetries, verify_three_point,
    verify_two_point_adjacent, verify_two_point_distance, ConjectureId, ConjectureRanges,
    DistCache, InstanceStatus, Outcome, PatternQuery,
};
use mtasep::limits::{
    direction_closed, direction_from_correlations, exactly_collinear_positive, grow_step,
    is_n_core, random_growth, replay_growth, shape_distance, CorePartition,
};
use mtasep::mlq::{stationary_from_queues, Sector, DEFAULT_QUEUE_BUDGET};
use mtasep::tasep::simulate;
use num_traits::ToPrimitive;
use rand::Rng;
use rand::SeedableRng;

fn cache() -> DistCache {
    DistCache::new(DEFAULT_QUEUE_BUDGET)
}

#[test]
fn criterion_01_scaled_adjacent_matrix_n5() {
    let mut cache = cache();
    let matrix = two_point_scaled_matrix(&mut cache, 5).unwrap();
    let expected: [[i64; 5]; 5] = [
        [0, 4, 2, 2, 2],
        [1, 0, 5, 2, 2],
        [2, 1, 0, 5, 2],
        [3, 2, 1, 0, 4],
        [4, 3, 2, 1, 0],
    ];
    for (row, want) in matrix.iter().zip(expected) {
        for (value, w) in row.iter().zip(want) {
            assert_eq!(value, &rat(w, 1), "matrix {matrix:?}");
        }
    }
    println!("criterion 1 (n=5 scaled adjacent matrix): PASS");
}

#[test]
fn criterion_02_adjacent_closed_forms_n3_to_7() {
    let mut cache = cache();
    let report = verify_two_point_adjacent(&mut cache, &[3, 4, 5, 6, 7]).unwrap();
    assert!(report.all_matched(), "{}", report.render_table());
    println!(
        "criterion 2 (adjacent two-point, n=3..7): PASS ({} instances)",
        report.instances.len()
    );
}

#[test]
fn criterion_03_distance_closed_forms_n4_to_6() {
    let mut cache = cache();
    let report = verify_two_point_distance(&mut cache, &[4, 5, 6]).unwrap();
    assert!(report.all_matched(), "{}", report.render_table());
    // The report carries all three families: the quotient formula, the
    // uniform window and the top-species closed form.
    assert!(report
        .instances
        .iter()
        .any(|i| i.label.contains("uniform-window")));
    assert!(report
        .instances
        .iter()
        .any(|i| i.label.contains("top-species")));
    println!(
        "criterion 3 (distance two-point, n=4..6): PASS ({} instances)",
        report.instances.len()
    );
}

#[test]
fn criterion_04_tableau_counting_suite() {
    let report = verify_ssyt(8, 7).unwrap();
    assert!(report.all_matched(), "{}", report.render_table());
    let windows = report
        .instances
        .iter()
        .filter(|i| i.label.starts_with("constancy-window"))
        .count();
    assert!(windows > 0, "the constancy window must be exercised");
    println!(
        "criterion 4 (tableau counting vs oracle, <=8 / <=7): PASS ({} instances, {} window checks)",
        report.instances.len(),
        windows
    );
}

#[test]
fn criterion_05_three_point_closed_forms_n5_6() {
    let mut cache = cache();
    let report = verify_three_point(&mut cache, &[5, 6]).unwrap();
    assert_eq!(report.gating_mismatches(), 0, "{}", report.render_table());
    assert_eq!(report.skipped(), 0, "{}", report.render_table());
    let proved = report
        .instances
        .iter()
        .filter(|i| i.status == InstanceStatus::Proved)
        .count();
    assert_eq!(proved, 5 * (10 + 20), "five proved arrangements per triple");
    println!("criterion 5 (three-point closed forms, n=5,6): PASS ({proved} proved instances)");
}

#[test]
fn criterion_06_decreasing_vandermonde() {
    let mut cache = cache();
    let report = verify_decreasing(&mut cache, &[4, 5, 6, 7], &[2, 3, 4]).unwrap();
    assert!(report.all_matched(), "{}", report.render_table());
    println!(
        "criterion 6 (decreasing-run Vandermonde, n=4..7, r=2..4): PASS ({} instances)",
        report.instances.len()
    );
}

#[test]
fn criterion_07_lumping_queue_vs_generator() {
    let mut cache = cache();
    let mut sectors = mtasep::correlations::small_sectors(4, 7);
    sectors.push(Sector::distinct(5));
    let count = sectors.len();
    let report = verify_lumping(&mut cache, &sectors, 100_000).unwrap();
    assert!(report.all_matched(), "{}", report.render_table());
    println!("criterion 7 (lumping, {count} sectors): PASS");
}

#[test]
fn criterion_08_symmetry_suite() {
    let mut cache = cache();
    // The distributions the other criteria compute: full chains, the
    // lumping battery, and the banded projections of pair events.
    for n in 3..=7 {
        cache.get(&Sector::distinct(n)).unwrap();
    }
    for sector in mtasep::correlations::small_sectors(4, 7) {
        cache.get(&sector).unwrap();
    }
    for n in [6usize, 7] {
        for i in 1..n as u8 {
            for j in i + 1..=n as u8 {
                let (sector, _) = project_sector(n, &[i, j]).unwrap();
                cache.get(&sector).unwrap();
            }
        }
    }
    let report = verify_symmetries(&mut cache).unwrap();
    assert!(report.all_matched(), "{}", report.render_table());
    println!(
        "criterion 8 (rotation / particle-hole / site marginals): PASS ({} instances)",
        report.instances.len()
    );
}

#[test]
fn criterion_09_conjecture_battery_n_to_7() {
    let mut cache = cache();
    let ranges = ConjectureRanges::default();
    let mut tested = 0;
    for n in 3..=7 {
        for id in ConjectureId::ALL {
            let report = verify_conjecture(&mut cache, id, n, &ranges).unwrap();
            assert_eq!(
                report.mismatched(),
                0,
                "counterexample in {} at n={n}:\n{}",
                id.token(),
                report.render_table()
            );
            assert_eq!(report.skipped(), 0, "skipped instances at n={n}");
            tested += report.instances.len();
        }
    }
    assert!(tested > 1000, "battery should be exhaustive, got {tested}");
    println!(
        "criterion 9 (conjecture battery, n<=7): PASS ({tested} instances, 0 counterexamples)"
    );
}

/// The longer battery the command line exposes behind `--ignored`; matches
/// the desk-scale data range but is not gating.
#[test]
#[ignore]
fn conjecture_battery_n8_long() {
    let mut cache = cache();
    let ranges = ConjectureRanges::default();
    let mut tested = 0;
    for id in ConjectureId::ALL {
        let report = verify_conjecture(&mut cache, id, 8, &ranges).unwrap();
        assert_eq!(report.mismatched(), 0, "{}", report.render_table());
        tested += report.instances.len();
    }
    println!("long battery (n=8): PASS ({tested} instances)");
}

#[test]
fn criterion_10_direction_collinearity() {
    for n in 2..=10 {
        let closed = direction_closed(n).unwrap();
        let from_corr = direction_from_correlations(n).unwrap();
        assert!(
            exactly_collinear_positive(&closed, &from_corr),
            "n={n}: {:?} vs {:?}",
            closed.components,
            from_corr.components
        );
    }
    let d3 = direction_closed(3).unwrap();
    assert_eq!(d3.components, vec![rat(2, 1), rat(0, 1), rat(-2, 1)]);
    println!("criterion 10 (direction collinearity, n=2..10): PASS");
}

#[test]
fn criterion_11_core_growth() {
    // Fixed residue replay reaches the worked 4-core.
    let replayed = replay_growth(4, &[0, 2, 3, 1, 2, 3, 0, 1]).unwrap();
    assert_eq!(replayed.rows(), &[6, 3, 1, 1]);

    // Every intermediate shape of 10^4 random steps stays an n-core.
    for n in 2..=5u32 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + u64::from(n));
        let mut core = CorePartition::empty();
        for step in 0..10_000u32 {
            core = grow_step(&core, n, rng.gen_range(0..n));
            assert!(is_n_core(&core, n), "n={n} step={step}");
        }
    }

    // Shape distance medians strictly decrease over K = 10^2, 10^4, 10^6.
    let median = |k: u64| {
        let mut ds: Vec<f64> = (1..=20u64)
            .map(|seed| {
                let core = random_growth(4, k, seed).unwrap();
                shape_distance(&core, 4).unwrap()
            })
            .collect();
        ds.sort_by(f64::total_cmp);
        (ds[9] + ds[10]) / 2.0
    };
    let (m2, m4, m6) = (median(100), median(10_000), median(1_000_000));
    assert!(
        m6 < m4 && m4 < m2,
        "medians must decrease: {m2} !> {m4} !> {m6}"
    );
    println!(
        "criterion 11 (core growth): PASS (replay ok, 4x10^4 core checks, medians {m2:.4} > {m4:.4} > {m6:.4})"
    );
}

#[test]
fn criterion_12_monte_carlo() {
    // n = 10 distinct species: the union of all descent pairs at the first
    // two sites estimates P(w1 > w2); target 1/3 + 1/30.
    let sector = Sector::distinct(10);
    let target = (rat(1, 3) + rat(1, 30)).to_f64().unwrap();
    let patterns: Vec<PatternQuery> = (1..=10u8)
        .flat_map(|a| (1..a).map(move |b| PatternQuery::new(vec![(1, a), (2, b)])))
        .collect();
    let all: Vec<usize> = (0..patterns.len()).collect();
    let mut within = 0;
    for seed in 1..=20u64 {
        let stats = simulate(&sector, 280_000.0, 1_000.0, seed, &patterns).unwrap();
        assert!(
            stats.events >= 1_000_000,
            "seed {seed}: only {} events",
            stats.events
        );
        let (est, se) = stats.union_estimate(&all);
        if (est - target).abs() <= 3.0 * se {
            within += 1;
        }
    }
    assert!(
        within >= 18,
        "n=10 descent estimate: {within}/20 within 3 SE"
    );

    // n = 6: every adjacent-pair estimate against the exact enumerated
    // value, within 3 SE for at least 18 of 20 seeds per pair.
    let sector = Sector::distinct(6);
    let exact = stationary_from_queues(&sector, DEFAULT_QUEUE_BUDGET).unwrap();
    let patterns: Vec<PatternQuery> = (1..=6u8)
        .flat_map(|a| {
            (1..=6u8)
                .filter(move |&b| b != a)
                .map(move |b| PatternQuery::new(vec![(1, a), (2, b)]))
        })
        .collect();
    let targets: Vec<f64> = patterns
        .iter()
        .map(|p| marginal(&exact, p).unwrap().to_f64().unwrap())
        .collect();
    let mut per_pair = vec![0usize; patterns.len()];
    for seed in 1..=20u64 {
        let stats = simulate(&sector, 120_000.0, 1_000.0, seed, &patterns).unwrap();
        for (i, p) in stats.patterns.iter().enumerate() {
            if (p.estimate - targets[i]).abs() <= 3.0 * p.std_error {
                per_pair[i] += 1;
            }
        }
    }
    let worst = *per_pair.iter().min().unwrap();
    assert!(worst >= 18, "worst adjacent-pair coverage {worst}/20");
    println!(
        "criterion 12 (Monte Carlo): PASS (n=10 union {within}/20, n=6 worst pair {worst}/20)"
    );
}

/// The aggregate identities behind the criteria: the two-point split and
/// the thirteen three-point classes at n=6 against enumerated sums.
#[test]
fn aggregate_identities_n6() {
    let mut cache = cache();
    let report = verify_aggregates(&mut cache, 6).unwrap();
    assert_eq!(report.gating_mismatches(), 0, "{}", report.render_table());
    assert_eq!(report.skipped(), 0);
    // Conjectural classes are tracked separately but also match at n=6.
    assert_eq!(report.mismatched(), 0, "{}", report.render_table());
    let conjectural = report
        .instances
        .iter()
        .filter(|i| i.status == InstanceStatus::Conjectural && i.outcome == Outcome::Match)
        .count();
    assert_eq!(conjectural, 4);
    println!("aggregate identities at n=6: PASS");
}

/// Exactness guard: probabilities in every report are rational strings,
/// never rounded decimals.
#[test]
fn reports_carry_exact_rationals() {
    let mut cache = cache();
    let report = verify_two_point_adjacent(&mut cache, &[4]).unwrap();
    for i in &report.instances {
        assert!(i.expected.contains('/'), "{}", i.expected);
        let parts: Vec<&str> = i.expected.split('/').collect();
        assert_eq!(parts.len(), 2);
        parts[0].parse::<i128>().unwrap();
        parts[1].parse::<i128>().unwrap();
    }
    let json = report.to_json();
    assert!(json["instances"][0]["expected"].is_string());
    let _unused: Rational = rat(1, 2);
}
