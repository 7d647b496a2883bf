//! Command-line driver: reproducible verification runs, conjecture probes,
//! Monte Carlo simulation, and n-core growth, with machine-readable reports.
//!
//! Exit codes: 0 success / all checks pass, 1 a proved identity mismatched
//! (or a conjecture found a counterexample), 2 an enumeration budget was
//! exceeded, 3 invalid arguments.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use mtasep::correlations::{
    continuum_drift_report, small_sectors, two_point_scaled_matrix, verify_aggregates,
    verify_conjecture, verify_decreasing, verify_lumping, verify_ssyt, verify_symmetries,
    verify_three_point, verify_two_point_adjacent, verify_two_point_distance, ConjectureId,
    ConjectureRanges, DistCache, FormulaReport, PatternQuery,
};
use mtasep::limits::{
    boundary_runs, direction_closed, direction_from_correlations, exactly_collinear_positive,
    polyline_csv, random_growth, replay_growth, shape_distance, staircase, LimitCurve,
};
use mtasep::mlq::{Sector, DEFAULT_QUEUE_BUDGET};
use mtasep::tasep::{simulate, DEFAULT_STATE_BUDGET};

#[derive(Parser)]
#[command(
    name = "mtasep",
    version,
    about = "Exact enumeration, verification and simulation for the multispecies TASEP on a ring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args)]
struct OutputOpts {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (env MTASEP_WORKERS overrides the default).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyTarget {
    Ssyt,
    TwoPoint,
    Distance,
    ThreePoint,
    Decreasing,
    Symmetries,
    Lumping,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Check closed-form identities against exact enumeration.
    Verify {
        #[arg(value_enum)]
        target: VerifyTarget,
        /// Ring sizes to test (repeatable); sensible defaults per target.
        #[arg(long = "n")]
        ns: Vec<usize>,
        /// Largest two-column parameter for the ssyt target (three-column
        /// sweeps run one lower).
        #[arg(long, default_value_t = 8)]
        max: i64,
        /// Queue enumeration budget per call.
        #[arg(long, default_value_t = DEFAULT_QUEUE_BUDGET)]
        budget: u64,
        /// State budget for the exact chain solve (lumping target).
        #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
        state_budget: u64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Probe one conjecture exhaustively at a ring size; exit 0 means "no
    /// counterexample found in range", nothing stronger.
    Conjecture {
        /// Conjecture id: 7.4, 8.2, 8.3, 8.4 or 8.5.
        id: String,
        #[arg(long)]
        n: usize,
        /// Longest block for the append-above conjecture (8.3).
        #[arg(long, default_value_t = 3)]
        max_block: usize,
        /// Longest block for the remote-above conjecture (8.4).
        #[arg(long, default_value_t = 2)]
        max_remote_block: usize,
        /// Largest r+s for the two-block conjecture (8.5).
        #[arg(long, default_value_t = 4)]
        max_two_blocks: usize,
        #[arg(long, default_value_t = DEFAULT_QUEUE_BUDGET)]
        budget: u64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Continuous-time Monte Carlo with time-weighted pattern estimates.
    Simulate {
        /// Species counts, e.g. --sector 2,1,2.
        #[arg(long, value_delimiter = ',')]
        sector: Vec<u32>,
        /// Shorthand for n distinct species.
        #[arg(long)]
        distinct: Option<usize>,
        /// Simulated time horizon.
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = 0.0)]
        burn_in: f64,
        #[arg(long)]
        seed: u64,
        /// Pattern such as "1=3,2=1" (position=label pairs); repeatable.
        #[arg(long = "pattern", required = true)]
        patterns: Vec<String>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Grow n-cores, emit curves and boundaries, measure shape distance.
    Ncore {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 10_000)]
        steps: u64,
        /// Number of independent trajectories.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 1)]
        seed_base: u64,
        /// Emit the limit curve vertices as CSV and exit.
        #[arg(long)]
        curve: bool,
        /// Replay an explicit residue sequence, e.g. --replay 0,2,3,1.
        #[arg(long, value_delimiter = ',')]
        replay: Option<Vec<u32>>,
        /// Emit the first trajectory's scaled boundary as CSV.
        #[arg(long)]
        boundary: bool,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Limiting walk direction: closed form against the correlation sum.
    Psi {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: OutputOpts,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn init_workers(requested: Option<usize>) {
    let from_env = std::env::var("MTASEP_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    if let Some(n) = from_env.or(requested) {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

fn emit(text: String, out: &Option<PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("writing {path:?}: {e}")),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn reports_text(reports: &[FormulaReport], format: Format) -> String {
    match format {
        Format::Table => {
            let mut s = String::new();
            for r in reports {
                s.push_str(&r.render_table());
            }
            s
        }
        Format::Json => {
            let values: Vec<_> = reports.iter().map(|r| r.to_json()).collect();
            let mut s = serde_json::to_string_pretty(&values).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("report,label,expected,observed,outcome,status,band\n");
            for r in reports {
                for i in &r.instances {
                    s.push_str(&format!(
                        "{},{},{},{},{:?},{:?},{}\n",
                        r.id,
                        i.label.replace(',', ";"),
                        i.expected,
                        i.observed,
                        i.outcome,
                        i.status,
                        i.band.as_deref().unwrap_or("")
                    ));
                }
            }
            s
        }
    }
}

fn reports_exit_code(reports: &[FormulaReport]) -> u8 {
    if reports.iter().any(|r| r.gating_mismatches() > 0) {
        1
    } else if reports.iter().any(|r| r.skipped() > 0) {
        2
    } else {
        0
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Verify {
            target,
            ns,
            max,
            budget,
            state_budget,
            output,
        } => {
            init_workers(output.workers);
            run_verify(target, &ns, max, budget, state_budget, &output)
        }
        Command::Conjecture {
            id,
            n,
            max_block,
            max_remote_block,
            max_two_blocks,
            budget,
            output,
        } => {
            init_workers(output.workers);
            let id = ConjectureId::from_str(&id)?;
            if n < 3 {
                return Err("conjecture probes need --n of at least 3".into());
            }
            let ranges = ConjectureRanges {
                max_block,
                max_remote_block,
                max_two_blocks,
            };
            let mut cache = DistCache::new(budget);
            let report =
                verify_conjecture(&mut cache, id, n, &ranges).map_err(|e| e.to_string())?;
            let reports = [report];
            emit(reports_text(&reports, output.format), &output.out)?;
            for r in &reports {
                eprintln!("{}", r.summary());
            }
            Ok(if reports[0].mismatched() > 0 {
                1
            } else if reports[0].skipped() > 0 {
                2
            } else {
                0
            })
        }
        Command::Simulate {
            sector,
            distinct,
            horizon,
            burn_in,
            seed,
            patterns,
            output,
        } => {
            init_workers(output.workers);
            let sector = match (distinct, sector.is_empty()) {
                (Some(n), true) => Sector::distinct(n),
                (None, false) => Sector::new(sector).map_err(|e| e.to_string())?,
                _ => return Err("give exactly one of --sector or --distinct".into()),
            };
            let queries = patterns
                .iter()
                .map(|p| parse_pattern(p))
                .collect::<Result<Vec<_>, _>>()?;
            let stats =
                simulate(&sector, horizon, burn_in, seed, &queries).map_err(|e| e.to_string())?;
            let text = match output.format {
                Format::Csv => {
                    let mut s = String::from("pattern,estimate,stdError\n");
                    for p in &stats.patterns {
                        let pat: Vec<String> = p
                            .pattern
                            .assignments
                            .iter()
                            .map(|(pos, l)| format!("{pos}={l}"))
                            .collect();
                        s.push_str(&format!(
                            "{},{},{}\n",
                            pat.join(";"),
                            p.estimate,
                            p.std_error
                        ));
                    }
                    s
                }
                _ => {
                    let mut s =
                        serde_json::to_string_pretty(&stats.to_json()).expect("stats serialize");
                    s.push('\n');
                    s
                }
            };
            emit(text, &output.out)?;
            eprintln!(
                "simulated sector {} for time {} ({} events)",
                stats.sector, stats.horizon, stats.events
            );
            Ok(0)
        }
        Command::Ncore {
            n,
            steps,
            seeds,
            seed_base,
            curve,
            replay,
            boundary,
            output,
        } => {
            init_workers(output.workers);
            run_ncore(n, steps, seeds, seed_base, curve, replay, boundary, &output)
        }
        Command::Psi { n, output } => {
            init_workers(output.workers);
            if n < 2 {
                return Err("the direction vector needs --n of at least 2".into());
            }
            let closed = direction_closed(n).map_err(|e| e.to_string())?;
            let from_corr = direction_from_correlations(n).map_err(|e| e.to_string())?;
            let collinear = exactly_collinear_positive(&closed, &from_corr);
            let text = match output.format {
                Format::Json => {
                    let v = serde_json::json!({
                        "n": n,
                        "closedComponents": closed
                            .components
                            .iter()
                            .map(|c| c.to_string())
                            .collect::<Vec<_>>(),
                        "closedUnit": closed.unit,
                        "correlationComponents": from_corr
                            .components
                            .iter()
                            .map(|c| c.to_string())
                            .collect::<Vec<_>>(),
                        "exactlyCollinear": collinear,
                    });
                    let mut s = serde_json::to_string_pretty(&v).expect("serialize");
                    s.push('\n');
                    s
                }
                _ => {
                    let mut s = format!("direction vectors for n={n}\n");
                    s.push_str(&format!(
                        "  closed form (unnormalized): {:?}\n",
                        closed
                            .components
                            .iter()
                            .map(|c| c.to_string())
                            .collect::<Vec<_>>()
                    ));
                    s.push_str(&format!("  closed form (unit): {:?}\n", closed.unit));
                    s.push_str(&format!(
                        "  from correlations: {:?}\n",
                        from_corr
                            .components
                            .iter()
                            .map(|c| c.to_string())
                            .collect::<Vec<_>>()
                    ));
                    s.push_str(&format!(
                        "  exactly collinear, positive ratio: {collinear}\n"
                    ));
                    s
                }
            };
            emit(text, &output.out)?;
            Ok(u8::from(!collinear))
        }
    }
}

fn parse_pattern(text: &str) -> Result<PatternQuery, String> {
    let mut assignments = Vec::new();
    for part in text.split(',') {
        let (pos, label) = part
            .split_once('=')
            .ok_or_else(|| format!("pattern piece {part:?} is not position=label"))?;
        let pos: u32 = pos
            .trim()
            .parse()
            .map_err(|_| format!("bad position {pos:?}"))?;
        let label: u8 = label
            .trim()
            .parse()
            .map_err(|_| format!("bad label {label:?}"))?;
        assignments.push((pos, label));
    }
    Ok(PatternQuery::new(assignments))
}

fn run_verify(
    target: VerifyTarget,
    ns: &[usize],
    max: i64,
    budget: u64,
    state_budget: u64,
    output: &OutputOpts,
) -> Result<u8, String> {
    let mut cache = DistCache::new(budget);
    let pick = |default: &[usize]| -> Vec<usize> {
        if ns.is_empty() {
            default.to_vec()
        } else {
            ns.to_vec()
        }
    };
    let mut reports: Vec<FormulaReport> = Vec::new();
    let mut extra_text = String::new();

    let run_target = |target: VerifyTarget,
                      cache: &mut DistCache,
                      reports: &mut Vec<FormulaReport>,
                      extra_text: &mut String|
     -> Result<(), String> {
        match target {
            VerifyTarget::Ssyt => {
                reports.push(verify_ssyt(max, max - 1).map_err(|e| e.to_string())?);
            }
            VerifyTarget::TwoPoint => {
                let ns = pick(&[3, 4, 5, 6, 7]);
                reports.push(verify_two_point_adjacent(cache, &ns).map_err(|e| e.to_string())?);
                if output.format == Format::Table {
                    for &n in &ns {
                        if let Ok(matrix) = two_point_scaled_matrix(cache, n) {
                            extra_text.push_str(&format!(
                                "scaled adjacent-pair matrix n*C(n,2)*P for n={n}:\n"
                            ));
                            for row in matrix {
                                let cells: Vec<String> =
                                    row.iter().map(|v| v.to_string()).collect();
                                extra_text.push_str(&format!("  {}\n", cells.join("\t")));
                            }
                        }
                    }
                }
            }
            VerifyTarget::Distance => {
                let ns = pick(&[4, 5, 6]);
                reports.push(verify_two_point_distance(cache, &ns).map_err(|e| e.to_string())?);
            }
            VerifyTarget::ThreePoint => {
                let ns = pick(&[5, 6]);
                reports.push(verify_three_point(cache, &ns).map_err(|e| e.to_string())?);
            }
            VerifyTarget::Decreasing => {
                let ns = pick(&[4, 5, 6, 7]);
                reports.push(verify_decreasing(cache, &ns, &[2, 3, 4]).map_err(|e| e.to_string())?);
            }
            VerifyTarget::Lumping => {
                let species_cap = ns.first().copied().unwrap_or(4);
                let mut sectors = small_sectors(species_cap, 7);
                sectors.push(Sector::distinct(5));
                reports.push(
                    verify_lumping(cache, &sectors, state_budget).map_err(|e| e.to_string())?,
                );
            }
            VerifyTarget::Symmetries => {
                for n in pick(&[3, 4, 5]) {
                    let _ = cache.get(&Sector::distinct(n));
                }
                for sector in small_sectors(3, 6) {
                    let _ = cache.get(&sector);
                }
                reports.push(verify_symmetries(cache).map_err(|e| e.to_string())?);
            }
            VerifyTarget::All => unreachable!("expanded by caller"),
        }
        Ok(())
    };

    if target == VerifyTarget::All {
        for t in [
            VerifyTarget::Ssyt,
            VerifyTarget::TwoPoint,
            VerifyTarget::Distance,
            VerifyTarget::ThreePoint,
            VerifyTarget::Decreasing,
            VerifyTarget::Lumping,
        ] {
            run_target(t, &mut cache, &mut reports, &mut extra_text)?;
        }
        reports.push(verify_aggregates(&mut cache, 6).map_err(|e| e.to_string())?);
        reports.push(direction_report(2..=10));
        // Symmetries sweep everything the earlier targets enumerated.
        reports.push(verify_symmetries(&mut cache).map_err(|e| e.to_string())?);
        reports.push(continuum_drift_report().map_err(|e| e.to_string())?);
    } else {
        run_target(target, &mut cache, &mut reports, &mut extra_text)?;
    }

    let mut text = reports_text(&reports, output.format);
    if output.format == Format::Table {
        text.push_str(&extra_text);
    }
    emit(text, &output.out)?;
    for r in &reports {
        eprintln!("{}", r.summary());
    }
    Ok(reports_exit_code(&reports))
}

/// Collinearity of the two direction computations as a report.
fn direction_report(ns: std::ops::RangeInclusive<usize>) -> FormulaReport {
    let mut report = FormulaReport::new("direction", format!("n in {ns:?}"));
    for n in ns {
        let ok = match (direction_closed(n), direction_from_correlations(n)) {
            (Ok(a), Ok(b)) => exactly_collinear_positive(&a, &b),
            _ => false,
        };
        report.push_bool(format!("n={n} collinear"), ok);
    }
    report
}

#[allow(clippy::too_many_arguments)]
fn run_ncore(
    n: u32,
    steps: u64,
    seeds: u64,
    seed_base: u64,
    curve: bool,
    replay: Option<Vec<u32>>,
    boundary: bool,
    output: &OutputOpts,
) -> Result<u8, String> {
    if curve {
        let c = LimitCurve::new(n).map_err(|e| e.to_string())?;
        emit(polyline_csv(&c.vertices), &output.out)?;
        return Ok(0);
    }
    if let Some(residues) = replay {
        let core = replay_growth(n, &residues).map_err(|e| e.to_string())?;
        let text = match output.format {
            Format::Table => format!(
                "replayed {} residues at n={n}: rows {:?} ({} boxes)\n",
                residues.len(),
                core.rows(),
                core.boxes()
            ),
            _ => {
                let v = serde_json::json!({
                    "n": n,
                    "residues": residues,
                    "rows": core.rows(),
                    "boxes": core.boxes() as u64,
                });
                let mut s = serde_json::to_string_pretty(&v).expect("serialize");
                s.push('\n');
                s
            }
        };
        emit(text, &output.out)?;
        return Ok(0);
    }
    if boundary {
        let core = random_growth(n, steps, seed_base).map_err(|e| e.to_string())?;
        let scale = 1.0 / (core.boxes() as f64).sqrt();
        let pts: Vec<(f64, f64)> = staircase(&core)
            .into_iter()
            .map(|(x, y)| (x * scale, y * scale))
            .collect();
        emit(polyline_csv(&pts), &output.out)?;
        return Ok(0);
    }

    let mut trajectories = Vec::new();
    let mut distances = Vec::new();
    for seed in seed_base..seed_base + seeds {
        let core = random_growth(n, steps, seed).map_err(|e| e.to_string())?;
        let distance = shape_distance(&core, n).map_err(|e| e.to_string())?;
        let runs = boundary_runs(&core).len();
        distances.push(distance);
        trajectories.push(serde_json::json!({
            "seed": seed,
            "boxes": core.boxes() as u64,
            "rows": core.rows().len(),
            "boundaryRuns": runs,
            "distance": distance,
        }));
    }
    distances.sort_by(f64::total_cmp);
    let median = if distances.is_empty() {
        f64::NAN
    } else {
        let mid = distances.len() / 2;
        if distances.len() % 2 == 1 {
            distances[mid]
        } else {
            (distances[mid - 1] + distances[mid]) / 2.0
        }
    };
    let text = match output.format {
        Format::Csv => {
            let mut s = String::from("seed,boxes,distance\n");
            for t in &trajectories {
                s.push_str(&format!("{},{},{}\n", t["seed"], t["boxes"], t["distance"]));
            }
            s
        }
        _ => {
            let v = serde_json::json!({
                "n": n,
                "steps": steps,
                "trajectories": trajectories,
                "medianDistance": median,
            });
            let mut s = serde_json::to_string_pretty(&v).expect("serialize");
            s.push('\n');
            s
        }
    };
    emit(text, &output.out)?;
    eprintln!("n={n} steps={steps} seeds={seeds} median shape distance {median:.6}");
    Ok(0)
}
