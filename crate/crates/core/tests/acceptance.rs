//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p cubeperc --test acceptance`.

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use cubeperc::components::label_components;
use cubeperc::experiments::{run, to_json, ExperimentConfig, ExperimentKind, ExperimentReport};
use cubeperc::oracles::{count_subtrees, exact_percolation_distribution, harper_check, SmallGraph};
use cubeperc::sampler::{sample_edges, SampleKey};
use cubeperc::theory::{binom_tail_geq, chernoff_bound, gw_extinction, solve_y, tree_count_bound};
use cubeperc::CubeGraph;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    let spent = start.elapsed();
    if spent <= budget {
        Ok(())
    } else {
        Err(format!("took {spent:.2?}, budget {budget:?}"))
    }
}

/// y(2) by plain iteration of y <- 1 - exp(-2y), independent of bisection.
fn fixed_point_y2() -> f64 {
    let mut y = 1.0f64;
    loop {
        let next = 1.0 - (-2.0 * y).exp();
        if (next - y).abs() < 1e-16 {
            return next;
        }
        y = next;
    }
}

fn fixed_point_law() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for c in [1.01, 1.1, 1.5, 2.0, 3.0, 10.0] {
        let y = solve_y(c).map_err(|e| e.to_string())?;
        worst = worst.max((y - 1.0 + (-c * y).exp()).abs());
    }
    let y2 = solve_y(2.0).map_err(|e| e.to_string())?;
    let gap = (y2 - fixed_point_y2()).abs();
    within_budget(start, Duration::from_secs(1))?;
    check(
        worst <= 1e-12 && gap <= 1e-9,
        format!("max residual {worst:.2e}, |y(2) - iteration| = {gap:.2e}, y(2) = {y2:.10}"),
    )
}

fn gw_duality() -> Outcome {
    let start = Instant::now();
    let y2 = solve_y(2.0).map_err(|e| e.to_string())?;
    let survival = gw_extinction(1000, 2.0 / 1000.0).map_err(|e| e.to_string())?.survival;
    let limit_gap = (survival - y2).abs();

    // Extinction for Bin(3, 2/3): smallest root of (s - 1)(8s^2 + 20s - 1).
    let exact = 1.0 - (-20.0 + 432f64.sqrt()) / 16.0;
    let cfg = ExperimentConfig::new(ExperimentKind::Gw, 3, 100_000, 0).with_c(2.0);
    let report = run(&cfg).map_err(|e| e.to_string())?;
    let est = report.summary_value("survival_estimate").unwrap();
    let se = report.summary_value("std_error").unwrap();
    within_budget(start, Duration::from_secs(60))?;
    check(
        limit_gap <= 1e-3 && (est - exact).abs() <= 3.0 * se,
        format!(
            "|survival(1000, 0.002) - y(2)| = {limit_gap:.2e}; MC {est:.5} vs exact {exact:.5} (3 SE = {:.5})",
            3.0 * se
        ),
    )
}

fn harper() -> Outcome {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut violations = 0;
    for d in [2, 3, 4] {
        let report = harper_check(d).map_err(|e| e.to_string())?;
        violations += report.violations.len();
        details.push(format!("d={d}: {} subsets", report.subsets_checked));
    }
    within_budget(start, Duration::from_secs(60))?;
    check(
        violations == 0,
        format!("{violations} violations ({})", details.join(", ")),
    )
}

fn subtree_bound() -> Outcome {
    let mut worst_ratio = 0.0f64;
    for d in [3u32, 4] {
        let g = SmallGraph::from_cube(&CubeGraph::new(d).unwrap()).map_err(|e| e.to_string())?;
        for v in 0..g.vertex_count() {
            for k in 1..=5 {
                let t = count_subtrees(&g, v, k).map_err(|e| e.to_string())?;
                let bound = tree_count_bound(d, k).unwrap().loose();
                worst_ratio = worst_ratio.max(t as f64 / bound);
            }
        }
    }
    let q3 = SmallGraph::from_cube(&CubeGraph::new(3).unwrap()).unwrap();
    let t03 = count_subtrees(&q3, 0, 3).map_err(|e| e.to_string())?;
    check(
        worst_ratio <= 1.0 && t03 == 9,
        format!("max t(v,k)/(ed)^(k-1) = {worst_ratio:.4}, t(0,3) on Q^3 = {t03}"),
    )
}

fn sampler_ground_truth() -> Outcome {
    let start = Instant::now();
    let cube = CubeGraph::new(2).unwrap();
    let exact = exact_percolation_distribution(&SmallGraph::from_cube(&cube).unwrap(), 0.5)
        .map_err(|e| e.to_string())?;
    let expected = [1.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 5.0 / 16.0];
    let exact_ok = (1..=4).all(|l1| (exact.l1_probability(l1) - expected[l1 - 1]).abs() < 1e-15)
        && (exact.expected_l1 - 2.8125).abs() < 1e-15;

    let trials = 100_000u32;
    let mut counts = [0u64; 5];
    for t in 0..trials {
        let sample = sample_edges(&cube, SampleKey::new(0, t, 0), 0.5).map_err(|e| e.to_string())?;
        let lab = label_components(&cube, &sample.open).map_err(|e| e.to_string())?;
        counts[lab.l1() as usize] += 1;
    }
    let n = f64::from(trials);
    let mut worst_z = 0.0f64;
    for (l1, &count) in counts.iter().enumerate().skip(1) {
        let q = exact.l1_probability(l1);
        let se = (q * (1.0 - q) / n).sqrt();
        worst_z = worst_z.max((count as f64 / n - q).abs() / se);
    }
    within_budget(start, Duration::from_secs(60))?;
    check(
        exact_ok && worst_z <= 3.0,
        format!(
            "exact P[l1] = {:?}, E[l1] = {}; MC worst |z| = {worst_z:.2}",
            (1..=4).map(|l| exact.l1_probability(l)).collect::<Vec<_>>(),
            exact.expected_l1
        ),
    )
}

fn supercritical_config() -> ExperimentConfig {
    ExperimentConfig::new(ExperimentKind::Supercritical, 18, 20, 0).with_c(2.0)
}

fn supercritical_report() -> &'static Result<ExperimentReport, String> {
    static REPORT: OnceLock<Result<ExperimentReport, String>> = OnceLock::new();
    REPORT.get_or_init(|| run(&supercritical_config()).map_err(|e| e.to_string()))
}

fn supercritical_law() -> Outcome {
    let report = supercritical_report().as_ref().map_err(Clone::clone)?;
    let n = (1u64 << 18) as f64;
    let mean_fraction =
        report.rows.iter().map(|r| r.l1.unwrap() as f64 / n).sum::<f64>() / report.rows.len() as f64;
    let max_l2 = report.rows.iter().map(|r| r.l2.unwrap()).max().unwrap();
    let gap_empty = report.rows.iter().filter(|r| r.gap_count == Some(0)).count();
    let window = (report.config.gap_lo, report.config.gap_hi);
    check(
        (0.7168..=0.8768).contains(&mean_fraction)
            && max_l2 <= 180
            && gap_empty >= 18
            && window == (Some(59), Some(2621))
            && report.rows.len() == 20,
        format!(
            "mean l1/n = {mean_fraction:.4}, max l2 = {max_l2}, gap [59, 2621] empty in {gap_empty}/20"
        ),
    )
}

fn subcritical_law() -> Outcome {
    let cfg = ExperimentConfig::new(ExperimentKind::Subcritical, 18, 50, 0).with_eps(0.3);
    let report = run(&cfg).map_err(|e| e.to_string())?;
    let p_ok = (report.config.p - 0.7 / 17.0).abs() < 1e-15;
    let within = report.rows.iter().filter(|r| r.l1.unwrap() <= 1248).count();
    let max_l1 = report.rows.iter().map(|r| r.l1.unwrap()).max().unwrap();
    check(
        p_ok && within >= 49,
        format!("l1 <= 1248 in {within}/50 trials (max l1 = {max_l1})"),
    )
}

fn chernoff_domination() -> Outcome {
    let mut violations = 0;
    let mut checked = 0;
    let mut tightest = 0.0f64;
    for d in [5u64, 10, 20] {
        for eps in [0.1, 0.2, 0.3] {
            for k in (20..=400).step_by(20) {
                let tail = binom_tail_geq(k * (d - 1) + 1, (1.0 - eps) / (d - 1) as f64, k)
                    .map_err(|e| e.to_string())?;
                let bound = chernoff_bound(eps, k);
                checked += 1;
                tightest = tightest.max(tail / bound);
                if tail > bound {
                    violations += 1;
                }
            }
        }
    }
    check(
        violations == 0,
        format!("{violations} violations over {checked} grid points (max tail/bound = {tightest:.4})"),
    )
}

fn sprinkling() -> Outcome {
    let cfg = ExperimentConfig::new(ExperimentKind::Sprinkling, 16, 20, 0).with_c(2.0);
    let report = run(&cfg).map_err(|e| e.to_string())?;
    let p = 2.0 / 16.0;
    let rate = report.summary_value("union_open_rate").unwrap();
    let se = report.summary_value("union_open_rate_se").unwrap();
    let merged = report.rows.iter().filter(|r| r.merge_ok == Some(true)).count();
    check(
        (rate - p).abs() <= 3.0 * se && merged >= 18,
        format!(
            "union open rate {rate:.6} vs {p} (3 SE = {:.2e}), merge_ok in {merged}/20",
            3.0 * se
        ),
    )
}

fn w_set_coverage() -> Outcome {
    let report = supercritical_report().as_ref().map_err(Clone::clone)?;
    let y = solve_y(2.0).unwrap();
    let mean_w =
        report.rows.iter().map(|r| r.w_density.unwrap()).sum::<f64>() / report.rows.len() as f64;
    let covered = report
        .rows
        .iter()
        .filter(|r| matches!(r.max_dist_w, Some(m) if m <= 2))
        .count();
    check(
        report.config.w_threshold == Some(324) && (mean_w - y).abs() <= 0.08 && covered >= 18,
        format!("mean W density {mean_w:.4} vs y = {y:.4}, max dist <= 2 in {covered}/20"),
    )
}

fn determinism() -> Outcome {
    let first = supercritical_report().as_ref().map_err(Clone::clone)?;
    let second = run(&supercritical_config()).map_err(|e| e.to_string())?;
    let (a, b) = (to_json(first), to_json(&second));
    check(
        a.as_bytes() == b.as_bytes(),
        format!("two runs produce {} and {} byte JSON reports, identical: {}", a.len(), b.len(), a == b),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("fixed point y = 1 - exp(-cy)", fixed_point_law),
        ("Galton-Watson duality", gw_duality),
        ("Harper edge isoperimetry", harper),
        ("subtree count bound", subtree_bound),
        ("sampler/labeling ground truth", sampler_ground_truth),
        ("supercritical giant component", supercritical_law),
        ("subcritical component bound", subcritical_law),
        ("Chernoff domination", chernoff_domination),
        ("sprinkling coupling and merge", sprinkling),
        ("W-set density and coverage", w_set_coverage),
        ("report determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = criterion();
        let elapsed = start.elapsed();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!("[{tag}] {:>2}. {name}: {detail} ({elapsed:.2?})", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
