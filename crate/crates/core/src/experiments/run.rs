use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{aggregate_rows, r12, ConfigEcho, ExperimentReport, TrialRow};
use crate::components::{
    distance_to_set, explore_trials, label_components, size_gap_count, w_set, HitEstimate,
};
use crate::error::{Error, Result};
use crate::hypercube::{CubeGraph, Vertex};
use crate::sampler::{default_p2, sample_edges, split_probability, SampleKey};
use crate::theory::{gw_extinction, second_component_bound, solve_y, subcritical_bound, TheoryValues};

/// Dispatches on `cfg.kind`.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.kind {
        ExperimentKind::Supercritical => run_supercritical(cfg),
        ExperimentKind::Subcritical => run_subcritical(cfg),
        ExperimentKind::Sprinkling => run_sprinkling(cfg),
        ExperimentKind::Gw => run_gw(cfg),
        ExperimentKind::Hitprob => run_hitprob(cfg),
    }
}

fn expect_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if cfg.kind != kind {
        return Err(Error::config(
            "kind",
            format!("expected a {kind} config, got {}", cfg.kind),
        ));
    }
    cfg.validate()
}

fn echo(cfg: &ExperimentConfig) -> ConfigEcho {
    ConfigEcho {
        kind: cfg.kind,
        d: cfg.d,
        c: cfg.c,
        eps: cfg.eps,
        p: cfg.p(),
        trials: cfg.trials,
        seed: cfg.seed,
        w_threshold: None,
        gap_lo: None,
        gap_hi: None,
        p2_exponent: None,
        p1: None,
        p2: None,
        progeny_cap: None,
    }
}

fn supercritical_theory(c: f64, d: u32) -> Result<TheoryValues> {
    TheoryValues::compute(Some(c), Some(d), None)
}

fn count_true(rows: &[TrialRow], f: impl Fn(&TrialRow) -> Option<bool>) -> f64 {
    rows.iter().filter(|r| f(r) == Some(true)).count() as f64
}

fn finish(
    config: ConfigEcho,
    theory: TheoryValues,
    summary: BTreeMap<String, f64>,
    rows: Vec<TrialRow>,
) -> ExperimentReport {
    let aggregates = aggregate_rows(config.kind, &rows);
    ExperimentReport {
        config,
        theory,
        summary: summary.into_iter().map(|(k, v)| (k, r12(v))).collect(),
        aggregates,
        rows,
    }
}

/// Giant component, second component, W-set density, size gap and W
/// coverage at `p = c/d`.
pub fn run_supercritical(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(cfg, ExperimentKind::Supercritical)?;
    let g = CubeGraph::new(cfg.d)?;
    let c = cfg.c.expect("validated");
    let p = cfg.p();
    let threshold = cfg.resolved_w_threshold();
    let (gap_lo, gap_hi) = cfg.resolved_gap_window()?;
    let theory = supercritical_theory(c, cfg.d)?;

    let rows = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<TrialRow> {
            let sample = sample_edges(&g, SampleKey::new(cfg.seed, t, 0), p)?;
            let lab = label_components(&g, &sample.open)?;
            let w = w_set(&lab, threshold)?;
            let max_dist_w = if w.members.is_empty() {
                None
            } else {
                Some(u64::from(distance_to_set(&g, &w.members)?.max))
            };
            Ok(TrialRow {
                l1: Some(lab.l1()),
                l2: Some(lab.l2()),
                n_components: Some(lab.component_count()),
                w_density: Some(r12(w.density)),
                gap_count: Some(if gap_lo <= gap_hi {
                    size_gap_count(&lab, gap_lo, gap_hi)?
                } else {
                    0
                }),
                max_dist_w,
                ..TrialRow::new(t)
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = g.vertex_count() as f64;
    let trials = rows.len() as f64;
    let y = theory.y.expect("c > 1");
    let mean_l1_fraction = rows.iter().map(|r| r.l1.unwrap() as f64 / n).sum::<f64>() / trials;
    let mean_w = rows.iter().map(|r| r.w_density.unwrap()).sum::<f64>() / trials;
    let mut summary = BTreeMap::new();
    summary.insert("mean_l1_fraction".into(), mean_l1_fraction);
    summary.insert("l1_fraction_deviation".into(), (mean_l1_fraction - y).abs());
    summary.insert("mean_w_density".into(), mean_w);
    summary.insert("w_density_deviation".into(), (mean_w - y).abs());
    summary.insert(
        "max_l2".into(),
        rows.iter().map(|r| r.l2.unwrap()).max().unwrap_or(0) as f64,
    );
    summary.insert(
        "gap_empty_trials".into(),
        rows.iter().filter(|r| r.gap_count == Some(0)).count() as f64,
    );
    summary.insert(
        "dist_within_two_trials".into(),
        rows.iter().filter(|r| matches!(r.max_dist_w, Some(m) if m <= 2)).count() as f64,
    );

    let mut config = echo(cfg);
    config.w_threshold = Some(threshold);
    config.gap_lo = Some(gap_lo);
    config.gap_hi = Some(gap_hi);
    Ok(finish(config, theory, summary, rows))
}

/// Largest component at `p = (1 - eps)/(d - 1)` against `9 ln n / eps^2`.
pub fn run_subcritical(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(cfg, ExperimentKind::Subcritical)?;
    let g = CubeGraph::new(cfg.d)?;
    let eps = cfg.eps.expect("validated");
    let p = cfg.p();
    let bound = subcritical_bound(cfg.d, eps)?;
    let theory = TheoryValues::compute(None, Some(cfg.d), Some(eps))?;

    let rows = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<TrialRow> {
            let sample = sample_edges(&g, SampleKey::new(cfg.seed, t, 0), p)?;
            let lab = label_components(&g, &sample.open)?;
            Ok(TrialRow {
                l1: Some(lab.l1()),
                l2: Some(lab.l2()),
                n_components: Some(lab.component_count()),
                exceeds_bound: Some(lab.l1() as f64 > bound),
                ..TrialRow::new(t)
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = BTreeMap::new();
    summary.insert("bound".into(), bound);
    summary.insert("exceed_count".into(), count_true(&rows, |r| r.exceeds_bound));
    summary.insert(
        "max_l1".into(),
        rows.iter().map(|r| r.l1.unwrap()).max().unwrap_or(0) as f64,
    );
    summary.insert(
        "mean_l1".into(),
        rows.iter().map(|r| r.l1.unwrap() as f64).sum::<f64>() / rows.len() as f64,
    );
    Ok(finish(echo(cfg), theory, summary, rows))
}

/// Two-round exposure: do the large components of the first round end up
/// in a single component once the sparse second round is added?
pub fn run_sprinkling(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(cfg, ExperimentKind::Sprinkling)?;
    let g = CubeGraph::new(cfg.d)?;
    let c = cfg.c.expect("validated");
    let p = cfg.p();
    let split = split_probability(p, default_p2(cfg.d, cfg.p2_exponent))
        .map_err(|e| Error::config("p2_exponent", e.to_string()))?;
    let threshold = cfg.resolved_w_threshold();
    let theory = supercritical_theory(c, cfg.d)?;

    let rows = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<TrialRow> {
            let key = SampleKey::new(cfg.seed, t, 1);
            let first = sample_edges(&g, key, split.p1)?;
            let second = sample_edges(&g, key.with_round(2), split.p2)?;
            let g1 = label_components(&g, &first.open)?;
            let w1 = w_set(&g1, threshold)?;
            let members: Vec<Vertex> = w1.members.iter().collect();
            let w1_labels: BTreeSet<u32> = members.iter().map(|&v| g1.label(v)).collect();

            let union = first.open.union(&second.open)?;
            let merged = label_components(&g, &union)?;
            let union_labels: BTreeSet<u32> = members.iter().map(|&v| merged.label(v)).collect();
            Ok(TrialRow {
                l1: Some(merged.l1()),
                n_components: Some(merged.component_count()),
                w1_size: Some(members.len() as u64),
                w1_components: Some(w1_labels.len() as u64),
                g1_merged: Some(w1_labels.len() <= 1),
                merge_ok: Some(union_labels.len() <= 1),
                union_open_edges: Some(union.count()),
                ..TrialRow::new(t)
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let draws = rows.len() as f64 * g.edge_count() as f64;
    let open: u64 = rows.iter().map(|r| r.union_open_edges.unwrap()).sum();
    let rate = open as f64 / draws;
    let se = (p * (1.0 - p) / draws).sqrt();
    let mut summary = BTreeMap::new();
    summary.insert("union_open_rate".into(), rate);
    summary.insert("union_open_rate_se".into(), se);
    summary.insert("union_open_rate_z".into(), (rate - p) / se);
    summary.insert("merge_ok_trials".into(), count_true(&rows, |r| r.merge_ok));
    summary.insert("g1_merged_trials".into(), count_true(&rows, |r| r.g1_merged));

    let mut config = echo(cfg);
    config.w_threshold = Some(threshold);
    config.p2_exponent = Some(cfg.p2_exponent);
    config.p1 = Some(split.p1);
    config.p2 = Some(split.p2);
    Ok(finish(config, theory, summary, rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct GwTrial {
    pub survived: bool,
    pub progeny: u64,
    pub generations: u64,
}

/// One Galton-Watson tree with `Bin(d, p)` offspring, grown a generation at
/// a time: a generation of size `z` has `Bin(d z, p)` children in total.
pub(crate) fn simulate_gw(d: u32, p: f64, progeny_cap: u64, key: SampleKey) -> Result<GwTrial> {
    let mut rng = ChaCha8Rng::seed_from_u64(key.generator().bits(0));
    let (mut z, mut progeny, mut generations) = (1u64, 1u64, 0u64);
    while z > 0 && progeny < progeny_cap {
        let children = Binomial::new(u64::from(d) * z, p)
            .map_err(|e| Error::input(format!("offspring law: {e}")))?
            .sample(&mut rng);
        z = children;
        progeny += children;
        generations += 1;
    }
    Ok(GwTrial {
        survived: progeny >= progeny_cap,
        progeny,
        generations,
    })
}

/// Empirical survival of `Bin(d, c/d)` Galton-Watson trees against the
/// exact extinction fixed point and, for `c > 1`, against `y(c)`.
pub fn run_gw(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(cfg, ExperimentKind::Gw)?;
    let p = cfg.p();
    let exact = gw_extinction(cfg.d, p)?;
    let mut theory = TheoryValues {
        c: cfg.c,
        d: Some(cfg.d),
        gw_survival: Some(exact.survival),
        ..Default::default()
    };
    if let Some(c) = cfg.c.filter(|&c| c > 1.0) {
        theory.y = Some(solve_y(c)?);
        theory.second_bound = Some(second_component_bound(c, cfg.d)?);
    }

    let rows = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<TrialRow> {
            let tr = simulate_gw(cfg.d, p, cfg.progeny_cap, SampleKey::new(cfg.seed, t, 0))?;
            Ok(TrialRow {
                survived: Some(tr.survived),
                progeny: Some(tr.progeny),
                generations: Some(tr.generations),
                ..TrialRow::new(t)
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let est = HitEstimate::from_counts(
        count_true(&rows, |r| r.survived) as u64,
        rows.len() as u64,
    );
    let mut summary = BTreeMap::new();
    summary.insert("survival_estimate".into(), est.estimate);
    summary.insert("std_error".into(), est.std_error);
    summary.insert("exact_survival".into(), exact.survival);
    if let Some(y) = theory.y {
        summary.insert("y".into(), y);
    }

    let mut config = echo(cfg);
    config.progeny_cap = Some(cfg.progeny_cap);
    Ok(finish(config, theory, summary, rows))
}

/// Fraction of capped explorations from vertex 0 that reach `w_threshold`
/// vertices.
pub fn run_hitprob(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(cfg, ExperimentKind::Hitprob)?;
    let g = CubeGraph::new(cfg.d)?;
    let p = cfg.p();
    let threshold = cfg.resolved_w_threshold();
    let mut theory = TheoryValues {
        c: cfg.c,
        d: Some(cfg.d),
        ..Default::default()
    };
    if let Some(c) = cfg.c.filter(|&c| c > 1.0) {
        theory = supercritical_theory(c, cfg.d)?;
    }

    let rows: Vec<TrialRow> = explore_trials(&g, p, threshold, cfg.trials, cfg.seed)?
        .into_iter()
        .enumerate()
        .map(|(t, r)| TrialRow {
            hit: Some(r.cap_hit),
            explored: Some(r.size),
            edges_queried: Some(r.edges_queried),
            ..TrialRow::new(t as u32)
        })
        .collect();
    let est = HitEstimate::from_counts(count_true(&rows, |r| r.hit) as u64, rows.len() as u64);
    let mut summary = BTreeMap::new();
    summary.insert("hit_estimate".into(), est.estimate);
    summary.insert("std_error".into(), est.std_error);
    if let Some(y) = theory.y {
        summary.insert("y".into(), y);
    }

    let mut config = echo(cfg);
    config.w_threshold = Some(threshold);
    Ok(finish(config, theory, summary, rows))
}
