//! Data series behind each figure, produced from a run directory's config.
//!
//! Every figure re-runs what it needs from the manifest's effective config,
//! overriding only the system, submission volume or horizon the figure is
//! about. Volume changes keep the oversubscription ratio (see
//! [`SimConfig::scaled_to`]).

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{SimConfig, SystemKind};
use crate::error::{Error, Result};
use crate::exec::run_batch;
use crate::metrics::compute_issue_metrics;
use crate::output::{read_manifest, write_rows};
use crate::stochastic::{build_cdf, RngStream, DEFAULT_GRID_POINTS};
use crate::systems::{run_simulation, IssueLedger};

pub const FIGURE_IDS: [&str; 8] = ["1", "3a", "3b", "4", "5", "6", "7", "8"];

pub const FIG1_SAMPLES: usize = 4000;
/// Submission volumes on the x-axis of the volume figures.
pub const VOLUME_GRID: [usize; 5] = [1000, 2000, 3000, 4000, 5000];
pub const COMPARISON_N: usize = 3000;
pub const COMPARISON_ISSUES: u32 = 20;
pub const MATTHEW_N: usize = 10_000;
pub const MATTHEW_ISSUES: u32 = 40;
pub const MATTHEW_VOLUMES: [usize; 3] = [5000, 7000, 10_000];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig1Row {
    /// `grid` rows carry the tabulated curve, `sample` rows one draw each.
    pub kind: &'static str,
    pub eta: f64,
    pub pdf: Option<f64>,
    pub cdf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BurdenRow {
    pub system: SystemKind,
    pub n: usize,
    pub issue: u32,
    pub mean_reviews_per_reviewer: f64,
    pub backlog: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriesRow {
    pub system: SystemKind,
    pub n: usize,
    /// Submission at which the manuscript was accepted (1 = first try).
    pub tries: u32,
    pub accepted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuartileRow {
    pub system: SystemKind,
    pub issue: u32,
    pub q1_mean: Option<f64>,
    pub q2_mean: Option<f64>,
    pub q3_mean: Option<f64>,
    pub q4_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JournalQualityRow {
    pub n: usize,
    pub journal: usize,
    pub issue: u32,
    pub quality: f64,
}

pub fn fig1(cfg: &SimConfig) -> Result<Vec<Fig1Row>> {
    let table = build_cdf(cfg.dist, DEFAULT_GRID_POINTS)?;
    let mut rows: Vec<Fig1Row> = table
        .grid()
        .iter()
        .zip(table.cdf_values())
        .map(|(&eta, &cdf)| Fig1Row {
            kind: "grid",
            eta,
            pdf: Some(table.pdf(eta)),
            cdf: Some(cdf),
        })
        .collect();
    let mut rng = RngStream::new(cfg.seed, "quality");
    rows.extend((0..FIG1_SAMPLES).map(|_| Fig1Row {
        kind: "sample",
        eta: table.sample(&mut rng),
        pdf: None,
        cdf: None,
    }));
    Ok(rows)
}

fn variant(base: &SimConfig, system: SystemKind, n: usize, issues: u32) -> SimConfig {
    let mut cfg = base.scaled_to(n).with_system(system);
    cfg.n_issues = issues;
    cfg
}

/// Run every config, in order, on the batch executor.
fn run_all(configs: Vec<SimConfig>) -> Result<Vec<(SimConfig, Vec<IssueLedger>)>> {
    run_batch(configs, |cfg| run_simulation(&cfg).map(|out| (cfg, out.ledgers)))
        .into_iter()
        .collect()
}

const COMPARED: [SystemKind; 2] = [SystemKind::Regular, SystemKind::Novel];

/// Burden at the last issue against submission volume, both systems.
pub fn fig3a(base: &SimConfig) -> Result<Vec<BurdenRow>> {
    let configs = COMPARED
        .iter()
        .flat_map(|&s| VOLUME_GRID.map(|n| variant(base, s, n, COMPARISON_ISSUES)))
        .collect();
    let mut rows = Vec::new();
    for (cfg, ledgers) in run_all(configs)? {
        if let Some(last) = ledgers.last() {
            let m = compute_issue_metrics(last, cfg.n_reviewers)?;
            rows.push(BurdenRow {
                system: cfg.system,
                n: cfg.n_new_per_issue,
                issue: m.issue,
                mean_reviews_per_reviewer: m.mean_reviews_per_reviewer,
                backlog: m.backlog_size,
            });
        }
    }
    Ok(rows)
}

/// Burden per issue at the comparison volume, both systems.
pub fn fig3b(base: &SimConfig) -> Result<Vec<BurdenRow>> {
    let configs = COMPARED
        .iter()
        .map(|&s| variant(base, s, COMPARISON_N, COMPARISON_ISSUES))
        .collect();
    let mut rows = Vec::new();
    for (cfg, ledgers) in run_all(configs)? {
        for l in &ledgers {
            let m = compute_issue_metrics(l, cfg.n_reviewers)?;
            rows.push(BurdenRow {
                system: cfg.system,
                n: cfg.n_new_per_issue,
                issue: m.issue,
                mean_reviews_per_reviewer: m.mean_reviews_per_reviewer,
                backlog: m.backlog_size,
            });
        }
    }
    Ok(rows)
}

/// Run-total acceptances by submission count against volume, both systems.
pub fn fig4(base: &SimConfig) -> Result<Vec<TriesRow>> {
    let configs = COMPARED
        .iter()
        .flat_map(|&s| VOLUME_GRID.map(|n| variant(base, s, n, COMPARISON_ISSUES)))
        .collect();
    let mut rows = Vec::new();
    for (cfg, ledgers) in run_all(configs)? {
        let max_tries = cfg.max_resubmissions + 1;
        let mut counts = vec![0usize; max_tries as usize];
        for a in ledgers.iter().flat_map(|l| &l.acceptances) {
            if let Some(c) = counts.get_mut(a.rejections as usize) {
                *c += 1;
            }
        }
        rows.extend(counts.into_iter().enumerate().map(|(i, accepted)| TriesRow {
            system: cfg.system,
            n: cfg.n_new_per_issue,
            tries: i as u32 + 1,
            accepted,
        }));
    }
    Ok(rows)
}

/// Quartile mean quality per issue for one system at the comparison volume.
pub fn quartile_series(base: &SimConfig, system: SystemKind) -> Result<Vec<QuartileRow>> {
    let cfg = variant(base, system, COMPARISON_N, COMPARISON_ISSUES);
    let out = run_simulation(&cfg)?;
    out.ledgers
        .iter()
        .map(|l| {
            let q = compute_issue_metrics(l, cfg.n_reviewers)?.quartile_mean_quality;
            Ok(QuartileRow {
                system,
                issue: l.issue,
                q1_mean: q[0],
                q2_mean: q[1],
                q3_mean: q[2],
                q4_mean: q[3],
            })
        })
        .collect()
}

/// Every journal's running quality per issue, simplified system.
pub fn journal_quality_series(base: &SimConfig, volumes: &[usize]) -> Result<Vec<JournalQualityRow>> {
    let configs = volumes
        .iter()
        .map(|&n| variant(base, SystemKind::Simplified, n, MATTHEW_ISSUES))
        .collect();
    let mut rows = Vec::new();
    for (cfg, ledgers) in run_all(configs)? {
        for l in &ledgers {
            let mut records = l.journals.clone();
            records.sort_by_key(|r| r.journal);
            rows.extend(records.iter().map(|r| JournalQualityRow {
                n: cfg.n_new_per_issue,
                journal: r.journal,
                issue: l.issue,
                quality: r.running_quality,
            }));
        }
    }
    Ok(rows)
}

/// Write `fig<id>.csv` into `run_dir`, using the config recorded there.
pub fn write_figure(run_dir: &Path, id: &str) -> Result<PathBuf> {
    if !FIGURE_IDS.contains(&id) {
        return Err(Error::UnknownFigure(id.to_string(), FIGURE_IDS.join(", ")));
    }
    let base = read_manifest(run_dir)?.sim_config();
    let path = run_dir.join(format!("fig{id}.csv"));
    match id {
        "1" => write_rows(&path, &fig1(&base)?)?,
        "3a" => write_rows(&path, &fig3a(&base)?)?,
        "3b" => write_rows(&path, &fig3b(&base)?)?,
        "4" => write_rows(&path, &fig4(&base)?)?,
        "5" => write_rows(&path, &quartile_series(&base, SystemKind::Regular)?)?,
        "6" => write_rows(&path, &quartile_series(&base, SystemKind::Novel)?)?,
        "7" => write_rows(&path, &journal_quality_series(&base, &[MATTHEW_N])?)?,
        "8" => write_rows(&path, &journal_quality_series(&base, &MATTHEW_VOLUMES)?)?,
        _ => unreachable!("id checked above"),
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_has_grid_and_samples() {
        let rows = fig1(&SimConfig::default()).unwrap();
        assert_eq!(rows.iter().filter(|r| r.kind == "grid").count(), DEFAULT_GRID_POINTS);
        let samples: Vec<f64> = rows.iter().filter(|r| r.kind == "sample").map(|r| r.eta).collect();
        assert_eq!(samples.len(), FIG1_SAMPLES);
        assert!(samples.iter().all(|&e| (0.0..=10.0).contains(&e)));
    }

    #[test]
    fn unknown_figure_lists_valid_ids() {
        let dir = tempfile::tempdir().unwrap();
        let err = write_figure(dir.path(), "2").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("\"2\""));
        assert!(msg.contains("1, 3a, 3b, 4, 5, 6, 7, 8"));
    }

    #[test]
    fn missing_manifest_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let err = write_figure(dir.path(), "1").unwrap_err();
        assert!(matches!(&err, Error::MissingInput(p) if p.ends_with("manifest.json")));
    }

    #[test]
    fn volume_variants_stay_valid() {
        let base = SimConfig::default();
        for n in VOLUME_GRID.iter().chain(&MATTHEW_VOLUMES) {
            for s in [SystemKind::Novel, SystemKind::Regular, SystemKind::Simplified] {
                let cfg = variant(&base, s, *n, 1);
                assert!(crate::config::validate_config(&cfg).is_empty(), "{s} {n}");
            }
        }
    }
}
