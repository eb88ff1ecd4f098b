//! Oracles shared by the integration targets. Nothing here calls the
//! simulator's own acceptance or ranking code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use peerflow::config::SimConfig;
use peerflow::stochastic::{build_cdf, RngStream, DEFAULT_GRID_POINTS};
use peerflow::systems::IssueLedger;
use peerflow::{Simulation, SystemKind};

/// Every Gaussian variance of `cfg` set to zero.
pub fn noiseless(mut cfg: SimConfig) -> SimConfig {
    cfg.noise.beta = 0.0;
    cfg.revision.sigma = 0.0;
    cfg.author_estimate_sigma = 0.0;
    cfg
}

pub fn tiny(system: SystemKind, seed: u64) -> SimConfig {
    SimConfig {
        n_new_per_issue: 30,
        n_journals: 4,
        n_reviewers: 20,
        capacity_per_journal: 4,
        n_issues: 5,
        system,
        seed,
        ..SimConfig::default()
    }
}

pub fn run_unchecked(cfg: &SimConfig) -> Vec<IssueLedger> {
    Simulation::new_unchecked(cfg.clone())
        .expect("buildable config")
        .run()
        .expect("run completes")
        .ledgers
}

/// Qualities the simulator should have drawn at issue 1, straight from the
/// labelled stream.
pub fn first_issue_qualities(cfg: &SimConfig) -> Vec<f64> {
    let table = build_cdf(cfg.dist, DEFAULT_GRID_POINTS).unwrap();
    let mut rng = RngStream::new(cfg.seed, "quality");
    (0..cfg.n_new_per_issue).map(|_| table.sample(&mut rng)).collect()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Of `candidates` (id, value), the size-`k` subset with the largest total,
/// found by trying every subset. Values are assumed distinct.
pub fn best_subset(candidates: &[(u64, f64)], k: usize) -> BTreeSet<u64> {
    let k = k.min(candidates.len());
    subsets(candidates.len(), k)
        .into_iter()
        .max_by(|a, b| {
            let sa: f64 = a.iter().map(|&i| candidates[i].1).sum();
            let sb: f64 = b.iter().map(|&i| candidates[i].1).sum();
            sa.total_cmp(&sb)
        })
        .map(|s| s.into_iter().map(|i| candidates[i].0).collect())
        .unwrap_or_default()
}

/// Replays every issue's admissions: journals choose in order of quartile,
/// then previous running quality (descending), then id; each must have
/// taken the best-scoring subset of the applicants still free.
pub fn check_admissions(system: SystemKind, capacity: usize, ledgers: &[IssueLedger]) -> Result<(), String> {
    let mut prev_quality: BTreeMap<usize, f64> = BTreeMap::new();
    for l in ledgers {
        let journals: Vec<usize> = l.journals.iter().map(|j| j.journal).collect();
        let rank = |j: usize| -> usize {
            if system == SystemKind::Simplified {
                0
            } else {
                l.journals.iter().find(|r| r.journal == j).unwrap().quartile.index()
            }
        };
        let mut order = journals.clone();
        order.sort_by(|&a, &b| {
            let qa = prev_quality.get(&a).copied().unwrap_or(0.0);
            let qb = prev_quality.get(&b).copied().unwrap_or(0.0);
            rank(a).cmp(&rank(b)).then(qb.total_cmp(&qa)).then(a.cmp(&b))
        });

        let accepted: BTreeMap<u64, usize> = l.acceptances.iter().map(|a| (a.manuscript, a.journal)).collect();
        let mut taken: BTreeSet<u64> = BTreeSet::new();
        for j in order {
            let free: Vec<(u64, f64)> = l
                .applications
                .iter()
                .filter(|a| a.journal == j && !taken.contains(&a.manuscript))
                .map(|a| (a.manuscript, a.score))
                .collect();
            let expected = best_subset(&free, capacity);
            let got: BTreeSet<u64> = accepted.iter().filter(|(_, &jj)| jj == j).map(|(&m, _)| m).collect();
            if expected != got {
                return Err(format!(
                    "issue {} journal {j}: expected {expected:?}, simulator took {got:?}",
                    l.issue
                ));
            }
            taken.extend(got);
        }
        for r in &l.journals {
            prev_quality.insert(r.journal, r.running_quality);
        }
    }
    Ok(())
}

/// With no noise a fresh manuscript's score is its quality (up to rounding in
/// the mean of identical scores).
pub fn first_issue_scores_equal_quality(ledgers: &[IssueLedger]) -> Result<(), String> {
    let Some(first) = ledgers.first() else {
        return Ok(());
    };
    for a in &first.acceptances {
        if (a.score - a.eta).abs() > 1e-12 * a.eta.max(1.0) {
            return Err(format!("manuscript {}: score {} vs quality {}", a.manuscript, a.score, a.eta));
        }
    }
    Ok(())
}

/// Capacity that can never bind and the resulting guarantees: everything
/// published first try at its drawn quality.
pub fn check_unlimited_capacity(system: SystemKind, seed: u64) -> Result<(), String> {
    let mut cfg = noiseless(tiny(system, seed));
    cfg.n_issues = 3;
    cfg.capacity_per_journal = cfg.n_new_per_issue * cfg.n_issues as usize;
    let ledgers = run_unchecked(&cfg);
    for l in &ledgers {
        if l.acceptances.len() != cfg.n_new_per_issue {
            return Err(format!("{system} issue {}: {} of {} accepted", l.issue, l.acceptances.len(), cfg.n_new_per_issue));
        }
        if let Some(a) = l.acceptances.iter().find(|a| a.rejections != 0) {
            return Err(format!("{system}: manuscript {} needed {} rejections", a.manuscript, a.rejections));
        }
        if l.carried_out != 0 {
            return Err(format!("{system} issue {}: backlog {}", l.issue, l.carried_out));
        }
    }
    let mut drawn = first_issue_qualities(&cfg);
    let mut published: Vec<f64> = ledgers[0].acceptances.iter().map(|a| a.eta).collect();
    drawn.sort_by(f64::total_cmp);
    published.sort_by(f64::total_cmp);
    if drawn != published {
        return Err(format!("{system}: published qualities differ from drawn ones"));
    }
    first_issue_scores_equal_quality(&ledgers)
}

/// Finite capacity on a small instance: issue 1 admissions are the
/// top-quality slices, later issues the top-score slices.
pub fn check_finite_capacity(system: SystemKind, seed: u64) -> Result<(), String> {
    let cfg = noiseless(tiny(system, seed));
    let ledgers = run_unchecked(&cfg);
    first_issue_scores_equal_quality(&ledgers)?;
    check_admissions(system, cfg.capacity_per_journal, &ledgers)?;
    let total: usize = ledgers.iter().map(|l| l.acceptances.len()).sum();
    if total == 0 {
        return Err(format!("{system}: nothing published"));
    }
    Ok(())
}
