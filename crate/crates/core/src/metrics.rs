//! Indicators computed from issue ledgers. Every function here is pure.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{JournalId, Quartile};
use crate::systems::IssueLedger;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssueMetrics {
    pub issue: u32,
    pub mean_reviews_per_reviewer: f64,
    /// Mean over the quartile's publishing journals of their mean published quality.
    pub quartile_mean_quality: [Option<f64>; 4],
    /// Acceptances keyed by submission count (rejections + 1).
    pub acceptances_by_submission_count: BTreeMap<u32, usize>,
    /// `None` when nothing was accepted.
    pub first_try_acceptance_fraction: Option<f64>,
    pub backlog_size: usize,
    pub accepted: usize,
}

pub fn compute_issue_metrics(ledger: &IssueLedger, reviewer_count: usize) -> Result<IssueMetrics> {
    if reviewer_count == 0 {
        return Err(Error::NoReviewers);
    }
    let mut histogram = BTreeMap::new();
    for a in &ledger.acceptances {
        *histogram.entry(a.rejections + 1).or_insert(0) += 1;
    }
    let accepted = ledger.acceptances.len();
    let first = histogram.get(&1).copied().unwrap_or(0);
    Ok(IssueMetrics {
        issue: ledger.issue,
        mean_reviews_per_reviewer: ledger.reviews as f64 / reviewer_count as f64,
        quartile_mean_quality: quartile_means(ledger),
        acceptances_by_submission_count: histogram,
        first_try_acceptance_fraction: (accepted > 0).then(|| first as f64 / accepted as f64),
        backlog_size: ledger.carried_out,
        accepted,
    })
}

fn quartile_means(ledger: &IssueLedger) -> [Option<f64>; 4] {
    let mut per_journal: BTreeMap<JournalId, (Quartile, f64, usize)> = BTreeMap::new();
    for a in &ledger.acceptances {
        let e = per_journal.entry(a.journal).or_insert((a.quartile, 0.0, 0));
        e.1 += a.eta;
        e.2 += 1;
    }
    let mut sums = [(0.0, 0usize); 4];
    for (q, total, count) in per_journal.into_values() {
        let s = &mut sums[q.index()];
        s.0 += total / count as f64;
        s.1 += 1;
    }
    sums.map(|(s, n)| (n > 0).then(|| s / n as f64))
}

/// Run-level share of acceptances that needed no prior rejection.
pub fn first_try_fraction(ledgers: &[IssueLedger]) -> Option<f64> {
    let (first, total) = ledgers
        .iter()
        .flat_map(|l| &l.acceptances)
        .fold((0usize, 0usize), |(f, t), a| (f + usize::from(a.rejections == 0), t + 1));
    (total > 0).then(|| first as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RejectionCeiling {
    pub max: u32,
    /// Set when the run accepted nothing; `max` is then 0.
    pub no_data: bool,
}

pub fn max_rejections_before_acceptance(ledgers: &[IssueLedger]) -> RejectionCeiling {
    let max = ledgers
        .iter()
        .flat_map(|l| &l.acceptances)
        .map(|a| a.rejections)
        .max();
    RejectionCeiling {
        max: max.unwrap_or(0),
        no_data: max.is_none(),
    }
}

/// Fraction of acceptances with at most `limit` prior rejections.
pub fn share_within_rejections(ledgers: &[IssueLedger], limit: u32) -> Option<f64> {
    let (within, total) = ledgers
        .iter()
        .flat_map(|l| &l.acceptances)
        .fold((0usize, 0usize), |(w, t), a| (w + usize::from(a.rejections <= limit), t + 1));
    (total > 0).then(|| within as f64 / total as f64)
}

/// Ranks starting at 1, ties get the average rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (Pearson on average ranks).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateCorrelation);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Running quality of every journal after `issue`, indexed by journal id.
pub fn journal_qualities_at(ledgers: &[IssueLedger], issue: u32) -> Option<Vec<f64>> {
    let ledger = ledgers.iter().find(|l| l.issue == issue)?;
    let mut records = ledger.journals.clone();
    records.sort_by_key(|r| r.journal);
    Some(records.iter().map(|r| r.running_quality).collect())
}

/// Rank persistence of journal quality between an early and a late issue.
pub fn matthew_correlation(ledgers: &[IssueLedger], early: u32, late: u32) -> Result<f64> {
    let a = journal_qualities_at(ledgers, early).ok_or(Error::MissingIssue(early))?;
    let b = journal_qualities_at(ledgers, late).ok_or(Error::MissingIssue(late))?;
    spearman(&a, &b)
}

/// Q1 ≥ Q2 ≥ Q3 ≥ Q4 over the quartiles that published.
pub fn quartiles_ordered(m: &IssueMetrics) -> bool {
    let present: Vec<f64> = m.quartile_mean_quality.iter().flatten().copied().collect();
    present.windows(2).all(|w| w[0] >= w[1])
}

/// Sample standard deviation of a quartile's mean quality over issues
/// `from..=to` (issues where the quartile published nothing are skipped).
pub fn quartile_volatility(metrics: &[IssueMetrics], q: Quartile, from: u32, to: u32) -> Option<f64> {
    let xs: Vec<f64> = metrics
        .iter()
        .filter(|m| (from..=to).contains(&m.issue))
        .filter_map(|m| m.quartile_mean_quality[q.index()])
        .collect();
    if xs.len() < 2 {
        return None;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    Some((xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt())
}

/// Shares of journals in the top band (within 5% of the best quality) and in
/// the bottom band (within 5% of the quality range above the worst).
pub fn stratification_shares(qualities: &[f64]) -> (f64, f64) {
    let max = qualities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = qualities.iter().copied().fold(f64::INFINITY, f64::min);
    let n = qualities.len() as f64;
    let top = qualities.iter().filter(|&&q| q >= 0.95 * max).count() as f64 / n;
    let low_cut = min + 0.05 * (max - min);
    let bottom = qualities.iter().filter(|&&q| q <= low_cut).count() as f64 / n;
    (top, bottom)
}

/// The six headline outputs of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Final-issue quartile means; NaN when a quartile published nothing.
    pub quartile_means: [f64; 4],
    /// Final-issue mean reviews per reviewer.
    pub burden: f64,
    /// Run-level first-try acceptance share; NaN when nothing was accepted.
    pub first_try: f64,
}

pub fn summarize(ledgers: &[IssueLedger], reviewer_count: usize) -> Result<RunSummary> {
    let Some(last) = ledgers.last() else {
        return Ok(RunSummary {
            quartile_means: [f64::NAN; 4],
            burden: f64::NAN,
            first_try: f64::NAN,
        });
    };
    let m = compute_issue_metrics(last, reviewer_count)?;
    Ok(RunSummary {
        quartile_means: m.quartile_mean_quality.map(|q| q.unwrap_or(f64::NAN)),
        burden: m.mean_reviews_per_reviewer,
        first_try: first_try_fraction(ledgers).unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::Acceptance;
    use proptest::prelude::*;

    fn acc(journal: usize, quartile: Quartile, eta: f64, rejections: u32) -> Acceptance {
        Acceptance {
            manuscript: 0,
            journal,
            quartile,
            eta,
            score: eta,
            rejections,
        }
    }

    fn ledger(reviews: usize, acceptances: Vec<Acceptance>) -> IssueLedger {
        IssueLedger {
            issue: 1,
            created: acceptances.len(),
            carried_in: 0,
            reviews,
            applications: Vec::new(),
            acceptances,
            carried_out: 0,
            retired: 0,
            thresholds: None,
            journals: Vec::new(),
        }
    }

    #[test]
    fn burden_is_assignments_per_reviewer() {
        let m = compute_issue_metrics(&ledger(18_000, vec![]), 500).unwrap();
        assert_eq!(m.mean_reviews_per_reviewer, 36.0);
        assert_eq!(m.first_try_acceptance_fraction, None);
        assert!(matches!(compute_issue_metrics(&ledger(1, vec![]), 0), Err(Error::NoReviewers)));
    }

    #[test]
    fn histogram_by_submission_count() {
        let l = ledger(
            0,
            vec![
                acc(0, Quartile::Q1, 1.0, 0),
                acc(0, Quartile::Q1, 1.0, 0),
                acc(0, Quartile::Q1, 1.0, 1),
                acc(0, Quartile::Q1, 1.0, 3),
            ],
        );
        let m = compute_issue_metrics(&l, 1).unwrap();
        let expected: BTreeMap<u32, usize> = [(1, 2), (2, 1), (4, 1)].into_iter().collect();
        assert_eq!(m.acceptances_by_submission_count, expected);
        assert_eq!(m.first_try_acceptance_fraction, Some(0.5));
    }

    #[test]
    fn all_first_try() {
        let l = ledger(0, vec![acc(0, Quartile::Q2, 3.0, 0), acc(1, Quartile::Q3, 2.0, 0)]);
        let m = compute_issue_metrics(&l, 1).unwrap();
        assert_eq!(m.first_try_acceptance_fraction, Some(1.0));
        let ceiling = max_rejections_before_acceptance(&[l]);
        assert_eq!(ceiling, RejectionCeiling { max: 0, no_data: false });
        assert!(max_rejections_before_acceptance(&[]).no_data);
    }

    #[test]
    fn quartile_means_average_journal_means() {
        let l = ledger(
            0,
            vec![
                acc(0, Quartile::Q1, 10.0, 0),
                acc(0, Quartile::Q1, 12.0, 0),
                acc(1, Quartile::Q1, 8.0, 0),
                acc(2, Quartile::Q3, 4.0, 0),
            ],
        );
        let m = compute_issue_metrics(&l, 1).unwrap();
        assert_eq!(m.quartile_mean_quality, [Some(9.5), None, Some(4.0), None]);
        assert!(quartiles_ordered(&m));
    }

    #[test]
    fn spearman_extremes() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!((spearman(&xs, &[10.0, 20.0, 30.0, 40.0, 50.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&xs, &[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(spearman(&xs, &[1.0; 5]), Err(Error::DegenerateCorrelation)));
        assert!(spearman(&xs, &[1.0]).is_err());
    }

    #[test]
    fn spearman_with_ties_matches_textbook() {
        // Hand-computed: ranks x = (1, 2.5, 2.5, 4), y = (1, 2, 3, 4).
        let rho = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let expected = 4.5 / (4.5f64 * 5.0).sqrt();
        assert!((rho - expected).abs() < 1e-12);
    }

    #[test]
    fn stratification_bands() {
        let q = [10.0, 9.6, 5.0, 1.0, 1.2, 1.1, 1.3, 1.0, 1.4, 7.0];
        let (top, bottom) = stratification_shares(&q);
        assert_eq!(top, 0.2);
        assert_eq!(bottom, 0.6);
    }

    proptest! {
        #[test]
        fn first_try_fraction_in_unit_interval(rs in proptest::collection::vec(0u32..6, 1..50)) {
            let l = ledger(0, rs.iter().map(|&r| acc(0, Quartile::Q4, 1.0, r)).collect());
            let f = compute_issue_metrics(&l, 3).unwrap().first_try_acceptance_fraction.unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
            let hist_total: usize = compute_issue_metrics(&l, 3).unwrap().acceptances_by_submission_count.values().sum();
            prop_assert_eq!(hist_total, rs.len());
        }

        #[test]
        fn spearman_bounded(xs in proptest::collection::vec(-10.0f64..10.0, 3..30)) {
            let ys: Vec<f64> = xs.iter().rev().map(|x| x * x).collect();
            if let Ok(r) = spearman(&xs, &ys) {
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
            }
        }
    }
}
