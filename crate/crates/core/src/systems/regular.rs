//! Journal-mediated review: each author guesses the manuscript's quality,
//! submits to one journal, and that journal invites two reviewers.

use crate::config::JOURNAL_REVIEWS;
use crate::error::Result;
use crate::model::{Manuscript, ManuscriptId};
use crate::review::{aggregate_score, assign_reviewers};
use crate::stochastic::gaussian;

use super::{target_quartile_regular, Application, Simulation};

pub(super) fn review_and_apply(
    sim: &mut Simulation,
    manuscripts: &mut [Manuscript],
    issue: u32,
) -> Result<(usize, Vec<Application>)> {
    let estimate_variance = sim.cfg.author_estimate_sigma.powi(2);
    let mut targets = Vec::with_capacity(manuscripts.len());
    for m in manuscripts.iter() {
        let error = gaussian(&mut sim.streams.estimate, 0.0, estimate_variance)?;
        let estimate = m.eta() * (1.0 + error);
        let q = target_quartile_regular(estimate, m.rejections(), &sim.thresholds);
        targets.push(sim.pick_in_quartile(q));
    }

    let ids: Vec<ManuscriptId> = manuscripts.iter().map(Manuscript::id).collect();
    let assignment = assign_reviewers(
        &ids,
        &mut sim.reviewers,
        JOURNAL_REVIEWS,
        &mut sim.streams.assignment,
    )?;

    let mut applications = Vec::with_capacity(manuscripts.len());
    for (m, journal) in manuscripts.iter_mut().zip(targets) {
        let scores = sim.score_by(m, &assignment[&m.id()], issue)?;
        // A new journal starts from scratch; earlier reports are not shared.
        let score = aggregate_score(&scores, None)?;
        m.record_score(score);
        applications.push(Application {
            manuscript: m.id(),
            journal,
            score,
            issue,
        });
    }
    Ok((ids.len() * JOURNAL_REVIEWS, applications))
}

#[cfg(test)]
mod tests {
    use crate::config::{SimConfig, SystemKind};
    use crate::model::Manuscript;
    use crate::systems::Simulation;

    fn regular() -> SimConfig {
        SimConfig::default().with_system(SystemKind::Regular)
    }

    #[test]
    fn fresh_issue_burden() {
        let mut sim = Simulation::new(regular()).unwrap();
        let ledger = sim.step().unwrap();
        assert_eq!(ledger.reviews, 6000);
        assert_eq!(ledger.reviews as f64 / 500.0, 12.0);
        assert_eq!(ledger.applications.len(), 3000);
    }

    #[test]
    fn backlog_doubles_burden() {
        let mut sim = Simulation::new(regular()).unwrap();
        let carried: Vec<Manuscript> = (0..3000)
            .map(|i| {
                let mut m = Manuscript::new(1_000_000 + i, 2.0, 0);
                m.reject();
                m
            })
            .collect();
        sim.push_backlog(carried);
        let ledger = sim.step().unwrap();
        assert_eq!(ledger.carried_in, 3000);
        assert_eq!(ledger.reviews as f64 / 500.0, 24.0);
    }

    #[test]
    fn one_submission_per_manuscript() {
        let mut sim = Simulation::new(regular()).unwrap();
        sim.step().unwrap();
        let ledger = sim.step().unwrap();
        let mut ids: Vec<u64> = ledger.applications.iter().map(|a| a.manuscript).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), ledger.applications.len());
    }
}
