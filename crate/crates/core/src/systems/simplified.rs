//! Quartile-free variant: authors apply to the journals whose running quality
//! sits just above and just below their platform score.

use crate::error::Result;
use crate::model::{JournalId, Manuscript};

use super::{Application, Simulation};

pub(super) fn review_and_apply(
    sim: &mut Simulation,
    manuscripts: &mut [Manuscript],
    issue: u32,
) -> Result<(usize, Vec<Application>)> {
    let reviews = sim.platform_review(manuscripts, issue)?;
    let mut applications = Vec::with_capacity(2 * manuscripts.len());

    // First issue: every journal looks alike, so each manuscript lands at random.
    if sim.issue == 0 {
        let n = sim.journals.len();
        for m in manuscripts.iter() {
            applications.push(Application {
                manuscript: m.id(),
                journal: sim.streams.targeting.index(n),
                score: m.last_score().expect("scored"),
                issue,
            });
        }
        return Ok((reviews, applications));
    }

    let ladder = ascending_quality(sim);
    let qualities: Vec<f64> = ladder.iter().map(|&(_, q)| q).collect();
    for m in manuscripts.iter() {
        let score = m.last_score().expect("scored");
        for journal in nearest_pair(&qualities, score).map(|i| ladder[i].0) {
            applications.push(Application {
                manuscript: m.id(),
                journal,
                score,
                issue,
            });
        }
    }
    Ok((reviews, applications))
}

fn ascending_quality(sim: &Simulation) -> Vec<(JournalId, f64)> {
    let mut ladder: Vec<(JournalId, f64)> = sim
        .journals
        .iter()
        .map(|j| (j.id, j.running_quality))
        .collect();
    ladder.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    ladder
}

/// Positions in an ascending quality ladder (length ≥ 2) of the nearest
/// journal at or above `score` and the nearest below it. When one side is
/// empty the two nearest on the other side are used.
pub(crate) fn nearest_pair(ascending: &[f64], score: f64) -> [usize; 2] {
    let n = ascending.len();
    let above = ascending.partition_point(|&q| q < score);
    if above == n {
        [n - 1, n - 2]
    } else if above == 0 {
        [0, 1]
    } else {
        [above, above - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{SimConfig, SystemKind};
    use crate::systems::Simulation;

    #[test]
    fn nearest_pair_examples() {
        let q = [1.0, 2.0, 4.0, 7.0];
        assert_eq!(nearest_pair(&q, 3.0), [2, 1]);
        assert_eq!(nearest_pair(&q, 4.0), [2, 1]);
        assert_eq!(nearest_pair(&q, 9.0), [3, 2]);
        assert_eq!(nearest_pair(&q, 0.5), [0, 1]);
    }

    #[test]
    fn first_issue_spreads_manuscripts_uniformly() {
        let cfg = SimConfig {
            system: SystemKind::Simplified,
            n_new_per_issue: 10_000,
            n_journals: 100,
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(cfg).unwrap();
        let ledger = sim.step().unwrap();
        assert_eq!(ledger.applications.len(), 10_000);
        let mut counts = vec![0usize; 100];
        for a in &ledger.applications {
            counts[a.journal] += 1;
        }
        // Binomial(10000, 0.01): mean 100, sd ≈ 9.95; 5 sd band.
        assert!(counts.iter().all(|&c| (50..=150).contains(&c)), "{counts:?}");
    }

    #[test]
    fn later_issues_apply_twice() {
        let cfg = SimConfig {
            system: SystemKind::Simplified,
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(cfg).unwrap();
        sim.step().unwrap();
        let ledger = sim.step().unwrap();
        assert_eq!(ledger.applications.len(), 2 * (ledger.created + ledger.carried_in));
        assert!(ledger.thresholds.is_none());
    }
}
