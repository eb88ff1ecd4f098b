//! Platform-mediated review: the platform scores every manuscript before any
//! journal sees it, then authors apply to two journals in adjacent quartiles.

use crate::error::Result;
use crate::model::Manuscript;

use super::{target_quartiles_novel, Application, Simulation};

pub(super) fn review_and_apply(
    sim: &mut Simulation,
    manuscripts: &mut [Manuscript],
    issue: u32,
) -> Result<(usize, Vec<Application>)> {
    let reviews = sim.platform_review(manuscripts, issue)?;
    let mut applications = Vec::with_capacity(2 * manuscripts.len());
    for m in manuscripts.iter() {
        let score = m.last_score().expect("platform review scores every manuscript");
        let (first, second) = target_quartiles_novel(score, m.rejections(), &sim.thresholds);
        for q in [first, second] {
            applications.push(Application {
                manuscript: m.id(),
                journal: sim.pick_in_quartile(q),
                score,
                issue,
            });
        }
    }
    Ok((reviews, applications))
}
