use std::collections::BTreeMap;

use crate::model::{JournalId, ManuscriptId, Quartile, Thresholds};

use super::Application;

/// Quartiles a platform-scored manuscript applies to.
///
/// The first is the quartile containing the score. With at most one rejection
/// the author also tries one quartile higher; after two or more the author
/// settles for one lower. At the edges the neighbour on the other side is used.
pub fn target_quartiles_novel(
    score: f64,
    rejections: u32,
    thresholds: &Thresholds,
) -> (Quartile, Quartile) {
    let home = thresholds.quartile_of(score);
    let second = if rejections <= 1 {
        home.above().or(home.below())
    } else {
        home.below().or(home.above())
    };
    (home, second.expect("four quartiles always have a neighbour"))
}

/// Single quartile a regular-system author submits to, from a self-estimate.
/// After two or more rejections the author drops one quartile.
pub fn target_quartile_regular(estimate: f64, rejections: u32, thresholds: &Thresholds) -> Quartile {
    let home = thresholds.quartile_of(estimate);
    if rejections >= 2 {
        home.below().unwrap_or(home)
    } else {
        home
    }
}

/// Preferential admission.
///
/// Journals choose in `order`. Each ranks its applications by score (highest
/// first, ties by lower manuscript id) and fills up to its capacity, skipping
/// manuscripts a journal earlier in the order already took.
pub fn accept_applications(
    applications: &[Application],
    order: &[(JournalId, usize)],
) -> BTreeMap<ManuscriptId, JournalId> {
    let mut by_journal: BTreeMap<JournalId, Vec<&Application>> = BTreeMap::new();
    for a in applications {
        by_journal.entry(a.journal).or_default().push(a);
    }
    let mut accepted = BTreeMap::new();
    for &(journal, capacity) in order {
        let Some(apps) = by_journal.get_mut(&journal) else {
            continue;
        };
        apps.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.manuscript.cmp(&b.manuscript)));
        let mut taken = 0;
        for a in apps.iter() {
            if taken == capacity {
                break;
            }
            if accepted.contains_key(&a.manuscript) {
                continue;
            }
            accepted.insert(a.manuscript, journal);
            taken += 1;
        }
    }
    accepted
}
