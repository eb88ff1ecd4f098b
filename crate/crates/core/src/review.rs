//! Review mechanics shared by every system: reviewer assignment, noisy
//! scoring, aggregation, revision and threshold maintenance.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;

use crate::config::{NoiseParams, RevisionParams};
use crate::error::{Error, Result};
use crate::model::{Journal, Manuscript, ManuscriptId, Quartile, Reviewer, ReviewerId, Thresholds};
use crate::stochastic::gaussian;

/// Gap kept between consecutive thresholds after an update.
pub const THRESHOLD_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReviewScore {
    pub manuscript: ManuscriptId,
    pub reviewer: ReviewerId,
    pub value: f64,
    pub issue: u32,
}

/// Reviewer ids per manuscript, in draw order.
pub type Assignment = BTreeMap<ManuscriptId, Vec<ReviewerId>>;

/// Draw `per_manuscript` distinct reviewers uniformly for each manuscript and
/// bump their loads. Manuscripts are served in slice order.
pub fn assign_reviewers<R: Rng + ?Sized>(
    manuscripts: &[ManuscriptId],
    reviewers: &mut [Reviewer],
    per_manuscript: usize,
    rng: &mut R,
) -> Result<Assignment> {
    if per_manuscript > reviewers.len() {
        return Err(Error::NotEnoughReviewers {
            wanted: per_manuscript,
            available: reviewers.len(),
        });
    }
    let mut out = Assignment::new();
    for &m in manuscripts {
        let picked: Vec<ReviewerId> = index::sample(rng, reviewers.len(), per_manuscript)
            .into_iter()
            .collect();
        for &r in &picked {
            reviewers[r].load_current_issue += 1;
        }
        out.insert(m, picked.iter().map(|&r| reviewers[r].id).collect());
    }
    Ok(out)
}

/// Variance of the multiplicative review noise, `beta * load^gamma`.
pub fn noise_variance(params: &NoiseParams, load: u32) -> Result<f64> {
    if load == 0 {
        return Err(Error::ZeroLoad);
    }
    Ok(params.beta * f64::from(load).powf(params.gamma))
}

/// `max(0, eta * (1 + delta))`.
pub fn noisy_score(eta: f64, delta: f64) -> f64 {
    (eta * (1.0 + delta)).max(0.0)
}

/// One reviewer's score; the reviewer's load must already hold every
/// assignment of the issue.
pub fn score_manuscript<R: Rng + ?Sized>(
    manuscript: &Manuscript,
    reviewer: &Reviewer,
    params: &NoiseParams,
    issue: u32,
    rng: &mut R,
) -> Result<ReviewScore> {
    let variance = noise_variance(params, reviewer.load_current_issue)?;
    let delta = gaussian(rng, 0.0, variance)?;
    Ok(ReviewScore {
        manuscript: manuscript.id(),
        reviewer: reviewer.id,
        value: noisy_score(manuscript.eta(), delta),
        issue,
    })
}

/// Mean of the fresh scores, averaged half and half with `prior` when the
/// manuscript has been scored before.
pub fn aggregate_score(scores: &[f64], prior: Option<f64>) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok(match prior {
        Some(p) => 0.5 * mean + 0.5 * p,
        None => mean,
    })
}

/// Expected revision gain at revision count `k`.
pub fn expected_gain(params: &RevisionParams, k: u32) -> f64 {
    params.mu * params.alpha.powi(k as i32)
}

/// Improve a rejected manuscript: `eta += y`, `y ~ N(mu alpha^k, sigma^2)`
/// with the pre-increment `k`. Returns the gain drawn.
pub fn revise<R: Rng + ?Sized>(
    manuscript: &mut Manuscript,
    params: &RevisionParams,
    rng: &mut R,
) -> Result<f64> {
    let mean = expected_gain(params, manuscript.k_revisions());
    let gain = gaussian(rng, mean, params.sigma * params.sigma)?;
    manuscript.apply_revision(gain);
    Ok(gain)
}

/// Each threshold becomes the lowest per-issue mean quality among its
/// quartile's journals that published in `issue`. Quartiles without
/// publications keep their threshold. Ordering is then repaired top-down.
pub fn update_thresholds(journals: &[Journal], current: Thresholds, issue: u32) -> Thresholds {
    let mut lowest = [f64::INFINITY; 3];
    for j in journals {
        let Some(q) = j.quartile else { continue };
        if q == Quartile::Q4 {
            continue;
        }
        if let Some(mean) = j.latest_quality_in(issue) {
            let slot = &mut lowest[q.index()];
            *slot = slot.min(mean);
        }
    }
    let mut theta = current.as_array();
    for (t, low) in theta.iter_mut().zip(lowest) {
        if low.is_finite() {
            *t = low;
        }
    }
    for i in 1..3 {
        if theta[i] >= theta[i - 1] {
            theta[i] = theta[i - 1] - THRESHOLD_EPSILON;
        }
    }
    Thresholds::new(theta[0], theta[1], theta[2])
}
