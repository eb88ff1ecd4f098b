//! Agents of the review ecosystem.

use std::fmt;

use serde::{Deserialize, Serialize};

pub type ManuscriptId = u64;
pub type ReviewerId = usize;
pub type JournalId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quartile {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl Quartile {
    pub const ALL: [Quartile; 4] = [Quartile::Q1, Quartile::Q2, Quartile::Q3, Quartile::Q4];

    /// 0 for Q1 through 3 for Q4.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Next better quartile; Q1 has none.
    pub fn above(self) -> Option<Self> {
        self.index().checked_sub(1).and_then(Self::from_index)
    }

    /// Next worse quartile; Q4 has none.
    pub fn below(self) -> Option<Self> {
        Self::from_index(self.index() + 1)
    }

    pub fn label(self) -> &'static str {
        match self {
            Quartile::Q1 => "Q1",
            Quartile::Q2 => "Q2",
            Quartile::Q3 => "Q3",
            Quartile::Q4 => "Q4",
        }
    }
}

impl fmt::Display for Quartile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Lower quality bounds of Q1, Q2 and Q3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl Thresholds {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Self {
        Self {
            theta1,
            theta2,
            theta3,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.theta1, self.theta2, self.theta3]
    }

    pub fn is_strictly_ordered(&self) -> bool {
        self.theta1 > self.theta2 && self.theta2 > self.theta3
    }

    /// Quartile whose band contains `score`; band bounds are inclusive below.
    pub fn quartile_of(&self, score: f64) -> Quartile {
        if score >= self.theta1 {
            Quartile::Q1
        } else if score >= self.theta2 {
            Quartile::Q2
        } else if score >= self.theta3 {
            Quartile::Q3
        } else {
            Quartile::Q4
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Status {
    PendingReview,
    Scored,
    Accepted { journal: JournalId, issue: u32 },
    Retired,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manuscript {
    id: ManuscriptId,
    eta: f64,
    k_revisions: u32,
    rejections: u32,
    last_score: Option<f64>,
    born_issue: u32,
    status: Status,
}

impl Manuscript {
    pub fn new(id: ManuscriptId, eta: f64, born_issue: u32) -> Self {
        Self {
            id,
            eta: eta.max(0.0),
            k_revisions: 0,
            rejections: 0,
            last_score: None,
            born_issue,
            status: Status::PendingReview,
        }
    }

    pub fn id(&self) -> ManuscriptId {
        self.id
    }

    /// Intrinsic quality.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn k_revisions(&self) -> u32 {
        self.k_revisions
    }

    pub fn rejections(&self) -> u32 {
        self.rejections
    }

    pub fn last_score(&self) -> Option<f64> {
        self.last_score
    }

    pub fn born_issue(&self) -> u32 {
        self.born_issue
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn is_fresh(&self) -> bool {
        self.rejections == 0
    }

    pub(crate) fn record_score(&mut self, score: f64) {
        debug_assert!(!matches!(self.status, Status::Accepted { .. }));
        self.last_score = Some(score);
        self.status = Status::Scored;
    }

    pub(crate) fn accept(&mut self, journal: JournalId, issue: u32) {
        self.status = Status::Accepted { journal, issue };
    }

    pub(crate) fn reject(&mut self) {
        self.rejections += 1;
        self.status = Status::PendingReview;
    }

    pub(crate) fn retire(&mut self) {
        self.status = Status::Retired;
    }

    /// The only mutation of quality: add a revision gain, clamp at zero and
    /// count the revision.
    pub(crate) fn apply_revision(&mut self, gain: f64) {
        self.eta = (self.eta + gain).max(0.0);
        self.k_revisions += 1;
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Reviewer {
    pub id: ReviewerId,
    pub load_current_issue: u32,
    pub load_history: Vec<u32>,
}

impl Reviewer {
    pub fn new(id: ReviewerId) -> Self {
        Self {
            id,
            ..Self::default()
        }
    }

    /// Archive this issue's load and start the next issue from zero.
    pub fn close_issue(&mut self) {
        self.load_history.push(self.load_current_issue);
        self.load_current_issue = 0;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Journal {
    pub id: JournalId,
    /// `None` in the simplified system.
    pub quartile: Option<Quartile>,
    pub capacity: usize,
    /// `(issue, mean intrinsic quality)` for issues with at least one publication.
    pub quality_per_issue: Vec<(u32, f64)>,
    pub running_quality: f64,
}

impl Journal {
    pub fn new(id: JournalId, quartile: Option<Quartile>, capacity: usize) -> Self {
        Self {
            id,
            quartile,
            capacity,
            quality_per_issue: Vec::new(),
            running_quality: 0.0,
        }
    }

    pub fn latest_quality_in(&self, issue: u32) -> Option<f64> {
        self.quality_per_issue
            .last()
            .filter(|(i, _)| *i == issue)
            .map(|&(_, q)| q)
    }

    /// Record this issue's publications; an empty issue leaves the record untouched.
    pub(crate) fn publish(&mut self, issue: u32, etas: &[f64]) {
        if etas.is_empty() {
            return;
        }
        let mean = etas.iter().sum::<f64>() / etas.len() as f64;
        self.quality_per_issue.push((issue, mean));
        self.running_quality = mean;
    }
}
