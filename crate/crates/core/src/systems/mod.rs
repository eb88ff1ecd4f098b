//! Issue loops of the three review systems.
//!
//! A [`Simulation`] owns all agents and one RNG stream per stochastic phase.
//! Each call to [`Simulation::step`] runs one issue of the configured system
//! and returns its [`IssueLedger`].

mod acceptance;
mod novel;
mod regular;
mod simplified;

use std::collections::BTreeMap;
use std::mem;

use serde::{Deserialize, Serialize};

pub use acceptance::{accept_applications, target_quartile_regular, target_quartiles_novel};

use crate::config::{
    quartile_partition, validate_config, SimConfig, SystemKind, PLATFORM_REVIEWS_NEW,
    PLATFORM_REVIEWS_REVISED,
};
use crate::error::{Error, Result};
use crate::model::{Journal, JournalId, Manuscript, ManuscriptId, Quartile, Reviewer, Thresholds};
use crate::review::{aggregate_score, assign_reviewers, revise, score_manuscript, update_thresholds};
use crate::stochastic::{build_cdf, QualityCdfTable, RngStream, DEFAULT_GRID_POINTS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Application {
    pub manuscript: ManuscriptId,
    pub journal: JournalId,
    pub score: f64,
    pub issue: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Acceptance {
    pub manuscript: ManuscriptId,
    pub journal: JournalId,
    /// Fixed quartile, or the rank band after this issue in the simplified system.
    pub quartile: Quartile,
    /// Intrinsic quality at acceptance.
    pub eta: f64,
    pub score: f64,
    /// Rejections before this acceptance.
    pub rejections: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub journal: JournalId,
    pub quartile: Quartile,
    pub publications: usize,
    pub mean_quality: Option<f64>,
    pub running_quality: f64,
}

/// Everything that happened in one issue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssueLedger {
    pub issue: u32,
    pub created: usize,
    pub carried_in: usize,
    /// Reviewer assignments made this issue.
    pub reviews: usize,
    pub applications: Vec<Application>,
    pub acceptances: Vec<Acceptance>,
    pub carried_out: usize,
    pub retired: usize,
    /// Thresholds after this issue's update; `None` for the simplified system.
    pub thresholds: Option<Thresholds>,
    pub journals: Vec<JournalRecord>,
}

impl IssueLedger {
    fn empty(issue: u32) -> Self {
        Self {
            issue,
            created: 0,
            carried_in: 0,
            reviews: 0,
            applications: Vec::new(),
            acceptances: Vec::new(),
            carried_out: 0,
            retired: 0,
            thresholds: None,
            journals: Vec::new(),
        }
    }

    /// `created + carried_in == accepted + carried_out + retired`.
    pub fn is_conserved(&self) -> bool {
        self.created + self.carried_in == self.acceptances.len() + self.carried_out + self.retired
    }
}

#[derive(Debug, Clone)]
struct Streams {
    quality: RngStream,
    noise: RngStream,
    revision: RngStream,
    assignment: RngStream,
    targeting: RngStream,
    estimate: RngStream,
}

impl Streams {
    fn new(seed: u64) -> Self {
        Self {
            quality: RngStream::new(seed, "quality"),
            noise: RngStream::new(seed, "noise"),
            revision: RngStream::new(seed, "revision"),
            assignment: RngStream::new(seed, "assignment"),
            targeting: RngStream::new(seed, "targeting"),
            estimate: RngStream::new(seed, "estimate"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: SimConfig,
    table: QualityCdfTable,
    issue: u32,
    next_id: ManuscriptId,
    journals: Vec<Journal>,
    /// Journal ids per quartile; empty for the simplified system.
    members: [Vec<JournalId>; 4],
    reviewers: Vec<Reviewer>,
    backlog: Vec<Manuscript>,
    thresholds: Thresholds,
    streams: Streams,
}

impl Simulation {
    /// Refuses configs with any violation from [`validate_config`].
    pub fn new(cfg: SimConfig) -> Result<Self> {
        let violations = validate_config(&cfg);
        if !violations.is_empty() {
            return Err(Error::InvalidConfig(violations));
        }
        Self::new_unchecked(cfg)
    }

    /// Skips config validation. Used for degenerate experiments such as
    /// unlimited capacity, which the validator rejects on purpose.
    pub fn new_unchecked(cfg: SimConfig) -> Result<Self> {
        let table = build_cdf(cfg.dist, DEFAULT_GRID_POINTS)?;
        let mut members: [Vec<JournalId>; 4] = Default::default();
        let journals = if cfg.system.uses_quartiles() {
            let sizes = quartile_partition(cfg.n_journals)?;
            let mut out = Vec::with_capacity(cfg.n_journals);
            for (q, &size) in Quartile::ALL.iter().zip(sizes.iter()) {
                for _ in 0..size {
                    let id = out.len();
                    members[q.index()].push(id);
                    out.push(Journal::new(id, Some(*q), cfg.capacity_per_journal));
                }
            }
            out
        } else {
            (0..cfg.n_journals)
                .map(|id| Journal::new(id, None, cfg.capacity_per_journal))
                .collect()
        };
        Ok(Self {
            table,
            issue: 0,
            next_id: 0,
            journals,
            members,
            reviewers: (0..cfg.n_reviewers).map(Reviewer::new).collect(),
            backlog: Vec::new(),
            thresholds: cfg.init_thresholds,
            streams: Streams::new(cfg.seed),
            cfg,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    /// Issues completed so far.
    pub fn issue(&self) -> u32 {
        self.issue
    }

    pub fn journals(&self) -> &[Journal] {
        &self.journals
    }

    pub fn reviewers(&self) -> &[Reviewer] {
        &self.reviewers
    }

    /// Rejected manuscripts waiting for the next issue.
    pub fn backlog(&self) -> &[Manuscript] {
        &self.backlog
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    pub fn quality_table(&self) -> &QualityCdfTable {
        &self.table
    }

    /// Run one issue of the configured system.
    pub fn step(&mut self) -> Result<IssueLedger> {
        let issue = self.issue + 1;
        let carried = mem::take(&mut self.backlog);
        let mut manuscripts = self.create_manuscripts(issue);
        let created = manuscripts.len();
        let carried_in = carried.len();
        manuscripts.extend(carried);

        let mut ledger = if manuscripts.is_empty() {
            IssueLedger::empty(issue)
        } else {
            let (reviews, applications) = match self.cfg.system {
                SystemKind::Novel => novel::review_and_apply(self, &mut manuscripts, issue)?,
                SystemKind::Regular => regular::review_and_apply(self, &mut manuscripts, issue)?,
                SystemKind::Simplified => {
                    simplified::review_and_apply(self, &mut manuscripts, issue)?
                }
            };
            let accepted = accept_applications(&applications, &self.priority_order());
            let mut ledger = IssueLedger::empty(issue);
            ledger.reviews = reviews;
            ledger.applications = applications;
            self.settle(manuscripts, &accepted, &mut ledger)?;
            ledger
        };
        ledger.created = created;
        ledger.carried_in = carried_in;

        if self.cfg.system.uses_quartiles() {
            self.thresholds = update_thresholds(&self.journals, self.thresholds, issue);
            ledger.thresholds = Some(self.thresholds);
        }
        let bands = self.quality_bands();
        for a in &mut ledger.acceptances {
            a.quartile = bands[a.journal];
        }
        ledger.journals = self
            .journals
            .iter()
            .map(|j| {
                let mean = j.latest_quality_in(issue);
                JournalRecord {
                    journal: j.id,
                    quartile: bands[j.id],
                    publications: ledger.acceptances.iter().filter(|a| a.journal == j.id).count(),
                    mean_quality: mean,
                    running_quality: j.running_quality,
                }
            })
            .collect();

        for r in &mut self.reviewers {
            r.close_issue();
        }
        self.issue = issue;
        Ok(ledger)
    }

    /// Run the configured number of issues.
    pub fn run(mut self) -> Result<RunOutput> {
        let mut ledgers = Vec::with_capacity(self.cfg.n_issues as usize);
        for _ in 0..self.cfg.n_issues {
            ledgers.push(self.step()?);
        }
        Ok(RunOutput {
            config: self.cfg,
            ledgers,
            journals: self.journals,
            reviewers: self.reviewers,
            backlog: self.backlog,
        })
    }

    #[cfg(test)]
    pub(crate) fn push_backlog(&mut self, manuscripts: Vec<Manuscript>) {
        self.next_id = self
            .next_id
            .max(manuscripts.iter().map(|m| m.id() + 1).max().unwrap_or(0));
        self.backlog.extend(manuscripts);
    }

    fn create_manuscripts(&mut self, issue: u32) -> Vec<Manuscript> {
        (0..self.cfg.n_new_per_issue)
            .map(|_| {
                let eta = self.table.sample(&mut self.streams.quality);
                let id = self.next_id;
                self.next_id += 1;
                Manuscript::new(id, eta, issue)
            })
            .collect()
    }

    /// Platform review: six reviewers per fresh manuscript, three per revised
    /// one whose new mean is blended with its previous score. All assignments
    /// precede all scoring. Returns the number of assignments.
    fn platform_review(&mut self, manuscripts: &mut [Manuscript], issue: u32) -> Result<usize> {
        let fresh: Vec<ManuscriptId> = manuscripts
            .iter()
            .filter(|m| m.last_score().is_none())
            .map(Manuscript::id)
            .collect();
        let revised: Vec<ManuscriptId> = manuscripts
            .iter()
            .filter(|m| m.last_score().is_some())
            .map(Manuscript::id)
            .collect();
        let rng = &mut self.streams.assignment;
        let mut assignment = assign_reviewers(&fresh, &mut self.reviewers, PLATFORM_REVIEWS_NEW, rng)?;
        assignment.extend(assign_reviewers(
            &revised,
            &mut self.reviewers,
            PLATFORM_REVIEWS_REVISED,
            rng,
        )?);
        for m in manuscripts.iter_mut() {
            let scores = self.score_by(m, &assignment[&m.id()], issue)?;
            let aggregate = aggregate_score(&scores, m.last_score())?;
            m.record_score(aggregate);
        }
        Ok(fresh.len() * PLATFORM_REVIEWS_NEW + revised.len() * PLATFORM_REVIEWS_REVISED)
    }

    fn score_by(&mut self, m: &Manuscript, reviewers: &[usize], issue: u32) -> Result<Vec<f64>> {
        reviewers
            .iter()
            .map(|&r| {
                score_manuscript(m, &self.reviewers[r], &self.cfg.noise, issue, &mut self.streams.noise)
                    .map(|s| s.value)
            })
            .collect()
    }

    fn pick_in_quartile(&mut self, q: Quartile) -> JournalId {
        let pool = &self.members[q.index()];
        pool[self.streams.targeting.index(pool.len())]
    }

    /// Acceptance priority: better quartile first, then higher running
    /// quality, then lower id.
    fn priority_order(&self) -> Vec<(JournalId, usize)> {
        let mut order: Vec<&Journal> = self.journals.iter().collect();
        order.sort_by(|a, b| {
            let qa = a.quartile.map_or(0, Quartile::index);
            let qb = b.quartile.map_or(0, Quartile::index);
            qa.cmp(&qb)
                .then(b.running_quality.total_cmp(&a.running_quality))
                .then(a.id.cmp(&b.id))
        });
        order.into_iter().map(|j| (j.id, j.capacity)).collect()
    }

    /// Quartile per journal id: the fixed membership, or for the simplified
    /// system the rank band by current running quality.
    fn quality_bands(&self) -> Vec<Quartile> {
        if self.cfg.system.uses_quartiles() {
            return self
                .journals
                .iter()
                .map(|j| j.quartile.expect("quartile systems assign every journal"))
                .collect();
        }
        let n = self.journals.len();
        let sizes = quartile_partition(n).unwrap_or_else(|_| {
            let mut s = [0; 4];
            s[..n].fill(1);
            s
        });
        let mut ranked: Vec<&Journal> = self.journals.iter().collect();
        ranked.sort_by(|a, b| b.running_quality.total_cmp(&a.running_quality).then(a.id.cmp(&b.id)));
        let mut bands = vec![Quartile::Q4; n];
        let mut rank = ranked.into_iter();
        for (q, size) in Quartile::ALL.iter().zip(sizes) {
            for j in rank.by_ref().take(size) {
                bands[j.id] = *q;
            }
        }
        bands
    }

    /// Publish accepted manuscripts, revise or retire the rest.
    fn settle(
        &mut self,
        manuscripts: Vec<Manuscript>,
        accepted: &BTreeMap<ManuscriptId, JournalId>,
        ledger: &mut IssueLedger,
    ) -> Result<()> {
        let issue = ledger.issue;
        let mut published: Vec<Vec<f64>> = vec![Vec::new(); self.journals.len()];
        for mut m in manuscripts {
            let score = m.last_score().unwrap_or(f64::NAN);
            match accepted.get(&m.id()) {
                Some(&journal) => {
                    published[journal].push(m.eta());
                    ledger.acceptances.push(Acceptance {
                        manuscript: m.id(),
                        journal,
                        quartile: Quartile::Q4,
                        eta: m.eta(),
                        score,
                        rejections: m.rejections(),
                    });
                    m.accept(journal, issue);
                }
                None => {
                    m.reject();
                    if m.rejections() > self.cfg.max_resubmissions {
                        m.retire();
                        ledger.retired += 1;
                    } else {
                        revise(&mut m, &self.cfg.revision, &mut self.streams.revision)?;
                        self.backlog.push(m);
                    }
                }
            }
        }
        ledger.carried_out = self.backlog.len();
        ledger.acceptances.sort_by_key(|a| a.manuscript);
        for (journal, etas) in self.journals.iter_mut().zip(&published) {
            journal.publish(issue, etas);
        }
        Ok(())
    }
}

/// Ledgers and final agent state of a complete run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: SimConfig,
    pub ledgers: Vec<IssueLedger>,
    pub journals: Vec<Journal>,
    pub reviewers: Vec<Reviewer>,
    pub backlog: Vec<Manuscript>,
}

/// Validate `cfg` and run it to completion.
pub fn run_simulation(cfg: &SimConfig) -> Result<RunOutput> {
    Simulation::new(cfg.clone())?.run()
}
