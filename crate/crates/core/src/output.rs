//! On-disk artifacts of a run: CSV series, the ledger record and the manifest.
//!
//! | file               | one row per                                       |
//! |--------------------|---------------------------------------------------|
//! | issue_metrics.csv  | issue                                             |
//! | ledgers.csv        | issue summary, acceptance or journal record       |
//! | journals.csv       | (journal, issue)                                  |
//! | manifest.json      | -                                                 |
//!
//! Floats are written in shortest round-trip form, so reading `ledgers.csv`
//! back reproduces every metric bit for bit. Empty cells mean "no value".

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ConfigFile, SimConfig};
use crate::error::{Error, Result};
use crate::metrics::{compute_issue_metrics, IssueMetrics};
use crate::model::{Quartile, Thresholds};
use crate::systems::{Acceptance, IssueLedger, JournalRecord, RunOutput};

pub const ISSUE_METRICS_CSV: &str = "issue_metrics.csv";
pub const LEDGERS_CSV: &str = "ledgers.csv";
pub const JOURNALS_CSV: &str = "journals.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write serializable rows with a header taken from the row type.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    finish(w, path)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Wide per-issue table. `tries_k` counts acceptances at submission `k`;
/// columns run to `max_tries` so every file of a config has the same shape.
pub fn write_issue_metrics(path: &Path, ledgers: &[IssueLedger], reviewers: usize, max_tries: u32) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header: Vec<String> = [
        "issue",
        "reviews",
        "mean_reviews_per_reviewer",
        "q1_mean",
        "q2_mean",
        "q3_mean",
        "q4_mean",
        "accepted",
        "first_try_fraction",
        "backlog",
        "created",
        "carried_in",
        "retired",
        "theta1",
        "theta2",
        "theta3",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=max_tries).map(|k| format!("tries_{k}")));
    w.write_record(&header)?;

    for l in ledgers {
        let m = compute_issue_metrics(l, reviewers)?;
        let t = l.thresholds.map(|t| t.as_array());
        let mut row = vec![
            m.issue.to_string(),
            l.reviews.to_string(),
            m.mean_reviews_per_reviewer.to_string(),
        ];
        row.extend(m.quartile_mean_quality.iter().map(|q| cell(*q)));
        row.push(m.accepted.to_string());
        row.push(cell(m.first_try_acceptance_fraction));
        row.push(m.backlog_size.to_string());
        row.push(l.created.to_string());
        row.push(l.carried_in.to_string());
        row.push(l.retired.to_string());
        for i in 0..3 {
            row.push(cell(t.map(|t| t[i])));
        }
        for k in 1..=max_tries {
            row.push(m.acceptances_by_submission_count.get(&k).copied().unwrap_or(0).to_string());
        }
        w.write_record(&row)?;
    }
    finish(w, path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Issue,
    Accept,
    Journal,
}

/// Long-format ledger row; which columns are filled depends on `kind`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LedgerRow {
    pub kind: Option<RowKind>,
    pub issue: u32,
    pub created: Option<usize>,
    pub carried_in: Option<usize>,
    pub reviews: Option<usize>,
    pub applications: Option<usize>,
    pub carried_out: Option<usize>,
    pub retired: Option<usize>,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
    pub theta3: Option<f64>,
    pub manuscript: Option<u64>,
    pub journal: Option<usize>,
    pub quartile: Option<Quartile>,
    pub eta: Option<f64>,
    pub score: Option<f64>,
    pub rejections: Option<u32>,
    pub publications: Option<usize>,
    pub mean_quality: Option<f64>,
    pub running_quality: Option<f64>,
}

pub fn ledger_rows(ledgers: &[IssueLedger]) -> Vec<LedgerRow> {
    let mut rows = Vec::new();
    for l in ledgers {
        let t = l.thresholds;
        rows.push(LedgerRow {
            kind: Some(RowKind::Issue),
            issue: l.issue,
            created: Some(l.created),
            carried_in: Some(l.carried_in),
            reviews: Some(l.reviews),
            applications: Some(l.applications.len()),
            carried_out: Some(l.carried_out),
            retired: Some(l.retired),
            theta1: t.map(|t| t.theta1),
            theta2: t.map(|t| t.theta2),
            theta3: t.map(|t| t.theta3),
            ..LedgerRow::default()
        });
        for a in &l.acceptances {
            rows.push(LedgerRow {
                kind: Some(RowKind::Accept),
                issue: l.issue,
                manuscript: Some(a.manuscript),
                journal: Some(a.journal),
                quartile: Some(a.quartile),
                eta: Some(a.eta),
                score: Some(a.score),
                rejections: Some(a.rejections),
                ..LedgerRow::default()
            });
        }
        for j in &l.journals {
            rows.push(LedgerRow {
                kind: Some(RowKind::Journal),
                issue: l.issue,
                journal: Some(j.journal),
                quartile: Some(j.quartile),
                publications: Some(j.publications),
                mean_quality: j.mean_quality,
                running_quality: Some(j.running_quality),
                ..LedgerRow::default()
            });
        }
    }
    rows
}

pub fn write_ledgers(path: &Path, ledgers: &[IssueLedger]) -> Result<()> {
    write_rows(path, &ledger_rows(ledgers))
}

fn need<T>(v: Option<T>, path: &Path, line: usize, column: &str) -> Result<T> {
    v.ok_or_else(|| Error::MalformedCsv {
        path: path.to_path_buf(),
        msg: format!("row {line}: missing {column}"),
    })
}

/// Rebuild ledgers from `ledgers.csv`. Individual applications are not
/// persisted, only their count, so `applications` comes back empty.
pub fn read_ledgers(path: &Path) -> Result<Vec<IssueLedger>> {
    if !path.exists() {
        return Err(Error::MissingInput(path.to_path_buf()));
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::MalformedCsv {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    let mut ledgers: Vec<IssueLedger> = Vec::new();
    for (i, row) in reader.deserialize::<LedgerRow>().enumerate() {
        let line = i + 2;
        let r = row.map_err(|e| Error::MalformedCsv {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        let kind = need(r.kind, path, line, "kind")?;
        if kind == RowKind::Issue {
            let thresholds = match (r.theta1, r.theta2, r.theta3) {
                (Some(a), Some(b), Some(c)) => Some(Thresholds::new(a, b, c)),
                _ => None,
            };
            ledgers.push(IssueLedger {
                issue: r.issue,
                created: need(r.created, path, line, "created")?,
                carried_in: need(r.carried_in, path, line, "carried_in")?,
                reviews: need(r.reviews, path, line, "reviews")?,
                applications: Vec::new(),
                acceptances: Vec::new(),
                carried_out: need(r.carried_out, path, line, "carried_out")?,
                retired: need(r.retired, path, line, "retired")?,
                thresholds,
                journals: Vec::new(),
            });
            continue;
        }
        let Some(ledger) = ledgers.last_mut().filter(|l| l.issue == r.issue) else {
            return Err(Error::MalformedCsv {
                path: path.to_path_buf(),
                msg: format!("row {line}: issue {} has no preceding issue row", r.issue),
            });
        };
        match kind {
            RowKind::Accept => ledger.acceptances.push(Acceptance {
                manuscript: need(r.manuscript, path, line, "manuscript")?,
                journal: need(r.journal, path, line, "journal")?,
                quartile: need(r.quartile, path, line, "quartile")?,
                eta: need(r.eta, path, line, "eta")?,
                score: need(r.score, path, line, "score")?,
                rejections: need(r.rejections, path, line, "rejections")?,
            }),
            RowKind::Journal => ledger.journals.push(JournalRecord {
                journal: need(r.journal, path, line, "journal")?,
                quartile: need(r.quartile, path, line, "quartile")?,
                publications: need(r.publications, path, line, "publications")?,
                mean_quality: r.mean_quality,
                running_quality: need(r.running_quality, path, line, "running_quality")?,
            }),
            RowKind::Issue => unreachable!(),
        }
    }
    Ok(ledgers)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalRow {
    pub journal: usize,
    /// Fixed quartile, or the rank band in the simplified system.
    pub quartile: Quartile,
    pub issue: u32,
    pub publications: usize,
    pub mean_quality: Option<f64>,
    pub running_quality: f64,
}

pub fn journal_rows(ledgers: &[IssueLedger]) -> Vec<JournalRow> {
    let mut rows: Vec<JournalRow> = ledgers
        .iter()
        .flat_map(|l| {
            l.journals.iter().map(move |j| JournalRow {
                journal: j.journal,
                quartile: j.quartile,
                issue: l.issue,
                publications: j.publications,
                mean_quality: j.mean_quality,
                running_quality: j.running_quality,
            })
        })
        .collect();
    rows.sort_by_key(|r| (r.journal, r.issue));
    rows
}

pub fn write_journals(path: &Path, ledgers: &[IssueLedger]) -> Result<()> {
    write_rows(path, &journal_rows(ledgers))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn digest_file(path: &Path) -> Result<FileDigest> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(FileDigest {
        name,
        bytes: data.len() as u64,
        sha256: hex::encode(Sha256::digest(&data)),
    })
}

/// Provenance of one command. `config` is the merged effective config in
/// the same flat form the `--config` file uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: ConfigFile,
    pub seed: u64,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub files: Vec<FileDigest>,
}

impl RunManifest {
    pub fn sim_config(&self) -> SimConfig {
        self.config.apply_to(&SimConfig::default())
    }
}

pub fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

pub fn write_manifest(
    dir: &Path,
    command: &str,
    cfg: &SimConfig,
    started: u128,
    files: &[PathBuf],
) -> Result<RunManifest> {
    let digests = files.iter().map(|f| digest_file(f)).collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        command: command.to_string(),
        config: ConfigFile::from_config(cfg),
        seed: cfg.seed,
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        files: digests,
    };
    let path = dir.join(MANIFEST_JSON);
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST_JSON);
    if !path.exists() {
        return Err(Error::MissingInput(path));
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// The three run CSVs plus the manifest, in `dir`.
pub fn write_run(dir: &Path, out: &RunOutput, started: u128) -> Result<RunManifest> {
    ensure_dir(dir)?;
    let cfg = &out.config;
    let files = [
        dir.join(ISSUE_METRICS_CSV),
        dir.join(LEDGERS_CSV),
        dir.join(JOURNALS_CSV),
    ];
    write_issue_metrics(&files[0], &out.ledgers, cfg.n_reviewers, cfg.max_resubmissions + 1)?;
    write_ledgers(&files[1], &out.ledgers)?;
    write_journals(&files[2], &out.ledgers)?;
    write_manifest(dir, "run", cfg, started, &files)
}

/// Metrics recomputed from a persisted ledger file.
pub fn metrics_from_ledgers(path: &Path, reviewers: usize) -> Result<Vec<IssueMetrics>> {
    read_ledgers(path)?
        .iter()
        .map(|l| compute_issue_metrics(l, reviewers))
        .collect()
}
