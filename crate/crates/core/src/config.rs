//! Simulation parameters, validation and the flat key-value config file.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Thresholds;

/// Shape of the manuscript quality density `a * eta^-b * exp(-c * eta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityDistParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub eta_max: f64,
}

impl Default for QualityDistParams {
    fn default() -> Self {
        Self {
            a: 0.255,
            b: 0.3,
            c: 0.2,
            eta_max: 10.0,
        }
    }
}

/// Reviewer noise: variance `beta * load^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub beta: f64,
    pub gamma: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            beta: 0.1,
            gamma: 0.35,
        }
    }
}

/// Revision gain `y ~ N(mu * alpha^k, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevisionParams {
    pub mu: f64,
    pub alpha: f64,
    pub sigma: f64,
}

impl Default for RevisionParams {
    fn default() -> Self {
        Self {
            mu: 0.5,
            alpha: 0.75,
            sigma: 0.55,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    /// Platform-mediated review, two applications per manuscript.
    Novel,
    /// Journal-mediated review, one submission per issue.
    Regular,
    /// Platform review with nearest-quality journal targeting, no quartiles.
    Simplified,
}

impl SystemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::Novel => "novel",
            SystemKind::Regular => "regular",
            SystemKind::Simplified => "simplified",
        }
    }

    pub fn uses_quartiles(self) -> bool {
        !matches!(self, SystemKind::Simplified)
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "novel" => Ok(SystemKind::Novel),
            "regular" => Ok(SystemKind::Regular),
            "simplified" => Ok(SystemKind::Simplified),
            other => Err(format!(
                "unknown system {other:?} (expected novel, regular or simplified)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_new_per_issue: usize,
    pub n_journals: usize,
    pub n_reviewers: usize,
    pub capacity_per_journal: usize,
    pub n_issues: u32,
    pub init_thresholds: Thresholds,
    pub dist: QualityDistParams,
    pub noise: NoiseParams,
    pub revision: RevisionParams,
    pub system: SystemKind,
    pub seed: u64,
    pub author_estimate_sigma: f64,
    pub max_resubmissions: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_new_per_issue: 3000,
            n_journals: 100,
            n_reviewers: 500,
            capacity_per_journal: 25,
            n_issues: 20,
            init_thresholds: Thresholds::new(8.0, 6.0, 4.0),
            dist: QualityDistParams::default(),
            noise: NoiseParams::default(),
            revision: RevisionParams::default(),
            system: SystemKind::Novel,
            seed: 0,
            author_estimate_sigma: 0.15,
            max_resubmissions: 8,
        }
    }
}

/// Reviewers per fresh manuscript on the platform.
pub const PLATFORM_REVIEWS_NEW: usize = 6;
/// Reviewers per revised manuscript on the platform.
pub const PLATFORM_REVIEWS_REVISED: usize = 3;
/// Reviewers a journal invites in the regular system.
pub const JOURNAL_REVIEWS: usize = 2;

impl SimConfig {
    pub fn with_system(mut self, system: SystemKind) -> Self {
        self.system = system;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Same oversubscription ratio at a different submission volume: the
    /// per-journal capacity scales with `n`, everything else is kept.
    pub fn scaled_to(&self, n: usize) -> Self {
        let mut cfg = self.clone();
        let cap = (self.capacity_per_journal as u128 * n as u128 / self.n_new_per_issue.max(1) as u128)
            as usize;
        cfg.n_new_per_issue = n;
        cfg.capacity_per_journal = cap.max(1);
        cfg
    }

    pub fn total_capacity(&self) -> usize {
        self.n_journals.saturating_mul(self.capacity_per_journal)
    }

    fn reviewers_needed(&self) -> usize {
        match self.system {
            SystemKind::Regular => JOURNAL_REVIEWS,
            SystemKind::Novel | SystemKind::Simplified => PLATFORM_REVIEWS_NEW,
        }
    }
}

/// Every violated invariant of `cfg`; an empty list means the config is runnable.
pub fn validate_config(cfg: &SimConfig) -> Vec<String> {
    let mut v = Vec::new();

    for (name, value) in [
        ("n_new_per_issue", cfg.n_new_per_issue),
        ("n_journals", cfg.n_journals),
        ("n_reviewers", cfg.n_reviewers),
        ("capacity_per_journal", cfg.capacity_per_journal),
        ("max_resubmissions", cfg.max_resubmissions as usize),
    ] {
        if value == 0 {
            v.push(format!("{name} must be at least 1"));
        }
    }

    let t = cfg.init_thresholds;
    if !(t.theta1 > t.theta2 && t.theta2 > t.theta3) {
        v.push("thresholds not strictly decreasing".to_string());
    }
    if !(t.theta3 > 0.0) {
        v.push("theta3 must be positive".to_string());
    }

    let total = cfg.total_capacity();
    if cfg.n_journals > 0 && cfg.capacity_per_journal > 0 && total >= cfg.n_new_per_issue {
        v.push(format!(
            "total capacity {total} ≥ n {}",
            cfg.n_new_per_issue
        ));
    }

    if cfg.system.uses_quartiles() && cfg.n_journals > 0 && cfg.n_journals < 4 {
        v.push("too few journals to form quartiles".to_string());
    }
    if cfg.system == SystemKind::Simplified && cfg.n_journals == 1 {
        v.push("simplified system needs at least 2 journals".to_string());
    }
    let needed = cfg.reviewers_needed();
    if cfg.n_reviewers > 0 && cfg.n_reviewers < needed {
        v.push(format!(
            "{} system needs at least {needed} reviewers, got {}",
            cfg.system, cfg.n_reviewers
        ));
    }

    let d = cfg.dist;
    if !(d.a > 0.0 && d.a.is_finite()) {
        v.push("a must be positive".to_string());
    }
    if !(d.b > 0.0 && d.b < 1.0) {
        v.push("b must lie in (0, 1)".to_string());
    }
    if !(d.c > 0.0 && d.c.is_finite()) {
        v.push("c must be positive".to_string());
    }
    if !(d.eta_max > 0.0 && d.eta_max.is_finite()) {
        v.push("eta_max must be positive".to_string());
    }

    // beta = 0 is accepted: it is the noise-free hook used by oracle tests.
    if !(cfg.noise.beta >= 0.0 && cfg.noise.beta.is_finite()) {
        v.push("beta must be non-negative".to_string());
    }
    if !(cfg.noise.gamma > 0.0 && cfg.noise.gamma.is_finite()) {
        v.push("gamma must be positive".to_string());
    }

    let r = cfg.revision;
    if !r.mu.is_finite() {
        v.push("mu must be finite".to_string());
    }
    if !(r.alpha > 0.0 && r.alpha < 1.0) {
        v.push("alpha must lie in (0, 1)".to_string());
    }
    if !(r.sigma >= 0.0 && r.sigma.is_finite()) {
        v.push("sigma must be non-negative".to_string());
    }
    if !(cfg.author_estimate_sigma >= 0.0 && cfg.author_estimate_sigma.is_finite()) {
        v.push("author_estimate_sigma must be non-negative".to_string());
    }

    v
}

/// Journal counts per quartile: top 10%, 10-25%, 25-50%, remainder.
///
/// Cut points round half away from zero; an empty band takes one slot from
/// the largest band (the lowest-ranked one on ties).
pub fn quartile_partition(n_journals: usize) -> Result<[usize; 4]> {
    if n_journals < 4 {
        return Err(Error::TooFewJournals(n_journals));
    }
    let cut = |percent: usize| (percent * n_journals + 50) / 100;
    let (c1, c2, c3) = (cut(10), cut(25), cut(50));
    let mut sizes = [c1, c2 - c1, c3 - c2, n_journals - c3];
    while let Some(empty) = sizes.iter().position(|&s| s == 0) {
        let largest = (0..4).rev().max_by_key(|&i| sizes[i]).unwrap_or(3);
        sizes[largest] -= 1;
        sizes[empty] += 1;
    }
    Ok(sizes)
}

/// On-disk form: flat keys, every key optional, unknown keys rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_new_per_issue: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_journals: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_reviewers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacity_per_journal: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_issues: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_thresholds: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemKind>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "seed_repr")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub author_estimate_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_resubmissions: Option<u32>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|msg| Error::ConfigParse {
            path: path.to_path_buf(),
            msg,
        })
    }

    /// Overlay the keys present here onto `base`.
    pub fn apply_to(&self, base: &SimConfig) -> SimConfig {
        let mut cfg = base.clone();
        macro_rules! set {
            ($($key:ident => $($target:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$key { cfg.$($target).+ = v; })*
            };
        }
        set!(
            n_new_per_issue => n_new_per_issue,
            n_journals => n_journals,
            n_reviewers => n_reviewers,
            capacity_per_journal => capacity_per_journal,
            n_issues => n_issues,
            a => dist.a,
            b => dist.b,
            c => dist.c,
            eta_max => dist.eta_max,
            beta => noise.beta,
            gamma => noise.gamma,
            mu => revision.mu,
            alpha => revision.alpha,
            sigma => revision.sigma,
            system => system,
            seed => seed,
            author_estimate_sigma => author_estimate_sigma,
            max_resubmissions => max_resubmissions,
        );
        if let Some([t1, t2, t3]) = self.init_thresholds {
            cfg.init_thresholds = Thresholds::new(t1, t2, t3);
        }
        cfg
    }

    /// Every key filled in from `cfg`.
    pub fn from_config(cfg: &SimConfig) -> Self {
        let t = cfg.init_thresholds;
        Self {
            n_new_per_issue: Some(cfg.n_new_per_issue),
            n_journals: Some(cfg.n_journals),
            n_reviewers: Some(cfg.n_reviewers),
            capacity_per_journal: Some(cfg.capacity_per_journal),
            n_issues: Some(cfg.n_issues),
            init_thresholds: Some([t.theta1, t.theta2, t.theta3]),
            a: Some(cfg.dist.a),
            b: Some(cfg.dist.b),
            c: Some(cfg.dist.c),
            eta_max: Some(cfg.dist.eta_max),
            beta: Some(cfg.noise.beta),
            gamma: Some(cfg.noise.gamma),
            mu: Some(cfg.revision.mu),
            alpha: Some(cfg.revision.alpha),
            sigma: Some(cfg.revision.sigma),
            system: Some(cfg.system),
            seed: Some(cfg.seed),
            author_estimate_sigma: Some(cfg.author_estimate_sigma),
            max_resubmissions: Some(cfg.max_resubmissions),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }
}

/// TOML integers are signed 64-bit, so seeds above `i64::MAX` travel as strings.
mod seed_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(seed: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
        match seed {
            Some(v) if *v <= i64::MAX as u64 => s.serialize_i64(*v as i64),
            Some(v) => s.serialize_str(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
        use serde::de::Error;
        match Repr::deserialize(d)? {
            Repr::Int(v) if v >= 0 => Ok(Some(v as u64)),
            Repr::Int(v) => Err(D::Error::custom(format!("seed must be non-negative, got {v}"))),
            Repr::Text(t) => t.parse().map(Some).map_err(D::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        assert!(validate_config(&SimConfig::default()).is_empty());
    }

    #[test]
    fn unordered_thresholds_are_reported() {
        let cfg = SimConfig {
            init_thresholds: Thresholds::new(4.0, 6.0, 8.0),
            ..SimConfig::default()
        };
        assert_eq!(validate_config(&cfg), vec!["thresholds not strictly decreasing"]);
    }

    #[test]
    fn capacity_must_leave_room_for_rejections() {
        let cfg = SimConfig {
            n_journals: 100,
            capacity_per_journal: 40,
            n_new_per_issue: 3000,
            ..SimConfig::default()
        };
        assert_eq!(validate_config(&cfg), vec!["total capacity 4000 ≥ n 3000"]);
    }

    #[test]
    fn validation_collects_every_violation() {
        let cfg = SimConfig {
            n_reviewers: 0,
            dist: QualityDistParams {
                b: 1.2,
                ..QualityDistParams::default()
            },
            revision: RevisionParams {
                alpha: 1.0,
                ..RevisionParams::default()
            },
            ..SimConfig::default()
        };
        let v = validate_config(&cfg);
        assert_eq!(v.len(), 3, "{v:?}");
        assert_eq!(validate_config(&cfg), v);
    }

    #[test]
    fn partition_examples() {
        assert_eq!(quartile_partition(100).unwrap(), [10, 15, 25, 50]);
        assert_eq!(quartile_partition(200).unwrap(), [20, 30, 50, 100]);
        assert_eq!(quartile_partition(10).unwrap(), [1, 2, 2, 5]);
        assert_eq!(quartile_partition(4).unwrap(), [1, 1, 1, 1]);
        assert!(matches!(quartile_partition(3), Err(Error::TooFewJournals(3))));
    }

    #[test]
    fn partition_oracle_small_j() {
        // Independent float route: round half away from zero on the fractions.
        for j in 4..=400usize {
            let jf = j as f64;
            let c1 = (0.10 * jf).round() as usize;
            let c2 = (0.25 * jf).round() as usize;
            let c3 = (0.50 * jf).round() as usize;
            let raw = [c1, c2 - c1, c3 - c2, j - c3];
            let got = quartile_partition(j).unwrap();
            assert_eq!(got.iter().sum::<usize>(), j);
            assert!(got.iter().all(|&s| s >= 1));
            if raw.iter().all(|&s| s >= 1) {
                assert_eq!(got, raw, "J = {j}");
            }
        }
    }

    #[test]
    fn config_file_overlays_and_rejects_unknown_keys() {
        let file = ConfigFile::parse(
            "n_new_per_issue = 1200\nbeta = 0.04\nsystem = \"regular\"\ninit_thresholds = [9.0, 7.0, 5.0]\n",
        )
        .unwrap();
        let cfg = file.apply_to(&SimConfig::default());
        assert_eq!(cfg.n_new_per_issue, 1200);
        assert_eq!(cfg.noise.beta, 0.04);
        assert_eq!(cfg.system, SystemKind::Regular);
        assert_eq!(cfg.init_thresholds, Thresholds::new(9.0, 7.0, 5.0));
        assert_eq!(cfg.n_journals, 100);

        let err = ConfigFile::parse("n_journal = 3\n").unwrap_err();
        assert!(err.contains("n_journal"), "{err}");
    }

    #[test]
    fn flat_form_round_trips() {
        let cfg = SimConfig {
            seed: u64::MAX,
            system: SystemKind::Simplified,
            ..SimConfig::default()
        };
        let text = ConfigFile::from_config(&cfg).to_toml();
        let back = ConfigFile::parse(&text).unwrap().apply_to(&SimConfig::default());
        assert_eq!(back, cfg);
    }

    #[test]
    fn scaling_keeps_capacity_below_n() {
        let base = SimConfig::default();
        for n in [1000, 2000, 3000, 5000, 10000] {
            let cfg = base.scaled_to(n);
            assert!(cfg.total_capacity() < n);
            assert!(validate_config(&cfg).is_empty());
        }
        assert_eq!(base.scaled_to(1000).capacity_per_journal, 8);
        assert_eq!(base.scaled_to(3000).capacity_per_journal, 25);
    }
}
