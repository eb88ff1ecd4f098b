//! One-at-a-time sensitivity sweeps with multi-run averaging.
//!
//! Run `r` at every grid point uses seed `base.seed + r`, so grid points share
//! random numbers and differences between them come from the parameter alone.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::config::{validate_config, SimConfig};
use crate::error::{Error, Result};
use crate::exec::run_batch;
use crate::metrics::{spearman, summarize, RunSummary};
use crate::systems::run_simulation;

const GRID_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    A,
    B,
    C,
    Beta,
    Gamma,
    Mu,
    Alpha,
    Sigma,
}

impl SweepParam {
    pub const ALL: [SweepParam; 8] = [
        SweepParam::A,
        SweepParam::B,
        SweepParam::C,
        SweepParam::Beta,
        SweepParam::Gamma,
        SweepParam::Mu,
        SweepParam::Alpha,
        SweepParam::Sigma,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::A => "a",
            SweepParam::B => "b",
            SweepParam::C => "c",
            SweepParam::Beta => "beta",
            SweepParam::Gamma => "gamma",
            SweepParam::Mu => "mu",
            SweepParam::Alpha => "alpha",
            SweepParam::Sigma => "sigma",
        }
    }

    /// Copy of `cfg` with this parameter set to `value`.
    pub fn apply(self, cfg: &SimConfig, value: f64) -> SimConfig {
        let mut out = cfg.clone();
        match self {
            SweepParam::A => out.dist.a = value,
            SweepParam::B => out.dist.b = value,
            SweepParam::C => out.dist.c = value,
            SweepParam::Beta => out.noise.beta = value,
            SweepParam::Gamma => out.noise.gamma = value,
            SweepParam::Mu => out.revision.mu = value,
            SweepParam::Alpha => out.revision.alpha = value,
            SweepParam::Sigma => out.revision.sigma = value,
        }
        out
    }

    pub fn get(self, cfg: &SimConfig) -> f64 {
        match self {
            SweepParam::A => cfg.dist.a,
            SweepParam::B => cfg.dist.b,
            SweepParam::C => cfg.dist.c,
            SweepParam::Beta => cfg.noise.beta,
            SweepParam::Gamma => cfg.noise.gamma,
            SweepParam::Mu => cfg.revision.mu,
            SweepParam::Alpha => cfg.revision.alpha,
            SweepParam::Sigma => cfg.revision.sigma,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepParam::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown sweep parameter {s:?} (expected one of a, b, c, beta, gamma, mu, alpha, sigma)"))
    }
}

/// The six headline outputs, in column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Output {
    Q1,
    Q2,
    Q3,
    Q4,
    Burden,
    FirstTry,
}

impl Output {
    pub const ALL: [Output; 6] = [
        Output::Q1,
        Output::Q2,
        Output::Q3,
        Output::Q4,
        Output::Burden,
        Output::FirstTry,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Output::Q1 => "q1",
            Output::Q2 => "q2",
            Output::Q3 => "q3",
            Output::Q4 => "q4",
            Output::Burden => "burden",
            Output::FirstTry => "first_try",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    fn of(self, s: &RunSummary) -> f64 {
        match self {
            Output::Q1 => s.quartile_means[0],
            Output::Q2 => s.quartile_means[1],
            Output::Q3 => s.quartile_means[2],
            Output::Q4 => s.quartile_means[3],
            Output::Burden => s.burden,
            Output::FirstTry => s.first_try,
        }
    }
}

impl FromStr for Output {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Output::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| format!("unknown output {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub runs_per_point: usize,
    pub base: SimConfig,
}

impl SweepSpec {
    pub fn new(param: SweepParam, lo: f64, hi: f64, step: f64, base: SimConfig) -> Self {
        Self {
            param,
            lo,
            hi,
            step,
            runs_per_point: 10,
            base,
        }
    }

    pub fn with_runs(mut self, runs: usize) -> Self {
        self.runs_per_point = runs;
        self
    }

    pub fn check(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::InvalidSweep(format!(
                "range [{}, {}] must satisfy lo < hi",
                self.lo, self.hi
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidSweep(format!("step {} must be positive", self.step)));
        }
        if self.runs_per_point == 0 {
            return Err(Error::InvalidSweep("runs per point must be at least 1".into()));
        }
        Ok(())
    }

    /// `floor((hi - lo) / step) + 1` points; a step that does not divide the
    /// range stops at the last point not beyond `hi`.
    pub fn grid(&self) -> Result<Vec<f64>> {
        self.check()?;
        let count = ((self.hi - self.lo) / self.step + GRID_SLACK).floor() as usize + 1;
        // Rounded to 12 decimals so values read as written (0.12, not 0.12000000000000001).
        Ok((0..count)
            .map(|i| ((self.lo + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub value: f64,
    /// Mean over runs, indexed like [`Output::ALL`]. NaN runs are skipped.
    pub mean: [f64; 6],
    /// Sample standard deviation over runs (0 for a single run).
    pub sd: [f64; 6],
    pub runs: usize,
}

impl GridPoint {
    pub fn mean_of(&self, o: Output) -> f64 {
        self.mean[o.index()]
    }

    pub fn sd_of(&self, o: Output) -> f64 {
        self.sd[o.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub points: Vec<GridPoint>,
}

impl SweepResult {
    /// Min and max of the averaged output across grid points.
    pub fn range(&self, o: Output) -> (f64, f64) {
        self.points
            .iter()
            .map(|p| p.mean_of(o))
            .filter(|v| !v.is_nan())
            .fold((f64::NAN, f64::NAN), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let v: Vec<f64> = xs.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let grid = spec.grid()?;
    let mut configs = Vec::with_capacity(grid.len());
    for &value in &grid {
        let cfg = spec.param.apply(&spec.base, value);
        let violations = validate_config(&cfg);
        if !violations.is_empty() {
            return Err(Error::InvalidGridPoint {
                param: spec.param.to_string(),
                value,
                violations,
            });
        }
        configs.push(cfg);
    }

    let mut jobs = Vec::with_capacity(configs.len() * spec.runs_per_point);
    for (g, cfg) in configs.iter().enumerate() {
        for r in 0..spec.runs_per_point {
            jobs.push((g, cfg.clone().with_seed(spec.base.seed.wrapping_add(r as u64))));
        }
    }
    let summaries = run_batch(jobs, |(g, cfg)| {
        run_simulation(&cfg).and_then(|out| summarize(&out.ledgers, cfg.n_reviewers).map(|s| (g, s)))
    });

    let mut per_point: Vec<Vec<RunSummary>> = vec![Vec::new(); grid.len()];
    for s in summaries {
        let (g, summary) = s?;
        per_point[g].push(summary);
    }

    let points = grid
        .iter()
        .zip(per_point)
        .map(|(&value, runs)| {
            let mut mean = [0.0; 6];
            let mut sd = [0.0; 6];
            for o in Output::ALL {
                let xs: Vec<f64> = runs.iter().map(|s| o.of(s)).collect();
                (mean[o.index()], sd[o.index()]) = mean_sd(&xs);
            }
            GridPoint {
                value,
                mean,
                sd,
                runs: runs.len(),
            }
        })
        .collect();

    Ok(SweepResult {
        spec: spec.clone(),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
    NonMonotone,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
            Direction::NonMonotone => "non-monotone",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sign of the Spearman correlation between parameter value and averaged
/// output; weak (|rho| < 0.5), short (< 3 points) or constant series are
/// non-monotone.
pub fn monotone_direction(result: &SweepResult, output: Output) -> Direction {
    let (xs, ys): (Vec<f64>, Vec<f64>) = result
        .points
        .iter()
        .map(|p| (p.value, p.mean_of(output)))
        .filter(|(_, y)| !y.is_nan())
        .unzip();
    if xs.len() < 3 {
        return Direction::NonMonotone;
    }
    match spearman(&xs, &ys) {
        Ok(rho) if rho >= 0.5 => Direction::Increasing,
        Ok(rho) if rho <= -0.5 => Direction::Decreasing,
        _ => Direction::NonMonotone,
    }
}
