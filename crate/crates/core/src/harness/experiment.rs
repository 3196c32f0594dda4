// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Experiment runners: the random k-out matching trial and the preset grid.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::harness::generate::{generate, Family, GenSpec};
use crate::harness::verify::{event_edges, verify_assignments};
use crate::matching::kout_trial;
use crate::pipeline::{run_events, Preset, RunOptions};
use crate::seed::{rng_from, split_seed};
use crate::stream::Mode;
use crate::BoundPolicy;

/// Parses a non-negative decimal such as `2.72` into an exact fraction.
pub fn parse_ratio(text: &str) -> Option<(u64, u64)> {
    let (int, frac) = text.trim().split_once('.').unwrap_or((text.trim(), ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    if !digits(int) || !digits(frac) || frac.len() > 18 {
        return None;
    }
    let den = 10u64.checked_pow(frac.len() as u32)?;
    let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    Some((int.checked_mul(den)?.checked_add(frac)?, den))
}

/// Wilson score interval for `failures` out of `trials`.
pub fn wilson_interval(failures: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = z * z;
    let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct KoutReport {
    pub n: u32,
    pub c_num: u64,
    pub c_den: u64,
    pub u_size: u32,
    pub k: u32,
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl KoutReport {
    pub const CSV_HEADER: &'static str = "n,c,u_size,k,trials,failures,rate,ci_low,ci_high,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{}",
            self.n,
            format_ratio(self.c_num, self.c_den),
            self.u_size,
            self.k,
            self.trials,
            self.failures,
            self.rate,
            self.ci_low,
            self.ci_high,
            self.seed
        )
    }
}

fn format_ratio(num: u64, den: u64) -> String {
    let digits = den.ilog10() as usize;
    if den == 10u64.pow(digits as u32) {
        if digits == 0 {
            return num.to_string();
        }
        return format!("{}.{:0width$}", num / den, num % den, width = digits);
    }
    format!("{num}/{den}")
}

/// Monte Carlo estimate of how often a random `k`-out graph with `n` left
/// and `ceil(c * n)` right vertices has no perfect matching.
///
/// Trial `t` draws from its own generator derived from `(seed, t)`, so the
/// result does not depend on how trials are scheduled.
///
/// # Panics
///
/// Panics if `c_den == 0`, `k == 0` or the right side is smaller than `k`.
pub fn run_kout_experiment(n: u32, c_num: u64, c_den: u64, k: u32, trials: u64, seed: u64) -> KoutReport {
    let u_size = (c_num * n as u64).div_ceil(c_den) as u32;
    let failures = (0..trials)
        .into_par_iter()
        .filter(|&t| !kout_trial(n, u_size, k, &mut rng_from(seed, t)))
        .count() as u64;
    let rate = if trials == 0 {
        0.0
    } else {
        failures as f64 / trials as f64
    };
    let (ci_low, ci_high) = wilson_interval(failures, trials, 1.96);
    KoutReport {
        n,
        c_num,
        c_den,
        u_size,
        k,
        trials,
        failures,
        rate,
        ci_low,
        ci_high,
        seed,
    }
}

fn default_seeds() -> u32 {
    1
}

fn default_jobs() -> usize {
    1
}

fn default_s() -> Vec<u32> {
    vec![1]
}

/// Grid of runs, read from TOML.
#[derive(Clone, Debug, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub presets: Vec<String>,
    #[serde(default)]
    pub families: Vec<String>,
    #[serde(default)]
    pub n: Vec<u32>,
    #[serde(default)]
    pub delta: Vec<u32>,
    /// Trade-off values for `edge-general`; other presets ignore them.
    #[serde(default = "default_s")]
    pub s: Vec<u32>,
    /// Seeds per cell.
    #[serde(default = "default_seeds")]
    pub seeds: u32,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub force_stream: bool,
    #[serde(default)]
    pub strict_bounds: bool,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    /// Record wall time; off gives byte-reproducible tables.
    #[serde(default = "default_timing")]
    pub timing: bool,
}

fn default_timing() -> bool {
    true
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            presets: Vec::new(),
            families: Vec::new(),
            n: Vec::new(),
            delta: Vec::new(),
            s: default_s(),
            seeds: default_seeds(),
            master_seed: 0,
            force_stream: false,
            strict_bounds: false,
            jobs: default_jobs(),
            timing: true,
        }
    }
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self, SuiteError> {
        toml::from_str(text).map_err(|e| SuiteError::Config(e.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("config: {0}")]
    Config(String),
}

/// Stream mode a preset is run on in the grid.
pub fn mode_for(preset: Preset) -> Mode {
    match preset {
        Preset::OneSided => Mode::VertexOneSided,
        Preset::BatchNaive => Mode::Batch,
        Preset::VertexGeneral => Mode::VertexTwoSided,
        _ => Mode::Edge,
    }
}

/// One run of the grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteRow {
    pub preset: Preset,
    pub family: Family,
    pub n: u32,
    pub delta: u32,
    pub s: u32,
    pub seed: u64,
    pub proper: bool,
    pub colors_used: u64,
    /// Colors reserved by the run's blocks.
    pub budget: u64,
    pub peak_words: u64,
    pub spilled_vertices: u64,
    pub spilled_edges: u64,
    pub millis: u64,
    pub n_total: u32,
    pub edges: u64,
    pub declared_budget: u64,
    pub degree_breaches: u64,
    pub flushes: u64,
    /// Error that aborted the run, if any.
    pub error: Option<String>,
}

impl SuiteRow {
    pub const CSV_HEADER: &'static str =
        "preset,family,n,delta,s,seed,proper,colors_used,budget,peak_words,spilled_vertices,spilled_edges,millis";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.preset,
            self.family,
            self.n,
            self.delta,
            self.s,
            self.seed,
            self.proper,
            self.colors_used,
            self.budget,
            self.peak_words,
            self.spilled_vertices,
            self.spilled_edges,
            self.millis
        )
    }
}

/// One cell of the grid before it runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Job {
    pub preset: Preset,
    pub family: Family,
    pub n: u32,
    pub delta: u32,
    pub s: u32,
    pub seed: u64,
    pub force_stream: bool,
    pub policy: BoundPolicy,
}

impl Job {
    pub fn spec(&self) -> GenSpec {
        GenSpec {
            family: self.family,
            n: self.n,
            delta: self.delta,
            mode: mode_for(self.preset),
            seed: self.seed,
            batch_size: None,
        }
    }

    /// Generates, runs and verifies.
    pub fn run(&self, timing: bool) -> SuiteRow {
        let spec = self.spec();
        let (header, events) = generate(&spec).expect("grid cells are feasible");
        let opts = RunOptions {
            preset: self.preset,
            s: self.s.max(1),
            force_stream: self.force_stream,
            policy: self.policy,
            seed: None,
        };
        let start = Instant::now();
        let result = run_events(&header, &events, &opts);
        let millis = if timing { start.elapsed().as_millis() as u64 } else { 0 };
        let mut row = SuiteRow {
            preset: self.preset,
            family: self.family,
            n: self.n,
            delta: self.delta,
            s: crate::pipeline::effective_s(&header, &opts),
            seed: self.seed,
            proper: false,
            colors_used: 0,
            budget: 0,
            peak_words: 0,
            spilled_vertices: 0,
            spilled_edges: 0,
            millis,
            n_total: header.n_total(),
            edges: event_edges(&events).len() as u64,
            declared_budget: crate::pipeline::declared_budget(&header, &opts),
            degree_breaches: 0,
            flushes: 0,
            error: None,
        };
        match result {
            Ok((out, summary)) => {
                let report = verify_assignments(event_edges(&events), &out, Some(summary.palette));
                row.proper = report.ok() && report.colors_used as u64 == summary.colors_used;
                row.colors_used = summary.colors_used;
                row.budget = summary.palette;
                row.peak_words = summary.peak_words;
                row.spilled_vertices = summary.spilled_vertices;
                row.spilled_edges = summary.spilled_edges;
                row.degree_breaches = summary.degree_breaches;
                row.flushes = summary.flushes;
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        row
    }
}

fn compatible(preset: Preset, family: Family, delta: u32, n: u32) -> bool {
    if !preset.accepts(mode_for(preset), family.is_bipartite()) {
        return false;
    }
    match family {
        Family::RegularGeneral => delta < n && (delta.is_multiple_of(2) || n.is_multiple_of(2)),
        _ => delta <= n,
    }
}

/// Expands a config into jobs, skipping preset/family pairs that cannot run.
pub fn expand_jobs(cfg: &SuiteConfig) -> Result<Vec<Job>, SuiteError> {
    let presets = cfg
        .presets
        .iter()
        .map(|p| p.parse::<Preset>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(SuiteError::Config)?;
    let families = cfg
        .families
        .iter()
        .map(|f| f.parse::<Family>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(SuiteError::Config)?;
    let policy = if cfg.strict_bounds {
        BoundPolicy::Strict
    } else {
        BoundPolicy::Tolerant
    };
    let mut jobs = Vec::new();
    for &preset in &presets {
        for &family in &families {
            for &n in &cfg.n {
                for &delta in &cfg.delta {
                    if !compatible(preset, family, delta, n) {
                        continue;
                    }
                    let s_values = if preset == Preset::EdgeGeneral {
                        cfg.s.clone()
                    } else {
                        vec![0]
                    };
                    for &s in &s_values {
                        for j in 0..cfg.seeds {
                            jobs.push(Job {
                                preset,
                                family,
                                n,
                                delta,
                                s,
                                seed: split_seed(cfg.master_seed, j as u64),
                                force_stream: cfg.force_stream,
                                policy,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(jobs)
}

/// Runs every job of the grid, in parallel over `cfg.jobs` workers; rows
/// come back in grid order.
pub fn run_experiment_suite(cfg: &SuiteConfig) -> Result<Vec<SuiteRow>, SuiteError> {
    let jobs = expand_jobs(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| SuiteError::Config(e.to_string()))?;
    let timing = cfg.timing;
    Ok(pool.install(|| jobs.par_iter().map(|j| j.run(timing)).collect()))
}

/// Writes the table with its header line.
pub fn write_csv<W: Write>(mut out: W, rows: &[SuiteRow]) -> io::Result<()> {
    writeln!(out, "{}", SuiteRow::CSV_HEADER)?;
    for r in rows {
        writeln!(out, "{}", r.csv_row())?;
    }
    out.flush()
}

/// Mean and max per grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub preset: Preset,
    pub family: Family,
    pub n: u32,
    pub delta: u32,
    pub s: u32,
    pub runs: usize,
    pub all_proper: bool,
    pub mean_colors: f64,
    pub max_colors: u64,
    pub mean_peak_words: f64,
    pub max_peak_words: u64,
    pub spilled_vertices: u64,
    pub spilled_edges: u64,
}

pub fn aggregate(rows: &[SuiteRow]) -> Vec<CellSummary> {
    let mut cells: BTreeMap<(Preset, Family, u32, u32, u32), Vec<&SuiteRow>> = BTreeMap::new();
    for r in rows {
        cells
            .entry((r.preset, r.family, r.n, r.delta, r.s))
            .or_default()
            .push(r);
    }
    cells
        .into_iter()
        .map(|((preset, family, n, delta, s), rs)| {
            let len = rs.len() as f64;
            CellSummary {
                preset,
                family,
                n,
                delta,
                s,
                runs: rs.len(),
                all_proper: rs.iter().all(|r| r.proper),
                mean_colors: rs.iter().map(|r| r.colors_used as f64).sum::<f64>() / len,
                max_colors: rs.iter().map(|r| r.colors_used).max().unwrap_or(0),
                mean_peak_words: rs.iter().map(|r| r.peak_words as f64).sum::<f64>() / len,
                max_peak_words: rs.iter().map(|r| r.peak_words).max().unwrap_or(0),
                spilled_vertices: rs.iter().map(|r| r.spilled_vertices).sum(),
                spilled_edges: rs.iter().map(|r| r.spilled_edges).sum(),
            }
        })
        .collect()
}
