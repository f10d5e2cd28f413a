//! Sweeps and trace experiments behind the `dcaplan` command line.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::environment::Scenario;
use crate::error::{invalid, Error, Result};
use crate::exhaustivity::{TraceParams, TraceReference};
use crate::planners::{plan, planner_vertices, scenario_radius, NearMode, PlanConfig, PlanStatus, PlannerKind};
use crate::pose::Pose;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub planner: PlannerKind,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub eta: f64,
    pub mode: NearMode,
    pub cache: bool,
    pub base_seed: u64,
}

fn check_n_values(n_values: &[usize], trials: usize) -> Result<()> {
    if trials < 1 {
        return Err(invalid("trials must be at least 1"));
    }
    if n_values.is_empty() || n_values[0] < 1 {
        return Err(invalid("need at least one sample count, all >= 1"));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(format!(
            "sample counts must be strictly increasing, got {n_values:?}"
        )));
    }
    Ok(())
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        check_n_values(&self.n_values, self.trials)?;
        if !(self.eta >= 0.0) {
            return Err(invalid(format!("eta must be nonnegative, got {}", self.eta)));
        }
        Ok(())
    }

    /// Configuration of one trial; its seed is `base_seed + trial`.
    pub fn config(&self, n: usize, trial: usize) -> PlanConfig {
        PlanConfig {
            n,
            eta: self.eta,
            mode: self.mode,
            seed: self.base_seed.wrapping_add(trial as u64),
            cache: self.cache,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub planner: PlannerKind,
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub status: PlanStatus,
    pub cost: Option<f64>,
    pub wall_time: f64,
    pub collision_checks: u64,
    pub steering_solves: u64,
}

pub fn run_trial(scenario: &Scenario, planner: PlannerKind, cfg: &PlanConfig, trial: usize) -> Result<SweepRow> {
    let (res, _) = plan(scenario, planner, cfg)?;
    Ok(SweepRow {
        planner,
        n: cfg.n,
        trial,
        seed: cfg.seed,
        status: res.status,
        cost: res.cost,
        wall_time: res.stats.wall_time,
        collision_checks: res.stats.collision_checks,
        steering_solves: res.stats.steering_solves,
    })
}

/// Every `(n, trial)` of the sweep, sorted by `(n, trial)`.
pub fn run_sweep(scenario: &Scenario, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> = spec
        .n_values
        .iter()
        .flat_map(|&n| (0..spec.trials).map(move |t| (n, t)))
        .collect();
    let mut rows = jobs
        .par_iter()
        .map(|&(n, t)| run_trial(scenario, spec.planner, &spec.config(n, t), t))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.n, r.trial));
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub planner: PlannerKind,
    pub n: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Mean cost over successful trials.
    pub mean_cost: Option<f64>,
    /// Standard error of that mean; 0 with a single success.
    pub sem_cost: Option<f64>,
    pub mean_wall_time: f64,
}

/// Mean and standard error of the mean (0 for a single value).
pub fn mean_sem(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    Some((mean, (var / k).sqrt()))
}

pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(PlannerKind, usize)> = rows.iter().map(|r| (r.planner, r.n)).collect();
    keys.sort_by_key(|k| (k.1, k.0 as u8));
    keys.dedup();
    keys.into_iter()
        .map(|(planner, n)| {
            let group: Vec<&SweepRow> = rows.iter().filter(|r| r.planner == planner && r.n == n).collect();
            let costs: Vec<f64> = group.iter().filter_map(|r| r.cost).collect();
            let ms = mean_sem(&costs);
            SummaryRow {
                planner,
                n,
                trials: group.len(),
                successes: costs.len(),
                success_rate: costs.len() as f64 / group.len() as f64,
                mean_cost: ms.map(|m| m.0),
                sem_cost: ms.map(|m| m.1),
                mean_wall_time: group.iter().map(|r| r.wall_time).sum::<f64>() / group.len() as f64,
            }
        })
        .collect()
}

/// Writes rows as CSV with a header row and LF line endings.
pub fn write_csv<T: Serialize>(out: impl Write, rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(input: impl Read) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Loads a reference path: either a JSON list of `[x, y, theta]` poses or
/// `plan:<planner>:<n>:<seed>`, which plans on `scenario` with default
/// settings and uses the resulting path sampled every collision step.
pub fn load_reference(source: &str, scenario: &Scenario) -> Result<Vec<Pose>> {
    if let Some(rest) = source.strip_prefix("plan:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let bad = || {
            invalid(format!(
                "reference '{source}' is not of the form plan:<planner>:<n>:<seed>"
            ))
        };
        if parts.len() != 3 {
            return Err(bad());
        }
        let planner: PlannerKind = parts[0].parse().map_err(|_| bad())?;
        let n: usize = parts[1].parse().map_err(|_| bad())?;
        let seed: u64 = parts[2].parse().map_err(|_| bad())?;
        if n < 1 {
            return Err(bad());
        }
        let cfg = PlanConfig {
            n,
            seed,
            ..PlanConfig::default()
        };
        let (res, _) = plan(scenario, planner, &cfg)?;
        if !res.is_success() {
            return Err(invalid(format!("reference plan '{source}' found no path")));
        }
        return Ok(res.polyline(scenario.collision_step()));
    }
    let text = std::fs::read_to_string(Path::new(source))?;
    let poses: Vec<Pose> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: source.to_string(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    if poses.is_empty() || !poses.iter().all(Pose::is_finite) {
        return Err(invalid(format!(
            "reference '{source}' must be a nonempty list of finite poses"
        )));
    }
    Ok(poses)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSpec {
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub eps: f64,
    pub eta: f64,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub r_n: f64,
    pub milestones: usize,
    pub success: bool,
    pub cond_spacing: bool,
    pub cond_cost: bool,
    pub cond_proximity: bool,
    /// Independent re-check of all clauses at doubled sampling density.
    pub revalidated: bool,
    pub small_ball_miss_fraction: f64,
    pub empty_large_balls: usize,
    pub reference_cost: f64,
    pub trace_cost: Option<f64>,
    pub cost_ratio: Option<f64>,
    pub cost_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub n: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
}

/// Trace trials for every `(n, trial)`, sorted by `(n, trial)`.
pub fn run_trace_sweep(scenario: &Scenario, x_ref: &[Pose], spec: &TraceSpec) -> Result<Vec<TraceRow>> {
    check_n_values(&spec.n_values, spec.trials)?;
    if !(spec.eps > 0.0) {
        return Err(invalid(format!("eps must be positive, got {}", spec.eps)));
    }
    let params = TraceParams::from_eps(spec.eps);
    let rt = scenario.turning_radius();
    let mut rows = Vec::new();
    for &n in &spec.n_values {
        let r_n = scenario_radius(scenario, n, spec.eta)?;
        let reference = TraceReference::new(x_ref, r_n, rt)?;
        let mut batch = (0..spec.trials)
            .into_par_iter()
            .map(|t| {
                let seed = spec.base_seed.wrapping_add(t as u64);
                let v = planner_vertices(scenario, n, seed)?;
                let rep = reference.trace(&v, &params)?;
                let revalidated = rep.success() && reference.revalidate(&rep, &v, spec.eps);
                Ok(TraceRow {
                    n,
                    trial: t,
                    seed,
                    r_n,
                    milestones: rep.milestone_count,
                    success: rep.success(),
                    cond_spacing: rep.cond_spacing,
                    cond_cost: rep.cond_cost,
                    cond_proximity: rep.cond_proximity,
                    revalidated,
                    small_ball_miss_fraction: rep.small_ball_miss_fraction,
                    empty_large_balls: rep.empty_large_balls,
                    reference_cost: rep.reference_cost,
                    trace_cost: rep.trace_cost,
                    cost_ratio: rep.trace_cost.map(|c| c / rep.reference_cost),
                    cost_bound: rep.cost_bound,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        batch.sort_by_key(|r| r.trial);
        rows.extend(batch);
    }
    Ok(rows)
}

pub fn summarize_traces(rows: &[TraceRow]) -> Vec<TraceSummary> {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let group: Vec<&TraceRow> = rows.iter().filter(|r| r.n == n).collect();
            let successes = group.iter().filter(|r| r.success).count();
            TraceSummary {
                n,
                trials: group.len(),
                successes,
                success_rate: successes as f64 / group.len() as f64,
            }
        })
        .collect()
}
