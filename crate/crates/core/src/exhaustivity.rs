//! Empirical check of probabilistic exhaustivity.
//!
//! Given a dense reference path and a sample set, [`find_trace`] builds the
//! waypoint sequence used in the exhaustivity argument (milestones every
//! `r/2` along the path, one sample from each ball of radius `r/4` around a
//! milestone, preferring the inner ball of radius `β r/4`) and reports which
//! of the three tracing clauses hold. The Monte-Carlo helpers estimate the
//! empty-region tail probabilities that drive the argument.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::environment::Scenario;
use crate::error::{invalid, Result};
use crate::pose::Pose;
use crate::reeds_shepp::{rs_distance, steer};

/// `c(x)`: sum of consecutive distances along a dense pose sequence.
pub fn reference_cost(x_ref: &[Pose], turning_radius: f64) -> f64 {
    x_ref
        .windows(2)
        .map(|w| rs_distance(&w[0], &w[1], turning_radius))
        .sum()
}

/// Greedy milestones: the first pose, then each first pose at distance at
/// least `r/2` from the previous milestone, then the final pose.
pub fn milestones(x_ref: &[Pose], r: f64, turning_radius: f64) -> Result<Vec<usize>> {
    if !(r > 0.0) {
        return Err(invalid(format!("milestone radius must be positive, got {r}")));
    }
    if x_ref.is_empty() {
        return Err(invalid("reference path is empty"));
    }
    let mut out = vec![0];
    for k in 1..x_ref.len() {
        let last = *out.last().unwrap();
        if rs_distance(&x_ref[last], &x_ref[k], turning_radius) >= r / 2.0 {
            out.push(k);
        }
    }
    if *out.last().unwrap() != x_ref.len() - 1 {
        out.push(x_ref.len() - 1);
    }
    Ok(out)
}

/// Upper bound on the waypoint path cost: `c(x) + 2 M ρ (β + α − α β)`.
pub fn waypoint_cost_bound(m: usize, rho: f64, alpha: f64, beta: f64, c_x: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&alpha) && (0.0..=1.0).contains(&beta));
    c_x + 2.0 * m as f64 * rho * (beta + alpha - alpha * beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceParams {
    pub eps: f64,
    /// Inner-ball fraction.
    pub beta: f64,
    /// Tolerated inner-ball miss fraction.
    pub alpha: f64,
}

impl TraceParams {
    /// `α = β = ε/2`, clamped to `[0, 1]`.
    pub fn from_eps(eps: f64) -> Self {
        let h = (eps / 2.0).clamp(0.0, 1.0);
        Self { eps, beta: h, alpha: h }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub n: usize,
    pub r_n: f64,
    pub milestone_count: usize,
    /// Chosen vertex per milestone; empty when some large ball has no sample.
    pub waypoints: Vec<usize>,
    pub empty_large_balls: usize,
    pub cond_spacing: bool,
    pub cond_cost: bool,
    pub cond_proximity: bool,
    pub small_ball_miss_fraction: f64,
    pub reference_cost: f64,
    /// `c(y*)`, if every large ball was hit.
    pub trace_cost: Option<f64>,
    /// Waypoint cost bound evaluated with the observed miss fraction.
    pub cost_bound: f64,
}

impl TraceReport {
    pub fn success(&self) -> bool {
        self.empty_large_balls == 0 && self.cond_spacing && self.cond_cost && self.cond_proximity
    }
}

/// Planar bucket index over a pose list.
struct Buckets {
    cell: f64,
    map: std::collections::HashMap<(i64, i64), Vec<usize>>,
}

impl Buckets {
    fn new(poses: &[Pose], cell: f64) -> Self {
        let mut map: std::collections::HashMap<(i64, i64), Vec<usize>> = Default::default();
        for (i, p) in poses.iter().enumerate() {
            map.entry(Self::key(p.x, p.y, cell)).or_default().push(i);
        }
        Self { cell, map }
    }

    fn key(x: f64, y: f64, cell: f64) -> (i64, i64) {
        ((x / cell).floor() as i64, (y / cell).floor() as i64)
    }

    /// Indices with planar distance ≤ `reach` (≤ cell) from `p`, ascending.
    fn near(&self, poses: &[Pose], p: &Pose, reach: f64) -> Vec<usize> {
        let (ci, cj) = Self::key(p.x, p.y, self.cell);
        let mut out = Vec::new();
        for di in -1..=1 {
            for dj in -1..=1 {
                if let Some(v) = self.map.get(&(ci + di, cj + dj)) {
                    out.extend(v.iter().copied().filter(|&k| poses[k].planar_distance(p) <= reach));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Reference path prepared for tracing at a fixed radius: milestones, cost
/// and a planar index for proximity witnesses.
pub struct TraceReference {
    poses: Vec<Pose>,
    r: f64,
    turning_radius: f64,
    milestones: Vec<usize>,
    cost: f64,
    buckets: Buckets,
}

impl TraceReference {
    pub fn new(x_ref: &[Pose], r: f64, turning_radius: f64) -> Result<Self> {
        let milestones = milestones(x_ref, r, turning_radius)?;
        Ok(Self {
            poses: x_ref.to_vec(),
            r,
            turning_radius,
            milestones,
            cost: reference_cost(x_ref, turning_radius),
            buckets: Buckets::new(x_ref, r),
        })
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn milestones(&self) -> &[usize] {
        &self.milestones
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    /// Whether every point of the locally optimal connections through
    /// `waypoints`, sampled every `step`, lies within distance `r` of a
    /// reference pose.
    pub fn proximity_holds(&self, waypoints: &[Pose], step: f64) -> bool {
        let (r, rt, x_ref) = (self.r, self.turning_radius, &self.poses);
        let mut last_witness = 0usize;
        let mut covered = |p: &Pose| {
            if rs_distance(p, &x_ref[last_witness], rt) <= r {
                return true;
            }
            for k in self.buckets.near(x_ref, p, r) {
                if rs_distance(p, &x_ref[k], rt) <= r {
                    last_witness = k;
                    return true;
                }
            }
            false
        };
        if waypoints.len() == 1 {
            return covered(&waypoints[0]);
        }
        waypoints.windows(2).all(|w| {
            let path = steer(&w[0], &w[1], rt);
            path.for_each_sample(&w[0], step, &mut covered)
        })
    }

    /// Builds the tracing waypoints from `vertices` (index 0 must be `x_init`,
    /// which becomes the first waypoint) and evaluates the three clauses.
    pub fn trace(&self, vertices: &[Pose], params: &TraceParams) -> Result<TraceReport> {
        if vertices.is_empty() {
            return Err(invalid("sample set must contain x_init"));
        }
        let (r_n, rt) = (self.r, self.turning_radius);
        let ms = &self.milestones;
        let rho = r_n / 4.0;
        let c_x = self.cost;
        let index = Buckets::new(vertices, rho);

        let mut waypoints = Vec::with_capacity(ms.len());
        let mut empty = 0usize;
        let mut misses = 0usize;
        for (m, &k) in ms.iter().enumerate() {
            let xm = &self.poses[k];
            let pick = if m == 0 {
                Some((0usize, rs_distance(xm, &vertices[0], rt)))
            } else {
                index
                    .near(vertices, xm, rho)
                    .into_iter()
                    .map(|v| (v, rs_distance(xm, &vertices[v], rt)))
                    .filter(|&(_, d)| d <= rho)
                    .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            };
            match pick {
                Some((v, d)) => {
                    if d > params.beta * rho {
                        misses += 1;
                    }
                    waypoints.push(v);
                }
                None => {
                    empty += 1;
                    misses += 1;
                }
            }
        }
        let miss_fraction = misses as f64 / ms.len() as f64;
        let cost_bound = waypoint_cost_bound(ms.len(), rho, miss_fraction, params.beta, c_x);

        let mut report = TraceReport {
            n: vertices.len() - 1,
            r_n,
            milestone_count: ms.len(),
            waypoints: Vec::new(),
            empty_large_balls: empty,
            cond_spacing: false,
            cond_cost: false,
            cond_proximity: false,
            small_ball_miss_fraction: miss_fraction,
            reference_cost: c_x,
            trace_cost: None,
            cost_bound,
        };
        if empty > 0 {
            return Ok(report);
        }
        let ys: Vec<Pose> = waypoints.iter().map(|&v| vertices[v]).collect();
        let hops: Vec<f64> = ys.windows(2).map(|w| rs_distance(&w[0], &w[1], rt)).collect();
        let c_y: f64 = hops.iter().sum();
        report.cond_spacing = hops.iter().all(|&d| d <= r_n);
        report.cond_cost = c_y <= (1.0 + params.eps) * c_x;
        report.cond_proximity = self.proximity_holds(&ys, r_n / 20.0);
        report.trace_cost = Some(c_y);
        report.waypoints = waypoints;
        Ok(report)
    }

    /// Re-checks a report's three clauses from scratch, sampling the
    /// connections twice as densely as [`TraceReference::trace`].
    pub fn revalidate(&self, report: &TraceReport, vertices: &[Pose], eps: f64) -> bool {
        if report.waypoints.is_empty() {
            return false;
        }
        let ys: Vec<Pose> = report.waypoints.iter().map(|&v| vertices[v]).collect();
        let r = self.r;
        let mut c_y = 0.0;
        for w in ys.windows(2) {
            // evaluated through the steered path itself
            let d = steer(&w[0], &w[1], self.turning_radius).total_length;
            if d > r {
                return false;
            }
            c_y += d;
        }
        c_y <= (1.0 + eps) * self.cost && self.proximity_holds(&ys, r / 40.0)
    }
}

/// One-shot [`TraceReference::trace`].
pub fn find_trace(
    x_ref: &[Pose],
    vertices: &[Pose],
    r_n: f64,
    params: &TraceParams,
    turning_radius: f64,
) -> Result<TraceReport> {
    TraceReference::new(x_ref, r_n, turning_radius)?.trace(vertices, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub trials: usize,
    pub hits: usize,
    pub probability: f64,
    pub standard_error: f64,
    /// Analytic upper bound on the probability.
    pub bound: f64,
}

impl TailEstimate {
    fn new(trials: usize, hits: usize, bound: f64) -> Self {
        let p = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        let se = if trials == 0 {
            0.0
        } else {
            (p * (1.0 - p) / trials as f64).sqrt()
        };
        Self {
            trials,
            hits,
            probability: p,
            standard_error: se,
            bound,
        }
    }

    /// `probability ≤ bound + k · standard_error`.
    pub fn within(&self, k: f64) -> bool {
        self.probability <= self.bound + k * self.standard_error
    }
}

/// Counts of samples per heading slab: slab `m` holds headings in
/// `[π − 2π (m+1) f, π − 2π m f)`, a region of volume fraction `f` of the
/// free space. Slabs are pairwise disjoint when `M f ≤ 1`.
fn slab_counts(samples: &[Pose], fraction: f64, m: usize) -> Vec<usize> {
    let mut counts = vec![0usize; m];
    if fraction <= 0.0 {
        return counts;
    }
    for p in samples {
        // u ∈ [0, 1): position of the heading from the top of the circle
        let u = (PI - p.theta()) / (2.0 * PI);
        let slot = (u / fraction).floor();
        if slot >= 0.0 && (slot as usize) < m {
            counts[slot as usize] += 1;
        }
    }
    counts
}

fn check_regions(fraction: f64, m: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(invalid(format!(
            "region volume fraction must lie in [0, 1], got {fraction}"
        )));
    }
    if m == 0 || m as f64 * fraction > 1.0 + 1e-12 {
        return Err(invalid(format!(
            "{m} disjoint regions of fraction {fraction} do not fit"
        )));
    }
    Ok(())
}

/// Monte-Carlo estimate of `P(some of M disjoint regions of volume fraction
/// f holds no sample)` with the bound `M n^(−κ)`, `κ = f n / log n`.
pub fn empty_ball_tail(
    scenario: &Scenario,
    fraction: f64,
    m: usize,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<TailEstimate> {
    check_regions(fraction, m)?;
    let mut hits = 0;
    for t in 0..trials {
        let samples = scenario.sample_free(n, seed.wrapping_add(t as u64))?;
        if slab_counts(&samples, fraction, m).contains(&0) {
            hits += 1;
        }
    }
    let nf = n as f64;
    let bound = if n >= 2 {
        let kappa = fraction * nf / nf.ln();
        (m as f64 * nf.powf(-kappa)).min(1.0)
    } else {
        1.0
    };
    Ok(TailEstimate::new(trials, hits, bound))
}

/// Smallest region volume fraction for which the small-ball tail bound holds:
/// `(2 + log(1/α)) e² / n`.
pub fn small_ball_fraction(alpha: f64, n: usize) -> f64 {
    (2.0 + (1.0 / alpha).ln()) * E * E / n as f64
}

/// Monte-Carlo estimate of `P(K_n ≥ α M)`, where `K_n` counts empty regions
/// among `M` disjoint regions of the minimal admissible volume, with the bound
/// `e^(−α M) / (1 − e^(−n))`.
pub fn small_ball_miss_tail(
    scenario: &Scenario,
    alpha: f64,
    m: usize,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<TailEstimate> {
    if !(alpha > 0.0 && alpha < 1.0) || n == 0 {
        return Err(invalid("small-ball tail needs 0 < alpha < 1 and n >= 1"));
    }
    let fraction = small_ball_fraction(alpha, n);
    check_regions(fraction, m)?;
    let mut hits = 0;
    for t in 0..trials {
        let samples = scenario.sample_free(n, seed.wrapping_add(t as u64))?;
        let k = slab_counts(&samples, fraction, m).iter().filter(|&&c| c == 0).count();
        if k as f64 >= alpha * m as f64 {
            hits += 1;
        }
    }
    let bound = (-alpha * m as f64).exp() / (1.0 - (-(n as f64)).exp());
    Ok(TailEstimate::new(trials, hits, bound))
}
