//! DPRM* (roadmap) and DFMT* (lazy marching tree) for the Reeds-Shepp car.
//!
//! Both planners share the sample stream, the connection radius and the edge
//! geometry: an edge `{i, j}` is always the path steered from the lower to the
//! higher vertex index, and its weight is that path's length. This keeps the
//! DFMT* tree a subgraph of the DPRM* roadmap on a shared sample set, and makes
//! cached and uncached runs bit-identical.

mod graph;
mod near;

use std::collections::BinaryHeap;
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use graph::{dijkstra, trace_back};
pub use near::{near, precompute_cache, NearMode, Neighbor, NeighborCache};

use crate::environment::Scenario;
use crate::error::{invalid, Result};
use crate::pose::Pose;
use crate::reeds_shepp::{steer, RsPath};
use crate::subriemannian::{connection_radius, rs_constants, HOMOGENEOUS_DIM};
use graph::Entry;
use near::Neighborhoods;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Dprm,
    Dfmt,
}

impl std::str::FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().trim_end_matches('*') {
            "dprm" => Ok(PlannerKind::Dprm),
            "dfmt" => Ok(PlannerKind::Dfmt),
            _ => Err(format!("unknown planner '{s}' (expected dprm or dfmt)")),
        }
    }
}

impl std::fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PlannerKind::Dprm => "dprm",
            PlannerKind::Dfmt => "dfmt",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanStatus {
    Success,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanStats {
    pub collision_checks: u64,
    /// Distance and steering evaluations the planner consumed, whether
    /// computed on the spot or served from the near-set cache.
    pub steering_solves: u64,
    /// Seconds spent sampling, building the graph and searching. Building
    /// the near-set cache is excluded.
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub status: PlanStatus,
    /// Vertex indices from `x_init` (index 0) to the goal vertex.
    pub path: Vec<usize>,
    pub waypoints: Vec<Pose>,
    /// One steered path per consecutive waypoint pair, in travel direction.
    #[serde(skip_deserializing)]
    pub edges: Vec<RsPath>,
    /// Total arc length; `None` on failure.
    pub cost: Option<f64>,
    /// Connection radius used.
    pub radius: f64,
    pub stats: PlanStats,
}

impl PlanResult {
    pub fn is_success(&self) -> bool {
        self.status == PlanStatus::Success
    }

    /// Copy with timing zeroed, for replay comparisons.
    pub fn without_timing(&self) -> PlanResult {
        let mut r = self.clone();
        r.stats.wall_time = 0.0;
        r
    }

    /// Poses along the path every `step` of arc length (the collision polyline).
    pub fn polyline(&self, step: f64) -> Vec<Pose> {
        let mut out: Vec<Pose> = Vec::new();
        for (e, from) in self.edges.iter().zip(&self.waypoints) {
            let pts = e.sample_poses(from, step);
            let skip = usize::from(!out.is_empty());
            out.extend(pts.into_iter().skip(skip));
        }
        if out.is_empty() {
            out.extend(self.waypoints.first().copied());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Roadmap,
    Tree,
}

/// Vertices and collision-free edges produced by a planner.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerGraph {
    pub kind: GraphKind,
    pub vertices: Vec<Pose>,
    /// Undirected adjacency with edge weights, sorted by neighbor index.
    pub adjacency: Vec<Vec<(usize, f64)>>,
    pub neighbor_cache: Option<NeighborCache>,
    /// Cost-to-come (Dijkstra costs for a roadmap, tree costs for a tree).
    pub cost: Vec<f64>,
    pub parent: Vec<Option<usize>>,
    pub radius: f64,
}

impl PlannerGraph {
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub n: usize,
    pub eta: f64,
    pub mode: NearMode,
    pub seed: u64,
    pub cache: bool,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            eta: 0.0,
            mode: NearMode::ExactBall,
            seed: 0,
            cache: true,
        }
    }
}

/// `r_n` for `n` samples in `scenario`.
pub fn scenario_radius(scenario: &Scenario, n: usize, eta: f64) -> Result<f64> {
    let consts = rs_constants(scenario.turning_radius())?;
    connection_radius(
        n.max(2),
        eta,
        scenario.free_space_measure(),
        HOMOGENEOUS_DIM,
        consts.a_max,
    )
}

/// `{x_init} ∪ SampleFree(n)`; index 0 is the start.
pub fn planner_vertices(scenario: &Scenario, n: usize, seed: u64) -> Result<Vec<Pose>> {
    let mut v = Vec::with_capacity(n + 1);
    v.push(scenario.x_init());
    v.extend(scenario.sample_free(n, seed)?);
    Ok(v)
}

pub fn plan(scenario: &Scenario, planner: PlannerKind, cfg: &PlanConfig) -> Result<(PlanResult, PlannerGraph)> {
    if cfg.n < 1 {
        return Err(invalid("planners need n >= 1"));
    }
    let r = scenario_radius(scenario, cfg.n, cfg.eta)?;
    let t0 = Instant::now();
    let vertices = planner_vertices(scenario, cfg.n, cfg.seed)?;
    let sampling = t0.elapsed().as_secs_f64();
    let cache = if cfg.cache {
        Some(precompute_cache(&vertices, r, cfg.mode, scenario.turning_radius())?)
    } else {
        None
    };
    let t1 = Instant::now();
    let (mut res, mut g) = match planner {
        PlannerKind::Dprm => dprm_on(scenario, vertices, r, cfg.mode, cache.as_ref(), cfg.seed)?,
        PlannerKind::Dfmt => dfmt_on(scenario, vertices, r, cfg.mode, cache.as_ref())?,
    };
    res.stats.wall_time = sampling + t1.elapsed().as_secs_f64();
    g.neighbor_cache = cache;
    Ok((res, g))
}

pub fn dprm_plan(scenario: &Scenario, cfg: &PlanConfig) -> Result<(PlanResult, PlannerGraph)> {
    plan(scenario, PlannerKind::Dprm, cfg)
}

pub fn dfmt_plan(scenario: &Scenario, cfg: &PlanConfig) -> Result<(PlanResult, PlannerGraph)> {
    plan(scenario, PlannerKind::Dfmt, cfg)
}

/// Edge geometry for `{i, j}`: steered from the lower index, reported in
/// the requested travel direction.
fn edge_path(vertices: &[Pose], from: usize, to: usize, turning_radius: f64) -> RsPath {
    let (a, b) = if from < to { (from, to) } else { (to, from) };
    let p = steer(&vertices[a], &vertices[b], turning_radius);
    if from < to {
        p
    } else {
        p.reversed()
    }
}

fn edge_free(scenario: &Scenario, vertices: &[Pose], i: usize, j: usize) -> bool {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    let p = steer(&vertices[a], &vertices[b], scenario.turning_radius());
    scenario.collision_free(&vertices[a], &p)
}

fn assemble(
    scenario: &Scenario,
    vertices: &[Pose],
    path: Option<Vec<usize>>,
    cost: Option<f64>,
    r: f64,
    mut stats: PlanStats,
) -> PlanResult {
    let path = path.unwrap_or_default();
    let edges: Vec<RsPath> = path
        .windows(2)
        .map(|w| edge_path(vertices, w[0], w[1], scenario.turning_radius()))
        .collect();
    stats.steering_solves += edges.len() as u64;
    PlanResult {
        status: if cost.is_some() {
            PlanStatus::Success
        } else {
            PlanStatus::Failure
        },
        waypoints: path.iter().map(|&i| vertices[i]).collect(),
        path,
        edges,
        cost,
        radius: r,
        stats,
    }
}

/// DPRM* on a given vertex set (index 0 = start) and radius.
///
/// `tie_seed` drives the random choice among equally cheap goal vertices.
pub fn dprm_on(
    scenario: &Scenario,
    vertices: Vec<Pose>,
    r: f64,
    mode: NearMode,
    cache: Option<&NeighborCache>,
    tie_seed: u64,
) -> Result<(PlanResult, PlannerGraph)> {
    if vertices.is_empty() {
        return Err(invalid("vertex set must contain the start"));
    }
    let nbh = Neighborhoods::new(&vertices, r, mode, scenario.turning_radius(), cache)?;
    let n = vertices.len();
    let mut stats = PlanStats::default();

    // union of the (possibly directed) near relations, each pair once
    let mut pairs: Vec<(u32, u32, f64)> = Vec::new();
    for i in 0..n {
        let (list, evaluated) = nbh.near_of(i);
        stats.steering_solves += u64::from(evaluated);
        for nb in list.iter() {
            let j = nb.idx;
            pairs.push(if (i as u32) < j {
                (i as u32, j, nb.dist)
            } else {
                (j, i as u32, nb.dist)
            });
        }
    }
    pairs.sort_unstable_by_key(|p| (p.0, p.1));
    pairs.dedup_by_key(|p| (p.0, p.1));

    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(a, b, d) in &pairs {
        let (a, b) = (a as usize, b as usize);
        stats.collision_checks += 1;
        stats.steering_solves += 1;
        if edge_free(scenario, &vertices, a, b) {
            adjacency[a].push((b, d));
            adjacency[b].push((a, d));
        }
    }
    for l in &mut adjacency {
        l.sort_unstable_by_key(|e| e.0);
    }

    let (cost, pred) = dijkstra(&adjacency, 0);
    let best = (0..n)
        .filter(|&v| cost[v].is_finite() && scenario.goal().contains(&vertices[v]))
        .map(|v| cost[v])
        .min_by(f64::total_cmp);
    let (path, c) = match best {
        Some(c) => {
            let ties: Vec<usize> = (0..n)
                .filter(|&v| cost[v] == c && scenario.goal().contains(&vertices[v]))
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(tie_seed);
            rng.set_stream(1);
            let v = *ties.choose(&mut rng).expect("nonempty tie set");
            (Some(trace_back(&pred, v)), Some(c))
        }
        None => (None, None),
    };
    let res = assemble(scenario, &vertices, path, c, r, stats);
    let graph = PlannerGraph {
        kind: GraphKind::Roadmap,
        vertices,
        adjacency,
        neighbor_cache: None,
        cost,
        parent: pred,
        radius: r,
    };
    Ok((res, graph))
}

/// DFMT* on a given vertex set (index 0 = start) and radius.
pub fn dfmt_on(
    scenario: &Scenario,
    vertices: Vec<Pose>,
    r: f64,
    mode: NearMode,
    cache: Option<&NeighborCache>,
) -> Result<(PlanResult, PlannerGraph)> {
    if vertices.is_empty() {
        return Err(invalid("vertex set must contain the start"));
    }
    let nbh = Neighborhoods::new(&vertices, r, mode, scenario.turning_radius(), cache)?;
    let n = vertices.len();
    let mut stats = PlanStats::default();
    let mut cost = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut parent_dist = vec![0.0; n];
    let mut in_w = vec![true; n];
    let mut in_h = vec![false; n];
    let mut heap: BinaryHeap<Entry> = BinaryHeap::new();
    cost[0] = 0.0;
    in_w[0] = false;
    in_h[0] = true;
    let mut z = 0usize;
    let goal = scenario.goal();

    let reached = loop {
        if goal.contains(&vertices[z]) {
            break Some(z);
        }
        let mut h_new = Vec::new();
        let (x_near, ev) = nbh.near_of(z);
        stats.steering_solves += u64::from(ev);
        for xn in x_near.iter() {
            let x = xn.idx as usize;
            if !in_w[x] {
                continue;
            }
            let (y_near, ev) = nbh.near_of(x);
            stats.steering_solves += u64::from(ev);
            // lowest index wins ties: the list is sorted and the test is strict
            let mut y_min: Option<(usize, f64, f64)> = None;
            for yn in y_near.iter() {
                let y = yn.idx as usize;
                if in_h[y] {
                    let c = cost[y] + yn.dist;
                    if y_min.is_none_or(|(_, best, _)| c < best) {
                        y_min = Some((y, c, yn.dist));
                    }
                }
            }
            let Some((y, c, d)) = y_min else { continue };
            stats.collision_checks += 1;
            stats.steering_solves += 1;
            if edge_free(scenario, &vertices, y, x) {
                cost[x] = c;
                parent[x] = Some(y);
                parent_dist[x] = d;
                h_new.push(x);
                in_w[x] = false;
            }
        }
        for &x in &h_new {
            in_h[x] = true;
            heap.push(Entry { cost: cost[x], idx: x });
        }
        in_h[z] = false;
        let next = loop {
            match heap.pop() {
                Some(e) if in_h[e.idx] => break Some(e.idx),
                Some(_) => continue,
                None => break None,
            }
        };
        match next {
            Some(v) => z = v,
            None => break None,
        }
    };

    let (path, c) = match reached {
        Some(z) => (Some(trace_back(&parent, z)), Some(cost[z])),
        None => (None, None),
    };
    let res = assemble(scenario, &vertices, path, c, r, stats);
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (v, p) in parent.iter().enumerate() {
        if let Some(p) = *p {
            let w = parent_dist[v];
            adjacency[v].push((p, w));
            adjacency[p].push((v, w));
        }
    }
    for l in &mut adjacency {
        l.sort_unstable_by_key(|e| e.0);
    }
    let graph = PlannerGraph {
        kind: GraphKind::Tree,
        vertices,
        adjacency,
        neighbor_cache: None,
        cost,
        parent,
        radius: r,
    };
    Ok((res, graph))
}
