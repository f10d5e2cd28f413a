//! Problem instances: workspace, polygonal obstacles, start, goal, sampling
//! and collision checking.
//!
//! The car is a point in the plane; heading never affects collision.
//! Obstacles and the workspace rectangle are closed sets, so touching an
//! obstacle boundary is a collision while touching the outer bounds is not.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{segments_intersect, Aabb, Point, Polygon};
use crate::pose::Pose;
use crate::reeds_shepp::RsPath;

/// Planar disc of accepted end positions; any heading is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalRegion {
    pub center: Point,
    pub radius: f64,
}

impl GoalRegion {
    pub fn contains(&self, p: &Pose) -> bool {
        in_goal(self, p)
    }
}

/// Closure convention: the disc boundary is part of the goal.
pub fn in_goal(goal: &GoalRegion, p: &Pose) -> bool {
    (p.x - goal.center[0]).hypot(p.y - goal.center[1]) <= goal.radius
}

/// On-disk scenario layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub bounds: [f64; 4],
    #[serde(default)]
    pub obstacles: Vec<Vec<Point>>,
    pub x_init: [f64; 3],
    pub goal: GoalRegion,
    #[serde(rename = "R")]
    pub turning_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collision_step: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

/// Uniform grid over the workspace listing, per cell, the obstacles whose
/// bounding box and the obstacle edges whose extent touch the cell.
#[derive(Debug, Clone)]
struct ObstacleGrid {
    origin: Point,
    cell: [f64; 2],
    dims: [usize; 2],
    cells: Vec<Vec<u32>>,
    edges: Vec<Vec<(Point, Point)>>,
}

impl ObstacleGrid {
    const MAX_DIM: usize = 64;

    fn build(bounds: &Aabb, obstacles: &[Polygon]) -> Self {
        let ext = [bounds.max[0] - bounds.min[0], bounds.max[1] - bounds.min[1]];
        let side = ext[0].max(ext[1]) / Self::MAX_DIM as f64;
        let dims = [
            ((ext[0] / side).ceil() as usize).clamp(1, Self::MAX_DIM),
            ((ext[1] / side).ceil() as usize).clamp(1, Self::MAX_DIM),
        ];
        let cell = [ext[0] / dims[0] as f64, ext[1] / dims[1] as f64];
        let mut grid = Self {
            origin: bounds.min,
            cell,
            dims,
            cells: vec![Vec::new(); dims[0] * dims[1]],
            edges: vec![Vec::new(); dims[0] * dims[1]],
        };
        for (k, poly) in obstacles.iter().enumerate() {
            let (i0, j0, i1, j1) = grid.range(poly.bbox());
            for i in i0..=i1 {
                for j in j0..=j1 {
                    grid.cells[j * dims[0] + i].push(k as u32);
                }
            }
            for (a, b) in poly.edges() {
                let (i0, j0, i1, j1) = grid.range(&Aabb::of([a, b]));
                for i in i0..=i1 {
                    for j in j0..=j1 {
                        grid.edges[j * dims[0] + i].push((a, b));
                    }
                }
            }
        }
        grid
    }

    fn index(&self, v: f64, axis: usize) -> usize {
        let t = ((v - self.origin[axis]) / self.cell[axis]).floor();
        (t.max(0.0) as usize).min(self.dims[axis] - 1)
    }

    /// Cell range covering a box, widened by one cell against rounding.
    fn range(&self, b: &Aabb) -> (usize, usize, usize, usize) {
        let lo = |v, a| self.index(v, a).saturating_sub(1);
        let hi = |v, a| (self.index(v, a) + 1).min(self.dims[a] - 1);
        (lo(b.min[0], 0), lo(b.min[1], 1), hi(b.max[0], 0), hi(b.max[1], 1))
    }

    /// Whether segment `pq` meets any obstacle edge.
    fn crosses_edge(&self, p: Point, q: Point) -> bool {
        let b = Aabb::of([p, q]);
        let i0 = self.index(b.min[0], 0);
        let i1 = self.index(b.max[0], 0);
        let j0 = self.index(b.min[1], 1);
        let j1 = self.index(b.max[1], 1);
        (j0..=j1).any(|j| {
            (i0..=i1).any(|i| {
                self.edges[j * self.dims[0] + i]
                    .iter()
                    .any(|&(a, c)| Aabb::of([a, c]).overlaps(&b) && segments_intersect(p, q, a, c))
            })
        })
    }

    fn candidates(&self, b: &Aabb, mut f: impl FnMut(usize) -> bool) -> bool {
        let i0 = self.index(b.min[0], 0);
        let i1 = self.index(b.max[0], 0);
        let j0 = self.index(b.min[1], 1);
        let j1 = self.index(b.max[1], 1);
        let single = i0 == i1 && j0 == j1;
        let mut seen: Vec<u32> = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                for &k in &self.cells[j * self.dims[0] + i] {
                    if !single {
                        if seen.contains(&k) {
                            continue;
                        }
                        seen.push(k);
                    }
                    if !f(k as usize) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// A validated, immutable planning problem.
#[derive(Debug, Clone)]
pub struct Scenario {
    bounds: Aabb,
    obstacles: Vec<Polygon>,
    x_init: Pose,
    goal: GoalRegion,
    turning_radius: f64,
    collision_step: f64,
    seed: u64,
    grid: ObstacleGrid,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidScenario(msg.into())
}

impl Scenario {
    pub fn from_file_repr(f: ScenarioFile) -> Result<Self> {
        let [xmin, ymin, xmax, ymax] = f.bounds;
        if !f.bounds.iter().all(|v| v.is_finite()) || !(xmin < xmax && ymin < ymax) {
            return Err(bad(format!(
                "bounds must be finite with xmin < xmax and ymin < ymax, got {:?}",
                f.bounds
            )));
        }
        let bounds = Aabb {
            min: [xmin, ymin],
            max: [xmax, ymax],
        };
        if !(f.turning_radius > 0.0 && f.turning_radius.is_finite()) {
            return Err(bad(format!("R must be positive and finite, got {}", f.turning_radius)));
        }
        let collision_step = f.collision_step.unwrap_or(0.1 * f.turning_radius);
        if !(collision_step > 0.0 && collision_step.is_finite()) {
            return Err(bad(format!("collision_step must be positive, got {collision_step}")));
        }
        if !(f.goal.radius > 0.0 && f.goal.radius.is_finite()) || !f.goal.center.iter().all(|v| v.is_finite()) {
            return Err(bad("goal needs a finite center and a positive radius"));
        }
        let mut obstacles = Vec::with_capacity(f.obstacles.len());
        for (k, pts) in f.obstacles.into_iter().enumerate() {
            let poly = Polygon::new(pts).map_err(|e| bad(format!("obstacle {k}: {e}")))?;
            if !poly.vertices().iter().all(|&p| bounds.contains(p)) {
                return Err(bad(format!("obstacle {k} leaves the bounds")));
            }
            if let Some(j) = obstacles.iter().position(|o: &Polygon| o.meets(&poly)) {
                return Err(bad(format!("obstacles {j} and {k} intersect")));
            }
            obstacles.push(poly);
        }
        let x_init = Pose::from(f.x_init);
        if !x_init.is_finite() {
            return Err(bad("x_init must be finite"));
        }
        let grid = ObstacleGrid::build(&bounds, &obstacles);
        let sc = Scenario {
            bounds,
            obstacles,
            x_init,
            goal: f.goal,
            turning_radius: f.turning_radius,
            collision_step,
            seed: f.seed,
            grid,
        };
        if !sc.point_free([x_init.x, x_init.y]) {
            return Err(bad("x_init is not in free space"));
        }
        if !sc.goal_reaches_free_space() {
            return Err(bad("goal region does not intersect free space"));
        }
        Ok(sc)
    }

    pub fn from_json_str(text: &str, origin: &str) -> Result<Self> {
        let f: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })?;
        Self::from_file_repr(f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    pub fn to_file_repr(&self) -> ScenarioFile {
        ScenarioFile {
            bounds: [
                self.bounds.min[0],
                self.bounds.min[1],
                self.bounds.max[0],
                self.bounds.max[1],
            ],
            obstacles: self.obstacles.iter().map(|p| p.vertices().to_vec()).collect(),
            x_init: self.x_init.into(),
            goal: self.goal,
            turning_radius: self.turning_radius,
            collision_step: Some(self.collision_step),
            seed: self.seed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file_repr()).expect("scenario serialises")
    }

    /// Same problem with a different start pose (revalidated).
    pub fn with_start(&self, x_init: Pose) -> Result<Self> {
        let mut f = self.to_file_repr();
        f.x_init = x_init.into();
        Self::from_file_repr(f)
    }

    pub fn bounds(&self) -> &Aabb {
        &self.bounds
    }

    pub fn obstacles(&self) -> &[Polygon] {
        &self.obstacles
    }

    pub fn x_init(&self) -> Pose {
        self.x_init
    }

    pub fn goal(&self) -> &GoalRegion {
        &self.goal
    }

    pub fn turning_radius(&self) -> f64 {
        self.turning_radius
    }

    pub fn collision_step(&self) -> f64 {
        self.collision_step
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Planar point inside the closed bounds and outside every closed obstacle.
    pub fn point_free(&self, p: Point) -> bool {
        if !self.bounds.contains(p) {
            return false;
        }
        let b = Aabb { min: p, max: p };
        self.grid.candidates(&b, |k| !self.obstacles[k].contains(p))
    }

    pub fn pose_free(&self, p: &Pose) -> bool {
        self.point_free([p.x, p.y])
    }

    /// Closed segment check against bounds and obstacles.
    pub fn segment_free(&self, a: Point, b: Point) -> bool {
        if !self.bounds.contains(a) || !self.bounds.contains(b) {
            return false;
        }
        let bb = Aabb::of([a, b]);
        self.grid.candidates(&bb, |k| !self.obstacles[k].hits_segment(a, b))
    }

    /// Polyline check of `path` from `from` at the scenario's collision step.
    pub fn collision_free(&self, from: &Pose, path: &RsPath) -> bool {
        self.collision_free_at(from, path, self.collision_step)
    }

    /// Polyline check at an explicit resolution.
    ///
    /// Only the first vertex gets a containment test: a connected polyline
    /// starting outside every closed obstacle enters one only by meeting its
    /// boundary, so the remaining segments are tested against edges alone.
    pub fn collision_free_at(&self, from: &Pose, path: &RsPath, step: f64) -> bool {
        let mut prev: Option<Point> = None;
        path.for_each_sample(from, step, |p| {
            let cur = [p.x, p.y];
            let ok = match prev {
                None => self.point_free(cur),
                Some(a) => self.bounds.contains(cur) && !self.grid.crosses_edge(a, cur),
            };
            prev = Some(cur);
            ok
        })
    }

    /// `2π · (area(bounds) − Σ area(obstacle))`.
    pub fn free_space_measure(&self) -> f64 {
        let w = self.bounds.max[0] - self.bounds.min[0];
        let h = self.bounds.max[1] - self.bounds.min[1];
        let blocked: f64 = self.obstacles.iter().map(Polygon::area).sum();
        2.0 * PI * (w * h - blocked)
    }

    /// `n` i.i.d. uniform free poses, deterministic in `seed`.
    pub fn sample_free(&self, n: usize, seed: u64) -> Result<Vec<Pose>> {
        self.sample_free_with_budget(n, seed, 1000u64.saturating_mul(n as u64))
    }

    /// Rejection sampling with an explicit attempt budget.
    pub fn sample_free_with_budget(&self, n: usize, seed: u64, max_attempts: u64) -> Result<Vec<Pose>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        let mut attempts = 0u64;
        let w = self.bounds.max[0] - self.bounds.min[0];
        let h = self.bounds.max[1] - self.bounds.min[1];
        while out.len() < n {
            if attempts >= max_attempts {
                return Err(Error::SamplingBudget {
                    attempts,
                    accepted: out.len(),
                    requested: n,
                });
            }
            attempts += 1;
            let x = self.bounds.min[0] + w * rng.random::<f64>();
            let y = self.bounds.min[1] + h * rng.random::<f64>();
            // u in [0, 1) maps onto (-π, π]
            let theta = PI - 2.0 * PI * rng.random::<f64>();
            if self.point_free([x, y]) {
                out.push(Pose::new(x, y, theta));
            }
        }
        Ok(out)
    }

    fn goal_reaches_free_space(&self) -> bool {
        let g = &self.goal;
        if self.point_free(g.center) {
            return true;
        }
        // deterministic polar scan of the open disc
        let (rings, spokes) = (64, 128);
        (1..rings).any(|i| {
            let rho = g.radius * i as f64 / rings as f64;
            (0..spokes).any(|j| {
                let a = 2.0 * PI * j as f64 / spokes as f64;
                self.point_free([g.center[0] + rho * a.cos(), g.center[1] + rho * a.sin()])
            })
        })
    }
}

pub fn sample_free(scenario: &Scenario, n: usize, seed: u64) -> Result<Vec<Pose>> {
    scenario.sample_free(n, seed)
}

pub fn collision_free(scenario: &Scenario, from: &Pose, path: &RsPath) -> bool {
    scenario.collision_free(from, path)
}

pub fn free_space_measure(scenario: &Scenario) -> f64 {
    scenario.free_space_measure()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reeds_shepp::steer;

    fn file(obstacles: Vec<Vec<Point>>) -> ScenarioFile {
        ScenarioFile {
            bounds: [0.0, 0.0, 10.0, 10.0],
            obstacles,
            x_init: [1.0, 1.0, 0.0],
            goal: GoalRegion {
                center: [9.0, 9.0],
                radius: 0.5,
            },
            turning_radius: 1.0,
            collision_step: None,
            seed: 0,
        }
    }

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point> {
        vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
    }

    #[test]
    fn measure_examples() {
        let s = Scenario::from_file_repr(file(vec![])).unwrap();
        assert!((s.free_space_measure() - 200.0 * PI).abs() < 1e-12);
        let s = Scenario::from_file_repr(file(vec![rect(4.0, 4.0, 6.0, 6.0)])).unwrap();
        assert!((s.free_space_measure() - 192.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn default_step_and_ccw() {
        let mut f = file(vec![vec![[4.0, 4.0], [4.0, 6.0], [6.0, 6.0], [6.0, 4.0]]]);
        f.turning_radius = 0.5;
        let s = Scenario::from_file_repr(f).unwrap();
        assert_eq!(s.collision_step(), 0.05);
        assert!(s.obstacles()[0].area() > 0.0);
    }

    #[test]
    fn validation_errors() {
        let mut f = file(vec![rect(0.5, 0.5, 2.0, 2.0)]);
        assert!(Scenario::from_file_repr(f.clone()).is_err(), "start inside obstacle");
        f.obstacles = vec![rect(3.0, 3.0, 5.0, 5.0), rect(4.0, 4.0, 6.0, 6.0)];
        assert!(Scenario::from_file_repr(f.clone()).is_err(), "overlap");
        f.obstacles = vec![rect(3.0, 3.0, 5.0, 5.0), rect(5.0, 3.0, 6.0, 5.0)];
        assert!(Scenario::from_file_repr(f.clone()).is_err(), "touching");
        f.obstacles = vec![rect(8.0, 8.0, 11.0, 9.0)];
        assert!(Scenario::from_file_repr(f.clone()).is_err(), "out of bounds");
        f.obstacles = vec![rect(8.0, 8.0, 10.0, 10.0)];
        assert!(Scenario::from_file_repr(f.clone()).is_err(), "goal covered");
        f.obstacles = vec![rect(8.9, 8.9, 10.0, 10.0)];
        assert!(Scenario::from_file_repr(f.clone()).is_ok(), "goal partly free");
        f.obstacles.clear();
        f.turning_radius = 0.0;
        assert!(Scenario::from_file_repr(f.clone()).is_err());
        f.turning_radius = 1.0;
        f.collision_step = Some(-1.0);
        assert!(Scenario::from_file_repr(f).is_err());
    }

    #[test]
    fn parse_error_has_position() {
        let text = "{\n  \"bounds\": [0, 0, 10, 10],\n  \"x_init\": [1, 1, 0,\n}";
        match Scenario::from_json_str(text, "bad.json") {
            Err(Error::Parse { line, path, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(path, "bad.json");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_roundtrip() {
        let s = Scenario::from_file_repr(file(vec![rect(3.0, 3.0, 5.0, 5.0)])).unwrap();
        let t = Scenario::from_json_str(&s.to_json(), "mem").unwrap();
        assert_eq!(t.to_json(), s.to_json());
    }

    #[test]
    fn goal_closure() {
        let g = GoalRegion {
            center: [0.0, 0.0],
            radius: 1.0,
        };
        assert!(in_goal(&g, &Pose::new(0.0, 0.0, 2.0)));
        assert!(in_goal(&g, &Pose::new(1.0, 0.0, -1.0)));
        assert!(!in_goal(&g, &Pose::new(1.0 + 1e-12, 0.0, 0.0)));
    }

    #[test]
    fn collision_cases() {
        let s = Scenario::from_file_repr(file(vec![rect(4.0, 0.0, 5.0, 6.0)])).unwrap();
        let a = Pose::new(2.0, 3.0, 0.0);
        let b = Pose::new(7.0, 3.0, 0.0);
        assert!(!s.collision_free(&a, &steer(&a, &b, 1.0)));
        let c = Pose::new(2.0, 8.0, 0.0);
        let d = Pose::new(7.0, 8.0, 0.0);
        assert!(s.collision_free(&c, &steer(&c, &d, 1.0)));
        // grazing the top edge of the wall
        let e = Pose::new(2.0, 6.0, 0.0);
        let f = Pose::new(7.0, 6.0, 0.0);
        assert!(!s.collision_free(&e, &steer(&e, &f, 1.0)));
        // leaving the bounds
        let g = Pose::new(9.5, 8.0, 0.0);
        let h = Pose::new(9.5, 8.0, PI);
        assert!(!s.collision_free(&g, &steer(&g, &h, 1.0)));
    }

    #[test]
    fn sampling_is_free_and_deterministic() {
        let s = Scenario::from_file_repr(file(vec![rect(3.0, 3.0, 7.0, 7.0)])).unwrap();
        let a = s.sample_free(500, 9).unwrap();
        assert_eq!(a, s.sample_free(500, 9).unwrap());
        assert_ne!(a, s.sample_free(500, 10).unwrap());
        assert!(a.iter().all(|p| s.pose_free(p)));
        assert!(s.sample_free(0, 1).unwrap().is_empty());
        assert!(matches!(
            s.sample_free_with_budget(10, 1, 3),
            Err(Error::SamplingBudget { attempts: 3, .. })
        ));
    }
}
