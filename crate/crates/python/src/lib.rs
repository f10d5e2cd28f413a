//! Python bindings: poses, scenarios, Reeds-Shepp steering and the two planners.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use dcaplan_core::planners::{plan as run_plan, scenario_radius, PlanConfig};
use dcaplan_core::subriemannian::{connection_radius as radius_schedule, privileged_coords as priv_coords, pseudonorm};
use dcaplan_core::{Error, NearMode, PlanResult, PlannerKind, Pose, RsPath, Scenario};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(name = "Pose", module = "dcaplan", frozen)]
struct PyPose(Pose);

#[pymethods]
impl PyPose {
    /// Heading is wrapped into (−π, π].
    #[new]
    fn new(x: f64, y: f64, theta: f64) -> Self {
        PyPose(Pose::new(x, y, theta))
    }

    #[getter]
    fn x(&self) -> f64 {
        self.0.x
    }

    #[getter]
    fn y(&self) -> f64 {
        self.0.y
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta()
    }

    fn to_tuple(&self) -> (f64, f64, f64) {
        (self.0.x, self.0.y, self.0.theta())
    }

    fn __repr__(&self) -> String {
        format!("Pose({}, {}, {})", self.0.x, self.0.y, self.0.theta())
    }

    fn __eq__(&self, other: PyRef<'_, PyPose>) -> bool {
        self.0 == other.0
    }
}

fn poses(v: &[Pose]) -> Vec<PyPose> {
    v.iter().copied().map(PyPose).collect()
}

/// Optimal path together with the pose it starts from.
#[pyclass(name = "RsPath", module = "dcaplan", frozen)]
struct PyRsPath {
    path: RsPath,
    start: Pose,
}

#[pymethods]
impl PyRsPath {
    #[getter]
    fn total_length(&self) -> f64 {
        self.path.total_length
    }

    #[getter]
    fn word(&self) -> &'static str {
        self.path.word
    }

    /// Segment string such as `L+S+R-`.
    fn letters(&self) -> String {
        self.path.letters()
    }

    /// `(kind, gear, length)` per segment.
    fn segments(&self) -> Vec<(String, String, f64)> {
        self.path
            .segments
            .iter()
            .map(|s| (format!("{:?}", s.kind), format!("{:?}", s.direction), s.length))
            .collect()
    }

    fn end_pose(&self) -> PyPose {
        PyPose(self.path.end_pose(&self.start))
    }

    /// Poses every `step` of arc length, ending exactly at the target.
    fn sample(&self, step: f64) -> PyResult<Vec<PyPose>> {
        if !(step > 0.0) {
            return Err(PyValueError::new_err("step must be positive"));
        }
        Ok(poses(&self.path.sample_poses(&self.start, step)))
    }

    fn __repr__(&self) -> String {
        format!("RsPath('{}', length={})", self.path.letters(), self.path.total_length)
    }
}

#[pyclass(name = "Scenario", module = "dcaplan", frozen)]
struct PyScenario(Scenario);

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Scenario::load(path).map(PyScenario).map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Scenario::from_json_str(text, "<string>").map(PyScenario).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn x_init(&self) -> PyPose {
        PyPose(self.0.x_init())
    }

    #[getter]
    fn turning_radius(&self) -> f64 {
        self.0.turning_radius()
    }

    #[getter]
    fn collision_step(&self) -> f64 {
        self.0.collision_step()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed()
    }

    /// `(center_x, center_y, radius)` of the goal disc.
    #[getter]
    fn goal(&self) -> (f64, f64, f64) {
        let g = self.0.goal();
        (g.center[0], g.center[1], g.radius)
    }

    fn free_space_measure(&self) -> f64 {
        self.0.free_space_measure()
    }

    fn pose_free(&self, p: PyRef<'_, PyPose>) -> bool {
        self.0.pose_free(&p.0)
    }

    fn in_goal(&self, p: PyRef<'_, PyPose>) -> bool {
        self.0.goal().contains(&p.0)
    }

    fn sample_free(&self, py: Python<'_>, n: usize, seed: u64) -> PyResult<Vec<PyPose>> {
        let v = py.detach(|| self.0.sample_free(n, seed)).map_err(to_py)?;
        Ok(poses(&v))
    }

    /// Whether the optimal path from `a` to `b` avoids every obstacle.
    fn edge_free(&self, a: PyRef<'_, PyPose>, b: PyRef<'_, PyPose>) -> bool {
        let path = dcaplan_core::steer(&a.0, &b.0, self.0.turning_radius());
        self.0.collision_free(&a.0, &path)
    }

    /// Connection radius `r_n` the planners use for `n` samples.
    #[pyo3(signature = (n, eta=0.0))]
    fn connection_radius(&self, n: usize, eta: f64) -> PyResult<f64> {
        scenario_radius(&self.0, n, eta).map_err(to_py)
    }
}

#[pyclass(name = "PlanResult", module = "dcaplan", frozen)]
struct PyPlanResult(PlanResult);

#[pymethods]
impl PyPlanResult {
    #[getter]
    fn success(&self) -> bool {
        self.0.is_success()
    }

    #[getter]
    fn cost(&self) -> Option<f64> {
        self.0.cost
    }

    #[getter]
    fn path(&self) -> Vec<usize> {
        self.0.path.clone()
    }

    #[getter]
    fn waypoints(&self) -> Vec<PyPose> {
        poses(&self.0.waypoints)
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.0.radius
    }

    #[getter]
    fn collision_checks(&self) -> u64 {
        self.0.stats.collision_checks
    }

    #[getter]
    fn steering_solves(&self) -> u64 {
        self.0.stats.steering_solves
    }

    #[getter]
    fn wall_time(&self) -> f64 {
        self.0.stats.wall_time
    }

    fn polyline(&self, step: f64) -> PyResult<Vec<PyPose>> {
        if !(step > 0.0) {
            return Err(PyValueError::new_err("step must be positive"));
        }
        Ok(poses(&self.0.polyline(step)))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        match self.0.cost {
            Some(c) => format!("PlanResult(success, cost={c}, waypoints={})", self.0.waypoints.len()),
            None => "PlanResult(failure)".to_string(),
        }
    }
}

#[pyfunction]
fn rs_distance(a: PyRef<'_, PyPose>, b: PyRef<'_, PyPose>, radius: f64) -> PyResult<f64> {
    check_radius(radius)?;
    Ok(dcaplan_core::rs_distance(&a.0, &b.0, radius))
}

#[pyfunction]
fn steer(a: PyRef<'_, PyPose>, b: PyRef<'_, PyPose>, radius: f64) -> PyResult<PyRsPath> {
    check_radius(radius)?;
    Ok(PyRsPath {
        path: dcaplan_core::steer(&a.0, &b.0, radius),
        start: a.0,
    })
}

fn check_radius(radius: f64) -> PyResult<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(PyValueError::new_err(format!(
            "turning radius must be positive and finite, got {radius}"
        )))
    }
}

/// `(z1, z2, z3)` of `target` in the frame of `base`, and its pseudonorm.
#[pyfunction]
fn privileged_coords(base: PyRef<'_, PyPose>, target: PyRef<'_, PyPose>) -> ((f64, f64, f64), f64) {
    let z = priv_coords(&base.0, &target.0);
    ((z.z1, z.z2, z.z3), pseudonorm(&z))
}

#[pyfunction]
#[pyo3(signature = (n, eta, mu_free, dim, a_max))]
fn connection_radius(n: usize, eta: f64, mu_free: f64, dim: u32, a_max: f64) -> PyResult<f64> {
    radius_schedule(n, eta, mu_free, dim, a_max).map_err(to_py)
}

/// Runs `dprm` or `dfmt` on `scenario`; `seed` defaults to the scenario's.
#[pyfunction]
#[pyo3(signature = (scenario, planner="dfmt", n=1000, seed=None, eta=0.0, mode="exact_ball", cache=true))]
#[allow(clippy::too_many_arguments)]
fn plan(
    py: Python<'_>,
    scenario: PyRef<'_, PyScenario>,
    planner: &str,
    n: usize,
    seed: Option<u64>,
    eta: f64,
    mode: &str,
    cache: bool,
) -> PyResult<PyPlanResult> {
    let kind: PlannerKind = planner.parse().map_err(PyValueError::new_err)?;
    let mode: NearMode = mode.parse().map_err(PyValueError::new_err)?;
    let sc = &scenario.0;
    let cfg = PlanConfig {
        n,
        eta,
        mode,
        seed: seed.unwrap_or(sc.seed()),
        cache,
    };
    let (res, _) = py.detach(|| run_plan(sc, kind, &cfg)).map_err(to_py)?;
    Ok(PyPlanResult(res))
}

#[pymodule]
fn dcaplan(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPose>()?;
    m.add_class::<PyRsPath>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyPlanResult>()?;
    m.add_function(wrap_pyfunction!(rs_distance, m)?)?;
    m.add_function(wrap_pyfunction!(steer, m)?)?;
    m.add_function(wrap_pyfunction!(privileged_coords, m)?)?;
    m.add_function(wrap_pyfunction!(connection_radius, m)?)?;
    m.add_function(wrap_pyfunction!(plan, m)?)?;
    Ok(())
}
