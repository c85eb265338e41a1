//! Python bindings: channel helpers, observation models, scenario frames and sweeps.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use vlp_crlb::channel::{self, ChannelCondition, NoiseLevel};
use vlp_crlb::crlb::{self, CrlbResult, ObservationModel, Parameterization};
use vlp_crlb::geometry::VehicleLayout;
use vlp_crlb::measurement::SimSetup;
use vlp_crlb::run::{self, RunConfig};
use vlp_crlb::scenarios::{generate_scenario, ScenarioId, ScenarioSpec, Trajectory};
use vlp_crlb::{Error, Method};

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

#[pyfunction]
fn lambertian_order(half_power_deg: f64) -> PyResult<u32> {
    channel::lambertian_order(half_power_deg.to_radians()).map_err(py_err)
}

#[pyfunction]
fn feedback_resistance(open_loop_gain: f64, bandwidth: f64, capacitance: f64) -> PyResult<f64> {
    channel::feedback_resistance(open_loop_gain, bandwidth, capacitance).map_err(py_err)
}

/// Names accepted wherever a method is expected.
#[pyfunction]
fn methods() -> Vec<&'static str> {
    Method::ALL.iter().map(|m| m.name()).collect()
}

#[pyclass(name = "CrlbResult", frozen)]
struct PyCrlbResult {
    #[pyo3(get)]
    full_rank: bool,
    #[pyo3(get)]
    rank: usize,
    #[pyo3(get)]
    dim: usize,
    #[pyo3(get)]
    condition_number: f64,
    /// Bounds on each parameter's variance, `None` when rank deficient.
    #[pyo3(get)]
    variances: Option<Vec<f64>>,
    #[pyo3(get)]
    parameters: Vec<String>,
}

impl PyCrlbResult {
    fn new(r: CrlbResult, parameters: Vec<String>) -> Self {
        Self {
            full_rank: r.is_full_rank(),
            rank: r.rank,
            dim: r.dim,
            condition_number: r.condition_number,
            variances: r.variances,
            parameters,
        }
    }
}

#[pymethods]
impl PyCrlbResult {
    fn std_devs(&self) -> Option<Vec<f64>> {
        self.variances.as_ref().map(|v| v.iter().map(|x| x.sqrt()).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "CrlbResult(full_rank={}, rank={}/{}, cond={:.3e}, std={:?})",
            self.full_rank,
            self.rank,
            self.dim,
            self.condition_number,
            self.std_devs()
        )
    }
}

fn param_names(method: Method, n: usize) -> Vec<String> {
    let base: Vec<String> = method.parameter_names().iter().map(|s| s.to_string()).collect();
    match (method, n) {
        (Method::PDoA, 4) => ["x11", "y11", "x12", "y12"].map(String::from).to_vec(),
        (Method::AoA1, 8) => ["x11", "y11", "x11_dt", "y11_dt", "x12", "y12", "x12_dt", "y12_dt"]
            .map(String::from)
            .to_vec(),
        _ => base,
    }
}

#[pyclass(name = "ObservationModel")]
struct PyObservationModel {
    inner: ObservationModel,
}

#[pymethods]
impl PyObservationModel {
    #[new]
    #[pyo3(signature = (method, params, extended = false))]
    fn new(method: &str, params: Vec<f64>, extended: bool) -> PyResult<Self> {
        let form = if extended {
            Parameterization::Extended
        } else {
            Parameterization::Standard
        };
        let inner = ObservationModel::with_form(parse(method)?, params, &VehicleLayout::default(), form).map_err(py_err)?;
        Ok(Self { inner })
    }

    fn observe(&self) -> PyResult<Vec<f64>> {
        self.inner.observe().map_err(py_err)
    }

    fn jacobian(&self) -> PyResult<Vec<Vec<f64>>> {
        let j = self.inner.jacobian_analytic().map_err(py_err)?;
        Ok(j.row_iter().map(|r| r.iter().cloned().collect()).collect())
    }

    #[pyo3(signature = (rel_step = 1e-6))]
    fn jacobian_numeric(&self, rel_step: f64) -> PyResult<Vec<Vec<f64>>> {
        let j = self.inner.jacobian_numeric(rel_step).map_err(py_err)?;
        Ok(j.row_iter().map(|r| r.iter().cloned().collect()).collect())
    }

    /// Bound for the given observation variances.
    fn crlb(&self, variances: Vec<f64>) -> PyResult<PyCrlbResult> {
        let j = self.inner.jacobian_analytic().map_err(py_err)?;
        let f = crlb::fisher(&j, &variances).map_err(py_err)?;
        Ok(PyCrlbResult::new(
            crlb::crlb(&f),
            param_names(self.inner.method, self.inner.parameter_dim()),
        ))
    }
}

#[pyclass(name = "Scenario")]
struct PyScenario {
    trajectory: Trajectory,
}

fn condition(name: &str) -> PyResult<ChannelCondition> {
    Ok(ChannelCondition::from_level(parse::<NoiseLevel>(name)?))
}

#[pymethods]
impl PyScenario {
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        let spec = ScenarioSpec::defaults(parse::<ScenarioId>(name)?);
        let trajectory = generate_scenario(&spec).map_err(py_err)?;
        Ok(Self { trajectory })
    }

    #[staticmethod]
    fn from_file(path: PathBuf) -> PyResult<Self> {
        let spec = ScenarioSpec::from_file(&path).map_err(py_err)?;
        let trajectory = generate_scenario(&spec).map_err(py_err)?;
        Ok(Self { trajectory })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.trajectory.spec.id.name()
    }

    fn __len__(&self) -> usize {
        self.trajectory.len()
    }

    fn times(&self) -> Vec<f64> {
        self.trajectory.frames().iter().map(|f| f.time).collect()
    }

    /// `((x, y, heading) ego, (x, y, heading) target)` at frame `i`.
    fn poses(&self, i: usize) -> PyResult<((f64, f64, f64), (f64, f64, f64))> {
        let f = self
            .trajectory
            .frames()
            .get(i)
            .ok_or_else(|| PyValueError::new_err(format!("frame {i} out of range")))?;
        Ok(((f.ego.x, f.ego.y, f.ego.heading), (f.target.x, f.target.y, f.target.heading)))
    }

    /// Bumper gap and lateral offset at frame `i`.
    fn gaps(&self, i: usize) -> PyResult<(f64, f64)> {
        if i >= self.trajectory.len() {
            return Err(PyValueError::new_err(format!("frame {i} out of range")));
        }
        Ok(self.trajectory.gaps(i))
    }

    /// Samples the method's front-end at frame `i` and returns
    /// `(observation variances, CrlbResult)`.
    #[pyo3(signature = (method, frame, condition = "low", trials = 1000, seed = 0))]
    fn crlb(
        &self,
        py: Python<'_>,
        method: &str,
        frame: usize,
        condition: &str,
        trials: usize,
        seed: u64,
    ) -> PyResult<(Vec<f64>, PyCrlbResult)> {
        let m: Method = parse(method)?;
        let cond = self::condition(condition)?;
        if frame >= self.trajectory.len() {
            return Err(PyValueError::new_err(format!("frame {frame} out of range")));
        }
        let snap = self.trajectory.snapshot(frame, self.trajectory.spec.lookahead_frames);
        let setup = SimSetup::default();
        let (v, r) = py
            .detach(|| crlb::crlb_pipeline(m, &snap, &setup, &cond, trials, seed))
            .map_err(py_err)?;
        Ok((v.variances, PyCrlbResult::new(r, param_names(m, m.parameter_dim()))))
    }
}

/// Full sweep written to `out`; returns the paths of the written files.
#[pyfunction]
#[pyo3(signature = (scenario, methods = None, conditions = None, trials = 1000, seed = 0, out = PathBuf::from("out"), plots = false))]
fn run_sweep(
    py: Python<'_>,
    scenario: &str,
    methods: Option<Vec<String>>,
    conditions: Option<Vec<String>>,
    trials: usize,
    seed: u64,
    out: PathBuf,
    plots: bool,
) -> PyResult<Vec<String>> {
    let mut c = RunConfig::new(parse(scenario)?);
    if let Some(m) = methods {
        c.methods = run::config::parse_list(&m).map_err(py_err)?;
    }
    if let Some(k) = conditions {
        c.conditions = run::config::parse_list(&k).map_err(py_err)?;
    }
    c.trials = trials;
    c.seed = seed;
    c.out_dir = out;
    c.emit_plots = plots;
    let problems = run::validate(&c);
    if !problems.is_empty() {
        return Err(PyValueError::new_err(problems.join("; ")));
    }
    let output = py.detach(|| run::run(&c)).map_err(py_err)?;
    Ok(output.files.iter().map(|p| p.display().to_string()).collect())
}

#[pymodule]
#[pyo3(name = "vlp_crlb")]
fn vlp_crlb_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(lambertian_order, m)?)?;
    m.add_function(wrap_pyfunction!(feedback_resistance, m)?)?;
    m.add_function(wrap_pyfunction!(methods, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_class::<PyCrlbResult>()?;
    m.add_class::<PyObservationModel>()?;
    m.add_class::<PyScenario>()?;
    Ok(())
}
