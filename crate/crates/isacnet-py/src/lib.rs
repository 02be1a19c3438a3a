//! Python bindings: scenario construction plus the three main entry
//! points (closed-form analysis, Monte-Carlo simulation, density
//! optimization), returning plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use isacnet::analytic;
use isacnet::model::{self, mean_cell_radius};
use isacnet::montecarlo;
use isacnet::numerics::gauss_laguerre;
use isacnet::optimizer::{self, Method, OptimizeMode};

fn err(e: isacnet::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Network configuration plus power model, the unit every operation
/// consumes. Built from defaults or a flat `key = value` document.
#[pyclass(module = "isacnet", skip_from_py_object)]
#[derive(Clone)]
struct Scenario {
    inner: model::Scenario,
}

#[pymethods]
impl Scenario {
    #[new]
    fn new() -> Self {
        Scenario {
            inner: model::Scenario::default(),
        }
    }

    /// Parses a flat `key = value` config document.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Scenario {
            inner: model::Scenario::parse(text).map_err(err)?,
        })
    }

    /// Loads a config file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Scenario {
            inner: model::Scenario::load(path.as_ref()).map_err(err)?,
        })
    }

    #[getter]
    fn lambda_b(&self) -> f64 {
        self.inner.network.lambda_b
    }

    #[setter]
    fn set_lambda_b(&mut self, v: f64) {
        self.inner.network.lambda_b = v;
    }

    #[getter]
    fn h_t(&self) -> f64 {
        self.inner.network.h_t
    }

    #[setter]
    fn set_h_t(&mut self, v: f64) {
        self.inner.network.h_t = v;
    }

    #[getter]
    fn gamma_c_db(&self) -> f64 {
        self.inner.network.gamma_c_db
    }

    #[setter]
    fn set_gamma_c_db(&mut self, v: f64) {
        self.inner.network.gamma_c_db = v;
    }

    #[getter]
    fn gamma_r_db(&self) -> f64 {
        self.inner.network.gamma_r_db
    }

    #[setter]
    fn set_gamma_r_db(&mut self, v: f64) {
        self.inner.network.gamma_r_db = v;
    }

    #[getter]
    fn p_tx_dbm(&self) -> f64 {
        self.inner.network.p_tx_dbm
    }

    #[setter]
    fn set_p_tx_dbm(&mut self, v: f64) {
        self.inner.network.p_tx_dbm = v;
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(lambda_b={:e}, h_t={}, gamma_c_db={}, gamma_r_db={}, p_tx_dbm={})",
            self.inner.network.lambda_b,
            self.inner.network.h_t,
            self.inner.network.gamma_c_db,
            self.inner.network.gamma_r_db,
            self.inner.network.p_tx_dbm
        )
    }
}

/// Closed-form coverage, PSE, and energy efficiency.
#[pyfunction]
#[pyo3(signature = (scenario, quad_order=20))]
fn analyze<'py>(
    py: Python<'py>,
    scenario: &Scenario,
    quad_order: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let rule = gauss_laguerre(quad_order).map_err(err)?;
    let r = analytic::analyze(&scenario.inner.network, &scenario.inner.power, &rule).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("coverage_comm", r.coverage_comm)?;
    d.set_item("coverage_radar", r.coverage_radar)?;
    d.set_item("pse_comm", r.pse_comm)?;
    d.set_item("pse_radar", r.pse_radar)?;
    d.set_item("ee", r.ee)?;
    Ok(d)
}

/// Monte-Carlo estimates; each metric maps to (mean, ci_low, ci_high).
#[pyfunction]
#[pyo3(signature = (scenario, trials=10_000, seed=1))]
fn simulate<'py>(
    py: Python<'py>,
    scenario: &Scenario,
    trials: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let est =
        montecarlo::estimate_metrics(&scenario.inner.network, &scenario.inner.power, trials, seed)
            .map_err(err)?;
    let d = PyDict::new(py);
    for (name, m) in [
        ("coverage_comm", &est.coverage_comm),
        ("coverage_radar", &est.coverage_radar),
        ("pse_comm", &est.pse_comm),
        ("pse_radar", &est.pse_radar),
        ("ee", &est.ee),
    ] {
        d.set_item(name, (m.mean, m.ci_low, m.ci_high))?;
    }
    d.set_item("trials", trials)?;
    d.set_item("seed", seed)?;
    Ok(d)
}

/// EE-optimal BS density; mode is "isac", "comm", or "radar".
#[pyfunction]
#[pyo3(signature = (scenario, mode="isac"))]
fn optimize<'py>(
    py: Python<'py>,
    scenario: &Scenario,
    mode: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let net = &scenario.inner.network;
    let pm = &scenario.inner.power;
    let result = match mode {
        "comm" => {
            let coef = optimizer::objective_coefficients(net, pm).map_err(err)?;
            let lambda = optimizer::optimal_density_comm_only(&coef).map_err(err)?;
            optimizer::OptimizationResult {
                lambda_star: lambda,
                ee_star: coef.ee(OptimizeMode::CommOnly, lambda),
                method: Method::ClosedFormComm,
                iterations: 0,
                converged: true,
                bracket: optimizer::DENSITY_BRACKET,
                unimodal: None,
            }
        }
        "radar" => {
            let coef = optimizer::objective_coefficients(net, pm).map_err(err)?;
            optimizer::optimal_density_radar_only(&coef, net.n_rx).map_err(err)?
        }
        "isac" => {
            let start = net.lambda_b.clamp(1e-7, 1e-3);
            optimizer::optimize_density_newton(net, pm, OptimizeMode::Isac, start, 1e-3, 500)
                .map_err(err)?
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "mode must be isac, comm, or radar, got `{other}`"
            )))
        }
    };
    let d = PyDict::new(py);
    d.set_item("lambda_star", result.lambda_star)?;
    d.set_item("ee_star", result.ee_star)?;
    d.set_item(
        "cell_radius_m",
        mean_cell_radius(result.lambda_star).map_err(err)?,
    )?;
    d.set_item(
        "method",
        match result.method {
            Method::Newton => "newton",
            Method::ClosedFormComm => "closed_form_comm",
            Method::ClosedFormRadarCubic => "closed_form_radar_cubic",
            Method::Grid => "grid",
        },
    )?;
    d.set_item("iterations", result.iterations)?;
    d.set_item("converged", result.converged)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "isacnet")]
fn isacnet_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    Ok(())
}
