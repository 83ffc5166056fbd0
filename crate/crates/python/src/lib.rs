//! Python bindings. Structured results (reports, sweeps) come back as plain
//! dicts and lists; S-matrices as nested lists of `complex`.

use dualband::io::{DesignReport, DesignRequest, DesignSource};
use dualband::polarization::FeedDelay;
use dualband::report::{self, FigureKind, GridRequest, SpaceQuery, SpaceReport, MAX_CHART_POINTS};
use dualband::shifter::ImpedanceWindow;
use dualband::sim::{assemble_sparams, build_network, write_touchstone};
use dualband::solver::{self, SolverOptions};
use dualband::{Device, Network, Topology};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(
    dualband_py,
    DualbandError,
    PyValueError,
    "Solver or simulation failure; `code` names the cause."
);

fn err(e: dualband::Error) -> PyErr {
    Python::attach(|py| {
        let exc = DualbandError::new_err(e.to_string());
        let _ = exc.value(py).setattr("code", e.code());
        exc
    })
}

/// Serialize through JSON so Python receives native dicts and lists.
fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse<T: std::str::FromStr<Err = dualband::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

/// A solved coupler or divider.
#[pyclass(module = "dualband_py", frozen)]
struct Design {
    request: DesignRequest,
    inner: solver::Design,
    net: Network,
}

impl Design {
    fn from_request(request: DesignRequest) -> PyResult<Self> {
        let inner = request.design(&SolverOptions::default()).map_err(err)?;
        let net = build_network(&inner).map_err(err)?;
        Ok(Design {
            request,
            inner,
            net,
        })
    }

    fn grid(
        &self,
        fstart: Option<f64>,
        fstop: Option<f64>,
        points: usize,
    ) -> PyResult<dualband::FrequencyGrid> {
        GridRequest {
            fstart_hz: fstart,
            fstop_hz: fstop,
            points: Some(points),
        }
        .resolve(self.inner.spec.f1, self.inner.spec.f2)
        .map_err(err)
    }
}

#[pymethods]
impl Design {
    #[getter]
    fn theta_alpha_deg(&self) -> f64 {
        self.inner.solution.theta_alpha.to_degrees()
    }

    #[getter]
    fn theta_beta_deg(&self) -> f64 {
        self.inner.solution.theta_beta.to_degrees()
    }

    #[getter]
    fn z_alpha(&self) -> f64 {
        self.inner.solution.z_alpha
    }

    #[getter]
    fn z_beta(&self) -> f64 {
        self.inner.solution.z_beta
    }

    #[getter]
    fn feasible(&self) -> bool {
        self.inner.feasibility.feasible
    }

    /// Full design report (angles in degrees, impedances in ohms).
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &DesignReport::new(&self.request, &self.inner))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&DesignReport::new(&self.request, &self.inner))
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Scattering matrix at `freq_hz` as a list of rows.
    fn sparams(&self, freq_hz: f64) -> PyResult<Vec<Vec<Complex64>>> {
        let s = assemble_sparams(&self.net, freq_hz).map_err(err)?;
        Ok((0..s.nports())
            .map(|i| (0..s.nports()).map(|j| s.data[(i, j)]).collect())
            .collect())
    }

    /// Sweep summary: exactness at both bands and decimated metric channels.
    #[pyo3(signature = (fstart=None, fstop=None, points=201))]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        fstart: Option<f64>,
        fstop: Option<f64>,
        points: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let grid = self.grid(fstart, fstop, points)?;
        let sim = py
            .detach(|| {
                report::simulate(
                    &self.request,
                    &grid,
                    MAX_CHART_POINTS,
                    &SolverOptions::default(),
                )
            })
            .map_err(err)?;
        to_py(py, &sim.report)
    }

    /// Touchstone text of a sweep.
    #[pyo3(signature = (fstart=None, fstop=None, points=201))]
    fn touchstone(
        &self,
        py: Python<'_>,
        fstart: Option<f64>,
        fstop: Option<f64>,
        points: usize,
    ) -> PyResult<String> {
        let grid = self.grid(fstart, fstop, points)?;
        Ok(py.detach(|| {
            write_touchstone(&dualband::sim::sweep(&self.net, &grid), self.inner.spec.z0)
        }))
    }

    /// Feed polarization at each frequency (both design bands by default).
    #[pyo3(signature = (port=1, quarter_wave=true, frequencies=Vec::new()))]
    fn polarization<'py>(
        &self,
        py: Python<'py>,
        port: usize,
        quarter_wave: bool,
        frequencies: Vec<f64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let delay = FeedDelay::from_flag(quarter_wave);
        let r = report::polarization(
            &self.request,
            port,
            delay,
            &frequencies,
            &SolverOptions::default(),
        )
        .map_err(err)?;
        to_py(py, &r)
    }

    fn __repr__(&self) -> String {
        let s = &self.inner.spec;
        format!(
            "Design(device={}, topology={}, f1={:e}, f2={:e}, n1={}, n2={})",
            s.device.as_str(),
            s.topology,
            s.f1,
            s.f2,
            s.n1,
            s.n2
        )
    }
}

/// Solve a design. Ratios are linear unless given through `n1_db`/`n2_db`.
#[pyfunction]
#[pyo3(signature = (f1, f2, n1=None, n2=None, *, n1_db=None, n2_db=None, topology="c", device="rrc", z0=50.0, z_gamma=None, r_choice=None, z_min=None, z_max=None))]
#[allow(clippy::too_many_arguments)]
fn design(
    f1: f64,
    f2: f64,
    n1: Option<f64>,
    n2: Option<f64>,
    n1_db: Option<f64>,
    n2_db: Option<f64>,
    topology: &str,
    device: &str,
    z0: f64,
    z_gamma: Option<f64>,
    r_choice: Option<String>,
    z_min: Option<f64>,
    z_max: Option<f64>,
) -> PyResult<Design> {
    let window = (z_min.is_some() || z_max.is_some()).then(|| {
        let d = ImpedanceWindow::default();
        ImpedanceWindow::new(z_min.unwrap_or(d.z_min), z_max.unwrap_or(d.z_max))
    });
    Design::from_request(DesignRequest {
        device: parse::<Device>(device)?,
        topology: parse::<Topology>(topology)?,
        f1,
        f2,
        n1,
        n2,
        n1_db,
        n2_db,
        z0,
        z_gamma,
        r_choice,
        window,
    })
}

/// Rebuild a design from a request or saved report in JSON.
#[pyfunction]
fn design_from_json(text: &str) -> PyResult<Design> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let src = DesignSource::from_value(v).map_err(err)?;
    Design::from_request(src.request().clone())
}

/// Electrical lengths `(theta_alpha, theta_beta)` at `f1`, in radians.
#[pyfunction]
fn solve_electrical_lengths(m: f64, k: f64) -> PyResult<(f64, f64)> {
    solver::solve_electrical_lengths(m, k, &SolverOptions::default()).map_err(err)
}

/// Shifter parameters (radians, ohms) for a topology at ratio `m`.
#[pyfunction]
fn synth_shifter<'py>(
    py: Python<'py>,
    topology: &str,
    m: f64,
    z_gamma: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let p = dualband::shifter::synth(parse(topology)?, m, z_gamma).map_err(err)?;
    to_py(py, &p)
}

/// Design-space sweep. Returns the report dict, or CSV text when `csv`.
#[pyfunction]
#[pyo3(signature = (figure, k=vec![1.0, 2.0, 4.0, 10.0], *, topology=None, m_start=1.1, m_stop=3.0, m_step=0.01, n1=1.0, z0=50.0, csv=false))]
#[allow(clippy::too_many_arguments)]
fn sweep_space<'py>(
    py: Python<'py>,
    figure: &str,
    k: Vec<f64>,
    topology: Option<&str>,
    m_start: f64,
    m_stop: f64,
    m_step: f64,
    n1: f64,
    z0: f64,
    csv: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let kind: FigureKind = parse(figure)?;
    let q = SpaceQuery {
        k,
        m_start,
        m_stop,
        m_step,
        n1,
        z0,
        topology: topology.map(parse).transpose()?,
        window: None,
    };
    let table = py
        .detach(|| q.run(kind, &SolverOptions::default()))
        .map_err(err)?;
    if csv {
        Ok(table.to_csv().into_pyobject(py)?.into_any())
    } else {
        to_py(py, &SpaceReport::new(kind, &table))
    }
}

#[pymodule]
fn dualband_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DualbandError", m.py().get_type::<DualbandError>())?;
    m.add_class::<Design>()?;
    m.add_function(wrap_pyfunction!(design, m)?)?;
    m.add_function(wrap_pyfunction!(design_from_json, m)?)?;
    m.add_function(wrap_pyfunction!(solve_electrical_lengths, m)?)?;
    m.add_function(wrap_pyfunction!(synth_shifter, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_space, m)?)?;
    Ok(())
}
