//! Python bindings: domains, fields, scenarios, integration, diagnostics,
//! certificates and snapshot files.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ipm_core::certificates::CertificateReport;
use ipm_core::config::RunConfig;
use ipm_core::diagnostics::{record, DiagnosticsRecord};
use ipm_core::dynamics;
use ipm_core::error::IpmError;
use ipm_core::initial_data::stratified_rearrangement;
use ipm_core::simulation::{simulate as core_simulate, SimulationOptions, StopReason};
use ipm_core::spectral::{self, DomainKind};
use ipm_core::{io, run as core_run, scenario};

fn err(e: IpmError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(module = "ipm", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct Domain(spectral::Domain);

#[pymethods]
impl Domain {
    #[staticmethod]
    fn torus(nx: usize, ny: usize) -> PyResult<Self> {
        spectral::Domain::torus(nx, ny).map(Domain).map_err(err)
    }

    /// Strip with `ny` Chebyshev nodes; `modes` defaults from `ny`.
    #[staticmethod]
    #[pyo3(signature = (nx, ny, modes=None))]
    fn strip(nx: usize, ny: usize, modes: Option<usize>) -> PyResult<Self> {
        match modes {
            Some(m) => spectral::Domain::strip_with_modes(nx, ny, m),
            None => spectral::Domain::strip(nx, ny),
        }
        .map(Domain)
        .map_err(err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind().name()
    }
    #[getter]
    fn nx(&self) -> usize {
        self.0.nx()
    }
    #[getter]
    fn ny(&self) -> usize {
        self.0.ny()
    }
    fn x1_grid(&self) -> Vec<f64> {
        self.0.x1_grid()
    }
    fn x2_grid(&self) -> Vec<f64> {
        self.0.x2_grid()
    }

    fn __repr__(&self) -> String {
        format!("Domain('{}', {}, {})", self.0.kind().name(), self.0.nx(), self.0.ny())
    }
}

/// Scalar grid field, values in row-major order (`j * nx + i`).
#[pyclass(module = "ipm", skip_from_py_object)]
#[derive(Clone)]
struct Field(spectral::ScalarField);

#[pymethods]
impl Field {
    #[new]
    fn new(domain: &Domain, values: Vec<f64>) -> PyResult<Self> {
        spectral::ScalarField::new(domain.0, values).map(Field).map_err(err)
    }

    #[getter]
    fn domain(&self) -> Domain {
        Domain(*self.0.domain())
    }
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }
    fn at(&self, i: usize, j: usize) -> f64 {
        self.0.at(i, j)
    }
    fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }
    fn l2_norm(&self) -> f64 {
        self.0.l2_norm()
    }
    fn odd_x2_defect(&self) -> f64 {
        self.0.odd_x2_defect()
    }
    fn even_x1_defect(&self) -> f64 {
        self.0.even_x1_defect()
    }
    fn __len__(&self) -> usize {
        self.0.values().len()
    }
}

fn record_dict<'py>(py: Python<'py>, r: &DiagnosticsRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", r.t)?;
    d.set_item("E", r.energy)?;
    d.set_item("delta", r.delta)?;
    d.set_item("l2", r.l2)?;
    for e in &r.hs {
        d.set_item(format!("hs_rho_{}", e.s), e.rho)?;
        d.set_item(format!("hs_drho_{}", e.s), e.drho)?;
    }
    d.set_item("grad_sup_rho", r.grad_sup_rho)?;
    d.set_item("grad_sup_u", r.grad_sup_u)?;
    d.set_item("tail_fraction", r.tail_fraction)?;
    d.set_item("cube_root_mass", r.cube_root_mass)?;
    Ok(d)
}

fn report_dict<'py>(py: Python<'py>, r: &CertificateReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("name", &r.name)?;
    d.set_item("status", r.status.label())?;
    d.set_item("margin", r.margin)?;
    d.set_item("tolerance", r.tolerance)?;
    d.set_item("measured", r.measured.clone())?;
    d.set_item("bound", r.bound.clone())?;
    d.set_item("failures", r.failures.clone())?;
    d.set_item("context", &r.context)?;
    Ok(d)
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Completed => "completed",
        StopReason::MonitorTripped => "monitor_tripped",
        StopReason::MaxSteps => "max_steps",
    }
}

/// Initial field of the scenario described by a configuration text.
#[pyfunction]
fn initial_field(config: &str) -> PyResult<Field> {
    let cfg = RunConfig::parse(config).map_err(err)?;
    let st = scenario::build(cfg.domain().map_err(err)?, &cfg.scenario).map_err(err)?;
    Ok(Field(st.field))
}

#[pyfunction]
fn velocity(field: &Field) -> PyResult<(Field, Field)> {
    let u = dynamics::biot_savart(&field.0).map_err(err)?;
    Ok((Field(u.u1), Field(u.u2)))
}

#[pyfunction]
#[pyo3(signature = (field, t=0.0, s=vec![1.0]))]
fn diagnostics<'py>(py: Python<'py>, field: &Field, t: f64, s: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let r = record(&field.0, t, &s).map_err(err)?;
    record_dict(py, &r)
}

/// Integrate to `t_end`; returns `(records, final_field, stop_reason)`.
#[pyfunction]
#[pyo3(signature = (field, t_end, sample_interval=0.05, s=vec![1.0], cfl=0.5))]
fn simulate<'py>(
    py: Python<'py>,
    field: &Field,
    t_end: f64,
    sample_interval: f64,
    s: Vec<f64>,
    cfl: f64,
) -> PyResult<(Vec<Bound<'py, PyDict>>, Field, &'static str)> {
    let mut opts = SimulationOptions {
        sample_interval,
        requested_s: s,
        keep_fields: true,
        ..Default::default()
    };
    opts.stepper.t_end = t_end;
    opts.stepper.cfl = cfl;
    let rho0 = field.0.clone();
    let tr = py
        .detach(|| core_simulate(&rho0, Vec::new(), &opts))
        .map_err(err)?;
    let records = tr.records.iter().map(|r| record_dict(py, r)).collect::<PyResult<Vec<_>>>()?;
    let last = tr.fields.last().cloned().unwrap_or(rho0);
    Ok((records, Field(last), stop_name(tr.stop)))
}

/// Full run into `out_dir`; returns a summary dict.
#[pyfunction]
fn run<'py>(py: Python<'py>, config: &str, out_dir: PathBuf) -> PyResult<Bound<'py, PyDict>> {
    let cfg = RunConfig::parse(config).map_err(err)?;
    let o = py.detach(|| core_run::run(&cfg, &out_dir)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("stop", stop_name(o.stop))?;
    d.set_item("exit_code", o.exit_code())?;
    d.set_item("horizon", o.horizon)?;
    d.set_item("steps", o.steps)?;
    d.set_item("samples", o.samples)?;
    d.set_item("growth_ratio", o.growth_ratio())?;
    let reports = o.reports.iter().map(|r| report_dict(py, r)).collect::<PyResult<Vec<_>>>()?;
    d.set_item("reports", reports)?;
    Ok(d)
}

/// Certificate suite over run directories or snapshot files.
#[pyfunction]
#[pyo3(signature = (paths, checks, s=None))]
fn certify<'py>(
    py: Python<'py>,
    paths: Vec<PathBuf>,
    checks: Vec<String>,
    s: Option<Vec<f64>>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let o = py
        .detach(|| core_run::certify(&paths, &checks, s.as_deref()))
        .map_err(err)?;
    o.reports.iter().map(|r| report_dict(py, r)).collect()
}

#[pyfunction]
fn rearrange(field: &Field) -> PyResult<Vec<f64>> {
    Ok(stratified_rearrangement(&field.0).map_err(err)?.samples().to_vec())
}

#[pyfunction]
#[pyo3(signature = (path, field, t=0.0))]
fn write_snapshot(path: PathBuf, field: &Field, t: f64) -> PyResult<()> {
    io::write_snapshot(path, &field.0, t).map_err(err)
}

/// Returns `(field, t)`; `kind` ("torus" or "strip") rejects the other tag.
#[pyfunction]
#[pyo3(signature = (path, kind=None))]
fn read_snapshot(path: PathBuf, kind: Option<&str>) -> PyResult<(Field, f64)> {
    let r = match kind {
        None => io::read_snapshot(path),
        Some("torus") => io::read_snapshot_as(path, DomainKind::Torus),
        Some("strip") => io::read_snapshot_as(path, DomainKind::Strip),
        Some(k) => return Err(PyValueError::new_err(format!("unknown domain kind '{k}'"))),
    };
    let (f, t) = r.map_err(err)?;
    Ok((Field(f), t))
}

#[pymodule]
fn ipm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Domain>()?;
    m.add_class::<Field>()?;
    m.add_function(wrap_pyfunction!(initial_field, m)?)?;
    m.add_function(wrap_pyfunction!(velocity, m)?)?;
    m.add_function(wrap_pyfunction!(diagnostics, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(rearrange, m)?)?;
    m.add_function(wrap_pyfunction!(write_snapshot, m)?)?;
    m.add_function(wrap_pyfunction!(read_snapshot, m)?)?;
    Ok(())
}
