//! Python bindings for `cqed`.
//!
//! Matrices cross the boundary as nested lists of Python `complex`; all
//! frequencies follow the core conventions (rad/ns, ns) unless a name ends in
//! `_ghz` or `_mhz`, which are ordinary frequencies.

use std::path::PathBuf;

use cqed::analytic::{self, CouplingVector};
use cqed::coupling::{self, Design, DesignSpec};
use cqed::dynamics::{self, IntegrationOptions, Trajectory};
use cqed::entanglement::{self, Subsystem, SubsystemSet};
use cqed::expcli::{self, ExperimentConfig, ExperimentOutput, Scenario};
use cqed::fockspace::{self, AtomState};
use cqed::model::{self, SystemParams};
use cqed::{units, CMatrix, DensityMatrix, C64};
use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: cqed::Error) -> PyErr {
    match e {
        cqed::Error::UnknownObservable(_) => PyKeyError::new_err(e.to_string()),
        cqed::Error::StepSizeUnderflow { .. }
        | cqed::Error::ToleranceNotMet { .. }
        | cqed::Error::NotPositive { .. }
        | cqed::Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_matrix(rows: Vec<Vec<C64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn from_matrix(m: &CMatrix) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn density(rows: Vec<Vec<C64>>) -> PyResult<DensityMatrix> {
    DensityMatrix::new(to_matrix(rows)?).map_err(err)
}

fn parse_subsystem(name: &str) -> PyResult<Subsystem> {
    match name {
        "A" | "photon" => Ok(Subsystem::Photon),
        s if s.len() == 1 && ("B"..="Z").contains(&s) => Ok(Subsystem::Atom((s.as_bytes()[0] - b'B') as usize)),
        s => s
            .strip_prefix("atom")
            .and_then(|i| i.parse::<usize>().ok())
            .filter(|i| *i >= 1)
            .map(|i| Subsystem::Atom(i - 1))
            .ok_or_else(|| PyValueError::new_err(format!("unknown subsystem `{s}`"))),
    }
}

/// Truncated photon ⊗ (two-level)^N basis.
#[pyclass(name = "HilbertLayout", module = "cqed", frozen, from_py_object)]
#[derive(Clone)]
struct PyLayout(cqed::HilbertLayout);

#[pymethods]
impl PyLayout {
    #[new]
    fn new(n_max: usize, n_atoms: usize) -> PyResult<Self> {
        cqed::HilbertLayout::new(n_max, n_atoms).map(PyLayout).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn n_max(&self) -> usize {
        self.0.n_max()
    }

    #[getter]
    fn n_atoms(&self) -> usize {
        self.0.n_atoms()
    }

    fn label(&self, index: usize) -> PyResult<String> {
        if index >= self.0.dim() {
            return Err(PyValueError::new_err(format!("index {index} out of range")));
        }
        Ok(self.0.label(index))
    }

    fn labels(&self) -> Vec<String> {
        (0..self.0.dim()).map(|i| self.0.label(i)).collect()
    }

    /// Index of |n_photons, atoms⟩ with `atoms` a pattern such as "eg".
    fn index_of(&self, n_photons: usize, atoms: &str) -> PyResult<usize> {
        let atoms = AtomState::parse_pattern(atoms).map_err(err)?;
        self.0.index_of(n_photons, &atoms).map_err(err)
    }

    /// Density matrix of a basis state.
    fn basis_density(&self, n_photons: usize, atoms: &str) -> PyResult<Vec<Vec<C64>>> {
        let atoms = AtomState::parse_pattern(atoms).map_err(err)?;
        let ket = fockspace::basis_state(&self.0, n_photons, &atoms).map_err(err)?;
        Ok(from_matrix(DensityMatrix::from_pure(&ket).map_err(err)?.matrix()))
    }

    /// Hamiltonian for couplings in rad/ns on resonance, rotating frame.
    fn hamiltonian(&self, couplings: Vec<f64>) -> PyResult<Vec<Vec<C64>>> {
        let h = model::build_hamiltonian(&self.0, &SystemParams::resonant(couplings, 0.0, 0.0)).map_err(err)?;
        Ok(from_matrix(h.matrix()))
    }

    fn __repr__(&self) -> String {
        format!("HilbertLayout(n_max={}, n_atoms={})", self.0.n_max(), self.0.n_atoms())
    }
}

/// Integrated master-equation trajectory.
#[pyclass(name = "Trajectory", module = "cqed", frozen)]
struct PyTrajectory(Trajectory);

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.times().to_vec()
    }

    #[getter]
    fn layout(&self) -> PyLayout {
        PyLayout(*self.0.layout())
    }

    fn columns(&self) -> Vec<String> {
        self.0.observables().keys().cloned().collect()
    }

    fn series(&self, name: &str) -> PyResult<Vec<f64>> {
        self.0.series(name).map(<[f64]>::to_vec).map_err(err)
    }

    fn final_state(&self) -> Vec<Vec<C64>> {
        from_matrix(self.0.final_state().matrix())
    }

    fn diagnostics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = self.0.diagnostics();
        let out = PyDict::new(py);
        out.set_item("max_trace_error", d.max_trace_error)?;
        out.set_item("max_hermiticity_error", d.max_hermiticity_error)?;
        out.set_item("min_eigenvalue", d.min_eigenvalue)?;
        out.set_item("max_excitation_drift", d.max_excitation_drift)?;
        out.set_item("steps", d.steps)?;
        Ok(out)
    }

    /// Oscillation frequency of a column in GHz.
    fn rabi_frequency_ghz(&self, name: &str) -> PyResult<f64> {
        dynamics::rabi_frequency(&self.0, name).map_err(err)
    }

    /// Envelope decay time of a column in ns.
    fn envelope_tau_ns(&self, name: &str) -> PyResult<f64> {
        dynamics::envelope_lifetime(&self.0, name).map(|f| f.tau).map_err(err)
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.0.write_csv(&mut buf).map_err(err)?;
        String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Integrate the master equation from a Fock state.
///
/// `couplings_ghz` are g/2π per atom, `kappa_mhz`/`gamma_mhz` energy decay
/// rates over 2π, `detuning_ghz` the atom-cavity detuning.
#[pyfunction]
#[pyo3(signature = (couplings_ghz, t_end_ns, samples=1001, kappa_mhz=0.0, gamma_mhz=0.0, detuning_ghz=0.0, photons=1, atoms=None, n_max=None))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    couplings_ghz: Vec<f64>,
    t_end_ns: f64,
    samples: usize,
    kappa_mhz: f64,
    gamma_mhz: f64,
    detuning_ghz: f64,
    photons: usize,
    atoms: Option<&str>,
    n_max: Option<usize>,
) -> PyResult<PyTrajectory> {
    let n = couplings_ghz.len();
    let atoms = match atoms {
        Some(p) => AtomState::parse_pattern(p).map_err(err)?,
        None => vec![AtomState::Ground; n],
    };
    let excited = atoms.iter().filter(|a| **a == AtomState::Excited).count();
    let layout = cqed::HilbertLayout::new(n_max.unwrap_or(photons + excited), n).map_err(err)?;
    let mut params = SystemParams::resonant(
        couplings_ghz.iter().map(|g| units::ghz_to_rad_per_ns(*g)).collect(),
        units::mhz_to_rad_per_ns(kappa_mhz),
        units::mhz_to_rad_per_ns(gamma_mhz),
    );
    params.omega_0 += units::ghz_to_rad_per_ns(detuning_ghz);
    let gen = model::build_generator(&layout, &params).map_err(err)?;
    let ket = fockspace::basis_state(&layout, photons, &atoms).map_err(err)?;
    let rho0 = DensityMatrix::from_pure(&ket).map_err(err)?;
    let times = dynamics::linspace(0.0, t_end_ns, samples);
    let opts = IntegrationOptions {
        snapshot_stride: 0,
        ..IntegrationOptions::default()
    };
    py.detach(|| dynamics::integrate_with(&gen, &rho0, &times, &opts))
        .map(PyTrajectory)
        .map_err(err)
}

/// Wootters concurrence of a 4×4 two-qubit state.
#[pyfunction]
fn concurrence(rho: Vec<Vec<C64>>) -> PyResult<f64> {
    entanglement::concurrence(&density(rho)?).map_err(err)
}

/// Von Neumann entropy in bits.
#[pyfunction]
fn von_neumann_entropy(rho: Vec<Vec<C64>>) -> PyResult<f64> {
    entanglement::von_neumann_entropy(&density(rho)?).map_err(err)
}

/// Reduced state on `keep`: subsystem names "A" (photon), "B", "C", … or "atomK".
#[pyfunction]
fn partial_trace(rho: Vec<Vec<C64>>, layout: &PyLayout, keep: Vec<String>) -> PyResult<Vec<Vec<C64>>> {
    let parts = keep.iter().map(|s| parse_subsystem(s)).collect::<PyResult<Vec<_>>>()?;
    let set = SubsystemSet::new(&layout.0, parts).map_err(err)?;
    let out = entanglement::partial_trace(&density(rho)?, &layout.0, &set).map_err(err)?;
    Ok(from_matrix(out.matrix()))
}

#[pyfunction]
fn splitting_magnitude(alpha: f64) -> f64 {
    entanglement::splitting_magnitude(alpha)
}

/// Closed-form fidelity, concurrence and atom-2 entropy at the entanglement peak.
#[pyfunction]
fn peak_entanglement_metrics<'py>(py: Python<'py>, alpha: f64) -> PyResult<Bound<'py, PyDict>> {
    let m = analytic::peak_entanglement_metrics(alpha);
    let out = PyDict::new(py);
    out.set_item("fidelity", m.fidelity)?;
    out.set_item("concurrence", m.concurrence)?;
    out.set_item("entropy_atom2", m.entropy_atom2)?;
    Ok(out)
}

/// sin²(‖g‖t) for couplings in rad/ns and t in ns.
#[pyfunction]
fn single_excitation_population(couplings: Vec<f64>, t: f64) -> PyResult<f64> {
    let g = CouplingVector::new(couplings).map_err(err)?;
    Ok(analytic::single_excitation_population(&g, t))
}

/// Cavity decay (angular rad/s, ordinary Hz) for a quality factor.
#[pyfunction]
#[pyo3(signature = (q, wavelength_nm=coupling::WAVELENGTH_NM))]
fn kappa_from_q(q: f64, wavelength_nm: f64) -> PyResult<(f64, f64)> {
    let k = coupling::kappa_from_q(q, wavelength_nm).map_err(err)?;
    Ok((k.angular, k.ordinary))
}

/// Single-photon coupling g (rad/s) for a dipole (C·m), ω_c (rad/s) and volume (m³).
#[pyfunction]
fn coupling_strength(dipole_moment: f64, omega_c: f64, eps_r: f64, volume_m3: f64) -> PyResult<f64> {
    coupling::coupling_strength(dipole_moment, omega_c, eps_r, volume_m3).map_err(err)
}

/// Published figures of merit of a cavity design ("D1", "D2" or "D3").
#[pyfunction]
fn design_spec<'py>(py: Python<'py>, design: &str) -> PyResult<Bound<'py, PyDict>> {
    let d: Design = design.parse().map_err(err)?;
    let s = DesignSpec::get(d);
    let out = PyDict::new(py);
    out.set_item("design", d.to_string())?;
    out.set_item("q_factor", s.q_factor)?;
    out.set_item("mode_volume", s.mode_volume)?;
    out.set_item("cooperativity", s.cooperativity)?;
    out.set_item("trap_center_nm", s.trap_center.to_vec())?;
    out.set_item("trap_sigma_nm", s.trap_sigma.to_vec())?;
    out.set_item("coupling_target_hz", s.coupling_target_hz())?;
    Ok(out)
}

/// Mode volume in cubic reduced wavelengths of a synthetic design field map.
#[pyfunction]
#[pyo3(signature = (design, resolution_nm=coupling::DEFAULT_RESOLUTION_NM))]
fn synth_mode_volume(py: Python<'_>, design: &str, resolution_nm: f64) -> PyResult<f64> {
    let d: Design = design.parse().map_err(err)?;
    py.detach(|| {
        let map = coupling::synth_fieldmap(d, resolution_nm)?;
        Ok(coupling::global_mode_volume(&map)?.cubic_wavelengths(DesignSpec::refractive_index()))
    })
    .map_err(err)
}

/// Validated experiment configuration.
#[pyclass(name = "ExperimentConfig", module = "cqed", frozen)]
struct PyConfig(ExperimentConfig);

#[pymethods]
impl PyConfig {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        expcli::parse_config(text)
            .map(PyConfig)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn preset(scenario: &str) -> PyResult<Self> {
        let s: Scenario = scenario.parse().map_err(|e: String| PyValueError::new_err(e))?;
        Self::parse(expcli::preset(s))
    }

    #[getter]
    fn scenario(&self) -> String {
        self.0.scenario.name().to_string()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.0.points.len()
    }

    /// Canonical TOML form; parsing it yields an equal configuration.
    fn to_toml(&self) -> String {
        self.0.to_toml()
    }

    /// Run every sweep point and return the results.
    #[pyo3(signature = (workers=0))]
    fn run(&self, py: Python<'_>, workers: usize) -> PyResult<PyOutput> {
        py.detach(|| expcli::execute(&self.0, workers)).map(PyOutput).map_err(err)
    }

    /// Run and write the output tree (config, summary, trajectories, manifest).
    #[pyo3(signature = (output_dir, workers=0))]
    fn run_to_dir(&self, py: Python<'_>, output_dir: PathBuf, workers: usize) -> PyResult<Vec<PathBuf>> {
        py.detach(|| {
            let out = expcli::execute(&self.0, workers)?;
            expcli::write_outputs(&self.0, &out, &output_dir)
        })
        .map_err(err)
    }
}

/// Summary rows and trajectory tables of an executed configuration.
#[pyclass(name = "ExperimentOutput", module = "cqed", frozen)]
struct PyOutput(ExperimentOutput);

#[pymethods]
impl PyOutput {
    /// `(run, quantity, value)` rows in output order.
    fn summary(&self) -> Vec<(String, String, f64)> {
        self.0
            .summary
            .iter()
            .map(|r| (r.run.clone(), r.quantity.clone(), r.value))
            .collect()
    }

    fn value(&self, run: &str, quantity: &str) -> PyResult<f64> {
        self.0
            .value(run, quantity)
            .ok_or_else(|| PyKeyError::new_err(format!("{run}/{quantity}")))
    }

    fn trajectory_names(&self) -> Vec<String> {
        self.0.trajectories.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Columns of one trajectory table, including "t".
    fn trajectory<'py>(&self, py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyDict>> {
        let (_, t) = self
            .0
            .trajectories
            .iter()
            .find(|(n, _)| n == name)
            .ok_or_else(|| PyKeyError::new_err(name.to_string()))?;
        let out = PyDict::new(py);
        out.set_item("t", t.times().to_vec())?;
        for (k, v) in t.columns() {
            out.set_item(k, v.clone())?;
        }
        Ok(out)
    }

    fn summary_csv(&self) -> String {
        expcli::summary_csv(&self.0)
    }
}

#[pyfunction]
fn scenarios() -> Vec<(String, String)> {
    Scenario::ALL
        .iter()
        .map(|s| (s.name().to_string(), s.description().to_string()))
        .collect()
}

#[pyfunction]
fn preset(scenario: &str) -> PyResult<String> {
    let s: Scenario = scenario.parse().map_err(|e: String| PyValueError::new_err(e))?;
    Ok(expcli::preset(s).to_string())
}

#[pymodule]
#[pyo3(name = "cqed")]
fn cqed_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLayout>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyOutput>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(concurrence, m)?)?;
    m.add_function(wrap_pyfunction!(von_neumann_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(partial_trace, m)?)?;
    m.add_function(wrap_pyfunction!(splitting_magnitude, m)?)?;
    m.add_function(wrap_pyfunction!(peak_entanglement_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(single_excitation_population, m)?)?;
    m.add_function(wrap_pyfunction!(kappa_from_q, m)?)?;
    m.add_function(wrap_pyfunction!(coupling_strength, m)?)?;
    m.add_function(wrap_pyfunction!(design_spec, m)?)?;
    m.add_function(wrap_pyfunction!(synth_mode_volume, m)?)?;
    m.add_function(wrap_pyfunction!(scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
