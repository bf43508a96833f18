//! Master-equation integration, observable recording and oscillation analysis.
//!
//! Observables are evaluated at every requested time; full density matrices
//! are kept only every `snapshot_stride` samples (and always at the last one).
//! Column order of the observable table is fixed:
//!
//! 1. `P_<n>_<pattern>` bare populations in basis-index order,
//! 2. `n_photons`, `n_excitations`,
//! 3. `S_A`, `S_B`, … normalised entropies (photon first, then atoms),
//! 4. `C_BC`, `C_BD`, … pairwise atomic concurrences,
//! 5. `P_<name>` for each extra projector.

mod analysis;
mod integrator;
mod table;

use indexmap::IndexMap;

pub use analysis::{
    envelope_lifetime, envelope_lifetime_series, find_extrema, rabi_frequency, rabi_frequency_series,
    EnvelopeFit, Extremum, ExtremumKind,
};
pub use integrator::{default_max_step, Method};
pub use table::{SeriesTable, CSV_VERSION_LINE};

use crate::entanglement::{self, Subsystem, SubsystemSet};
use crate::fockspace::HilbertLayout;
use crate::model::LindbladGenerator;
use crate::state::{DensityMatrix, HERMITICITY_TOL, POSITIVITY_TOL, TRACE_TOL};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Populations below this are ignored when determining the excitation sector of ρ₀.
const SECTOR_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct IntegrationOptions {
    pub method: Method,
    /// Keep every k-th density matrix; 0 keeps none except the last.
    pub snapshot_stride: usize,
    /// Record entropies and pairwise concurrences.
    pub entanglement: bool,
    /// Override the entropy normalisation dimension for every subsystem.
    pub norm_dim: Option<usize>,
    /// Extra `(name, ket)` projector populations, recorded as `P_<name>`.
    pub projectors: Vec<(String, CVector)>,
    /// Fail on trace, Hermiticity or positivity violations.
    pub enforce_invariants: bool,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            method: Method::default(),
            snapshot_stride: 1,
            entanglement: true,
            norm_dim: None,
            projectors: Vec::new(),
            enforce_invariants: true,
        }
    }
}

/// Worst-case invariant deviations over all recorded times.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    /// Largest |⟨N_ex⟩(t) − ⟨N_ex⟩(0)|.
    pub max_excitation_drift: f64,
    /// Total number of integrator steps taken.
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    layout: HilbertLayout,
    table: SeriesTable,
    snapshots: Vec<DensityMatrix>,
    snapshot_indices: Vec<usize>,
    diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn times(&self) -> &[f64] {
        self.table.times()
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn table(&self) -> &SeriesTable {
        &self.table
    }

    pub fn observables(&self) -> &IndexMap<String, Vec<f64>> {
        self.table.columns()
    }

    pub fn series(&self, name: &str) -> Result<&[f64]> {
        self.table.series(name)
    }

    pub fn snapshots(&self) -> &[DensityMatrix] {
        &self.snapshots
    }

    /// Time-grid index of each stored snapshot.
    pub fn snapshot_indices(&self) -> &[usize] {
        &self.snapshot_indices
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.snapshots.last().expect("final state is always stored")
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        self.table.write_csv(w)
    }
}

/// Diagonal of ρ over time, keyed `P_<n>_<pattern>` in basis order.
pub fn bare_populations(traj: &Trajectory) -> IndexMap<String, Vec<f64>> {
    let layout = traj.layout();
    (0..layout.dim())
        .map(|i| {
            let name = population_name(layout, i);
            let series = traj.observables()[&name].clone();
            (name, series)
        })
        .collect()
}

pub fn population_name(layout: &HilbertLayout, index: usize) -> String {
    format!("P_{}", layout.label(index))
}

struct EntropySpec {
    set: SubsystemSet,
    norm_dim: usize,
}

/// Precomputed recipe for the observable row at one time.
struct ObservableEvaluator {
    layout: HilbertLayout,
    names: Vec<String>,
    entropies: Vec<EntropySpec>,
    pairs: Vec<(usize, usize)>,
    projectors: Vec<CVector>,
}

impl ObservableEvaluator {
    fn new(gen: &LindbladGenerator, rho0: &DensityMatrix, opts: &IntegrationOptions) -> Result<Self> {
        let layout = *gen.layout();
        let mut names: Vec<String> = (0..layout.dim()).map(|i| population_name(&layout, i)).collect();
        names.push("n_photons".into());
        names.push("n_excitations".into());

        let mut entropies = Vec::new();
        let mut pairs = Vec::new();
        // Reduced states of a non-trace-preserving evolution are not states.
        if opts.entanglement && gen.is_trace_preserving() {
            let e_max = entanglement::max_excitations(rho0, &layout, SECTOR_TOL);
            let parts = std::iter::once(Subsystem::Photon).chain((0..layout.n_atoms()).map(Subsystem::Atom));
            for part in parts {
                let set = SubsystemSet::new(&layout, vec![part])?;
                let norm_dim = match opts.norm_dim {
                    Some(d) => d,
                    None => entanglement::default_norm_dim(&layout, &set, e_max),
                };
                names.push(format!("S_{}", part.letter()));
                entropies.push(EntropySpec { set, norm_dim });
            }
            for i in 0..layout.n_atoms() {
                for j in i + 1..layout.n_atoms() {
                    names.push(format!(
                        "C_{}{}",
                        Subsystem::Atom(i).letter(),
                        Subsystem::Atom(j).letter()
                    ));
                    pairs.push((i, j));
                }
            }
        }

        let mut projectors = Vec::new();
        for (name, ket) in &opts.projectors {
            if ket.len() != layout.dim() {
                return Err(Error::DimensionMismatch {
                    expected: layout.dim(),
                    found: ket.len(),
                });
            }
            let norm = ket.norm();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidState(format!("projector `{name}` has norm {norm}")));
            }
            let full = format!("P_{name}");
            if names.contains(&full) {
                return Err(Error::InvalidParameter {
                    name: "projectors",
                    reason: format!("observable `{full}` defined twice"),
                });
            }
            names.push(full);
            projectors.push(ket.clone());
        }

        Ok(ObservableEvaluator {
            layout,
            names,
            entropies,
            pairs,
            projectors,
        })
    }

    fn evaluate(&self, rho: &CMatrix, row: &mut Vec<f64>) -> Result<()> {
        row.clear();
        let dim = self.layout.dim();
        let (mut n_ph, mut n_ex) = (0.0, 0.0);
        for i in 0..dim {
            let p = rho[(i, i)].re;
            row.push(p);
            n_ph += p * self.layout.photons_of(i) as f64;
            n_ex += p * self.layout.excitations_of(i) as f64;
        }
        row.push(n_ph);
        row.push(n_ex);

        if !self.entropies.is_empty() || !self.pairs.is_empty() {
            let state = DensityMatrix::from_matrix_unchecked(rho.clone());
            for spec in &self.entropies {
                let reduced = entanglement::partial_trace(&state, &self.layout, &spec.set)?;
                row.push(entanglement::entropy_normalized(&reduced, spec.norm_dim)?);
            }
            for &(i, j) in &self.pairs {
                let pair = entanglement::atom_pair_state(&state, &self.layout, i, j)?;
                row.push(entanglement::concurrence(&pair)?);
            }
        }
        for ket in &self.projectors {
            row.push(ket.dotc(&(rho * ket)).re);
        }
        Ok(())
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::param("times", "time grid is empty"));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::param("times", "time grid contains non-finite values"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("times", "time grid must be strictly increasing"));
    }
    Ok(())
}

/// `n` equally spaced times from `t0` to `t1` inclusive.
pub fn linspace(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t0],
        _ => (0..n)
            .map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Times 0, dt, 2dt, … up to and including `t_end` (rounded to the nearest count).
pub fn uniform_grid(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::param("times", format!("need t_end >= 0 and dt > 0, got {t_end}, {dt}")));
    }
    let steps = (t_end / dt).round() as usize;
    Ok((0..=steps).map(|k| k as f64 * dt).collect())
}

struct InvariantMonitor {
    enforce: bool,
    diag: Diagnostics,
    n_ex0: f64,
}

impl InvariantMonitor {
    fn check(&mut self, t: f64, rho: &CMatrix, n_ex: f64) -> Result<()> {
        let d = &mut self.diag;
        let trace_err = (rho.trace() - C64::ONE).norm();
        let herm = crate::fockspace::hermiticity_error(rho);
        let min_eig = DensityMatrix::from_matrix_unchecked(rho.clone()).min_eigenvalue();
        d.max_trace_error = d.max_trace_error.max(trace_err);
        d.max_hermiticity_error = d.max_hermiticity_error.max(herm);
        d.min_eigenvalue = d.min_eigenvalue.min(min_eig);
        d.max_excitation_drift = d.max_excitation_drift.max((n_ex - self.n_ex0).abs());
        if !self.enforce {
            return Ok(());
        }
        let fail = |what: String| Err(Error::ToleranceNotMet { time: t, what });
        if trace_err > TRACE_TOL {
            return fail(format!("|Tr rho - 1| = {trace_err:e}"));
        }
        if herm > HERMITICITY_TOL {
            return fail(format!("max |rho - rho^dagger| = {herm:e}"));
        }
        if min_eig < -POSITIVITY_TOL {
            return fail(format!("min eigenvalue {min_eig:e}"));
        }
        Ok(())
    }
}

/// Integrates with default options.
pub fn integrate(gen: &LindbladGenerator, rho0: &DensityMatrix, times: &[f64]) -> Result<Trajectory> {
    integrate_with(gen, rho0, times, &IntegrationOptions::default())
}

pub fn integrate_with(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    times: &[f64],
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    if rho0.dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            found: rho0.dim(),
        });
    }
    validate_times(times)?;
    let evaluator = ObservableEvaluator::new(gen, rho0, opts)?;
    let n_ex_col = gen.dim() + 1;
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(times.len()); evaluator.names.len()];
    let mut snapshots = Vec::new();
    let mut snapshot_indices = Vec::new();
    let mut row = Vec::with_capacity(evaluator.names.len());

    let mut monitor = InvariantMonitor {
        enforce: opts.enforce_invariants && gen.is_trace_preserving(),
        diag: Diagnostics::default(),
        n_ex0: 0.0,
    };
    let last = times.len() - 1;
    let mut record = |k: usize, rho: &CMatrix, monitor: &mut InvariantMonitor| -> Result<()> {
        evaluator.evaluate(rho, &mut row)?;
        if k == 0 {
            monitor.n_ex0 = row[n_ex_col];
        }
        monitor.check(times[k], rho, row[n_ex_col])?;
        for (col, &v) in columns.iter_mut().zip(row.iter()) {
            col.push(v);
        }
        let keep = k == last || (opts.snapshot_stride > 0 && k.is_multiple_of(opts.snapshot_stride));
        if keep {
            snapshots.push(DensityMatrix::from_matrix_unchecked(rho.clone()));
            snapshot_indices.push(k);
        }
        Ok(())
    };

    let mut stepper = integrator::Stepper::new(gen, &opts.method);
    let mut rho = rho0.matrix().clone();
    record(0, &rho, &mut monitor)?;
    for k in 1..times.len() {
        stepper.advance(&mut rho, times[k - 1], times[k])?;
        record(k, &rho, &mut monitor)?;
    }
    monitor.diag.steps = stepper.steps();

    let table = SeriesTable::new(times.to_vec(), evaluator.names.iter().cloned().zip(columns).collect())?;
    Ok(Trajectory {
        layout: *gen.layout(),
        table,
        snapshots,
        snapshot_indices,
        diagnostics: monitor.diag,
    })
}
