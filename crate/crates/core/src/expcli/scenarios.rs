//! Scenario runners. Each sweep point is independent; results come back in
//! point order regardless of worker count.

use rayon::prelude::*;

use super::config::{ExperimentConfig, Scenario, SweepPoint};
use crate::analytic::{peak_entanglement_metrics, single_excitation_states, two_photon_states, w_state, CouplingVector};
use crate::coupling::{coupling_at, synth_fieldmap, DesignSpec, EmitterSpec, FieldMap, TrapSpec};
use crate::dynamics::{
    envelope_lifetime, find_extrema, integrate_with, linspace, rabi_frequency, uniform_grid, ExtremumKind,
    IntegrationOptions, Method, SeriesTable, Trajectory,
};
use crate::entanglement::{measured_splitting, psi_plus, splitting_magnitude};
use crate::fockspace::basis_state;
use crate::model::build_generator_with;
use crate::state::DensityMatrix;
use crate::units::{rad_per_ns_to_ghz, rad_per_s_to_rad_per_ns};
use crate::{CVector, Error, Result};

/// Samples per population period in the position map.
const MAP_SAMPLES: usize = 1001;
/// Samples per period of the single-atom decay run.
const LONG_SAMPLES_PER_PERIOD: f64 = 40.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub run: String,
    pub quantity: String,
    pub value: f64,
}

/// Everything a run produces, before anything touches the filesystem.
#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    /// `(file name, table)` written under `trajectories/`.
    pub trajectories: Vec<(String, SeriesTable)>,
    pub summary: Vec<SummaryRow>,
    /// Additional `(file name, contents)` written at the top level.
    pub files: Vec<(String, String)>,
}

impl ExperimentOutput {
    /// First summary value named `quantity` for `run`.
    pub fn value(&self, run: &str, quantity: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.run == run && r.quantity == quantity)
            .map(|r| r.value)
    }
}

pub fn run_name(index: usize) -> String {
    format!("run_{index:04}")
}

struct PointResult {
    trajectories: Vec<(String, SeriesTable)>,
    summary: Vec<SummaryRow>,
}

struct Recorder {
    run: String,
    rows: Vec<SummaryRow>,
}

impl Recorder {
    fn new(point: &SweepPoint) -> Self {
        let run = run_name(point.index);
        let rows = point
            .assignments
            .iter()
            .map(|(p, v)| SummaryRow {
                run: run.clone(),
                quantity: p.name().to_string(),
                value: *v,
            })
            .collect();
        Recorder { run, rows }
    }

    fn put(&mut self, quantity: &str, value: f64) {
        self.rows.push(SummaryRow {
            run: self.run.clone(),
            quantity: quantity.to_string(),
            value,
        });
    }

    fn diagnostics(&mut self, suffix: &str, traj: &Trajectory) {
        let d = traj.diagnostics();
        self.put(&format!("max_trace_error{suffix}"), d.max_trace_error);
        self.put(&format!("max_hermiticity_error{suffix}"), d.max_hermiticity_error);
        self.put(&format!("min_eigenvalue{suffix}"), d.min_eigenvalue);
        self.put(&format!("max_excitation_drift{suffix}"), d.max_excitation_drift);
    }
}

fn peak(traj: &Trajectory, name: &str) -> Result<f64> {
    Ok(traj.series(name)?.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

fn count_maxima(traj: &Trajectory, name: &str) -> Result<usize> {
    Ok(find_extrema(traj.times(), traj.series(name)?, None)
        .iter()
        .filter(|e| e.kind == ExtremumKind::Maximum)
        .count())
}

fn simulate(
    cfg: &ExperimentConfig,
    point: &SweepPoint,
    couplings: Vec<f64>,
    times: &[f64],
    projectors: Vec<(String, CVector)>,
) -> Result<Trajectory> {
    let layout = point.layout()?;
    let params = point.system_params(couplings);
    let gen = build_generator_with(&layout, &params, cfg.params.dissipator)?;
    let rho0 = DensityMatrix::from_pure(&basis_state(&layout, point.photons, &point.atoms)?)?;
    let opts = IntegrationOptions {
        method: Method::Rk4 {
            max_step: cfg.time.max_step_ns,
        },
        snapshot_stride: cfg.snapshot_stride,
        entanglement: true,
        norm_dim: cfg.params.entropy_norm_dim,
        projectors,
        enforce_invariants: true,
    };
    integrate_with(&gen, &rho0, times, &opts)
}

fn short_grid(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let t_end = cfg.time.t_end_ns.unwrap_or(0.1);
    let dt = cfg.time.dt_ns.unwrap_or(5e-5);
    uniform_grid(t_end, dt)
}

fn fixed_couplings(point: &SweepPoint) -> Result<Vec<f64>> {
    point
        .couplings
        .clone()
        .ok_or_else(|| Error::param("couplings", "this scenario needs explicit couplings"))
}

fn norm(g: &[f64]) -> f64 {
    g.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn single_atom(cfg: &ExperimentConfig, point: &SweepPoint) -> Result<PointResult> {
    let mut rec = Recorder::new(point);
    let g = fixed_couplings(point)?;
    let gn = norm(&g);
    let pop = format!("P_{}", point.layout()?.label(point.layout()?.index_of(0, &[crate::AtomState::Excited])?));

    let short = simulate(cfg, point, g.clone(), &short_grid(cfg)?, Vec::new())?;
    rec.put("g_ghz", rad_per_ns_to_ghz(gn));
    rec.put("rabi_frequency_ghz", rabi_frequency(&short, &pop)?);
    rec.put("rabi_frequency_expected_ghz", gn / std::f64::consts::PI);
    if point.kappa > 0.0 && point.gamma > 0.0 {
        rec.put("cooperativity", gn * gn / (point.kappa * point.gamma));
    }
    rec.diagnostics("_short", &short);
    let mut trajectories = vec![(format!("{}_short.csv", rec.run), short.table().clone())];

    let rate = point.kappa + point.gamma;
    if rate > 0.0 && gn > 0.0 {
        let period = std::f64::consts::PI / gn;
        let dt = cfg.time.long_dt_ns.unwrap_or(period / LONG_SAMPLES_PER_PERIOD);
        let long = simulate(cfg, point, g, &uniform_grid(cfg.time.long_t_end_ns.unwrap_or(40.0), dt)?, Vec::new())?;
        let fit = envelope_lifetime(&long, &pop)?;
        rec.put("envelope_tau_ns", fit.tau);
        rec.put("envelope_tau_expected_ns", 2.0 / rate);
        rec.put("envelope_maxima", fit.n_maxima as f64);
        rec.diagnostics("_long", &long);
        trajectories.push((format!("{}_long.csv", rec.run), long.table().clone()));
    }
    Ok(PointResult {
        trajectories,
        summary: rec.rows,
    })
}

fn two_atom(cfg: &ExperimentConfig, point: &SweepPoint) -> Result<PointResult> {
    let mut rec = Recorder::new(point);
    let g = fixed_couplings(point)?;
    let layout = point.layout()?;
    let alpha = g[1] / g[0];
    let mut projectors = vec![("psi_plus".to_string(), psi_plus(&layout)?)];
    if point.photons == 2 && layout.n_max() >= 2 {
        for (k, chi) in two_photon_states(&layout, g[0], g[1])?.into_iter().enumerate() {
            projectors.push((format!("chi{k}"), chi));
        }
    } else if point.photons == 1 {
        let gv = CouplingVector::new(g.clone())?;
        for (k, chi) in single_excitation_states(&layout, &gv)?.into_iter().enumerate() {
            projectors.push((format!("chi{k}"), chi));
        }
    }
    let traj = simulate(cfg, point, g, &short_grid(cfg)?, projectors)?;
    rec.put("fidelity", peak(&traj, "P_psi_plus")?.max(0.0).sqrt());
    rec.put("peak_concurrence", peak(&traj, "C_BC")?);
    // The splitting is defined on the one-excitation manifold only.
    if point.photons == 1 {
        rec.put("splitting", measured_splitting(&traj)?);
        rec.put("splitting_expected", splitting_magnitude(alpha));
        let m = peak_entanglement_metrics(alpha);
        rec.put("fidelity_expected", m.fidelity);
        rec.put("concurrence_expected", m.concurrence);
    }
    if point.photons == 2 {
        rec.put("peak_chi2", peak(&traj, "P_chi2")?);
        rec.put("peak_chi3", peak(&traj, "P_chi3")?);
    }
    rec.diagnostics("", &traj);
    Ok(PointResult {
        trajectories: vec![(format!("{}.csv", rec.run), traj.table().clone())],
        summary: rec.rows,
    })
}

fn correlations(cfg: &ExperimentConfig, point: &SweepPoint) -> Result<PointResult> {
    let mut rec = Recorder::new(point);
    let g = fixed_couplings(point)?;
    let alpha = g[1] / g[0];
    let traj = simulate(cfg, point, g, &short_grid(cfg)?, Vec::new())?;
    for s in ["S_A", "S_B", "S_C"] {
        rec.put(&format!("peak_{s}"), peak(&traj, s)?);
        rec.put(&format!("maxima_{s}"), count_maxima(&traj, s)? as f64);
    }
    rec.put("peak_concurrence", peak(&traj, "C_BC")?);
    if point.photons == 1 {
        let m = peak_entanglement_metrics(alpha);
        rec.put("peak_S_C_expected", m.entropy_atom2);
        rec.put("concurrence_expected", m.concurrence);
    }
    rec.diagnostics("", &traj);
    Ok(PointResult {
        trajectories: vec![(format!("{}.csv", rec.run), traj.table().clone())],
        summary: rec.rows,
    })
}

fn w_state_run(cfg: &ExperimentConfig, point: &SweepPoint) -> Result<PointResult> {
    let mut rec = Recorder::new(point);
    let g = fixed_couplings(point)?;
    let layout = point.layout()?;
    let gn = norm(&g);
    let photon_pop = format!("P_{}", layout.label(layout.index_of(1, &vec![crate::AtomState::Ground; point.n_atoms])?));
    let traj = simulate(cfg, point, g.clone(), &short_grid(cfg)?, vec![("w".to_string(), w_state(&layout)?)])?;
    rec.put("n_atoms", point.n_atoms as f64);
    rec.put("rabi_frequency_ghz", rabi_frequency(&traj, &photon_pop)?);
    rec.put("rabi_frequency_expected_ghz", gn / std::f64::consts::PI);
    rec.put("w_fidelity", peak(&traj, "P_w")?.max(0.0).sqrt());
    rec.diagnostics("", &traj);
    Ok(PointResult {
        trajectories: vec![(format!("{}.csv", rec.run), traj.table().clone())],
        summary: rec.rows,
    })
}

fn custom(cfg: &ExperimentConfig, point: &SweepPoint) -> Result<PointResult> {
    let mut rec = Recorder::new(point);
    let g = fixed_couplings(point)?;
    let traj = simulate(cfg, point, g, &short_grid(cfg)?, Vec::new())?;
    for name in traj.observables().keys() {
        if !name.starts_with("P_") {
            rec.put(&format!("peak_{name}"), peak(&traj, name)?);
        }
    }
    rec.diagnostics("", &traj);
    Ok(PointResult {
        trajectories: vec![(format!("{}.csv", rec.run), traj.table().clone())],
        summary: rec.rows,
    })
}

/// Atom positions for the position map: atom 1 at the mirror image of the
/// trap centre, atom 2 at the trap centre plus the displacement.
pub fn map_positions(trap_center: [f64; 3], dx: f64, dy: f64) -> ([f64; 3], [f64; 3]) {
    let [cx, cy, cz] = trap_center;
    ([-cx, cy, cz], [cx + dx, cy + dy, cz])
}

struct MapContext {
    map: FieldMap,
    emitter: EmitterSpec,
    trap: TrapSpec,
    eps: f64,
}

impl MapContext {
    fn coupling(&self, r: [f64; 3]) -> Result<f64> {
        Ok(rad_per_s_to_rad_per_ns(coupling_at(&self.map, &self.emitter, r, self.eps)?))
    }
}

/// Entropy and concurrence columns only; enough to recompute a map row.
fn entanglement_columns(traj: &Trajectory) -> Result<SeriesTable> {
    let cols = ["S_A", "S_B", "S_C", "C_BC"]
        .iter()
        .map(|n| Ok((n.to_string(), traj.series(n)?.to_vec())))
        .collect::<Result<_>>()?;
    SeriesTable::new(traj.times().to_vec(), cols)
}

/// Peak S_C and peak concurrence over one population period.
fn map_peaks(cfg: &ExperimentConfig, point: &SweepPoint, g: Vec<f64>) -> Result<(f64, f64, Trajectory)> {
    let period = std::f64::consts::PI / norm(&g);
    let traj = simulate(cfg, point, g, &linspace(0.0, period, MAP_SAMPLES), Vec::new())?;
    Ok((peak(&traj, "S_C")?, peak(&traj, "C_BC")?, traj))
}

fn position_map(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<ExperimentOutput> {
    let spec = DesignSpec::get(cfg.design);
    let ctx = MapContext {
        map: synth_fieldmap(cfg.design, cfg.map.resolution_nm)?,
        emitter: EmitterSpec::rb87_d2(),
        trap: spec.trap(),
        eps: cfg.map.permittivity,
    };
    let (r1, _) = map_positions(spec.trap_center, 0.0, 0.0);
    let g_ref = ctx.coupling(r1)?;
    let first = cfg.points.first().ok_or_else(|| Error::param("sweep", "no points"))?;
    let (ref_s, ref_c, ref_traj) = map_peaks(cfg, first, vec![g_ref, g_ref])?;

    let results: Vec<([f64; 8], SeriesTable)> = pool.install(|| {
        cfg.points
            .par_iter()
            .map(|p| -> Result<([f64; 8], SeriesTable)> {
                let (r1, r2) = map_positions(spec.trap_center, p.dx_nm, p.dy_nm);
                let (g1, g2) = (ctx.coupling(r1)?, ctx.coupling(r2)?);
                let (s, c, traj) = map_peaks(cfg, p, vec![g1, g2])?;
                let row = [p.dx_nm, p.dy_nm, g2 / g1, rad_per_ns_to_ghz(g1), rad_per_ns_to_ghz(g2), s, c, 1.0 - c / ref_c];
                Ok((row, entanglement_columns(&traj)?))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let (rows, tables): (Vec<[f64; 8]>, Vec<SeriesTable>) = results.into_iter().unzip();

    let mut table = String::from("# cqed position map v1\n");
    table.push_str("dx_nm,dy_nm,alpha,g1_ghz,g2_ghz,peak_S_C,peak_concurrence,concurrence_reduction\n");
    for r in &rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
        table.push_str(&line.join(","));
        table.push('\n');
    }

    let n = cfg.map.mc_samples;
    let mut samples = String::from("# cqed alpha samples v1\n");
    samples.push_str("sample,x1_nm,y1_nm,x2_nm,y2_nm,alpha,concurrence\n");
    let mut alphas = Vec::with_capacity(n);
    for i in 0..n as u64 {
        let a = ctx.trap.sample(cfg.seed, 2 * i);
        let b = ctx.trap.sample(cfg.seed, 2 * i + 1);
        let r1 = [-a[0], a[1], a[2]];
        let alpha = ctx.coupling(b)? / ctx.coupling(r1)?;
        let conc = peak_entanglement_metrics(alpha).concurrence;
        alphas.push((alpha, conc));
        samples.push_str(&format!("{i},{:e},{:e},{:e},{:e},{alpha:e},{conc:e}\n", r1[0], r1[1], b[0], b[1]));
    }

    let mut out = ExperimentOutput::default();
    let put = |out: &mut ExperimentOutput, q: &str, v: f64| {
        out.summary.push(SummaryRow {
            run: "map".into(),
            quantity: q.into(),
            value: v,
        })
    };
    put(&mut out, "g_reference_ghz", rad_per_ns_to_ghz(g_ref));
    put(&mut out, "reference_peak_S_C", ref_s);
    put(&mut out, "reference_peak_concurrence", ref_c);
    put(&mut out, "max_concurrence_reduction", rows.iter().map(|r| r[7]).fold(f64::NEG_INFINITY, f64::max));
    put(&mut out, "min_alpha", rows.iter().map(|r| r[2]).fold(f64::INFINITY, f64::min));
    put(&mut out, "max_alpha", rows.iter().map(|r| r[2]).fold(f64::NEG_INFINITY, f64::max));
    if n > 0 {
        let nf = n as f64;
        put(&mut out, "mc_mean_alpha", alphas.iter().map(|a| a.0).sum::<f64>() / nf);
        put(&mut out, "mc_mean_concurrence", alphas.iter().map(|a| a.1).sum::<f64>() / nf);
        put(&mut out, "mc_min_concurrence", alphas.iter().map(|a| a.1).fold(f64::INFINITY, f64::min));
    }
    out.trajectories.push(("reference.csv".into(), ref_traj.table().clone()));
    for (p, t) in cfg.points.iter().zip(tables) {
        out.trajectories.push((format!("map_{:04}.csv", p.index), t));
    }
    out.files.push(("position_map.csv".into(), table));
    if n > 0 {
        out.files.push(("alpha_samples.csv".into(), samples));
    }
    Ok(out)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::param("workers", e.to_string()))
}

/// Runs every sweep point on `workers` threads (0 picks the rayon default).
pub fn execute(cfg: &ExperimentConfig, workers: usize) -> Result<ExperimentOutput> {
    let pool = pool(workers)?;
    if cfg.scenario == Scenario::Fig5PositionMap {
        return position_map(cfg, &pool);
    }
    let runner: fn(&ExperimentConfig, &SweepPoint) -> Result<PointResult> = match cfg.scenario {
        Scenario::Fig2SingleAtom => single_atom,
        Scenario::Fig3TwoAtom => two_atom,
        Scenario::Fig4Correlations => correlations,
        Scenario::NAtomWstate => w_state_run,
        Scenario::Custom | Scenario::Fig5PositionMap => custom,
    };
    let results = pool.install(|| {
        cfg.points
            .par_iter()
            .map(|p| runner(cfg, p))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut out = ExperimentOutput::default();
    for r in results {
        out.trajectories.extend(r.trajectories);
        out.summary.extend(r.summary);
    }
    Ok(out)
}
