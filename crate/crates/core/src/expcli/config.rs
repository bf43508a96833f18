//! TOML experiment configuration.
//!
//! Parsing collects every problem it finds, each prefixed by the source line
//! when one is known. Ordinary-frequency inputs (GHz, MHz) are converted to
//! rad/ns once here; runners only read the converted values.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};
use toml::Spanned;

use super::ConfigErrors;
use crate::coupling::{kappa_from_q, robustness_region, Design, DesignSpec, RB87_D2_LINEWIDTH_HZ, WAVELENGTH_NM};
use crate::fockspace::{AtomState, HilbertLayout};
use crate::model::{optical_angular_frequency, DissipatorForm, Frame, SystemParams};
use crate::units::{ghz_to_rad_per_ns, mhz_to_rad_per_ns};

/// Largest cavity frequency (GHz) accepted in the lab frame; above it the
/// optical carrier makes the integration step impractically small.
const MAX_LAB_CAVITY_GHZ: f64 = 1e4;
/// Upper bound on samples per trajectory.
const MAX_SAMPLES: f64 = 5e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Fig2SingleAtom,
    Fig3TwoAtom,
    Fig4Correlations,
    Fig5PositionMap,
    NAtomWstate,
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Fig2SingleAtom,
        Scenario::Fig3TwoAtom,
        Scenario::Fig4Correlations,
        Scenario::Fig5PositionMap,
        Scenario::NAtomWstate,
        Scenario::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig2SingleAtom => "fig2_single_atom",
            Scenario::Fig3TwoAtom => "fig3_two_atom",
            Scenario::Fig4Correlations => "fig4_correlations",
            Scenario::Fig5PositionMap => "fig5_position_map",
            Scenario::NAtomWstate => "n_atom_wstate",
            Scenario::Custom => "custom",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::Fig2SingleAtom => "one atom, one photon: short Rabi run and 40 ns decay envelope",
            Scenario::Fig3TwoAtom => "two atoms, alpha x photon number: splitting, fidelity, dark state",
            Scenario::Fig4Correlations => "two atoms: subsystem entropies and concurrence versus alpha",
            Scenario::Fig5PositionMap => "alpha and peak entanglement over atom-2 displacement on a field map",
            Scenario::NAtomWstate => "N equally coupled atoms: collective Rabi frequency and W-state fidelity",
            Scenario::Custom => "free-form parameters and sweeps",
        }
    }

    fn fixed_atoms(self) -> Option<usize> {
        match self {
            Scenario::Fig2SingleAtom => Some(1),
            Scenario::Fig3TwoAtom | Scenario::Fig4Correlations | Scenario::Fig5PositionMap => Some(2),
            _ => None,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL.into_iter().find(|sc| sc.name() == s).ok_or_else(|| {
            let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
            format!("unknown scenario `{s}`; expected one of {}", names.join(", "))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Alpha,
    Photons,
    NAtoms,
    GGhz,
    KappaMhz,
    GammaMhz,
    DetuningGhz,
    DxNm,
    DyNm,
}

impl SweepParam {
    const ALL: [SweepParam; 9] = [
        SweepParam::Alpha,
        SweepParam::Photons,
        SweepParam::NAtoms,
        SweepParam::GGhz,
        SweepParam::KappaMhz,
        SweepParam::GammaMhz,
        SweepParam::DetuningGhz,
        SweepParam::DxNm,
        SweepParam::DyNm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::Photons => "photons",
            SweepParam::NAtoms => "n_atoms",
            SweepParam::GGhz => "g_ghz",
            SweepParam::KappaMhz => "kappa_mhz",
            SweepParam::GammaMhz => "gamma_mhz",
            SweepParam::DetuningGhz => "detuning_ghz",
            SweepParam::DxNm => "dx_nm",
            SweepParam::DyNm => "dy_nm",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepParam::Photons | SweepParam::NAtoms)
    }
}

/// One swept parameter; values are `steps` points from `min` to `max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepAxis {
    pub name: SweepParam,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        crate::dynamics::linspace(self.min, self.max, self.steps)
    }
}

fn frame_name<S: Serializer>(f: &Frame, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match f {
        Frame::Lab => "lab",
        Frame::RotatingAtCavity => "rotating",
    })
}

fn dissipator_name<S: Serializer>(d: &DissipatorForm, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match d {
        DissipatorForm::Standard => "standard",
        DissipatorForm::Literal => "literal",
    })
}

fn atoms_pattern<S: Serializer>(a: &[AtomState], s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&a.iter().map(|x| x.symbol()).collect::<String>())
}

/// Physical parameters in the units they are written in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Params {
    /// Common coupling; absent when couplings come from a field map.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_ghz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub couplings_ghz: Option<Vec<f64>>,
    pub n_atoms: usize,
    /// Coupling of atom 2 relative to atom 1.
    pub alpha: f64,
    pub kappa_mhz: f64,
    pub gamma_mhz: f64,
    pub detuning_ghz: f64,
    pub cavity_wavelength_nm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cavity_ghz: Option<f64>,
    #[serde(serialize_with = "frame_name")]
    pub frame: Frame,
    pub photons: usize,
    #[serde(serialize_with = "atoms_pattern")]
    pub atoms: Vec<AtomState>,
    /// Photon cutoff; defaults per point to the excitation number plus one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(serialize_with = "dissipator_name")]
    pub dissipator: DissipatorForm,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy_norm_dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeConfig {
    /// Absent for the position map, which uses one population period.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end_ns: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_ns: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step_ns: Option<f64>,
    /// Decay run of the single-atom scenario.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub long_t_end_ns: Option<f64>,
    /// Defaults to 1/40 of the population period.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub long_dt_ns: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapConfig {
    pub resolution_nm: f64,
    /// Relative permittivity at the atom entering g(r).
    pub permittivity: f64,
    pub mc_samples: usize,
}

/// Parameters of one sweep point with rates already in rad/ns.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub assignments: Vec<(SweepParam, f64)>,
    pub n_atoms: usize,
    pub alpha: f64,
    /// rad/ns; `None` when couplings come from a field map.
    pub couplings: Option<Vec<f64>>,
    pub kappa: f64,
    pub gamma: f64,
    pub omega_c: f64,
    pub omega_0: f64,
    pub frame: Frame,
    pub photons: usize,
    pub atoms: Vec<AtomState>,
    pub n_max: usize,
    pub dx_nm: f64,
    pub dy_nm: f64,
}

impl SweepPoint {
    pub fn layout(&self) -> crate::Result<HilbertLayout> {
        HilbertLayout::new(self.n_max, self.n_atoms)
    }

    pub fn system_params(&self, couplings: Vec<f64>) -> SystemParams {
        SystemParams {
            omega_c: self.omega_c,
            omega_0: self.omega_0,
            kappa: self.kappa,
            gamma: self.gamma,
            couplings,
            frame: self.frame,
        }
    }

    /// Value of a swept parameter at this point, if it is swept.
    pub fn get(&self, p: SweepParam) -> Option<f64> {
        self.assignments.iter().find(|(q, _)| *q == p).map(|(_, v)| *v)
    }
}

/// Fully validated configuration. [`ExperimentConfig::to_toml`] emits a
/// canonical form with every default made explicit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(serialize_with = "design_name")]
    pub design: Design,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub snapshot_stride: usize,
    pub params: Params,
    pub time: TimeConfig,
    pub map: MapConfig,
    pub sweep: Vec<SweepAxis>,
    #[serde(skip)]
    pub points: Vec<SweepPoint>,
}

fn design_name<S: Serializer>(d: &Design, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&d.to_string())
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serialisable")
    }
}

type Sp<T> = Option<Spanned<T>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Spanned<String>,
    design: Sp<String>,
    seed: Sp<i64>,
    output_dir: Option<String>,
    snapshot_stride: Sp<i64>,
    #[serde(default)]
    params: RawParams,
    #[serde(default)]
    time: RawTime,
    #[serde(default)]
    map: RawMap,
    #[serde(default)]
    sweep: Vec<RawSweep>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawParams {
    g_ghz: Sp<f64>,
    couplings_ghz: Sp<Vec<f64>>,
    n_atoms: Sp<i64>,
    alpha: Sp<f64>,
    kappa_mhz: Sp<f64>,
    q_factor: Sp<f64>,
    gamma_mhz: Sp<f64>,
    detuning_ghz: Sp<f64>,
    cavity_wavelength_nm: Sp<f64>,
    cavity_ghz: Sp<f64>,
    frame: Sp<String>,
    photons: Sp<i64>,
    atoms: Sp<String>,
    n_max: Sp<i64>,
    dissipator: Sp<String>,
    entropy_norm_dim: Sp<i64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t_end_ns: Sp<f64>,
    dt_ns: Sp<f64>,
    max_step_ns: Sp<f64>,
    long_t_end_ns: Sp<f64>,
    long_dt_ns: Sp<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawMap {
    resolution_nm: Sp<f64>,
    permittivity: Sp<f64>,
    mc_samples: Sp<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    name: Spanned<String>,
    min: Spanned<f64>,
    max: Sp<f64>,
    steps: Sp<i64>,
}

/// Error sink that tags messages with the line of a span.
struct Errors<'a> {
    text: &'a str,
    list: Vec<String>,
}

impl<'a> Errors<'a> {
    fn line(&self, span: &std::ops::Range<usize>) -> usize {
        self.text[..span.start.min(self.text.len())].matches('\n').count() + 1
    }

    fn at<T>(&mut self, v: &Spanned<T>, key: &str, reason: impl fmt::Display) {
        let line = self.line(&v.span());
        self.list.push(format!("line {line}: {key}: {reason}"));
    }

    fn plain(&mut self, key: &str, reason: impl fmt::Display) {
        self.list.push(format!("{key}: {reason}"));
    }

    /// Value or default, checking `ok`.
    fn real(&mut self, v: &Sp<f64>, key: &str, default: f64, ok: fn(f64) -> bool, rule: &str) -> f64 {
        match v {
            None => default,
            Some(s) if ok(*s.get_ref()) => *s.get_ref(),
            Some(s) => {
                self.at(s, key, format!("{rule}, got {}", s.get_ref()));
                default
            }
        }
    }

    fn opt_real(&mut self, v: &Sp<f64>, key: &str, ok: fn(f64) -> bool, rule: &str) -> Option<f64> {
        v.as_ref().map(|_| self.real(v, key, f64::NAN, ok, rule))
    }

    fn count(&mut self, v: &Sp<i64>, key: &str, default: usize, min: i64) -> usize {
        match v {
            None => default,
            Some(s) if *s.get_ref() >= min => *s.get_ref() as usize,
            Some(s) => {
                self.at(s, key, format!("must be an integer >= {min}, got {}", s.get_ref()));
                default
            }
        }
    }
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

fn non_negative(v: f64) -> bool {
    v >= 0.0 && v.is_finite()
}

fn finite(v: f64) -> bool {
    v.is_finite()
}

const POSITIVE: &str = "must be positive and finite";
const NON_NEGATIVE: &str = "must be non-negative and finite";

/// Coupling target (GHz, ordinary) of a design: D1 quotes g, the others are
/// inverted from their cooperativity.
pub fn design_coupling_ghz(design: Design) -> f64 {
    DesignSpec::get(design).coupling_target_hz() * 1e-9
}

/// κ (MHz, ordinary) implied by a design's Q.
pub fn design_kappa_mhz(design: Design) -> f64 {
    DesignSpec::get(design).kappa_hz() * 1e-6
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let raw: RawConfig = match toml::from_str(text) {
        Ok(r) => r,
        Err(e) => {
            let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            let msg = e.message().trim().to_string();
            return Err(ConfigErrors(vec![match line {
                Some(l) => format!("line {l}: {msg}"),
                None => msg,
            }]));
        }
    };
    let mut errs = Errors {
        text,
        list: Vec::new(),
    };
    let cfg = validate(&raw, &mut errs);
    if errs.list.is_empty() {
        Ok(cfg.expect("no errors implies a config"))
    } else {
        Err(ConfigErrors(errs.list))
    }
}

fn validate(raw: &RawConfig, errs: &mut Errors) -> Option<ExperimentConfig> {
    let scenario = match raw.scenario.get_ref().parse::<Scenario>() {
        Ok(s) => s,
        Err(e) => {
            errs.at(&raw.scenario, "scenario", e);
            return None;
        }
    };
    let design = match &raw.design {
        None => Design::D1,
        Some(s) => match s.get_ref().parse::<Design>() {
            Ok(d) => d,
            Err(_) => {
                errs.at(s, "design", format!("expected D1, D2 or D3, got `{}`", s.get_ref()));
                Design::D1
            }
        },
    };
    let seed = match &raw.seed {
        None => 0,
        Some(s) if *s.get_ref() >= 0 => *s.get_ref() as u64,
        Some(s) => {
            errs.at(s, "seed", "must be a non-negative integer");
            0
        }
    };
    let snapshot_stride = errs.count(&raw.snapshot_stride, "snapshot_stride", 100, 0);
    let is_map = scenario == Scenario::Fig5PositionMap;
    if is_map && design == Design::D2 {
        errs.plain("design", "D2 has no field map; use D1 or D3 for fig5_position_map");
    }

    let params = validate_params(&raw.params, scenario, design, errs)?;
    let time = validate_time(&raw.time, scenario, errs);
    let map = MapConfig {
        resolution_nm: errs.real(
            &raw.map.resolution_nm,
            "map.resolution_nm",
            crate::coupling::DEFAULT_RESOLUTION_NM,
            |v| (0.5..=5.0).contains(&v),
            "must lie in [0.5, 5] nm",
        ),
        permittivity: errs.real(&raw.map.permittivity, "map.permittivity", 1.0, positive, POSITIVE),
        mc_samples: errs.count(&raw.map.mc_samples, "map.mc_samples", 1000, 0),
    };

    let sweep = validate_sweeps(&raw.sweep, scenario, design, errs);
    if !errs.list.is_empty() {
        return None;
    }
    let points = expand_points(&params, &sweep, scenario, errs);
    for p in &points {
        check_samples(&time, p, scenario, errs);
    }
    Some(ExperimentConfig {
        scenario,
        design,
        seed,
        output_dir: raw.output_dir.as_ref().map(PathBuf::from),
        snapshot_stride,
        params,
        time,
        map,
        sweep,
        points,
    })
}

fn validate_params(r: &RawParams, scenario: Scenario, design: Design, errs: &mut Errors) -> Option<Params> {
    let is_map = scenario == Scenario::Fig5PositionMap;
    let default_atoms = match scenario {
        Scenario::NAtomWstate => 3,
        s => s.fixed_atoms().unwrap_or(1),
    };
    let mut n_atoms = errs.count(&r.n_atoms, "params.n_atoms", default_atoms, 1);
    if let (Some(fixed), Some(s)) = (scenario.fixed_atoms(), &r.n_atoms) {
        if n_atoms != fixed {
            errs.at(s, "params.n_atoms", format!("{scenario} uses exactly {fixed} atom(s)"));
            n_atoms = fixed;
        }
    }
    if n_atoms > HilbertLayout::MAX_ATOMS {
        errs.plain("params.n_atoms", format!("at most {} atoms are supported", HilbertLayout::MAX_ATOMS));
        return None;
    }

    let mut g_ghz = errs.opt_real(&r.g_ghz, "params.g_ghz", non_negative, NON_NEGATIVE);
    let mut couplings_ghz = None;
    if let Some(c) = &r.couplings_ghz {
        if r.g_ghz.is_some() || r.alpha.as_ref().is_some_and(|a| *a.get_ref() != 1.0) {
            errs.at(c, "params.couplings_ghz", "cannot be combined with g_ghz or a non-unit alpha");
        } else if c.get_ref().len() != n_atoms {
            errs.at(
                c,
                "params.couplings_ghz",
                format!("{} value(s) for {n_atoms} atom(s)", c.get_ref().len()),
            );
        } else if c.get_ref().iter().any(|g| !non_negative(*g)) || c.get_ref().iter().all(|g| *g == 0.0) {
            errs.at(c, "params.couplings_ghz", "must be non-negative with at least one non-zero value");
        } else {
            couplings_ghz = Some(c.get_ref().clone());
        }
    }
    if is_map {
        for (v, key) in [(r.g_ghz.as_ref().map(|s| s.span()), "params.g_ghz")]
            .into_iter()
            .chain([(r.couplings_ghz.as_ref().map(|s| s.span()), "params.couplings_ghz")])
        {
            if let Some(span) = v {
                let line = errs.line(&span);
                errs.list.push(format!("line {line}: {key}: couplings come from the field map in {scenario}"));
            }
        }
        g_ghz = None;
    } else if couplings_ghz.is_none() && g_ghz.is_none() {
        g_ghz = Some(design_coupling_ghz(design));
    }
    if couplings_ghz.is_some() {
        g_ghz = None;
    }

    let alpha = errs.real(&r.alpha, "params.alpha", 1.0, non_negative, NON_NEGATIVE);
    if let Some(s) = &r.alpha {
        if n_atoms < 2 && alpha != 1.0 {
            errs.at(s, "params.alpha", "needs at least two atoms");
        } else if scenario == Scenario::NAtomWstate && alpha != 1.0 {
            errs.at(s, "params.alpha", "the W-state scenario uses equal couplings");
        }
    }

    let kappa_mhz = match (&r.kappa_mhz, &r.q_factor) {
        (Some(k), Some(_)) => {
            errs.at(k, "params.kappa_mhz", "give either kappa_mhz or q_factor, not both");
            0.0
        }
        (Some(_), None) => errs.real(&r.kappa_mhz, "params.kappa_mhz", 0.0, non_negative, NON_NEGATIVE),
        (None, Some(_)) => {
            let q = errs.real(&r.q_factor, "params.q_factor", f64::INFINITY, positive, POSITIVE);
            kappa_from_q(q, WAVELENGTH_NM).map(|k| k.ordinary * 1e-6).unwrap_or(0.0)
        }
        (None, None) => design_kappa_mhz(design),
    };
    let gamma_mhz = errs.real(&r.gamma_mhz, "params.gamma_mhz", RB87_D2_LINEWIDTH_HZ / 1e6, non_negative, NON_NEGATIVE);
    let detuning_ghz = errs.real(&r.detuning_ghz, "params.detuning_ghz", 0.0, finite, "must be finite");
    let cavity_wavelength_nm = errs.real(
        &r.cavity_wavelength_nm,
        "params.cavity_wavelength_nm",
        WAVELENGTH_NM,
        positive,
        POSITIVE,
    );
    let cavity_ghz = errs.opt_real(&r.cavity_ghz, "params.cavity_ghz", positive, POSITIVE);
    let frame = match &r.frame {
        None => Frame::RotatingAtCavity,
        Some(s) => match s.get_ref().as_str() {
            "rotating" => Frame::RotatingAtCavity,
            "lab" => Frame::Lab,
            other => {
                errs.at(s, "params.frame", format!("expected `rotating` or `lab`, got `{other}`"));
                Frame::RotatingAtCavity
            }
        },
    };
    if frame == Frame::Lab {
        let f = cavity_ghz.unwrap_or(299_792_458.0 / cavity_wavelength_nm);
        if f > MAX_LAB_CAVITY_GHZ {
            errs.plain(
                "params.cavity_ghz",
                format!("lab frame needs a cavity frequency <= {MAX_LAB_CAVITY_GHZ} GHz, got {f}"),
            );
        }
    }
    let dissipator = match &r.dissipator {
        None => DissipatorForm::Standard,
        Some(s) => match s.get_ref().as_str() {
            "standard" => DissipatorForm::Standard,
            "literal" => DissipatorForm::Literal,
            other => {
                errs.at(s, "params.dissipator", format!("expected `standard` or `literal`, got `{other}`"));
                DissipatorForm::Standard
            }
        },
    };

    let photons = errs.count(&r.photons, "params.photons", 1, 0);
    let atoms = match &r.atoms {
        None => vec![AtomState::Ground; n_atoms],
        Some(s) => match AtomState::parse_pattern(s.get_ref()) {
            Ok(a) if a.len() == n_atoms => a,
            Ok(a) => {
                errs.at(s, "params.atoms", format!("{} state(s) for {n_atoms} atom(s)", a.len()));
                vec![AtomState::Ground; n_atoms]
            }
            Err(e) => {
                errs.at(s, "params.atoms", e);
                vec![AtomState::Ground; n_atoms]
            }
        },
    };
    let excited = atoms.iter().filter(|a| **a == AtomState::Excited).count();
    if photons + excited == 0 && r.photons.is_some() {
        errs.plain("params.photons", "the initial state has no excitation");
    }
    let n_max = r.n_max.as_ref().map(|_| errs.count(&r.n_max, "params.n_max", 1, 1));
    let entropy_norm_dim = r
        .entropy_norm_dim
        .as_ref()
        .map(|_| errs.count(&r.entropy_norm_dim, "params.entropy_norm_dim", 2, 2));
    Some(Params {
        g_ghz,
        couplings_ghz,
        n_atoms,
        alpha,
        kappa_mhz,
        gamma_mhz,
        detuning_ghz,
        cavity_wavelength_nm,
        cavity_ghz,
        frame,
        photons,
        atoms,
        n_max,
        dissipator,
        entropy_norm_dim,
    })
}

fn validate_time(r: &RawTime, scenario: Scenario, errs: &mut Errors) -> TimeConfig {
    let auto = scenario == Scenario::Fig5PositionMap;
    let t_end = errs.opt_real(&r.t_end_ns, "time.t_end_ns", positive, POSITIVE);
    let dt = errs.opt_real(&r.dt_ns, "time.dt_ns", positive, POSITIVE);
    let fig2 = scenario == Scenario::Fig2SingleAtom;
    for (v, key) in [(&r.long_t_end_ns, "time.long_t_end_ns"), (&r.long_dt_ns, "time.long_dt_ns")] {
        if let (Some(s), false) = (v, fig2) {
            errs.at(s, key, format!("only used by {}", Scenario::Fig2SingleAtom));
        }
    }
    let t = TimeConfig {
        t_end_ns: t_end.or((!auto).then_some(0.1)),
        dt_ns: dt.or((!auto).then_some(5e-5)),
        max_step_ns: errs.opt_real(&r.max_step_ns, "time.max_step_ns", positive, POSITIVE),
        long_t_end_ns: errs
            .opt_real(&r.long_t_end_ns, "time.long_t_end_ns", positive, POSITIVE)
            .or(fig2.then_some(40.0)),
        long_dt_ns: errs.opt_real(&r.long_dt_ns, "time.long_dt_ns", positive, POSITIVE),
    };
    if let (Some(a), Some(b)) = (t.t_end_ns, t.dt_ns) {
        if b > a {
            errs.plain("time.dt_ns", format!("step {b} exceeds t_end_ns {a}"));
        }
    }
    t
}

fn default_sweeps(scenario: Scenario, design: Design) -> Vec<SweepAxis> {
    let axis = |name, min, max, steps| SweepAxis { name, min, max, steps };
    match scenario {
        Scenario::Fig3TwoAtom => vec![axis(SweepParam::Alpha, 0.7, 1.0, 2), axis(SweepParam::Photons, 1.0, 2.0, 2)],
        Scenario::Fig4Correlations => {
            vec![axis(SweepParam::Alpha, 0.1, 2.0, 20), axis(SweepParam::Photons, 1.0, 2.0, 2)]
        }
        Scenario::Fig5PositionMap => match robustness_region(design) {
            Ok(r) => vec![
                axis(SweepParam::DxNm, -r.dx_max, r.dx_max, 11),
                axis(SweepParam::DyNm, -r.dy_max, r.dy_max, 11),
            ],
            Err(_) => Vec::new(),
        },
        _ => Vec::new(),
    }
}

fn validate_sweeps(raw: &[RawSweep], scenario: Scenario, design: Design, errs: &mut Errors) -> Vec<SweepAxis> {
    if raw.is_empty() {
        return default_sweeps(scenario, design);
    }
    let mut out: Vec<SweepAxis> = Vec::new();
    for s in raw {
        let name = match SweepParam::ALL.iter().find(|p| p.name() == s.name.get_ref()) {
            Some(p) => *p,
            None => {
                let names: Vec<_> = SweepParam::ALL.iter().map(|p| p.name()).collect();
                errs.at(
                    &s.name,
                    "sweep.name",
                    format!("unknown parameter `{}`; expected one of {}", s.name.get_ref(), names.join(", ")),
                );
                continue;
            }
        };
        if out.iter().any(|a| a.name == name) {
            errs.at(&s.name, "sweep.name", format!("`{}` is swept twice", name.name()));
            continue;
        }
        let positional = matches!(name, SweepParam::DxNm | SweepParam::DyNm);
        if positional != (scenario == Scenario::Fig5PositionMap) && positional {
            errs.at(&s.name, "sweep.name", format!("`{}` is only available in fig5_position_map", name.name()));
            continue;
        }
        if scenario == Scenario::Fig5PositionMap && name == SweepParam::GGhz {
            errs.at(&s.name, "sweep.name", "couplings come from the field map in fig5_position_map");
            continue;
        }
        if name == SweepParam::NAtoms && scenario.fixed_atoms().is_some() {
            errs.at(&s.name, "sweep.name", format!("{scenario} has a fixed atom number"));
            continue;
        }
        let min = *s.min.get_ref();
        let steps = errs.count(&s.steps, "sweep.steps", 1, 1);
        let max = s.max.as_ref().map(|m| *m.get_ref()).unwrap_or(min);
        if !min.is_finite() || !max.is_finite() {
            errs.at(&s.min, "sweep.min", "bounds must be finite");
            continue;
        }
        if steps == 1 && max != min {
            errs.at(&s.name, "sweep.max", "a single step requires max == min");
            continue;
        }
        let axis = SweepAxis { name, min, max, steps };
        if name.is_integer() && axis.values().iter().any(|v| v.fract() != 0.0) {
            errs.at(&s.name, "sweep", format!("`{}` must take integer values", name.name()));
            continue;
        }
        out.push(axis);
    }
    out
}

/// Cartesian product of the sweep axes, first axis slowest.
fn expand_points(params: &Params, sweep: &[SweepAxis], scenario: Scenario, errs: &mut Errors) -> Vec<SweepPoint> {
    let axes: Vec<Vec<f64>> = sweep.iter().map(SweepAxis::values).collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut points = Vec::with_capacity(total);
    for index in 0..total {
        let mut rem = index;
        let mut assignments = vec![(SweepParam::Alpha, 0.0); sweep.len()];
        for (k, axis) in sweep.iter().enumerate().rev() {
            let n = axes[k].len();
            assignments[k] = (axis.name, axes[k][rem % n]);
            rem /= n;
        }
        match resolve_point(params, index, assignments, scenario) {
            Ok(p) => points.push(p),
            Err(e) => {
                errs.plain("sweep", format!("point {index}: {e}"));
                break;
            }
        }
    }
    points
}

fn resolve_point(
    params: &Params,
    index: usize,
    assignments: Vec<(SweepParam, f64)>,
    scenario: Scenario,
) -> Result<SweepPoint, String> {
    let get = |p: SweepParam| assignments.iter().find(|(q, _)| *q == p).map(|(_, v)| *v);
    let n_atoms = get(SweepParam::NAtoms).map(|v| v as usize).unwrap_or(params.n_atoms);
    if !(1..=HilbertLayout::MAX_ATOMS).contains(&n_atoms) {
        return Err(format!("n_atoms = {n_atoms} is outside 1..={}", HilbertLayout::MAX_ATOMS));
    }
    let alpha = get(SweepParam::Alpha).unwrap_or(params.alpha);
    if !non_negative(alpha) {
        return Err(format!("alpha = {alpha} must be non-negative"));
    }
    if alpha != 1.0 && n_atoms < 2 {
        return Err("alpha needs at least two atoms".into());
    }
    let photons = match get(SweepParam::Photons) {
        Some(v) if v < 0.0 => return Err(format!("photons = {v} must be non-negative")),
        Some(v) => v as usize,
        None => params.photons,
    };
    let atoms = if params.atoms.len() == n_atoms {
        params.atoms.clone()
    } else {
        vec![AtomState::Ground; n_atoms]
    };
    let excitations = photons + atoms.iter().filter(|a| **a == AtomState::Excited).count();
    if excitations == 0 {
        return Err("the initial state has no excitation".into());
    }
    let n_max = params.n_max.unwrap_or(excitations + 1);
    if photons > n_max {
        return Err(format!("photons = {photons} exceeds n_max = {n_max}"));
    }
    let rate = |p: SweepParam, base: f64| -> Result<f64, String> {
        let v = get(p).unwrap_or(base);
        if non_negative(v) {
            Ok(v)
        } else {
            Err(format!("{} = {v} must be non-negative", p.name()))
        }
    };
    let couplings = if scenario == Scenario::Fig5PositionMap {
        None
    } else if let Some(c) = &params.couplings_ghz {
        if c.len() != n_atoms {
            return Err(format!("{} couplings for {n_atoms} atoms", c.len()));
        }
        Some(c.iter().map(|g| ghz_to_rad_per_ns(*g)).collect())
    } else {
        let g = rate(SweepParam::GGhz, params.g_ghz.unwrap_or(0.0))?;
        if g == 0.0 {
            return Err("coupling is zero".into());
        }
        let mut gs = vec![ghz_to_rad_per_ns(g); n_atoms];
        if n_atoms >= 2 {
            gs[1] *= alpha;
        }
        Some(gs)
    };
    let kappa = mhz_to_rad_per_ns(rate(SweepParam::KappaMhz, params.kappa_mhz)?);
    let gamma = mhz_to_rad_per_ns(rate(SweepParam::GammaMhz, params.gamma_mhz)?);
    let detuning = get(SweepParam::DetuningGhz).unwrap_or(params.detuning_ghz);
    let omega_c = match params.cavity_ghz {
        Some(f) => ghz_to_rad_per_ns(f),
        None => optical_angular_frequency(params.cavity_wavelength_nm),
    };
    let point = SweepPoint {
        index,
        n_atoms,
        alpha,
        couplings,
        kappa,
        gamma,
        omega_c,
        omega_0: omega_c + ghz_to_rad_per_ns(detuning),
        frame: params.frame,
        photons,
        atoms,
        n_max,
        dx_nm: get(SweepParam::DxNm).unwrap_or(0.0),
        dy_nm: get(SweepParam::DyNm).unwrap_or(0.0),
        assignments,
    };
    point.layout().map_err(|e| e.to_string())?;
    Ok(point)
}

fn check_samples(time: &TimeConfig, p: &SweepPoint, scenario: Scenario, errs: &mut Errors) {
    let n = match (time.t_end_ns, time.dt_ns) {
        (Some(t), Some(dt)) => t / dt,
        _ => 0.0,
    };
    if n > MAX_SAMPLES {
        errs.plain("time", format!("point {}: {n:.0} samples exceed the limit of {MAX_SAMPLES}", p.index));
    }
    if scenario == Scenario::Fig2SingleAtom {
        if let (Some(t), Some(dt)) = (time.long_t_end_ns, time.long_dt_ns) {
            if t / dt > MAX_SAMPLES {
                errs.plain("time.long_dt_ns", format!("{:.0} samples exceed the limit of {MAX_SAMPLES}", t / dt));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config("scenario = \"fig2_single_atom\"\n").unwrap();
        assert_eq!(cfg.design, Design::D1);
        assert_eq!(cfg.params.n_atoms, 1);
        assert_eq!(cfg.params.g_ghz, Some(9.0));
        assert_eq!(cfg.params.frame, Frame::RotatingAtCavity);
        assert_eq!(cfg.points.len(), 1);
        let p = &cfg.points[0];
        assert_eq!(p.n_max, 2);
        assert_eq!(p.omega_c, p.omega_0);
        assert!((cfg.params.kappa_mhz - 29.566).abs() < 1e-3);
        assert!((p.couplings.as_ref().unwrap()[0] - ghz_to_rad_per_ns(9.0)).abs() < 1e-12);
    }

    #[test]
    fn negative_kappa_names_the_key() {
        let err = parse_config("scenario = \"custom\"\n[params]\nkappa_mhz = -3\n").unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert!(err.0[0].contains("params.kappa_mhz"), "{err}");
        assert!(err.0[0].starts_with("line 3"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config("scenario = \"custom\"\n[params]\nkapa_mhz = 3\n").unwrap_err();
        assert!(err.0[0].contains("kapa_mhz"), "{err}");
        assert!(err.0[0].starts_with("line 3"), "{err}");
        assert!(parse_config("scenario = \"custom\"\ncolour = 1\n").is_err());
    }

    #[test]
    fn several_errors_are_reported_together() {
        let err = parse_config("scenario = \"custom\"\n[params]\ngamma_mhz = -1\nn_atoms = 0\n").unwrap_err();
        assert_eq!(err.0.len(), 2, "{err}");
    }

    #[test]
    fn canonical_round_trip() {
        for text in [
            "scenario = \"fig2_single_atom\"\n",
            "scenario = \"fig3_two_atom\"\n",
            "scenario = \"n_atom_wstate\"\n[params]\nframe = \"lab\"\ncavity_ghz = 40\n",
            "scenario = \"fig5_position_map\"\ndesign = \"D3\"\n",
            "scenario = \"custom\"\nseed = 7\n[params]\ncouplings_ghz = [1.0, 0.5, 2.0]\nn_atoms = 3\nq_factor = 1e6\natoms = \"egg\"\nphotons = 0\n[[sweep]]\nname = \"gamma_mhz\"\nmin = 0.0\nmax = 10.0\nsteps = 3\n",
        ] {
            let cfg = parse_config(text).unwrap();
            let again = parse_config(&cfg.to_toml()).unwrap();
            assert_eq!(again, cfg);
        }
    }

    #[test]
    fn sweep_expansion_order() {
        let cfg = parse_config("scenario = \"fig3_two_atom\"\n").unwrap();
        let got: Vec<(f64, f64)> = cfg
            .points
            .iter()
            .map(|p| (p.get(SweepParam::Alpha).unwrap(), p.get(SweepParam::Photons).unwrap()))
            .collect();
        assert_eq!(got, vec![(0.7, 1.0), (0.7, 2.0), (1.0, 1.0), (1.0, 2.0)]);
        assert_eq!(cfg.points[1].n_max, 3);
    }

    #[test]
    fn scenario_constraints() {
        assert!(parse_config("scenario = \"fig2_single_atom\"\n[params]\nn_atoms = 2\n").is_err());
        assert!(parse_config("scenario = \"fig5_position_map\"\ndesign = \"D2\"\n").is_err());
        assert!(parse_config("scenario = \"fig5_position_map\"\n[params]\ng_ghz = 3\n").is_err());
        assert!(parse_config("scenario = \"custom\"\n[[sweep]]\nname = \"dx_nm\"\nmin = 0\n").is_err());
        assert!(parse_config("scenario = \"custom\"\n[params]\nkappa_mhz = 1\nq_factor = 1e6\n").is_err());
        assert!(parse_config("scenario = \"fig4_correlations\"\n[[sweep]]\nname = \"photons\"\nmin = 0\nmax = 1\nsteps = 3\n").is_err());
        assert!(parse_config("scenario = \"custom\"\n[params]\nframe = \"lab\"\n").is_err());
        assert!(parse_config("scenario = \"custom\"\n[params]\nframe = \"lab\"\ncavity_ghz = 50\n").is_ok());
        assert!(parse_config("scenario = \"figure9\"\n").is_err());
    }

    #[test]
    fn integer_fields_reject_floats() {
        let err = parse_config("scenario = \"custom\"\n[params]\nphotons = 1.5\n").unwrap_err();
        assert!(err.0[0].starts_with("line 3"), "{err}");
    }
}
