//! Position-dependent light–matter coupling from cavity field maps.
//!
//! This module works in SI units: rates in rad/s (angular) or Hz (ordinary),
//! volumes in m³, positions in nm.

mod fieldmap;
mod synth;

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

pub use fieldmap::{global_mode_volume, local_mode_volume, FieldMap, FieldSamples, GridSpec, ModeVolume};
pub use synth::{
    robustness_region, standing_wave_map, synth_fieldmap, synth_fieldmap_default, Design, DesignSpec,
    RobustnessRegion, StandingWave, SynthProfile, DEFAULT_RESOLUTION_NM, HOLE_RADIUS_NM, LATTICE_NM, TIP_GAP_NM,
    TIP_RADIUS_NM,
};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Effective far-detuned dipole moment of the ⁸⁷Rb D2 line (C·m).
pub const RB87_D2_DIPOLE: f64 = 3.584e-29;
/// ⁸⁷Rb D2 natural linewidth, ordinary frequency (Hz).
pub const RB87_D2_LINEWIDTH_HZ: f64 = 6.0666e6;
/// Operating wavelength (nm).
pub const WAVELENGTH_NM: f64 = 780.0;
/// Relative permittivity of the Si₃N₄ slab.
pub const SLAB_PERMITTIVITY: f64 = 3.9;

/// Angular frequency (rad/s) of light at `lambda_nm`.
pub fn angular_frequency(lambda_nm: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / (lambda_nm * 1e-9)
}

/// Two-level emitter; all fields SI and positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmitterSpec {
    /// |μ| (C·m).
    pub dipole_moment: f64,
    /// Transition angular frequency (rad/s).
    pub omega_a: f64,
    /// Energy decay rate (rad/s).
    pub gamma: f64,
}

impl EmitterSpec {
    pub fn new(dipole_moment: f64, omega_a: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [("dipole_moment", dipole_moment), ("omega_a", omega_a), ("gamma", gamma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        Ok(EmitterSpec {
            dipole_moment,
            omega_a,
            gamma,
        })
    }

    pub fn rb87_d2() -> Self {
        EmitterSpec {
            dipole_moment: RB87_D2_DIPOLE,
            omega_a: angular_frequency(WAVELENGTH_NM),
            gamma: 2.0 * PI * RB87_D2_LINEWIDTH_HZ,
        }
    }
}

/// Cavity energy decay rate in both conventions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavityLoss {
    /// κ = ω_c/Q (rad/s).
    pub angular: f64,
    /// ν_c/Q (Hz).
    pub ordinary: f64,
}

/// κ from the quality factor at vacuum wavelength `lambda_nm`. Q = ∞ gives zero.
pub fn kappa_from_q(q: f64, lambda_nm: f64) -> Result<CavityLoss> {
    if !(q > 0.0) {
        return Err(Error::param("q_factor", format!("must be positive, got {q}")));
    }
    if !(lambda_nm > 0.0 && lambda_nm.is_finite()) {
        return Err(Error::param("wavelength", format!("must be positive, got {lambda_nm}")));
    }
    let ordinary = SPEED_OF_LIGHT / (lambda_nm * 1e-9) / q;
    Ok(CavityLoss {
        angular: 2.0 * PI * ordinary,
        ordinary,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CooperativityConvention {
    /// C = g²/(κγ).
    #[default]
    GSquaredOverKappaGamma,
    /// C = 4g²/(κγ).
    FourGSquaredOverKappaGamma,
}

impl CooperativityConvention {
    fn prefactor(self) -> f64 {
        match self {
            CooperativityConvention::GSquaredOverKappaGamma => 1.0,
            CooperativityConvention::FourGSquaredOverKappaGamma => 4.0,
        }
    }
}

/// Cooperativity; g, κ, γ must share one unit convention.
pub fn cooperativity(g: f64, kappa: f64, gamma: f64, convention: CooperativityConvention) -> Result<f64> {
    if !(kappa > 0.0) || !(gamma > 0.0) {
        return Err(Error::param("cooperativity", "kappa and gamma must be positive"));
    }
    if !(g >= 0.0) {
        return Err(Error::param("cooperativity", format!("coupling must be non-negative, got {g}")));
    }
    Ok(convention.prefactor() * g * g / (kappa * gamma))
}

/// Inverse of [`cooperativity`] for g.
pub fn coupling_for_cooperativity(
    c: f64,
    kappa: f64,
    gamma: f64,
    convention: CooperativityConvention,
) -> Result<f64> {
    if !(kappa > 0.0) || !(gamma > 0.0) || !(c >= 0.0) {
        return Err(Error::param("cooperativity", "need C >= 0 and positive kappa, gamma"));
    }
    Ok((c * kappa * gamma / convention.prefactor()).sqrt())
}

/// g = |μ| √(ω_c / (ħ ε₀ ε V)) in rad/s.
pub fn coupling_strength(dipole_moment: f64, omega_c: f64, eps_r: f64, volume_m3: f64) -> Result<f64> {
    if !(eps_r > 0.0) {
        return Err(Error::param("permittivity", format!("must be positive, got {eps_r}")));
    }
    if !(volume_m3 > 0.0) {
        return Err(Error::param("mode_volume", format!("must be positive, got {volume_m3}")));
    }
    Ok(dipole_moment * (omega_c / (HBAR * EPSILON_0 * eps_r * volume_m3)).sqrt())
}

/// Mode volume (m³) giving coupling `g` (rad/s).
pub fn volume_for_coupling(dipole_moment: f64, omega_c: f64, eps_r: f64, g: f64) -> f64 {
    dipole_moment * dipole_moment * omega_c / (HBAR * EPSILON_0 * eps_r * g * g)
}

/// Coupling (rad/s) of `emitter` at `r` (nm), with ω_c taken from the map wavelength.
pub fn coupling_at(map: &FieldMap, emitter: &EmitterSpec, r: [f64; 3], eps_r: f64) -> Result<f64> {
    let v = local_mode_volume(map, r)?;
    coupling_strength(emitter.dipole_moment, angular_frequency(map.wavelength_nm()), eps_r, v.m3())
}

/// α = g(r₂)/g(r₁) = √(V(r₁)/V(r₂)).
pub fn coupling_ratio(map: &FieldMap, r1: [f64; 3], r2: [f64; 3]) -> Result<f64> {
    let v1 = local_mode_volume(map, r1)?;
    let v2 = local_mode_volume(map, r2)?;
    Ok((v1.nm3() / v2.nm3()).sqrt())
}

/// Harmonic trap with independent Gaussian displacement per axis (nm, RMS).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrapSpec {
    pub center: [f64; 3],
    pub sigma: [f64; 3],
}

impl TrapSpec {
    pub fn new(center: [f64; 3], sigma: [f64; 3]) -> Result<Self> {
        if sigma.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::param("sigma", format!("must be finite and non-negative, got {sigma:?}")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("center", "must be finite"));
        }
        Ok(TrapSpec { center, sigma })
    }

    /// Sample `index` of the stream for `seed`; independent of any other index.
    pub fn sample(&self, seed: u64, index: u64) -> [f64; 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut out = self.center;
        for (o, s) in out.iter_mut().zip(self.sigma) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *o += s * z;
        }
        out
    }
}

/// Positions 0..n of the seeded stream.
pub fn sample_displacements(trap: &TrapSpec, n: usize, seed: u64) -> Result<Vec<[f64; 3]>> {
    if n == 0 {
        return Err(Error::param("n", "at least one sample is required"));
    }
    Ok((0..n as u64).map(|i| trap.sample(seed, i)).collect())
}
