//! Calibrated analytic stand-ins for the nanobeam cavity fields.
//!
//! Every map is a sum of separable terms sharing one z profile:
//! D·E = Z(z)·Σₜ Xₜ(x)·Yₜ(y), with total energy density equal to D·E.
//!
//! * D1: one term. X is a lattice-modulated Gaussian envelope, Y has a slow
//!   rise away from the hole axis so the trap centre is not the field maximum.
//! * D3: the D1 term scaled down plus a bow-tie term. The bow-tie term is
//!   peaked at x = ±a and has hot spots at |y| = 2δ, outside the gap, so that
//!   D·E decreases monotonically across the gap.
//!
//! Free parameters are solved so the maps hit the quoted mode volume,
//! trap-centre coupling and displacement ratios α.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use super::fieldmap::{FieldMap, FieldSamples, GridSpec};
use super::{
    angular_frequency, coupling_for_cooperativity, kappa_from_q, volume_for_coupling, CooperativityConvention,
    TrapSpec, RB87_D2_DIPOLE, RB87_D2_LINEWIDTH_HZ, SLAB_PERMITTIVITY, WAVELENGTH_NM,
};
use crate::{Error, Result};

pub const DEFAULT_RESOLUTION_NM: f64 = 2.0;
const RESOLUTION_RANGE: (f64, f64) = (0.5, 5.0);

/// Photonic-crystal lattice constant (nm).
pub const LATTICE_NM: f64 = 262.0;
/// D1 air-hole radius (nm).
pub const HOLE_RADIUS_NM: f64 = 53.0;
/// D3 bow-tie hole radius (nm).
pub const TIP_RADIUS_NM: f64 = 60.0;
/// D3 tip-to-tip gap (nm).
pub const TIP_GAP_NM: f64 = 20.0;

/// Long-axis envelope width shared by both maps (nm).
const ENVELOPE_NM: f64 = 700.0;
/// Weight of the D1-like background in D3.
const D3_BACKGROUND: f64 = 0.3;
/// Hot-spot offset and width in units of the gap.
const HOTSPOT_OFFSET: f64 = 2.0;
const HOTSPOT_WIDTH: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Design {
    D1,
    D2,
    D3,
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Design::D1 => "D1",
            Design::D2 => "D2",
            Design::D3 => "D3",
        })
    }
}

impl FromStr for Design {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "D1" => Ok(Design::D1),
            "D2" => Ok(Design::D2),
            "D3" => Ok(Design::D3),
            _ => Err(Error::param("design", format!("expected D1, D2 or D3, got `{s}`"))),
        }
    }
}

/// Published figures of merit for one cavity design.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignSpec {
    pub design: Design,
    pub q_factor: f64,
    /// Mode volume in (λ/n)³ with n = √3.9.
    pub mode_volume: f64,
    pub cooperativity: f64,
    /// Position used as the single-atom trap and as the g calibration point.
    pub trap_center: [f64; 3],
    /// RMS trap displacement per axis (nm).
    pub trap_sigma: [f64; 3],
    /// (δx, α) and (δy, α) for an atom displaced from x = a.
    pub alpha_x: Option<(f64, f64)>,
    pub alpha_y: Option<(f64, f64)>,
}

impl DesignSpec {
    pub fn get(design: Design) -> Self {
        match design {
            Design::D1 => DesignSpec {
                design,
                q_factor: 1.3e7,
                mode_volume: 2.2,
                cooperativity: 4.5e5,
                trap_center: [0.0; 3],
                trap_sigma: [5.3, 5.1, 0.0],
                alpha_x: Some((HOLE_RADIUS_NM, 0.95)),
                alpha_y: Some((HOLE_RADIUS_NM, 1.06)),
            },
            Design::D2 => DesignSpec {
                design,
                q_factor: 1.2e7,
                mode_volume: 0.66,
                cooperativity: 1.3e6,
                trap_center: [0.0; 3],
                trap_sigma: [4.8, 7.5, 0.0],
                alpha_x: None,
                alpha_y: None,
            },
            Design::D3 => DesignSpec {
                design,
                q_factor: 1.1e7,
                mode_volume: 0.66,
                cooperativity: 1.2e6,
                trap_center: [LATTICE_NM, 0.0, 0.0],
                // Only D2's displacements are published; the bow-tie shares its trap.
                trap_sigma: [4.8, 7.5, 0.0],
                alpha_x: Some((TIP_RADIUS_NM, 0.52)),
                alpha_y: Some((TIP_GAP_NM, 0.8)),
            },
        }
    }

    pub fn refractive_index() -> f64 {
        SLAB_PERMITTIVITY.sqrt()
    }

    /// Mode volume in nm³.
    pub fn mode_volume_nm3(&self) -> f64 {
        self.mode_volume * (WAVELENGTH_NM / Self::refractive_index()).powi(3)
    }

    /// Cavity decay, ordinary frequency (Hz).
    pub fn kappa_hz(&self) -> f64 {
        kappa_from_q(self.q_factor, WAVELENGTH_NM).expect("positive Q").ordinary
    }

    /// Trap-centre coupling target, ordinary frequency (Hz). D1 quotes
    /// g directly; the others are inverted from C = g²/(κγ).
    pub fn coupling_target_hz(&self) -> f64 {
        match self.design {
            Design::D1 => 9e9,
            _ => coupling_for_cooperativity(
                self.cooperativity,
                self.kappa_hz(),
                RB87_D2_LINEWIDTH_HZ,
                CooperativityConvention::GSquaredOverKappaGamma,
            )
            .expect("positive rates"),
        }
    }

    /// V(trap centre)/V_global implied by the coupling target with ε = 3.9.
    pub fn trap_volume_ratio(&self) -> f64 {
        let omega = angular_frequency(WAVELENGTH_NM);
        let v_trap = volume_for_coupling(
            RB87_D2_DIPOLE,
            omega,
            SLAB_PERMITTIVITY,
            2.0 * PI * self.coupling_target_hz(),
        );
        v_trap * 1e27 / self.mode_volume_nm3()
    }

    pub fn trap(&self) -> TrapSpec {
        TrapSpec::new(self.trap_center, self.trap_sigma).expect("static trap parameters")
    }
}

/// Displacement box for atom 2 around x = a used in robustness studies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobustnessRegion {
    pub dx_max: f64,
    pub dy_max: f64,
}

/// D1 uses the full hole radius on both axes. D3 spans the gap in y and the
/// trap RMS along x, beyond which the bow-tie coupling collapses.
pub fn robustness_region(design: Design) -> Result<RobustnessRegion> {
    match design {
        Design::D1 => Ok(RobustnessRegion {
            dx_max: HOLE_RADIUS_NM,
            dy_max: HOLE_RADIUS_NM,
        }),
        Design::D3 => Ok(RobustnessRegion {
            dx_max: DesignSpec::get(Design::D3).trap_sigma[0],
            dy_max: TIP_GAP_NM,
        }),
        Design::D2 => Err(Error::param("design", "no field map is available for D2")),
    }
}

fn gauss(u: f64, w: f64) -> f64 {
    (-0.5 * (u / w).powi(2)).exp()
}

/// Find x in [lo, hi] with f(x) = target for monotone f.
fn bisect(mut lo: f64, mut hi: f64, target: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let (flo, fhi) = (f(lo) - target, f(hi) - target);
    if flo * fhi > 0.0 {
        return Err(Error::param("calibration", format!("target {target} not bracketed")));
    }
    let rising = fhi > flo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) - target > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * mid.abs().max(1e-300) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// D1 profile parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
struct HoleProfile {
    /// Lattice modulation depth.
    m: f64,
    /// Y(u) = (1 + b u²) e^{−c u²}, u = y/r.
    b: f64,
    c: f64,
}

impl HoleProfile {
    fn x(&self, x: f64) -> f64 {
        (1.0 - self.m * (PI * x / LATTICE_NM).sin().powi(2)) * gauss(x, ENVELOPE_NM)
    }

    fn y(&self, y: f64) -> f64 {
        let u2 = (y / HOLE_RADIUS_NM).powi(2);
        (1.0 + self.b * u2) * (-self.c * u2).exp()
    }

    fn x_integral(&self) -> f64 {
        let k = PI / LATTICE_NM;
        (2.0 * PI).sqrt() * ENVELOPE_NM * (1.0 - 0.5 * self.m * (1.0 - (-2.0 * (k * ENVELOPE_NM).powi(2)).exp()))
    }

    fn y_integral(&self) -> f64 {
        HOLE_RADIUS_NM * (PI / self.c).sqrt() * (1.0 + self.b / (2.0 * self.c))
    }

    /// max_y Y(y); attained at u² = 1/c − 1/b when b > c.
    fn y_max(&self) -> f64 {
        if self.b > self.c {
            (self.b / self.c) * (self.c / self.b - 1.0).exp()
        } else {
            1.0
        }
    }

    fn calibrate(spec: &DesignSpec) -> Result<Self> {
        let (dx, ax) = spec.alpha_x.expect("D1 has α targets");
        let (dy, ay) = spec.alpha_y.expect("D1 has α targets");
        let a = LATTICE_NM;
        let s = (PI * dx / a).sin().powi(2);
        let m = (1.0 - ax * ax * (((a + dx).powi(2) - a * a) / (2.0 * ENVELOPE_NM.powi(2))).exp()) / s;
        let rise = ay * ay;
        let u2 = (dy / HOLE_RADIUS_NM).powi(2);
        let b_of = |c: f64| (rise * (c * u2).exp() - 1.0) / u2;
        let ratio = spec.trap_volume_ratio();
        let peak = |c: f64| HoleProfile { m, b: b_of(c), c }.y_max();
        // peak(c) falls steeply from ∞ on the slow-decay branch; stay on it.
        let c = bisect(1e-4, 0.2, ratio, peak)?;
        Ok(HoleProfile { m, b: b_of(c), c })
    }
}

/// D3 bow-tie term parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
struct BowTieProfile {
    /// Width of the Gaussians at x = ±a.
    sigma_x: f64,
    /// Decay across the gap, e^{−c v²}, v = y/δ.
    c: f64,
    /// Hot-spot amplitude.
    h: f64,
}

impl BowTieProfile {
    fn x(&self, x: f64) -> f64 {
        gauss(x - LATTICE_NM, self.sigma_x) + gauss(x + LATTICE_NM, self.sigma_x)
    }

    fn y(&self, y: f64) -> f64 {
        let v = y / TIP_GAP_NM;
        (-self.c * v * v).exp()
            + self.h * (gauss(v - HOTSPOT_OFFSET, HOTSPOT_WIDTH) + gauss(v + HOTSPOT_OFFSET, HOTSPOT_WIDTH))
    }

    fn x_integral(&self) -> f64 {
        2.0 * (2.0 * PI).sqrt() * self.sigma_x
    }

    fn y_integral(&self) -> f64 {
        TIP_GAP_NM * ((PI / self.c).sqrt() + 2.0 * self.h * HOTSPOT_WIDTH * (2.0 * PI).sqrt())
    }
}

/// Calibrated analytic profile; `de` is the exact field the map samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthProfile {
    design: Design,
    hole: HoleProfile,
    background: f64,
    bow_tie: Option<BowTieProfile>,
    /// Gaussian z width (nm).
    w_z: f64,
    /// Analytic maximum of Σₜ Xₜ Yₜ.
    xy_max: f64,
}

/// Local maximum of f (y ≥ 0) reached from each seed by alternating
/// golden-section line searches; returns the best.
fn max_2d(f: impl Fn(f64, f64) -> f64, seeds: &[(f64, f64)]) -> f64 {
    let golden = |g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64| {
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let m1 = hi - r * (hi - lo);
            let m2 = lo + r * (hi - lo);
            if g(m1) < g(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        0.5 * (lo + hi)
    };
    let mut best = f64::NEG_INFINITY;
    for &(mut x, mut y) in seeds {
        let mut w = 20.0;
        for _ in 0..30 {
            x = golden(&|x| f(x, y), x - w, x + w);
            y = golden(&|y| f(x, y), (y - w).max(0.0), y + w);
            w = (w * 0.5).max(1e-3);
        }
        best = best.max(f(x, y));
    }
    best
}

impl SynthProfile {
    pub fn calibrate(design: Design) -> Result<Self> {
        let spec = DesignSpec::get(design);
        if design == Design::D2 {
            return Err(Error::param("design", "no field map is available for D2"));
        }
        let hole = HoleProfile::calibrate(&DesignSpec::get(Design::D1))?;
        let z_integral = |xy_integral: f64, xy_max: f64| spec.mode_volume_nm3() * xy_max / xy_integral;
        match design {
            Design::D1 => {
                let xy_max = hole.y_max();
                let w_z = z_integral(hole.x_integral() * hole.y_integral(), xy_max) / (2.0 * PI).sqrt();
                Ok(SynthProfile {
                    design,
                    hole,
                    background: 1.0,
                    bow_tie: None,
                    w_z,
                    xy_max,
                })
            }
            _ => Self::calibrate_bow_tie(&spec, hole, z_integral),
        }
    }

    fn calibrate_bow_tie(spec: &DesignSpec, hole: HoleProfile, z_integral: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let (dx, ax) = spec.alpha_x.expect("D3 has α targets");
        let (dy, ay) = spec.alpha_y.expect("D3 has α targets");
        let beta = D3_BACKGROUND;
        let a = LATTICE_NM;
        let ratio = spec.trap_volume_ratio();
        let xy = |p: &BowTieProfile, x: f64, y: f64| beta * hole.x(x) * hole.y(y) + p.x(x) * p.y(y);
        let y_hump = HOLE_RADIUS_NM * (1.0 / hole.c - 1.0 / hole.b).max(0.0).sqrt();
        let seeds = [(a, HOTSPOT_OFFSET * TIP_GAP_NM), (a, 0.0), (0.0, y_hump)];
        let xy_max = |p: &BowTieProfile| max_2d(|x, y| xy(p, x, y), &seeds);

        let mut p = BowTieProfile {
            sigma_x: 25.0,
            c: 0.6,
            h: 1.0,
        };
        for _ in 0..100 {
            let prev = p;
            p.sigma_x = bisect(1.0, 200.0, ax * ax, |s| {
                let q = BowTieProfile { sigma_x: s, ..p };
                xy(&q, a + dx, 0.0) / xy(&q, a, 0.0)
            })?;
            p.c = bisect(1e-3, 20.0, ay * ay, |c| {
                let q = BowTieProfile { c, ..p };
                xy(&q, a, dy) / xy(&q, a, 0.0)
            })?;
            p.h = bisect(0.0, 50.0, ratio, |h| {
                let q = BowTieProfile { h, ..p };
                xy_max(&q) / xy(&q, a, 0.0)
            })?;
            let moved = (p.sigma_x - prev.sigma_x).abs() / p.sigma_x
                + (p.c - prev.c).abs() / p.c
                + (p.h - prev.h).abs() / p.h.max(1e-12);
            if moved < 1e-13 {
                break;
            }
        }
        let peak = xy_max(&p);
        let integral = beta * hole.x_integral() * hole.y_integral() + p.x_integral() * p.y_integral();
        let w_z = z_integral(integral, peak) / (2.0 * PI).sqrt();
        Ok(SynthProfile {
            design: spec.design,
            hole,
            background: beta,
            bow_tie: Some(p),
            w_z,
            xy_max: peak,
        })
    }

    pub fn design(&self) -> Design {
        self.design
    }

    /// Gaussian z width (nm).
    pub fn w_z(&self) -> f64 {
        self.w_z
    }

    /// Analytic maximum of D·E.
    pub fn de_max(&self) -> f64 {
        self.xy_max
    }

    /// Unnormalised D·E at `r` (nm).
    pub fn de(&self, r: [f64; 3]) -> f64 {
        let [x, y, z] = r;
        let mut v = self.background * self.hole.x(x) * self.hole.y(y);
        if let Some(p) = &self.bow_tie {
            v += p.x(x) * p.y(y);
        }
        v * gauss(z, self.w_z)
    }

    /// Closed-form ∫ D·E dV over all space (nm³ in density units).
    pub fn de_integral(&self) -> f64 {
        let mut xy = self.background * self.hole.x_integral() * self.hole.y_integral();
        if let Some(p) = &self.bow_tie {
            xy += p.x_integral() * p.y_integral();
        }
        xy * (2.0 * PI).sqrt() * self.w_z
    }

    /// Samples the profile on a centred grid wide enough that truncated tails
    /// are below 1e−10 of the integral.
    pub fn sample(&self, resolution_nm: f64) -> Result<FieldMap> {
        if !(RESOLUTION_RANGE.0..=RESOLUTION_RANGE.1).contains(&resolution_nm) {
            return Err(Error::param(
                "resolution",
                format!(
                    "must lie in [{}, {}] nm, got {resolution_nm}",
                    RESOLUTION_RANGE.0, RESOLUTION_RANGE.1
                ),
            ));
        }
        let h = resolution_nm;
        let half = |extent: f64| (extent / h).ceil() as usize;
        let grid = GridSpec::centered(
            [half(6.0 * ENVELOPE_NM), half(25.0 * HOLE_RADIUS_NM), half(8.0 * self.w_z)],
            [h; 3],
        )?;
        let xs = grid.coords(0);
        let ys = grid.coords(1);
        let z = grid.coords(2).iter().map(|&z| gauss(z, self.w_z)).collect();
        let mut terms = vec![(
            xs.iter().map(|&x| self.background * self.hole.x(x)).collect(),
            ys.iter().map(|&y| self.hole.y(y)).collect(),
        )];
        if let Some(p) = &self.bow_tie {
            terms.push((xs.iter().map(|&x| p.x(x)).collect(), ys.iter().map(|&y| p.y(y)).collect()));
        }
        FieldMap::new(grid, FieldSamples::Layered { z, terms }, WAVELENGTH_NM)
    }
}

/// Calibrated synthetic map at `resolution_nm` ∈ [0.5, 5].
pub fn synth_fieldmap(design: Design, resolution_nm: f64) -> Result<FieldMap> {
    if !(RESOLUTION_RANGE.0..=RESOLUTION_RANGE.1).contains(&resolution_nm) {
        return Err(Error::param(
            "resolution",
            format!("must lie in [0.5, 5] nm, got {resolution_nm}"),
        ));
    }
    SynthProfile::calibrate(design)?.sample(resolution_nm)
}

pub fn synth_fieldmap_default(design: Design) -> Result<FieldMap> {
    synth_fieldmap(design, DEFAULT_RESOLUTION_NM)
}

/// cos²(πx/a)·exp(−x²/2Lx² − y²/2wy² − z²/2wz²) with a closed-form volume.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StandingWave {
    pub period: f64,
    pub envelope: [f64; 3],
}

impl StandingWave {
    /// Exact V = ∫ D·E dV / max D·E over all space (nm³).
    pub fn exact_volume(&self) -> f64 {
        let k = PI / self.period;
        let [lx, wy, wz] = self.envelope;
        let s = (2.0 * PI).sqrt();
        s * lx * 0.5 * (1.0 + (-2.0 * (k * lx).powi(2)).exp()) * s * wy * s * wz
    }
}

pub fn standing_wave_map(wave: &StandingWave, resolution_nm: f64, wavelength_nm: f64) -> Result<FieldMap> {
    if !(resolution_nm > 0.0) || wave.envelope.iter().any(|w| !(*w > 0.0)) || !(wave.period > 0.0) {
        return Err(Error::param("standing_wave", "widths, period and resolution must be positive"));
    }
    let h = resolution_nm;
    let half = wave.envelope.map(|w| (7.0 * w / h).ceil() as usize);
    let grid = GridSpec::centered(half, [h; 3])?;
    let x = grid
        .coords(0)
        .iter()
        .map(|&x| (PI * x / wave.period).cos().powi(2) * gauss(x, wave.envelope[0]))
        .collect();
    let y = grid.coords(1).iter().map(|&y| gauss(y, wave.envelope[1])).collect();
    let z = grid.coords(2).iter().map(|&z| gauss(z, wave.envelope[2])).collect();
    FieldMap::new(grid, FieldSamples::Layered { z, terms: vec![(x, y)] }, wavelength_nm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{coupling_at, coupling_ratio, global_mode_volume, EmitterSpec};

    #[test]
    fn design_parsing() {
        assert_eq!("d3".parse::<Design>().unwrap(), Design::D3);
        assert!("D4".parse::<Design>().is_err());
        assert_eq!(Design::D1.to_string(), "D1");
    }

    #[test]
    fn targets() {
        let d1 = DesignSpec::get(Design::D1);
        assert!((d1.trap_volume_ratio() - 1.966).abs() < 2e-3);
        let d3 = DesignSpec::get(Design::D3);
        assert!((d3.coupling_target_hz() / 15.95e9 - 1.0).abs() < 2e-3);
        assert!((1.0 / d3.trap_volume_ratio() - 0.4796).abs() < 1e-3);
    }

    #[test]
    fn d1_profile_hits_targets() {
        let p = SynthProfile::calibrate(Design::D1).unwrap();
        let a = LATTICE_NM;
        let r = HOLE_RADIUS_NM;
        let alpha = |r1: [f64; 3], r2: [f64; 3]| (p.de(r2) / p.de(r1)).sqrt();
        assert!((alpha([a, 0.0, 0.0], [a + r, 0.0, 0.0]) - 0.95).abs() < 1e-12);
        assert!((alpha([a, 0.0, 0.0], [a, r, 0.0]) - 1.06).abs() < 1e-12);
        let ratio = p.de_max() / p.de([0.0; 3]);
        assert!((ratio - DesignSpec::get(Design::D1).trap_volume_ratio()).abs() < 1e-9);
        let v = p.de_integral() / p.de_max() / DesignSpec::get(Design::D1).mode_volume_nm3();
        assert!((v - 1.0).abs() < 1e-12);
        assert!((p.w_z() - 46.0).abs() < 5.0, "{}", p.w_z());
    }

    #[test]
    fn d3_profile_hits_targets() {
        let p = SynthProfile::calibrate(Design::D3).unwrap();
        let a = LATTICE_NM;
        let c = [a, 0.0, 0.0];
        assert!(((p.de([a + TIP_RADIUS_NM, 0.0, 0.0]) / p.de(c)).sqrt() - 0.52).abs() < 1e-9);
        assert!(((p.de([a, TIP_GAP_NM, 0.0]) / p.de(c)).sqrt() - 0.8).abs() < 1e-9);
        assert!((p.de(c) / p.de_max() - 0.4796).abs() < 1e-3);
        // D·E falls monotonically across the gap.
        let mut last = p.de(c);
        for i in 1..=40 {
            let v = p.de([a, i as f64 * 0.5, 0.0]);
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn d1_map_is_mirror_symmetric() {
        let m = synth_fieldmap(Design::D1, 5.0).unwrap();
        let [nx, ny, nz] = m.grid().shape;
        for (i, j, k) in [(0, 3, 7), (17, 100, 2), (nx / 2 - 40, ny / 3, nz / 2 + 1)] {
            let (a, _) = m.sample(i, j, k);
            let (b, _) = m.sample(nx - 1 - i, j, k);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }
        assert_eq!(m.grid().coord(0, 0), -m.grid().coord(0, nx - 1));
    }

    #[test]
    fn d1_map_calibration() {
        let m = synth_fieldmap_default(Design::D1).unwrap();
        let v = global_mode_volume(&m).unwrap();
        assert!((v.cubic_wavelengths(DesignSpec::refractive_index()) / 2.2 - 1.0).abs() < 1e-2);
        let a = LATTICE_NM;
        let r = HOLE_RADIUS_NM;
        let ax = coupling_ratio(&m, [a, 0.0, 0.0], [a + r, 0.0, 0.0]).unwrap();
        let ay = coupling_ratio(&m, [a, 0.0, 0.0], [a, r, 0.0]).unwrap();
        assert!((ax - 0.95).abs() < 1e-3, "{ax}");
        assert!((ay - 1.06).abs() < 1e-3, "{ay}");
        let g = coupling_at(&m, &EmitterSpec::rb87_d2(), [0.0; 3], SLAB_PERMITTIVITY).unwrap();
        assert!((g / (2.0 * PI * 9e9) - 1.0).abs() < 0.05);
    }

    #[test]
    fn resolution_range() {
        assert!(synth_fieldmap(Design::D1, 0.4).is_err());
        assert!(synth_fieldmap(Design::D1, 5.1).is_err());
        assert!(synth_fieldmap(Design::D2, 2.0).is_err());
        assert!(robustness_region(Design::D2).is_err());
    }

    #[test]
    fn standing_wave_closed_form() {
        let wave = StandingWave {
            period: LATTICE_NM,
            envelope: [500.0, 120.0, 60.0],
        };
        let m = standing_wave_map(&wave, 2.0, 780.0).unwrap();
        let v = global_mode_volume(&m).unwrap();
        assert!((v.nm3() / wave.exact_volume() - 1.0).abs() < 1e-2);
    }
}
