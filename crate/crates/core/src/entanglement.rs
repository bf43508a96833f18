//! Partial traces, normalised von Neumann entropy, Wootters concurrence and
//! fidelity-type diagnostics.
//!
//! Subsystems are labelled in the order photon = A, atom 0 = B, atom 1 = C, ….

use std::fmt;

use crate::dynamics::Trajectory;
use crate::fockspace::{AtomState, HilbertLayout};
use crate::state::{DensityMatrix, POSITIVITY_TOL};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Squared Wootters eigenvalues below this are treated as exact zeros. Rounding
/// in rank-deficient inputs otherwise leaks ~√ε ≈ 1e-8 into the concurrence.
const CONCURRENCE_SPECTRAL_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subsystem {
    Photon,
    Atom(usize),
}

impl Subsystem {
    fn factor(self) -> usize {
        match self {
            Subsystem::Photon => 0,
            Subsystem::Atom(i) => i + 1,
        }
    }

    fn from_factor(f: usize) -> Self {
        if f == 0 {
            Subsystem::Photon
        } else {
            Subsystem::Atom(f - 1)
        }
    }

    /// Letter label: photon `A`, atoms `B`, `C`, ….
    pub fn letter(self) -> String {
        match self {
            Subsystem::Photon => "A".to_string(),
            Subsystem::Atom(i) if i < 25 => ((b'B' + i as u8) as char).to_string(),
            Subsystem::Atom(i) => format!("atom{}", i + 1),
        }
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.letter())
    }
}

/// Ordered, duplicate-free selection of tensor factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemSet {
    parts: Vec<Subsystem>,
}

impl SubsystemSet {
    pub fn new(layout: &HilbertLayout, parts: Vec<Subsystem>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidSubsystem("selection is empty".into()));
        }
        for (k, p) in parts.iter().enumerate() {
            if let Subsystem::Atom(i) = p {
                if *i >= layout.n_atoms() {
                    return Err(Error::InvalidSubsystem(format!(
                        "atom {i} does not exist in a {}-atom layout",
                        layout.n_atoms()
                    )));
                }
            }
            if parts[..k].contains(p) {
                return Err(Error::InvalidSubsystem(format!("{p} listed twice")));
            }
        }
        Ok(SubsystemSet { parts })
    }

    pub fn photon(layout: &HilbertLayout) -> Result<Self> {
        Self::new(layout, vec![Subsystem::Photon])
    }

    pub fn atom(layout: &HilbertLayout, i: usize) -> Result<Self> {
        Self::new(layout, vec![Subsystem::Atom(i)])
    }

    pub fn atom_pair(layout: &HilbertLayout, i: usize, j: usize) -> Result<Self> {
        Self::new(layout, vec![Subsystem::Atom(i), Subsystem::Atom(j)])
    }

    pub fn parts(&self) -> &[Subsystem] {
        &self.parts
    }

    /// Every factor not in this set, in layout order. May be empty.
    pub fn complement_parts(&self, layout: &HilbertLayout) -> Vec<Subsystem> {
        (0..=layout.n_atoms())
            .map(Subsystem::from_factor)
            .filter(|s| !self.parts.contains(s))
            .collect()
    }

    pub fn complement(&self, layout: &HilbertLayout) -> Result<Self> {
        Self::new(layout, self.complement_parts(layout))
    }

    pub fn dim(&self, layout: &HilbertLayout) -> usize {
        let dims = layout.factor_dims();
        self.parts.iter().map(|p| dims[p.factor()]).product()
    }
}

fn factor_digit(layout: &HilbertLayout, index: usize, factor: usize) -> usize {
    if factor == 0 {
        layout.photons_of(index)
    } else {
        layout.atom_of(index, factor - 1).bit()
    }
}

fn mixed_radix(layout: &HilbertLayout, index: usize, parts: &[Subsystem]) -> usize {
    let dims = layout.factor_dims();
    parts.iter().fold(0, |acc, p| {
        acc * dims[p.factor()] + factor_digit(layout, index, p.factor())
    })
}

/// Reduced state on the kept factors, ordered as listed in `keep`.
pub fn partial_trace(
    rho: &DensityMatrix,
    layout: &HilbertLayout,
    keep: &SubsystemSet,
) -> Result<DensityMatrix> {
    let dim = layout.dim();
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho.dim(),
        });
    }
    let traced = keep.complement_parts(layout);
    let keep_dim = keep.dim(layout);
    let traced_dim = dim / keep_dim;

    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(keep_dim); traced_dim];
    for idx in 0..dim {
        let k = mixed_radix(layout, idx, keep.parts());
        let t = mixed_radix(layout, idx, &traced);
        groups[t].push((k, idx));
    }

    let m = rho.matrix();
    let mut out = CMatrix::zeros(keep_dim, keep_dim);
    for group in &groups {
        for &(ka, a) in group {
            for &(kb, b) in group {
                out[(ka, kb)] += m[(a, b)];
            }
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Eigenvalues clamped to [0, 1]; errors on negativity beyond [`POSITIVITY_TOL`].
fn clamped_spectrum(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let ev = rho.eigenvalues();
    if let Some(&min) = ev.first() {
        if min < -POSITIVITY_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
    }
    Ok(ev.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// −Tr(ρ ln ρ) in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(clamped_spectrum(rho)?
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum())
}

/// −Tr(ρ ln ρ) / ln(norm_dim).
pub fn entropy_normalized(rho_sub: &DensityMatrix, norm_dim: usize) -> Result<f64> {
    if norm_dim < 2 {
        return Err(Error::param("norm_dim", format!("must be at least 2, got {norm_dim}")));
    }
    Ok(von_neumann_entropy(rho_sub)? / (norm_dim as f64).ln())
}

/// Number of basis configurations of `parts` carrying at most `max_excitations`
/// quanta. An empty selection counts as one configuration.
pub fn accessible_dim(layout: &HilbertLayout, parts: &[Subsystem], max_excitations: usize) -> usize {
    let n_photon_levels = if parts.contains(&Subsystem::Photon) {
        layout.n_max().min(max_excitations) + 1
    } else {
        1
    };
    let n_atoms = parts.iter().filter(|p| matches!(p, Subsystem::Atom(_))).count();
    let mut count = 0;
    for n in 0..n_photon_levels {
        for bits in 0..(1usize << n_atoms) {
            if n + bits.count_ones() as usize <= max_excitations {
                count += 1;
            }
        }
    }
    count
}

/// Default entropy normalisation: the smaller of the subsystem's and the
/// complement's dimension within the excitation sector reachable from a state
/// with `max_excitations` quanta, never below 2.
pub fn default_norm_dim(layout: &HilbertLayout, keep: &SubsystemSet, max_excitations: usize) -> usize {
    let own = accessible_dim(layout, keep.parts(), max_excitations);
    let other = accessible_dim(layout, &keep.complement_parts(layout), max_excitations);
    own.min(other).max(2)
}

/// Largest excitation number with population above `tol` in `rho`.
pub fn max_excitations(rho: &DensityMatrix, layout: &HilbertLayout, tol: f64) -> usize {
    (0..rho.dim())
        .filter(|&i| rho.population(i) > tol)
        .map(|i| layout.excitations_of(i))
        .max()
        .unwrap_or(0)
}

fn hermitian_sqrt(m: &CMatrix) -> CMatrix {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let v = &eig.eigenvectors;
    let sqrt_diag = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from(l.max(0.0).sqrt())));
    v * sqrt_diag * v.adjoint()
}

/// Wootters concurrence of a two-qubit state (basis |s₁s₂⟩, g ↦ 0, e ↦ 1).
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let min = rho.min_eigenvalue();
    if min < -POSITIVITY_TOL {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    let m = rho.matrix();
    let herm = (m + m.adjoint()) * C64::from(0.5);

    // σ_y ⊗ σ_y is real anti-diagonal with signs (−1, +1, +1, −1).
    let mut yy = CMatrix::zeros(4, 4);
    yy[(0, 3)] = C64::from(-1.0);
    yy[(1, 2)] = C64::ONE;
    yy[(2, 1)] = C64::ONE;
    yy[(3, 0)] = C64::from(-1.0);
    let flipped = &yy * herm.conjugate() * &yy;

    let sqrt_rho = hermitian_sqrt(&herm);
    let r2 = &sqrt_rho * flipped * &sqrt_rho;
    let r2 = (&r2 + r2.adjoint()) * C64::from(0.5);
    let mut lambdas: Vec<f64> = r2
        .symmetric_eigenvalues()
        .iter()
        .map(|&mu| if mu > CONCURRENCE_SPECTRAL_FLOOR { mu.sqrt() } else { 0.0 })
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Reduced two-qubit state of atoms `i` and `j`.
pub fn atom_pair_state(
    rho: &DensityMatrix,
    layout: &HilbertLayout,
    i: usize,
    j: usize,
) -> Result<DensityMatrix> {
    partial_trace(rho, layout, &SubsystemSet::atom_pair(layout, i, j)?)
}

/// √⟨ψ|ρ|ψ⟩ for a normalised ket.
pub fn state_fidelity(rho: &DensityMatrix, psi: &CVector) -> Result<f64> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!("reference ket has norm {norm}")));
    }
    Ok(rho.overlap(psi)?.max(0.0).sqrt())
}

/// |1 − α²| / |1 + α²|.
pub fn splitting_magnitude(alpha: f64) -> f64 {
    (1.0 - alpha * alpha).abs() / (1.0 + alpha * alpha).abs()
}

/// (1 + α) / √(2(1 + α²)): overlap of the peak single-excitation state with |ψ₊⟩.
pub fn entanglement_fidelity_alpha(alpha: f64) -> f64 {
    (1.0 + alpha) / (2.0 * (1.0 + alpha * alpha)).sqrt()
}

/// |0⟩ ⊗ (|eg⟩ + |ge⟩)/√2 on a two-atom layout.
pub fn psi_plus(layout: &HilbertLayout) -> Result<CVector> {
    use AtomState::*;
    if layout.n_atoms() != 2 {
        return Err(Error::InvalidSubsystem("psi_plus needs exactly two atoms".into()));
    }
    let mut v = CVector::zeros(layout.dim());
    let s = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    v[layout.index_of(0, &[Excited, Ground])?] = s;
    v[layout.index_of(0, &[Ground, Excited])?] = s;
    Ok(v)
}

/// Splitting measured from a two-atom trajectory: the normalised difference of
/// P(0,eg) and P(0,ge) at the sample where their sum peaks.
pub fn measured_splitting(traj: &Trajectory) -> Result<f64> {
    let layout = traj.layout();
    if layout.n_atoms() != 2 {
        return Err(Error::InvalidSubsystem("splitting needs exactly two atoms".into()));
    }
    use AtomState::*;
    let eg = traj.series(&format!("P_{}", layout.label(layout.index_of(0, &[Excited, Ground])?)))?;
    let ge = traj.series(&format!("P_{}", layout.label(layout.index_of(0, &[Ground, Excited])?)))?;
    let (k, sum) = eg
        .iter()
        .zip(ge)
        .map(|(a, b)| a + b)
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::UnknownObservable("empty trajectory".into()))?;
    if sum <= 0.0 {
        return Err(Error::InvalidState("atoms are never excited".into()));
    }
    Ok((eg[k] - ge[k]).abs() / sum)
}
