//! Closed forms in the excitation-conserving sectors of the lossless
//! rotating-frame Hamiltonian.

use crate::fockspace::{AtomState, HilbertLayout};
use crate::{CVector, Error, Result, C64};

/// Per-atom couplings (rad/ns), non-negative and not all zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingVector {
    g: Vec<f64>,
    g_norm: f64,
}

impl CouplingVector {
    pub fn new(g: Vec<f64>) -> Result<Self> {
        if g.is_empty() {
            return Err(Error::param("couplings", "at least one atom is required"));
        }
        if let Some(bad) = g.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::param("couplings", format!("must be finite and non-negative, got {bad}")));
        }
        let g_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if g_norm == 0.0 {
            return Err(Error::param("couplings", "all couplings are zero"));
        }
        Ok(CouplingVector { g, g_norm })
    }

    /// (g, αg).
    pub fn pair(g: f64, alpha: f64) -> Result<Self> {
        Self::new(vec![g, alpha * g])
    }

    pub fn values(&self) -> &[f64] {
        &self.g
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    /// √(Σ gᵢ²).
    pub fn norm(&self) -> f64 {
        self.g_norm
    }
}

fn check_atoms(layout: &HilbertLayout, n: usize) -> Result<()> {
    if layout.n_atoms() != n {
        return Err(Error::param(
            "couplings",
            format!("{n} coupling(s) for a {}-atom layout", layout.n_atoms()),
        ));
    }
    Ok(())
}

fn single_flip(n_atoms: usize, i: usize) -> Vec<AtomState> {
    (0..n_atoms)
        .map(|k| if k == i { AtomState::Excited } else { AtomState::Ground })
        .collect()
}

/// `[χ₀, χ₁]` with χ₀ = |1, g…g⟩ and χ₁ ∝ Σ gᵢ σᵢ† |0, g…g⟩.
pub fn single_excitation_states(layout: &HilbertLayout, gv: &CouplingVector) -> Result<[CVector; 2]> {
    check_atoms(layout, gv.len())?;
    let n = layout.n_atoms();
    let mut chi0 = CVector::zeros(layout.dim());
    chi0[layout.index_of(1, &vec![AtomState::Ground; n])?] = C64::ONE;
    let mut chi1 = CVector::zeros(layout.dim());
    for (i, &g) in gv.values().iter().enumerate() {
        chi1[layout.index_of(0, &single_flip(n, i))?] = C64::from(g / gv.norm());
    }
    Ok([chi0, chi1])
}

/// P(χ₁)(t) = sin²(‖g‖ t) for evolution from χ₀.
pub fn single_excitation_population(gv: &CouplingVector, t: f64) -> f64 {
    (gv.norm() * t).sin().powi(2)
}

/// First time at which χ₁ is fully populated.
pub fn single_excitation_peak_time(gv: &CouplingVector) -> f64 {
    std::f64::consts::FRAC_PI_2 / gv.norm()
}

/// Equal-weight single-excitation state |0⟩ ⊗ |W_N⟩.
pub fn w_state(layout: &HilbertLayout) -> Result<CVector> {
    let gv = CouplingVector::new(vec![1.0; layout.n_atoms()])?;
    let [_, w] = single_excitation_states(layout, &gv)?;
    Ok(w)
}

/// Orthonormal basis of the two-excitation sector of two atoms:
///
/// * χ₀ = |2, gg⟩
/// * χ₁ = |1⟩ ⊗ (g₁|eg⟩ + g₂|ge⟩)/‖g‖
/// * χ₂ = |0, ee⟩
/// * χ₃ = |1⟩ ⊗ (g₂|eg⟩ − g₁|ge⟩)/‖g‖
///
/// χ₃ is dark (no matrix element to the others) exactly when g₁ = g₂.
pub fn two_photon_states(layout: &HilbertLayout, g1: f64, g2: f64) -> Result<[CVector; 4]> {
    use AtomState::*;
    let gv = CouplingVector::new(vec![g1, g2])?;
    check_atoms(layout, 2)?;
    if layout.n_max() < 2 {
        return Err(Error::ExcitationOutOfRange("two-photon states need n_max >= 2".into()));
    }
    let (c1, c2) = (g1 / gv.norm(), g2 / gv.norm());
    let dim = layout.dim();
    let mut chi = [CVector::zeros(dim), CVector::zeros(dim), CVector::zeros(dim), CVector::zeros(dim)];
    chi[0][layout.index_of(2, &[Ground, Ground])?] = C64::ONE;
    let eg = layout.index_of(1, &[Excited, Ground])?;
    let ge = layout.index_of(1, &[Ground, Excited])?;
    chi[1][eg] = C64::from(c1);
    chi[1][ge] = C64::from(c2);
    chi[2][layout.index_of(0, &[Excited, Excited])?] = C64::ONE;
    chi[3][eg] = C64::from(c2);
    chi[3][ge] = C64::from(-c1);
    Ok(chi)
}

/// Entanglement of the peak single-excitation state for couplings (g, αg).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakMetrics {
    /// |⟨ψ₊|χ₁⟩|.
    pub fidelity: f64,
    /// 2α/(1+α²).
    pub concurrence: f64,
    /// Binary entropy (bits) of α²/(1+α²).
    pub entropy_atom2: f64,
}

pub fn peak_entanglement_metrics(alpha: f64) -> PeakMetrics {
    let a2 = alpha * alpha;
    let p = a2 / (1.0 + a2);
    let h = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    PeakMetrics {
        fidelity: (1.0 + alpha) / (2.0 * (1.0 + a2)).sqrt(),
        concurrence: 2.0 * alpha / (1.0 + a2),
        entropy_atom2: h(p) + h(1.0 - p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::OperatorMatrix;
    use crate::model::{build_hamiltonian, SystemParams};
    use crate::CMatrix;

    fn gram(states: &[CVector]) -> CMatrix {
        CMatrix::from_fn(states.len(), states.len(), |i, j| states[i].dotc(&states[j]))
    }

    fn hamiltonian(layout: &HilbertLayout, g: Vec<f64>) -> OperatorMatrix {
        build_hamiltonian(layout, &SystemParams::resonant(g, 0.0, 0.0)).unwrap()
    }

    #[test]
    fn coupling_vector_validation() {
        assert!(CouplingVector::new(vec![0.0, 0.0]).is_err());
        assert!(CouplingVector::new(vec![]).is_err());
        assert!(CouplingVector::new(vec![1.0, -1.0]).is_err());
        let gv = CouplingVector::new(vec![3.0, 0.0, 4.0]).unwrap();
        assert_eq!(gv.norm(), 5.0);
    }

    #[test]
    fn single_atom_chi1_is_excited_vacuum() {
        let l = HilbertLayout::new(1, 1).unwrap();
        let [chi0, chi1] = single_excitation_states(&l, &CouplingVector::new(vec![2.0]).unwrap()).unwrap();
        assert_eq!(chi0[2], C64::ONE);
        assert_eq!(chi1[1], C64::ONE);
        assert!((chi1.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equal_couplings_give_w_state() {
        let l = HilbertLayout::new(1, 3).unwrap();
        let [chi0, chi1] = single_excitation_states(&l, &CouplingVector::new(vec![0.7; 3]).unwrap()).unwrap();
        let w = w_state(&l).unwrap();
        assert!((chi1.dotc(&w).norm() - 1.0).abs() < 1e-12);
        assert!(chi0.dotc(&chi1).norm() < 1e-15);
    }

    #[test]
    fn chi1_is_an_eigenvector_of_h_squared() {
        // H χ₀ = ‖g‖ χ₁ and H χ₁ = ‖g‖ χ₀ inside the single-excitation sector.
        let l = HilbertLayout::new(2, 3).unwrap();
        let gv = CouplingVector::new(vec![1.0, 0.3, 2.2]).unwrap();
        let h = hamiltonian(&l, gv.values().to_vec());
        let [chi0, chi1] = single_excitation_states(&l, &gv).unwrap();
        let hc0 = h.apply(&chi0).unwrap();
        let hc1 = h.apply(&chi1).unwrap();
        assert!((hc0 - &chi1 * C64::from(gv.norm())).norm() < 1e-12);
        assert!((hc1 - &chi0 * C64::from(gv.norm())).norm() < 1e-12);
    }

    #[test]
    fn population_closed_form() {
        let gv = CouplingVector::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(single_excitation_population(&gv, 0.0), 0.0);
        let tp = single_excitation_peak_time(&gv);
        assert!((single_excitation_population(&gv, tp) - 1.0).abs() < 1e-15);
        let one = CouplingVector::new(vec![1.0]).unwrap();
        assert!((single_excitation_peak_time(&one) / tp - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn two_photon_basis_is_orthonormal() {
        let l = HilbertLayout::new(2, 2).unwrap();
        for alpha in [1.0, 0.7, 0.0, 3.0] {
            let chi = two_photon_states(&l, 1.3, alpha * 1.3).unwrap();
            let err = (gram(&chi) - CMatrix::identity(4, 4)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12);
        }
        assert!(two_photon_states(&HilbertLayout::new(1, 2).unwrap(), 1.0, 1.0).is_err());
        assert!(two_photon_states(&l, 0.0, 0.0).is_err());
    }

    #[test]
    fn dark_state_decouples_only_for_equal_couplings() {
        let l = HilbertLayout::new(3, 2).unwrap();
        let g = 2.0;
        for (alpha, dark) in [(1.0, true), (0.7, false)] {
            let h = hamiltonian(&l, vec![g, alpha * g]);
            let chi = two_photon_states(&l, g, alpha * g).unwrap();
            let leak: f64 = (0..3).map(|k| h.matrix_element(&chi[3], &chi[k]).norm()).sum();
            if dark {
                assert!(leak < 1e-12);
            } else {
                // ⟨χ₃|H|χ₂⟩ = (g₂² − g₁²)/‖g‖
                let expected = (alpha * alpha - 1.0).abs() * g * g / (g * (1.0 + alpha * alpha).sqrt());
                assert!((leak - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn peak_metrics_values() {
        let m = peak_entanglement_metrics(1.0);
        assert!((m.fidelity - 1.0).abs() < 1e-15);
        assert!((m.concurrence - 1.0).abs() < 1e-15);
        assert!((m.entropy_atom2 - 1.0).abs() < 1e-15);
        let m = peak_entanglement_metrics(0.7);
        assert!((m.fidelity - 0.984_784).abs() < 1e-6);
        assert!((m.concurrence - 0.939_597).abs() < 1e-6);
        assert!((m.entropy_atom2 - 0.913_756).abs() < 1e-6);
        assert!((peak_entanglement_metrics(0.95).concurrence - 0.998_686).abs() < 1e-6);
        assert!((peak_entanglement_metrics(0.8).concurrence - 0.975_610).abs() < 1e-6);
        for alpha in [0.2, 0.7, 1.3, 4.0] {
            let a = peak_entanglement_metrics(alpha);
            let b = peak_entanglement_metrics(1.0 / alpha);
            assert!((a.fidelity - b.fidelity).abs() < 1e-14);
            assert!((a.concurrence - b.concurrence).abs() < 1e-14);
        }
    }
}
