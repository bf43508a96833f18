//! Validated density matrices.

use crate::fockspace::{hermiticity_error, OperatorMatrix};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Allowed deviation of Tr ρ from one.
pub const TRACE_TOL: f64 = 1e-9;
/// Allowed max |ρ − ρ†|.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Most negative eigenvalue tolerated as integrator noise.
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Normalised, Hermitian, positive-semidefinite state of the full system.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState("matrix is not square".into()));
        }
        let rho = DensityMatrix(matrix);
        let trace_err = (rho.trace() - C64::ONE).norm();
        if trace_err > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace deviates from 1 by {trace_err:e}"
            )));
        }
        let herm = rho.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "max |rho - rho^dagger| = {herm:e}"
            )));
        }
        let min_eig = rho.min_eigenvalue();
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min_eig,
            });
        }
        Ok(rho)
    }

    /// Skips validation; for intermediate integrator states and reduced states
    /// whose properties follow from their construction.
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        DensityMatrix(matrix)
    }

    /// |ψ⟩⟨ψ| for a unit-norm ket.
    pub fn from_pure(ket: &CVector) -> Result<Self> {
        let norm = ket.norm();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("ket norm is {norm}, expected 1")));
        }
        Ok(DensityMatrix(ket * ket.adjoint()))
    }

    /// I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(CMatrix::identity(dim, dim) / C64::from(dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.0)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.0 + self.0.adjoint()) * C64::from(0.5);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Diagonal element ρ_ii.
    pub fn population(&self, index: usize) -> f64 {
        self.0[(index, index)].re
    }

    /// Real part of Tr(ρ O).
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<f64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: op.dim(),
            });
        }
        let m = op.matrix();
        let n = self.dim();
        let mut acc = C64::ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += self.0[(i, j)] * m[(j, i)];
            }
        }
        Ok(acc.re)
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn overlap(&self, ket: &CVector) -> Result<f64> {
        if ket.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: ket.len(),
            });
        }
        Ok(ket.dotc(&(&self.0 * ket)).re)
    }
}
