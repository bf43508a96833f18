//! Truncated photon ⊗ (two-level)^N Hilbert space and its elementary operators.
//!
//! Tensor ordering is fixed as photon ⊗ atom₁ ⊗ … ⊗ atom_N. The photon number
//! is the slowest-varying index; within the atomic register atom 1 is the most
//! significant bit, with `g ↦ 0` and `e ↦ 1`. So for `n_max = 1`, `N = 2`
//! the ket |1, g g⟩ sits at index 4.
//!
//! Atom indices in this API are zero-based.

use std::fmt;

use nalgebra::Matrix2;

use crate::{CMatrix, CVector, Error, Result, C64};

/// Tolerance used when verifying Hermiticity of operators.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// State of a single two-level emitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AtomState {
    Ground,
    Excited,
}

impl AtomState {
    pub fn bit(self) -> usize {
        match self {
            AtomState::Ground => 0,
            AtomState::Excited => 1,
        }
    }

    pub fn from_bit(bit: usize) -> Self {
        if bit == 0 {
            AtomState::Ground
        } else {
            AtomState::Excited
        }
    }

    pub fn symbol(self) -> char {
        match self {
            AtomState::Ground => 'g',
            AtomState::Excited => 'e',
        }
    }

    /// Parses a pattern such as `"eg"` into atom states.
    pub fn parse_pattern(pattern: &str) -> Result<Vec<AtomState>> {
        pattern
            .chars()
            .map(|c| match c {
                'g' | 'G' | '0' => Ok(AtomState::Ground),
                'e' | 'E' | '1' => Ok(AtomState::Excited),
                other => Err(Error::ExcitationOutOfRange(format!(
                    "unknown atom state symbol `{other}`"
                ))),
            })
            .collect()
    }
}

/// Bookkeeping for the composite space: photon levels 0..=n_max and N atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HilbertLayout {
    n_max: usize,
    n_atoms: usize,
}

impl HilbertLayout {
    /// Largest atom count accepted; beyond this dense storage is hopeless anyway.
    pub const MAX_ATOMS: usize = 12;

    pub fn new(n_max: usize, n_atoms: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidLayout("n_max must be at least 1".into()));
        }
        if n_atoms < 1 {
            return Err(Error::InvalidLayout("at least one atom is required".into()));
        }
        if n_atoms > Self::MAX_ATOMS {
            return Err(Error::InvalidLayout(format!(
                "{n_atoms} atoms exceeds the dense-storage limit of {}",
                Self::MAX_ATOMS
            )));
        }
        Ok(HilbertLayout { n_max, n_atoms })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn photon_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Dimension of the atomic register, 2^N.
    pub fn atom_dim(&self) -> usize {
        1 << self.n_atoms
    }

    /// Total dimension (n_max + 1) · 2^N.
    pub fn dim(&self) -> usize {
        self.photon_dim() * self.atom_dim()
    }

    /// Dimensions of the tensor factors in layout order.
    pub fn factor_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.n_atoms + 1);
        dims.push(self.photon_dim());
        dims.extend(std::iter::repeat_n(2, self.n_atoms));
        dims
    }

    fn check_atom(&self, i: usize) -> Result<()> {
        if i >= self.n_atoms {
            Err(Error::AtomIndexOutOfRange {
                index: i,
                n_atoms: self.n_atoms,
            })
        } else {
            Ok(())
        }
    }

    fn atom_shift(&self, i: usize) -> usize {
        self.n_atoms - 1 - i
    }

    /// Basis index of |n, s₁…s_N⟩.
    pub fn index_of(&self, n_photons: usize, atoms: &[AtomState]) -> Result<usize> {
        if n_photons > self.n_max {
            return Err(Error::ExcitationOutOfRange(format!(
                "{n_photons} photons exceeds n_max = {}",
                self.n_max
            )));
        }
        if atoms.len() != self.n_atoms {
            return Err(Error::ExcitationOutOfRange(format!(
                "atom pattern has length {}, layout has {} atoms",
                atoms.len(),
                self.n_atoms
            )));
        }
        let bits = atoms
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, s)| acc | (s.bit() << self.atom_shift(i)));
        Ok(n_photons * self.atom_dim() + bits)
    }

    /// Inverse of [`index_of`](Self::index_of).
    pub fn decompose(&self, index: usize) -> (usize, Vec<AtomState>) {
        let n = index / self.atom_dim();
        let bits = index % self.atom_dim();
        let atoms = (0..self.n_atoms)
            .map(|i| AtomState::from_bit((bits >> self.atom_shift(i)) & 1))
            .collect();
        (n, atoms)
    }

    /// Photon number of a basis index.
    pub fn photons_of(&self, index: usize) -> usize {
        index / self.atom_dim()
    }

    /// State of atom `i` in a basis index.
    pub fn atom_of(&self, index: usize, i: usize) -> AtomState {
        AtomState::from_bit((index >> self.atom_shift(i)) & 1)
    }

    /// Total excitation number (photons plus excited atoms) of a basis index.
    pub fn excitations_of(&self, index: usize) -> usize {
        let bits = index % self.atom_dim();
        self.photons_of(index) + bits.count_ones() as usize
    }

    /// Compact label such as `1_gg`, usable as a CSV column suffix.
    pub fn label(&self, index: usize) -> String {
        let (n, atoms) = self.decompose(index);
        let pattern: String = atoms.iter().map(|s| s.symbol()).collect();
        format!("{n}_{pattern}")
    }

    /// Embeds a photon-factor operator with identities on all atoms.
    pub fn embed_photon(&self, op: &CMatrix) -> Result<CMatrix> {
        let pd = self.photon_dim();
        if op.nrows() != pd || op.ncols() != pd {
            return Err(Error::DimensionMismatch {
                expected: pd,
                found: op.nrows(),
            });
        }
        let ad = self.atom_dim();
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for n in 0..pd {
            for m in 0..pd {
                let v = op[(n, m)];
                if v == C64::ZERO {
                    continue;
                }
                for s in 0..ad {
                    out[(n * ad + s, m * ad + s)] = v;
                }
            }
        }
        Ok(out)
    }

    /// Embeds a single-atom operator at atom `i` with identities elsewhere.
    pub fn embed_atom(&self, i: usize, op: &Matrix2<C64>) -> Result<CMatrix> {
        self.check_atom(i)?;
        let shift = self.atom_shift(i);
        let mask = 1usize << shift;
        let dim = self.dim();
        let mut out = CMatrix::zeros(dim, dim);
        for row in 0..dim {
            let base = row & !mask;
            let r_bit = (row >> shift) & 1;
            for c_bit in 0..2 {
                let v = op[(r_bit, c_bit)];
                if v != C64::ZERO {
                    out[(row, base | (c_bit << shift))] = v;
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for HilbertLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "photon(0..={}) x {} atom(s), dim {}",
            self.n_max,
            self.n_atoms,
            self.dim()
        )
    }
}

/// Dense square operator on the full space.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    matrix: CMatrix,
    hermitian: bool,
}

impl OperatorMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(OperatorMatrix {
            matrix,
            hermitian: false,
        })
    }

    /// Wraps a matrix that must be Hermitian to [`HERMITIAN_TOL`].
    pub fn hermitian(matrix: CMatrix) -> Result<Self> {
        let mut op = Self::new(matrix)?;
        let dev = hermiticity_error(&op.matrix);
        if dev >= HERMITIAN_TOL {
            return Err(Error::NotHermitian { max_deviation: dev });
        }
        op.hermitian = true;
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn apply(&self, ket: &CVector) -> Result<CVector> {
        if ket.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: ket.len(),
            });
        }
        Ok(&self.matrix * ket)
    }

    /// ⟨ψ|M|φ⟩.
    pub fn matrix_element(&self, bra: &CVector, ket: &CVector) -> C64 {
        bra.dotc(&(&self.matrix * ket))
    }
}

/// max |M − M†| over all elements.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn lowering_2x2() -> Matrix2<C64> {
    // σ|e⟩ = |g⟩ with g ↦ 0, e ↦ 1
    Matrix2::new(C64::ZERO, C64::ONE, C64::ZERO, C64::ZERO)
}

/// Photon annihilation operator a embedded on the full space.
pub fn annihilation(layout: &HilbertLayout) -> OperatorMatrix {
    let pd = layout.photon_dim();
    let mut a = CMatrix::zeros(pd, pd);
    for n in 1..pd {
        a[(n - 1, n)] = C64::from((n as f64).sqrt());
    }
    let matrix = layout
        .embed_photon(&a)
        .expect("photon operator built with layout dimension");
    OperatorMatrix {
        matrix,
        hermitian: false,
    }
}

/// Photon creation operator a†.
pub fn creation(layout: &HilbertLayout) -> OperatorMatrix {
    annihilation(layout).adjoint()
}

/// Photon number operator a†a (diagonal, exact).
pub fn photon_number(layout: &HilbertLayout) -> OperatorMatrix {
    let dim = layout.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = C64::from(layout.photons_of(i) as f64);
    }
    OperatorMatrix {
        matrix: m,
        hermitian: true,
    }
}

/// Lowering operator σᵢ of atom `i`.
pub fn atom_lowering(layout: &HilbertLayout, i: usize) -> Result<OperatorMatrix> {
    Ok(OperatorMatrix {
        matrix: layout.embed_atom(i, &lowering_2x2())?,
        hermitian: false,
    })
}

/// Raising operator σᵢ† of atom `i`.
pub fn atom_raising(layout: &HilbertLayout, i: usize) -> Result<OperatorMatrix> {
    Ok(atom_lowering(layout, i)?.adjoint())
}

/// σᶻ = |e⟩⟨e| − |g⟩⟨g| of atom `i`.
pub fn atom_sigma_z(layout: &HilbertLayout, i: usize) -> Result<OperatorMatrix> {
    let z = Matrix2::new(-C64::ONE, C64::ZERO, C64::ZERO, C64::ONE);
    Ok(OperatorMatrix {
        matrix: layout.embed_atom(i, &z)?,
        hermitian: true,
    })
}

/// Excitation number a†a + Σσᵢ†σᵢ, conserved by the Tavis–Cummings interaction.
pub fn excitation_number(layout: &HilbertLayout) -> OperatorMatrix {
    let dim = layout.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = C64::from(layout.excitations_of(i) as f64);
    }
    OperatorMatrix {
        matrix: m,
        hermitian: true,
    }
}

/// Identity on the full space.
pub fn identity(layout: &HilbertLayout) -> OperatorMatrix {
    OperatorMatrix {
        matrix: CMatrix::identity(layout.dim(), layout.dim()),
        hermitian: true,
    }
}

/// Computational basis ket |n, s₁…s_N⟩.
pub fn basis_state(layout: &HilbertLayout, n_photons: usize, atoms: &[AtomState]) -> Result<CVector> {
    let idx = layout.index_of(n_photons, atoms)?;
    let mut v = CVector::zeros(layout.dim());
    v[idx] = C64::ONE;
    Ok(v)
}

/// |n, g…g⟩.
pub fn photon_state(layout: &HilbertLayout, n_photons: usize) -> Result<CVector> {
    basis_state(layout, n_photons, &vec![AtomState::Ground; layout.n_atoms()])
}
