//! Tavis–Cummings Hamiltonian and Lindblad generator.
//!
//! With ħ = 1 and rates in rad/ns the lab-frame Hamiltonian is
//!
//! ```text
//! H = ω_c a†a + (ω₀/2) Σ σᵢᶻ + Σ gᵢ (a σᵢ† + a† σᵢ)
//! ```
//!
//! and in the frame rotating at ω_c the bare cavity term drops out, leaving
//! `H' = (Δ/2) Σ σᵢᶻ + Σ gᵢ (a σᵢ† + a† σᵢ)` with Δ = ω₀ − ω_c.
//!
//! Dissipation is cavity decay `(κ, a)` and atomic decay `(γ, σᵢ)` for every atom.

use std::f64::consts::PI;

use crate::fockspace::{self, HilbertLayout, OperatorMatrix};
use crate::state::DensityMatrix;
use crate::{CMatrix, Error, Result, C64};

/// Speed of light (m/s).
const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Angular frequency in rad/ns of light with the given vacuum wavelength.
pub fn optical_angular_frequency(wavelength_nm: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / (wavelength_nm * 1e-9) * 1e-9
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Frame {
    Lab,
    #[default]
    RotatingAtCavity,
}

/// Form of the anticommutator in the dissipators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DissipatorForm {
    /// `L ρ L† − ½{L†L, ρ}`, trace preserving.
    #[default]
    Standard,
    /// `L ρ L† − ½{L L†, ρ}`, as literally printed for the cavity and atom
    /// channels. Does not preserve the trace; only for comparisons.
    Literal,
}

/// Physical parameters; all rates are angular frequencies in rad/ns.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    pub omega_c: f64,
    pub omega_0: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub couplings: Vec<f64>,
    pub frame: Frame,
}

impl SystemParams {
    /// Resonant system at 780 nm in the rotating frame.
    pub fn resonant(couplings: Vec<f64>, kappa: f64, gamma: f64) -> Self {
        let w = optical_angular_frequency(780.0);
        SystemParams {
            omega_c: w,
            omega_0: w,
            kappa,
            gamma,
            couplings,
            frame: Frame::RotatingAtCavity,
        }
    }

    /// Same parameters with both decay rates set to zero.
    pub fn lossless(&self) -> Self {
        SystemParams {
            kappa: 0.0,
            gamma: 0.0,
            ..self.clone()
        }
    }

    pub fn detuning(&self) -> f64 {
        self.omega_0 - self.omega_c
    }

    /// √(Σ gᵢ²).
    pub fn coupling_norm(&self) -> f64 {
        self.couplings.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    pub fn validate(&self, layout: &HilbertLayout) -> Result<()> {
        let finite_nonneg = |name: &'static str, v: f64| {
            if !v.is_finite() || v < 0.0 {
                Err(Error::param(name, format!("must be finite and non-negative, got {v}")))
            } else {
                Ok(())
            }
        };
        finite_nonneg("kappa", self.kappa)?;
        finite_nonneg("gamma", self.gamma)?;
        for &g in &self.couplings {
            finite_nonneg("couplings", g)?;
        }
        if !self.omega_c.is_finite() || !self.omega_0.is_finite() {
            return Err(Error::param("omega", "frequencies must be finite"));
        }
        if self.couplings.len() != layout.n_atoms() {
            return Err(Error::param(
                "couplings",
                format!(
                    "{} coupling(s) given for {} atom(s)",
                    self.couplings.len(),
                    layout.n_atoms()
                ),
            ));
        }
        Ok(())
    }
}

/// Rated collapse channel `(rate, L)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseOperator {
    pub rate: f64,
    pub operator: OperatorMatrix,
}

/// Hamiltonian plus collapse channels, with the effective non-Hermitian part cached
/// for fast right-hand-side evaluation.
#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    layout: HilbertLayout,
    hamiltonian: OperatorMatrix,
    collapse_ops: Vec<CollapseOperator>,
    form: DissipatorForm,
    h_eff: Triplets,
    jumps: Vec<Jump>,
}

/// Non-zero entries `(row, col, value)` of a matrix.
#[derive(Clone, Debug)]
struct Triplets(Vec<(usize, usize, C64)>);

impl Triplets {
    fn from_dense(m: &CMatrix) -> Self {
        let mut v = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if m[(r, c)] != C64::ZERO {
                    v.push((r, c, m[(r, c)]));
                }
            }
        }
        Triplets(v)
    }
}

/// Rated jump term r·LρL†. Operators with at most one entry per column on
/// average use the O(nnz²) kernel; denser ones fall back to matrix products.
#[derive(Clone, Debug)]
enum Jump {
    Sparse(f64, Triplets),
    Dense(C64, CMatrix, CMatrix),
}

/// Assembles the Tavis–Cummings Hamiltonian in the frame given by `params.frame`.
pub fn build_hamiltonian(layout: &HilbertLayout, params: &SystemParams) -> Result<OperatorMatrix> {
    params.validate(layout)?;
    let dim = layout.dim();
    let a = fockspace::annihilation(layout);

    // Coupling: X = Σ gᵢ a σᵢ†, H_int = X + X†.
    let mut x = CMatrix::zeros(dim, dim);
    for (i, &g) in params.couplings.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        let raise = fockspace::atom_raising(layout, i)?;
        x += (a.matrix() * raise.matrix()) * C64::from(g);
    }
    let mut h = &x + x.adjoint();

    // Bare terms are diagonal in the computational basis.
    let (photon_freq, atom_freq) = match params.frame {
        Frame::Lab => (params.omega_c, params.omega_0),
        Frame::RotatingAtCavity => (0.0, params.detuning()),
    };
    for idx in 0..dim {
        let n = layout.photons_of(idx) as f64;
        let sz: f64 = (0..layout.n_atoms())
            .map(|i| match layout.atom_of(idx, i) {
                fockspace::AtomState::Excited => 1.0,
                fockspace::AtomState::Ground => -1.0,
            })
            .sum();
        let diag = photon_freq * n + 0.5 * atom_freq * sz;
        h[(idx, idx)] = C64::from(diag + h[(idx, idx)].re);
    }
    OperatorMatrix::hermitian(h)
}

/// Builds the trace-preserving generator.
pub fn build_generator(layout: &HilbertLayout, params: &SystemParams) -> Result<LindbladGenerator> {
    build_generator_with(layout, params, DissipatorForm::Standard)
}

pub fn build_generator_with(
    layout: &HilbertLayout,
    params: &SystemParams,
    form: DissipatorForm,
) -> Result<LindbladGenerator> {
    let hamiltonian = build_hamiltonian(layout, params)?;
    let mut collapse_ops = Vec::new();
    if params.kappa > 0.0 {
        collapse_ops.push(CollapseOperator {
            rate: params.kappa,
            operator: fockspace::annihilation(layout),
        });
    }
    if params.gamma > 0.0 {
        for i in 0..layout.n_atoms() {
            collapse_ops.push(CollapseOperator {
                rate: params.gamma,
                operator: fockspace::atom_lowering(layout, i)?,
            });
        }
    }
    LindbladGenerator::new(*layout, hamiltonian, collapse_ops, form)
}

impl LindbladGenerator {
    pub fn new(
        layout: HilbertLayout,
        hamiltonian: OperatorMatrix,
        collapse_ops: Vec<CollapseOperator>,
        form: DissipatorForm,
    ) -> Result<Self> {
        let dim = layout.dim();
        if hamiltonian.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: hamiltonian.dim(),
            });
        }
        if !hamiltonian.is_hermitian() {
            return Err(Error::NotHermitian {
                max_deviation: fockspace::hermiticity_error(hamiltonian.matrix()),
            });
        }
        let mut anti = CMatrix::zeros(dim, dim);
        let mut jumps = Vec::with_capacity(collapse_ops.len());
        for c in &collapse_ops {
            if !(c.rate >= 0.0 && c.rate.is_finite()) {
                return Err(Error::param("collapse rate", format!("{}", c.rate)));
            }
            if c.operator.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.operator.dim(),
                });
            }
            let l = c.operator.matrix();
            let ld = l.adjoint();
            let prod = match form {
                DissipatorForm::Standard => &ld * l,
                DissipatorForm::Literal => l * &ld,
            };
            anti += prod * C64::from(c.rate);
            let t = Triplets::from_dense(l);
            jumps.push(if t.0.len() <= dim {
                Jump::Sparse(c.rate, t)
            } else {
                Jump::Dense(C64::from(c.rate), l.clone(), ld)
            });
        }
        // −i[H,ρ] − ½{K,ρ} = −i H_eff ρ + i ρ H_eff† with H_eff = H − (i/2) K.
        let h_eff = Triplets::from_dense(&(hamiltonian.matrix() - anti * C64::new(0.0, 0.5)));
        Ok(LindbladGenerator {
            layout,
            hamiltonian,
            collapse_ops,
            form,
            h_eff,
            jumps,
        })
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn collapse_ops(&self) -> &[CollapseOperator] {
        &self.collapse_ops
    }

    pub fn form(&self) -> DissipatorForm {
        self.form
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.form == DissipatorForm::Standard || self.collapse_ops.is_empty()
    }

    /// Half the spectral width of H: the fastest coherent angular frequency.
    pub fn coherent_frequency(&self) -> f64 {
        let ev = self.hamiltonian.matrix().symmetric_eigenvalues();
        let (lo, hi) = ev
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        0.5 * (hi - lo)
    }

    /// Largest collapse rate.
    pub fn max_rate(&self) -> f64 {
        self.collapse_ops.iter().map(|c| c.rate).fold(0.0, f64::max)
    }

    /// Writes dρ/dt into `out`, using `scratch` as workspace. No dimension checks.
    pub fn rhs_into(&self, rho: &CMatrix, out: &mut CMatrix, scratch: &mut CMatrix) {
        let i = C64::new(0.0, 1.0);
        let n = rho.nrows();
        out.fill(C64::ZERO);
        {
            let (o, p) = (out.as_mut_slice(), rho.as_slice());
            // Column-major: element (r, c) lives at c·n + r.
            for &(r, c, v) in &self.h_eff.0 {
                // −i H_eff ρ: row r gains −i·v·(row c of ρ).
                let a = -i * v;
                for j in 0..n {
                    o[j * n + r] += a * p[j * n + c];
                }
                // +i ρ H_eff†: column r gains i·conj(v)·(column c of ρ).
                let b = i * v.conj();
                let (src, dst) = (c * n, r * n);
                for k in 0..n {
                    o[dst + k] += b * p[src + k];
                }
            }
            for jump in &self.jumps {
                if let Jump::Sparse(rate, t) = jump {
                    for &(a, k, v) in &t.0 {
                        let va = v * *rate;
                        for &(b, l, w) in &t.0 {
                            o[b * n + a] += va * w.conj() * p[l * n + k];
                        }
                    }
                }
            }
        }
        for jump in &self.jumps {
            if let Jump::Dense(rate, l, ld) = jump {
                scratch.gemm(C64::ONE, l, rho, C64::ZERO);
                out.gemm(*rate, scratch, ld, C64::ONE);
            }
        }
    }

    /// dρ/dt for an arbitrary square matrix of the right size.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        let dim = self.dim();
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rho.nrows(),
            });
        }
        let mut out = CMatrix::zeros(dim, dim);
        let mut scratch = CMatrix::zeros(dim, dim);
        self.rhs_into(rho, &mut out, &mut scratch);
        Ok(out)
    }
}

/// −i[H,ρ] + Σ_k r_k (L_k ρ L_k† − ½{L_k†L_k, ρ}).
pub fn lindblad_rhs(gen: &LindbladGenerator, rho: &DensityMatrix) -> Result<CMatrix> {
    gen.apply(rho.matrix())
}
