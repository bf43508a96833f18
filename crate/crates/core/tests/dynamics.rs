//! Integrator output against independent closed forms and a Liouvillian
//! matrix-exponential oracle.

use std::f64::consts::PI;

use cqed::analytic::{single_excitation_population, CouplingVector};
use cqed::dynamics::{integrate, integrate_with, linspace, rabi_frequency, IntegrationOptions, Method};
use cqed::fockspace::{basis_state, photon_state, AtomState, HilbertLayout};
use cqed::model::{build_generator, SystemParams};
use cqed::{CMatrix, CVector, DensityMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Column-stacked vec(ρ).
fn vec_of(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Superoperator with vec(AρB) = (Bᵀ ⊗ A) vec(ρ).
fn liouvillian(h: &CMatrix, ops: &[(f64, CMatrix)]) -> CMatrix {
    let d = h.nrows();
    let id = CMatrix::identity(d, d);
    let i = C64::new(0.0, 1.0);
    let mut l = (kron(&id, h) - kron(&h.transpose(), &id)) * (-i);
    for (rate, op) in ops {
        let k = op.adjoint() * op;
        let jump = kron(&op.adjoint().transpose(), op);
        let anti = kron(&id, &k) + kron(&k.transpose(), &id);
        l += (jump - anti * C64::from(0.5)) * C64::from(*rate);
    }
    l
}

#[test]
fn lossy_evolution_matches_matrix_exponential() {
    let layout = HilbertLayout::new(2, 2).unwrap();
    let params = SystemParams::resonant(vec![1.1, 0.6], 0.4, 0.15);
    let gen = build_generator(&layout, &params).unwrap();
    let ket = basis_state(&layout, 1, &[AtomState::Excited, AtomState::Ground]).unwrap();
    let rho0 = DensityMatrix::from_pure(&ket).unwrap();
    let ops: Vec<(f64, CMatrix)> = gen
        .collapse_ops()
        .iter()
        .map(|c| (c.rate, c.operator.matrix().clone()))
        .collect();
    let lv = liouvillian(gen.hamiltonian().matrix(), &ops);
    let times = linspace(0.0, 4.0, 9);
    let traj = integrate(&gen, &rho0, &times).unwrap();
    let d = layout.dim();
    for (k, &t) in times.iter().enumerate() {
        let v = (&lv * C64::from(t)).exp() * vec_of(rho0.matrix());
        let want = CMatrix::from_column_slice(d, d, v.as_slice());
        for i in 0..d {
            let name = format!("P_{}", layout.label(i));
            let got = traj.series(&name).unwrap()[k];
            assert!((got - want[(i, i)].re).abs() < 1e-8, "t={t} {name}: {got} vs {}", want[(i, i)].re);
        }
    }
    let last = traj.final_state().matrix();
    let v = (&lv * C64::from(4.0)).exp() * vec_of(rho0.matrix());
    let want = CMatrix::from_column_slice(d, d, v.as_slice());
    assert!((last - want).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-8);
}

#[test]
fn adaptive_and_fixed_step_agree() {
    let layout = HilbertLayout::new(2, 2).unwrap();
    let gen = build_generator(&layout, &SystemParams::resonant(vec![2.0, 1.4], 0.3, 0.1)).unwrap();
    let rho0 = DensityMatrix::from_pure(&photon_state(&layout, 2).unwrap()).unwrap();
    let times = linspace(0.0, 5.0, 51);
    let rk = integrate(&gen, &rho0, &times).unwrap();
    let opts = IntegrationOptions {
        method: Method::DormandPrince {
            rtol: 1e-10,
            atol: 1e-12,
            min_step: 1e-12,
        },
        ..IntegrationOptions::default()
    };
    let dp = integrate_with(&gen, &rho0, &times, &opts).unwrap();
    for (name, a) in rk.observables() {
        let b = dp.series(name).unwrap();
        let err = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-7, "{name}: {err}");
    }
}

#[test]
fn single_excitation_matches_closed_form_for_random_couplings() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=3 {
        let layout = HilbertLayout::new(1, n).unwrap();
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
        let gv = CouplingVector::new(g.clone()).unwrap();
        let gen = build_generator(&layout, &SystemParams::resonant(g, 0.0, 0.0)).unwrap();
        let rho0 = DensityMatrix::from_pure(&photon_state(&layout, 1).unwrap()).unwrap();
        let times = linspace(0.0, 3.0 * PI / gv.norm(), 601);
        let traj = integrate(&gen, &rho0, &times).unwrap();
        let vac = format!("P_{}", layout.label(layout.index_of(1, &vec![AtomState::Ground; n]).unwrap()));
        for (t, p) in times.iter().zip(traj.series(&vac).unwrap()) {
            assert!((1.0 - p - single_excitation_population(&gv, *t)).abs() < 1e-6);
        }
    }
}

#[test]
fn collective_rabi_frequency_scales_as_sqrt_n() {
    let g = 2.0 * PI * 1.5;
    let freq = |n: usize| {
        let layout = HilbertLayout::new(1, n).unwrap();
        let gen = build_generator(&layout, &SystemParams::resonant(vec![g; n], 0.0, 0.0)).unwrap();
        let rho0 = DensityMatrix::from_pure(&photon_state(&layout, 1).unwrap()).unwrap();
        let traj = integrate(&gen, &rho0, &linspace(0.0, 4.0, 4001)).unwrap();
        let name = format!("P_{}", layout.label(layout.index_of(1, &vec![AtomState::Ground; n]).unwrap()));
        rabi_frequency(&traj, &name).unwrap()
    };
    let f1 = freq(1);
    assert!((f1 / (g / PI) - 1.0).abs() < 1e-4);
    for n in 2..=4 {
        assert!((freq(n) / f1 - (n as f64).sqrt()).abs() < 1e-3, "n = {n}");
    }
}

#[test]
fn closed_system_conserves_excitations() {
    let layout = HilbertLayout::new(3, 2).unwrap();
    let gen = build_generator(&layout, &SystemParams::resonant(vec![1.0, 0.3], 0.0, 0.0)).unwrap();
    let rho0 = DensityMatrix::from_pure(&photon_state(&layout, 2).unwrap()).unwrap();
    let traj = integrate(&gen, &rho0, &linspace(0.0, 10.0, 201)).unwrap();
    assert!(traj.diagnostics().max_excitation_drift < 1e-9);
    assert!(traj.series("n_excitations").unwrap().iter().all(|n| (n - 2.0).abs() < 1e-9));
}
