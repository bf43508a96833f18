"""Smoke test for the cqed Python bindings.

Build and install first:
    pip install --no-build-isolation ./crates/py
then run:
    python python/smoke_test.py
"""

import math
import tempfile
from pathlib import Path

import cqed


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def layout_and_states():
    lay = cqed.HilbertLayout(1, 2)
    assert lay.dim == 8 and lay.n_atoms == 2 and lay.n_max == 1
    idx = lay.index_of(0, "eg")
    assert lay.label(idx) == "0_eg"
    rho = lay.basis_density(1, "gg")
    close(sum(rho[i][i].real for i in range(lay.dim)), 1.0, 1e-15)
    h = lay.hamiltonian([1.0, 0.5])
    assert all(abs(h[i][j] - h[j][i].conjugate()) < 1e-15 for i in range(8) for j in range(8))


def single_atom_rabi():
    g_ghz = 9.0
    traj = cqed.simulate([g_ghz], t_end_ns=0.2, samples=2001)
    for t, p in zip(traj.times, traj.series("P_0_e")):
        close(p, math.sin(2 * math.pi * g_ghz * t) ** 2, 1e-6)
    close(traj.rabi_frequency_ghz("P_0_e"), 2 * g_ghz, 1e-3 * 2 * g_ghz)
    d = traj.diagnostics()
    assert d["max_trace_error"] < 1e-9 and d["max_excitation_drift"] < 1e-8
    assert len(traj) == 2001 and "S_A" in traj.columns()


def lossy_envelope():
    kappa, gamma = 29.565, 6.0666
    traj = cqed.simulate([9.0], t_end_ns=40.0, samples=40001, kappa_mhz=kappa, gamma_mhz=gamma)
    expected = 2.0 / (2 * math.pi * (kappa + gamma) * 1e-3)
    tau = traj.envelope_tau_ns("P_0_e")
    assert abs(tau / expected - 1) < 0.05, (tau, expected)


def entanglement_helpers():
    s = 1 / math.sqrt(2)
    psi = [0, s, s, 0]
    bell = [[complex(a * b) for b in psi] for a in psi]
    close(cqed.concurrence(bell), 1.0, 1e-12)
    close(cqed.von_neumann_entropy(bell), 0.0, 1e-12)

    lay = cqed.HilbertLayout(1, 2)
    traj = cqed.simulate([9.0, 6.3], t_end_ns=0.05, samples=501)
    pair = cqed.partial_trace(traj.final_state(), lay, ["B", "C"])
    assert len(pair) == 4
    m = cqed.peak_entanglement_metrics(0.7)
    close(max(traj.series("C_BC")), m["concurrence"], 5e-3)
    close(cqed.splitting_magnitude(0.7), 0.51 / 1.49, 1e-12)
    close(cqed.single_excitation_population([1.0], math.pi / 2), 1.0, 1e-15)


def coupling_helpers():
    _, nu = cqed.kappa_from_q(1.3e7)
    close(nu / 1e6, 29.565, 1e-3)
    spec = cqed.design_spec("D1")
    assert spec["q_factor"] == 1.3e7 and spec["design"] == "D1"
    g1 = cqed.coupling_strength(3.584e-29, 2.4e15, 1.0, 1e-19)
    g4 = cqed.coupling_strength(3.584e-29, 2.4e15, 1.0, 4e-19)
    close(g1 / g4, 2.0, 1e-12)


def experiment_config():
    names = [n for n, _ in cqed.scenarios()]
    assert "fig5_position_map" in names
    text = 'scenario = "fig3_two_atom"\n[time]\nt_end_ns = 0.02\ndt_ns = 1e-4\n'
    cfg = cqed.ExperimentConfig.parse(text)
    assert cfg.scenario == "fig3_two_atom" and cfg.n_points == 4
    assert cqed.ExperimentConfig.parse(cfg.to_toml()).to_toml() == cfg.to_toml()
    try:
        cqed.ExperimentConfig.parse('scenario = "custom"\n[params]\nkappa_mhz = -1\n')
    except ValueError as e:
        assert "kappa_mhz" in str(e)
    else:
        raise AssertionError("negative kappa accepted")

    out = cfg.run(workers=1)
    close(out.value("run_0000", "splitting"), 0.51 / 1.49, 1e-3)
    table = out.trajectory(out.trajectory_names()[0])
    assert len(table["t"]) == len(table["C_BC"])
    with tempfile.TemporaryDirectory() as d:
        files = cfg.run_to_dir(d)
        assert (Path(d) / "manifest.toml").exists() and len(files) >= 3
    assert out.summary_csv().startswith("# cqed summary v1")
    assert cqed.ExperimentConfig.parse(cqed.preset("custom")).scenario == "custom"


def main():
    for check in [
        layout_and_states,
        single_atom_rabi,
        lossy_envelope,
        entanglement_helpers,
        coupling_helpers,
        experiment_config,
    ]:
        check()
        print(f"ok  {check.__name__}")
    print("smoke test passed")


if __name__ == "__main__":
    main()
