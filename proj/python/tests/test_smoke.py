import math

import numpy as np
import pytest

import evstab

QUICK = "\n".join([
    "refine = false",
    "kernel_nodes = 32",
    "basis_n_E = 3",
    "basis_n_L = 3",
    "single_well_n_L = 12",
    "single_well_samples = 256",
    "period_n_E = 6",
    "period_n_L = 6",
])


def test_eos_values():
    assert evstab.phi("polytrope", 1, 0, 0, 0.9, 0.45, 3) == pytest.approx(0.5, rel=1e-15)
    assert evstab.phi_prime("polytrope", 1, 0, 0, 0.9, 0.45, 3) == pytest.approx(-1 / 0.9, rel=1e-15)
    assert evstab.phi("king", 0, 0, 0, 0.9, 0.72, 1) == pytest.approx(math.expm1(0.2), rel=1e-14)
    G, H = evstab.profile_GH("polytrope", 1, 0, 0, 1.0, 0.1)
    assert G == pytest.approx(0.017001614883970741, rel=1e-8)
    assert H == pytest.approx(0.00048262369421263186, rel=1e-8)


def test_critical_radii():
    s, r = evstab.critical_radii(1, 15)
    assert s == pytest.approx(4.145898033750315, rel=1e-14)
    assert r == pytest.approx(10.854101966249685, rel=1e-14)
    with pytest.raises(ValueError):
        evstab.critical_radii(1, 10)


def test_config_errors():
    with pytest.raises(evstab.ConfigError) as e:
        evstab.parse_config("mode = shell\nfoo = 1\nL0 = 10\n")
    assert "unknown key" in str(e.value)


def test_build_and_round_trip(tmp_path):
    cfg = evstab.parse_config("mode = singfree\ny0 = 0.1\n")
    ss = evstab.build_state(cfg)
    assert ss.mode == "singfree"
    assert ss.E0 == pytest.approx(0.965314635326, rel=1e-8)
    t = ss.table()
    assert set(t) == {"r", "y", "mu0", "lambda0", "rho0", "p0", "q0", "m"}
    assert np.all(np.diff(t["r"]) > 0)
    path = tmp_path / "state.evs"
    ss.save(str(path))
    back = evstab.SteadyState.load(str(path))
    assert back.to_string() == ss.to_string()
    bad = ss.to_string().replace("ev-stab-steady-state", "other")
    with pytest.raises(evstab.StateFormatError):
        evstab.SteadyState.from_string(bad)


def test_orbits_and_single_well():
    ss = evstab.build_state(evstab.parse_config("mode = singfree\n"))
    rep = evstab.check_single_well(ss, 12, 256)
    assert rep["pass"]
    orbits = evstab.sample_orbits(ss, 10)
    assert len(orbits) == 10
    for E, L, rm, rp, T in orbits:
        assert rm < rp and T > 0
        assert evstab.period(ss, E, L) == pytest.approx(T, rel=1e-12)


def test_classify_spectrum():
    assert evstab.classify_spectrum([0.5, 0.1])["verdict"] == "linearly_stable"
    assert evstab.classify_spectrum([1.0])["verdict"] == "zero_frequency_mode"
    rep = evstab.classify_spectrum([2.0, 1.5, 0.2])
    assert rep["verdict"] == "unstable"
    assert rep["n_modes_above_one"] == 2


def test_shell_pipeline():
    rep = evstab.run_pipeline("mode = shell\n" + QUICK)
    assert rep["exit_code"] == 0
    assert rep["verdict"] == "linearly_stable"
    assert 0 < rep["lambda_1"] < 0.05
    assert [s["name"] for s in rep["stages"]][0] == "build"


def test_vacuum_shell_is_gated():
    rep = evstab.run_pipeline("mode = shell\ndelta = 0\n" + QUICK)
    assert rep["exit_code"] == 2
    assert "no matter support" in rep["outcome"] or any(
        "no matter support" in s["message"] for s in rep["stages"])


def test_kernel_matrix():
    cfg = evstab.parse_config("mode = shell\n" + QUICK)
    k = evstab.kernel(evstab.build_state(cfg), cfg)
    K = np.asarray(k["K"])
    assert K.shape == (32, 32)
    assert np.max(np.abs(K - K.T)) <= 1e-8 * np.max(np.abs(K))
    assert k["hs_norm"] > 0
