import math
import os
import subprocess

import numpy as np
import pytest

import qsel


def test_melin_diagonal_closed_form():
    for a, b in [(1.0, 1.0), (2.0, 0.5), (9.0, 4.0)]:
        mu = qsel.melin_value(np.diag([a, b]))["mu"]
        assert mu == pytest.approx(0.25 * (2 * math.sqrt(a * b) + a + b), abs=1e-12)


def test_symplectic_eigenvalue_of_harmonic_pair():
    assert qsel.symplectic_eigenvalues(np.diag([4.0, 1.0])) == pytest.approx([2.0])


def test_oracle_agrees_for_nondegenerate_form():
    m = np.diag([1.0, 2.0])
    assert qsel.fock_melin_oracle(m, 30) == pytest.approx(qsel.melin_value(m)["mu"], abs=1e-8)


def test_asymmetric_matrix_raises():
    with pytest.raises(qsel.Error) as info:
        qsel.melin_value(np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert info.value.kind == "InvalidInput"


def test_leaf_landscape_is_flat():
    mus = [mu for _, mu in qsel.family_scan("leaf", 16)]
    assert max(mus) - min(mus) <= 1e-8


def test_triangle_matches_casimir():
    assert qsel.triangle_lowest(10) == pytest.approx(-1.25, abs=1e-9)
    assert qsel.triangle_casimir_ground(10) == pytest.approx(-1.25, abs=1e-12)


def test_crossing_ground_state():
    lam, gap = qsel.model_ground("crossing", 8.0, 79)
    assert lam == pytest.approx(1.108, abs=5e-3)
    assert gap > 0


def test_cover_passes():
    r = qsel.cover_check(2, 128, 0.24, 0.3, seed=5)
    assert r["passed"]
    assert r["overlap_ratio"] <= r["overlap_bound"]


def test_run_experiment_round_trip():
    r = qsel.run_experiment({"command": "melin-quad", "params": {"n": 1, "matrix": [1, 0, 0, 1]}})
    assert r["mu"] == 1.0


@pytest.mark.skipif("QSEL_TOOL" not in os.environ, reason="tool path not provided")
def test_tool_validation_exit_code(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"command": "spectrum", "params": {"N": [-3]}}')
    out = tmp_path / "out"
    proc = subprocess.run([os.environ["QSEL_TOOL"], "spectrum", "--config", str(cfg), "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert not out.exists()
