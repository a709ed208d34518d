"""File formats: orbit containers, certificates, CSV writers."""

import numpy as np
import pytest

import ksorbits.flow as fl
import ksorbits.newton as nt
import ksorbits.orbitio as oi
from ksorbits.fourier import TrigPoly2D


def small_candidate():
    rng = np.random.default_rng(17)
    a = rng.standard_normal((6, 5))
    b = rng.standard_normal((6, 5))
    b[:, 0] = 0.0
    return nt.OrbitCandidate(1.0 / 29.3, 7.25, TrigPoly2D(a, b))


def test_text_orbit_roundtrip(tmp_path):
    cand = small_candidate()
    p = tmp_path / "orbit.json"
    oi.save_orbit(p, cand, header={"tol": 5e-11})
    back = oi.load_orbit(p)
    assert back.nu == cand.nu and back.f == cand.f
    np.testing.assert_array_equal(back.u.a, cand.u.a)
    np.testing.assert_array_equal(back.u.b, cand.u.b)


def test_binary_orbit_roundtrip_is_exact(tmp_path):
    cand = small_candidate()
    p = tmp_path / "orbit.bin"
    oi.save_orbit(p, cand, binary=True)
    assert p.read_bytes()[:6] == b"KSORB1"
    back = oi.load_orbit(p)
    assert back.nu == cand.nu and back.f == cand.f
    np.testing.assert_array_equal(back.u.a, cand.u.a)
    np.testing.assert_array_equal(back.u.b, cand.u.b)


def test_seed_roundtrip(tmp_path, seed_3327):
    p = tmp_path / "seed.json"
    oi.save_seed(p, seed_3327)
    back = oi.load_orbit(p)
    assert isinstance(back, fl.OrbitSeed)
    assert back.period == seed_3327.period
    assert back.recurrence == seed_3327.recurrence
    np.testing.assert_array_equal(back.samples, seed_3327.samples)


def test_bad_magic_rejected(tmp_path):
    p = tmp_path / "junk.bin"
    p.write_bytes(b"NOTANORBIT" + b"\x00" * 64)
    with pytest.raises(oi.OrbitFormatError):
        oi.load_orbit(p)


def test_truncated_binary_rejected(tmp_path):
    cand = small_candidate()
    p = tmp_path / "orbit.bin"
    oi.save_orbit(p, cand, binary=True)
    whole = p.read_bytes()
    p.write_bytes(whole[:len(whole) - 16])
    with pytest.raises(oi.OrbitFormatError):
        oi.load_orbit(p)


def test_inconsistent_declared_degrees_rejected(tmp_path):
    p = tmp_path / "orbit.json"
    p.write_text('{"kind": "orbit", "nu": 0.03, "f": 7.0, "d1": 4, "d2": 2,'
                 ' "parity": "odd", "coeffs_a": [[1.0, 0.0]],'
                 ' "coeffs_b": [[0.0, 0.0]]}')
    with pytest.raises(oi.OrbitFormatError):
        oi.load_orbit(p)


def test_certificate_roundtrip_and_diff_lines(tmp_path, cert_3327):
    p = tmp_path / "cert.txt"
    oi.write_certificate(p, cert_3327, config={"d1": 44, "d2": 24})
    d = oi.read_certificate(p)
    assert d["verdict"] == "success"
    assert float(d["E"]) == cert_3327.E
    assert float(d["alpha"]) == cert_3327.alpha
    assert d["config.d1"] == "44"
    # the reproducibility view hides wall-clock noise but keeps the bounds
    kept = oi.certificate_diff_lines(p.read_text())
    assert not any("time" in ln.split("=")[0] for ln in kept)
    assert any(ln.startswith("E ") or ln.startswith("E=") for ln in kept)


def test_newton_report_file_lists_iterations(tmp_path):
    rep = nt.NewtonReport(iterates=[(1e-2, 3e-3), (1e-5, 2e-6)],
                          converged=True, final=small_candidate())
    p = tmp_path / "newton.txt"
    oi.write_newton_report(p, rep, config={"tol": 5e-11})
    text = p.read_text()
    assert "converged = true" in text
    assert text.count("\n1 ") + text.count("\n  1 ") >= 1  # iteration rows


def test_cascade_csv_layout(tmp_path):
    pts = [fl.CascadePoint(33.2701, [0.4, 0.41], [0.4]),
           fl.CascadePoint(33.3353, [0.3, 0.5], [0.3, 0.5])]
    p = tmp_path / "cascade.csv"
    oi.write_cascade_csv(p, pts, config={"steps": 2})
    rows = [ln for ln in p.read_text().splitlines()
            if ln and not ln.startswith("#")]
    assert rows[0] == "one_over_nu,minimum_value"
    assert len(rows) == 1 + 4                 # header + one row per minimum
    assert float(rows[1].split(",")[0]) == 33.2701


def test_eigenvalue_csv_layout(tmp_path):
    p = tmp_path / "eig.csv"
    oi.write_eigenvalue_csv(p, np.array([1.0 + 2.0j, -0.5j]))
    rows = p.read_text().splitlines()
    assert rows[0] == "re,im,abs"
    assert len(rows) == 3
    re, im, mag = map(float, rows[1].split(","))
    assert (re, im) == (1.0, 2.0) and mag == pytest.approx(np.sqrt(5))


def test_heatmap_csv_layout(tmp_path):
    theta = np.array([0.0, 1.0])
    x = np.array([0.0, 2.0, 4.0])
    vals = np.arange(6.0).reshape(2, 3)       # (n_theta, n_x)
    p = tmp_path / "heat.csv"
    oi.write_heatmap_csv(p, theta, x, vals)
    rows = p.read_text().splitlines()
    assert rows[0] == "theta,x,value"
    assert len(rows) == 1 + 6
    assert rows[2].split(",")[2] == "1"       # theta-major ordering


def test_trajectory_csv_layout(tmp_path):
    t = np.array([0.0, 0.5])
    states = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    p = tmp_path / "traj.csv"
    oi.write_trajectory_csv(p, t, states, config={"N": 3})
    rows = p.read_text().splitlines()
    config_rows = [r for r in rows if r.startswith("#")]
    data = [r for r in rows if not r.startswith("#")]
    assert any("N = 3" in r for r in config_rows)
    assert data[0] == "t,a_1,a_2,a_3"
    assert len(data) == 3