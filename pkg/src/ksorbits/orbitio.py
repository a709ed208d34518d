"""File formats: orbit documents, certificates, reports, CSV dumps.

Orbit files come in two interchangeable flavours that loaders sniff
automatically:

* a JSON text document with fields {nu, f, d1, d2, parity, coeffs_a,
  coeffs_b} (coefficient rows ordered by k1, columns by k2), plus a
  "kind" discriminator so flow seeds share the envelope;
* a binary variant starting with the magic bytes ``KSORB1`` followed by
  little-endian integers/doubles in a fixed layout.

Certificates and Newton/stability reports are flat ``key = value`` text
with stable field names, so regression suites can diff them line by
line (timing lines carry a ``time.`` prefix and are skipped in
comparisons).  CSV writers put resolved-configuration metadata in
``# key = value`` comment lines above the header row.
"""

from __future__ import annotations

import io
import json
import struct

import numpy as np

from . import flow as fl
from . import newton as nt
from .fourier import TrigPoly2D

__all__ = [
    "OrbitFormatError",
    "save_orbit", "load_orbit", "save_seed",
    "write_certificate", "read_certificate", "certificate_diff_lines",
    "write_newton_report", "write_stability_report",
    "write_cascade_csv", "write_trajectory_csv", "write_eigenvalue_csv",
    "write_heatmap_csv",
]

MAGIC = b"KSORB1"


class OrbitFormatError(ValueError):
    """Unrecognized magic/structure in an orbit document."""


# ---------------------------------------------------------------------------
# orbit files

def _orbit_payload(cand: nt.OrbitCandidate) -> dict:
    return {
        "kind": "orbit",
        "nu": cand.nu,
        "f": cand.f,
        "d1": cand.u.d1,
        "d2": cand.u.d2,
        "parity": cand.u.parity,
        "coeffs_a": cand.u.a.tolist(),
        "coeffs_b": cand.u.b.tolist(),
    }


def save_orbit(path, cand: nt.OrbitCandidate, binary: bool = False,
               header: dict | None = None) -> None:
    """Write an orbit document; `header` lands in a "config" block."""
    if binary:
        a = np.ascontiguousarray(cand.u.a, dtype="<f8")
        b = np.ascontiguousarray(cand.u.b, dtype="<f8")
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<BII", 0 if cand.u.parity == "odd" else 1,
                                 cand.u.d1, cand.u.d2))
            fh.write(struct.pack("<dd", cand.nu, cand.f))
            fh.write(a.tobytes())
            fh.write(b.tobytes())
        return
    doc = _orbit_payload(cand)
    if header:
        doc["config"] = {str(k): v for k, v in sorted(header.items())}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def save_seed(path, seed: fl.OrbitSeed, header: dict | None = None) -> None:
    doc = {
        "kind": "seed",
        "nu": seed.nu,
        "period": seed.period,
        "recurrence": seed.recurrence,
        "samples": np.asarray(seed.samples).tolist(),
    }
    if header:
        doc["config"] = {str(k): v for k, v in sorted(header.items())}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _load_binary(raw: bytes) -> nt.OrbitCandidate:
    head = struct.Struct("<BII")
    pfh = len(MAGIC)
    parity_flag, d1, d2 = head.unpack_from(raw, pfh)
    nu, f = struct.unpack_from("<dd", raw, pfh + head.size)
    off = pfh + head.size + 16
    count = d1 * (d2 + 1)
    need = off + 2 * count * 8
    if len(raw) != need:
        raise OrbitFormatError(
            f"binary orbit payload is {len(raw)} bytes, expected {need}")
    a = np.frombuffer(raw, "<f8", count, off).reshape(d1, d2 + 1).copy()
    b = np.frombuffer(raw, "<f8", count, off + count * 8).reshape(d1, d2 + 1).copy()
    parity = "odd" if parity_flag == 0 else "even"
    return nt.OrbitCandidate(nu, f, TrigPoly2D(a, b, parity))


def load_orbit(path):
    """Load an orbit or seed document (format sniffed from the content).

    Returns an OrbitCandidate for kind="orbit" and an OrbitSeed for
    kind="seed".  Raises OrbitFormatError on anything else.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:len(MAGIC)] == MAGIC:
        return _load_binary(raw)
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as ex:
        raise OrbitFormatError(f"not an orbit document: {ex}") from None
    kind = doc.get("kind", "orbit")
    try:
        if kind == "seed":
            return fl.OrbitSeed(
                nu=float(doc["nu"]), period=float(doc["period"]),
                samples=np.asarray(doc["samples"], dtype=float),
                recurrence=float(doc["recurrence"]))
        if kind != "orbit":
            raise OrbitFormatError(f"unknown document kind {kind!r}")
        a = np.asarray(doc["coeffs_a"], dtype=float)
        b = np.asarray(doc["coeffs_b"], dtype=float)
        u = TrigPoly2D(a, b, doc.get("parity", "odd"))
        if u.d1 != int(doc["d1"]) or u.d2 != int(doc["d2"]):
            raise OrbitFormatError("declared degrees disagree with arrays")
        return nt.OrbitCandidate(float(doc["nu"]), float(doc["f"]), u)
    except KeyError as ex:
        raise OrbitFormatError(f"orbit document missing field {ex}") from None


# ---------------------------------------------------------------------------
# flat key = value documents

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _flat_items(prefix: str, obj) -> list[tuple[str, str]]:
    if isinstance(obj, dict):
        out = []
        for k in sorted(obj):
            out.extend(_flat_items(f"{prefix}{k}." if prefix else f"{k}.",
                                   obj[k]))
        return out
    if isinstance(obj, (list, tuple)):
        return [(prefix.rstrip("."),
                 " ".join(_fmt(v) for v in obj))]
    return [(prefix.rstrip("."), _fmt(obj))]


def write_certificate(path, cert, config: dict | None = None) -> None:
    """Certificate text: every bound, constants, verdict, metadata."""
    lines = []
    if config:
        for k in sorted(config):
            lines.append(f"config.{k} = {_fmt(config[k])}")
    verdict = "success" if cert.success else "failed"
    lines.append(f"verdict = {verdict}")
    for name in ("alpha", "alpha1", "alpha2", "e0", "e1", "e2",
                 "K1", "K2", "K3", "b", "delta", "rho_minus", "E"):
        lines.append(f"{name} = {_fmt(getattr(cert, name))}")
    if cert.r_hat is not None:
        lines.append(f"r_hat = {_fmt(cert.r_hat)}")
        lines.append(f"E_rhat = {_fmt(cert.E_rhat)}")
    for key, val in _flat_items("", cert.meta):
        lines.append(f"meta.{key} = {val}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_certificate(path) -> dict:
    """Parse a certificate back into {key: float-or-string}."""
    out: dict = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or "=" not in line:
                continue
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            try:
                out[key] = float(val)
            except ValueError:
                out[key] = val
    return out


def certificate_diff_lines(text: str) -> list[str]:
    """Certificate lines relevant for reproducibility comparisons.

    Timing entries (meta.*time*) vary run to run and are dropped.
    """
    keep = []
    for line in text.splitlines():
        key = line.split("=", 1)[0].strip()
        if ".time" in key or key.endswith("time"):
            continue
        keep.append(line)
    return keep


def write_newton_report(path, report: nt.NewtonReport,
                        config: dict | None = None) -> None:
    buf = io.StringIO()
    if config:
        for k in sorted(config):
            buf.write(f"config.{k} = {_fmt(config[k])}\n")
    buf.write(f"converged = {_fmt(report.converged)}\n")
    buf.write(f"iterations = {len(report.iterates)}\n")
    buf.write(f"nu = {_fmt(report.final.nu)}\n")
    buf.write(f"f = {_fmt(report.final.f)}\n")
    buf.write(f"period = {_fmt(report.final.period)}\n")
    buf.write("iter residual step\n")
    for i, (res, step) in enumerate(report.iterates):
        buf.write(f"{i} {_fmt(float(res))} {_fmt(float(step))}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def write_stability_report(path, reports, config: dict | None = None) -> None:
    """One or more StabilityReports into a single text document."""
    if not isinstance(reports, (list, tuple)):
        reports = [reports]
    buf = io.StringIO()
    if config:
        for k in sorted(config):
            buf.write(f"config.{k} = {_fmt(config[k])}\n")
    for rep in reports:
        pre = rep.method
        buf.write(f"{pre}.unstable_dimension = {rep.unstable_dimension}\n")
        buf.write(f"{pre}.marginal = {rep.marginal}\n")
        if rep.a is not None:
            buf.write(f"{pre}.strip_base = {_fmt(float(rep.a))}\n")
        buf.write(f"{pre}.count = {len(rep.eigenvalues)}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


# ---------------------------------------------------------------------------
# CSV dumps (comment header with resolved config, then fixed column row)

def _csv_open(path, config: dict | None):
    fh = open(path, "w")
    if config:
        for k in sorted(config):
            fh.write(f"# {k} = {_fmt(config[k])}\n")
    return fh


def write_cascade_csv(path, points, config: dict | None = None) -> None:
    """Rows (one_over_nu, minimum_value), one row per cluster."""
    with _csv_open(path, config) as fh:
        fh.write("one_over_nu,minimum_value\n")
        for pt in points:
            for val in pt.minima:
                fh.write(f"{pt.one_over_nu:.17g},{val:.17g}\n")


def write_trajectory_csv(path, t, states, config: dict | None = None) -> None:
    t = np.asarray(t, dtype=float)
    states = np.asarray(states, dtype=float)
    n = states.shape[1]
    with _csv_open(path, config) as fh:
        fh.write("t," + ",".join(f"a_{k}" for k in range(1, n + 1)) + "\n")
        for ti, row in zip(t, states):
            fh.write(f"{ti:.17g}," + ",".join(f"{v:.17g}" for v in row) + "\n")


def write_eigenvalue_csv(path, eigenvalues, config: dict | None = None) -> None:
    with _csv_open(path, config) as fh:
        fh.write("re,im,abs\n")
        for ev in np.asarray(eigenvalues):
            ev = complex(ev)
            fh.write(f"{ev.real:.17g},{ev.imag:.17g},{abs(ev):.17g}\n")


def write_heatmap_csv(path, theta, x, values, config: dict | None = None) -> None:
    """Rows (theta, x, value) in row-major theta-then-x order."""
    values = np.asarray(values)
    with _csv_open(path, config) as fh:
        fh.write("theta,x,value\n")
        for i, th in enumerate(theta):
            for j, xx in enumerate(x):
                fh.write(f"{th:.17g},{xx:.17g},{values[i, j]:.17g}\n")
