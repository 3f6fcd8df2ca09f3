"""Plain-text artifacts: field maps, coefficients, spectra and walk paths.

Each file opens with one comment line ``# sphaera-<kind> key=value ...`` carrying
the parameters needed to rebuild the object and reproduce the run.  Floats are
written with 17 significant digits so a write/read cycle is lossless.
"""
from __future__ import annotations

import numpy as np

from .harmonics import FieldMap, HarmonicCoefficients, SphereGrid
from .spectra import PowerSpectrum

FMT = "%.17g"


def format_header(kind, **fields):
    parts = [f"# sphaera-{kind}"]
    for key, value in fields.items():
        text = FMT % value if isinstance(value, float) else str(value)
        if any(ch.isspace() for ch in text) or not text:
            raise ValueError(f"header value for {key!r} must be a non-empty token")
        parts.append(f"{key}={text}")
    return " ".join(parts)


def parse_header(line, kind):
    tokens = line.strip().split()
    if len(tokens) < 2 or tokens[0] != "#" or tokens[1] != f"sphaera-{kind}":
        raise ValueError(f"not a sphaera-{kind} file")
    meta = {}
    for tok in tokens[2:]:
        key, eq, value = tok.partition("=")
        if not eq:
            raise ValueError(f"malformed header token {tok!r}")
        meta[key] = value
    return meta


def _read(path, kind):
    with open(path) as fh:
        meta = parse_header(fh.readline(), kind)
        rows = [line for line in fh if line.strip() and not line.startswith("#")]
    if rows and not rows[0][0].isdigit() and rows[0][0] not in "+-.":
        rows = rows[1:]
    data = np.loadtxt(rows, delimiter=",", ndmin=2) if rows else np.empty((0, 0))
    return meta, data


def _write(path, header, columns, data):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        fh.write(",".join(columns) + "\n")
        np.savetxt(fh, data, delimiter=",", fmt=FMT)


# ---------------------------------------------------------------------------


def write_map(path, fmap, **meta):
    g = fmap.grid
    th, ph = g.mesh()
    data = np.column_stack([th.ravel(), ph.ravel(), fmap.values.ravel()])
    head = format_header("map", L=g.bandlimit, ntheta=g.ntheta, nphi=g.nphi, **meta)
    _write(path, head, ["theta", "phi", "value"], data)


def read_map(path):
    """Read a map file; returns ``(FieldMap, metadata)``."""
    meta, data = _read(path, "map")
    L, nt, nphi = (int(meta[k]) for k in ("L", "ntheta", "nphi"))
    grid = SphereGrid.gauss_legendre(L, nt, nphi)
    if data.shape != (nt * nphi, 3):
        raise ValueError(f"expected {nt * nphi} rows of theta,phi,value")
    th, ph = grid.mesh()
    if np.max(np.abs(data[:, 0] - th.ravel())) > 1e-12 or np.max(np.abs(data[:, 1] - ph.ravel())) > 1e-12:
        raise ValueError("node coordinates do not match the declared grid")
    return FieldMap(grid, data[:, 2].reshape(nt, nphi)), meta


def write_coefficients(path, c, **meta):
    """All orders ``-l..l`` of a single coefficient set, sorted by ``(l, m)``."""
    if c.batch_shape:
        raise ValueError("write one coefficient set per file")
    L = c.bandlimit
    rows = []
    for l in range(L + 1):
        for m in range(-l, l + 1):
            a = complex(c[l, m])
            rows.append((l, m, a.real, a.imag))
    head = format_header("coefficients", L=L, **meta)
    _write(path, head, ["l", "m", "re", "im"], np.array(rows))


def read_coefficients(path, tol=1e-12):
    """Read ``l,m,re,im`` rows; negative orders, if present, must mirror ``m > 0``."""
    meta, data = _read(path, "coefficients")
    if data.shape[1] != 4:
        raise ValueError("coefficient rows need 4 columns")
    l = data[:, 0].astype(int)
    m = data[:, 1].astype(int)
    if np.any(l != data[:, 0]) or np.any(m != data[:, 1]) or np.any(np.abs(m) > l):
        raise ValueError("bad (l, m) index")
    L = int(meta.get("L", l.max()))
    c = HarmonicCoefficients.zeros(L)
    vals = data[:, 2] + 1j * data[:, 3]
    pos = m >= 0
    c.values[l[pos], m[pos]] = vals[pos]
    for li, mi, v in zip(l[~pos], m[~pos], vals[~pos]):
        if abs(c[li, mi] - v) > tol * max(1.0, abs(v)):
            raise ValueError(f"a_({li},{mi}) is not the conjugate partner of a_({li},{-mi})")
    if c.reality_defect() > 1e-9:
        raise ValueError("m = 0 coefficients must be real")
    return c, meta


def write_spectrum(path, s, **meta):
    head = format_header("spectrum", L=s.bandlimit, family=s.family, **meta)
    _write(path, head, ["l", "C_l"], np.column_stack([s.degrees, s.values]))


def read_spectrum(path):
    meta, data = _read(path, "spectrum")
    if data.shape[1] != 2 or np.any(data[:, 0] != np.arange(len(data))):
        raise ValueError("spectrum rows must be l = 0, 1, 2, ... with one C_l each")
    return PowerSpectrum(data[:, 1], family=meta.get("family", "tabulated")), meta


def write_path(path, walk, **meta):
    head = format_header(
        "walk", theta0=float(walk.start.theta), phi0=float(walk.start.phi), **meta
    )
    _write(path, head, ["t", "theta", "phi"], np.column_stack([walk.times, walk.theta, walk.phi]))
