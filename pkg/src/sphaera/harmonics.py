"""Spherical harmonics, Legendre functions and band-limited transforms.

Conventions
-----------
Points are given by colatitude ``theta`` in [0, pi] and longitude ``phi`` in
[0, 2 pi).  Harmonics are orthonormal on the unit sphere and carry the
Condon-Shortley phase::

    Y_lm(theta, phi) = Pbar_lm(cos theta) exp(i m phi)
    Y_{l,-m} = (-1)^m conj(Y_lm)

where ``Pbar_lm`` are the fully normalised associated Legendre functions.
``Pbar_lm`` is built by the ascending recurrence in ``l`` at fixed ``m``,
starting from the sectoral term, so no factorial ratios are ever formed.

Transforms use a Gauss-Legendre grid in ``cos theta`` times an equispaced
longitude grid; the longitude sums are FFTs and the latitude sums are
Legendre quadratures, for O(L^3) total work.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

FOUR_PI = 4.0 * np.pi
_CLAMP_TOL = 1e-12
# bytes allowed for one block of the Legendre table inside the transforms
_BLOCK_BYTES = 32 * 2**20


def eigenvalue(l):
    """Eigenvalue ``l (l + 1)`` of minus the spherical Laplacian."""
    l = np.asarray(l)
    if np.any(l < 0):
        raise ValueError("degree must be non-negative")
    out = l * (l + 1)
    return out.item() if out.ndim == 0 else out


def _clamp(z):
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) > 1.0 + _CLAMP_TOL):
        raise ValueError("Legendre argument outside [-1, 1]")
    return np.clip(z, -1.0, 1.0)


def legendre_all(L, z):
    """Legendre polynomials ``Q_0 .. Q_L`` at ``z``; shape ``(L + 1,) + z.shape``."""
    if L < 0:
        raise ValueError("degree must be non-negative")
    z = _clamp(z)
    out = np.empty((L + 1,) + z.shape)
    out[0] = 1.0
    if L >= 1:
        out[1] = z
    for l in range(1, L):
        out[l + 1] = ((2 * l + 1) * z * out[l] - l * out[l - 1]) / (l + 1)
    return out


def legendre_poly(l, z):
    """Legendre polynomial ``Q_l(z)`` by the three-term recurrence."""
    out = legendre_all(l, z)[l]
    return out.item() if out.ndim == 0 else out


@lru_cache(maxsize=32)
def _recurrence_coeffs(L):
    l = np.arange(L + 1, dtype=float)[:, None]
    m = np.arange(L + 1, dtype=float)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.sqrt((4 * l * l - 1) / (l * l - m * m))
        b = np.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
    a[~np.isfinite(a)] = 0.0
    b[~np.isfinite(b)] = 0.0
    a.flags.writeable = False
    b.flags.writeable = False
    return a, b


def normalized_legendre(L, z, sin_theta=None):
    """Fully normalised associated Legendre table ``Pbar_lm(z)``.

    Returns an array of shape ``z.shape + (L + 1, L + 1)`` indexed ``[..., l, m]``
    with zeros for ``m > l``.  Includes the Condon-Shortley phase.  Pass
    ``sin_theta`` when the angle is known: ``sqrt(1 - z^2)`` loses all
    precision near the poles.
    """
    z = _clamp(z)
    if sin_theta is None:
        s = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    else:
        s = np.abs(np.asarray(sin_theta, dtype=float))
    a, b = _recurrence_coeffs(L)
    out = np.zeros(z.shape + (L + 1, L + 1))
    out[..., 0, 0] = 1.0 / np.sqrt(FOUR_PI)
    for l in range(1, L + 1):
        out[..., l, l] = -np.sqrt((2 * l + 1) / (2 * l)) * s * out[..., l - 1, l - 1]
        out[..., l, l - 1] = np.sqrt(2 * l + 1) * z * out[..., l - 1, l - 1]
        if l >= 2:
            k = l - 1
            out[..., l, :k] = a[l, :k] * (
                z[..., None] * out[..., l - 1, :k] - b[l, :k] * out[..., l - 2, :k]
            )
    return out


@dataclass(frozen=True)
class SpherePoint:
    """A point on the unit sphere; ``phi`` is wrapped into [0, 2 pi)."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta, phi = float(self.theta), float(self.phi)
        if not (0.0 <= theta <= np.pi):
            raise ValueError(f"colatitude {theta} outside [0, pi]")
        phi = phi % (2 * np.pi)
        if phi >= 2 * np.pi:
            phi = 0.0
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_cartesian(cls, v):
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v)
        return cls(np.arccos(np.clip(v[2], -1.0, 1.0)), np.arctan2(v[1], v[0]))

    def cartesian(self):
        st = np.sin(self.theta)
        return np.array([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])

    def inner(self, other):
        """Cosine of the angular distance to ``other``."""
        return inner_product(self, other)


def inner_product(x, y):
    """``<x, y> = cos d(x, y)``, clipped to [-1, 1]."""
    return float(np.clip(np.dot(x.cartesian(), y.cartesian()), -1.0, 1.0))


def to_cartesian(theta, phi):
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def from_cartesian(v):
    """Inverse of :func:`to_cartesian`; returns ``(theta, phi)`` arrays."""
    v = np.asarray(v, dtype=float)
    theta = np.arccos(np.clip(v[..., 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(v[..., 1], v[..., 0]), 2 * np.pi)
    return theta, phi


def _point_arrays(theta, phi):
    if phi is None:
        if isinstance(theta, SpherePoint):
            return np.asarray(theta.theta), np.asarray(theta.phi)
        raise TypeError("pass a SpherePoint or theta and phi arrays")
    return np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)


def ylm_table(L, theta, phi=None):
    """``Y_lm`` for ``0 <= m <= l <= L``; shape ``theta.shape + (L + 1, L + 1)``."""
    theta, phi = _point_arrays(theta, phi)
    P = normalized_legendre(L, np.cos(theta), np.sin(theta))
    m = np.arange(L + 1)
    return P * np.exp(1j * m * phi[..., None])[..., None, :]


def sph_harm(l, m, theta, phi=None):
    """Spherical harmonic ``Y_lm`` at a :class:`SpherePoint` or at ``(theta, phi)``."""
    if l < 0 or abs(m) > l:
        raise ValueError(f"invalid degree/order ({l}, {m})")
    theta, phi = _point_arrays(theta, phi)
    am = abs(m)
    P = normalized_legendre(l, np.cos(theta), np.sin(theta))[..., l, am]
    y = P * np.exp(1j * am * phi)
    if m < 0:
        y = (-1) ** am * np.conj(y)
    return y.item() if y.ndim == 0 else y


def addition_sum(l, x, y):
    """``sum_m Y_lm(x) conj(Y_lm(y))``, which is real for every pair of points."""
    yx = ylm_table(l, x)[l, : l + 1]
    yy = ylm_table(l, y)[l, : l + 1]
    terms = yx * np.conj(yy)
    # negative orders contribute the complex conjugates of the positive ones
    total = terms[0] + 2.0 * np.sum(terms[1:].real)
    return float(np.real(total))


# ---------------------------------------------------------------------------
# coefficients, grids and maps
# ---------------------------------------------------------------------------


@dataclass
class HarmonicCoefficients:
    """Coefficients ``a_lm`` of a real field, stored for ``m >= 0`` only.

    ``values[..., l, m]`` holds ``a_lm``; entries with ``m > l`` are zero.  Leading
    dimensions, if any, index independent fields.  Negative orders are implied
    by ``a_{l,-m} = (-1)^m conj(a_lm)``.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.ndim < 2 or v.shape[-1] != v.shape[-2]:
            raise ValueError("coefficients must have trailing shape (L+1, L+1)")
        upper = np.triu(np.ones(v.shape[-2:], dtype=bool), k=1)
        if np.any(v[..., upper] != 0):
            raise ValueError("entries with m > l must be zero")
        self.values = v

    @classmethod
    def zeros(cls, L, batch=()):
        return cls(np.zeros(tuple(batch) + (L + 1, L + 1), dtype=complex))

    @classmethod
    def single_mode(cls, L, l, m, value=1.0):
        c = cls.zeros(L)
        c[l, m] = value
        return c

    @property
    def bandlimit(self):
        return self.values.shape[-1] - 1

    @property
    def batch_shape(self):
        return self.values.shape[:-2]

    def __getitem__(self, lm):
        l, m = lm
        if abs(m) > l or l > self.bandlimit:
            raise IndexError(f"({l}, {m}) outside bandlimit {self.bandlimit}")
        v = self.values[..., l, abs(m)]
        if m < 0:
            v = (-1) ** abs(m) * np.conj(v)
        return v

    def __setitem__(self, lm, value):
        l, m = lm
        if abs(m) > l or l > self.bandlimit:
            raise IndexError(f"({l}, {m}) outside bandlimit {self.bandlimit}")
        if m < 0:
            value = (-1) ** abs(m) * np.conj(value)
        self.values[..., l, abs(m)] = value

    def copy(self):
        return HarmonicCoefficients(self.values.copy())

    def reality_defect(self):
        """Largest imaginary part among the ``m = 0`` entries."""
        return float(np.max(np.abs(self.values[..., :, 0].imag), initial=0.0))

    def degree_power(self):
        """``sum_{|m|<=l} |a_lm|^2`` for each degree, shape ``batch + (L + 1,)``."""
        p = np.abs(self.values) ** 2
        return p[..., :, 0] + 2.0 * p[..., :, 1:].sum(axis=-1)

    def power(self):
        """Parseval sum over the full ``(l, m)`` range."""
        return self.degree_power().sum(axis=-1)

    def scaled(self, factors):
        """Multiply degree ``l`` by ``factors[l]``."""
        factors = np.asarray(factors)
        return HarmonicCoefficients(self.values * factors[:, None])


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre colatitudes times equispaced longitudes.

    Rows run from the north pole southwards; ``phi_k = 2 pi k / nphi``.
    """

    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    nphi: int

    @classmethod
    def gauss_legendre(cls, L, ntheta=None, nphi=None):
        ntheta = L + 1 if ntheta is None else int(ntheta)
        nphi = 2 * L + 1 if nphi is None else int(nphi)
        if L < 0 or ntheta < L + 1 or nphi < 2 * L + 1:
            raise ValueError(f"grid ({ntheta}, {nphi}) too coarse for bandlimit {L}")
        z, w = np.polynomial.legendre.leggauss(ntheta)
        order = np.argsort(-z)
        return cls(z[order], w[order], nphi)

    @property
    def ntheta(self):
        return self.nodes.size

    @property
    def bandlimit(self):
        return min(self.ntheta - 1, (self.nphi - 1) // 2)

    @property
    def theta(self):
        return np.arccos(self.nodes)

    @property
    def phi(self):
        return 2 * np.pi * np.arange(self.nphi) / self.nphi

    @property
    def shape(self):
        return (self.ntheta, self.nphi)

    def mesh(self):
        return np.meshgrid(self.theta, self.phi, indexing="ij")

    def cell_weights(self):
        """Quadrature weight of each node; sums to ``4 pi``."""
        return np.outer(self.weights, np.full(self.nphi, 2 * np.pi / self.nphi))

    def integrate(self, values):
        """Quadrature of ``values`` (trailing shape ``(ntheta, nphi)``) over the sphere."""
        return np.tensordot(values, self.cell_weights(), axes=([-2, -1], [0, 1]))


@dataclass
class FieldMap:
    grid: SphereGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"map shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("map values must be finite")
        self.values = v


def _row_blocks(n, L):
    per_row = 16 * (L + 1) ** 2
    step = max(1, _BLOCK_BYTES // per_row)
    for start in range(0, n, step):
        yield slice(start, min(n, start + step))


def analyze(fmap, L=None):
    """Coefficients of a gridded map by FFT in longitude and quadrature in latitude."""
    grid = fmap.grid
    L = grid.bandlimit if L is None else int(L)
    if L > grid.bandlimit:
        raise ValueError(f"grid resolves bandlimit {grid.bandlimit}, requested {L}")
    F = np.fft.rfft(fmap.values, axis=-1)[:, : L + 1] * (2 * np.pi / grid.nphi)
    a = np.zeros((L + 1, L + 1), dtype=complex)
    for rows in _row_blocks(grid.ntheta, L):
        P = normalized_legendre(L, grid.nodes[rows])
        a += np.einsum("j,jlm,jm->lm", grid.weights[rows], P, F[rows])
    a[np.triu_indices(L + 1, k=1)] = 0.0
    return HarmonicCoefficients(a)


def synthesize(coeffs, grid):
    """Real map ``sum_lm a_lm Y_lm`` on ``grid``."""
    L = coeffs.bandlimit
    if coeffs.batch_shape:
        raise ValueError("synthesize takes a single coefficient set")
    if grid.bandlimit < L:
        raise ValueError(f"grid resolves bandlimit {grid.bandlimit}, coefficients need {L}")
    if coeffs.reality_defect() > 1e-9:
        raise ValueError("a_l0 must be real for a real-valued field")
    a = coeffs.values.copy()
    a[:, 0] = a[:, 0].real
    G = np.zeros((grid.ntheta, grid.nphi // 2 + 1), dtype=complex)
    for rows in _row_blocks(grid.ntheta, L):
        P = normalized_legendre(L, grid.nodes[rows])
        G[rows, : L + 1] = np.einsum("jlm,lm->jm", P, a)
    values = grid.nphi * np.fft.irfft(G, n=grid.nphi, axis=-1)
    return FieldMap(grid, values)


def spectral_laplacian(coeffs):
    """Spherical Laplacian applied in coefficient space (``a_lm -> -l(l+1) a_lm``)."""
    return coeffs.scaled(-eigenvalue(np.arange(coeffs.bandlimit + 1)).astype(float))
