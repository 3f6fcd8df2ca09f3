"""Rotational Brownian motion on the sphere, its subordinate version, and Monte-Carlo
estimators for the coordinates-changed field ``T(B^psi_t)``.

The Brownian transition from ``x`` is zonal: the angular displacement ``Theta``
has density ``sin(theta) sum_l (2l+1)/2 Q_l(cos theta) exp(-t l(l+1))`` and the
azimuth of the displacement is uniform.  Displacement angles are drawn by
inverting a tabulated CDF.  A random clock ``s`` is split as
``s = sum_j bit_j 2^j h + r`` with ``h = 1e-4``; each bit is a tabulated step
and the remainder ``r < h`` uses the tangent-plane Gaussian.  Steps of a zonal
kernel compose in any order, so this reproduces the law at time ``s``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .fields import evaluate_field, sample_field
from .harmonics import SpherePoint, from_cartesian, legendre_all, to_cartesian
from .rng import map_chunks, mean_and_se
from .subordinators import sample as sample_subordinator

TABLE_NODES = 4096
MAX_SERIES_DEGREE = 4096
SMALL_T = 1e-4
# beyond this operational time exp(-2 t) < 1e-34 and the position is uniform
UNIFORM_T = 40.0


def _series_degree(t):
    L = 1
    while (2 * L + 1) * np.exp(-t * L * (L + 1)) >= 1e-12:
        L += 1
        if L > MAX_SERIES_DEGREE:
            raise ValueError(f"t={t:g} too small for series; use the small-t path")
    return L


@dataclass(frozen=True)
class AngleTable:
    """Tabulated law of the Brownian displacement angle after time ``t``."""

    t: float
    degree: int
    theta: np.ndarray = field(repr=False)
    cdf: np.ndarray = field(repr=False)
    mass: float = 1.0

    def sample(self, u):
        """Inverse-CDF transform of uniforms ``u``."""
        return np.interp(u, self.cdf, self.theta)

    def density(self, theta):
        """Clipped, renormalised density of ``Theta`` on [0, pi]."""
        theta = np.asarray(theta, dtype=float)
        z = np.cos(theta)
        Q = legendre_all(self.degree, z)
        l = np.arange(self.degree + 1)
        w = (2 * l + 1) / 2 * np.exp(-self.t * l * (l + 1))
        g = np.tensordot(w, Q, axes=(0, 0))
        return np.maximum(np.sin(theta) * g, 0.0) / self.mass


def bm_angle_cdf(t, nodes=TABLE_NODES):
    """Build the inverse-CDF table for the displacement angle at time ``t``.

    The series degree is the smallest ``L`` with ``(2L+1) exp(-t L(L+1)) < 1e-12``.
    The CDF is summed in closed form,
    ``F = (1 - z)/2 + 1/2 sum_l exp(-t mu_l) (Q_{l-1}(z) - Q_{l+1}(z))``, then made
    monotone (the clip of negative ringing in the density) and renormalised.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    L = _series_degree(t)
    top = min(np.pi, 12.0 * np.sqrt(2.0 * t))
    theta = np.linspace(0.0, top, nodes)
    z = np.cos(theta)
    F = (1.0 - z) / 2
    q_prev, q_cur = np.ones_like(z), z.copy()
    for l in range(1, L + 1):
        q_next = ((2 * l + 1) * z * q_cur - l * q_prev) / (l + 1)
        F += 0.5 * np.exp(-t * l * (l + 1)) * (q_prev - q_next)
        q_prev, q_cur = q_cur, q_next
    F = np.maximum.accumulate(np.maximum(F, 0.0))
    mass = float(F[-1])
    cdf = F / mass
    cdf.flags.writeable = False
    theta.flags.writeable = False
    return AngleTable(float(t), L, theta, cdf, mass)


_cached_table = lru_cache(maxsize=64)(bm_angle_cdf)


def _tangent_angles(t, rng, size):
    r = np.sqrt(2.0 * t) * np.hypot(rng.standard_normal(size), rng.standard_normal(size))
    r = np.mod(r, 2 * np.pi)
    return np.where(r > np.pi, 2 * np.pi - r, r)


def _rotate(v, angle, rng):
    """Move unit vectors ``v`` by ``angle`` along great circles with uniform azimuth."""
    az = 2 * np.pi * rng.random(angle.shape)
    helper = np.zeros_like(v)
    near_pole = np.abs(v[:, 2]) > 0.9
    helper[near_pole, 0] = 1.0
    helper[~near_pole, 2] = 1.0
    e1 = np.cross(v, helper)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(v, e1)
    step = np.cos(az)[:, None] * e1 + np.sin(az)[:, None] * e2
    out = np.cos(angle)[:, None] * v + np.sin(angle)[:, None] * step
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def _uniform_points(rng, n):
    z = 2.0 * rng.random(n) - 1.0
    ph = 2 * np.pi * rng.random(n)
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([r * np.cos(ph), r * np.sin(ph), z], axis=1)


def _displace_fixed(v, t, rng):
    n = v.shape[0]
    if t <= 0:
        return v.copy()
    if t >= UNIFORM_T:
        return _uniform_points(rng, n)
    if t < SMALL_T:
        return _rotate(v, _tangent_angles(t, rng, n), rng)
    return _rotate(v, _cached_table(float(t)).sample(rng.random(n)), rng)


def displace(v, s, rng):
    """Run Brownian motion for operational times ``s`` from unit vectors ``v`` (n, 3)."""
    v = np.asarray(v, dtype=float)
    s = np.asarray(s, dtype=float)
    if s.ndim == 0 or np.all(s == s.flat[0]):
        return _displace_fixed(v, float(s.flat[0]), rng)
    out = v.copy()
    far = s >= UNIFORM_T
    if np.any(far):
        out[far] = _uniform_points(rng, int(far.sum()))
    live = ~far & (s > 0)
    steps = np.floor(s[live] / SMALL_T).astype(np.int64)
    rest = s[live] - steps * SMALL_T
    idx = np.flatnonzero(live)
    for j in range(int(steps.max(initial=0)).bit_length()):
        sel = idx[(steps >> j) & 1 == 1]
        if sel.size:
            table = _cached_table(SMALL_T * 2**j)
            out[sel] = _rotate(out[sel], table.sample(rng.random(sel.size)), rng)
    sel = idx[rest > 0]
    if sel.size:
        r = rest[rest > 0]
        out[sel] = _rotate(out[sel], _tangent_angles(r, rng, sel.size), rng)
    return out


def _as_vectors(x, n):
    return np.broadcast_to(x.cartesian(), (n, 3)).copy()


def sample_bm_step(x, t, rng):
    """One Brownian step of duration ``t`` from ``x``; returns a :class:`SpherePoint`."""
    if t <= 0:
        raise ValueError("t must be positive")
    v = _displace_fixed(_as_vectors(x, 1), float(t), rng)
    return SpherePoint.from_cartesian(v[0])


@dataclass
class WalkPath:
    start: SpherePoint
    times: np.ndarray
    theta: np.ndarray
    phi: np.ndarray

    @property
    def positions(self):
        return [SpherePoint(a, b) for a, b in zip(self.theta, self.phi)]


def subordinate_positions(x, psi, times, n, rng):
    """Positions of ``n`` independent subordinate paths from ``x`` at ``times``.

    ``times`` must be non-decreasing and non-negative; a zero or repeated time
    adds no displacement.  Returns unit vectors of shape ``(n, len(times), 3)``.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be non-negative and non-decreasing")
    v = _as_vectors(x, n)
    out = np.empty((n, times.size, 3))
    prev = 0.0
    for i, t in enumerate(times):
        dt = t - prev
        if dt > 0:
            v = displace(v, sample_subordinator(psi, dt, rng, size=n), rng)
        out[:, i] = v
        prev = t
    return out


def sample_subordinate_path(x, psi, times, rng):
    """One path of ``B_{D_t}`` from ``x`` observed at strictly increasing positive ``times``."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] <= 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing and positive")
    v = subordinate_positions(x, psi, times, 1, rng)[0]
    theta, phi = from_cartesian(v)
    return WalkPath(x, times, theta, phi)


# ---------------------------------------------------------------------------
# Monte-Carlo estimators
# ---------------------------------------------------------------------------


def mc_transition_moment(psi, t, degrees, N, rng, x=None, threads=1):
    """Empirical ``E Q_l(cos Theta)`` for the subordinate displacement after time ``t``.

    Returns ``(means, standard_errors)`` arrays over ``degrees``.
    """
    x = SpherePoint(0.0, 0.0) if x is None else x
    degrees = np.asarray(degrees)
    L = int(degrees.max())
    x_vec = x.cartesian()

    def chunk(n, stream):
        v = subordinate_positions(x, psi, [t], n, stream)[:, 0]
        return legendre_all(L, v @ x_vec)[degrees].T

    vals = map_chunks(chunk, N, rng, threads)
    return vals.mean(axis=0), vals.std(axis=0, ddof=1) / np.sqrt(N)


def _check_n(N):
    if N < 100:
        raise ValueError("need at least 100 replications")


def mc_cov_space(s, psi, x, y, t1, t2, N, rng, threads=1):
    """Estimate ``E[T(B_{t1} from x) T(B_{t2} from y)]`` with independent paths.

    Each replication draws a fresh field and two independent subordinate
    positions.  Returns ``(estimate, standard_error)``.
    """
    _check_n(N)
    if np.arccos(np.clip(x.inner(y), -1, 1)) <= 1e-9 and x.inner(y) > 0:
        raise ValueError("x and y coincide: use mc_cov_time")

    def chunk(n, stream):
        c = sample_field(s, stream, n)
        p = subordinate_positions(x, psi, [t1], n, stream)[:, 0]
        q = subordinate_positions(y, psi, [t2], n, stream)[:, 0]
        return evaluate_field(c, *from_cartesian(p)) * evaluate_field(c, *from_cartesian(q))

    return mean_and_se(map_chunks(chunk, N, rng, threads))


def mc_cov_time(s, psi, x, t1, t2, N, rng, threads=1):
    """Estimate ``E[T(B_{t1}) T(B_{t2})]`` along one path from ``x``; needs ``t1 <= t2``."""
    _check_n(N)
    if t2 < t1 or t1 < 0:
        raise ValueError("need 0 <= t1 <= t2")

    def chunk(n, stream):
        c = sample_field(s, stream, n)
        p = subordinate_positions(x, psi, [t1, t2], n, stream)
        f1 = evaluate_field(c, *from_cartesian(p[:, 0]))
        f2 = evaluate_field(c, *from_cartesian(p[:, 1]))
        return f1 * f2

    return mean_and_se(map_chunks(chunk, N, rng, threads))


def to_points(v):
    """Unit vectors to ``(theta, phi)`` arrays."""
    return from_cartesian(v)


def to_vectors(theta, phi):
    return to_cartesian(theta, phi)
