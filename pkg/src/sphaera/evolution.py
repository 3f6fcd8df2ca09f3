"""Subordinate heat semigroups in coefficient space and their analytic covariances.

Every operator here is diagonal in the harmonic basis: the semigroup multiplies
degree ``l`` by ``exp(-t psi(mu_l))`` and its generator by ``-psi(mu_l)``, with
``mu_l = l (l + 1)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .harmonics import FOUR_PI, eigenvalue, legendre_all, ylm_table
from .spectra import PowerSpectrum, semigroup_multiplier
from .subordinators import LaplaceExponent, psi as _psi, psi_prime


class TruncationWarning(UserWarning):
    """A truncated series whose last retained term is not negligible."""

    def __init__(self, message, last_term):
        super().__init__(message)
        self.last_term = last_term


def _mu(L):
    return eigenvalue(np.arange(L + 1)).astype(float)


def apply_semigroup(c, psi, t):
    """``a_lm -> a_lm exp(-t psi(mu_l))``: the mean field ``eta_t`` from ``T``."""
    return c.scaled(semigroup_multiplier(psi, c.bandlimit, t))


def apply_generator(c, psi):
    """``a_lm -> -psi(mu_l) a_lm``; for ``psi(mu) = mu^alpha`` this is ``-(-Laplacian)^alpha``."""
    return c.scaled(-np.asarray(_psi(psi, _mu(c.bandlimit))))


def bochner_check(alpha, mu):
    """Evaluate ``alpha / Gamma(1 - alpha) int_0^inf (e^{-s mu} - 1) s^{-alpha-1} ds``.

    The result should equal ``-mu^alpha``.  The integral is split at ``s = 1``;
    the head uses ``s = u^(1/(1-alpha))`` and the tail ``s = v^(-1/alpha)`` so both
    pieces have bounded integrands on [0, 1].
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if mu <= 0:
        raise ValueError("mu must be positive")
    p = 1.0 / (1.0 - alpha)

    def head(u):
        if u == 0:
            return -mu * p
        s = u**p
        return math.expm1(-mu * s) / s * p

    def tail(v):
        if v == 0:
            return -1.0 / alpha
        return math.expm1(-mu * v ** (-1.0 / alpha)) / alpha

    brk = [q for q in (mu ** -(1 - alpha), (10 / mu) ** (1 - alpha)) if 0 < q < 1]
    h, herr = integrate.quad(head, 0.0, 1.0, points=brk or None, limit=200, epsabs=0, epsrel=1e-12)
    brk = [q for q in (mu**alpha, (mu / 10) ** alpha) if 0 < q < 1]
    g, gerr = integrate.quad(tail, 0.0, 1.0, points=brk or None, limit=200, epsabs=0, epsrel=1e-12)
    scale = alpha / special.gamma(1 - alpha)
    value, err = scale * (h + g), scale * (herr + gerr)
    if err > 1e-9 * abs(value):
        raise RuntimeError(f"Bochner quadrature did not converge (error estimate {err:.3g})")
    return value


def jump_kernel(psi, cos_angle, L_trunc, l_min=0):
    """Truncated zonal series ``sum_{l=l_min}^{L_trunc} (2l+1)/(4 pi) Q_l(cos) psi'(mu_l)``.

    ``l_min`` must be at least 1 for kinds whose ``psi'`` blows up at 0.  A
    :class:`TruncationWarning` is issued when the last retained term is not
    below 1e-8.
    """
    if not 0 <= l_min <= L_trunc:
        raise ValueError("need 0 <= l_min <= L_trunc")
    degrees = np.arange(l_min, L_trunc + 1)
    mu = eigenvalue(degrees).astype(float)
    try:
        dpsi = np.asarray(psi_prime(psi, mu))
    except ValueError:
        raise ValueError("psi'(0) singular: use l_min >= 1 for this kind") from None
    weights = (2 * degrees + 1) / FOUR_PI * dpsi
    if abs(weights[-1]) >= 1e-8:
        warnings.warn(
            TruncationWarning(
                f"jump kernel truncated at l={L_trunc} with last term {weights[-1]:.3g}",
                float(weights[-1]),
            ),
            stacklevel=2,
        )
    Q = legendre_all(L_trunc, cos_angle)[l_min:]
    out = np.tensordot(weights, Q, axes=(0, 0))
    return out.item() if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# covariance oracles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CovarianceQuery:
    spectrum: PowerSpectrum
    psi: LaplaceExponent
    t1: float = 0.0
    t2: float = 0.0
    cos_angle: float = 1.0

    def __post_init__(self):
        if self.t1 < 0 or self.t2 < 0:
            raise ValueError("times must be non-negative")
        if abs(self.cos_angle) > 1 + 1e-12:
            raise ValueError("cos_angle must lie in [-1, 1]")
        object.__setattr__(self, "cos_angle", float(np.clip(self.cos_angle, -1.0, 1.0)))


def cov_space_time_terms(q):
    """Per-degree terms ``(2l+1)/(4 pi) C_l Q_l(cos) exp(-(t1 + t2) psi(mu_l))``."""
    s = q.spectrum
    L = s.bandlimit
    Q = legendre_all(L, q.cos_angle)
    return s.variance_terms() * Q * semigroup_multiplier(q.psi, L, q.t1 + q.t2)


def cov_space_time(q):
    """Space-time covariance of the coordinates-changed field at distinct points.

    The sum runs over the spectrum's degrees ``0..L``, which is the exact
    covariance of the band-limited field; :func:`covariance_tail_bound` bounds
    what the omitted degrees of a parametric model would add.
    """
    return float(np.sum(cov_space_time_terms(q)))


def cov_time(q):
    """Covariance at a common point between times ``t1 <= t2``; depends on ``t2 - t1`` only."""
    if q.t2 < q.t1:
        raise ValueError("cov_time needs t1 <= t2")
    s = q.spectrum
    return float(np.sum(s.variance_terms() * semigroup_multiplier(q.psi, s.bandlimit, q.t2 - q.t1)))


def covariance_tail_bound(spectrum, psi, t):
    """Bound on the degrees above ``L`` in a covariance series with total time ``t``."""
    return spectrum.tail * float(semigroup_multiplier(psi, spectrum.bandlimit + 1, t)[-1])


def mean_field_variance(s, psi, t):
    """Variance of the mean field, ``sum_l (2l+1)/(4 pi) C_l exp(-2 t psi(mu_l))``."""
    return float(np.sum(s.variance_terms() * semigroup_multiplier(psi, s.bandlimit, 2 * t)))


def eta_covariance_terms(s, psi, t1, t2, x, y):
    """Per-degree covariance of ``eta_{t1}(x)`` and ``eta_{t2}(y)`` summed over orders.

    Independent route to :func:`cov_space_time_terms`: each time carries its
    own multiplier and the order sum is done explicitly on the harmonics.
    """
    L = s.bandlimit
    Yx, Yy = ylm_table(L, x), ylm_table(L, y)
    prod = Yx * np.conj(Yy)
    w = np.full(L + 1, 2.0)
    w[0] = 1.0
    order_sum = np.sum(prod.real * w, axis=-1)
    m1 = semigroup_multiplier(psi, L, t1)
    m2 = semigroup_multiplier(psi, L, t2)
    return s.values * m1 * m2 * order_sum


# ---------------------------------------------------------------------------
# PDE residuals
# ---------------------------------------------------------------------------


def _check_dt(psi_max, dt):
    if dt <= 0:
        raise ValueError("dt must be positive")
    if dt * psi_max**2 > 0.1:
        raise ValueError(f"dt={dt:g} too large: dt * max psi^2 = {dt * psi_max**2:.3g} > 0.1")


def pde_residual(c, psi, t, dt):
    """Central-difference residual of ``(d/dt - generator) eta_t = 0`` in coefficient space.

    Returns ``max |(a(t+dt) - a(t-dt)) / (2 dt) + psi(mu_l) a(t)|`` over all
    ``(l, m)``, divided by ``max |a(t)|``.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    p = np.asarray(_psi(psi, _mu(c.bandlimit)))
    _check_dt(float(p.max()), dt)
    a = c.values
    a_t = a * np.exp(-t * p)[:, None]
    a_plus = a * np.exp(-(t + dt) * p)[:, None]
    a_minus = a * np.exp(-(t - dt) * p)[:, None]
    resid = (a_plus - a_minus) / (2 * dt) + p[:, None] * a_t
    scale = np.max(np.abs(a_t))
    return float(np.max(np.abs(resid)) / scale) if scale > 0 else 0.0


def cov_pde_residual(s, alpha, t, dt, cos_angle):
    """Residual of ``(d/dt + (-Laplacian)^alpha) gamma_t = 0`` for the zonal covariance.

    ``gamma_t(x, .)`` has degree-``l`` coefficients ``(2l+1)/(4 pi) C_l exp(-t mu_l^alpha)``.
    The residual is the largest per-degree central-difference defect, relative to
    the largest coefficient; the initial condition ``gamma_0 = E[T(x) T(y)]`` at
    ``cos_angle`` is folded in as a relative mismatch.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    psi = LaplaceExponent.stable(alpha)
    p = _mu(s.bandlimit) ** alpha
    _check_dt(float(p.max()), dt)
    g0 = s.variance_terms()
    g_t = g0 * np.exp(-t * p)
    deriv = (g0 * np.exp(-(t + dt) * p) - g0 * np.exp(-(t - dt) * p)) / (2 * dt)
    scale = np.max(np.abs(g_t))
    resid = float(np.max(np.abs(deriv + p * g_t)) / scale) if scale > 0 else 0.0

    gamma0 = float(np.sum(g0 * legendre_all(s.bandlimit, cos_angle)))
    static = cov_space_time(CovarianceQuery(s, psi, 0.0, 0.0, cos_angle))
    ic = abs(gamma0 - static) / max(abs(static), 1e-300)
    return max(resid, ic)
