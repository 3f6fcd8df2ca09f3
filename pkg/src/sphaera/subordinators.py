"""Laplace exponents of subordinators, their Levy measures and exact samplers.

A subordinator ``D_t`` is described by its Laplace exponent ``psi``::

    E exp(-mu D_t) = exp(-t psi(mu)),   psi(mu) = b mu + int_0^inf (1 - e^{-mu y}) M(dy)

Supported kinds and their exponents:

==============  ===================================  ===========================
kind            psi(mu)                              Levy density M(y)
==============  ===================================  ===========================
stable          mu^alpha                             alpha y^(-alpha-1) / G(1-alpha)
stable-drift    b mu + mu^alpha                      as stable
gamma           log(1 + mu)                          y^-1 exp(-y)
geostable       log(1 + mu^alpha)                    alpha y^-1 E_alpha(-y^alpha)
sum             c mu^alpha + d log(1 + mu^beta)      (not tabulated)
drift           b mu                                 none (D_t = b t)
==============  ===================================  ===========================
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

KINDS = ("stable", "stable-drift", "gamma", "geostable", "sum", "drift")

_PARAMS = {
    "stable": ("alpha",),
    "stable-drift": ("b", "alpha"),
    "gamma": (),
    "geostable": ("alpha",),
    "sum": ("c", "alpha", "d", "beta"),
    "drift": ("b",),
}


@dataclass(frozen=True)
class LaplaceExponent:
    """Tagged Laplace exponent; build it with the classmethods or :func:`parse_psi`."""

    kind: str
    alpha: float = 0.0
    beta: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown subordinator kind {self.kind!r}")
        for name in ("b", "c", "d"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.kind in ("stable", "stable-drift", "sum") and not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.kind == "sum" and not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        # alpha = 1 is the gamma subordinator, allowed for the geometric family
        if self.kind == "geostable" and not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")

    @classmethod
    def stable(cls, alpha):
        return cls("stable", alpha=alpha)

    @classmethod
    def stable_drift(cls, b, alpha):
        return cls("stable-drift", alpha=alpha, b=b)

    @classmethod
    def gamma(cls):
        return cls("gamma")

    @classmethod
    def geostable(cls, alpha):
        return cls("geostable", alpha=alpha)

    @classmethod
    def sum(cls, c, alpha, d, beta):
        return cls("sum", alpha=alpha, beta=beta, c=c, d=d)

    @classmethod
    def drift(cls, b=1.0):
        """Deterministic clock ``D_t = b t``; ``b = 1`` is the elementary subordinator."""
        return cls("drift", b=b)

    @property
    def spec(self):
        params = ",".join(f"{k}={getattr(self, k):g}" for k in _PARAMS[self.kind])
        return f"{self.kind}:{params}" if params else self.kind

    @property
    def has_drift(self):
        return self.b > 0

    def __call__(self, mu):
        return psi(self, mu)


def parse_psi(text):
    """Parse strings like ``stable:alpha=0.5`` or ``sum:c=1,alpha=0.5,d=2,beta=0.3``."""
    kind, _, rest = text.strip().partition(":")
    kind = kind.strip().lower()
    if kind == "elementary":
        kind, rest = "drift", rest or "b=1"
    if kind not in _PARAMS:
        raise ValueError(f"unknown subordinator kind {kind!r}")
    values = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        key = key.strip()
        if not eq or key not in _PARAMS[kind]:
            raise ValueError(f"bad parameter {item!r} for {kind}")
        if key in values:
            raise ValueError(f"duplicate parameter {key!r}")
        try:
            values[key] = float(val)
        except ValueError:
            raise ValueError(f"parameter {key!r} is not a number: {val!r}") from None
    missing = set(_PARAMS[kind]) - set(values)
    if missing:
        raise ValueError(f"{kind} needs parameters {sorted(missing)}")
    return LaplaceExponent(kind, **values)


def _scalar_or_array(x):
    return x.item() if np.ndim(x) == 0 else x


def psi(exp, mu):
    """Closed-form Laplace exponent; vectorised in ``mu >= 0``."""
    mu = np.asarray(mu, dtype=float)
    if np.any(mu < 0):
        raise ValueError("psi is defined for mu >= 0")
    k = exp.kind
    if k == "stable":
        out = mu**exp.alpha
    elif k == "stable-drift":
        out = exp.b * mu + mu**exp.alpha
    elif k == "gamma":
        out = np.log1p(mu)
    elif k == "geostable":
        out = np.log1p(mu**exp.alpha)
    elif k == "sum":
        out = exp.c * mu**exp.alpha + exp.d * np.log1p(mu**exp.beta)
    else:
        out = exp.b * mu
    return _scalar_or_array(out)


def psi_prime(exp, mu):
    """Derivative of ``psi``; raises where it is infinite (``mu = 0`` for stable-type parts)."""
    mu = np.asarray(mu, dtype=float)
    if np.any(mu < 0):
        raise ValueError("psi' is defined for mu >= 0")
    k, a = exp.kind, exp.alpha
    singular = (
        k in ("stable", "stable-drift")
        or (k == "geostable" and a < 1)
        or (k == "sum" and (exp.c > 0 or exp.d > 0))
    )
    if singular and np.any(mu == 0):
        raise ValueError("derivative singular at 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        if k == "stable":
            out = a * mu ** (a - 1)
        elif k == "stable-drift":
            out = exp.b + a * mu ** (a - 1)
        elif k == "gamma":
            out = 1.0 / (1.0 + mu)
        elif k == "geostable":
            out = a * mu ** (a - 1) / (1.0 + mu**a)
            if a == 1:
                out = 1.0 / (1.0 + mu)
        elif k == "sum":
            B = exp.beta
            out = exp.c * a * mu ** (a - 1) + exp.d * B * mu ** (B - 1) / (1.0 + mu**B)
            out = np.where(mu == 0, 0.0, out)
        else:
            out = np.full_like(mu, exp.b)
    return _scalar_or_array(out)


# ---------------------------------------------------------------------------
# Mittag-Leffler function on the negative real axis
# ---------------------------------------------------------------------------

# use the power series while |z|^(1/alpha) stays below this; beyond it the
# alternating terms grow like exp(|z|^(1/alpha)) and cancel badly
_ML_SERIES_LIMIT = 6.0


def _ml_series(alpha, z):
    terms = []
    log_abs = math.log(-z) if z < 0 else -math.inf
    j = 0
    while True:
        mag = math.exp(j * log_abs - special.gammaln(alpha * j + 1)) if j else 1.0
        terms.append(mag if j % 2 == 0 else -mag)
        total = math.fsum(terms)
        # stop once past the peak and the terms no longer register
        if j > 2 and mag <= 1e-16 * abs(total) and mag <= abs(terms[-2]):
            return total
        if z == 0:
            return 1.0
        j += 1


def _ml_integral(alpha, x):
    # E_a(-x) = sin(a pi)/(a pi) int_0^inf exp(-(x s)^(1/a)) / ((s + cos a pi)^2 + sin^2 a pi) ds
    ca, sa = math.cos(alpha * math.pi), math.sin(alpha * math.pi)
    inv = 1.0 / alpha
    upper = 750.0**alpha / x

    def g(s):
        return math.exp(-((x * s) ** inv))

    s0 = -ca
    if not 0 < s0 < upper:
        val, _ = integrate.quad(
            lambda s: g(s) / ((s - s0) ** 2 + sa * sa), 0.0, upper,
            points=[p / x for p in (0.5, 2.0, 8.0, 50.0) if p / x < upper] or None,
            limit=500, epsabs=1e-300, epsrel=1e-13,
        )
        return sa / (alpha * math.pi) * val

    # for alpha > 1/2 the kernel peaks at s0 with width sin(a pi); subtract the
    # constant and linear parts of g there and integrate them in closed form
    g0 = g(s0)
    d0 = -g0 * inv * x**inv * s0 ** (inv - 1)

    def rest(s):
        u = s - s0
        return (g(s) - g0 - d0 * u) / (u * u + sa * sa)

    points = sorted({q for q in [p / x for p in (0.5, 2.0, 8.0, 50.0)] + [s0] if 0 < q < upper})
    with warnings.catch_warnings():
        # near alpha = 1 the subtracted integrand sits at the rounding floor
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(rest, 0.0, upper, points=points, limit=500, epsabs=1e-300, epsrel=1e-12)
    lorentz = (math.atan((upper - s0) / sa) + math.atan(s0 / sa)) / sa
    odd = 0.5 * math.log(((upper - s0) ** 2 + sa * sa) / (s0 * s0 + sa * sa))
    return sa / (alpha * math.pi) * (val + g0 * lorentz + d0 * odd)


def _ml_scalar(alpha, z):
    if alpha == 1.0:
        return math.exp(z)
    if z == 0:
        return 1.0
    if (-z) ** (1.0 / alpha) <= _ML_SERIES_LIMIT:
        return _ml_series(alpha, z)
    return _ml_integral(alpha, -z)


def mittag_leffler(alpha, z):
    """One-parameter Mittag-Leffler function ``E_alpha(z)`` for ``z <= 0``, ``0 < alpha <= 1``."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    z = np.asarray(z, dtype=float)
    if np.any(z > 0):
        raise ValueError("only the negative real axis is supported")
    out = np.array([_ml_scalar(float(alpha), float(v)) for v in z.ravel()]).reshape(z.shape)
    return _scalar_or_array(out)


# ---------------------------------------------------------------------------
# Levy measures
# ---------------------------------------------------------------------------


def levy_density(exp, y):
    """Density of the Levy measure ``M`` for the kinds that list one."""
    y = np.asarray(y, dtype=float)
    k, a = exp.kind, exp.alpha
    if k in ("stable", "stable-drift"):
        out = a * y ** (-a - 1) / special.gamma(1 - a)
    elif k == "gamma" or (k == "geostable" and a == 1):
        out = np.exp(-y) / y
    elif k == "geostable":
        out = a / y * mittag_leffler(a, -(y**a))
    elif k == "drift":
        out = np.zeros_like(y)
    else:
        raise ValueError(f"no tabulated Levy density for {k}")
    return _scalar_or_array(out)


def _levy_indices(exp):
    """(singularity index at 0, power-tail index at infinity or None for exp tails)."""
    k, a = exp.kind, exp.alpha
    if k in ("stable", "stable-drift"):
        return a, a
    if k == "geostable" and a < 1:
        return 0.0, a
    return 0.0, None


def psi_from_levy_measure(exp, mu):
    """``b mu + int (1 - e^{-mu y}) M(y) dy`` by singularity-split quadrature."""
    if exp.kind == "sum":
        raise ValueError("sum kind has no single tabulated Levy density; check its parts")
    mu = float(mu)
    if mu < 0:
        raise ValueError("mu must be non-negative")
    if mu == 0:
        return 0.0
    if exp.kind == "drift":
        return exp.b * mu
    s0, tail = _levy_indices(exp)
    M = lambda y: levy_density(exp, y)  # noqa: E731

    # [0, 1]: y = u^(1/(1 - s0)) removes the y^(-1-s0) singularity
    p = 1.0 / (1.0 - s0)

    def head(u):
        if u == 0:
            return 0.0
        y = u**p
        return -math.expm1(-mu * y) * M(y) * p * u ** (p - 1)

    brk = [q for q in ((1.0 / mu) ** (1 / p), (10.0 / mu) ** (1 / p)) if 0 < q < 1]
    v_head, _ = integrate.quad(head, 0.0, 1.0, points=brk or None, limit=200, epsabs=0, epsrel=1e-11)

    if tail is None:
        v_tail, _ = integrate.quad(
            lambda y: -math.expm1(-mu * y) * M(y), 1.0, np.inf, limit=200, epsabs=0, epsrel=1e-11
        )
    else:
        # [1, inf): y = v^(-1/tail) maps the power tail onto (0, 1]
        q = 1.0 / tail

        def tail_f(v):
            if v == 0:
                return 0.0
            y = v ** (-q)
            return -math.expm1(-mu * y) * M(y) * q * v ** (-q - 1)

        v_tail, _ = integrate.quad(tail_f, 0.0, 1.0, limit=200, epsabs=0, epsrel=1e-11)
    return exp.b * mu + v_head + v_tail


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------


def positive_stable(alpha, rng, size=None):
    """Positive alpha-stable variates with ``E exp(-lam S) = exp(-lam^alpha)`` (Kanter)."""
    if alpha == 1.0:
        return np.ones(size) if size is not None else 1.0
    u = rng.random(size)
    e = rng.standard_exponential(size)
    U = np.pi * np.where(u == 0, 2.0**-53, u)
    a = alpha
    return (np.sin(a * U) / np.sin(U) ** (1 / a)) * (np.sin((1 - a) * U) / e) ** ((1 - a) / a)


def _geostable(alpha, t, rng, size):
    g = rng.standard_gamma(t, size) if np.any(t > 0) else np.zeros(size)
    return g ** (1 / alpha) * positive_stable(alpha, rng, size)


def sample(exp, t, rng, size=None):
    """Draw ``D_t``; ``t`` may be an array broadcastable to ``size`` (``t = 0`` gives 0)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    if size is None and t.ndim:
        size = t.shape
    k, a = exp.kind, exp.alpha
    shape = () if size is None else size
    if k == "stable":
        out = t ** (1 / a) * positive_stable(a, rng, size)
    elif k == "stable-drift":
        out = exp.b * t + t ** (1 / a) * positive_stable(a, rng, size)
    elif k == "gamma":
        out = rng.standard_gamma(np.broadcast_to(t, shape) if shape else t, size)
    elif k == "geostable":
        out = _geostable(a, np.broadcast_to(t, shape) if shape else t, rng, size)
    elif k == "sum":
        x = (exp.c * t) ** (1 / a) * positive_stable(a, rng, size)
        dt = exp.d * t
        y = _geostable(exp.beta, np.broadcast_to(dt, shape) if shape else dt, rng, size)
        out = x + y
    else:
        out = np.broadcast_to(exp.b * t, shape).astype(float)
    return _scalar_or_array(np.asarray(out, dtype=float))
