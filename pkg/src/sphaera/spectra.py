"""Angular power spectra: parametric families, variances and evolved spectra."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .harmonics import FOUR_PI, eigenvalue
from .subordinators import psi as _psi


@dataclass
class PowerSpectrum:
    """Spectrum ``C_0 .. C_L`` plus the variance carried by the degrees above ``L``.

    ``tail`` is ``sum_{l > L} (2l + 1) / (4 pi) C_l`` for the parametric model the
    values were cut from (exact for the built-in families, an upper bound for
    spectra derived from them, 0 for tabulated input).
    """

    values: np.ndarray
    family: str = "tabulated"
    params: dict = field(default_factory=dict)
    tail: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("spectrum must be a non-empty 1-d array")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("spectrum values must be finite and non-negative")
        self.values = v

    @property
    def bandlimit(self):
        return self.values.size - 1

    @property
    def degrees(self):
        return np.arange(self.values.size)

    def __getitem__(self, l):
        return self.values[l]

    def variance_terms(self):
        """``(2l + 1) / (4 pi) C_l``, the contribution of each degree to the variance."""
        return (2 * self.degrees + 1) / FOUR_PI * self.values

    def describe(self):
        params = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.family}:{params}" if params else self.family


def _power_tail(A, gamma, L):
    # sum_{n >= L+2} (2n - 1) n^-gamma with n = l + 1, via Hurwitz zeta
    n0 = L + 2
    return A / FOUR_PI * (2 * special.zeta(gamma - 1, n0) - special.zeta(gamma, n0))


def power_law_spectrum(A, gamma, L):
    """``C_l = A (1 + l)^-gamma``; needs ``gamma > 2`` for a finite variance."""
    if gamma <= 2:
        raise ValueError("non-summable spectrum: gamma must exceed 2")
    if A <= 0:
        raise ValueError("amplitude must be positive")
    l = np.arange(L + 1)
    return PowerSpectrum(
        A * (1.0 + l) ** -gamma,
        family="power",
        params={"A": A, "gamma": gamma},
        tail=float(_power_tail(A, gamma, L)),
    )


def _damped_terms(A, theta, nu, c, l):
    l = np.asarray(l, dtype=float)
    return (2 * l + 1) / FOUR_PI * A * (1.0 + l) ** -theta * np.exp(-c * l**nu)


def _damped_tail(A, theta, nu, c, L):
    total, start, block = 0.0, L + 1, 4096
    while start < L + 1 + 2**22:
        terms = _damped_terms(A, theta, nu, c, np.arange(start, start + block))
        total += terms.sum()
        start += block
        if terms[-1] <= terms[0] and terms.sum() <= 1e-18 * max(total, 1e-300):
            return total
        block *= 2
    # remaining mass: integral comparison for an eventually decreasing summand
    rest, _ = integrate.quad(lambda x: _damped_terms(A, theta, nu, c, x), start, np.inf, limit=200)
    return total + rest + float(_damped_terms(A, theta, nu, c, start))


def damped_spectrum(A, theta, nu, c, L):
    """``C_l = A (1 + l)^-theta exp(-c l^nu)`` with polynomial and exponential decay."""
    if A <= 0:
        raise ValueError("amplitude must be positive")
    if nu < 0 or c < 0:
        raise ValueError("nu and c must be non-negative")
    if nu * c == 0 and theta <= 2:
        raise ValueError("class-D violation: without exponential damping theta must exceed 2")
    l = np.arange(L + 1)
    values = A * (1.0 + l) ** -theta * np.exp(-c * l.astype(float) ** nu)
    if c == 0:
        tail = _power_tail(A, theta, L)
    elif nu == 0:
        tail = np.exp(-c) * _power_tail(A, theta, L)
    else:
        tail = _damped_tail(A, theta, nu, c, L)
    return PowerSpectrum(
        values,
        family="damped",
        params={"A": A, "theta": theta, "nu": nu, "c": c},
        tail=float(tail),
    )


def parse_spectrum(text, L):
    """Build a spectrum from ``power:A=1,gamma=3`` or ``damped:A=1,theta=3,nu=0.5,c=2``."""
    family, _, rest = text.strip().partition(":")
    family = family.strip().lower()
    required = {"power": ("A", "gamma"), "damped": ("A", "theta", "nu", "c")}
    if family not in required:
        raise ValueError(f"unknown spectrum family {family!r}")
    values = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        key = key.strip()
        if not eq or key not in required[family] or key in values:
            raise ValueError(f"bad parameter {item!r} for {family}")
        values[key] = float(val)
    missing = set(required[family]) - set(values)
    if missing:
        raise ValueError(f"{family} needs parameters {sorted(missing)}")
    if family == "power":
        return power_law_spectrum(values["A"], values["gamma"], L)
    return damped_spectrum(values["A"], values["theta"], values["nu"], values["c"], L)


def field_variance(s, include_tail=True):
    """``E T(x)^2 = sum_l (2l + 1) / (4 pi) C_l``, with the model tail above ``L`` by default."""
    v = float(np.sum(s.variance_terms()))
    return v + s.tail if include_tail else v


def semigroup_multiplier(psi, L, t):
    """``exp(-t psi(l (l + 1)))`` for ``l = 0 .. L``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    mu = eigenvalue(np.arange(L + 1)).astype(float)
    p = np.asarray(_psi(psi, mu))
    # t = inf is allowed; psi(0) = 0 keeps the constant mode
    with np.errstate(invalid="ignore"):
        return np.where(p == 0, 1.0, np.exp(-t * p))


def effective_spectrum(s, psi, t):
    """Spectrum of the evolved coefficients, ``C_l exp(-2 t psi(mu_l))``."""
    L = s.bandlimit
    factor = semigroup_multiplier(psi, L + 1, 2 * t)
    # psi is non-decreasing, so the first omitted multiplier bounds the rest
    return PowerSpectrum(
        s.values * factor[:-1],
        family="effective",
        params={**s.params, "t": t},
        tail=s.tail * float(factor[-1]),
    )


def dependence_sum(s, psi, l):
    """Sum over integer lags of the degree-``l`` time covariance, and its range class.

    Returns ``(value, "short" | "long")`` with
    ``value = (2l + 1) / (4 pi) C_l / (exp(psi(mu_l)) - 1)``.
    """
    if l < 0 or l > s.bandlimit:
        raise ValueError(f"degree {l} outside 0..{s.bandlimit}")
    p = float(_psi(psi, eigenvalue(l)))
    weight = (2 * l + 1) / FOUR_PI * s.values[l]
    if p <= 0:
        return (np.inf if weight > 0 else 0.0), "long"
    return weight / np.expm1(p), "short"
