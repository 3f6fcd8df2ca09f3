"""Isotropic Gaussian fields in coefficient space: sampling, evaluation, estimation."""
from __future__ import annotations

import numpy as np

from .harmonics import HarmonicCoefficients, ylm_table
from .spectra import PowerSpectrum


def sample_field(s, rng, n=None):
    """Draw coefficients with ``E |a_lm|^2 = C_l``.

    ``a_l0`` is real with variance ``C_l``; for ``m > 0`` the real and imaginary
    parts are independent with variance ``C_l / 2``.  With ``n`` given, returns a
    batch of ``n`` independent fields.
    """
    L = s.bandlimit
    batch = () if n is None else (int(n),)
    re = rng.standard_normal(batch + (L + 1, L + 1))
    im = rng.standard_normal(batch + (L + 1, L + 1))
    sd = np.sqrt(s.values)[:, None]
    a = (re + 1j * im) * (sd / np.sqrt(2.0))
    a[..., :, 0] = re[..., :, 0] * sd[:, 0]
    a *= np.tril(np.ones((L + 1, L + 1)))
    return HarmonicCoefficients(a)


def _order_weights(L):
    # each m > 0 entry stands for itself and its conjugate partner at -m
    w = np.full(L + 1, 2.0)
    w[0] = 1.0
    return w


def evaluate_field(c, theta, phi=None):
    """Pointwise synthesis ``sum_lm a_lm Y_lm(x)``.

    Coefficient batch dimensions and point dimensions broadcast against each
    other, so a batch of ``n`` fields at ``n`` points gives ``n`` values.
    """
    L = c.bandlimit
    Y = ylm_table(L, theta, phi)
    out = np.sum((c.values * Y).real * _order_weights(L), axis=(-2, -1))
    return out.item() if out.ndim == 0 else out


def frequency_component(c, l, theta, phi=None):
    """Projection ``T_l(x) = sum_{|m| <= l} a_lm Y_lm(x)`` onto degree ``l``."""
    if l < 0 or l > c.bandlimit:
        raise ValueError(f"degree {l} outside 0..{c.bandlimit}")
    Y = ylm_table(l, theta, phi)[..., l, : l + 1]
    out = np.sum((c.values[..., l, : l + 1] * Y).real * _order_weights(l), axis=-1)
    return out.item() if out.ndim == 0 else out


def estimate_spectrum(c):
    """Unbiased estimate ``(2l + 1)^-1 sum_{|m| <= l} |a_lm|^2`` of a single field."""
    if c.batch_shape:
        raise ValueError("estimate_spectrum takes a single coefficient set")
    l = np.arange(c.bandlimit + 1)
    return PowerSpectrum(c.degree_power() / (2 * l + 1), family="estimate")


def degree_estimates(c):
    """Spectrum estimates for every field of a batch; shape ``batch + (L + 1,)``."""
    l = np.arange(c.bandlimit + 1)
    return c.degree_power() / (2 * l + 1)
