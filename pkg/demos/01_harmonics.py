# %% [markdown]
# # Spherical harmonics and exact transforms
#
# A band-limited function on the sphere is determined by its values on a
# Gauss-Legendre grid.  Analysis and synthesis are inverse to each other up to
# rounding, and the addition formula ties harmonic sums to Legendre polynomials.

# %%
import numpy as np

from sphaera.harmonics import (
    FOUR_PI,
    HarmonicCoefficients,
    SphereGrid,
    SpherePoint,
    addition_sum,
    analyze,
    legendre_all,
    synthesize,
)

rng = np.random.default_rng(1)

# %% [markdown]
# Random coefficients up to degree 32.  Only orders `m >= 0` are stored; the
# negative orders follow from the reality constraint.

# %%
L = 32
a = (rng.standard_normal((L + 1, L + 1)) + 1j * rng.standard_normal((L + 1, L + 1))) * np.tri(L + 1)
a[:, 0] = a[:, 0].real
c = HarmonicCoefficients(a)
grid = SphereGrid.gauss_legendre(L)
fmap = synthesize(c, grid)
back = analyze(fmap)
print("grid shape", grid.shape)
print("round-trip error", np.max(np.abs(back.values - c.values)))

# %% [markdown]
# The addition formula: the sum over orders of `Y_lm(x) conj(Y_lm(y))` is
# `(2l+1)/(4 pi) Q_l(<x, y>)`.

# %%
x, y = SpherePoint(0.4, 1.0), SpherePoint(2.1, 4.2)
Q = legendre_all(8, x.inner(y))
for l in (0, 3, 8):
    print(l, addition_sum(l, x, y), (2 * l + 1) / FOUR_PI * Q[l])
