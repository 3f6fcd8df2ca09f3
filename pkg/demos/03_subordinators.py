# %% [markdown]
# # Subordinators
#
# A subordinator is an increasing random clock `D_t` with
# `E exp(-mu D_t) = exp(-t psi(mu))`.  We sample each supported kind and check
# its Laplace transform.

# %%
import math

import numpy as np

from sphaera.subordinators import LaplaceExponent, mittag_leffler, psi, psi_from_levy_measure, sample

rng = np.random.default_rng(3)
kinds = [
    LaplaceExponent.stable(0.5),
    LaplaceExponent.stable_drift(1.0, 0.5),
    LaplaceExponent.gamma(),
    LaplaceExponent.geostable(0.7),
    LaplaceExponent.sum(1.0, 0.5, 2.0, 0.3),
]

# %%
for exp in kinds:
    D = sample(exp, 1.0, rng, size=100_000)
    v = np.exp(-D)
    z = (v.mean() - math.exp(-psi(exp, 1.0))) / (v.std() / math.sqrt(v.size))
    print(f"{exp.spec:35s} E[exp(-D_1)] = {v.mean():.5f}  exact {math.exp(-psi(exp, 1.0)):.5f}  z = {z:+.2f}")

# %% [markdown]
# The exponent can also be rebuilt from the Levy density by quadrature.  The
# geometric stable density involves the Mittag-Leffler function.

# %%
geo = LaplaceExponent.geostable(0.7)
for mu in (0.1, 1.0, 10.0):
    print(mu, psi(geo, mu), psi_from_levy_measure(geo, mu))
print("E_0.5(-1) =", mittag_leffler(0.5, -1.0))
