# %% [markdown]
# # Subordinate heat semigroup and covariance series
#
# The semigroup damps degree `l` by `exp(-t psi(mu_l))`.  Applying it to a field
# gives the mean field `eta_t`, whose variance decays, while the field seen
# along a random path keeps its variance.

# %%
import numpy as np

from sphaera import CovarianceQuery, apply_semigroup, cov_space_time, cov_time, mean_field_variance
from sphaera import LaplaceExponent, field_variance, power_law_spectrum, sample_field
from sphaera.evolution import bochner_check, pde_residual

spec = power_law_spectrum(1.0, 3.0, 8)
stable = LaplaceExponent.stable(0.5)

# %%
for t in (0.0, 0.5, 1.0, 5.0):
    print(f"t={t:4.1f}  var eta_t = {mean_field_variance(spec, stable, t):.5f}"
          f"  var T = {field_variance(spec, include_tail=False):.5f}")

# %% [markdown]
# Space-time and time covariances at a fixed angle.

# %%
for t in (0.0, 0.5, 2.0):
    q = CovarianceQuery(spec, stable, t, t, 0.5)
    print(t, cov_space_time(q), cov_time(CovarianceQuery(spec, stable, 0.0, t)))
print("limit C_0 / 4 pi =", spec[0] / (4 * np.pi))

# %% [markdown]
# The fractional heat equation holds to second order in the time step, and the
# Bochner integral reproduces `-mu^alpha`.

# %%
c = sample_field(power_law_spectrum(1, 3, 16), np.random.default_rng(4))
print("residuals", pde_residual(c, stable, 0.5, 1e-4), pde_residual(c, stable, 0.5, 5e-5))
print("Bochner", bochner_check(0.5, 4.0))
print("evolved a_10", apply_semigroup(c, stable, 1.0)[1, 0], "from", c[1, 0])
