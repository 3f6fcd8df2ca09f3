# %% [markdown]
# # Subordinate Brownian motion on the sphere
#
# Brownian motion on the sphere is run at a random clock.  The transition law
# is zonal, so `E Q_l(cos Theta_t) = exp(-t psi(mu_l))`.  Evaluating a random
# field at the moving point gives covariances that match the series.

# %%
import math

import numpy as np

from sphaera import CovarianceQuery, LaplaceExponent, SpherePoint, cov_space_time, power_law_spectrum
from sphaera.sphere_walk import bm_angle_cdf, mc_cov_space, mc_transition_moment, sample_subordinate_path

rng = np.random.default_rng(5)
stable = LaplaceExponent.stable(0.5)

# %%
tab = bm_angle_cdf(0.5)
print("series degree", tab.degree, "median angle", tab.sample(0.5))

# %%
means, ses = mc_transition_moment(stable, 1.0, [1, 2, 4], 100_000, rng)
for l, m, s in zip((1, 2, 4), means, ses):
    print(l, m, "+/-", s, "exact", math.exp(-math.sqrt(l * (l + 1))))

# %%
path = sample_subordinate_path(SpherePoint(0.0, 0.0), stable, np.linspace(0.1, 2.0, 20), rng)
print("polar angle along the path", np.round(path.theta, 3))

# %%
spec = power_law_spectrum(1.0, 3.0, 8)
x, y = SpherePoint(0.0, 0.0), SpherePoint(math.acos(0.5), 0.0)
est, se = mc_cov_space(spec, stable, x, y, 0.5, 0.5, 20_000, rng, threads=4)
oracle = cov_space_time(CovarianceQuery(spec, stable, 0.5, 0.5, 0.5))
print(f"MC {est:.5f} +/- {se:.5f}  series {oracle:.5f}  z = {(est - oracle) / se:+.2f}")
