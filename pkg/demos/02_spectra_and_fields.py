# %% [markdown]
# # Power spectra and Gaussian fields
#
# An isotropic Gaussian field is fixed by its angular power spectrum `C_l`.
# We draw fields from a power-law spectrum, check the pointwise variance and
# recover the spectrum from the coefficients.

# %%
import numpy as np

from sphaera import (
    SpherePoint,
    estimate_spectrum,
    evaluate_field,
    field_variance,
    power_law_spectrum,
    sample_field,
)
from sphaera.fields import degree_estimates

rng = np.random.default_rng(2)
spec = power_law_spectrum(1.0, 3.0, 16)
print("C_l for l <= 4:", spec.values[:5])
print("variance with analytic tail:", field_variance(spec))
print("band-limited variance:", field_variance(spec, include_tail=False))

# %% [markdown]
# Five thousand independent fields evaluated at one point.

# %%
fields = sample_field(spec, rng, 5000)
vals = evaluate_field(fields, SpherePoint(1.0, 2.0))
print("empirical variance", vals.var(), "+/-", vals.var() * np.sqrt(2 / vals.size))

# %% [markdown]
# The per-field spectrum estimate is unbiased and `(2l+1) C_hat_l / C_l` is
# chi-squared with `2l+1` degrees of freedom.

# %%
est = degree_estimates(fields)
for l in (2, 8, 16):
    print(l, est[:, l].mean() / spec[l], (2 * l + 1) * est[:, l].var() / spec[l] ** 2 / 2)
one = sample_field(spec, rng)
print("one field, first C_hat_l:", estimate_spectrum(one).values[:4])
