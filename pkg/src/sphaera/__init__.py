"""Isotropic Gaussian fields on the sphere observed along subordinate Brownian paths."""

__version__ = "0.1.0"

from .harmonics import (
    FieldMap,
    HarmonicCoefficients,
    SphereGrid,
    SpherePoint,
    analyze,
    legendre_all,
    sph_harm,
    synthesize,
    ylm_table,
)
from .spectra import (
    PowerSpectrum,
    damped_spectrum,
    dependence_sum,
    effective_spectrum,
    field_variance,
    parse_spectrum,
    power_law_spectrum,
)
from .subordinators import LaplaceExponent, mittag_leffler, parse_psi, psi
from .fields import estimate_spectrum, evaluate_field, frequency_component, sample_field
from .evolution import (
    CovarianceQuery,
    apply_generator,
    apply_semigroup,
    cov_space_time,
    cov_time,
    jump_kernel,
    mean_field_variance,
)
from .sphere_walk import (
    WalkPath,
    bm_angle_cdf,
    mc_cov_space,
    mc_cov_time,
    sample_bm_step,
    sample_subordinate_path,
)
from .rng import make_rng
