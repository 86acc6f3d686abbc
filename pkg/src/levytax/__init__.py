"""Scale functions, exit/ruin/creeping laws, and Monte Carlo verification
for spectrally negative processes taxed through their running supremum."""

from .errors import (
    AccuracyError,
    ConfigError,
    DomainError,
    RepeatedPoleError,
    UnsupportedOperationError,
)
from .identities import (
    Creep2Result,
    TripleLawDensity,
    TripleLawPoint,
    creep1_density,
    creep2_laplace,
    creep2_test,
    excursion_tail_rate,
    npv_tax,
    ruin_integrand_f,
    ruin_laplace,
    ruin_probability,
    survival_exponent,
    triple_law_density,
    two_sided_down,
    two_sided_up,
)
from .models import (
    BrownianDrift,
    CramerLundberg,
    LevyModel,
    MixedModel,
    laplace_exponent,
    levy_density,
    levy_measure_tail,
    phi,
    psi_prime,
    psi_prime_at_zero,
)
from .quadrature import QuadratureConfig, adaptive_gk
from .scale import (
    ScaleEvaluator,
    invert_laplace_reference,
    make_scale,
    w,
    w_prime,
    w_second,
    z,
)
from .simulate import (
    Estimate,
    McConfig,
    estimate_creep2,
    estimate_exit_down,
    estimate_exit_up,
    estimate_npv,
    estimate_ruin,
    simulate_path,
)
from .tax import (
    Constant,
    SqrtExample,
    Table,
    TaxProfile,
    a_star,
    gamma_at,
    gamma_bar,
    gamma_bar_inverse,
    profile_kinks,
    x_star,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "ConfigError",
    "DomainError",
    "RepeatedPoleError",
    "UnsupportedOperationError",
    "BrownianDrift",
    "CramerLundberg",
    "MixedModel",
    "LevyModel",
    "laplace_exponent",
    "psi_prime",
    "psi_prime_at_zero",
    "phi",
    "levy_density",
    "levy_measure_tail",
    "QuadratureConfig",
    "adaptive_gk",
    "ScaleEvaluator",
    "make_scale",
    "invert_laplace_reference",
    "w",
    "w_prime",
    "w_second",
    "z",
    "Constant",
    "Table",
    "SqrtExample",
    "TaxProfile",
    "gamma_at",
    "gamma_bar",
    "gamma_bar_inverse",
    "a_star",
    "x_star",
    "profile_kinks",
    "Creep2Result",
    "TripleLawDensity",
    "TripleLawPoint",
    "excursion_tail_rate",
    "survival_exponent",
    "two_sided_up",
    "two_sided_down",
    "ruin_integrand_f",
    "ruin_laplace",
    "ruin_probability",
    "creep2_laplace",
    "creep2_test",
    "npv_tax",
    "triple_law_density",
    "creep1_density",
    "McConfig",
    "Estimate",
    "estimate_exit_up",
    "estimate_exit_down",
    "estimate_ruin",
    "estimate_npv",
    "estimate_creep2",
    "simulate_path",
]
