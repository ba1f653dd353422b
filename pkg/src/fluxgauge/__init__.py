"""Half-line advection-diffusion with a gauge-periodic flux boundary condition."""

from .core import (
    GAUGE,
    DomainError,
    Field,
    FluxModel,
    Grid1D,
    InputError,
    ModeRates,
    Params,
    RangeError,
    flux_deriv,
    flux_eval,
    from_weighted,
    heat_kernel,
    mode_rates,
    to_weighted,
)
from .special import erf, erfc, erfcx

__version__ = "0.1.0"
