"""Two-level emitter in front of a mirror in a semi-infinite waveguide.

Delay-equation dynamics, the trapped bound state, the emitted field, a
discretised-mode cross-check and a noisy, lossy variant.
"""
__version__ = "0.1.0"

from .params import SystemParams, TimeGrid, Zero, Step, Sinusoid, PiecewiseLinear, derive
from .dde import solve_dde, series_solution, asymptotic_amplitude, laplace_eval
from .bound import bound_state_exists, bound_profile
from .field import output_field, realspace_field, emitted_flux
from .stochastic import NoiseParams, solve_noisy_dde, ensemble_average

__all__ = [
    "SystemParams", "TimeGrid", "Zero", "Step", "Sinusoid", "PiecewiseLinear", "derive",
    "solve_dde", "series_solution", "asymptotic_amplitude", "laplace_eval",
    "bound_state_exists", "bound_profile", "output_field", "realspace_field", "emitted_flux",
    "NoiseParams", "solve_noisy_dde", "ensemble_average",
]
