"""Single-spinon ansatz for spin-1/2 rings on a dense statevector simulator."""

from .exceptions import CapacityError, ConfigError, NumericalError
from .models import SpinModel, ground_state_ed, haldane_shastry, heisenberg
from .spinon import MomentumGrid, SpinonResult, dispersion_exact, norm_exact, spinon_state
from .statevector import Circuit, StateVector

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "Circuit",
    "ConfigError",
    "MomentumGrid",
    "NumericalError",
    "SpinModel",
    "SpinonResult",
    "StateVector",
    "dispersion_exact",
    "ground_state_ed",
    "haldane_shastry",
    "heisenberg",
    "norm_exact",
    "spinon_state",
]
