"""Ground-state preparation routes."""

from .common import PrepResult, vbc_state
from .fermions import (
    closed_shell_momenta,
    fermi_sea_circuit,
    fermi_sea_state,
    givens_decomposition,
    gutzwiller_circuit,
    gutzwiller_ground_state,
    gutzwiller_project,
    slater_circuit,
    xy_ground_state,
)
from .vqe import SectorHva, VqeConfig, WarmStart, hva_circuit, scipy_optimizer, vqe_optimize

__all__ = [
    "PrepResult",
    "SectorHva",
    "VqeConfig",
    "WarmStart",
    "closed_shell_momenta",
    "fermi_sea_circuit",
    "fermi_sea_state",
    "givens_decomposition",
    "gutzwiller_circuit",
    "gutzwiller_ground_state",
    "gutzwiller_project",
    "hva_circuit",
    "scipy_optimizer",
    "slater_circuit",
    "vbc_state",
    "vqe_optimize",
    "xy_ground_state",
]
