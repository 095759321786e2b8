from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..statevector import Circuit, StateVector


@dataclass
class PrepResult:
    """Outcome of one ground-state preparation route."""

    route: str
    L: int
    state: StateVector
    energy: float
    infidelity: float
    success_probability: float = 1.0
    params: list[float] = field(default_factory=list)
    seed: int | None = None
    relative_energy_error: float | None = None
    flags: list[str] = field(default_factory=list)
    circuit: Circuit | None = None

    def __post_init__(self) -> None:
        self.infidelity = min(max(float(self.infidelity), 0.0), 1.0)
        if not 0.0 < self.success_probability <= 1.0:
            raise ValueError(f"success probability {self.success_probability} outside (0, 1]")

    @property
    def fidelity(self) -> float:
        return 1.0 - self.infidelity

    def to_dict(self) -> dict:
        return {
            "route": self.route,
            "L": self.L,
            "energy": self.energy,
            "infidelity": self.infidelity,
            "relative_energy_error": self.relative_energy_error,
            "success_probability": self.success_probability,
            "params": [float(p) for p in self.params],
            "seed": self.seed,
            "flags": list(self.flags),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def singlet_product(L: int) -> np.ndarray:
    if L % 2:
        raise ValueError(f"valence bond crystal needs even L, got {L}")
    singlet = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    out = np.ones(1, dtype=complex)
    for _ in range(L // 2):
        out = np.kron(out, singlet)
    return out


def vbc_state(L: int) -> StateVector:
    """Product of singlets on the bonds (0,1), (2,3), ..."""
    return StateVector(singlet_product(L))
