"""Linear-combination-of-unitaries preparation of the momentum state.

Layout: system qubits ``0..L`` hold the (L+1)-site chain, ancillas
``L+1..2L`` are ``a_1..a_L``. The ancilla register is prepared in the equal
superposition of all bitstrings of Hamming weight at most one; ancilla
``a_k`` controls the swap ladder of one branch, the all-zero string is the
identity branch. After un-preparing the register, the all-zero readout
leaves the system in ``Psi(q)`` with probability ``N(q) / (L + 1)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .exceptions import CapacityError, ConfigError
from .spinon import Method, SpinonResult, extend_state
from .statevector import (
    MAX_QUBITS,
    Circuit,
    StateVector,
    Gate,
    cnot,
    global_phase,
    post_select,
    ry,
    sample,
    swap_ladder,
    x,
)

INSERTIONS = ("end", "middle")


def v_angle(k: int) -> float:
    return 2 * math.acos(1 / math.sqrt(k))


def v_gates(L: int, offset: int = 0) -> list[Gate]:
    """Controlled-Ry cascade writing a thermometer code, then CNOTs turning it one-hot.

    ``L`` rotations and ``2L - 3`` controlled gates (L >= 2). The final X on
    the first qubit maps the one-hot branch of the first ancilla onto the
    all-zero string, which saves one CNOT.
    """
    if L < 1:
        raise ValueError("V needs at least one qubit")
    a = [offset + i for i in range(L)]
    gates = [ry(a[0], v_angle(L + 1))]
    for k in range(1, L):
        gates.append(ry(a[k], v_angle(L + 1 - k)).controlled(a[k - 1]))
    for j in range(1, L - 1):
        gates.append(cnot(a[j + 1], a[j]))
    if L > 1:
        gates.append(x(a[0]))
    return gates


def v_circuit(L: int) -> Circuit:
    circ = Circuit(L)
    circ.extend(v_gates(L))
    return circ


def v_state(L: int) -> StateVector:
    return v_circuit(L).run(StateVector.zero(L))


@dataclass(frozen=True)
class LcuCircuitSpec:
    L: int
    q: float = 0.0
    insertion: str = "end"

    def __post_init__(self) -> None:
        if self.insertion not in INSERTIONS:
            raise ConfigError(f"insertion must be one of {INSERTIONS}")
        if self.L < 1:
            raise ConfigError("LCU needs L >= 1")
        if self.insertion == "middle" and self.L % 2:
            raise ConfigError("middle insertion needs even L")
        if self.n_qubits > MAX_QUBITS:
            raise CapacityError(f"LCU circuit needs {self.n_qubits} qubits (cap {MAX_QUBITS})")

    @property
    def n_qubits(self) -> int:
        return 2 * self.L + 1

    @property
    def start_site(self) -> int:
        return 0 if self.insertion == "end" else self.L // 2

    def branch_sites(self) -> list[int]:
        """Final position of the inserted spin for ancillas ``a_1..a_L``."""
        L, s = self.L, self.start_site
        return [m for m in range(L + 1) if m != s]


def build_lcu_circuit(spec: LcuCircuitSpec) -> Circuit:
    L, q, s = spec.L, spec.q, spec.start_site
    circ = Circuit(L + 1, L)
    anc = circ.ancillas
    circ.extend(v_gates(L, offset=L + 1))
    for a, m in zip(anc, spec.branch_sites()):
        step_q = q if m > s else -q
        circ.extend(swap_ladder(s, m, step_q, controls=(a,)))
    if s:
        # left ladders collect e^{-iq} per step; restore e^{iqm} overall
        circ.append(global_phase(q * s))
    circ.extend(g.inverse() for g in reversed(v_gates(L, offset=L + 1)))
    return circ


def lcu_input(gs: StateVector, spec: LcuCircuitSpec) -> StateVector:
    if gs.n_qubits != spec.L:
        raise ValueError(f"ground state has {gs.n_qubits} sites, spec expects {spec.L}")
    return extend_state(gs, spec.start_site).kron(StateVector.zero(spec.L))


@dataclass
class LcuRun:
    result: SpinonResult
    p_zero: float
    state: StateVector | None
    counts: dict[str, int] = field(default_factory=dict)

    def histogram(self, truncate: int | None = None) -> dict[str, int]:
        """Counts in computational-basis order, optionally the first ``truncate`` strings only."""
        if not self.counts:
            return {}
        if truncate is None:
            return {k: self.counts[k] for k in sorted(self.counts)}
        L = self.result.L
        keys = (format(i, f"0{L}b") for i in range(min(truncate, 2**L)))
        return {k: self.counts.get(k, 0) for k in keys}

    def histogram_json(self, truncate: int | None = None) -> str:
        r = self.result
        return json.dumps(
            {
                "q": r.q,
                "n_shots": r.shots,
                "seed": r.seed,
                "counts": self.histogram(truncate),
                "N_hat": r.norm,
                "sigma": r.sigma_norm,
            },
            indent=1,
        )


def run_lcu(
    gs: StateVector,
    q: float,
    mode: str = "statevector",
    n_shots: int | None = None,
    seed: int = 0,
    insertion: str = "end",
) -> LcuRun:
    """Simulate the LCU circuit; norm from the exact or sampled all-zero frequency."""
    spec = LcuCircuitSpec(gs.n_qubits, q, insertion)
    L = spec.L
    final = build_lcu_circuit(spec).run(lcu_input(gs, spec))
    anc = list(range(L + 1, 2 * L + 1))
    zeros = "0" * L
    selected, p0 = post_select(final, anc, zeros, discard=True)
    state = selected if selected.valid else None
    if mode == "statevector":
        res = SpinonResult(L, float(q), p0 * (L + 1), None, None, None, "", Method.LCU.value)
        return LcuRun(res, p0, state)
    if mode != "sampled":
        raise ConfigError(f"unknown LCU mode {mode!r}")
    if not n_shots or n_shots < 1:
        raise ConfigError("sampled mode needs a positive shot count")
    shots = sample(final, anc, n_shots, seed)
    n0 = shots.counts.get(zeros, 0)
    p_hat = n0 / n_shots
    flags = [] if n0 else ["zero_all_zero_counts"]
    res = SpinonResult(
        L, float(q), p_hat * (L + 1), None, None, None, "", Method.LCU.value,
        shots=n_shots, seed=seed,
        sigma_norm=(L + 1) * math.sqrt(p_hat * (1 - p_hat) / n_shots),
        flags=flags,
    )
    return LcuRun(res, p0, state, shots.counts)


def fredkin_counts(L: int) -> dict[str, int]:
    """Closed-form controlled-SWAP counts for both insertion layouts."""
    out = {"end": (L + 1) * L // 2}
    if L % 2 == 0:
        out["middle"] = (L // 2 + 1) * L // 2
    return out


__all__ = [
    "LcuCircuitSpec",
    "LcuRun",
    "build_lcu_circuit",
    "fredkin_counts",
    "lcu_input",
    "run_lcu",
    "v_angle",
    "v_circuit",
    "v_gates",
    "v_state",
]
