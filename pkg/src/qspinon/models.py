"""Spin-chain Hamiltonians, the exact-diagonalization oracle and reference curves."""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, replace

import networkx as nx
import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from ._kernels import exchange_matvec, sector_states
from .exceptions import CapacityError, NumericalError
from .pauli import PauliSum, qubitwise_commute
from .statevector import StateVector, make_rng

ED_MAX_SITES = 24
DENSE_SECTOR_DIM = 1500


class ModelKind(str, enum.Enum):
    HEISENBERG = "heisenberg"
    HALDANE_SHASTRY = "hs"
    XY = "xy"


@dataclass(frozen=True)
class SpinModel:
    """A spin-1/2 ring (or open chain) with exchange couplings.

    ``delta`` scales the Sz Sz part of the Heisenberg exchange; other kinds
    reject values different from 1.
    """

    kind: ModelKind
    L: int
    J: float = 1.0
    delta: float = 1.0
    periodic: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.L < 2:
            raise ValueError(f"need L >= 2, got {self.L}")
        if self.kind is ModelKind.HALDANE_SHASTRY and not self.periodic:
            raise ValueError("Haldane-Shastry model is defined on a ring only")
        if self.kind is not ModelKind.HEISENBERG and self.delta != 1.0:
            raise ValueError("anisotropy is only defined for the Heisenberg model")

    def resized(self, L: int) -> "SpinModel":
        return replace(self, L=L)

    def bonds(self) -> list[tuple[int, int, float, float]]:
        """Unordered pairs ``(i, j, jz, jxy)`` with ``H = sum jz SzSz + jxy (SxSx + SySy)``.

        Nearest-neighbour rings of length 2 visit the pair (0, 1) twice and the
        two contributions are merged.
        """
        L, J = self.L, self.J
        acc: dict[tuple[int, int], list[float]] = {}

        def add(i: int, j: int, jz: float, jxy: float) -> None:
            key = (min(i, j), max(i, j))
            cur = acc.setdefault(key, [0.0, 0.0])
            cur[0] += jz
            cur[1] += jxy

        if self.kind is ModelKind.HALDANE_SHASTRY:
            pref = J * math.pi**2 / L**2
            for i in range(L):
                for j in range(i + 1, L):
                    c = pref / math.sin(math.pi * (j - i) / L) ** 2
                    add(i, j, c, c)
        else:
            n_bonds = L if self.periodic else L - 1
            jz, jxy = (J * self.delta, J) if self.kind is ModelKind.HEISENBERG else (0.0, -J)
            for i in range(n_bonds):
                add(i, (i + 1) % L, jz, jxy)
        return [(i, j, c[0], c[1]) for (i, j), c in sorted(acc.items())]


def heisenberg(L: int, J: float = 1.0) -> SpinModel:
    return SpinModel(ModelKind.HEISENBERG, L, J)


def haldane_shastry(L: int, J: float = 1.0) -> SpinModel:
    return SpinModel(ModelKind.HALDANE_SHASTRY, L, J)


def xy_model(L: int, J: float = 1.0) -> SpinModel:
    return SpinModel(ModelKind.XY, L, J)


def hs_coupling(L: int, distance: int, J: float = 1.0) -> float:
    return J * math.pi**2 / L**2 / math.sin(math.pi * distance / L) ** 2


def build_hamiltonian(model: SpinModel) -> PauliSum:
    """Pauli form with S = sigma/2, i.e. ``jz/4 ZZ + jxy/4 (XX + YY)`` per bond."""
    L = model.L
    out = PauliSum(L)
    for i, j, jz, jxy in model.bonds():
        for p, c in (("X", jxy), ("Y", jxy), ("Z", jz)):
            if c:
                s = ["I"] * L
                s[i] = s[j] = p
                out.add_term("".join(s), c / 4)
    return out


class ExchangeOperator:
    """Matrix-free exchange Hamiltonian on one Sz sector (or the full space).

    ``n_down`` counts down spins (set bits); ``None`` selects all 2^n states.
    """

    def __init__(self, n_sites: int, bonds, n_down: int | None = None, constant: float = 0.0):
        if n_sites > 25:
            raise CapacityError(f"{n_sites} sites exceeds the dense cap")
        self.n_sites = n_sites
        self.n_down = n_down
        if n_down is None:
            self.states = np.arange(2**n_sites, dtype=np.int64)
            self.lookup = self.states
        else:
            self.states = sector_states(n_sites, n_down)
            self.lookup = np.full(2**n_sites, -1, dtype=np.int64)
            self.lookup[self.states] = np.arange(self.states.shape[0])
        nb = len(bonds)
        self.mask_i = np.empty(nb, dtype=np.int64)
        self.mask_j = np.empty(nb, dtype=np.int64)
        self.flip = np.empty(nb)
        diag = np.full(self.states.shape[0], float(constant))
        for b, (i, j, jz, jxy) in enumerate(bonds):
            mi, mj = 1 << (n_sites - 1 - i), 1 << (n_sites - 1 - j)
            self.mask_i[b], self.mask_j[b] = mi, mj
            self.flip[b] = jxy / 2
            parallel = ((self.states & mi) != 0) == ((self.states & mj) != 0)
            diag += np.where(parallel, jz / 4, -jz / 4)
        self.diag = diag

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.ascontiguousarray(x)
        y = np.empty_like(x, dtype=np.result_type(x.dtype, np.float64))
        return exchange_matvec(x, self.states, self.lookup, self.diag, self.mask_i, self.mask_j, self.flip, y)

    def dense(self) -> np.ndarray:
        return np.column_stack([self.matvec(col) for col in np.eye(self.dim)])

    def linear_operator(self) -> LinearOperator:
        return LinearOperator((self.dim, self.dim), matvec=self.matvec, dtype=np.float64)


@functools.lru_cache(maxsize=64)
def sector_operator(model: SpinModel, n_down: int | None) -> ExchangeOperator:
    return ExchangeOperator(model.L, model.bonds(), n_down)


@functools.lru_cache(maxsize=32)
def _sector_index(n_sites: int, n_down: int) -> np.ndarray:
    return sector_states(n_sites, n_down)


def apply_hamiltonian(model: SpinModel, vec: np.ndarray) -> np.ndarray:
    """``H vec`` on the full 2^L space, evaluated sector by sector."""
    vec = np.asarray(vec)
    if vec.shape[0] != 2**model.L:
        raise ValueError("vector length does not match model size")
    out = np.zeros(vec.shape, dtype=np.result_type(vec.dtype, np.float64))
    for n_down in range(model.L + 1):
        states = _sector_index(model.L, n_down)
        part = vec[states]
        if not np.any(part):
            continue
        out[states] = sector_operator(model, n_down).matvec(part)
    return out


def energy(model: SpinModel, state: StateVector) -> float:
    """``<state|H|state> / <state|state>``."""
    vec = state.amplitudes
    return float(np.vdot(vec, apply_hamiltonian(model, vec)).real / state.norm_squared())


def total_spin_squared(state: StateVector) -> float:
    """Expectation of ``(sum_i S_i)^2``."""
    n = state.n_qubits
    bonds = [(i, j, 2.0, 2.0) for i in range(n) for j in range(i + 1, n)]
    op = ExchangeOperator(n, bonds, None, constant=0.75 * n)
    vec = state.amplitudes
    return float(np.vdot(vec, op.matvec(vec)).real / state.norm_squared())


def total_sz(state: StateVector) -> float:
    n = state.n_qubits
    idx = np.arange(2**n)
    sz = (n - 2 * np.bitwise_count(idx).astype(np.int64)) / 2
    p = np.abs(state.amplitudes) ** 2
    return float(p @ sz / p.sum())


@dataclass
class Spectrum:
    ground_energy: float
    ground_state: StateVector
    sector: float
    residual: float


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v) > np.abs(v).max() * (1 - 1e-9)))
    ph = v[k] / abs(v[k])
    return v / ph


@functools.lru_cache(maxsize=64)
def _ground_sector(model: SpinModel) -> tuple[float, np.ndarray, float]:
    L = model.L
    if L > ED_MAX_SITES:
        raise CapacityError(f"ED capped at {ED_MAX_SITES} sites, got {L}")
    op = sector_operator(model, L // 2)
    if op.dim <= DENSE_SECTOR_DIM:
        w, V = np.linalg.eigh(op.dense())
        e0, v = float(w[0]), V[:, 0]
    else:
        v0 = make_rng(0).standard_normal(op.dim)
        try:
            w, V = eigsh(op.linear_operator(), k=1, which="SA", tol=1e-10, maxiter=10 * op.dim, v0=v0)
        except ArpackNoConvergence as exc:
            raise NumericalError(f"Lanczos did not converge for {model}") from exc
        e0, v = float(w[0]), V[:, 0]
    v = _fix_phase(v / np.linalg.norm(v))
    residual = float(np.linalg.norm(op.matvec(v) - e0 * v))
    if residual > 1e-8:
        raise NumericalError(f"ground-state residual {residual:.2e} above 1e-8 for {model}")
    if L <= 8:
        full = np.linalg.eigvalsh(sector_operator(model, None).dense())[0]
        if abs(full - e0) > 1e-10:
            raise NumericalError(f"sector ground energy {e0} differs from full spectrum {full}")
    return e0, v, residual


def ground_state_ed(model: SpinModel) -> Spectrum:
    """Lowest eigenpair in the Sz = 0 (even L) or Sz = +1/2 (odd L) sector.

    The returned vector is real with its dominant amplitude positive.
    """
    e0, v, residual = _ground_sector(model)
    L = model.L
    amps = np.zeros(2**L, dtype=complex)
    amps[sector_states(L, L // 2)] = v
    return Spectrum(e0, StateVector(amps), 0.5 * (L - 2 * (L // 2)), residual)


def ground_energy(model: SpinModel) -> float:
    return _ground_sector(model)[0]


def bethe_gs_energy(L_plus_1: int, J: float = 1.0) -> float:
    """Thermodynamic-limit Heisenberg ground energy ``J N (1/4 - ln 2)`` for N sites."""
    if L_plus_1 < 1:
        raise ValueError("need at least one site")
    return J * L_plus_1 * (0.25 - math.log(2))


def analytic_dispersion(kind: ModelKind | str, q, J: float = 1.0):
    """Reference spinon curves: ``(pi J/2) cos q`` and ``(J/2)(q - pi/2)^2``."""
    kind = ModelKind(kind)
    q = np.asarray(q, dtype=float)
    if kind is ModelKind.HEISENBERG:
        return J * np.pi / 2 * np.cos(q)
    if kind is ModelKind.HALDANE_SHASTRY:
        return J / 2 * (q - np.pi / 2) ** 2
    raise ValueError("no spinon reference curve for the XY model")


def commuting_groups(h: PauliSum) -> list[PauliSum]:
    """Partition into qubit-wise commuting groups by largest-first greedy coloring."""
    strings = sorted(s for s, c in h if s != "I" * h.n_qubits)
    graph = nx.Graph()
    graph.add_nodes_from(strings)
    for a in range(len(strings)):
        for b in range(a + 1, len(strings)):
            if not qubitwise_commute(strings[a], strings[b]):
                graph.add_edge(strings[a], strings[b])
    colors = nx.greedy_color(graph, strategy="largest_first")
    n_colors = max(colors.values(), default=-1) + 1
    groups = [PauliSum(h.n_qubits) for _ in range(max(n_colors, 1))]
    for s in strings:
        groups[colors[s]].add_term(s, h.terms[s])
    ident = "I" * h.n_qubits
    if ident in h.terms:
        groups[0].add_term(ident, h.terms[ident])
    return [g for g in groups if len(g)]
