"""Single-spinon ansatz states, their norm and dispersion (exact statevector path)."""

from __future__ import annotations

import csv
import enum
import functools
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import ConfigError
from .models import ModelKind, SpinModel, apply_hamiltonian, bethe_gs_energy, ground_energy
from .statevector import StateVector

E0_ED_MAX_SITES = 21


class E0Source(str, enum.Enum):
    ED = "ED"
    BETHE = "Bethe"


class Method(str, enum.Enum):
    EXACT = "exact"
    LCU = "lcu"
    HADAMARD = "hadamard"


@dataclass(frozen=True)
class MomentumGrid:
    """``q_n = 2 pi n / (L + 1)`` for ``n = 0..L``."""

    L: int
    fold: bool = False

    def __post_init__(self) -> None:
        if self.L < 1:
            raise ValueError("grid needs L >= 1")

    @property
    def points(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.L + 1) / (self.L + 1)

    def reported(self) -> np.ndarray:
        """Points folded into ``[0, pi]`` when ``fold`` is set."""
        q = self.points
        return np.minimum(q, 2 * np.pi - q) if self.fold else q

    def upper_half(self) -> np.ndarray:
        """Grid points inside ``[0, pi]``."""
        q = self.points
        return q[q <= np.pi + 1e-12]

    def __len__(self) -> int:
        return self.L + 1


@dataclass
class SpinonResult:
    L: int
    q: float
    norm: float
    h_expect: float | None
    epsilon: float | None
    e0: float | None
    e0_source: str
    method: str
    shots: int | None = None
    seed: int | None = None
    sigma_norm: float | None = None
    sigma_epsilon: float | None = None
    flags: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.norm < -1e-10 and self.method == Method.EXACT.value:
            raise ValueError(f"negative norm {self.norm}")

    @property
    def q_folded(self) -> float:
        return min(self.q, 2 * math.pi - self.q)

    @property
    def defined(self) -> bool:
        return self.epsilon is not None

    def to_row(self) -> dict:
        row = asdict(self)
        row["flags"] = ";".join(self.flags)
        return row


CSV_COLUMNS = [
    "L", "q", "norm", "h_expect", "epsilon", "e0_source", "method",
    "sigma_norm", "sigma_epsilon", "e0", "shots", "seed", "flags",
]


def results_to_csv(results: list[SpinonResult], extra: dict | None = None) -> str:
    extra = extra or {}
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS + list(extra), lineterminator="\n")
    writer.writeheader()
    for r in results:
        row = {k: v for k, v in r.to_row().items() if k in CSV_COLUMNS}
        writer.writerow({k: ("" if v is None else v) for k, v in {**row, **extra}.items()})
    return buf.getvalue()


def norm_threshold(L: int) -> float:
    """Below this norm the dispersion is reported as undefined."""
    return 1e-6 * (L + 1)


@functools.lru_cache(maxsize=64)
def insertion_index(L: int, m: int) -> np.ndarray:
    """Image in the (L+1)-site basis of every L-site basis state when an up spin lands at ``m``."""
    if not 0 <= m <= L:
        raise ValueError(f"insertion site {m} outside 0..{L}")
    s = np.arange(2**L, dtype=np.int64)
    low_bits = L - m
    out = ((s >> low_bits) << (low_bits + 1)) | (s & ((1 << low_bits) - 1))
    out.flags.writeable = False
    return out


def extend_state(gs: StateVector, m: int) -> StateVector:
    """Insert an up spin so that it sits at position ``m`` of the L+1 chain."""
    L = gs.n_qubits
    out = np.zeros(2 ** (L + 1), dtype=complex)
    out[insertion_index(L, m)] = gs.amplitudes
    return StateVector(out, normalized=gs.normalized)


def _spinon_vector(gs: StateVector, q: float) -> np.ndarray:
    L = gs.n_qubits
    out = np.zeros(2 ** (L + 1), dtype=complex)
    amps = gs.amplitudes
    for m in range(L + 1):
        out[insertion_index(L, m)] += np.exp(1j * q * m) * amps
    return out / math.sqrt(L + 1)


def spinon_state(gs: StateVector, q: float) -> StateVector:
    """``(L+1)^{-1/2} sum_m e^{iqm} |Psi(m)>``, left unnormalized."""
    return StateVector(_spinon_vector(gs, q), normalized=False)


def norm_exact(gs: StateVector, q: float) -> float:
    v = _spinon_vector(gs, q)
    return float(np.vdot(v, v).real)


def resolve_e0(model: SpinModel, source: str | E0Source | None = None) -> tuple[float, E0Source]:
    """Ground energy of ``model`` (already sized L+1) from ED or the Bethe formula.

    ``None`` picks ED up to 21 sites and the Bethe value beyond.
    """
    if source is None or source == "auto":
        src = E0Source.ED if model.L <= E0_ED_MAX_SITES else E0Source.BETHE
    else:
        src = E0Source(source) if not isinstance(source, E0Source) else source
    if src is E0Source.BETHE:
        if model.kind is not ModelKind.HEISENBERG:
            raise ConfigError("the Bethe reference energy applies to the Heisenberg ring only")
        return bethe_gs_energy(model.L, model.J), src
    return ground_energy(model), src


def _ensure_extended(model: SpinModel, L: int) -> SpinModel:
    if model.L == L + 1:
        return model
    if model.L == L:
        return model.resized(L + 1)
    raise ValueError(f"model has {model.L} sites, ground state has {L}")


def dispersion_exact(
    gs: StateVector,
    model: SpinModel,
    q: float,
    e0_source: str | E0Source | None = None,
    e0: float | None = None,
) -> SpinonResult:
    """``eps(q) = <Psi(q)|H_{L+1}|Psi(q)> / N(q) - E0^{L+1}``.

    ``model`` may be given at either L or L+1 sites. A precomputed ``e0``
    skips the reference calculation (``e0_source`` is then only a label).
    """
    L = gs.n_qubits
    big = _ensure_extended(model, L)
    if e0 is None:
        e0, src = resolve_e0(big, e0_source)
    else:
        src = E0Source(e0_source or E0Source.ED)
    v = _spinon_vector(gs, q)
    norm = float(np.vdot(v, v).real)
    if norm <= norm_threshold(L):
        return SpinonResult(L, float(q), norm, None, None, e0, src.value, Method.EXACT.value,
                            flags=["norm_below_threshold"])
    h = float(np.vdot(v, apply_hamiltonian(big, v)).real)
    return SpinonResult(L, float(q), norm, h, h / norm - e0, e0, src.value, Method.EXACT.value)


def sweep(
    gs: StateVector,
    model: SpinModel,
    qs=None,
    e0_source: str | E0Source | None = None,
) -> list[SpinonResult]:
    """Exact results on ``qs`` (default: the full momentum grid)."""
    L = gs.n_qubits
    big = _ensure_extended(model, L)
    e0, src = resolve_e0(big, e0_source)
    qs = MomentumGrid(L).points if qs is None else np.atleast_1d(qs)
    return [dispersion_exact(gs, big, float(q), src, e0=e0) for q in qs]


def polyfit_extrapolate(Ls, values, degree: int = 2) -> tuple[float, np.ndarray]:
    """Fit ``values`` as a polynomial in ``1/L``; returns the ``1/L -> 0`` intercept and coefficients."""
    x = 1.0 / np.asarray(Ls, dtype=float)
    coeffs = np.polyfit(x, np.asarray(values, dtype=float), degree)
    return float(coeffs[-1]), coeffs
