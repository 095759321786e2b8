"""Dense statevector simulator.

Bit ordering is fixed here and inherited everywhere else: qubit 0 is chain
site 0 and the most significant bit of a basis index. Bit value 0 encodes a
spin up, bit value 1 a spin down. :func:`qubit_mask` is the single place that
turns a qubit label into a bit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exceptions import CapacityError, NumericalError
from .pauli import PauliSum, string_masks

MAX_QUBITS = 25
NORM_ATOL = 1e-10


def qubit_mask(qubit: int, n_qubits: int) -> int:
    """Integer mask of ``qubit`` inside a basis index on ``n_qubits`` qubits."""
    return 1 << (n_qubits - 1 - qubit)


def check_capacity(n_qubits: int) -> None:
    if n_qubits > MAX_QUBITS:
        raise CapacityError(f"{n_qubits} qubits exceeds the dense cap of {MAX_QUBITS}")


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator keyed by a 64-bit seed plus an optional path."""
    ss = np.random.SeedSequence(entropy=int(seed) % 2**64, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class StateVector:
    amplitudes: np.ndarray
    normalized: bool = True
    valid: bool = True

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        dim = amps.shape[0]
        if dim < 1 or dim & (dim - 1):
            raise ValueError(f"length {dim} is not a power of two")
        check_capacity(dim.bit_length() - 1)
        self.amplitudes = amps
        if self.normalized and self.valid:
            nrm = float(np.vdot(amps, amps).real)
            if abs(nrm - 1.0) > NORM_ATOL:
                raise ValueError(f"state flagged normalized has norm^2 {nrm!r}")

    @property
    def n_qubits(self) -> int:
        return self.amplitudes.shape[0].bit_length() - 1

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        check_capacity(n_qubits)
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps)

    @classmethod
    def from_bitstring(cls, bits: str) -> "StateVector":
        """Basis state from a string of ``0``/``1`` (or ``u``/``d`` for up/down)."""
        bits = bits.translate(str.maketrans("ud↑↓", "0101"))
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(amps)

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.normalized, self.valid)

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalize(self) -> "StateVector":
        nrm = np.sqrt(self.norm_squared())
        if nrm == 0:
            raise NumericalError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / nrm)

    def kron(self, other: "StateVector") -> "StateVector":
        """Tensor product with ``self`` on the leading (more significant) qubits."""
        return StateVector(
            np.kron(self.amplitudes, other.amplitudes),
            normalized=self.normalized and other.normalized,
        )


class GateKind(str, enum.Enum):
    RY = "RY"
    RZZ = "RZZ"
    RXXPLUSYY = "RXXplusYY"
    H = "H"
    S = "S"
    S_DAGGER = "S_dagger"
    X = "X"
    Z = "Z"
    SWAP = "SWAP"
    PSWAP = "PhasedSWAP"
    GIVENS = "GivensRotation"
    FSWAP = "FermionicSWAP"
    GPHASE = "GlobalPhase"


_ARITY = {
    GateKind.RY: 1, GateKind.H: 1, GateKind.S: 1, GateKind.S_DAGGER: 1, GateKind.X: 1, GateKind.Z: 1,
    GateKind.RZZ: 2, GateKind.RXXPLUSYY: 2, GateKind.SWAP: 2, GateKind.PSWAP: 2,
    GateKind.GIVENS: 2, GateKind.FSWAP: 2, GateKind.GPHASE: 0,
}

_SWAP4 = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    """A gate kind applied to ``targets``, conditioned on all ``controls`` being 1.

    CNOT is ``X`` with one control and a Fredkin gate is ``SWAP`` (or
    ``PhasedSWAP``) with one control.
    """

    kind: GateKind
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if len(self.targets) != _ARITY[kind]:
            raise ValueError(f"{kind.value} acts on {_ARITY[kind]} qubits, got {self.targets}")
        qubits = self.targets + self.controls
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"repeated qubit in {kind.value} {qubits}")
        if any(q < 0 for q in qubits):
            raise ValueError("negative qubit index")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets

    def matrix(self) -> np.ndarray:
        """Unitary on ``targets`` (controls excluded), first target most significant."""
        k, p = self.kind, self.params
        if k is GateKind.RY:
            c, s = np.cos(p[0] / 2), np.sin(p[0] / 2)
            return np.array([[c, -s], [s, c]], dtype=complex)
        if k is GateKind.H:
            return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        if k is GateKind.S:
            return np.diag([1, 1j])
        if k is GateKind.S_DAGGER:
            return np.diag([1, -1j])
        if k is GateKind.X:
            return np.array([[0, 1], [1, 0]], dtype=complex)
        if k is GateKind.Z:
            return np.diag([1.0 + 0j, -1.0])
        if k is GateKind.RZZ:
            a, b = np.exp(-0.5j * p[0]), np.exp(0.5j * p[0])
            return np.diag([a, b, b, a])
        if k is GateKind.RXXPLUSYY:
            c, s = np.cos(p[0]), np.sin(p[0])
            return np.array(
                [[1, 0, 0, 0], [0, c, -1j * s, 0], [0, -1j * s, c, 0], [0, 0, 0, 1]], dtype=complex
            )
        if k is GateKind.SWAP:
            return _SWAP4.copy()
        if k is GateKind.PSWAP:
            return np.exp(1j * p[0]) * _SWAP4
        if k is GateKind.FSWAP:
            m = _SWAP4.copy()
            m[3, 3] = -1
            return m
        if k is GateKind.GIVENS:
            g = givens_mode_matrix(*p)
            m = np.eye(4, dtype=complex)
            # |10> has the first mode occupied, |01> the second
            m[2, 2], m[1, 2] = g[0, 0], g[1, 0]
            m[2, 1], m[1, 1] = g[0, 1], g[1, 1]
            return m
        if k is GateKind.GPHASE:
            return np.array([[np.exp(1j * p[0])]])
        raise AssertionError(k)

    def inverse(self) -> "Gate":
        k = self.kind
        if k in (GateKind.H, GateKind.X, GateKind.Z, GateKind.SWAP, GateKind.FSWAP):
            return self
        if k is GateKind.S:
            return Gate(GateKind.S_DAGGER, self.targets, self.controls)
        if k is GateKind.S_DAGGER:
            return Gate(GateKind.S, self.targets, self.controls)
        if k is GateKind.GIVENS:
            return Gate(k, self.targets, self.controls, (-self.params[0], self.params[1]))
        return Gate(k, self.targets, self.controls, tuple(-x for x in self.params))

    def controlled(self, *controls: int) -> "Gate":
        return Gate(self.kind, self.targets, self.controls + tuple(controls), self.params)


def givens_mode_matrix(theta: float, phi: float) -> np.ndarray:
    """2x2 mode rotation ``[[c, -e^{i phi} s], [e^{-i phi} s, c]]`` (determinant 1)."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -np.exp(1j * phi) * s], [np.exp(-1j * phi) * s, c]])


def ry(t: int, theta: float) -> Gate:
    return Gate(GateKind.RY, (t,), params=(theta,))


def h(t: int) -> Gate:
    return Gate(GateKind.H, (t,))


def x(t: int) -> Gate:
    return Gate(GateKind.X, (t,))


def z(t: int) -> Gate:
    return Gate(GateKind.Z, (t,))


def s_dagger(t: int) -> Gate:
    return Gate(GateKind.S_DAGGER, (t,))


def cnot(c: int, t: int) -> Gate:
    return Gate(GateKind.X, (t,), (c,))


def swap(a: int, b: int) -> Gate:
    return Gate(GateKind.SWAP, (a, b))


def phased_swap(a: int, b: int, q: float) -> Gate:
    return Gate(GateKind.PSWAP, (a, b), params=(q,))


def fredkin(c: int, a: int, b: int) -> Gate:
    return Gate(GateKind.SWAP, (a, b), (c,))


def rzz(a: int, b: int, theta: float) -> Gate:
    return Gate(GateKind.RZZ, (a, b), params=(theta,))


def rxx_plus_yy(a: int, b: int, theta: float) -> Gate:
    return Gate(GateKind.RXXPLUSYY, (a, b), params=(theta,))


def givens(a: int, b: int, theta: float, phi: float = 0.0) -> Gate:
    return Gate(GateKind.GIVENS, (a, b), params=(theta, phi))


def fermionic_swap(a: int, b: int) -> Gate:
    return Gate(GateKind.FSWAP, (a, b))


def global_phase(phi: float) -> Gate:
    return Gate(GateKind.GPHASE, (), params=(phi,))


@dataclass
class Circuit:
    """Gate list over ``n_system`` system qubits followed by ``n_ancilla`` ancillas."""

    n_system: int
    n_ancilla: int = 0
    gates: list[Gate] = field(default_factory=list)

    @property
    def n_qubits(self) -> int:
        return self.n_system + self.n_ancilla

    @property
    def ancillas(self) -> list[int]:
        return list(range(self.n_system, self.n_qubits))

    def append(self, gate: Gate) -> None:
        if any(q >= self.n_qubits for q in gate.qubits):
            raise IndexError(f"{gate} outside a {self.n_qubits}-qubit register")
        self.gates.append(gate)

    def extend(self, gates: Iterable[Gate]) -> None:
        for g in gates:
            self.append(g)

    def inverse(self) -> "Circuit":
        return Circuit(self.n_system, self.n_ancilla, [g.inverse() for g in reversed(self.gates)])

    def count(self, kind: GateKind | str | None = None, n_controls: int | None = None) -> int:
        kinds = None if kind is None else {GateKind(kind)}
        return sum(
            1
            for g in self.gates
            if (kinds is None or g.kind in kinds)
            and (n_controls is None or len(g.controls) == n_controls)
        )

    def fredkin_count(self) -> int:
        return self.count(GateKind.SWAP, 1) + self.count(GateKind.PSWAP, 1)

    def controlled_count(self) -> int:
        return sum(1 for g in self.gates if g.controls)

    def run(self, state: StateVector) -> StateVector:
        if state.n_qubits != self.n_qubits:
            raise ValueError(f"circuit has {self.n_qubits} qubits, state has {state.n_qubits}")
        vec = state.amplitudes.copy()
        for g in self.gates:
            _apply_inplace(vec, self.n_qubits, g)
        return StateVector(vec, state.normalized, state.valid)


def _apply_inplace(vec: np.ndarray, n: int, gate: Gate) -> None:
    if any(q >= n for q in gate.qubits):
        raise IndexError(f"{gate} outside a {n}-qubit register")
    psi = vec.reshape((2,) * n)
    mat = gate.matrix()
    controls = gate.controls
    if controls:
        idx = tuple(1 if q in controls else slice(None) for q in range(n))
        rest = [q for q in range(n) if q not in controls]
        axes = [rest.index(t) for t in gate.targets]
        sub = psi[idx]
    else:
        idx = None
        axes = list(gate.targets)
        sub = psi
    k = len(axes)
    if k == 0:
        sub *= mat[0, 0]
        return
    moved = np.moveaxis(sub, axes, list(range(k)))
    res = np.tensordot(mat.reshape((2,) * (2 * k)), moved, axes=(list(range(k, 2 * k)), list(range(k))))
    res = np.moveaxis(res, list(range(k)), axes)
    if idx is None:
        psi[...] = res
    else:
        psi[idx] = res


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    vec = state.amplitudes.copy()
    _apply_inplace(vec, state.n_qubits, gate)
    return StateVector(vec, state.normalized, state.valid)


def swap_ladder(frm: int, to: int, q: float = 0.0, controls: Sequence[int] = ()) -> list[Gate]:
    """Adjacent phased swaps moving the content of ``frm`` to ``to``.

    Works in either direction; each step carries a factor ``e^{iq}``.
    """
    step = 1 if to >= frm else -1
    gates = []
    for a in range(frm, to, step):
        g = phased_swap(a, a + step, q) if q else swap(a, a + step)
        gates.append(g.controlled(*controls) if controls else g)
    return gates


def apply_swap_ladder(state: StateVector, frm: int, to: int, q: float) -> StateVector:
    """Move the spin on site ``frm`` to site ``to`` collecting ``e^{i (to-frm) q}``."""
    if frm > to:
        raise ValueError(f"ladder runs upwards only, got {frm} -> {to}")
    if to >= state.n_qubits or frm < 0:
        raise IndexError("ladder end outside register")
    vec = state.amplitudes.copy()
    for a in range(frm, to):
        _apply_inplace(vec, state.n_qubits, phased_swap(a, a + 1, q))
    return StateVector(vec, state.normalized, state.valid)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"dimension mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|^2 / (<a|a><b|b>)``; insensitive to global phase."""
    ov = inner_product(a, b)
    return float(abs(ov) ** 2 / (a.norm_squared() * b.norm_squared()))


def apply_pauli_sum(state: StateVector, op: PauliSum) -> np.ndarray:
    """Vector ``op |state>``."""
    n = state.n_qubits
    if op.n_qubits != n:
        raise ValueError("operator and state sizes differ")
    psi = state.amplitudes
    idx = np.arange(psi.shape[0])
    out = np.zeros_like(psi)
    for s, c in op:
        xm, zm, ny = string_masks(s)
        sign = 1 - 2 * (np.bitwise_count(idx & zm).astype(np.int64) & 1)
        # P|b> = i^ny (-1)^{b.z} |b ^ x>
        out[idx ^ xm] += c * (1j**ny) * sign * psi
    return out


def expectation_complex(state: StateVector, op: PauliSum) -> complex:
    return complex(np.vdot(state.amplitudes, apply_pauli_sum(state, op)))


def expectation(state: StateVector, op: PauliSum) -> float:
    """Real ``<state|op|state>`` for Hermitian ``op``."""
    if not op.is_hermitian():
        raise ValueError("expectation requires a Hermitian operator")
    val = expectation_complex(state, op)
    scale = max(1.0, state.norm_squared())
    if abs(val.imag) > 1e-10 * scale:
        raise NumericalError(f"imaginary residue {val.imag!r} in Hermitian expectation")
    return val.real


def marginal_probabilities(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Born probabilities of outcomes on ``qubits`` (first listed qubit most significant)."""
    n = state.n_qubits
    if not qubits:
        raise ValueError("empty qubit list")
    if any(q < 0 or q >= n for q in qubits) or len(set(qubits)) != len(qubits):
        raise IndexError(f"bad qubit list {qubits}")
    probs = (np.abs(state.amplitudes) ** 2).reshape((2,) * n)
    others = tuple(q for q in range(n) if q not in qubits)
    marg = probs.sum(axis=others) if others else probs
    # remaining axes are in ascending qubit order
    order = sorted(qubits)
    marg = np.transpose(marg, [order.index(q) for q in qubits])
    return marg.ravel()


@dataclass
class ShotEstimate:
    n_shots: int
    counts: dict[str, int]
    seed: int

    def __post_init__(self) -> None:
        if sum(self.counts.values()) != self.n_shots:
            raise ValueError("counts do not sum to n_shots")

    def frequency(self, bitstring: str) -> float:
        return self.counts.get(bitstring, 0) / self.n_shots


def sample(
    state: StateVector, qubits: Sequence[int], n_shots: int, seed: int, rng: np.random.Generator | None = None
) -> ShotEstimate:
    """Draw ``n_shots`` measurement outcomes of ``qubits`` from the Born rule."""
    if n_shots < 1:
        raise ValueError("n_shots must be positive")
    p = marginal_probabilities(state, qubits)
    p = p / p.sum()
    gen = rng if rng is not None else make_rng(seed)
    draws = gen.multinomial(n_shots, p)
    k = len(qubits)
    counts = {format(i, f"0{k}b"): int(c) for i, c in enumerate(draws) if c}
    return ShotEstimate(n_shots, counts, seed)


def post_select(
    state: StateVector,
    qubits: Sequence[int],
    outcome: str,
    strict: bool = False,
    discard: bool = False,
) -> tuple[StateVector, float]:
    """Project ``qubits`` onto ``outcome`` and renormalize.

    Returns the conditional state and the outcome probability. With
    ``discard`` the measured qubits are removed from the register. A zero
    probability yields a state flagged ``valid=False`` unless ``strict``.
    """
    if len(outcome) != len(qubits):
        raise ValueError("outcome length differs from qubit list")
    n = state.n_qubits
    psi = state.amplitudes.reshape((2,) * n)
    idx = [slice(None)] * n
    for q, b in zip(qubits, outcome):
        idx[q] = int(b)
    sub = psi[tuple(idx)]
    prob = float(np.vdot(sub, sub).real) / state.norm_squared()
    if discard:
        out = sub.ravel().copy()
    else:
        out = np.zeros_like(psi)
        out[tuple(idx)] = sub
        out = out.ravel()
    if prob <= 0.0:
        if strict:
            raise NumericalError(f"outcome {outcome} on {list(qubits)} has zero probability")
        return StateVector(out, normalized=False, valid=False), 0.0
    out = out / np.sqrt(np.vdot(out, out).real)
    return StateVector(out), prob
