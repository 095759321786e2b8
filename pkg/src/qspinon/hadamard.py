"""Hadamard-test estimation of the spinon norm and dispersion, piece by piece.

The overlap ``s[m][n] = <Psi(m)|Psi(n)>`` and the transition amplitude
``t[m][n] = <Psi(m)|H|Psi(n)>`` are measured for ``m < n`` with one ancilla
(qubit ``L+1``) controlling the swap ladder ``m -> n``; both quantities are
then recombined classically for any momentum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError
from .lcu import fredkin_counts
from .models import SpinModel, apply_hamiltonian, build_hamiltonian, commuting_groups
from .pauli import PauliSum, string_masks
from .spinon import E0Source, Method, SpinonResult, extend_state, norm_threshold, resolve_e0
from .statevector import (
    Circuit,
    StateVector,
    expectation_complex,
    h,
    make_rng,
    s_dagger,
    swap_ladder,
)

PARTS = ("Re", "Im")
SWAP_STRING_MAX_P = 8


def hadamard_circuit(L: int, m: int, n: int, part: str = "Re") -> Circuit:
    """Ancilla H, ancilla-controlled ladder ``m -> n``, optional S-dagger, H."""
    if part not in PARTS:
        raise ConfigError(f"part must be one of {PARTS}")
    if m == n:
        raise ValueError("diagonal overlaps are 1 and need no circuit")
    if m > n:
        raise ValueError(f"use s[n][m] = conj(s[m][n]) for m > n (got {m}, {n})")
    if not 0 <= m < n <= L:
        raise IndexError(f"sites ({m}, {n}) outside 0..{L}")
    anc = L + 1
    circ = Circuit(L + 1, 1)
    circ.append(h(anc))
    circ.extend(swap_ladder(m, n, controls=(anc,)))
    if part == "Im":
        circ.append(s_dagger(anc))
    circ.append(h(anc))
    return circ


def _final_state(gs: StateVector, m: int, n: int, part: str) -> StateVector:
    L = gs.n_qubits
    start = extend_state(gs, m).kron(StateVector.zero(1))
    return hadamard_circuit(L, m, n, part).run(start)


def _branches(final: StateVector) -> tuple[np.ndarray, np.ndarray]:
    v = final.amplitudes.reshape(-1, 2)
    return v[:, 0], v[:, 1]


# ---------- basis rotation and sampling helpers ----------

_H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
_HSDG = _H @ np.diag([1, -1j])


def measurement_basis(group: PauliSum) -> str:
    """Per-qubit basis letter shared by every string in a qubit-wise commuting group."""
    basis = []
    for i in range(group.n_qubits):
        letters = {st[i] for st, _ in group} - {"I"}
        if len(letters) > 1:
            raise ValueError("group is not qubit-wise commuting")
        basis.append(letters.pop() if letters else "Z")
    return "".join(basis)


def _rotate(vec: np.ndarray, n: int, basis: str) -> np.ndarray:
    """Rotate the first ``len(basis)`` qubits of an n-qubit vector so the basis becomes Z."""
    psi = vec.reshape((2,) * n)
    for i, b in enumerate(basis):
        if b == "Z":
            continue
        u = _H if b == "X" else _HSDG
        psi = np.moveaxis(np.tensordot(u, psi, axes=([1], [i])), 0, i)
    return psi.reshape(-1)


def _diag_values(group: PauliSum, n_total: int, indices: np.ndarray) -> np.ndarray:
    """Eigenvalue of the rotated group on basis ``indices`` of an n_total register.

    The group occupies the leading qubits; trailing qubits are ignored.
    """
    shift = n_total - group.n_qubits
    shifted = indices >> shift
    out = np.zeros(indices.shape[0])
    for st, c in group:
        x_mask, z_mask, _ = string_masks(st)
        sign = 1 - 2 * (np.bitwise_count(shifted & (x_mask | z_mask)).astype(np.int64) & 1)
        out += c.real * sign
    return out


def _draw(probs: np.ndarray, n_shots: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    probs = probs / probs.sum()
    draws = rng.multinomial(n_shots, probs)
    idx = np.flatnonzero(draws)
    return idx, draws[idx]


def _mean_var(values: np.ndarray, counts: np.ndarray) -> tuple[float, float]:
    """Sample mean and variance of the mean."""
    n = counts.sum()
    mean = float(values @ counts / n)
    if n < 2:
        return mean, math.inf
    var = float(((values - mean) ** 2) @ counts / (n - 1))
    return mean, var / n


def _effective_shots(n_shots: int, success_probability: float, rng: np.random.Generator) -> int:
    if success_probability >= 1.0:
        return n_shots
    return int(rng.binomial(n_shots, success_probability))


@dataclass
class Estimate:
    value: float
    variance: float
    shots: int


def _rng(seed: int, *key: int) -> np.random.Generator:
    return make_rng(seed, *key)


def _part_code(part: str) -> int:
    return PARTS.index(part)


# ---------- overlaps ----------


def overlap_estimate(
    gs: StateVector,
    m: int,
    n: int,
    part: str = "Re",
    mode: str = "exact",
    n_shots: int | None = None,
    seed: int = 0,
    success_probability: float = 1.0,
) -> Estimate:
    final = _final_state(gs, m, n, part)
    b0, b1 = _branches(final)
    p0 = float(np.vdot(b0, b0).real)
    p1 = float(np.vdot(b1, b1).real)
    if mode == "exact":
        return Estimate(p0 - p1, 0.0, 0)
    if mode != "sampled" or not n_shots:
        raise ConfigError("sampled mode needs a positive shot count")
    rng = _rng(seed, 0, m, n, _part_code(part))
    shots = _effective_shots(n_shots, success_probability, rng)
    if shots == 0:
        return Estimate(0.0, math.inf, 0)
    n0 = rng.binomial(shots, min(max(p0 / (p0 + p1), 0.0), 1.0))
    d = (2 * n0 - shots) / shots
    return Estimate(d, (1 - d * d) / shots if shots > 1 else math.inf, shots)


def hadamard_overlap(
    gs: StateVector,
    m: int,
    n: int,
    part: str = "Re",
    mode: str = "exact",
    n_shots: int | None = None,
    seed: int = 0,
) -> float:
    """``p0 - p1`` of the Hadamard test: Re (or Im) of ``<Psi(m)|Psi(n)>``."""
    return overlap_estimate(gs, m, n, part, mode, n_shots, seed).value


# ---------- transition amplitudes ----------


def _hamiltonian_groups(model: SpinModel) -> list[PauliSum]:
    return commuting_groups(build_hamiltonian(model))


def transition_estimate(
    gs: StateVector,
    model: SpinModel,
    m: int,
    n: int,
    part: str = "Re",
    mode: str = "exact",
    n_shots: int | None = None,
    seed: int = 0,
    success_probability: float = 1.0,
    groups: list[PauliSum] | None = None,
) -> Estimate:
    """Re or Im of ``t[m][n]``; ``m == n`` is measured without the ancilla.

    The ancilla outcome ``a`` collapses the system to ``Psi(m) +/- Psi(n)``
    (or the S-dagger variant); the shot average of ``(-1)^a h(x)`` over the
    rotated Hamiltonian groups gives the requested part directly, because
    the branch probabilities already weight each collapsed energy.
    """
    L = gs.n_qubits
    big = model if model.L == L + 1 else model.resized(L + 1)
    if m == n:
        if part == "Im":
            return Estimate(0.0, 0.0, 0)
        psi = extend_state(gs, m).amplitudes
        if mode == "exact":
            return Estimate(float(np.vdot(psi, apply_hamiltonian(big, psi)).real), 0.0, 0)
        groups = groups or _hamiltonian_groups(big)
        total, var, used = 0.0, 0.0, []
        for g_idx, g in enumerate(groups):
            rng = _rng(seed, 2, m, n, 0, g_idx)
            shots = _effective_shots(n_shots, success_probability, rng)
            used.append(shots)
            if shots == 0:
                return Estimate(math.nan, math.inf, 0)
            rotated = _rotate(psi, L + 1, measurement_basis(g))
            idx, cnt = _draw(np.abs(rotated) ** 2, shots, rng)
            mu, v = _mean_var(_diag_values(g, L + 1, idx), cnt)
            total += mu
            var += v
        return Estimate(total, var, min(used))
    if m > n:
        est = transition_estimate(gs, model, n, m, part, mode, n_shots, seed, success_probability, groups)
        return Estimate(-est.value if part == "Im" else est.value, est.variance, est.shots)

    final = _final_state(gs, m, n, part)
    if mode == "exact":
        b0, b1 = _branches(final)
        e0 = np.vdot(b0, apply_hamiltonian(big, b0)).real
        e1 = np.vdot(b1, apply_hamiltonian(big, b1)).real
        return Estimate(float(e0 - e1), 0.0, 0)
    if mode != "sampled" or not n_shots:
        raise ConfigError("sampled mode needs a positive shot count")
    groups = groups or _hamiltonian_groups(big)
    total, var, used = 0.0, 0.0, []
    for g_idx, g in enumerate(groups):
        rng = _rng(seed, 1, m, n, _part_code(part), g_idx)
        shots = _effective_shots(n_shots, success_probability, rng)
        used.append(shots)
        if shots == 0:
            return Estimate(math.nan, math.inf, 0)
        rotated = _rotate(final.amplitudes, L + 2, measurement_basis(g) + "Z")
        idx, cnt = _draw(np.abs(rotated) ** 2, shots, rng)
        # ancilla is the last qubit, i.e. the lowest bit
        sign = 1 - 2 * (idx & 1)
        mu, v = _mean_var(sign * _diag_values(g, L + 2, idx), cnt)
        total += mu
        var += v
    return Estimate(total, var, min(used))


def transition_amplitude(
    gs: StateVector,
    model: SpinModel,
    m: int,
    n: int,
    mode: str = "exact",
    n_shots: int | None = None,
    seed: int = 0,
) -> complex:
    re = transition_estimate(gs, model, m, n, "Re", mode, n_shots, seed).value
    im = transition_estimate(gs, model, m, n, "Im", mode, n_shots, seed).value
    return complex(re, im)


# ---------- the matrices and classical reconstruction ----------


def _cx(z) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


@dataclass
class OverlapMatrix:
    """Overlaps ``s`` and transition amplitudes ``t`` with per-entry variances.

    Entries not yet measured are NaN. Variances hold the Re and Im parts
    separately; they are zero in exact mode.
    """

    L: int
    s: np.ndarray
    t: np.ndarray | None = None
    s_var: np.ndarray | None = None
    t_var: np.ndarray | None = None
    n_shots: int | None = None
    seed: int | None = None
    mode: str = "exact"
    flags: list[str] = field(default_factory=list)

    @classmethod
    def empty(cls, L: int, with_t: bool = True, **kw) -> "OverlapMatrix":
        d = L + 1
        nan = np.full((d, d), np.nan + 0j)
        return cls(L, nan.copy(), nan.copy() if with_t else None,
                   np.zeros((d, d, 2)), np.zeros((d, d, 2)) if with_t else None, **kw)

    @property
    def dim(self) -> int:
        return self.L + 1

    def complete(self, which: str = "s") -> bool:
        mat = self.s if which == "s" else self.t
        return mat is not None and not np.isnan(mat[np.triu_indices(self.dim)]).any()

    def is_hermitian(self, atol: float = 1e-10) -> bool:
        ok = np.allclose(self.s, self.s.conj().T, atol=atol)
        if self.t is not None:
            ok &= np.allclose(self.t, self.t.conj().T, atol=atol)
        return bool(ok)

    def to_dict(self) -> dict:
        def mat(a):
            return None if a is None else [[_cx(z) for z in row] for row in a]

        return {
            "L": self.L,
            "mode": self.mode,
            "n_shots": self.n_shots,
            "seed": self.seed,
            "s": mat(self.s),
            "t": mat(self.t),
            "s_var": None if self.s_var is None else self.s_var.tolist(),
            "t_var": None if self.t_var is None else self.t_var.tolist(),
            "flags": self.flags,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "OverlapMatrix":
        d = json.loads(text)

        def mat(a):
            return None if a is None else np.array([[complex(*z) for z in row] for row in a])

        def arr(a):
            return None if a is None else np.array(a, dtype=float)

        return cls(d["L"], mat(d["s"]), mat(d["t"]), arr(d["s_var"]), arr(d["t_var"]),
                   d["n_shots"], d["seed"], d["mode"], d["flags"])


def measure_overlap_matrix(
    gs: StateVector,
    model: SpinModel | None = None,
    mode: str = "exact",
    n_shots: int | None = None,
    seed: int = 0,
    success_probability: float = 1.0,
) -> OverlapMatrix:
    """Fill ``s`` (and ``t`` when a model is given) from Hadamard tests on the upper triangle."""
    L = gs.n_qubits
    om = OverlapMatrix.empty(L, with_t=model is not None, n_shots=n_shots, seed=seed, mode=mode)
    groups = None
    if model is not None:
        big = model if model.L == L + 1 else model.resized(L + 1)
        groups = _hamiltonian_groups(big)
    d = L + 1
    for m in range(d):
        om.s[m, m] = 1.0
        for n in range(m + 1, d):
            re = overlap_estimate(gs, m, n, "Re", mode, n_shots, seed, success_probability)
            im = overlap_estimate(gs, m, n, "Im", mode, n_shots, seed, success_probability)
            om.s[m, n] = complex(re.value, im.value)
            om.s[n, m] = np.conj(om.s[m, n])
            om.s_var[m, n] = om.s_var[n, m] = (re.variance, im.variance)
            if not (math.isfinite(re.variance) and math.isfinite(im.variance)):
                om.flags.append(f"s[{m}][{n}] high-variance")
    if model is None:
        return om
    for m in range(d):
        for n in range(m, d):
            re = transition_estimate(gs, big, m, n, "Re", mode, n_shots, seed, success_probability, groups)
            im = transition_estimate(gs, big, m, n, "Im", mode, n_shots, seed, success_probability, groups)
            om.t[m, n] = complex(re.value, im.value)
            om.t[n, m] = np.conj(om.t[m, n])
            om.t_var[m, n] = om.t_var[n, m] = (re.variance, im.variance)
            if not (math.isfinite(re.variance) and math.isfinite(im.variance)):
                om.flags.append(f"t[{m}][{n}] high-variance")
    return om


def _phase_weights(d: int, q: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a, b = np.triu_indices(d, k=1)
    phi = q * (b - a)
    return a, b, phi


def reconstruct_norm(s: OverlapMatrix, q: float) -> float:
    """``N(q) = 1 + 2/(L+1) sum_{a<b} Re(e^{iq(b-a)} s[a][b])``."""
    if not s.complete("s"):
        raise ValueError("overlap matrix has unmeasured entries")
    a, b, phi = _phase_weights(s.dim, q)
    return float(1.0 + 2.0 / s.dim * np.sum((np.exp(1j * phi) * s.s[a, b]).real))


def _norm_variance(s: OverlapMatrix, q: float) -> float:
    a, b, phi = _phase_weights(s.dim, q)
    var = s.s_var[a, b]
    return float((2.0 / s.dim) ** 2 * np.sum(np.cos(phi) ** 2 * var[:, 0] + np.sin(phi) ** 2 * var[:, 1]))


def reconstruct_energy(
    t: OverlapMatrix,
    s: OverlapMatrix,
    q: float,
    model: SpinModel,
    e0_source: str | E0Source | None = None,
    e0: float | None = None,
) -> SpinonResult:
    """Dispersion from the measured matrices, with first-order propagated errors."""
    if t.t is None or not t.complete("t"):
        raise ValueError("transition matrix has unmeasured entries")
    L = s.L
    big = model if model.L == L + 1 else model.resized(L + 1)
    if e0 is None:
        e0, src = resolve_e0(big, e0_source)
    else:
        src = E0Source(e0_source or E0Source.ED)
    d = t.dim
    a, b, phi = _phase_weights(d, q)
    diag = np.trace(t.t).real
    h = float((diag + 2 * np.sum((np.exp(1j * phi) * t.t[a, b]).real)) / d)
    norm = reconstruct_norm(s, q)
    var_n = _norm_variance(s, q)
    tv = t.t_var
    var_h = float((np.sum(tv[np.arange(d), np.arange(d), 0])
                   + 4 * np.sum(np.cos(phi) ** 2 * tv[a, b, 0] + np.sin(phi) ** 2 * tv[a, b, 1])) / d**2)
    sampled = s.mode == "sampled"
    common = dict(shots=s.n_shots if sampled else None, seed=s.seed if sampled else None,
                  sigma_norm=math.sqrt(var_n) if sampled else None)
    if norm <= norm_threshold(L):
        return SpinonResult(L, float(q), norm, h, None, e0, src.value, Method.HADAMARD.value,
                            flags=["norm_below_threshold"], **common)
    eps = h / norm - e0
    sig = math.sqrt(var_h / norm**2 + (h * math.sqrt(var_n) / norm**2) ** 2)
    return SpinonResult(L, float(q), norm, h, eps, e0, src.value, Method.HADAMARD.value,
                        sigma_epsilon=sig if sampled else None, **common)


# ---------- SWAP strings as Pauli sums ----------


def _swap_pauli(n_qubits: int, i: int, j: int) -> PauliSum:
    out = PauliSum(n_qubits)
    for p in "IXYZ":
        s = ["I"] * n_qubits
        if p != "I":
            s[i] = s[j] = p
        out.add_term("".join(s), 0.5)
    return out


def swap_string_pauli(m: int, n: int) -> PauliSum:
    """Pauli expansion of the ladder ``SWAP_{n-1,n} ... SWAP_{m,m+1}`` on qubits ``m..n``.

    The result acts on ``n - m + 1`` qubits (qubit 0 is site ``m``); use
    ``PauliSum.embed`` to place it in a larger register.
    """
    if not 0 <= m <= n:
        raise ValueError(f"need 0 <= m <= n, got {m}, {n}")
    p = n - m
    if p > SWAP_STRING_MAX_P:
        raise ValueError(f"ladder length {p} above cap {SWAP_STRING_MAX_P}")
    width = p + 1
    out = PauliSum.identity(width)
    for k in range(p):
        out = _swap_pauli(width, k, k + 1) * out
    return out.simplify()


def overlap_via_pauli(gs: StateVector, m: int, n: int) -> complex:
    """``<Psi(m)|Psi(n)>`` as a sum of Pauli expectations in ``Psi(m)`` (verification route)."""
    L = gs.n_qubits
    op = swap_string_pauli(m, n).embed(L + 1, m)
    return expectation_complex(extend_state(gs, m), op)


def circuit_counts(L: int, n_groups: int) -> dict:
    if L < 2 or n_groups < 1:
        raise ValueError("need L >= 2 and at least one measurement group")
    return {
        "norm_circuits": L * (L + 1) // 2,
        "energy_circuits": n_groups * (L + 1) * (L + 2) // 2,
        "fredkin_per_lcu": fredkin_counts(L),
    }
