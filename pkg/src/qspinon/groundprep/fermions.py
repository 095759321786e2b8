"""Free-fermion states compiled to Givens networks, and the Gutzwiller route.

Fermionic modes are Jordan-Wigner ordered along the qubit register and an
occupied mode is a qubit in ``|1>``. For spin chains that makes a fermion a
down spin.
"""

from __future__ import annotations

import math

import numpy as np

from ..exceptions import CapacityError, NumericalError
from ..models import energy, ground_state_ed, haldane_shastry, xy_model
from ..statevector import (
    MAX_QUBITS,
    Circuit,
    StateVector,
    cnot,
    fermionic_swap,
    fidelity,
    givens,
    givens_mode_matrix,
    global_phase,
    marginal_probabilities,
    post_select,
    sample,
    x,
    z,
)
from .common import PrepResult


def closed_shell_momenta(L: int, n_particles: int) -> np.ndarray:
    """Momenta of a closed-shell filling of ``n_particles`` lowest modes of ``-cos k``.

    Odd fillings use periodic quantization ``2 pi n / L``; even fillings use
    the antiperiodic grid ``2 pi (n + 1/2) / L``. This matches the fermion
    boundary condition that a periodic spin ring induces under Jordan-Wigner.
    """
    if not 0 < n_particles <= L:
        raise ValueError("particle number out of range")
    if n_particles % 2:
        half = (n_particles - 1) // 2
        ns = np.arange(-half, half + 1, dtype=float)
    else:
        ns = np.arange(-n_particles // 2, n_particles // 2) + 0.5
    return 2 * np.pi * ns / L


def boundary_sign(n_particles: int) -> int:
    """Sign of the wrap-around hopping term for the twisted fermion ring."""
    return 1 if n_particles % 2 else -1


def plane_wave_orbitals(L: int, momenta: np.ndarray) -> np.ndarray:
    j = np.arange(L)
    return np.exp(1j * np.outer(momenta, j)) / np.sqrt(L)


def hopping_matrix(L: int, t: float, n_particles: int) -> np.ndarray:
    """Single-particle ``-t`` ring hopping with the matching boundary twist."""
    h = np.zeros((L, L))
    for i in range(L - 1):
        h[i, i + 1] = h[i + 1, i] = -t
    h[L - 1, 0] += -t * boundary_sign(n_particles)
    h[0, L - 1] += -t * boundary_sign(n_particles)
    return h


def givens_decomposition(orbitals: np.ndarray, atol: float = 1e-13):
    """Reduce ``orbitals`` (rows orthonormal) to ``[D 0]`` by adjacent column rotations.

    Returns ``(rotations, det_phase)`` where ``rotations`` is a list of
    ``(p, theta, phi)`` applied to columns ``(p, p+1)`` in order, and
    ``det_phase = det(D)``.
    """
    Q = np.array(orbitals, dtype=complex)
    N, L = Q.shape
    rotations = []
    for i in range(N):
        for c in range(L - 1, i, -1):
            a, b = Q[i, c - 1], Q[i, c]
            if abs(b) < atol:
                continue
            theta = math.atan2(abs(b), abs(a))
            phi = float(np.angle(b) - (np.angle(a) if abs(a) > atol else 0.0))
            Q[:, [c - 1, c]] = Q[:, [c - 1, c]] @ givens_mode_matrix(theta, phi)
            rotations.append((c - 1, theta, phi))
    D = Q[:, :N]
    if np.abs(Q[:, N:]).max(initial=0.0) > 1e-9 or np.abs(D - np.diag(np.diag(D))).max() > 1e-9:
        raise NumericalError("orbital matrix did not reduce to diagonal form")
    return rotations, complex(np.prod(np.diag(D)))


def slater_circuit(orbitals: np.ndarray, offset: int = 0) -> list:
    """Gates preparing the Slater determinant of ``orbitals`` from the vacuum.

    The register occupies qubits ``offset .. offset + L - 1``. The output
    carries the exact determinant phase through a global-phase gate.
    """
    N, L = orbitals.shape
    rotations, det_phase = givens_decomposition(orbitals)
    gates = [x(offset + p) for p in range(N)]
    for p, theta, phi in reversed(rotations):
        gates.append(givens(offset + p, offset + p + 1, theta, -phi))
    ang = float(np.angle(det_phase))
    if abs(ang) > 1e-15:
        gates.append(global_phase(ang))
    return gates


def circuit_depth(circuit: Circuit) -> int:
    """Greedy layer count, ignoring global-phase gates."""
    level = [0] * circuit.n_qubits
    for g in circuit.gates:
        if not g.qubits:
            continue
        d = max(level[q] for q in g.qubits) + 1
        for q in g.qubits:
            level[q] = d
    return max(level, default=0)


def xy_ground_state(
    L: int, as_circuit: bool = True, J: float = 1.0, staggered: bool = True
) -> PrepResult:
    """Half-filled free-fermion ground state of ``-J sum (SxSx + SySy)``.

    Circuit mode compiles the Slater determinant into X gates plus a Givens
    network; otherwise the state comes from exact diagonalization.

    With ``staggered`` (the default) a Z is applied on every odd site. That
    sublattice rotation flips the sign of the XY coupling and gives the state
    the sign structure of antiferromagnetic ground states, which is what a
    warm start for the Heisenberg or Haldane-Shastry ring needs. The reference
    ground state is rotated the same way.
    """
    if L % 2:
        raise ValueError(f"XY warm start needs even L, got {L}")
    model = xy_model(L, -J if staggered else J)
    ref = ground_state_ed(model)
    circ = None
    if as_circuit:
        orbitals = plane_wave_orbitals(L, closed_shell_momenta(L, L // 2))
        circ = Circuit(L)
        circ.extend(slater_circuit(orbitals))
        if staggered:
            circ.extend(z(i) for i in range(1, L, 2))
        state = circ.run(StateVector.zero(L))
    else:
        state = ref.ground_state
    return PrepResult(
        route="xy",
        L=L,
        state=state,
        energy=energy(model, state),
        infidelity=1 - fidelity(state, ref.ground_state),
        circuit=circ,
    )


def fermi_sea_circuit(L: int) -> Circuit:
    """Spinful half-filled Fermi sea: up modes on qubits 0..L-1, down on L..2L-1."""
    if L % 2:
        raise ValueError(f"closed-shell Fermi sea needs even L, got {L}")
    if 2 * L > MAX_QUBITS:
        raise CapacityError(f"Fermi sea on {2 * L} qubits exceeds the dense cap")
    orbitals = plane_wave_orbitals(L, closed_shell_momenta(L, L // 2))
    circ = Circuit(2 * L)
    circ.extend(slater_circuit(orbitals, offset=0))
    circ.extend(slater_circuit(orbitals, offset=L))
    return circ


def fermi_sea_state(L: int) -> StateVector:
    return fermi_sea_circuit(L).run(StateVector.zero(2 * L))


def tight_binding_energy(state: StateVector, L: int, t: float = 1.0) -> float:
    """``<H_tb>`` for the two-register layout with the closed-shell boundary twist.

    Under Jordan-Wigner the twisted fermion ring is a plain periodic XY ring
    (the wrap-around string sign cancels the twist), with ``jxy = -2t``.
    """
    from ..models import ExchangeOperator

    vec = state.amplitudes
    total = 0.0
    for offset in (0, L):
        bonds = [(offset + i, offset + (i + 1) % L, 0.0, -2 * t) for i in range(L)]
        op = ExchangeOperator(2 * L, bonds)
        total += float(np.vdot(vec, op.matvec(vec)).real)
    return total


def interleave_network(L: int) -> list:
    """Fermionic swaps reordering ``(up_0..up_{L-1}, dn_0..dn_{L-1})`` to site order.

    Afterwards qubit ``2i`` holds ``up_i`` and qubit ``2i+1`` holds ``dn_i``.
    """
    gates = []
    for i in range(L):
        for p in range(L + i, 2 * i + 1, -1):
            gates.append(fermionic_swap(p - 1, p))
    return gates


def gutzwiller_circuit(L: int) -> Circuit:
    """Fermi sea, fermionic reordering, then CNOT from each up mode onto its down partner.

    Success is all odd qubits (the down register) reading 1.
    """
    circ = fermi_sea_circuit(L)
    circ.extend(interleave_network(L))
    for i in range(L):
        circ.append(cnot(2 * i, 2 * i + 1))
    return circ


def gutzwiller_project(state: StateVector, L: int) -> StateVector:
    """Apply ``prod_i (1 - n_up,i n_dn,i)`` in the two-register layout (unnormalized)."""
    idx = np.arange(2 ** (2 * L))
    up = idx >> L
    dn = idx & ((1 << L) - 1)
    keep = (up & dn) == 0
    return StateVector(np.where(keep, state.amplitudes, 0), normalized=False)


def gutzwiller_ground_state(
    L: int, mode: str = "statevector_project", n_shots: int | None = None, seed: int = 0, J: float = 1.0
) -> PrepResult:
    """Haldane-Shastry ground state from the Gutzwiller-projected Fermi sea."""
    if L % 2:
        raise ValueError(f"Gutzwiller route needs even L, got {L}")
    if L > 12:
        raise CapacityError(f"Gutzwiller circuit on {2 * L} qubits exceeds the dense cap")
    circ = gutzwiller_circuit(L)
    full = circ.run(StateVector.zero(2 * L))
    down = [2 * i + 1 for i in range(L)]
    p_exact = float(marginal_probabilities(full, down)[-1])
    if mode in ("statevector_project", "statevector"):
        p_success = p_exact
    elif mode == "sampled":
        if not n_shots:
            raise ValueError("sampled mode needs n_shots")
        shots = sample(full, down, n_shots, seed)
        hits = shots.counts.get("1" * L, 0)
        if hits == 0:
            raise NumericalError(f"no successful post-selections in {n_shots} shots")
        p_success = hits / n_shots
    else:
        raise ValueError(f"unknown mode {mode!r}")
    selected, _ = post_select(full, down, "1" * L, strict=True, discard=True)
    # occupied up mode = spin up = bit 0
    spin_vec = selected.amplitudes.reshape((2,) * L)
    spin_vec = np.flip(spin_vec, axis=tuple(range(L))).ravel()
    state = StateVector(spin_vec)
    model = haldane_shastry(L, J)
    ref = ground_state_ed(model)
    return PrepResult(
        route="gutzwiller",
        L=L,
        state=state,
        energy=energy(model, state),
        infidelity=1 - fidelity(state, ref.ground_state),
        success_probability=p_success,
        seed=seed if mode == "sampled" else None,
        circuit=circ,
    )


def gutzwiller_success_model(L: int) -> float:
    """Empirical scaling ``2^{-sqrt(2) L / 2}`` of the all-ones readout."""
    return 2.0 ** (-math.sqrt(2) * L / 2)
