"""Hamiltonian-variational circuits and their optimization.

Each layer applies ``RZZ(a) RXXplusYY(b)`` on even bonds, then ``RZZ(c)
RXXplusYY(d)`` on odd bonds, with one shared angle per block. Both gates
conserve Sz, so the optimizer works on the Sz = 0 sector only; the generic
circuit simulator is kept for cross-checks.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from ..exceptions import ConfigError
from ..models import ModelKind, SpinModel, ground_state_ed, sector_operator
from .._kernels import pair_hop, pair_rotation, sector_states
from ..statevector import Circuit, StateVector, make_rng, rxx_plus_yy, rzz
from .common import PrepResult, vbc_state
from .fermions import xy_ground_state


class WarmStart(str, enum.Enum):
    VBC = "vbc"
    XY = "xy"


# objective(x) -> (value, gradient or None); returns (x_best, f_best, n_evals, converged)
Optimizer = Callable[[Callable[[np.ndarray], tuple[float, np.ndarray]], np.ndarray, bool], tuple]


def scipy_optimizer(method: str = "L-BFGS-B", tol: float = 1e-8, max_evals: int = 10_000) -> Optimizer:
    def run(objective, x0, with_grad):
        if with_grad:
            res = minimize(objective, x0, jac=True, method=method, tol=tol,
                           options={"maxfun": max_evals, "maxiter": max_evals})
        else:
            res = minimize(lambda v: objective(v)[0], x0, method="Nelder-Mead", tol=tol,
                           options={"maxfev": max_evals, "xatol": tol, "fatol": tol})
        return res.x, float(res.fun), int(res.nfev), bool(res.success)

    return run


@dataclass
class VqeConfig:
    """``layers=None`` means L/2. ``gradient`` is ``adjoint`` or ``finite-difference``."""

    layers: int | None = None
    init_scheme: str = "near_identity"
    initial_params: np.ndarray | None = None
    restarts: int = 10
    seed: int = 0
    gradient: str = "adjoint"
    tol: float = 1e-8
    max_evals: int = 10_000
    init_width: float = 0.01
    optimizer: Optimizer | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.init_scheme not in ("near_identity", "supplied"):
            raise ConfigError(f"unknown init scheme {self.init_scheme!r}")
        if self.init_scheme == "supplied" and self.initial_params is None:
            raise ConfigError("supplied init needs initial_params")
        if self.gradient not in ("adjoint", "finite-difference"):
            raise ConfigError(f"unknown gradient mode {self.gradient!r}")
        if self.restarts < 1:
            raise ConfigError("need at least one restart")
        if self.layers is not None and self.layers < 0:
            raise ConfigError("layers must be non-negative")

    def n_layers(self, L: int) -> int:
        return L // 2 if self.layers is None else self.layers


def hva_bonds(L: int) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    if L % 2 or L < 2:
        raise ValueError(f"HVA needs even L >= 2, got {L}")
    even = [(2 * i, 2 * i + 1) for i in range(L // 2)]
    odd = [(2 * i + 1, (2 * i + 2) % L) for i in range(L // 2)]
    return even, odd


def hva_circuit(L: int, params) -> Circuit:
    params = np.asarray(params, dtype=float)
    if params.size % 4:
        raise ValueError("HVA takes 4 parameters per layer")
    even, odd = hva_bonds(L)
    circ = Circuit(L)
    for a, b, c, d in params.reshape(-1, 4):
        for bonds, tz, txy in ((even, a, b), (odd, c, d)):
            circ.extend(rzz(i, j, tz) for i, j in bonds)
            circ.extend(rxx_plus_yy(i, j, txy) for i, j in bonds)
    return circ


class SectorHva:
    """HVA evolution and energy gradients restricted to Sz = 0."""

    def __init__(self, model: SpinModel, layers: int):
        L = model.L
        even, odd = hva_bonds(L)
        self.L, self.layers = L, layers
        self.states = sector_states(L, L // 2)
        lookup = np.full(2**L, -1, dtype=np.int64)
        lookup[self.states] = np.arange(self.states.size)
        self.op = sector_operator(model, L // 2)
        # order inside a layer: zz even, xy even, zz odd, xy odd
        self.blocks = []
        for bonds in (even, odd):
            zz = np.zeros(self.states.size)
            pairs = []
            for i, j in bonds:
                mi, mj = 1 << (L - 1 - i), 1 << (L - 1 - j)
                bi, bj = (self.states & mi) != 0, (self.states & mj) != 0
                zz += np.where(bi == bj, 1.0, -1.0)
                src = np.flatnonzero(~bi & bj)
                pairs.append((src, lookup[self.states[src] ^ (mi | mj)]))
            self.blocks.append(("zz", zz))
            ia = np.array([p[0] for p in pairs])
            ib = np.array([p[1] for p in pairs])
            self.blocks.append(("xy", (ia, ib)))

    @property
    def n_params(self) -> int:
        return 4 * self.layers

    def restrict(self, state: StateVector) -> np.ndarray:
        return state.amplitudes[self.states].astype(complex)

    def embed(self, vec: np.ndarray) -> StateVector:
        out = np.zeros(2**self.L, dtype=complex)
        out[self.states] = vec
        return StateVector(out / np.linalg.norm(out))

    def _apply(self, v: np.ndarray, k: int, theta: float) -> np.ndarray:
        kind, data = self.blocks[k % 4]
        if kind == "zz":
            return v * np.exp(-0.5j * theta * data)
        return pair_rotation(v.copy(), data[0], data[1], np.cos(theta), np.sin(theta))

    def _generator(self, v: np.ndarray, k: int) -> np.ndarray:
        kind, data = self.blocks[k % 4]
        if kind == "zz":
            return data * v
        return pair_hop(v, data[0], data[1], np.empty_like(v))

    def forward(self, params, psi0: np.ndarray) -> np.ndarray:
        v = psi0
        for k, t in enumerate(params):
            v = self._apply(v, k, t)
        return v

    def energy(self, params, psi0: np.ndarray) -> float:
        v = self.forward(params, psi0)
        return float(np.vdot(v, self.op.matvec(v)).real)

    def energy_and_grad(self, params, psi0: np.ndarray) -> tuple[float, np.ndarray]:
        """Energy and adjoint-mode gradient; ``dU_k/dt = -i/2 G_k U_k``."""
        v = self.forward(params, psi0)
        lam = self.op.matvec(v)
        e = float(np.vdot(v, lam).real)
        grad = np.empty(len(params))
        for k in range(len(params) - 1, -1, -1):
            grad[k] = np.vdot(lam, self._generator(v, k)).imag
            v = self._apply(v, k, -params[k])
            lam = self._apply(lam, k, -params[k])
        return e, grad


def _fd_objective(engine: SectorHva, psi0: np.ndarray, h: float = 1e-6):
    def f(x):
        e = engine.energy(x, psi0)
        g = np.empty_like(x)
        for k in range(x.size):
            d = np.zeros_like(x)
            d[k] = h
            g[k] = (engine.energy(x + d, psi0) - engine.energy(x - d, psi0)) / (2 * h)
        return e, g

    return f


def warm_start_state(L: int, warm_start: WarmStart | str) -> StateVector:
    ws = WarmStart(warm_start)
    if ws is WarmStart.VBC:
        return vbc_state(L)
    return xy_ground_state(L, as_circuit=False).state


def vqe_optimize(model: SpinModel, cfg: VqeConfig, warm_start: WarmStart | str = WarmStart.XY) -> PrepResult:
    """Minimize ``<H>`` over HVA angles; best of ``cfg.restarts`` seeded starts."""
    if model.kind is ModelKind.XY:
        raise ConfigError("VQE targets the Heisenberg or Haldane-Shastry ring")
    L = model.L
    layers = cfg.n_layers(L)
    engine = SectorHva(model, layers)
    psi0 = engine.restrict(warm_start_state(L, warm_start))
    ref = ground_state_ed(model)
    ref_vec = engine.restrict(ref.ground_state)

    if cfg.gradient == "adjoint":
        objective = lambda x: engine.energy_and_grad(x, psi0)  # noqa: E731
    else:
        objective = _fd_objective(engine, psi0)
    optimizer = cfg.optimizer or scipy_optimizer(tol=cfg.tol, max_evals=cfg.max_evals)

    best = None
    converged_any = False
    n = engine.n_params
    for r in range(cfg.restarts if n else 1):
        if cfg.init_scheme == "supplied":
            x0 = np.asarray(cfg.initial_params, dtype=float)
            if x0.size != n:
                raise ConfigError(f"expected {n} initial parameters, got {x0.size}")
        else:
            x0 = make_rng(cfg.seed, r).uniform(-cfg.init_width, cfg.init_width, n)
        if n == 0:
            x, fval, conv = x0, engine.energy(x0, psi0), True
        else:
            x, fval, _, conv = optimizer(objective, x0, True)
        converged_any |= conv
        if best is None or fval < best[1]:
            best = (np.asarray(x, dtype=float), fval)
        if cfg.init_scheme == "supplied":
            break

    x_best, _ = best
    flags = [] if converged_any else ["not_converged"]
    if model.kind is ModelKind.HALDANE_SHASTRY:
        flags.append("experimental")
    v = engine.forward(x_best, psi0)
    e = float(np.vdot(v, engine.op.matvec(v)).real)
    infid = 1.0 - abs(np.vdot(ref_vec, v)) ** 2
    circ = hva_circuit(L, x_best)
    return PrepResult(
        route="vqe",
        L=L,
        state=engine.embed(v),
        energy=e,
        infidelity=infid,
        params=list(x_best),
        seed=cfg.seed,
        relative_energy_error=abs((e - ref.ground_energy) / ref.ground_energy),
        flags=flags,
        circuit=circ,
    )
