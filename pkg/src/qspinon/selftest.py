"""Seeded property checks runnable without pytest."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .groundprep import gutzwiller_project, hva_circuit
from .hadamard import measure_overlap_matrix
from .models import haldane_shastry, heisenberg, total_sz
from .spinon import norm_exact
from .statevector import (
    Circuit,
    StateVector,
    fredkin,
    givens,
    h,
    make_rng,
    phased_swap,
    rxx_plus_yy,
    ry,
    rzz,
    s_dagger,
)


def random_state(n: int, rng: np.random.Generator, n_down: int | None = None) -> StateVector:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    if n_down is not None:
        mask = np.bitwise_count(np.arange(2**n)) == n_down
        v = np.where(mask, v, 0)
    return StateVector(v / np.linalg.norm(v))


def _random_circuit(n: int, rng: np.random.Generator, depth: int = 12) -> Circuit:
    circ = Circuit(n)
    for _ in range(depth):
        a, b, c = (int(x) for x in rng.permutation(n)[:3])
        t = float(rng.uniform(-np.pi, np.pi))
        pool = [ry(a, t), h(a), s_dagger(a), rzz(a, b, t), rxx_plus_yy(a, b, t),
                phased_swap(a, b, t), givens(a, b, t, -t / 2), fredkin(c, a, b)]
        circ.append(pool[int(rng.integers(len(pool)))])
    return circ


def check_unitarity(rng: np.random.Generator) -> bool:
    n = int(rng.integers(3, 6))
    psi = random_state(n, rng)
    circ = _random_circuit(n, rng)
    out = circ.run(psi)
    back = circ.inverse().run(out)
    return abs(out.norm_squared() - 1) < 1e-10 and np.allclose(back.amplitudes, psi.amplitudes, atol=1e-10)


def check_sz_conservation(rng: np.random.Generator) -> bool:
    L = int(rng.choice([4, 6]))
    psi = random_state(L, rng, n_down=int(rng.integers(0, L + 1)))
    params = rng.uniform(-np.pi, np.pi, 4 * int(rng.integers(1, 3)))
    out = hva_circuit(L, params).run(psi)
    return abs(total_sz(out) - total_sz(psi)) < 1e-10


def check_norm_bounds(rng: np.random.Generator) -> bool:
    L = int(rng.integers(2, 7))
    gs = random_state(L, rng)
    q = float(rng.uniform(0, 2 * np.pi))
    n = norm_exact(gs, q)
    return -1e-10 <= n <= L + 1 + 1e-10


def check_projector_idempotence(rng: np.random.Generator) -> bool:
    L = int(rng.integers(2, 5))
    psi = random_state(2 * L, rng)
    once = gutzwiller_project(psi, L)
    twice = gutzwiller_project(once, L)
    return np.allclose(once.amplitudes, twice.amplitudes, atol=1e-14)


def check_matrix_hermiticity(rng: np.random.Generator) -> bool:
    L = int(rng.choice([2, 4]))
    gs = random_state(L, rng)
    model = heisenberg(L) if rng.random() < 0.5 else haldane_shastry(L)
    om = measure_overlap_matrix(gs, model)
    return om.is_hermitian(1e-10) and np.allclose(np.diag(om.s), 1, atol=1e-12)


CHECKS: dict[str, Callable[[np.random.Generator], bool]] = {
    "unitarity": check_unitarity,
    "sz_conservation": check_sz_conservation,
    "norm_bounds": check_norm_bounds,
    "projector_idempotence": check_projector_idempotence,
    "matrix_hermiticity": check_matrix_hermiticity,
}


@dataclass
class SelftestReport:
    instances: int
    seed: int
    failures: dict[str, list[int]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())

    def lines(self) -> list[str]:
        out = []
        for name in CHECKS:
            bad = self.failures.get(name, [])
            status = "PASS" if not bad else "FAIL"
            out.append(f"{status} {name}: {self.instances - len(bad)}/{self.instances}"
                       + (f" (failing instances {bad[:5]})" if bad else ""))
        return out


def run_selftest(instances: int = 100, seed: int = 0) -> SelftestReport:
    report = SelftestReport(instances, seed, {name: [] for name in CHECKS})
    for k, (name, check) in enumerate(CHECKS.items()):
        for i in range(instances):
            rng = make_rng(seed, k, i)
            try:
                passed = check(rng)
            except (ValueError, ArithmeticError):
                passed = False
            if not passed:
                report.failures[name].append(i)
    return report
