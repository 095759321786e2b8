"""Weighted sums of Pauli strings.

Strings are written left to right in qubit order, so ``"XZI"`` places X on
qubit 0 (the most significant bit of a basis index).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

# (a, b) -> (phase, a*b) for single-qubit Pauli products
_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}

_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_product(a: str, b: str) -> tuple[complex, str]:
    """Product of two Pauli strings as ``(phase, string)``."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {a!r} vs {b!r}")
    phase: complex = 1
    out = []
    for pa, pb in zip(a, b):
        ph, p = _PRODUCT[(pa, pb)]
        phase *= ph
        out.append(p)
    return phase, "".join(out)


def qubitwise_commute(a: str, b: str) -> bool:
    """True if on every qubit the letters agree or one of them is I."""
    return all(pa == pb or pa == "I" or pb == "I" for pa, pb in zip(a, b))


def string_masks(pauli: str) -> tuple[int, int, int]:
    """Bit masks ``(x_mask, z_mask, n_y)`` of a string over ``len(pauli)`` qubits.

    ``x_mask`` flags X or Y letters, ``z_mask`` flags Z or Y letters. Qubit 0
    maps to the most significant bit.
    """
    n = len(pauli)
    x_mask = z_mask = n_y = 0
    for k, p in enumerate(pauli):
        bit = 1 << (n - 1 - k)
        if p in "XY":
            x_mask |= bit
        if p in "ZY":
            z_mask |= bit
        if p == "Y":
            n_y += 1
    return x_mask, z_mask, n_y


@dataclass
class PauliSum:
    """Linear combination of Pauli strings on ``n_qubits`` qubits.

    Duplicate strings are merged on construction; the mapping ``terms`` goes
    from string to complex coefficient.
    """

    n_qubits: int
    terms: dict[str, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        merged: dict[str, complex] = {}
        for s, c in self.terms.items():
            self._check(s)
            merged[s] = merged.get(s, 0) + complex(c)
        self.terms = merged

    def _check(self, s: str) -> None:
        if len(s) != self.n_qubits or set(s) - set("IXYZ"):
            raise ValueError(f"bad Pauli string {s!r} for {self.n_qubits} qubits")

    @classmethod
    def from_list(cls, n_qubits: int, items: Iterable[tuple[complex, str]]) -> "PauliSum":
        out = cls(n_qubits)
        for c, s in items:
            out.add_term(s, c)
        return out

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, {"I" * n_qubits: coeff})

    def add_term(self, pauli: str, coeff: complex) -> None:
        self._check(pauli)
        self.terms[pauli] = self.terms.get(pauli, 0) + complex(coeff)

    def as_list(self) -> list[tuple[complex, str]]:
        return [(c, s) for s, c in self.terms.items()]

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        out = PauliSum(self.n_qubits, dict(self.terms))
        for s, c in other.terms.items():
            out.add_term(s, c)
        return out

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            if other.n_qubits != self.n_qubits:
                raise ValueError("qubit count mismatch")
            out = PauliSum(self.n_qubits)
            for sa, ca in self.terms.items():
                for sb, cb in other.terms.items():
                    ph, s = pauli_product(sa, sb)
                    out.add_term(s, ph * ca * cb)
            return out.simplify()
        return PauliSum(self.n_qubits, {s: c * other for s, c in self.terms.items()})

    __rmul__ = __mul__

    def simplify(self, atol: float = 1e-14) -> "PauliSum":
        return PauliSum(self.n_qubits, {s: c for s, c in self.terms.items() if abs(c) > atol})

    def embed(self, n_qubits: int, offset: int) -> "PauliSum":
        """Place this operator on qubits ``offset .. offset + self.n_qubits - 1``."""
        if offset < 0 or offset + self.n_qubits > n_qubits:
            raise ValueError("embedding out of range")
        pad_l, pad_r = "I" * offset, "I" * (n_qubits - offset - self.n_qubits)
        return PauliSum(n_qubits, {pad_l + s + pad_r: c for s, c in self.terms.items()})

    def dagger(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {s: np.conj(c) for s, c in self.terms.items()})

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        # every Pauli string is self-adjoint, so this reduces to real coefficients
        return all(abs(c.imag) <= atol for c in self.terms.values())

    def to_matrix(self) -> np.ndarray:
        """Dense matrix; intended for small registers only."""
        if self.n_qubits > 12:
            raise ValueError("dense conversion capped at 12 qubits")
        dim = 2**self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for s, c in self.terms.items():
            m = np.ones((1, 1), dtype=complex)
            for p in s:
                m = np.kron(m, _MATRICES[p])
            out += c * m
        return out

    def to_json(self) -> str:
        rows = [
            {"coeff": [float(np.real(c)), float(np.imag(c))], "pauli_string": s}
            for s, c in sorted(self.terms.items())
        ]
        return json.dumps({"n_qubits": self.n_qubits, "terms": rows}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "PauliSum":
        data = json.loads(text)
        out = cls(data["n_qubits"])
        for row in data["terms"]:
            re, im = row["coeff"]
            out.add_term(row["pauli_string"], complex(re, im))
        return out
