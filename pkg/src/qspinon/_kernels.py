"""Compiled inner loops for exchange Hamiltonians."""

import numba
import numpy as np


@numba.njit(cache=True)
def exchange_matvec(x, states, lookup, diag, mask_i, mask_j, flip, y):
    """y = H x for a spin-exchange Hamiltonian restricted to ``states``.

    ``lookup`` maps a basis integer to its row inside ``states``. Each bond
    contributes ``flip[b]`` between configurations that differ by swapping the
    antiparallel spins on ``mask_i[b]`` and ``mask_j[b]``.
    """
    n = states.shape[0]
    nb = mask_i.shape[0]
    for r in range(n):
        s = states[r]
        acc = diag[r] * x[r]
        for b in range(nb):
            bi = (s & mask_i[b]) != 0
            bj = (s & mask_j[b]) != 0
            if bi != bj:
                acc += flip[b] * x[lookup[s ^ (mask_i[b] | mask_j[b])]]
        y[r] = acc
    return y


def sector_states(n_sites: int, n_down: int) -> np.ndarray:
    """Sorted basis integers with exactly ``n_down`` set bits."""
    idx = np.arange(2**n_sites, dtype=np.int64)
    return idx[np.bitwise_count(idx) == n_down]


@numba.njit(cache=True)
def pair_rotation(v, ia, ib, c, s):
    """Apply ``[[c, -i s], [-i s, c]]`` on every index pair, bond by bond (in place)."""
    nb, npairs = ia.shape
    for b in range(nb):
        for k in range(npairs):
            x = v[ia[b, k]]
            y = v[ib[b, k]]
            v[ia[b, k]] = c * x - 1j * s * y
            v[ib[b, k]] = -1j * s * x + c * y
    return v


@numba.njit(cache=True)
def pair_hop(v, ia, ib, out):
    """``out = sum_b (XX + YY)_b v`` on index pairs."""
    out[:] = 0
    nb, npairs = ia.shape
    for b in range(nb):
        for k in range(npairs):
            out[ia[b, k]] += 2 * v[ib[b, k]]
            out[ib[b, k]] += 2 * v[ia[b, k]]
    return out
