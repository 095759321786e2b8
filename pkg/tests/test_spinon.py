import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from qspinon.exceptions import ConfigError
from qspinon.models import bethe_gs_energy, ground_energy, ground_state_ed, haldane_shastry, heisenberg, total_sz
from qspinon.selftest import random_state
from qspinon.spinon import (
    CSV_COLUMNS,
    E0Source,
    MomentumGrid,
    SpinonResult,
    dispersion_exact,
    extend_state,
    insertion_index,
    norm_exact,
    norm_threshold,
    polyfit_extrapolate,
    resolve_e0,
    results_to_csv,
    spinon_state,
    sweep,
)
from qspinon.statevector import StateVector, inner_product, make_rng

MODELS = {"heisenberg": heisenberg, "hs": haldane_shastry}
# dense oracle (tests/oracle.py) on the full grid q_n = 2 pi n / (L + 1), frozen
ORACLE_NORM = {
    ("heisenberg", 6): [1.460139769992, 1.548060950781, 0.966317302108, 0.255551862115,
                        0.255551862115, 0.966317302108, 1.548060950781],
    ("heisenberg", 8): [1.501673874886, 1.569425959553, 2.087228016745, 0.048669890222, 0.043839196037,
                        0.043839196037, 0.048669890222, 2.087228016745, 1.569425959553],
    ("hs", 8): [1.500525665206, 1.568190925412, 2.095050146449, 0.036187384399, 0.050308711136,
                0.050308711136, 0.036187384399, 2.095050146449, 1.568190925412],
}
ORACLE_EPS = {
    ("heisenberg", 6): [0.9412717506, 0.5125139337, 0.1913532166, 0.5981573788],
    ("heisenberg", 8): [1.3154391, 0.9525620061, 0.0265342881, 1.7340286906, 2.0355033096],
    ("hs", 8): [0.9747935762, 0.7327333236, 0.0084084023, 1.3242119644, 1.5593385662],
}
TOY = StateVector.from_bitstring("01")  # |up down>


def gs(kind, L):
    return ground_state_ed(MODELS[kind](L)).ground_state


class TestMomentumGrid:
    def test_points(self):
        g = MomentumGrid(4)
        assert len(g) == 5
        assert np.allclose(g.points, 2 * np.pi * np.arange(5) / 5)
        assert np.all(np.diff(g.points) > 0)

    def test_fold_and_half(self):
        g = MomentumGrid(4, fold=True)
        assert np.all(g.reported() <= np.pi)
        assert np.allclose(g.upper_half(), g.points[:3])


class TestInsertion:
    def test_front(self):
        assert np.allclose(extend_state(TOY, 0).amplitudes, StateVector.from_bitstring("001").amplitudes)

    def test_end(self):
        assert np.allclose(extend_state(TOY, 2).amplitudes, StateVector.from_bitstring("010").amplitudes)

    def test_toy_overlap(self):
        assert inner_product(extend_state(TOY, 0), extend_state(TOY, 1)) == pytest.approx(1)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            extend_state(TOY, 3)

    def test_index_table_read_only(self):
        with pytest.raises(ValueError):
            insertion_index(3, 1)[0] = 5

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32), L=st.integers(2, 6), data=st.data())
    def test_matches_oracle_and_keeps_norm(self, seed, L, data):
        m = data.draw(st.integers(0, L))
        psi = random_state(L, make_rng(seed))
        ext = extend_state(psi, m)
        assert ext.norm_squared() == pytest.approx(1)
        assert np.allclose(ext.amplitudes, oracle.insert_up(psi.amplitudes, m))


class TestSpinonState:
    @pytest.mark.parametrize("q", [0.0, 0.7, math.pi])
    def test_toy_closed_form(self, q):
        expected = np.zeros(8, dtype=complex)
        expected[0b001] = 1 + np.exp(1j * q)
        expected[0b010] = np.exp(2j * q)
        expected /= math.sqrt(3)
        psi = spinon_state(TOY, q)
        assert not psi.normalized
        assert np.allclose(psi.amplitudes, expected)
        assert psi.norm_squared() == pytest.approx((3 + 2 * math.cos(q)) / 3)

    def test_toy_norm_values(self):
        assert norm_exact(TOY, 0.0) == pytest.approx(5 / 3)
        assert norm_exact(TOY, math.pi) == pytest.approx(1 / 3)

    def test_total_sz(self):
        psi = spinon_state(gs("heisenberg", 6), 0.9)
        assert total_sz(psi) == pytest.approx(0.5, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32), L=st.integers(2, 6), q=st.floats(0, 2 * np.pi))
    def test_norm_bounds_and_oracle(self, seed, L, q):
        psi = random_state(L, make_rng(seed))
        n = norm_exact(psi, q)
        assert -1e-10 <= n <= L + 1 + 1e-10
        assert n == pytest.approx(oracle.norm(psi.amplitudes, q), abs=1e-10)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32), q=st.floats(0, 2 * np.pi))
    def test_overlap_matrix_route(self, seed, q):
        L = 5
        psi = random_state(L, make_rng(seed))
        ext = [extend_state(psi, m).amplitudes for m in range(L + 1)]
        total = sum(np.exp(1j * q * (m - n)) * np.vdot(ext[n], ext[m]) for m in range(L + 1) for n in range(L + 1))
        assert norm_exact(psi, q) == pytest.approx(total.real / (L + 1), abs=1e-10)

    @pytest.mark.parametrize("kind", ["heisenberg", "hs"])
    def test_time_reversal_symmetry(self, kind):
        psi = gs(kind, 8)
        for q in MomentumGrid(8).points:
            assert norm_exact(psi, q) == pytest.approx(norm_exact(psi, -q), abs=1e-12)

    @pytest.mark.parametrize("key", sorted(ORACLE_NORM))
    def test_norm_frozen(self, key):
        kind, L = key
        psi = gs(kind, L)
        got = [norm_exact(psi, q) for q in MomentumGrid(L).points]
        assert np.allclose(got, ORACLE_NORM[key], atol=1e-11)


class TestDispersion:
    @pytest.mark.parametrize("key", sorted(ORACLE_EPS))
    def test_frozen(self, key):
        kind, L = key
        res = sweep(gs(kind, L), MODELS[kind](L), MomentumGrid(L).upper_half())
        assert np.allclose([r.epsilon for r in res], ORACLE_EPS[key], atol=1e-9)
        assert all(r.e0_source == "ED" and r.method == "exact" for r in res)

    def test_accepts_either_model_size(self):
        psi = gs("heisenberg", 6)
        a = dispersion_exact(psi, heisenberg(6), 0.5)
        b = dispersion_exact(psi, heisenberg(7), 0.5)
        assert a.epsilon == pytest.approx(b.epsilon)
        with pytest.raises(ValueError):
            dispersion_exact(psi, heisenberg(9), 0.5)

    def test_threshold_marks_undefined(self):
        # toy state at q = pi has N = 1/3; a state with N = 0 exactly: two identical insertions cancel
        psi = StateVector.from_bitstring("0")
        res = dispersion_exact(psi, heisenberg(2), math.pi)
        assert res.norm == pytest.approx(0, abs=1e-15)
        assert res.epsilon is None and not res.defined
        assert "norm_below_threshold" in res.flags
        assert norm_threshold(8) == pytest.approx(9e-6)

    def test_minimum_near_half_pi(self):
        L = 12
        res = sweep(gs("heisenberg", L), heisenberg(L))
        defined = [r for r in res if r.defined and r.norm > 0.2]
        best = min(defined, key=lambda r: r.epsilon)
        assert abs(best.q_folded - math.pi / 2) < 2 * math.pi / (L + 1)
        assert abs(best.epsilon) < 0.1

    def test_e0_sources(self):
        e0, src = resolve_e0(heisenberg(9))
        assert src is E0Source.ED and e0 == pytest.approx(ground_energy(heisenberg(9)))
        e0, src = resolve_e0(heisenberg(23))
        assert src is E0Source.BETHE and e0 == pytest.approx(bethe_gs_energy(23))
        e0, src = resolve_e0(heisenberg(9), "Bethe")
        assert e0 == pytest.approx(9 * (0.25 - math.log(2)))
        with pytest.raises(ConfigError):
            resolve_e0(haldane_shastry(9), "Bethe")

    def test_bethe_shift(self):
        L = 8
        psi = gs("heisenberg", L)
        ed = dispersion_exact(psi, heisenberg(L), 1.0)
        be = dispersion_exact(psi, heisenberg(L), 1.0, e0_source="Bethe")
        shift = ground_energy(heisenberg(L + 1)) - bethe_gs_energy(L + 1)
        assert be.epsilon - ed.epsilon == pytest.approx(shift)
        assert be.e0_source == "Bethe"

    def test_hs_norm_at_pi_decreases(self):
        vals = [norm_exact(gs("hs", L), math.pi) for L in (8, 12, 16)]
        assert vals[0] > vals[1] > vals[2]

    @pytest.mark.parametrize("kind", ["heisenberg", "hs"])
    def test_norm_suppression_even_parity(self, kind):
        vals = [norm_exact(gs(kind, L), math.pi) for L in (4, 8, 12, 16)]
        assert all(a > b for a, b in zip(vals, vals[1:]))


class TestOutput:
    def test_csv_columns(self):
        res = sweep(TOY, heisenberg(2), [0.0, math.pi])
        text = results_to_csv(res, {"build": "x"})
        header = text.splitlines()[0].split(",")
        assert header[:7] == ["L", "q", "norm", "h_expect", "epsilon", "e0_source", "method"]
        assert header == CSV_COLUMNS + ["build"]

    def test_negative_exact_norm_rejected(self):
        with pytest.raises(ValueError):
            SpinonResult(2, 0.0, -1.0, None, None, None, "ED", "exact")

    def test_polyfit(self):
        Ls = [8, 12, 16, 20]
        vals = [1.0 + 2 / L + 3 / L**2 for L in Ls]
        intercept, coeffs = polyfit_extrapolate(Ls, vals)
        assert intercept == pytest.approx(1.0)
        assert np.allclose(coeffs, [3, 2, 1])
