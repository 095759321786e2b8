import math

import numpy as np
import pytest

from oracle import dense_hamiltonian, ground_state
from qspinon.models import (
    ModelKind,
    SpinModel,
    analytic_dispersion,
    apply_hamiltonian,
    bethe_gs_energy,
    build_hamiltonian,
    commuting_groups,
    energy,
    ground_energy,
    ground_state_ed,
    haldane_shastry,
    heisenberg,
    hs_coupling,
    total_spin_squared,
    total_sz,
    xy_model,
)
from qspinon.pauli import PauliSum, qubitwise_commute

# frozen from the dense Kronecker oracle in tests/oracle.py
ORACLE_E0 = {
    ("heisenberg", 4): -2.0,
    ("heisenberg", 6): -2.802775637731995,
    ("heisenberg", 8): -3.6510934089371774,
    ("hs", 4): -2.1589759627382965,
    ("hs", 6): -2.810095697532388,
    ("hs", 8): -3.5468890816414866,
}
MODELS = {"heisenberg": heisenberg, "hs": haldane_shastry}


class TestSpinModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            heisenberg(1)
        with pytest.raises(ValueError):
            SpinModel(ModelKind.HALDANE_SHASTRY, 4, periodic=False)
        with pytest.raises(ValueError):
            SpinModel(ModelKind.XY, 4, delta=0.5)

    def test_two_site_ring_merges_bond(self):
        h = build_hamiltonian(heisenberg(2))
        assert h.terms == {"XX": 0.5, "YY": 0.5, "ZZ": 0.5}

    def test_xy_two_site(self):
        h = build_hamiltonian(xy_model(2))
        assert h.terms == {"XX": -0.5, "YY": -0.5}

    def test_xy_bond_sign(self):
        h = build_hamiltonian(xy_model(4))
        assert h.terms["XXII"] == -0.25 and "ZZII" not in h.terms

    def test_hs_nearest_coupling(self):
        assert hs_coupling(4, 1) == pytest.approx(math.pi**2 / 8)
        h = build_hamiltonian(haldane_shastry(4))
        assert h.terms["XXII"] == pytest.approx(math.pi**2 / 32)

    def test_anisotropy(self):
        h = build_hamiltonian(SpinModel(ModelKind.HEISENBERG, 4, delta=0.5))
        assert h.terms["ZZII"] == pytest.approx(0.125)
        assert h.terms["XXII"] == pytest.approx(0.25)

    @pytest.mark.parametrize("kind", ["heisenberg", "hs"])
    @pytest.mark.parametrize("L", [3, 4, 5, 6])
    def test_hamiltonian_matches_dense_oracle_and_is_hermitian(self, kind, L):
        m = build_hamiltonian(MODELS[kind](L)).to_matrix()
        assert np.allclose(m, m.conj().T, atol=1e-12)
        assert np.allclose(m, dense_hamiltonian(kind, L), atol=1e-12)

    def test_json_export(self):
        h = build_hamiltonian(heisenberg(3))
        assert PauliSum.from_json(h.to_json()).terms == h.terms


class TestExactDiagonalization:
    @pytest.mark.parametrize("key", sorted(ORACLE_E0))
    def test_ground_energy_frozen(self, key):
        kind, L = key
        assert ground_energy(MODELS[kind](L)) == pytest.approx(ORACLE_E0[key], abs=1e-10)

    @pytest.mark.parametrize("kind", ["heisenberg", "hs"])
    @pytest.mark.parametrize("L", [5, 7])
    def test_odd_rings_against_oracle(self, kind, L):
        spec = ground_state_ed(MODELS[kind](L))
        e, vec = ground_state(kind, L)
        assert spec.ground_energy == pytest.approx(e, abs=1e-10)
        assert spec.sector == 0.5
        assert total_sz(spec.ground_state) == pytest.approx(0.5)

    def test_two_site_singlet(self):
        spec = ground_state_ed(heisenberg(2))
        singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
        assert abs(np.vdot(singlet, spec.ground_state.amplitudes)) ** 2 == pytest.approx(1)
        assert spec.ground_energy == pytest.approx(-1.5)

    def test_sz_sector_support(self):
        amps = ground_state_ed(heisenberg(12)).ground_state.amplitudes
        weights = np.bitwise_count(np.arange(2**12))
        assert np.all(amps[weights != 6] == 0)

    @pytest.mark.parametrize("L", [4, 8, 12])
    def test_residual_and_singlet(self, L):
        model = heisenberg(L)
        spec = ground_state_ed(model)
        v = spec.ground_state.amplitudes
        assert np.linalg.norm(apply_hamiltonian(model, v) - spec.ground_energy * v) < 1e-8
        assert total_spin_squared(spec.ground_state) == pytest.approx(0, abs=1e-8)

    def test_phase_convention_real_positive(self):
        v = ground_state_ed(haldane_shastry(8)).ground_state.amplitudes
        assert np.allclose(v.imag, 0)
        assert v[np.argmax(np.abs(v))].real > 0

    def test_energy_helper(self):
        spec = ground_state_ed(heisenberg(6))
        assert energy(heisenberg(6), spec.ground_state) == pytest.approx(spec.ground_energy)

    def test_matches_oracle_state(self):
        _, vec = ground_state("hs", 6)
        amps = ground_state_ed(haldane_shastry(6)).ground_state.amplitudes
        assert abs(np.vdot(vec, amps)) ** 2 == pytest.approx(1, abs=1e-10)


class TestReferenceCurves:
    def test_bethe_values(self):
        assert bethe_gs_energy(17) == pytest.approx(17 * (0.25 - math.log(2)))
        assert bethe_gs_energy(17) == pytest.approx(-7.53350, abs=1e-5)
        assert bethe_gs_energy(9, J=0) == 0
        assert bethe_gs_energy(13) / 13 == pytest.approx(-0.4431472, abs=1e-7)

    def test_bethe_approached_monotonically(self):
        gaps = [abs(ground_energy(heisenberg(n)) / n - (0.25 - math.log(2))) for n in (9, 13, 17)]
        assert gaps[0] > gaps[1] > gaps[2]

    def test_analytic_dispersions(self):
        assert analytic_dispersion("heisenberg", math.pi / 2) == pytest.approx(0, abs=1e-15)
        assert analytic_dispersion("heisenberg", 0) == pytest.approx(math.pi / 2)
        assert analytic_dispersion("hs", 0) == pytest.approx(math.pi**2 / 8)
        with pytest.raises(ValueError):
            analytic_dispersion("xy", 0)


class TestCommutingGroups:
    @pytest.mark.parametrize("model", [heisenberg(4), heisenberg(8), heisenberg(9), haldane_shastry(4),
                                       haldane_shastry(9)], ids=str)
    def test_groups_are_qubitwise_commuting_partition(self, model):
        h = build_hamiltonian(model)
        groups = commuting_groups(h)
        merged = PauliSum(h.n_qubits)
        for g in groups:
            strings = [s for s, _ in g]
            for i in range(len(strings)):
                for j in range(i + 1, len(strings)):
                    assert qubitwise_commute(strings[i], strings[j])
            merged = merged + g
        assert merged.terms == h.terms

    def test_heisenberg_three_groups(self):
        assert len(commuting_groups(build_hamiltonian(heisenberg(8)))) == 3
        assert len(commuting_groups(build_hamiltonian(heisenberg(9)))) <= 6

    def test_single_term(self):
        assert len(commuting_groups(PauliSum.from_list(2, [(1, "XZ")]))) == 1
