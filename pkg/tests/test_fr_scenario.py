import math

import numpy as np
import pytest

from steerkit.core_states import KetVector, equal_up_to_phase
from steerkit.fr_scenario import (
    FAIL_A,
    FAIL_B,
    FR_AMPLITUDES,
    OK_A,
    OK_B,
    build_fr_state,
    compute_ok_probabilities,
    run_inference_chain,
)
from steerkit.ladder import ladder_step

SQ2 = math.sqrt(2.0)


class TestFrState:
    def test_spectrum(self):
        p = build_fr_state().spectrum.probs
        assert p == pytest.approx([(3 - math.sqrt(5)) / 6, (3 + math.sqrt(5)) / 6], abs=1e-14)
        assert p == pytest.approx([0.1273, 0.8727], abs=1e-4)
        assert p.sum() == pytest.approx(1.0, abs=1e-15)

    def test_reassembly(self):
        m = build_fr_state().amplitude_matrix()
        assert np.max(np.abs(m - np.array([[1, 1], [1, 0]]) / math.sqrt(3))) < 1e-12

    def test_norm(self):
        assert np.linalg.norm(FR_AMPLITUDES) == pytest.approx(1.0, abs=1e-15)


class TestInferenceChain:
    def test_chain(self):
        chain, probs = run_inference_chain()
        assert [label for label, _ in chain][0] == "Bob"
        assert equal_up_to_phase(chain[0][1], KetVector.basis(2, 1), 1e-12)
        assert equal_up_to_phase(chain[1][1], KetVector.basis(2, 0), 1e-12)
        assert equal_up_to_phase(chain[2][1], KetVector(np.array([1, 1]) / SQ2), 1e-12)
        assert probs == pytest.approx((1 / 3, 2 / 3), abs=1e-14)

    def test_chain_is_two_ladder_half_steps(self):
        state = build_fr_state()
        ub = state.basis_B
        bob = KetVector.basis(2, 1)
        schmidt_coords = KetVector.normalized(ub.conj().T @ bob.amplitudes)
        two = ladder_step(state.spectrum, ladder_step(state.spectrum, schmidt_coords))
        back = KetVector.normalized(ub @ two.amplitudes)
        chain, _ = run_inference_chain(state)
        assert abs(abs(np.vdot(back.amplitudes, chain[2][1].amplitudes)) - 1) < 1e-10


class TestOkProbabilities:
    def test_quantum_prediction(self):
        table = compute_ok_probabilities()
        assert table.p_ok_ok == pytest.approx(1 / 12, abs=1e-12)
        # direct amplitude: <ok_A (x) ok_B|Psi> = -1/(2 sqrt 3)
        amp = np.einsum("i,ij,j->", OK_A.amplitudes.conj(), FR_AMPLITUDES, OK_B.amplitudes.conj())
        assert amp == pytest.approx(-1 / (2 * math.sqrt(3)), abs=1e-15)

    def test_naive_claim(self):
        assert compute_ok_probabilities().p_naive == 0.0

    def test_completeness(self):
        joint = compute_ok_probabilities().joint
        assert len(joint) == 4
        assert sum(joint.values()) == pytest.approx(1.0, abs=1e-12)

    def test_phase_invariance(self, rng):
        base = compute_ok_probabilities()
        for _ in range(10):
            ph = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
            vecs = [KetVector(v.amplitudes * p) for v, p in zip((OK_A, OK_B, FAIL_A, FAIL_B), ph)]
            table = compute_ok_probabilities(*vecs)
            for k, v in base.joint.items():
                assert table.joint[k] == pytest.approx(v, abs=1e-12)
