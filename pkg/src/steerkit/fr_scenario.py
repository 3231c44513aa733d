"""The Frauchiger-Renner state and the two steering inferences built on it.

The agents' internal lab structure is collapsed to qubits:
|Psi> = (|00> + |01> + |10>)/sqrt(3) on A (x) B. Every number here is
obtained by projecting the state through :func:`generic_steer`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_states import BipartiteState, KetVector, Side, generic_steer, schmidt_decompose
from .exceptions import ZeroProbabilityError

FR_AMPLITUDES = np.array([[1.0, 1.0], [1.0, 0.0]]) / np.sqrt(3.0)

# "ok" outcomes on both sides; "fail" is the orthogonal vector.
OK_A = KetVector(np.array([1.0, -1.0]) / np.sqrt(2.0))
OK_B = KetVector(np.array([1.0, -1.0]) / np.sqrt(2.0))
FAIL_A = KetVector(np.array([1.0, 1.0]) / np.sqrt(2.0))
FAIL_B = KetVector(np.array([1.0, 1.0]) / np.sqrt(2.0))

# The naive-update claim: ok on both sides "cannot happen".
NAIVE_P_OK_OK = 0.0


@dataclass(frozen=True)
class FrOutcomeTable:
    p_ok_ok: float
    p_naive: float
    inference_chain: tuple[tuple[str, KetVector], ...]
    chain_probabilities: tuple[float, ...] = ()
    joint: dict[str, float] | None = None


def build_fr_state() -> BipartiteState:
    return schmidt_decompose(FR_AMPLITUDES)


def run_inference_chain(state: BipartiteState | None = None) -> tuple[tuple[tuple[str, KetVector], ...], tuple[float, ...]]:
    """Bob finds |1>_B, infers Alice's |0>_A, and Alice infers Bob's state back.

    Returns the labelled chain and the probability of each steering step.
    """
    state = build_fr_state() if state is None else state
    bob = KetVector.basis(2, 1)
    first = generic_steer(state, Side.B, bob)
    second = generic_steer(state, Side.A, first.remote_state)
    chain = (
        ("Bob", bob),
        ("Alice (inferred by Bob)", first.remote_state),
        ("Bob (inferred by Alice)", second.remote_state),
    )
    return chain, (first.probability, second.probability)


def joint_probability(state: BipartiteState, outcome_a: KetVector, outcome_b: KetVector) -> float:
    """P(outcome_a, outcome_b) = P(outcome_a) |<outcome_b|remote>|^2."""
    try:
        res = generic_steer(state, Side.A, outcome_a)
    except ZeroProbabilityError:
        return 0.0
    amp = np.vdot(outcome_b.amplitudes, res.remote_state.amplitudes)
    return res.probability * float(abs(amp) ** 2)


def compute_ok_probabilities(
    ok_a: KetVector = OK_A,
    ok_b: KetVector = OK_B,
    fail_a: KetVector = FAIL_A,
    fail_b: KetVector = FAIL_B,
) -> FrOutcomeTable:
    """Quantum prediction for (ok, ok) next to the naive-update claim of 0."""
    state = build_fr_state()
    chain, chain_probs = run_inference_chain(state)
    joint = {
        f"{la},{lb}": joint_probability(state, va, vb)
        for la, va in (("ok", ok_a), ("fail", fail_a))
        for lb, vb in (("ok", ok_b), ("fail", fail_b))
    }
    return FrOutcomeTable(
        p_ok_ok=joint["ok,ok"],
        p_naive=NAIVE_P_OK_OK,
        inference_chain=chain,
        chain_probabilities=chain_probs,
        joint=joint,
    )
