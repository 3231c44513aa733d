"""Steered and steering states in the Schmidt basis.

Both maps are written for a state already in Schmidt form,
|Psi> = sum_k sqrt(p_k) |k>_A |k>_B, with ``phi`` given by its Schmidt-basis
amplitudes beta_k on Bob's side:

* ``steered_state``: Bob found ``phi`` himself; Alice is left with
  sum_k conj(beta_k) sqrt(p_k) / sqrt(P_beta) |k>, P_beta = sum_k p_k |beta_k|^2.
* ``steering_state``: Alice's outcome alpha steered ``phi`` onto Bob, i.e.
  conj(alpha_k) sqrt(p_k) / sqrt(P_alpha) = beta_k.
"""

from __future__ import annotations

from enum import Enum
from itertools import combinations
from typing import Sequence

import numpy as np

from .core_states import (
    PHASE_TOL,
    SUPPORT_EPS,
    ZERO_PROB_EPS,
    KetVector,
    SchmidtSpectrum,
    SteeringResult,
    inner_product,
)
from .exceptions import DimensionMismatchError, OffSupportError, ZeroProbabilityError

__all__ = [
    "SteeringResult",
    "ReportClass",
    "steered_state",
    "steering_state",
    "mutual_overlap",
    "overlap_from_probabilities",
    "overlap_from_alpha",
    "mutual_overlap_batch",
    "cross_overlap",
    "classify_report",
]


def _check_dim(spectrum: SchmidtSpectrum, phi: KetVector) -> None:
    if phi.dim != spectrum.n:
        raise DimensionMismatchError(f"phi has dimension {phi.dim}, spectrum has {spectrum.n}")


def off_support_weight(spectrum: SchmidtSpectrum, phi: KetVector) -> float:
    _check_dim(spectrum, phi)
    return float(np.sum(np.abs(phi.amplitudes[~spectrum.support_mask]) ** 2))


def steered_state(spectrum: SchmidtSpectrum, phi: KetVector) -> SteeringResult:
    """Alice's state after Bob's own measurement yields ``phi``."""
    _check_dim(spectrum, phi)
    beta = phi.amplitudes
    p = spectrum.effective_probs
    p_beta = float(np.sum(p * np.abs(beta) ** 2))
    if p_beta <= ZERO_PROB_EPS:
        raise ZeroProbabilityError("phi is supported only where the Schmidt coefficients vanish")
    remote = beta.conj() * spectrum.coefficients / np.sqrt(p_beta)
    return SteeringResult(KetVector.normalized(remote), min(p_beta, 1.0))


def steering_state(spectrum: SchmidtSpectrum, phi: KetVector) -> SteeringResult:
    """Alice's outcome that would have steered Bob onto ``phi``.

    Raises :class:`OffSupportError` if ``phi`` has weight on a component with
    zero Schmidt coefficient: no outcome of Alice can put weight there.
    """
    _check_dim(spectrum, phi)
    if off_support_weight(spectrum, phi) > SUPPORT_EPS:
        raise OffSupportError("phi has weight on a zero Schmidt coefficient; no outcome of Alice steers it")
    mask = spectrum.support_mask
    beta = phi.amplitudes
    inv = np.zeros(spectrum.n)
    inv[mask] = 1.0 / spectrum.probs[mask]
    denom = float(np.sum(np.abs(beta) ** 2 * inv))
    p_alpha = 1.0 / denom
    alpha = np.zeros(spectrum.n, dtype=complex)
    alpha[mask] = beta[mask].conj() * np.sqrt(p_alpha) / np.sqrt(spectrum.probs[mask])
    return SteeringResult(KetVector.normalized(alpha), min(p_alpha, 1.0))


def mutual_overlap(spectrum: SchmidtSpectrum, phi: KetVector) -> float:
    """<chi_steered(phi)|chi_steering(phi)>, computed from the two states.

    The value is real and positive by construction; the imaginary part of
    the raw inner product is rounding noise and is dropped.
    """
    left = steered_state(spectrum, phi).remote_state
    right = steering_state(spectrum, phi).remote_state
    return min(inner_product(left, right).real, 1.0)


def overlap_from_probabilities(spectrum: SchmidtSpectrum, phi: KetVector) -> float:
    """sqrt(P_alpha / P_beta)."""
    p_beta = steered_state(spectrum, phi).probability
    p_alpha = steering_state(spectrum, phi).probability
    return float(np.sqrt(p_alpha / p_beta))


def overlap_from_alpha(probs: Sequence[float] | np.ndarray, alpha: Sequence[complex] | np.ndarray) -> float:
    """sum_k p_k |alpha_k|^2 / sqrt(sum_k p_k^2 |alpha_k|^2), in terms of Alice's outcome."""
    p = np.asarray(probs, dtype=float)
    w = np.abs(np.asarray(alpha)) ** 2
    return float(np.dot(p, w) / np.sqrt(np.dot(p * p, w)))


def mutual_overlap_batch(spectrum: SchmidtSpectrum, phis: np.ndarray) -> np.ndarray:
    """Row-wise ``mutual_overlap`` for an (m, n) array of unit vectors.

    Rows that are not valid inputs (zero P_beta or off-support weight) come
    back as NaN instead of raising.
    """
    phis = np.asarray(phis, dtype=complex)
    if phis.ndim != 2 or phis.shape[1] != spectrum.n:
        raise DimensionMismatchError(f"expected shape (m, {spectrum.n}), got {phis.shape}")
    mask = spectrum.support_mask
    p = spectrum.effective_probs
    w = np.abs(phis) ** 2
    p_beta = w @ p
    off = w[:, ~mask].sum(axis=1)
    valid = (p_beta > ZERO_PROB_EPS) & (off <= SUPPORT_EPS)

    inv_sqrt_p = np.zeros(spectrum.n)
    inv_sqrt_p[mask] = 1.0 / np.sqrt(p[mask])
    chi_left = phis.conj() * np.sqrt(p)
    chi_right = phis.conj() * inv_sqrt_p
    with np.errstate(divide="ignore", invalid="ignore"):
        chi_left = chi_left / np.linalg.norm(chi_left, axis=1, keepdims=True)
        chi_right = chi_right / np.linalg.norm(chi_right, axis=1, keepdims=True)
        out = np.einsum("ij,ij->i", chi_left.conj(), chi_right).real
    out[~valid] = np.nan
    return out


def cross_overlap(spectrum: SchmidtSpectrum, phi: KetVector, phi_prime: KetVector) -> complex:
    """<chi_steered(phi)|chi_steering(phi_prime)> from the explicit amplitudes.

    Equals sqrt(P'_alpha / P_beta) <phi'|phi>, so it vanishes exactly when
    phi' is orthogonal to phi.
    """
    left = steered_state(spectrum, phi).remote_state
    right = steering_state(spectrum, phi_prime).remote_state
    return inner_product(left, right)


class ReportClass(str, Enum):
    CONSISTENT_WITH_DIRECT_MEASUREMENT = "ConsistentWithDirectMeasurement"
    CONSISTENT_WITH_STEERING = "ConsistentWithSteering"
    INCONSISTENT = "Inconsistent"


def _distinct(states: Sequence[KetVector], tol: float) -> list[KetVector]:
    kept: list[KetVector] = []
    for s in states:
        if all(abs(inner_product(k, s)) < 1.0 - tol for k in kept):
            kept.append(s)
    return kept


def classify_report(
    spectrum: SchmidtSpectrum,
    reported_states: Sequence[KetVector],
    tol: float = PHASE_TOL,
) -> ReportClass:
    """Decide whether per-round reports could come from Bob's lab measuring.

    A direct measurement in one basis yields states from an orthonormal
    basis; a report list whose distinct states are a full orthonormal basis
    is consistent with that. If instead some reported states overlap, they can
    only have been steered by Alice, which needs every state to live on the
    Schmidt support.
    """
    if len(reported_states) == 0:
        raise ValueError("reported_states must not be empty")
    for s in reported_states:
        _check_dim(spectrum, s)

    distinct = _distinct(reported_states, tol)
    overlaps = [abs(inner_product(a, b)) for a, b in combinations(distinct, 2)]
    if len(distinct) == spectrum.n and all(o < tol for o in overlaps):
        return ReportClass.CONSISTENT_WITH_DIRECT_MEASUREMENT
    if any(o >= tol for o in overlaps) and all(
        off_support_weight(spectrum, s) <= SUPPORT_EPS for s in distinct
    ):
        return ReportClass.CONSISTENT_WITH_STEERING
    return ReportClass.INCONSISTENT
