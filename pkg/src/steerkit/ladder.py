"""Repeated steering-as-if-measured updates on a Schmidt spectrum.

Each half-step multiplies the Schmidt amplitudes by c_k = sqrt(p_k) and
renormalizes. Even iterates are Bob's states and odd iterates Alice's. For
a generic start the sequence converges onto the span of the largest
Schmidt coefficient's class, much like power iteration on diag(c).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_states import (
    DEGENERACY_RTOL,
    ZERO_PROB_EPS,
    KetVector,
    SchmidtSpectrum,
    inner_product,
)
from .exceptions import DimensionMismatchError, ZeroProbabilityError

DEFAULT_RESIDUAL_TOL = 1e-14
DEFAULT_MAX_STEPS = 100_000


@dataclass(frozen=True)
class LadderTrace:
    states: tuple[KetVector, ...]
    converged: bool
    limit: KetVector
    steps_taken: int
    residuals: tuple[float, ...] = ()


def ladder_step(spectrum: SchmidtSpectrum, psi: KetVector) -> KetVector:
    """One half-step: psi_k -> c_k psi_k, renormalized.

    No complex conjugation is applied. For real psi this coincides with the
    steered state; for complex psi it is the conjugate of it, and two
    half-steps equal the steer-then-infer round trip exactly.
    """
    if psi.dim != spectrum.n:
        raise DimensionMismatchError(f"psi has dimension {psi.dim}, spectrum has {spectrum.n}")
    nxt = spectrum.coefficients * psi.amplitudes
    norm2 = float(np.vdot(nxt, nxt).real)
    if norm2 <= ZERO_PROB_EPS:
        raise ZeroProbabilityError("psi has no overlap with the Schmidt support")
    return KetVector(nxt / np.sqrt(norm2))


def step_residual(a: KetVector, b: KetVector) -> float:
    return 1.0 - abs(inner_product(a, b))


def run_ladder(
    spectrum: SchmidtSpectrum,
    psi0: KetVector,
    max_steps: int = DEFAULT_MAX_STEPS,
    residual_tol: float = DEFAULT_RESIDUAL_TOL,
) -> LadderTrace:
    """Iterate ``ladder_step`` until successive states agree up to phase.

    Stops when 1 - |<psi_m|psi_{m+1}>| < residual_tol (the candidate
    psi_{m+1} is not appended) or after ``max_steps`` appended states.
    """
    if psi0.dim != spectrum.n:
        raise DimensionMismatchError(f"psi0 has dimension {psi0.dim}, spectrum has {spectrum.n}")
    states = [psi0]
    residuals = []
    converged = False
    current = psi0
    while len(states) - 1 < max_steps:
        candidate = ladder_step(spectrum, current)
        res = step_residual(current, candidate)
        residuals.append(res)
        if res < residual_tol:
            converged = True
            break
        states.append(candidate)
        current = candidate
    return LadderTrace(
        states=tuple(states),
        converged=converged,
        limit=current,
        steps_taken=len(states) - 1,
        residuals=tuple(residuals),
    )


def p_max_class(spectrum: SchmidtSpectrum) -> np.ndarray:
    p = spectrum.probs
    return np.flatnonzero(np.abs(p - spectrum.p_max) <= DEGENERACY_RTOL * spectrum.p_max)


def fixed_point(spectrum: SchmidtSpectrum, psi0: KetVector) -> KetVector:
    """Analytic limit of the ladder: psi0 restricted to the p_max class.

    Raises :class:`ZeroProbabilityError` if psi0 has no weight there; the
    numerical iteration then settles in a lower class, which this function
    does not try to predict.
    """
    if psi0.dim != spectrum.n:
        raise DimensionMismatchError(f"psi0 has dimension {psi0.dim}, spectrum has {spectrum.n}")
    idx = p_max_class(spectrum)
    restricted = np.zeros(spectrum.n, dtype=complex)
    restricted[idx] = psi0.amplitudes[idx]
    if float(np.vdot(restricted, restricted).real) <= ZERO_PROB_EPS:
        raise ZeroProbabilityError("psi0 is orthogonal to the largest Schmidt class")
    return KetVector.normalized(restricted)
