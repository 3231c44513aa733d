"""Complex kets, Schmidt spectra and bipartite pure states.

Everything here is immutable: arrays are copied on construction and marked
read-only, so values can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    InvariantError,
    ZeroProbabilityError,
)

NORM_TOL = 1e-12
UNITARY_TOL = 1e-10
MATRIX_NORM_TOL = 1e-10
# Schmidt coefficients at or below this are treated as exactly zero.
SUPPORT_EPS = 1e-12
# Relative tolerance for grouping equal Schmidt coefficients.
DEGENERACY_RTOL = 1e-10
# Outcome probabilities at or below this count as impossible.
ZERO_PROB_EPS = 1e-24
PHASE_TOL = 1e-10


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class KetVector:
    """Unit-norm complex amplitude vector."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 1:
            raise InvariantError(f"ket must be a non-empty 1-D vector, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise InvariantError("ket amplitudes must be finite")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InvariantError(f"ket is not normalized: sum |a_k|^2 = {norm2!r}")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, values: Sequence[complex] | np.ndarray) -> KetVector:
        """Build a ket from any non-zero vector by rescaling it to unit norm."""
        amps = np.asarray(values, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0.0 or not np.isfinite(norm):
            raise InvariantError("cannot normalize a zero or non-finite vector")
        return cls(amps / norm)

    @classmethod
    def basis(cls, n: int, k: int) -> KetVector:
        amps = np.zeros(n, dtype=complex)
        amps[k] = 1.0
        return cls(amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def __len__(self) -> int:
        return self.amplitudes.size

    def __repr__(self) -> str:
        return f"KetVector({np.array2string(self.amplitudes, precision=6)})"


def _check_dims(a: KetVector, b: KetVector) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimension mismatch: {a.dim} vs {b.dim}")


def inner_product(a: KetVector, b: KetVector) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    _check_dims(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def equal_up_to_phase(a: KetVector, b: KetVector, tol: float = PHASE_TOL) -> bool:
    _check_dims(a, b)
    return abs(abs(inner_product(a, b)) - 1.0) < tol


@dataclass(frozen=True, eq=False)
class SchmidtSpectrum:
    """Ascending Schmidt probabilities p_0 <= ... <= p_{n-1} summing to one.

    ``coefficients`` are the amplitudes c_k = sqrt(p_k), with entries below
    ``SUPPORT_EPS`` clamped to zero so that off-support components can never
    leak into steered states.
    """

    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise InvariantError("spectrum must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(p)):
            raise InvariantError("spectrum entries must be finite")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise InvariantError(f"spectrum entries must lie in [0, 1]: {p}")
        if np.any(np.diff(p) < 0.0):
            raise InvariantError(f"spectrum must be sorted ascending: {p}")
        if abs(p.sum() - 1.0) > NORM_TOL:
            raise InvariantError(f"spectrum must sum to 1, got {p.sum()!r}")
        if not np.any(p > SUPPORT_EPS):
            raise InvariantError("spectrum has empty support")
        object.__setattr__(self, "probs", _frozen(p))

    @classmethod
    def from_weights(cls, weights: Sequence[float] | np.ndarray) -> SchmidtSpectrum:
        """Sort and normalize non-negative weights into a spectrum."""
        w = np.sort(np.asarray(weights, dtype=float))
        if w.size == 0 or np.any(w < 0.0) or w.sum() <= 0.0:
            raise InvariantError("weights must be non-negative with positive sum")
        return cls(w / w.sum())

    @property
    def n(self) -> int:
        return self.probs.size

    @property
    def support_mask(self) -> np.ndarray:
        return self.probs > SUPPORT_EPS

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.support_mask)

    @property
    def effective_probs(self) -> np.ndarray:
        """Probabilities with sub-threshold entries set to exactly zero."""
        return np.where(self.support_mask, self.probs, 0.0)

    @property
    def coefficients(self) -> np.ndarray:
        return np.sqrt(self.effective_probs)

    @property
    def p_min(self) -> float:
        return float(self.probs[self.support[0]])

    @property
    def p_max(self) -> float:
        return float(self.probs[-1])

    def degeneracy_classes(self) -> tuple[tuple[int, ...], ...]:
        """Group support indices whose probabilities agree to ``DEGENERACY_RTOL``.

        Classes are returned in ascending order of probability. Grouping is
        transitive along the sorted sequence.
        """
        classes: list[list[int]] = []
        for k in self.support:
            k = int(k)
            if classes:
                prev = self.probs[classes[-1][-1]]
                if abs(self.probs[k] - prev) <= DEGENERACY_RTOL * max(self.probs[k], prev):
                    classes[-1].append(k)
                    continue
            classes.append([k])
        return tuple(tuple(c) for c in classes)

    @property
    def k_min(self) -> tuple[int, ...]:
        return self.degeneracy_classes()[0]

    @property
    def k_max(self) -> tuple[int, ...]:
        return self.degeneracy_classes()[-1]

    def is_uniform(self) -> bool:
        """True when all support probabilities form a single class."""
        return len(self.degeneracy_classes()) == 1

    def __repr__(self) -> str:
        return f"SchmidtSpectrum({np.array2string(self.probs, precision=6)})"


class Side(str, Enum):
    A = "A"
    B = "B"


def _check_unitary(u: np.ndarray, name: str) -> None:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise InvariantError(f"{name} must be square, got shape {u.shape}")
    err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if err > UNITARY_TOL:
        raise InvariantError(f"{name} is not unitary (max deviation {err:.3e})")


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """|Psi> = sum_k sqrt(p_k) |a_k> (x) |b_k>.

    Column k of ``basis_A``/``basis_B`` is the Schmidt vector paired with
    ``spectrum.probs[k]``. When the local dimensions differ, the columns past
    ``spectrum.n`` complete the larger side to an orthonormal basis.
    """

    spectrum: SchmidtSpectrum
    basis_A: np.ndarray
    basis_B: np.ndarray

    def __post_init__(self) -> None:
        ua = np.asarray(self.basis_A, dtype=complex)
        ub = np.asarray(self.basis_B, dtype=complex)
        _check_unitary(ua, "basis_A")
        _check_unitary(ub, "basis_B")
        if self.spectrum.n != min(ua.shape[0], ub.shape[0]):
            raise InvariantError(
                f"spectrum length {self.spectrum.n} does not match local dimensions "
                f"{ua.shape[0]}x{ub.shape[0]}"
            )
        object.__setattr__(self, "basis_A", _frozen(ua))
        object.__setattr__(self, "basis_B", _frozen(ub))

    @classmethod
    def from_spectrum(cls, spectrum: SchmidtSpectrum) -> BipartiteState:
        """State whose Schmidt bases are the computational bases."""
        eye = np.eye(spectrum.n, dtype=complex)
        return cls(spectrum, eye, eye)

    @property
    def dim_A(self) -> int:
        return self.basis_A.shape[0]

    @property
    def dim_B(self) -> int:
        return self.basis_B.shape[0]

    def amplitude_matrix(self) -> np.ndarray:
        """Matrix M with |Psi> = sum_ij M[i, j] |i>_A |j>_B."""
        m = self.spectrum.n
        sa = self.basis_A[:, :m] * np.sqrt(self.spectrum.probs)
        return sa @ self.basis_B[:, :m].T


def schmidt_decompose(amplitude_matrix: Sequence[Sequence[complex]] | np.ndarray) -> BipartiteState:
    """Schmidt-decompose the state with amplitudes ``M[i, j]`` on |i>_A|j>_B.

    The spectrum comes back ascending with both bases permuted to match;
    zero coefficients are kept (they simply fall outside the support).
    """
    m = np.asarray(amplitude_matrix, dtype=complex)
    if m.ndim != 2 or m.size == 0:
        raise InvariantError(f"amplitude matrix must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvariantError("amplitude matrix must be finite")
    norm = np.linalg.norm(m)
    if abs(norm - 1.0) > MATRIX_NORM_TOL:
        raise InvariantError(f"amplitude matrix must have unit Frobenius norm, got {norm!r}")
    m = m / norm

    u, s, vh = np.linalg.svd(m, full_matrices=True)
    r = s.size
    probs = s**2
    probs = probs / probs.sum()
    order = np.argsort(probs, kind="stable")

    basis_a = np.concatenate([u[:, :r][:, order], u[:, r:]], axis=1)
    vt = vh.T
    basis_b = np.concatenate([vt[:, :r][:, order], vt[:, r:]], axis=1)
    return BipartiteState(SchmidtSpectrum(probs[order]), basis_a, basis_b)


@dataclass(frozen=True)
class SteeringResult:
    """Remote state after a rank-one outcome, with the outcome's probability."""

    remote_state: KetVector
    probability: float

    def __post_init__(self) -> None:
        if not (0.0 < self.probability <= 1.0 + NORM_TOL):
            raise InvariantError(f"probability must lie in (0, 1], got {self.probability!r}")


def generic_steer(state: BipartiteState, measured_side: Side | str, outcome: KetVector) -> SteeringResult:
    """Project one side onto ``outcome`` and return the other side's state.

    Works on the amplitude matrix directly, so it does not rely on the
    Schmidt form and serves as an independent check of the closed-form maps
    in :mod:`steerkit.steering`.
    """
    side = Side(measured_side)
    m = state.amplitude_matrix()
    if side is Side.B:
        if outcome.dim != state.dim_B:
            raise DimensionMismatchError(f"outcome has dimension {outcome.dim}, side B has {state.dim_B}")
        remote = m @ outcome.amplitudes.conj()
    else:
        if outcome.dim != state.dim_A:
            raise DimensionMismatchError(f"outcome has dimension {outcome.dim}, side A has {state.dim_A}")
        remote = m.T @ outcome.amplitudes.conj()
    prob = float(np.vdot(remote, remote).real)
    if prob <= ZERO_PROB_EPS:
        raise ZeroProbabilityError(f"outcome has zero probability (p = {prob:.3e})")
    return SteeringResult(KetVector(remote / np.sqrt(prob)), min(prob, 1.0))
