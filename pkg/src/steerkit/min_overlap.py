"""Minimum overlap between steered and steering states.

Three independent routes to the same number:

* :func:`closed_form_min` evaluates 2 sqrt(p_min p_max) / (p_min + p_max).
* :func:`solve_by_reduction` walks the reduction from the non-convex
  fractional program in alpha down to a discrete choice of two Schmidt
  classes, solving each stage explicitly.
* :func:`brute_force_oracle` samples the unit sphere and refines over all
  two-index states; it knows nothing about the closed form.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np

from .core_states import KetVector, SchmidtSpectrum
from .steering import mutual_overlap_batch, overlap_from_alpha

ORACLE_CHUNK = 4096
GOLDEN_ITERATIONS = 80
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def closed_form_min(spectrum: SchmidtSpectrum) -> float:
    p0, p1 = spectrum.p_min, spectrum.p_max
    return 2.0 * math.sqrt(p0 * p1) / (p0 + p1)


def _two_class_phi(spectrum: SchmidtSpectrum, i: int, j: int, lambda_phase: float) -> KetVector:
    amps = np.zeros(spectrum.n, dtype=complex)
    amps[i] = 1.0
    amps[j] = np.exp(1j * lambda_phase)
    return KetVector(amps / math.sqrt(2.0))


def optimal_phi(spectrum: SchmidtSpectrum, lambda_phase: float = 0.0) -> KetVector:
    """(|i> + e^{i lambda} |j>)/sqrt(2) with i, j the lowest indices of the extreme classes.

    For a spectrum that is uniform on its support every phi is optimal and
    the first support vector is returned.
    """
    classes = spectrum.degeneracy_classes()
    if len(classes) == 1:
        return KetVector.basis(spectrum.n, classes[0][0])
    return _two_class_phi(spectrum, classes[0][0], classes[-1][0], lambda_phase)


# -- reduction chain ---------------------------------------------------------
#
# Each stage below is a reformulation of the previous one; the tests check
# that they agree on arbitrary feasible points.


def fractional_objective(probs: np.ndarray, alpha: np.ndarray) -> float:
    """sum p_k alpha_k^2 / sqrt(sum p_k^2 alpha_k^2) over unit alpha."""
    return overlap_from_alpha(probs, alpha)


def convex_fractional_objective(probs: np.ndarray, a: np.ndarray) -> float:
    """Same objective in a_k = alpha_k^2, over the probability simplex."""
    p = np.asarray(probs, dtype=float)
    return float(np.dot(p, a) / math.sqrt(np.dot(p * p, a)))


def squared_objective(probs: np.ndarray, a: np.ndarray) -> float:
    """(sum p_k a_k)^2 / sum p_k^2 a_k: convex numerator over affine denominator."""
    p = np.asarray(probs, dtype=float)
    return float(np.dot(p, a) ** 2 / np.dot(p * p, a))


def charnes_cooper(probs: np.ndarray, a: np.ndarray) -> tuple[np.ndarray, float]:
    """Map a feasible ``a`` to (b, t) with a = b / t and t sum p_k^2 b_k / t = 1."""
    p = np.asarray(probs, dtype=float)
    t = 1.0 / float(np.dot(p * p, a))
    return t * np.asarray(a, dtype=float), t


def convex_objective(probs: np.ndarray, b: np.ndarray, t: float) -> float:
    """t (sum p_k b_k / t)^2."""
    p = np.asarray(probs, dtype=float)
    return float(t * np.dot(p, b / t) ** 2)


def linear_in_a_objective(probs: np.ndarray, a: np.ndarray) -> tuple[float, float]:
    """Return (s sum p_k a_k, s) with s fixed by s^2 sum p_k^2 a_k = 1."""
    p = np.asarray(probs, dtype=float)
    s = 1.0 / math.sqrt(float(np.dot(p * p, a)))
    return s * float(np.dot(p, a)), s


def lagrange_residual(q: Sequence[float], support: Sequence[int]) -> float:
    """Least-squares residual of q_k + lam + mu q_k^2 = 0 over k in ``support``.

    Zero residual means a stationary point of the linear program
    min sum q_k a_k exists with exactly that support. For distinct q this is
    possible only when the support has at most two elements.
    """
    qk = np.asarray(q, dtype=float)[list(support)]
    lhs = np.column_stack([np.ones_like(qk), qk**2])
    sol, *_ = np.linalg.lstsq(lhs, -qk, rcond=None)
    return float(np.linalg.norm(lhs @ sol + qk))


def a_star_from_constraint(p0: float, p1: float, s: float) -> float:
    """Weight on the first class solving s^2 (p0^2 a + p1^2 (1 - a)) = 1."""
    return (1.0 - s * s * p1 * p1) / (s * s * (p0 * p0 - p1 * p1))


def scalar_objective(p0: float, p1: float, s: float) -> float:
    """(1/s + s p0 p1) / (p0 + p1): the pair objective after eliminating a."""
    return (1.0 / s + s * p0 * p1) / (p0 + p1)


@dataclass(frozen=True)
class ReductionTrace:
    """Intermediate values of the reduction for the winning pair of classes.

    ``k0``/``k1`` are spectrum indices (the lowest member of each class).
    """

    k0: int
    k1: int
    s_star: float
    a_star: float
    ratio_r: float
    objective: float
    K_min: tuple[int, ...]
    K_max: tuple[int, ...]
    pair_objectives: tuple[tuple[int, int, float], ...] = ()


@dataclass(frozen=True)
class MinOverlapSolution:
    value: float
    optimal_phi: KetVector
    optimal_alpha: KetVector
    trace: ReductionTrace


def _alpha_to_phi(probs: np.ndarray, alpha: np.ndarray) -> KetVector:
    # beta_k = conj(alpha_k) sqrt(p_k) / sqrt(P_alpha); alpha is real here.
    return KetVector.normalized(np.conj(alpha) * np.sqrt(probs))


def solve_by_reduction(spectrum: SchmidtSpectrum) -> MinOverlapSolution:
    """Solve the minimization constructively by the two-class reduction.

    Equal Schmidt coefficients are merged into classes first; the pairwise
    problem is then solved in closed form for every pair of classes (s from
    the stationarity of the scalar objective, a from the normalization
    constraint) and the best pair is expanded back into alpha and phi.
    """
    classes = spectrum.degeneracy_classes()
    probs = spectrum.effective_probs
    class_p = [float(np.mean(spectrum.probs[list(c)])) for c in classes]
    k_min, k_max = classes[0], classes[-1]

    if len(classes) == 1:
        k = k_min[0]
        p = class_p[0]
        alpha = KetVector.basis(spectrum.n, k)
        trace = ReductionTrace(
            k0=k, k1=k, s_star=1.0 / p, a_star=0.5, ratio_r=1.0, objective=1.0,
            K_min=k_min, K_max=k_max,
        )
        return MinOverlapSolution(1.0, KetVector.basis(spectrum.n, k), alpha, trace)

    best: tuple[float, int, int, float, float] | None = None
    pair_values = []
    for ci, cj in combinations(range(len(classes)), 2):
        p0, p1 = class_p[ci], class_p[cj]
        s = 1.0 / math.sqrt(p0 * p1)
        a = a_star_from_constraint(p0, p1, s)
        weights = np.zeros(spectrum.n)
        weights[classes[ci][0]] = a
        weights[classes[cj][0]] = 1.0 - a
        value = overlap_from_alpha(probs, np.sqrt(weights))
        pair_values.append((classes[ci][0], classes[cj][0], value))
        if best is None or value < best[0]:
            best = (value, ci, cj, s, a)

    value, ci, cj, s, a = best
    k0, k1 = classes[ci][0], classes[cj][0]
    alpha = np.zeros(spectrum.n)
    alpha[k0] = math.sqrt(a)
    alpha[k1] = math.sqrt(1.0 - a)
    trace = ReductionTrace(
        k0=k0,
        k1=k1,
        s_star=s,
        a_star=a,
        ratio_r=class_p[ci] / class_p[cj],
        objective=value,
        K_min=k_min,
        K_max=k_max,
        pair_objectives=tuple(pair_values),
    )
    return MinOverlapSolution(value, _alpha_to_phi(probs, alpha), KetVector(alpha), trace)


def class_weight_split(
    spectrum: SchmidtSpectrum, rng: np.random.Generator, random_phases: bool = False
) -> KetVector:
    """An optimal alpha with the class weights spread randomly over each extreme class.

    Used to check that only the total weight per degenerate class matters.
    """
    p0, p1 = spectrum.p_min, spectrum.p_max
    weights = np.zeros(spectrum.n)
    for cls, total in ((spectrum.k_min, p1 / (p0 + p1)), (spectrum.k_max, p0 / (p0 + p1))):
        share = rng.dirichlet(np.ones(len(cls)))
        weights[list(cls)] = total * share
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, spectrum.n)) if random_phases else 1.0
    return KetVector.normalized(np.sqrt(weights) * phases)


# -- brute-force oracle ------------------------------------------------------


class OracleResult(NamedTuple):
    value: float
    argmin_phi: KetVector


def _sample_chunk(spectrum: SchmidtSpectrum, size: int, seed_seq: np.random.SeedSequence):
    rng = np.random.default_rng(seed_seq)
    support = spectrum.support
    z = rng.standard_normal((size, support.size)) + 1j * rng.standard_normal((size, support.size))
    phis = np.zeros((size, spectrum.n), dtype=complex)
    phis[:, support] = z / np.linalg.norm(z, axis=1, keepdims=True)
    values = mutual_overlap_batch(spectrum, phis)
    idx = int(np.nanargmin(values))
    return float(values[idx]), phis[idx]


def _golden_refine(spectrum: SchmidtSpectrum, pairs: list[tuple[int, int]], phases: np.ndarray):
    """Golden-section search in theta for every index pair at once."""
    n = spectrum.n
    rows = np.arange(len(pairs))
    ii = np.array([i for i, _ in pairs])
    jj = np.array([j for _, j in pairs])

    def build(theta: np.ndarray) -> np.ndarray:
        phis = np.zeros((len(pairs), n), dtype=complex)
        phis[rows, ii] = np.cos(theta)
        phis[rows, jj] = np.sin(theta) * phases
        return phis

    lo = np.zeros(len(pairs))
    hi = np.full(len(pairs), math.pi / 2)
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc = mutual_overlap_batch(spectrum, build(c))
    fd = mutual_overlap_batch(spectrum, build(d))
    for _ in range(GOLDEN_ITERATIONS):
        left = fc < fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        new_c = hi - _INV_PHI * (hi - lo)
        new_d = lo + _INV_PHI * (hi - lo)
        c, d = new_c, new_d
        fc = mutual_overlap_batch(spectrum, build(c))
        fd = mutual_overlap_batch(spectrum, build(d))
    theta = np.where(fc < fd, c, d)
    phis = build(theta)
    return mutual_overlap_batch(spectrum, phis), phis


def brute_force_oracle(
    spectrum: SchmidtSpectrum,
    samples: int,
    seed: int,
    workers: int = 1,
    refine: bool = True,
) -> OracleResult:
    """Random search for the minimum overlap, then two-index refinement.

    Samples are Gaussian complex vectors on the Schmidt support, normalized,
    drawn in fixed-size chunks with one spawned seed per chunk. The result is
    therefore bitwise identical for any ``workers`` value.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    sizes = [ORACLE_CHUNK] * (samples // ORACLE_CHUNK)
    if samples % ORACLE_CHUNK:
        sizes.append(samples % ORACLE_CHUNK)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda a: _sample_chunk(spectrum, *a), zip(sizes, seeds)))
    else:
        results = [_sample_chunk(spectrum, size, ss) for size, ss in zip(sizes, seeds)]

    best_value, best_phi = results[0]
    for value, phi in results[1:]:
        if value < best_value:
            best_value, best_phi = value, phi

    support = [int(k) for k in spectrum.support]
    pairs = list(combinations(support, 2))
    if refine and pairs:
        # Carry the best sample's relative phase into each pair; the
        # objective does not depend on it.
        phases = np.array([
            np.exp(1j * (np.angle(best_phi[j]) - np.angle(best_phi[i]))) for i, j in pairs
        ])
        values, phis = _golden_refine(spectrum, pairs, phases)
        idx = int(np.nanargmin(values))
        if values[idx] < best_value:
            best_value, best_phi = float(values[idx]), phis[idx]

    return OracleResult(min(best_value, 1.0), KetVector.normalized(best_phi))
