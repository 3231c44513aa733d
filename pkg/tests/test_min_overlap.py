import math
from itertools import combinations

import numpy as np
import pytest

from helpers import degenerate_spectrum, random_ket, random_spectrum
from steerkit.core_states import KetVector, SchmidtSpectrum, equal_up_to_phase
from steerkit.min_overlap import (
    a_star_from_constraint,
    brute_force_oracle,
    charnes_cooper,
    class_weight_split,
    closed_form_min,
    convex_fractional_objective,
    convex_objective,
    fractional_objective,
    lagrange_residual,
    linear_in_a_objective,
    optimal_phi,
    scalar_objective,
    solve_by_reduction,
    squared_objective,
)
from steerkit.steering import mutual_overlap, mutual_overlap_batch, overlap_from_alpha, steering_state

THIRDS = SchmidtSpectrum(np.array([1 / 3, 2 / 3]))
P127 = SchmidtSpectrum(np.array([0.1, 0.2, 0.7]))
P1_45 = SchmidtSpectrum(np.array([0.1, 0.45, 0.45]))


def grid_minimum(spectrum, points=200_001):
    """Enumerate two-index states on a fine theta grid for every index pair.

    The overlap depends on phi only through |beta_k|^2, so real amplitudes
    suffice. Independent of both the closed form and the golden-section
    refinement in the oracle.
    """
    theta = np.linspace(0.0, math.pi / 2, points)
    best = 1.0
    for i, j in combinations(range(spectrum.n), 2):
        phis = np.zeros((points, spectrum.n))
        phis[:, i] = np.cos(theta)
        phis[:, j] = np.sin(theta)
        best = min(best, float(np.nanmin(mutual_overlap_batch(spectrum, phis))))
    return best


class TestClosedForm:
    def test_uniform(self):
        assert closed_form_min(SchmidtSpectrum(np.full(3, 1 / 3))) == pytest.approx(1.0, abs=1e-15)

    def test_thirds(self):
        assert closed_form_min(THIRDS) == pytest.approx(2 * math.sqrt(2) / 3, abs=1e-15)

    def test_p127(self):
        assert closed_form_min(P127) == pytest.approx(2 * math.sqrt(0.07) / 0.8, abs=1e-15)
        assert closed_form_min(P127) == pytest.approx(0.6614378, abs=1e-7)

    def test_ignores_zero_coefficients(self):
        spec = SchmidtSpectrum(np.array([0.0, 0.2, 0.8]))
        assert closed_form_min(spec) == pytest.approx(2 * math.sqrt(0.16) / 1.0, abs=1e-15)

    @pytest.mark.parametrize("spec", [THIRDS, P127, P1_45], ids=["thirds", "p127", "p1_45"])
    def test_matches_grid_enumeration(self, spec):
        assert closed_form_min(spec) == pytest.approx(grid_minimum(spec), abs=1e-9)


class TestOptimalPhi:
    def test_thirds(self):
        assert np.allclose(optimal_phi(THIRDS, 0.0).amplitudes, np.array([1, 1]) / math.sqrt(2), atol=1e-15)

    def test_phase(self):
        assert np.allclose(optimal_phi(P127, math.pi).amplitudes, np.array([1, 0, -1]) / math.sqrt(2), atol=1e-15)

    def test_attains_minimum(self, rng):
        for _ in range(100):
            spec = random_spectrum(rng, int(rng.integers(2, 7)))
            lam = rng.uniform(0, 2 * math.pi)
            assert mutual_overlap(spec, optimal_phi(spec, lam)) == pytest.approx(closed_form_min(spec), abs=1e-12)

    def test_fully_degenerate_returns_basis_vector(self):
        phi = optimal_phi(SchmidtSpectrum(np.array([0.0, 0.5, 0.5])))
        assert equal_up_to_phase(phi, KetVector.basis(3, 1))

    def test_partially_degenerate_uses_lowest_index(self):
        phi = optimal_phi(P1_45)
        assert np.allclose(np.abs(phi.amplitudes) ** 2, [0.5, 0.5, 0.0], atol=1e-15)
        assert mutual_overlap(P1_45, phi) == pytest.approx(closed_form_min(P1_45), abs=1e-12)


class TestReductionChain:
    def test_stages_agree_on_feasible_points(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 7))
            p = random_spectrum(rng, n).probs
            alpha = rng.standard_normal(n)
            alpha /= np.linalg.norm(alpha)
            a = alpha**2
            f = fractional_objective(p, alpha)
            assert convex_fractional_objective(p, a) == pytest.approx(f, abs=1e-12)
            assert math.sqrt(squared_objective(p, a)) == pytest.approx(f, abs=1e-12)

            b, t = charnes_cooper(p, a)
            assert np.sum(b / t) == pytest.approx(1.0, abs=1e-12)
            assert t * np.dot(p * p, b / t) == pytest.approx(1.0, abs=1e-12)
            assert math.sqrt(convex_objective(p, b, t)) == pytest.approx(f, abs=1e-12)

            lin, s = linear_in_a_objective(p, a)
            assert s == pytest.approx(math.sqrt(t), rel=1e-12)
            assert s * s * np.dot(p * p, a) == pytest.approx(1.0, abs=1e-12)
            assert lin == pytest.approx(f, abs=1e-12)

    def test_a_star_at_s_star(self, rng):
        for _ in range(100):
            p0, p1 = np.sort(rng.uniform(0.01, 1.0, 2))
            s = 1 / math.sqrt(p0 * p1)
            a = a_star_from_constraint(p0, p1, s)
            assert a == pytest.approx(p1 / (p0 + p1), abs=1e-12)
            assert s * s * (p0**2 * a + p1**2 * (1 - a)) == pytest.approx(1.0, abs=1e-12)

    def test_s_star_minimizes_scalar_objective(self, rng):
        for _ in range(50):
            p0, p1 = np.sort(rng.uniform(0.01, 1.0, 2))
            s_star = 1 / math.sqrt(p0 * p1)
            grid = np.linspace(0.2 * s_star, 5 * s_star, 100_001)
            values = scalar_objective(p0, p1, grid)
            assert grid[np.argmin(values)] == pytest.approx(s_star, rel=1e-3)
            assert scalar_objective(p0, p1, s_star) == pytest.approx(2 * math.sqrt(p0 * p1) / (p0 + p1), abs=1e-12)

    def test_pair_objective_monotone_in_ratio(self):
        r = np.linspace(0.0, 1.0, 10_001)[:-1]
        f = np.sqrt(r) / (r + 1)
        assert np.all(np.diff(f) > 0)

    def test_pair_objective_depends_only_on_ratio(self, rng):
        for _ in range(50):
            p0, p1 = np.sort(rng.uniform(0.01, 1.0, 2))
            c = rng.uniform(0.1, 10)
            f = lambda x, y: math.sqrt(x * y) / (x + y)  # noqa: E731
            assert f(p0, p1) == pytest.approx(f(c * p0, c * p1), abs=1e-14)
            r = p0 / p1
            assert f(p0, p1) == pytest.approx(math.sqrt(r) / (r + 1), abs=1e-14)


class TestLagrange:
    def test_small_supports_are_feasible(self, rng):
        q = np.sort(rng.uniform(0.5, 5.0, 6))
        for size in (1, 2):
            for support in combinations(range(6), size):
                assert lagrange_residual(q, support) < 1e-10

    def test_large_supports_are_infeasible(self, rng):
        q = np.sort(rng.uniform(0.5, 5.0, 6))
        for size in (3, 4, 5, 6):
            for support in combinations(range(6), size):
                assert lagrange_residual(q, support) > 1e-8


class TestSolveByReduction:
    def test_thirds(self):
        sol = solve_by_reduction(THIRDS)
        t = sol.trace
        assert sol.value == pytest.approx(2 * math.sqrt(2) / 3, abs=1e-12)
        assert (t.k0, t.k1) == (0, 1)
        assert t.a_star == pytest.approx(2 / 3, abs=1e-12)
        assert t.s_star == pytest.approx(math.sqrt(9 / 2), abs=1e-12)
        assert t.ratio_r == pytest.approx(0.5, abs=1e-12)

    def test_degenerate_max_class(self):
        sol = solve_by_reduction(P1_45)
        assert sol.trace.K_min == (0,)
        assert sol.trace.K_max == (1, 2)
        assert sol.value == pytest.approx(2 * math.sqrt(0.1 * 0.45) / 0.55, abs=1e-12)
        assert sol.value == pytest.approx(0.7714, abs=1e-4)

    def test_uniform(self):
        sol = solve_by_reduction(SchmidtSpectrum(np.full(4, 0.25)))
        assert sol.value == 1.0
        assert len(sol.trace.K_min) == 4 and sol.trace.K_min == sol.trace.K_max

    def test_single_point_support(self):
        sol = solve_by_reduction(SchmidtSpectrum(np.array([0.0, 0.0, 1.0])))
        assert sol.value == 1.0
        assert equal_up_to_phase(sol.optimal_phi, KetVector.basis(3, 2))

    def test_trace_invariants(self, rng):
        for _ in range(100):
            spec = random_spectrum(rng, int(rng.integers(2, 7)))
            sol = solve_by_reduction(spec)
            t = sol.trace
            p0, p1 = spec.probs[t.k0], spec.probs[t.k1]
            assert t.objective == pytest.approx(2 * math.sqrt(p0 * p1) / (p0 + p1), abs=1e-12)
            assert t.a_star == pytest.approx(p1 / (p0 + p1), abs=1e-12)
            assert t.s_star == pytest.approx(1 / math.sqrt(p0 * p1), rel=1e-12)
            assert t.k0 in t.K_min and t.k1 in t.K_max
            assert mutual_overlap(spec, sol.optimal_phi) == pytest.approx(sol.value, abs=1e-10)
            assert equal_up_to_phase(steering_state(spec, sol.optimal_phi).remote_state, sol.optimal_alpha)

    def test_every_pair_is_listed(self):
        sol = solve_by_reduction(P127)
        pairs = {(i, j) for i, j, _ in sol.trace.pair_objectives}
        assert pairs == {(0, 1), (0, 2), (1, 2)}
        assert min(v for *_, v in sol.trace.pair_objectives) == sol.value


class TestDegenerateSplit:
    def test_class_weights_only_matter(self, rng):
        spec = degenerate_spectrum(rng, 2, 1, 3)
        ref = closed_form_min(spec)
        for _ in range(50):
            alpha = class_weight_split(spec, rng, random_phases=True)
            assert overlap_from_alpha(spec.probs, alpha.amplitudes) == pytest.approx(ref, abs=1e-12)


class TestOracle:
    def test_thirds(self):
        res = brute_force_oracle(THIRDS, 100_000, seed=1)
        assert abs(res.value - 2 * math.sqrt(2) / 3) < 1e-6

    def test_uniform(self):
        for seed in (0, 7, 12345):
            res = brute_force_oracle(SchmidtSpectrum(np.full(3, 1 / 3)), 1000, seed)
            assert res.value == pytest.approx(1.0, abs=1e-15)

    def test_p127_argmin_support(self):
        res = brute_force_oracle(P127, 100_000, seed=3)
        assert abs(res.value - 0.6614378277661477) < 1e-6
        weights = np.abs(res.argmin_phi.amplitudes) ** 2
        assert weights[1] < 1e-12
        assert weights[0] == pytest.approx(0.5, abs=1e-4)

    def test_unrefined_samples_never_beat_closed_form(self, rng):
        for _ in range(20):
            spec = random_spectrum(rng, int(rng.integers(2, 7)))
            res = brute_force_oracle(spec, 5000, seed=int(rng.integers(2**32)), refine=False)
            assert res.value >= closed_form_min(spec) - 1e-12

    def test_every_sample_respects_minimum(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 7))
            spec = random_spectrum(rng, n)
            phis = np.array([random_ket(rng, n).amplitudes for _ in range(2000)])
            assert np.all(mutual_overlap_batch(spec, phis) >= closed_form_min(spec) - 1e-12)

    def test_deterministic_across_workers(self):
        a = brute_force_oracle(P127, 20_000, seed=99, workers=1)
        b = brute_force_oracle(P127, 20_000, seed=99, workers=4)
        assert a.value == b.value
        assert np.array_equal(a.argmin_phi.amplitudes, b.argmin_phi.amplitudes)

    def test_zero_coefficients(self):
        spec = SchmidtSpectrum(np.array([0.0, 0.3, 0.7]))
        res = brute_force_oracle(spec, 2000, seed=0)
        assert res.value == pytest.approx(closed_form_min(spec), abs=1e-9)

    def test_rejects_no_samples(self):
        with pytest.raises(ValueError):
            brute_force_oracle(THIRDS, 0, seed=0)
