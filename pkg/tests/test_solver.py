import math

import numpy as np
import pytest

from coherent_receivers import (
    ConvergenceError,
    DegenerateInputError,
    DetectorModel,
    DiscriminationProblem,
    DisplacementSetup,
    InvalidBracketError,
    SingularInputError,
    displacement_error,
    minimize_scalar,
    optimal_beta,
    optimal_transmittance,
)
from coherent_receivers.solver import (
    ARG_TOL,
    ROOT_TOL,
    beta_condition,
    fixed_gamma_error,
    transmittance_condition,
)

from . import oracles

IDEAL = DetectorModel.ideal()
GAMMA = math.sqrt(24.7)


def random_grid(n=200, seed=7):
    rng = np.random.default_rng(seed)
    return [
        (rng.uniform(0.05, 2.0), rng.uniform(0.3, 1.0), rng.uniform(0.9, 1.0), rng.uniform(0.9, 1.0))
        for _ in range(n)
    ]


class TestMinimizeScalar:
    def test_parabola(self):
        res = minimize_scalar(lambda x: (x - 1.0) ** 2, (0.0, 2.0), tol=1e-8)
        assert abs(res.root - 1.0) <= 1e-8
        assert res.residual <= 1e-8

    def test_cosh(self):
        res = minimize_scalar(math.cosh, (-1.0, 1.0), tol=1e-8)
        assert abs(res.root) <= 1e-8

    def test_deterministic(self):
        f = lambda x: (x - 0.3) ** 4 + x
        assert minimize_scalar(f, (-2, 2)) == minimize_scalar(f, (-2, 2))

    @pytest.mark.parametrize("bracket", [(1.0, 1.0), (2.0, 0.0), (0.0, float("inf"))])
    def test_invalid_bracket(self, bracket):
        with pytest.raises(InvalidBracketError):
            minimize_scalar(lambda x: x * x, bracket)

    def test_iteration_cap(self):
        with pytest.raises(ConvergenceError):
            minimize_scalar(lambda x: x * x, (-1.0, 1.0), tol=1e-12, max_iter=5)

    def test_agrees_with_optimal_beta(self):
        p = DiscriminationProblem(0.4)
        res = minimize_scalar(lambda b: displacement_error(p, IDEAL, DisplacementSetup(1.0, b)), (0.0, 5.0))
        assert res.root == pytest.approx(optimal_beta(p).root, abs=1e-6)


class TestOptimalBeta:
    def test_reference_value(self):
        res = optimal_beta(DiscriminationProblem(0.4))
        assert res.root == pytest.approx(oracles.BETA_STAR_04, abs=1e-12)
        assert res.root == pytest.approx(0.748, abs=1e-3)
        assert res.residual <= ROOT_TOL
        p = displacement_error(DiscriminationProblem(0.4), IDEAL, DisplacementSetup(1.0, res.root))
        assert p == pytest.approx(oracles.P_OPT_016, abs=1e-15)

    def test_small_alpha_limit(self):
        res = optimal_beta(DiscriminationProblem(1e-4))
        assert res.root == pytest.approx(1 / math.sqrt(2), abs=1e-4)
        assert res.root == pytest.approx(oracles.BETA_STAR_SMALL, abs=1e-12)

    def test_small_alpha_limit_with_efficiency(self):
        # 2 eta beta^2 = 1 as alpha -> 0
        res = optimal_beta(DiscriminationProblem(1e-4), DetectorModel(0.55, 0, 1))
        assert res.root == pytest.approx(1 / math.sqrt(2 * 0.55), abs=1e-4)

    def test_large_alpha_limit(self):
        assert optimal_beta(DiscriminationProblem(3.0)).root == pytest.approx(3.0, abs=1e-6)

    def test_zero_alpha_is_degenerate(self):
        with pytest.raises(DegenerateInputError):
            optimal_beta(DiscriminationProblem(0.0))

    @pytest.mark.parametrize("det", [DetectorModel(0.0, 0, 1), DetectorModel(1, 0, 0.0)])
    def test_no_information_is_degenerate(self, det):
        with pytest.raises(DegenerateInputError):
            optimal_beta(DiscriminationProblem(0.4), det)

    def test_iteration_cap(self):
        with pytest.raises(ConvergenceError):
            optimal_beta(DiscriminationProblem(0.4), max_iter=10)

    def test_matches_mp_bisection_oracle(self):
        for alpha, eta, xi, t in random_grid(20, seed=3):
            res = optimal_beta(DiscriminationProblem(alpha), DetectorModel(eta, 0.0, xi), t)
            assert res.root == pytest.approx(float(oracles.beta_star(alpha, eta, xi, t)), rel=1e-12)

    def test_random_grid_residual_and_minimiser(self):
        for alpha, eta, xi, t in random_grid():
            p = DiscriminationProblem(alpha)
            det = DetectorModel(eta, 0.0, xi)
            res = optimal_beta(p, det, t)
            assert abs(beta_condition(p, det, t, res.root)) <= ROOT_TOL
            assert res.iterations <= 200
            best = displacement_error(p, det, DisplacementSetup(t, res.root))
            for factor in (1 - 1e-3, 1 + 1e-3):
                assert best <= displacement_error(p, det, DisplacementSetup(t, res.root * factor))

    def test_cross_method_on_grid(self):
        for alpha, eta, xi, t in random_grid(25, seed=11):
            p = DiscriminationProblem(alpha)
            det = DetectorModel(eta, 0.0, xi)
            gs = minimize_scalar(lambda b: displacement_error(p, det, DisplacementSetup(t, b)),
                                 (0.0, 5.0), tol=ARG_TOL)
            assert gs.root == pytest.approx(optimal_beta(p, det, t).root, abs=1e-6)

    def test_dark_counts_do_not_move_optimum(self):
        p = DiscriminationProblem(0.4)
        assert optimal_beta(p, DetectorModel(1, 0.3, 1)).root == optimal_beta(p).root


class TestOptimalTransmittance:
    def test_reference_ideal(self):
        res = optimal_transmittance(DiscriminationProblem(0.4), IDEAL, GAMMA)
        assert res.root == pytest.approx(oracles.T_STAR_IDEAL, abs=1e-12)
        assert res.root == pytest.approx(0.9774, abs=1e-3)
        assert res.residual <= 1e-8
        assert fixed_gamma_error(DiscriminationProblem(0.4), IDEAL, GAMMA, res.root) == pytest.approx(
            oracles.P_T_STAR_IDEAL, abs=1e-15)

    def test_constraint_consistency(self):
        # 1 - T* is close to beta*^2 / gamma^2; the gap is the signal lost at the splitter
        res = optimal_transmittance(DiscriminationProblem(0.4), IDEAL, GAMMA)
        assert 1 - res.root == pytest.approx(oracles.BETA_STAR_04**2 / 24.7, rel=0.05)

    def test_reference_apparatus_detector(self):
        det = DetectorModel(0.55, 0.0, 0.996)
        res = optimal_transmittance(DiscriminationProblem(0.4), det, GAMMA)
        assert res.root == pytest.approx(oracles.T_STAR_APPARATUS_DET, abs=1e-12)
        assert fixed_gamma_error(DiscriminationProblem(0.4), det, GAMMA, res.root) == pytest.approx(
            oracles.P_T_STAR_APPARATUS_DET, abs=1e-15)

    def test_stationarity_residual(self):
        for alpha, eta, xi, _ in random_grid(30, seed=5):
            p = DiscriminationProblem(alpha)
            det = DetectorModel(eta, 0.0, xi)
            res = optimal_transmittance(p, det, GAMMA)
            assert 0 < res.root < 1
            assert abs(transmittance_condition(p, det, GAMMA, res.root)) <= 1e-8
            best = fixed_gamma_error(p, det, GAMMA, res.root)
            for dt in (-1e-4, 1e-4):
                assert best <= fixed_gamma_error(p, det, GAMMA, res.root + dt)

    def test_large_gamma_limit(self):
        p = DiscriminationProblem(0.4)
        beta_star = optimal_beta(p).root
        prev = None
        for g2 in (1e2, 1e4, 1e6, 1e8):
            t = optimal_transmittance(p, IDEAL, math.sqrt(g2)).root
            beta = math.sqrt((1 - t) * g2)
            gap = abs(beta - beta_star)
            if prev is not None:
                assert gap < prev
            prev = gap
        assert t == pytest.approx(1.0, abs=1e-7)
        assert beta == pytest.approx(beta_star, abs=1e-4)

    def test_singular(self):
        with pytest.raises(SingularInputError):
            optimal_transmittance(DiscriminationProblem(0.4), IDEAL, 0.4)

    def test_degenerate(self):
        with pytest.raises(DegenerateInputError):
            optimal_transmittance(DiscriminationProblem(0.0), IDEAL, GAMMA)
        with pytest.raises(DegenerateInputError):
            optimal_transmittance(DiscriminationProblem(0.4), IDEAL, 0.0)

    def test_weak_oscillator_below_signal(self):
        # |gamma| < |alpha| is legal; the condition is regular there
        p = DiscriminationProblem(1.0)
        res = optimal_transmittance(p, IDEAL, 0.5)
        assert abs(transmittance_condition(p, IDEAL, 0.5, res.root)) <= 1e-8
