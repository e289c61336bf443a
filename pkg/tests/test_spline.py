import numpy as np
import pytest

from gaitnorm import ValidationError, eval_spline, fit_natural_cubic

from helpers import (dense_natural_spline_m, random_knots,
                     spline_first_derivative, spline_second_derivative,
                     spline_value_on_segment)


class TestFit:
    def test_linear_data_reproduced(self):
        s = fit_natural_cubic([(0, 0), (1, 1), (2, 2), (3, 3)])
        assert eval_spline(s, 1.5) == pytest.approx(1.5, abs=1e-12)
        for t in (0.25, 0.9, 2.7):
            assert eval_spline(s, t) == pytest.approx(t, abs=1e-12)

    def test_three_knot_hand_case(self):
        # interior equation: 4*M1 = 6*((0-1)/1 - (1-0)/1) = -12
        s = fit_natural_cubic([(0, 0), (1, 1), (2, 0)])
        np.testing.assert_allclose(s.m, [0.0, -3.0, 0.0], atol=1e-12)
        assert eval_spline(s, 0.5) == pytest.approx(0.6875, abs=1e-9)

    def test_two_knots_is_a_line(self):
        s = fit_natural_cubic([(0, 5), (2, 9)])
        assert eval_spline(s, 1.0) == pytest.approx(7.0, abs=1e-12)
        np.testing.assert_allclose(s.m, [0.0, 0.0])

    def test_single_knot_rejected(self):
        with pytest.raises(ValidationError):
            fit_natural_cubic([(0, 5)])

    def test_duplicate_x_rejected(self):
        with pytest.raises(ValidationError):
            fit_natural_cubic([(0, 0), (1, 1), (1, 2), (2, 0)])

    def test_decreasing_x_rejected(self):
        with pytest.raises(ValidationError):
            fit_natural_cubic([(0, 0), (2, 1), (1, 2)])

    def test_nonfinite_rejected(self):
        with pytest.raises(ValidationError):
            fit_natural_cubic([(0, 0), (1, float("nan")), (2, 0)])


class TestEval:
    def test_knot_reproduction(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            knots = random_knots(rng, int(rng.integers(2, 13)))
            s = fit_natural_cubic(knots)
            for x, y in knots:
                tol = 1e-12 * max(1.0, abs(y))
                assert abs(eval_spline(s, x) - y) <= tol

    def test_extrapolation_rejected(self):
        s = fit_natural_cubic([(0, 0), (1, 1), (2, 2), (3, 3)])
        with pytest.raises(ValidationError):
            eval_spline(s, 3.5)
        with pytest.raises(ValidationError):
            eval_spline(s, -0.1)


class TestAgainstDenseOracle:
    def test_coefficients_match_dense_solve(self):
        rng = np.random.default_rng(22)
        for _ in range(200):
            knots = random_knots(rng, int(rng.integers(3, 13)))
            s = fit_natural_cubic(knots)
            x = np.array([p[0] for p in knots])
            y = np.array([p[1] for p in knots])
            np.testing.assert_allclose(s.m, dense_natural_spline_m(x, y),
                                       atol=1e-9)

    def test_natural_boundary(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            knots = random_knots(rng, int(rng.integers(3, 13)))
            s = fit_natural_cubic(knots)
            n = len(knots)
            assert abs(spline_second_derivative(s, 0, s.x[0])) < 1e-9
            assert abs(spline_second_derivative(s, n - 2, s.x[-1])) < 1e-9

    def test_c2_continuity_at_interior_knots(self):
        rng = np.random.default_rng(24)
        for _ in range(50):
            knots = random_knots(rng, int(rng.integers(4, 13)))
            s = fit_natural_cubic(knots)
            for i in range(1, len(knots) - 1):
                t = s.x[i]
                assert spline_value_on_segment(s, i - 1, t) == pytest.approx(
                    spline_value_on_segment(s, i, t), abs=1e-9)
                assert spline_first_derivative(s, i - 1, t) == pytest.approx(
                    spline_first_derivative(s, i, t), abs=1e-9)
                assert spline_second_derivative(s, i - 1, t) == pytest.approx(
                    spline_second_derivative(s, i, t), abs=1e-9)
