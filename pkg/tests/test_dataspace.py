"""Tests for the trigonometric Jacobi and ball data spaces."""

import math

import numpy as np
import pytest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from dslift.dataspace import (
    GridFunction,
    ball_measure_probe,
    fourier_coefficients,
    make_ball_space,
    make_trig_jacobi_space,
)
from dslift.exceptions import ParameterDomainError, UnsupportedOperationError


class TestTrigJacobiSpace:
    """Tests for the trigonometric Jacobi space on [0, pi]."""

    def test_chebyshev_eigenfunctions(self):
        """Test that the Chebyshev space has eigenfunctions 1 and sqrt(2) cos(n theta)."""
        space = make_trig_jacobi_space((-0.5, -0.5), 64, 1024)
        theta = space.grid
        table = space.eigenfunction_table(theta, 65)
        assert np.allclose(table[0], 1.0, atol=1e-12)
        for n in range(1, 65):
            assert np.max(np.abs(table[n] - math.sqrt(2) * np.cos(n * theta))) < 1e-10

    def test_eigenvalues(self):
        """Test lambda_k = k + (alpha + beta + 1) / 2."""
        cheb = make_trig_jacobi_space((-0.5, -0.5), 8, 32)
        assert np.allclose(cheb.eigenvalues, np.arange(9))
        other = make_trig_jacobi_space((1.5, 1.5), 8, 32)
        assert np.allclose(other.eigenvalues, np.arange(9) + 2.0)

    @pytest.mark.parametrize("params", [(1.5, 0.5), (2.0, 1.0), (0.0, -0.5)])
    def test_orthonormal_under_measure(self, params):
        """Test orthonormality of the eigenfunctions under the theta and cosine rules."""
        space = make_trig_jacobi_space(params, 30, 64)
        m = space.measure
        table = space.eigenfunction_table(m.points, 31)
        gram = (table * m.weights) @ table.T
        assert np.max(np.abs(gram - np.eye(31))) < 1e-11

    def test_measure_rule_selection(self):
        """Test the theta rule for half-integer offsets and the cosine rule otherwise."""
        cheb = make_trig_jacobi_space((-0.5, -0.5), 16, 64)
        assert len(cheb.measure) == 2 * 16 + 64
        assert cheb.measure.total == pytest.approx(1.0, abs=1e-12)
        other = make_trig_jacobi_space((2.0, 1.0), 16, 64)
        assert len(other.measure) == 16 + 8
        assert np.all(np.diff(other.measure.points) > 0)

    def test_spectrum_limit_and_count(self):
        """Test the spectrum limit and eigenvalue counting."""
        space = make_trig_jacobi_space((-0.5, -0.5), 32, 64)
        assert space.spectrum_limit() == 33.0
        assert space.count_below(10) == 10
        assert space.count_below(10.5) == 11

    def test_expand_matches_table(self):
        """Test that expand agrees with the eigenfunction table."""
        space = make_trig_jacobi_space((0.5, 1.5), 20, 128)
        c = np.linspace(1, 0, 21)
        assert np.allclose(space.expand(c, space.grid), c @ space.eigenfunction_table(space.grid, 21),
                           atol=1e-11)

    def test_eigenfunction_callable(self):
        """Test the single-index eigenfunction."""
        space = make_trig_jacobi_space((-0.5, -0.5), 8, 32)
        phi3 = space.eigenfunction(3)
        assert abs(phi3(np.array([0.0]))[0] - math.sqrt(2)) < 1e-12

    def test_distance(self):
        """Test the metric |theta - phi| and the diameter."""
        space = make_trig_jacobi_space((0, 0), 4, 32)
        assert space.distance(0.5, 2.0) == pytest.approx(1.5)
        assert space.diameter == pytest.approx(math.pi)

    @pytest.mark.parametrize("params", [(-0.75, 0.0), (0.0, -0.6)])
    def test_parameters_below_half_rejected(self, params):
        """Test that alpha or beta below -1/2 is rejected."""
        with pytest.raises(ParameterDomainError):
            make_trig_jacobi_space(params, 8, 32)

    def test_small_grid_rejected(self):
        """Test that a grid with fewer than 16 points is rejected."""
        with pytest.raises(ParameterDomainError):
            make_trig_jacobi_space((0, 0), 8, 8)

    def test_node_count_too_small(self):
        """Test that the measure must resolve every eigenfunction."""
        with pytest.raises(ParameterDomainError):
            make_trig_jacobi_space((0, 0), 8, 32, node_count=5)

    def test_integration_rule_is_probability(self):
        """Test that the midpoint rule has total mass 1."""
        space = make_trig_jacobi_space((0, 0), 8, 64)
        rule = space.integration_rule(500)
        assert len(rule) == 500
        assert rule.total == pytest.approx(1.0)


class TestFourierCoefficients:
    """Tests for Fourier coefficients and grid functions."""

    def test_cosine_coefficients(self):
        """Test the coefficients of cos(2 theta) in the Chebyshev space."""
        space = make_trig_jacobi_space((-0.5, -0.5), 16, 64)
        fhat = fourier_coefficients(space, lambda th: np.cos(2 * th), 16)
        expected = np.zeros(17)
        expected[2] = 1 / math.sqrt(2)
        assert np.allclose(fhat, expected, atol=1e-13)

    def test_theta_coefficients(self):
        """Test f(theta) = theta against sqrt(2) ((-1)^n - 1) / (pi n^2) and pi / 2 at n = 0."""
        space = make_trig_jacobi_space((-0.5, -0.5), 32, 64)
        fhat = fourier_coefficients(space, lambda th: th, 32)
        n = np.arange(1, 33)
        expected = np.concatenate([[math.pi / 2], math.sqrt(2) * ((-1.0) ** n - 1) / (math.pi * n**2)])
        assert np.max(np.abs(fhat - expected)) <= 1e-8

    def test_explicit_rule(self):
        """Test coefficients against a caller-supplied midpoint rule."""
        space = make_trig_jacobi_space((-0.5, -0.5), 8, 64)
        fhat = fourier_coefficients(space, lambda th: th, 3, rule=space.integration_rule(20000))
        assert fhat[0] == pytest.approx(math.pi / 2, abs=1e-8)
        assert fhat[1] == pytest.approx(-2 * math.sqrt(2) / math.pi, abs=1e-8)
        assert fhat[2] == pytest.approx(0.0, abs=1e-8)

    def test_singular_rule_zeroth_coefficient(self):
        """Test the mean of |theta - 1|^(1/2) against its closed form."""
        space = make_trig_jacobi_space((-0.5, -0.5), 8, 64)
        rule = space.singular_rule(1.0, 0.5, node_count=32)
        fhat = fourier_coefficients(space, lambda th: np.abs(th - 1.0) ** 0.5, 0, rule=rule)
        expected = (1.0 + (math.pi - 1.0) ** 1.5) / (1.5 * math.pi)
        assert fhat[0] == pytest.approx(expected, abs=1e-13)
        assert len(rule) == 64
        assert np.all(np.diff(rule.points) > 0)

    @pytest.mark.parametrize("params", [(1.5, 0.5), (0.0, 0.0)])
    def test_singular_rule_converges(self, params):
        """Test that split-rule coefficients settle at a modest node count."""
        space = make_trig_jacobi_space(params, 32, 64)
        f = lambda th: np.abs(th - 2.0) ** 0.5 * np.cos(th)
        coarse = fourier_coefficients(space, f, 32, rule=space.singular_rule(2.0, 0.5, node_count=64))
        fine = fourier_coefficients(space, f, 32, rule=space.singular_rule(2.0, 0.5, node_count=128))
        assert np.max(np.abs(coarse - fine)) < 1e-11

    def test_singular_rule_matches_dense_measure(self):
        """Test split-rule coefficients against a dense theta rule."""
        dense = make_trig_jacobi_space((1.5, 0.5), 32, 64, node_count=16000)
        f = lambda th: np.abs(th - 2.0) ** 0.5
        split = fourier_coefficients(dense, f, 32, rule=dense.singular_rule(2.0, 0.5, node_count=64))
        assert np.max(np.abs(split - fourier_coefficients(dense, f, 32))) < 1e-4

    def test_singular_rule_at_endpoint(self):
        """Test a singularity at 0 leaves a single piece."""
        space = make_trig_jacobi_space((-0.5, -0.5), 8, 64)
        rule = space.singular_rule(0.0, 0.5, node_count=24)
        assert len(rule) == 24
        fhat = fourier_coefficients(space, np.sqrt, 0, rule=rule)
        assert fhat[0] == pytest.approx(math.pi**0.5 / 1.5, abs=1e-13)

    def test_singular_rule_validation(self):
        """Test that points outside [0, pi] and exponents <= -1 are rejected."""
        space = make_trig_jacobi_space((-0.5, -0.5), 8, 64)
        with pytest.raises(ParameterDomainError):
            space.singular_rule(4.0, 0.5)
        with pytest.raises(ParameterDomainError):
            space.singular_rule(1.0, -1.0)

    def test_expansion_recovers_polynomial(self):
        """Test that a diffusion polynomial is recovered from its coefficients."""
        space = make_trig_jacobi_space((1.5, 1.5), 24, 128)
        c = np.zeros(25)
        c[[0, 3, 7]] = [0.5, -1.0, 2.0]
        fhat = fourier_coefficients(space, lambda th: space.expand(c, th), 24)
        assert np.allclose(fhat, c, atol=1e-11)

    def test_negative_index_gives_empty(self):
        """Test that max_index < 0 gives no coefficients."""
        space = make_trig_jacobi_space((0, 0), 4, 32)
        assert len(fourier_coefficients(space, np.cos, -1)) == 0

    def test_grid_function(self):
        """Test GridFunction evaluation, sup norm and table export."""
        grid = np.linspace(0, 1, 5)
        g = GridFunction(grid=grid, values=grid**2, evaluator=lambda p: np.asarray(p) ** 2)
        assert g.sup_norm() == 1.0
        assert g.sup_norm(grid < 0.6) == pytest.approx(0.25)
        assert g(np.array([3.0]))[0] == 9.0
        assert list(g.to_frame().columns) == ["point", "value"]

    def test_grid_function_length_mismatch(self):
        """Test that grid and values must align."""
        with pytest.raises(ParameterDomainError):
            GridFunction(grid=np.zeros(3), values=np.zeros(4))

    def test_grid_function_without_evaluator(self):
        """Test that off-grid evaluation needs an evaluator."""
        g = GridFunction(grid=np.zeros(2), values=np.zeros(2))
        with pytest.raises(UnsupportedOperationError):
            g(np.array([0.5]))


class TestBallSpace:
    """Tests for the kernel-level ball space."""

    @pytest.fixture(scope="class")
    def ball(self):
        return make_ball_space(2, 32)

    def test_eigenvalues(self, ball):
        """Test lambda_n = sqrt(n (n + q/2 - 1/2))."""
        n = np.arange(33)
        assert np.allclose(ball.eigenvalues, np.sqrt(n * (n + 0.5)))
        assert ball.diameter == pytest.approx(math.pi / 2)

    def test_level_zero_is_constant_one(self, ball):
        """Test that the level-0 zonal term is 1 for the probability measure."""
        t = np.linspace(-1, 1, 11)
        assert np.allclose(ball.zonal(np.array([1.0]), t), 1.0)

    def test_level_one_at_one(self, ball):
        """Test that the level-1 zonal term at t=1 counts the five degree-2 harmonics."""
        assert float(ball.zonal(np.array([0.0, 1.0]), 1.0)) == pytest.approx(5.0)

    def test_distance_folded(self, ball):
        """Test that the metric cannot tell x_hat from -x_hat."""
        x = np.array([0.6, 0.0])
        y = np.array([-0.6, 0.0])
        assert float(ball.distance(x, x)) == pytest.approx(0.0, abs=1e-7)
        assert 0 <= float(ball.distance(x, y)) <= math.pi / 2 + 1e-12

    def test_measure_is_probability(self, ball):
        """Test that the hemisphere weights sum to 1."""
        assert ball.measure.total == pytest.approx(1.0)
        assert np.all(np.sum(ball.measure.points**2, axis=1) <= 1 + 1e-12)

    def test_kernel_level_only(self, ball):
        """Test that per-index eigenfunctions are unavailable."""
        with pytest.raises(UnsupportedOperationError):
            ball.eigenfunction_table(np.zeros((1, 2)), 3)
        with pytest.raises(UnsupportedOperationError):
            fourier_coefficients(ball, lambda p: np.ones(len(p)), 3)

    def test_points_outside_ball_rejected(self, ball):
        """Test that |x| > 1 is rejected."""
        with pytest.raises(ParameterDomainError):
            ball.as_points(np.array([1.0, 1.0]))

    def test_wrong_dimension_rejected(self, ball):
        """Test that points with the wrong number of coordinates are rejected."""
        with pytest.raises(ParameterDomainError):
            ball.as_points(np.array([0.1, 0.1, 0.1]))

    def test_q_out_of_range(self):
        """Test that unsupported dimensions are rejected."""
        with pytest.raises(ParameterDomainError):
            make_ball_space(0, 8)
        with pytest.raises(ParameterDomainError):
            make_ball_space(99, 8)


class TestBallMeasure:
    """Tests for metric-ball measures and their doubling ratios."""

    def test_chebyshev_ball_measure(self):
        """Test that B(pi/2, r) has measure 2r/pi under d(theta)/pi."""
        space = make_trig_jacobi_space((-0.5, -0.5), 8, 4096)
        frame = ball_measure_probe(space, math.pi / 2, [0.25, 0.5])
        assert list(frame.columns) == ["r", "measure", "ratio"]
        assert np.allclose(frame["measure"], [0.5 / math.pi, 1.0 / math.pi], atol=1e-3)

    def test_interval_and_whole_space(self):
        """Test mu(B(pi/2, 0.1)) = 0.2 / pi and mu(B(pi/2, pi)) = 1."""
        space = make_trig_jacobi_space((1.5, 1.5), 8, 64)
        frame = ball_measure_probe(space, math.pi / 2, [0.1, math.pi])
        assert frame["measure"].iloc[0] == pytest.approx(0.2 / math.pi, rel=1e-12)
        assert frame["measure"].iloc[1] == pytest.approx(1.0, rel=1e-12)

    def test_ratio_bounded_over_centers(self):
        """Test that mu(B) / r stays below one constant over 16 centers and r in [0.01, pi]."""
        space = make_trig_jacobi_space((-0.5, -0.5), 8, 64)
        radii = np.geomspace(0.01, math.pi, 12)
        ratios = np.concatenate([
            ball_measure_probe(space, x, radii)["ratio"].to_numpy()
            for x in np.linspace(0.0, math.pi, 16)
        ])
        assert np.all(ratios > 0)
        assert np.max(ratios) <= 2 / math.pi + 1e-12

    @pytest.mark.parametrize("center", [(0.0, 0.0), (0.6, 0.0), (0.3, -0.4)])
    def test_ball_space_small_radii(self, center):
        """Test mu(B(x, r)) = 1 - cos r on the disk, with small radii resolved."""
        ball = make_ball_space(2, 8)
        radii = np.array([0.01, 0.05, 0.1, 0.2])
        frame = ball_measure_probe(ball, np.array(center), radii)
        assert np.allclose(frame["measure"], 1 - np.cos(radii), rtol=1e-10, atol=0)
        doubling = frame["measure"].iloc[2] / frame["measure"].iloc[1]
        assert doubling == pytest.approx(4.0, rel=1e-2)

    def test_ball_space_whole_and_three_dimensional(self):
        """Test total mass at r = pi / 2 and the cap formula (2r - sin 2r) / pi for q = 3."""
        disk = make_ball_space(2, 8)
        assert ball_measure_probe(disk, np.array([0.3, 0.4]), [math.pi / 2])["measure"].iloc[0] == \
            pytest.approx(1.0, rel=1e-10)
        ball = make_ball_space(3, 4)
        frame = ball_measure_probe(ball, np.zeros(3), [0.2])
        assert frame["measure"].iloc[0] == pytest.approx((0.4 - math.sin(0.4)) / math.pi, rel=1e-10)

    def test_nonpositive_radius(self):
        """Test that nonpositive radii are rejected."""
        space = make_trig_jacobi_space((0, 0), 4, 32)
        with pytest.raises(ParameterDomainError):
            ball_measure_probe(space, 1.0, [0.0])
