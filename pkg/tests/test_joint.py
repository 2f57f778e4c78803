"""Tests for connection coefficients, joint spaces, image sets, lifting and diffusion distances."""

import math

import numpy as np
import pytest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from dslift.dataspace import make_ball_space, make_trig_jacobi_space
from dslift.exceptions import (
    IncompatibleParametersError,
    IncompatibleSpacesError,
    InsufficientSpectrumError,
    NonConvergenceError,
    ParameterDomainError,
)
from dslift.joint import (
    band_violation,
    build_joint_jacobi,
    compute_cstar,
    connection_matrix,
    diffusion_distance,
    image_set,
    fit_joint_envelope,
    joint_coefficients,
    joint_heat_kernel,
    joint_heat_kernel_matrix,
    joint_kernel,
    joint_kernel_matrix,
    joint_sigma,
    lebesgue_statistic,
    lift,
    localization_profile,
    omega_weight,
    spectral_ratio,
    transplantation_residual,
    variation_statistic,
)
from dslift.kernels import lebesgue_constant, localized_kernel, make_bump
from dslift.orthopoly import JacobiParams

CHEB = JacobiParams(-0.5, -0.5)
TARGET = JacobiParams(1.5, 1.5)


@pytest.fixture(scope="module")
def transplant_joint():
    return build_joint_jacobi(TARGET, CHEB, 64, grid_size=512)


@pytest.fixture(scope="module")
def identity_joint():
    return build_joint_jacobi(CHEB, CHEB, 64, grid_size=512)


class TestOmega:
    """Tests for the transplantation weight."""

    def test_sine_squared(self):
        """Test Omega = sin^2 theta for offsets a = b = 1."""
        theta = np.linspace(0, math.pi, 9)
        assert np.allclose(omega_weight(TARGET, CHEB, theta), np.sin(theta) ** 2)

    def test_identity_weight(self):
        """Test Omega = 1 for equal parameters."""
        assert omega_weight(CHEB, CHEB, 1.0) == 1.0

    def test_non_integer_offsets_rejected(self):
        """Test that odd parameter differences raise IncompatibleParametersError."""
        with pytest.raises(IncompatibleParametersError) as exc_info:
            omega_weight((0.0, 0.0), (0.5, 0.0), 1.0)
        assert exc_info.value.exit_code == 2


class TestConnectionMatrix:
    """Tests for the banded connection coefficients."""

    def test_identity(self):
        """Test that equal parameters give the identity."""
        A = connection_matrix((0.0, 0.0), (0.0, 0.0), 16)
        assert A.bandwidth == 0
        assert np.allclose(A.to_dense(), np.eye(17), atol=1e-12)

    def test_bandwidth(self):
        """Test bandwidth 2a + 2b."""
        assert connection_matrix(TARGET, CHEB, 16).bandwidth == 4
        assert connection_matrix((2.5, -0.5), (0.5, -0.5), 16).bandwidth == 2

    def test_band_holds(self):
        """Test that entries outside the band vanish."""
        assert band_violation(TARGET, CHEB, 64) <= 1e-10
        assert band_violation((2.0, 1.0), (0.0, 1.0), 64) <= 1e-10

    def test_entry_access(self):
        """Test indexing inside and outside the band."""
        A = connection_matrix(TARGET, CHEB, 16)
        assert A[0, 10] == 0.0
        assert A[3, 3] != 0.0
        with pytest.raises(ParameterDomainError):
            A[0, 17]

    def test_lower_triangle_for_dominating_target(self):
        """Test A[j, k] = 0 for j > k when the target parameters dominate."""
        dense = connection_matrix(TARGET, CHEB, 24).to_dense()
        assert np.max(np.abs(np.tril(dense, -1))) < 1e-12

    def test_frame(self):
        """Test the tabular export."""
        frame = connection_matrix(TARGET, CHEB, 8).to_frame()
        assert list(frame.columns) == ["j", "k", "value"]
        assert frame["j"].is_monotonic_increasing

    def test_degree_validated(self):
        """Test that max_degree must be positive."""
        with pytest.raises(ParameterDomainError):
            connection_matrix(TARGET, CHEB, 0)


class TestJointSpace:
    """Tests for joint construction and the preservation constant."""

    def test_cstar_chebyshev_identity(self):
        """Test the literal and plateau preservation constants on the Chebyshev identity."""
        joint = build_joint_jacobi(CHEB, CHEB, 256, grid_size=64)
        assert joint.cstar == pytest.approx(1.45)
        assert compute_cstar(joint, 256) == pytest.approx(1.45)
        assert joint.cstar_plateau == pytest.approx(2.85)
        assert compute_cstar(joint, 256, plateau=True) == pytest.approx(2.85)

    def test_cstar_transplant(self, transplant_joint):
        """Test the constants for (3/2, 3/2) over (-1/2, -1/2), set by the pair j = k = 0."""
        assert transplant_joint.cstar == pytest.approx(2.05)
        assert transplant_joint.cstar_plateau == pytest.approx(4.0)

    def test_spectrum_limit(self, transplant_joint):
        """Test the smallest joint eigenvalue outside the computed band."""
        assert transplant_joint.spectrum_limit() == pytest.approx(math.hypot(63, 65))

    def test_joint_eigenvalue_rules(self):
        """Test the Pythagorean and target-only joint eigenvalues."""
        pyth = build_joint_jacobi(CHEB, CHEB, 16, grid_size=64)
        tgt = build_joint_jacobi(CHEB, CHEB, 16, grid_size=64, ell_rule="target")
        assert float(pyth.joint_eigenvalue(3, 4)) == pytest.approx(5.0)
        assert float(tgt.joint_eigenvalue(3, 4)) == pytest.approx(3.0)

    def test_unknown_ell_rule(self):
        """Test that unknown joint eigenvalue rules are rejected."""
        with pytest.raises(ParameterDomainError):
            build_joint_jacobi(CHEB, CHEB, 8, grid_size=64, ell_rule="max")

    def test_spectral_ratio_identity(self, identity_joint):
        """Test alpha = 1/sqrt(2) on the Pythagorean identity joint space."""
        assert spectral_ratio(identity_joint) == pytest.approx(1 / math.sqrt(2))


class TestJointKernel:
    """Tests for joint kernels and joint sigma."""

    def test_identity_reduces_to_single_space(self, identity_joint):
        """Test Phi_n(joint) = Phi_{n / sqrt(2)} of the single space for equal parameters."""
        single = make_trig_jacobi_space(CHEB, 64, 512)
        x = np.linspace(0.1, 3.0, 25)
        y = np.linspace(3.0, 0.2, 25)
        got = joint_kernel(identity_joint, 40, x, y)
        want = localized_kernel(single, 40 / math.sqrt(2), x, y)
        assert np.allclose(got, want, atol=1e-10)

    def test_insufficient_spectrum(self, transplant_joint):
        """Test that kernels beyond the computed band raise."""
        with pytest.raises(InsufficientSpectrumError):
            joint_kernel(transplant_joint, 1000, 0.5, 0.5)

    def test_transplantation_identity(self, transplant_joint):
        """Test sum_j A[j, k] phi1_j = Omega phi2_k."""
        worst = max(transplantation_residual(transplant_joint, k) for k in range(21))
        assert worst < 1e-9

    def test_transplantation_index_range(self, transplant_joint):
        """Test that indices whose band leaves the computed range are rejected."""
        with pytest.raises(ParameterDomainError):
            transplantation_residual(transplant_joint, 62)

    def test_joint_sigma_transplants_eigenfunction(self, transplant_joint):
        """Test sigma_n(joint; phi2_3) = Omega phi2_3 once n clears the preservation constant."""
        phi = transplant_joint.base.eigenfunction(3)
        got = joint_sigma(transplant_joint, 32, phi)
        grid = transplant_joint.target.grid
        want = omega_weight(TARGET, CHEB, grid) * phi(grid)
        assert np.max(np.abs(got.values - want)) < 1e-9
        assert got.meta["n"] == 32.0

    def test_coefficients_identity(self, identity_joint):
        """Test that a single base coefficient passes through the identity band unchanged."""
        fhat = np.zeros(200)
        fhat[5] = 1.0
        coeffs = joint_coefficients(identity_joint, 40, fhat)
        assert coeffs[5] == pytest.approx(1.0, abs=1e-10)
        coeffs[5] = 0.0
        assert np.max(np.abs(coeffs)) < 1e-10

    def test_joint_sigma_matches_quadrature_route(self, transplant_joint):
        """Test that joint sigma equals the joint kernel integrated against the base measure."""
        f = lambda th: np.exp(np.cos(th))
        rule = transplant_joint.base.measure
        grid = transplant_joint.target.grid
        mat = joint_kernel_matrix(transplant_joint, 32, grid, rule.points)
        via_kernel = mat @ (rule.weights * f(rule.points))
        via_coefficients = joint_sigma(transplant_joint, 32, f).values
        assert np.max(np.abs(via_kernel - via_coefficients)) < 1e-10

    @pytest.mark.parametrize("m", [32, 48, 64])
    def test_polynomial_preservation(self, transplant_joint, m):
        """Test sigma_m(joint; P) = Omega P for base polynomials of degree below n = 8 and m >= cstar n."""
        rng = np.random.default_rng(5)
        c = rng.standard_normal(8)
        base = transplant_joint.base
        P = lambda th: base.expand(c, th)
        assert m >= transplant_joint.cstar_plateau * 8
        grid = transplant_joint.target.grid
        got = joint_sigma(transplant_joint, m, P).values
        want = omega_weight(TARGET, CHEB, grid) * P(grid)
        assert np.max(np.abs(got - want)) < 1e-9

    def test_lebesgue_statistic_bounded(self, transplant_joint):
        """Test that the kernel integral max_x int |Phi_n(x, y)| d mu2(y) stays flat under doubling."""
        values = [lebesgue_statistic(transplant_joint, n, grid_size=256) for n in (16, 32, 64)]
        assert all(v > 0 for v in values)
        assert max(b / a for a, b in zip(values, values[1:])) <= 1.25

    def test_operator_localized_off_support(self):
        """Test that sigma_n(joint; f) decays on B when f vanishes on A."""
        joint = build_joint_jacobi(TARGET, CHEB, 64, grid_size=512, node_count=2048)
        image = image_set(joint, (math.pi / 2, 0.5), 1 / 16, 1 / 16)
        f = make_bump(joint.base, 2.8, 0.05, 0.45)
        assert np.all(f(joint.base.grid[image.base_mask]) == 0.0)
        sup = {n: float(np.max(np.abs(joint_sigma(joint, n, f)(image.B)))) for n in (16, 64)}
        assert sup[64] <= sup[16] / 4

    def test_variation_statistic_bounded(self):
        """Test that the variation statistic divided by n stays bounded for n = 16 to 512."""
        joint = build_joint_jacobi(TARGET, CHEB, 365, grid_size=256)
        values = [variation_statistic(joint, 16 * 2**i) for i in range(6)]
        assert all(v > 0 for v in values)
        assert max(values) / min(values) <= 2.5

    def test_variation_statistic_chebyshev(self, identity_joint):
        """Test the variation statistic (1 + 2 (K - 1)) / n on the Chebyshev identity."""
        # sqrt(2) k < 20 for k <= 14
        assert variation_statistic(identity_joint, 20) == pytest.approx(29 / 20, rel=1e-10)

    def test_lebesgue_statistic_identity(self, identity_joint):
        """Test that the joint Lebesgue statistic equals the single-space constant at n / sqrt(2)."""
        single = make_trig_jacobi_space(CHEB, 64, 512)
        joint_value = lebesgue_statistic(identity_joint, 40, grid_size=128, rule_size=2048)
        single_value = lebesgue_constant(single, 40 / math.sqrt(2), grid_size=128, rule_size=2048)
        assert joint_value == pytest.approx(single_value, rel=1e-9)

    def test_localization(self):
        """Test fast off-diagonal decay of the joint kernel."""
        joint = build_joint_jacobi(TARGET, CHEB, 186, grid_size=256)
        profile = localization_profile(joint, 0.5, [64, 128, 256], grid_size=256)
        assert profile.slope <= -3.0


class TestJointHeat:
    """Tests for the joint heat kernel."""

    def test_identity_matches_doubled_rate(self, identity_joint):
        """Test the joint heat kernel on equal parameters against exp(-2 lambda^2 t)."""
        pts = np.linspace(0.0, math.pi, 33)
        got = joint_heat_kernel(identity_joint, 0.05, pts, pts[::-1]).value
        tab = identity_joint.target.eigenfunction_table(pts, 65)
        weights = np.exp(-2.0 * identity_joint.target.eigenvalues**2 * 0.05)
        want = np.sum(weights[:, None] * tab * tab[:, ::-1], axis=0)
        assert np.allclose(got, want, atol=1e-12)

    def test_time_validation(self, identity_joint):
        """Test that t > 1 needs the diagnostic flag."""
        with pytest.raises(ParameterDomainError):
            joint_heat_kernel(identity_joint, 2.0, 0.5, 0.5)
        result = joint_heat_kernel(identity_joint, 2.0, 0.5, 0.5, diagnostic=True)
        k = np.arange(1, 11)
        want = 1 + 2 * np.sum(np.exp(-4.0 * k**2) * np.cos(0.5 * k) ** 2)
        assert result.value == pytest.approx(want, rel=1e-12)

    def test_matrix_diagonal_matches_pointwise(self, identity_joint):
        """Test the kernel matrix diagonal against aligned pointwise evaluation."""
        pts = np.linspace(0.1, 3.0, 17)
        mat, trunc = joint_heat_kernel_matrix(identity_joint, 0.05, pts, pts)
        assert mat.shape == (17, 17)
        got = joint_heat_kernel(identity_joint, 0.05, pts, pts)
        assert np.allclose(np.diag(mat), got.value, atol=1e-12)
        assert trunc == got.truncation

    def test_envelope_decays(self, transplant_joint):
        """Test a negative Gaussian envelope slope for the transplanted heat kernel."""
        fit = fit_joint_envelope(transplant_joint, 0.1)
        assert fit.pairs > 0
        assert fit.slope < 0
        assert fit.c2 == pytest.approx(-fit.slope)

    def test_large_time_limit(self, identity_joint):
        """Test that at t = 50 the joint heat kernel reduces to the constant pair."""
        pts = np.linspace(0.0, math.pi, 9)
        result = joint_heat_kernel(identity_joint, 50.0, pts, pts[::-1], diagnostic=True)
        assert np.allclose(result.value, 1.0, atol=1e-15)


class TestImageSet:
    """Tests for image sets of balls."""

    @pytest.fixture(scope="class")
    def joint(self):
        return build_joint_jacobi(CHEB, CHEB, 16, grid_size=1024)

    def test_intervals(self, joint):
        """Test B_minus = B(theta0, r0 - r - s) and B = B(theta0, r0 - r) up to the grid."""
        result = image_set(joint, (math.pi / 2, 0.8), 0.1, 0.1)
        lo, hi = result.interval("B_minus")
        assert abs(lo - (math.pi / 2 - 0.6)) <= result.spacing + 1e-12
        assert abs(hi - (math.pi / 2 + 0.6)) <= result.spacing + 1e-12
        lo, hi = result.interval("B")
        assert abs(lo - (math.pi / 2 - 0.7)) <= 2 * result.spacing + 1e-12
        assert abs(hi - (math.pi / 2 + 0.7)) <= 2 * result.spacing + 1e-12

    def test_empty(self, joint):
        """Test that a margin wider than A gives an empty image set."""
        result = image_set(joint, (math.pi / 2, 0.1), 0.1, 0.1)
        assert result.is_empty
        assert result.interval() is None

    def test_whole_space(self, joint):
        """Test that A covering the whole base gives the whole target."""
        result = image_set(joint, lambda pts: np.ones(len(pts), dtype=bool), 0.1, 0.1)
        assert len(result.B) == len(joint.target.grid)

    def test_contains(self, joint):
        """Test membership in B."""
        result = image_set(joint, (math.pi / 2, 0.8), 0.1, 0.1)
        assert result.contains([math.pi / 2])[0]
        assert not result.contains([0.1])[0]

    def test_margins_validated(self, joint):
        """Test that r and s must be positive."""
        with pytest.raises(ParameterDomainError):
            image_set(joint, (1.0, 0.5), 0.0, 0.1)

    def test_monotone_in_region(self, joint):
        """Test that nested regions give nested image sets."""
        regions = [(math.pi / 2, 0.6), (math.pi / 2, 0.9), (1.4, 1.2)]
        sets = [image_set(joint, region, 0.1, 0.1).B for region in regions]
        assert len(sets[0]) > 0
        for inner, outer in zip(sets, sets[1:]):
            assert np.all(np.isin(inner, outer))
            assert len(inner) <= len(outer)


class TestLift:
    """Tests for lifting functions through the joint space."""

    @pytest.fixture(scope="class")
    def image(self, transplant_joint):
        return image_set(transplant_joint, (math.pi / 2, 0.5), 1 / 16, 1 / 16)

    def test_eigenfunction_lift(self, transplant_joint, image):
        """Test that phi2_3 lifts to Omega phi2_3 and converges at level 3."""
        phi = transplant_joint.base.eigenfunction(3)
        result = lift(transplant_joint, phi, image.B, image)
        want = omega_weight(TARGET, CHEB, image.B) * phi(image.B)
        assert np.max(np.abs(result.values - want)) < 1e-9
        assert result.level == 3
        assert list(result.report.columns) == ["level", "n", "sup_diff", "thmcon1_partial"]
        assert result.differences[-1] <= 1e-8

    def test_points_outside_image_rejected(self, transplant_joint, image):
        """Test that target points outside B are rejected."""
        with pytest.raises(ParameterDomainError):
            lift(transplant_joint, np.cos, [0.05], image)

    def test_nonconvergence(self, transplant_joint, image):
        """Test that an unreachable tolerance raises NonConvergenceError."""
        f = lambda th: np.abs(th - math.pi / 2) ** 0.5
        with pytest.raises(NonConvergenceError) as exc_info:
            lift(transplant_joint, f, image.B, image, tolerance=1e-15, max_level=2)
        assert len(exc_info.value.differences) == 2

    def test_fixed_level(self, transplant_joint, image):
        """Test that a fixed level skips the convergence loop and reports one row."""
        phi = transplant_joint.base.eigenfunction(3)
        result = lift(transplant_joint, phi, image.B, image, level=4)
        want = omega_weight(TARGET, CHEB, image.B) * phi(image.B)
        assert np.max(np.abs(result.values - want)) < 1e-9
        assert result.level == 4
        assert result.n == pytest.approx(16 * transplant_joint.cstar_plateau)
        assert len(result.report) == 1
        assert result.differences == []

    def test_fixed_level_validated(self, transplant_joint, image):
        """Test that negative levels and levels beyond the spectrum are rejected."""
        with pytest.raises(ParameterDomainError):
            lift(transplant_joint, np.cos, image.B, image, level=-1)
        with pytest.raises(InsufficientSpectrumError):
            lift(transplant_joint, np.cos, image.B, image, level=6)

    def test_rule_replaces_base_measure(self, transplant_joint, image):
        """Test that a split rule for the base coefficients gives the same lift for smooth f."""
        f = lambda th: np.exp(np.cos(th))
        rule = transplant_joint.base.singular_rule(np.pi / 2, 0.0)
        plain = lift(transplant_joint, f, image.B, image, level=4)
        split = lift(transplant_joint, f, image.B, image, level=4, rule=rule)
        assert np.max(np.abs(split.values - plain.values)) < 1e-10

    def test_tolerance_consistency(self, transplant_joint, image):
        """Test that lifts at tolerance tau and tau / 10 differ by at most tau on B."""
        f = lambda th: np.exp(np.cos(th))
        coarse = lift(transplant_joint, f, image.B, image, tolerance=1e-6)
        fine = lift(transplant_joint, f, image.B, image, tolerance=1e-7)
        assert np.max(np.abs(coarse.values - fine.values)) <= 1e-6
        assert fine.level >= coarse.level


class TestDiffusionDistance:
    """Tests for diffusion distances between spaces."""

    @pytest.fixture(scope="class")
    def spaces(self):
        return (make_trig_jacobi_space(TARGET, 80, 256), make_trig_jacobi_space(CHEB, 80, 256))

    def test_self_distance_zero(self, spaces):
        """Test d(x, x) = 0 within one space."""
        s1, _ = spaces
        assert diffusion_distance(s1, s1, 0.05, 1.2, 1.2) <= 1e-8

    def test_single_space_matches_heat_kernel(self, spaces):
        """Test d^2 = K_2t(x, x) + K_2t(y, y) - 2 K_2t(x, y) within one space."""
        _, s2 = spaces
        from dslift.kernels import heat_kernel
        x, y, t = 0.7, 2.0, 0.05
        kxx = heat_kernel(s2, 2 * t, x, x).value
        kyy = heat_kernel(s2, 2 * t, y, y).value
        kxy = heat_kernel(s2, 2 * t, x, y).value
        assert diffusion_distance(s2, s2, t, x, y) == pytest.approx(math.sqrt(kxx + kyy - 2 * kxy), rel=1e-9)

    def test_between_spaces_positive(self, spaces):
        """Test a positive distance between different spaces."""
        s1, s2 = spaces
        assert diffusion_distance(s1, s2, 0.05, math.pi / 2, math.pi / 2) > 0

    def test_point_range(self, spaces):
        """Test that points outside [0, pi] are rejected."""
        s1, s2 = spaces
        with pytest.raises(ParameterDomainError):
            diffusion_distance(s1, s2, 0.05, 4.0, 1.0)

    def test_ball_rejected(self, spaces):
        """Test that kernel-level spaces are rejected."""
        s1, _ = spaces
        with pytest.raises(IncompatibleSpacesError):
            diffusion_distance(s1, make_ball_space(2, 8), 0.05, 1.0, 1.0)
