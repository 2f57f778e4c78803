"""
Compact data spaces built from orthogonal-polynomial eigen-systems.

A data space bundles a metric, a probability measure (realized by a
quadrature rule), a nondecreasing eigenvalue sequence and an orthonormal
eigen-system. Two concrete spaces are provided:

- ``TrigJacobiSpace``: the trigonometric Jacobi functions on [0, pi] with
  the measure d(theta) / pi and exponent 1.
- ``BallSpace``: even spherical harmonics lifted to the unit ball of R^q,
  available at kernel level only (through the addition formula).

Example:
    >>> space = make_trig_jacobi_space((-0.5, -0.5), max_index=16, grid_size=64)
    >>> float(space.eigenvalues[3])
    3.0
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import pandas as pd
from scipy.special import roots_jacobi

from .config import Config, get_logger
from .exceptions import ParameterDomainError, UnsupportedOperationError
from .orthopoly import (
    JacobiParams,
    OrthoPolyBasis,
    as_params,
    build_basis,
    gauss_rule,
    sphere_area,
    sphere_rule,
    value_at_one,
)

logger = get_logger("dataspace")

__all__ = [
    "Measure",
    "GridFunction",
    "DataSpace",
    "TrigJacobiSpace",
    "BallSpace",
    "make_trig_jacobi_space",
    "make_ball_space",
    "fourier_coefficients",
    "ball_measure_probe",
]


@dataclass(frozen=True)
class Measure:
    """Discrete realization of a probability measure: points and positive weights."""

    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))


@dataclass(frozen=True)
class GridFunction:
    """
    Values of a function on an ordered grid, plus an optional evaluator
    for off-grid points.

    Attributes:
        grid: Ordered points.
        values: Values aligned with ``grid``.
        evaluator: Callable mapping a point array to values, or None.
        meta: Extra facts about how the function was produced.
    """

    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    evaluator: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.grid) != len(self.values):
            raise ParameterDomainError(
                f"grid has {len(self.grid)} points but {len(self.values)} values were given"
            )

    def __call__(self, points) -> np.ndarray:
        if self.evaluator is None:
            raise UnsupportedOperationError("This grid function has no off-grid evaluator")
        return self.evaluator(points)

    def sup_norm(self, mask: np.ndarray | None = None) -> float:
        """Maximum absolute value, optionally over a boolean mask of the grid."""
        vals = self.values if mask is None else self.values[mask]
        return float(np.max(np.abs(vals))) if len(vals) else 0.0

    def to_frame(self) -> pd.DataFrame:
        """Two-column table (point, value) for one-dimensional grids."""
        grid = np.asarray(self.grid)
        if grid.ndim == 1:
            return pd.DataFrame({"point": grid, "value": self.values})
        cols = {f"x{i + 1}": grid[:, i] for i in range(grid.shape[1])}
        cols["value"] = self.values
        return pd.DataFrame(cols)


class DataSpace(ABC):
    """
    A compact data space.

    Subclasses provide the metric, the eigenvalue formula and either
    per-index eigenfunctions (``eigenfunction_table``) or a zonal kernel
    evaluator (``zonal_block``).
    """

    label: str
    exponent_q: float
    max_index: int
    measure: Measure
    grid: np.ndarray
    has_eigenfunctions: bool = False

    @abstractmethod
    def eigenvalue(self, index) -> np.ndarray:
        """Eigenvalue formula, valid for any nonnegative index (also beyond max_index)."""

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eigenvalue(np.arange(self.max_index + 1))

    @abstractmethod
    def as_points(self, x) -> np.ndarray:
        """Normalize one point or a batch of points to the space's array layout."""

    @abstractmethod
    def distance(self, x, y) -> np.ndarray:
        """Metric, broadcasting over batches of points."""

    @property
    def diameter(self) -> float:
        return math.pi

    def count_below(self, n: float) -> int:
        """Number of indices with eigenvalue strictly below n (within max_index)."""
        return int(np.searchsorted(self.eigenvalues, n, side="left"))

    def spectrum_limit(self) -> float:
        """Largest n for which every eigenvalue below n is available."""
        return float(self.eigenvalue(self.max_index + 1))

    def eigenfunction_table(self, points, count: int) -> np.ndarray:
        """Table of phi_0 ... phi_{count-1} at the given points, shape (count, npts)."""
        raise UnsupportedOperationError(
            f"{self.label} is a kernel-level space without per-index eigenfunctions"
        )

    def expand(self, coefficients, points) -> np.ndarray:
        """Evaluate sum_k c_k phi_k at points."""
        raise UnsupportedOperationError(
            f"{self.label} is a kernel-level space without per-index eigenfunctions"
        )

    def eigenfunction(self, index: int) -> Callable[[np.ndarray], np.ndarray]:
        """Evaluable phi_index."""
        coeffs = np.zeros(index + 1)
        coeffs[index] = 1.0
        return lambda pts: self.expand(coeffs, pts)

    def zonal_block(self, weights: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Pairwise kernel sum_k weights_k (level-k zonal term) for kernel-level spaces."""
        raise UnsupportedOperationError(f"{self.label} has no zonal kernel evaluator")

    @abstractmethod
    def integration_rule(self, size: int | None = None) -> Measure:
        """A rule for non-polynomial integrands such as indicators or |kernels|."""

    def local_rule(self, center, radius: float) -> Measure:
        """Rule resolving the metric ball B(center, radius); the integration rule by default."""
        return self.integration_rule()

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.label}, max_index={self.max_index})"


def _half_integer_offsets(params: JacobiParams) -> bool:
    """Whether alpha + 1/2 and beta + 1/2 are integers (phi_k smooth in theta)."""
    return float(params.alpha + 0.5).is_integer() and float(params.beta + 0.5).is_integer()


class TrigJacobiSpace(DataSpace):
    """
    Trigonometric Jacobi functions on [0, pi].

    phi_k(theta) = sqrt(pi) (1 - cos theta)^{a/2 + 1/4} (1 + cos theta)^{b/2 + 1/4}
    p_k^{(a,b)}(cos theta), orthonormal for d(theta)/pi, with eigenvalues
    lambda_k = k + (a + b + 1) / 2 and exponent 1.

    Args:
        params: Jacobi parameters with alpha, beta >= -1/2.
        max_index: Highest eigen-index, >= 1.
        grid_size: Points of the uniform evaluation grid, >= 16.
        node_count: Gauss nodes of the measure; defaults to 2 max_index + 64 for
            the theta rule and max_index + 8 otherwise.

    When a + 1/2 and b + 1/2 are integers the eigenfunctions are smooth in
    theta and the measure is a Gauss-Jacobi rule in theta itself, with the
    endpoint exponents of phi_k. It resolves functions smooth in theta
    (such as theta itself) as well as diffusion polynomials. Other
    parameters use the Gauss-Jacobi rule in cos theta, exact for diffusion
    polynomials.
    """

    has_eigenfunctions = True

    def __init__(
        self,
        params: JacobiParams,
        max_index: int,
        grid_size: int | None = None,
        node_count: int | None = None,
    ):
        params = as_params(params)
        if params.alpha < -0.5 or params.beta < -0.5:
            raise ParameterDomainError(
                f"Trigonometric spaces need alpha, beta >= -1/2, got {params}",
                parameter="params",
                value=str(params),
            )
        if max_index < 1:
            raise ParameterDomainError(f"max_index={max_index} must be >= 1", parameter="max_index",
                                       value=max_index)
        grid_size = Config.GRID_SIZE if grid_size is None else int(grid_size)
        if grid_size < 16:
            raise ParameterDomainError(f"grid_size={grid_size} must be >= 16", parameter="grid_size",
                                       value=grid_size)
        theta_rule = _half_integer_offsets(params)
        if node_count is None:
            node_count = 2 * max_index + 64 if theta_rule else max_index + 8
        node_count = int(node_count)
        if node_count < max_index + 1:
            raise ParameterDomainError(
                f"node_count={node_count} must be >= max_index + 1 = {max_index + 1}",
                parameter="node_count",
                value=node_count,
            )

        self.params = params
        self.label = f"trig{params}"
        self.exponent_q = 1.0
        self.max_index = int(max_index)
        self.node_count = node_count
        self.basis: OrthoPolyBasis = build_basis(params, max(self.max_index, 1))
        self.grid = np.linspace(0.0, math.pi, grid_size)
        self._shift = (params.alpha + params.beta + 1.0) / 2.0
        self._ea = params.alpha / 2.0 + 0.25
        self._eb = params.beta / 2.0 + 0.25

        self.measure = self._theta_measure(node_count) if theta_rule else self._cosine_measure(node_count)
        logger.debug(f"{self.label}: max_index={self.max_index}, {node_count} measure nodes "
                     f"({'theta' if theta_rule else 'cosine'} rule)")

    def _cosine_measure(self, node_count: int) -> Measure:
        rule = gauss_rule(self.params, node_count)
        theta = np.arccos(np.asarray(rule.nodes))[::-1]
        w = np.asarray(rule.weights)[::-1]
        return Measure(points=theta, weights=w / self._factor(theta) ** 2)

    def _theta_measure(self, node_count: int) -> Measure:
        # theta = pi (1 + t) / 2 with phi_k ~ theta^{a+1/2} at 0 and (pi - theta)^{b+1/2} at pi
        at_pi = self.params.beta + 0.5
        at_zero = self.params.alpha + 0.5
        t, w = roots_jacobi(node_count, at_pi, at_zero)
        theta = 0.5 * math.pi * (1.0 + t)
        weights = 0.5 * w / ((1.0 - t) ** at_pi * (1.0 + t) ** at_zero)
        return Measure(points=theta, weights=weights)

    def singular_rule(self, point: float, exponent: float, node_count: int | None = None) -> Measure:
        """
        Composite Gauss-Jacobi rule for integrands |theta - point|^exponent g phi_k.

        The interval is split at ``point``; each piece carries the Jacobi
        weight |theta - point|^exponent at the split and the endpoint
        exponent of phi_k at 0 or pi. Coefficient integrals of f with a power
        singularity at ``point`` and smooth g then converge spectrally. The
        weights are not meant for smooth integrands.

        Args:
            point: Location of the singularity in [0, pi].
            exponent: Power of the singularity, > -1.
            node_count: Nodes per piece; defaults to the measure's node count.

        Raises:
            ParameterDomainError: A point outside [0, pi] or exponent <= -1.
        """
        point = float(point)
        if not (0.0 <= point <= math.pi):
            raise ParameterDomainError(f"Singular point {point} lies outside [0, pi]", parameter="point",
                                       value=point)
        if exponent <= -1.0:
            raise ParameterDomainError(f"exponent={exponent} must exceed -1", parameter="exponent",
                                       value=exponent)
        size = int(node_count or self.node_count)
        pieces = []
        if point > 0.0:
            # theta = point (1 + t) / 2: the singularity sits at t = 1
            t, w = roots_jacobi(size, exponent, self.params.alpha + 0.5)
            scale = point / (2.0 * math.pi)
            pieces.append((0.5 * point * (1.0 + t),
                           scale * w / ((1.0 - t) ** exponent * (1.0 + t) ** (self.params.alpha + 0.5))))
        if point < math.pi:
            # theta = point + (pi - point) (1 + t) / 2: the singularity sits at t = -1
            t, w = roots_jacobi(size, self.params.beta + 0.5, exponent)
            scale = (math.pi - point) / (2.0 * math.pi)
            pieces.append((point + 0.5 * (math.pi - point) * (1.0 + t),
                           scale * w / ((1.0 - t) ** (self.params.beta + 0.5) * (1.0 + t) ** exponent)))
        return Measure(points=np.concatenate([p for p, _ in pieces]),
                       weights=np.concatenate([w for _, w in pieces]))

    def eigenvalue(self, index) -> np.ndarray:
        return np.asarray(index, dtype=float) + self._shift

    def as_points(self, x) -> np.ndarray:
        return np.atleast_1d(np.asarray(x, dtype=float))

    def distance(self, x, y) -> np.ndarray:
        return np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))

    def _factor(self, theta: np.ndarray) -> np.ndarray:
        """sqrt(pi) (1 - cos)^{a/2+1/4} (1 + cos)^{b/2+1/4}, via half-angle forms."""
        s = 2.0 * np.sin(theta / 2.0) ** 2
        c = 2.0 * np.cos(theta / 2.0) ** 2
        return math.sqrt(math.pi) * s**self._ea * c**self._eb

    def eigenfunction_table(self, points, count: int) -> np.ndarray:
        theta = self.as_points(points)
        if count < 1:
            return np.zeros((0, len(theta)))
        if count - 1 > self.basis.max_degree:
            raise ParameterDomainError(
                f"Requested {count} eigenfunctions but only {self.basis.max_degree + 1} are built",
                parameter="count",
                value=count,
            )
        return self.basis.evaluate(np.cos(theta), count - 1) * self._factor(theta)

    def expand(self, coefficients, points) -> np.ndarray:
        theta = self.as_points(points)
        c = np.asarray(coefficients, dtype=float)
        if len(c) == 0:
            return np.zeros_like(theta)
        return self.basis.clenshaw(c, np.cos(theta)) * self._factor(theta)

    def integration_rule(self, size: int | None = None) -> Measure:
        """Midpoint rule in theta for d(theta)/pi."""
        size = size or len(self.grid)
        theta = (np.arange(size) + 0.5) * math.pi / size
        return Measure(points=theta, weights=np.full(size, 1.0 / size))

    def local_rule(self, center, radius: float) -> Measure:
        """Midpoint rule on the interval [theta - r, theta + r] clipped to [0, pi]."""
        c = float(self.as_points(center)[0])
        lo, hi = max(0.0, c - radius), min(math.pi, c + radius)
        size = Config.BALL_CAP_ORDER
        theta = lo + (np.arange(size) + 0.5) * (hi - lo) / size
        return Measure(points=theta, weights=np.full(size, (hi - lo) / (math.pi * size)))


class BallSpace(DataSpace):
    """
    Even spherical harmonics on S^q restricted to the unit ball of R^q.

    A point x in the ball is identified with x_hat = (x, sqrt(1 - |x|^2))
    on the upper hemisphere. Level n collects the harmonics of degree 2n
    with eigenvalue sqrt(n (n + q/2 - 1/2)); its addition-formula sum is
    (omega_q / omega_{q-1}) 2^{(q-1)/2} p_n(1) p_n(2 t^2 - 1) with Jacobi
    parameters (q/2 - 1, -1/2) and t = x_hat . y_hat.

    Even harmonics cannot tell x_hat from -x_hat, so the metric is
    arccos |x_hat . y_hat|, which agrees with arccos(x_hat . y_hat)
    whenever the inner product is nonnegative.
    """

    has_eigenfunctions = False

    def __init__(self, q: int, max_index: int, measure_order: int | None = None):
        if int(q) != q or q < 1:
            raise ParameterDomainError(f"q={q} must be a positive integer", parameter="q", value=q)
        if q > Config.BALL_MAX_Q:
            raise ParameterDomainError(
                f"q={q} exceeds the supported maximum {Config.BALL_MAX_Q}", parameter="q", value=q
            )
        if max_index < 1:
            raise ParameterDomainError(f"max_index={max_index} must be >= 1", parameter="max_index",
                                       value=max_index)
        self.q = int(q)
        self.label = f"ball(q={self.q})"
        self.exponent_q = float(self.q)
        self.max_index = int(max_index)
        self.params = JacobiParams(self.q / 2.0 - 1.0, -0.5)
        self.basis = build_basis(self.params, self.max_index)

        ratio = sphere_area(self.q) / sphere_area(self.q - 1)
        scale = ratio * 2.0 ** ((self.q - 1) / 2.0)
        self.level_constants = np.array(
            [scale * value_at_one(self.params, n) for n in range(self.max_index + 1)]
        )

        order = measure_order or Config.BALL_MEASURE_ORDER
        while order > 2 and _sphere_rule_size(self.q, order) > Config.BALL_MAX_NODES:
            order //= 2
        pts, w = sphere_rule(self.q, order)
        upper = pts[:, -1] > 0
        self.measure = Measure(points=pts[upper, :-1], weights=2.0 * w[upper])
        self.grid = self._diagnostic_grid()
        logger.debug(f"{self.label}: {len(self.measure)} measure nodes, {len(self.grid)} grid points")

    def _diagnostic_grid(self) -> np.ndarray:
        if self.q == 2:
            n_r, n_a = Config.BALL_GRID
            polar = (np.arange(n_r) + 0.5) * (math.pi / 2) / n_r
            rho = np.sin(polar)
            ang = 2.0 * math.pi * np.arange(n_a) / n_a
            rr, aa = np.meshgrid(rho, ang, indexing="ij")
            return np.column_stack([(rr * np.cos(aa)).ravel(), (rr * np.sin(aa)).ravel()])
        return np.asarray(self.measure.points)

    @property
    def diameter(self) -> float:
        return math.pi / 2.0

    def eigenvalue(self, index) -> np.ndarray:
        n = np.asarray(index, dtype=float)
        return np.sqrt(n * (n + self.q / 2.0 - 0.5))

    def as_points(self, x) -> np.ndarray:
        pts = np.asarray(x, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.shape[-1] != self.q:
            raise ParameterDomainError(
                f"Ball points need {self.q} coordinates, got shape {pts.shape}", parameter="x"
            )
        if np.any(np.sum(pts**2, axis=-1) > 1.0 + 1e-12):
            raise ParameterDomainError("Ball points must satisfy |x| <= 1", parameter="x")
        return pts

    def lift(self, x) -> np.ndarray:
        """x -> x_hat = (x, sqrt(1 - |x|^2)) on the upper hemisphere."""
        pts = np.asarray(x, dtype=float)
        last = np.sqrt(np.clip(1.0 - np.sum(pts**2, axis=-1), 0.0, None))
        return np.concatenate([pts, last[..., None]], axis=-1)

    def inner(self, x, y) -> np.ndarray:
        """x_hat . y_hat, broadcasting over leading axes."""
        return np.clip(np.sum(self.lift(x) * self.lift(y), axis=-1), -1.0, 1.0)

    def distance(self, x, y) -> np.ndarray:
        return np.arccos(np.abs(self.inner(x, y)))

    def zonal(self, weights: np.ndarray, t) -> np.ndarray:
        """sum_n weights_n (level-n zonal term)(t) by Clenshaw summation."""
        t = np.asarray(t, dtype=float)
        w = np.asarray(weights, dtype=float)
        if len(w) == 0:
            return np.zeros_like(t)
        return self.basis.clenshaw(w * self.level_constants[: len(w)], 2.0 * t * t - 1.0)

    def zonal_block(self, weights: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        t = self.inner(x[:, None, :], y[None, :, :])
        return self.zonal(weights, t)

    def integration_rule(self, size: int | None = None) -> Measure:
        return self.measure

    def local_rule(self, center, radius: float) -> Measure:
        """
        Cap rule for B(center, radius), refined to the ball at any radius.

        Polar angles phi in [0, min(radius, pi/2)] around x_hat carry
        Gauss-Legendre weights times sin^{q-1} phi, and directions come from
        the sphere rule on S^{q-1}. Points on the lower hemisphere are folded
        to -y_hat and the antipodal cap is counted, so the weights sum to
        mu(B(center, radius)).
        """
        x_hat = self.lift(self.as_points(center)[0])
        frame = np.linalg.svd(x_hat[None, :])[2][1:]
        order = Config.BALL_CAP_ORDER
        if self.q == 1:
            dirs, dir_w = np.array([[1.0], [-1.0]]), np.array([0.5, 0.5])
        else:
            budget = Config.BALL_MAX_NODES // Config.BALL_CAP_ORDER
            while order > 2 and _sphere_rule_size(self.q - 1, order) > budget:
                order //= 2
            dirs, dir_w = sphere_rule(self.q - 1, order)

        rho = min(float(radius), math.pi / 2.0)
        legendre = gauss_rule(JacobiParams(0.0, 0.0), Config.BALL_CAP_ORDER)
        phi = 0.5 * rho * (1.0 + np.asarray(legendre.nodes))
        g = rho * np.asarray(legendre.weights) / float(np.sum(legendre.weights))
        radial = 2.0 * sphere_area(self.q - 1) / sphere_area(self.q) * g * np.sin(phi) ** (self.q - 1)

        pts = np.cos(phi)[:, None, None] * x_hat + np.sin(phi)[:, None, None] * (dirs @ frame)[None, :, :]
        pts = pts.reshape(-1, self.q + 1)
        pts[pts[:, -1] < 0] *= -1.0
        return Measure(points=pts[:, :-1], weights=np.outer(radial, dir_w).ravel())


def _sphere_rule_size(q: int, order: int) -> int:
    circle = order + 1 + (order + 1) % 2
    m = order // 2 + 1
    m += m % 2
    return circle * m ** (q - 1)


def make_trig_jacobi_space(
    params: JacobiParams | tuple[float, float],
    max_index: int,
    grid_size: int | None = None,
    node_count: int | None = None,
) -> TrigJacobiSpace:
    """
    Build the trigonometric Jacobi space on [0, pi].

    Args:
        params: (alpha, beta) with alpha, beta >= -1/2.
        max_index: Highest eigen-index.
        grid_size: Evaluation grid size (default Config.GRID_SIZE).
        node_count: Measure nodes (default max_index + 8).

    Raises:
        ParameterDomainError: Parameter-domain violations.

    Example:
        >>> s = make_trig_jacobi_space((-0.5, -0.5), 8, 32)
        >>> float(s.eigenvalues[0])
        0.0
    """
    return TrigJacobiSpace(as_params(params), max_index, grid_size, node_count)


def make_ball_space(q: int, max_index: int, measure_order: int | None = None) -> BallSpace:
    """
    Build the kernel-level ball space of dimension q.

    Raises:
        ParameterDomainError: q < 1 or q > Config.BALL_MAX_Q.
    """
    return BallSpace(q, max_index, measure_order)


def fourier_coefficients(space: DataSpace, f: Callable, max_index: int,
                         rule: Measure | None = None) -> np.ndarray:
    """
    Coefficients f_hat(k) = integral of f phi_k against the space measure, k <= max_index.

    Exact when f is a diffusion polynomial and the measure's node count
    covers the combined degree. On spaces with the theta rule, functions
    smooth in theta converge spectrally in the node count as well.

    Args:
        space: Space with per-index eigenfunctions.
        f: Callable on arrays of points.
        max_index: Highest coefficient index.
        rule: Quadrature for d(mu) used instead of ``space.measure``.

    Raises:
        UnsupportedOperationError: On kernel-level spaces.

    Example:
        >>> space = make_trig_jacobi_space((-0.5, -0.5), 8, 32)
        >>> c = fourier_coefficients(space, lambda th: th, 2)
        >>> round(float(c[0]), 12), round(float(c[1]), 12)
        (1.570796326795, -0.900316316157)
    """
    if not space.has_eigenfunctions:
        raise UnsupportedOperationError(
            f"Fourier coefficients need per-index eigenfunctions; {space.label} is kernel-level"
        )
    if max_index < 0:
        return np.zeros(0)
    rule = space.measure if rule is None else rule
    nodes = rule.points
    weighted = rule.weights * np.asarray(f(nodes), dtype=float)
    out = np.zeros(max_index + 1)
    chunk = max(Config.TILE_SIZE, 4096)
    for start in range(0, len(nodes), chunk):
        sl = slice(start, start + chunk)
        out += space.eigenfunction_table(nodes[sl], max_index + 1) @ weighted[sl]
    return out


def ball_measure_probe(space: DataSpace, x, radii) -> pd.DataFrame:
    """
    Measure of metric balls B(x, r) and the ratio mu(B) / r^q.

    Ball measures are sums of the weights of ``space.local_rule`` nodes inside
    the ball, so small radii are resolved on every space.

    Returns:
        DataFrame with columns r, measure, ratio.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise ParameterDomainError("radii must be positive", parameter="radii")
    center = space.as_points(x)[0]
    measures = []
    for r in radii:
        rule = space.local_rule(center, r)
        d = space.distance(center, rule.points)
        measures.append(float(np.sum(rule.weights[d <= r])))
    measures = np.array(measures)
    return pd.DataFrame({
        "r": radii,
        "measure": measures,
        "ratio": measures / radii**space.exponent_q,
    })
