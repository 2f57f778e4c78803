"""
Orthonormal Jacobi polynomials and Gauss-Jacobi quadrature.

The polynomials p_n^{(alpha, beta)} are orthonormal on [-1, 1] for the weight
(1 - x)^alpha (1 + x)^beta. They are evaluated through the symmetrized
three-term recurrence, never through Rodrigues' formula, which is unusable
at high degree.

Quadrature rules follow Golub-Welsch: the nodes are the eigenvalues of the
Jacobi matrix (found with an implicit-QL sweep), refined by one Newton step,
and the weights come from the Christoffel function.

Example:
    >>> basis = build_basis(JacobiParams(0.0, 0.0), 4)
    >>> round(float(basis.evaluate_degree(1, 1.0)), 10)
    1.2247448714
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .config import Config, get_logger
from .exceptions import NumericalFailureError, ParameterDomainError

logger = get_logger("orthopoly")

__all__ = [
    "JacobiParams",
    "OrthoPolyBasis",
    "QuadratureRule",
    "as_params",
    "log_gamma",
    "gamma_function",
    "jacobi_mass",
    "build_basis",
    "value_at_one",
    "gauss_rule",
    "sphere_area",
    "zonal_kernel_term",
    "sphere_rule",
]

# Lanczos approximation, g = 7, nine coefficients
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def log_gamma(x: float) -> float:
    """
    Natural log of |Gamma(x)| via the Lanczos approximation.

    Arguments below 1/2 go through the reflection formula.

    Raises:
        ParameterDomainError: At the poles x = 0, -1, -2, ...
    """
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise ParameterDomainError(f"Gamma has a pole at x={x:g}", parameter="x", value=x)
    if x < 0.5:
        return math.log(math.pi / abs(math.sin(math.pi * x))) - log_gamma(1.0 - x)
    x -= 1.0
    a = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        a += _LANCZOS_COEF[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (x + 0.5) * math.log(t) - t + math.log(a)


def gamma_function(x: float) -> float:
    """Gamma(x) for real x away from the poles."""
    value = math.exp(log_gamma(x))
    if x < 0.0 and int(math.ceil(-x)) % 2 == 1:
        return -value
    return value


@dataclass(frozen=True)
class JacobiParams:
    """
    Jacobi weight exponents (alpha, beta), both greater than -1.

    Raises:
        ParameterDomainError: If alpha <= -1 or beta <= -1.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        for name, value in (("alpha", self.alpha), ("beta", self.beta)):
            if not math.isfinite(value) or value <= -1.0:
                raise ParameterDomainError(
                    f"Jacobi parameter {name}={value} is invalid: must be > -1",
                    parameter=name,
                    value=value,
                )
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def is_chebyshev(self) -> bool:
        """True for the first-kind Chebyshev weight (-1/2, -1/2)."""
        return self.alpha == -0.5 and self.beta == -0.5

    def swapped(self) -> JacobiParams:
        return JacobiParams(self.beta, self.alpha)

    def __str__(self) -> str:
        return f"({self.alpha:g},{self.beta:g})"


def as_params(value: JacobiParams | tuple[float, float]) -> JacobiParams:
    """Accept either a JacobiParams or an (alpha, beta) pair."""
    if isinstance(value, JacobiParams):
        return value
    alpha, beta = value
    return JacobiParams(float(alpha), float(beta))


def jacobi_mass(params: JacobiParams) -> float:
    """Total mass 2^{a+b+1} Gamma(a+1) Gamma(b+1) / Gamma(a+b+2) of the Jacobi weight."""
    a, b = params.alpha, params.beta
    return math.exp(
        (a + b + 1.0) * math.log(2.0) + log_gamma(a + 1.0) + log_gamma(b + 1.0) - log_gamma(a + b + 2.0)
    )


def _recurrence(alpha: float, beta: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal d_0..d_n and off-diagonal o_0..o_n (o_0 unused) of the Jacobi matrix."""
    s = alpha + beta
    k = np.arange(n + 1, dtype=float)
    diag = np.empty(n + 1)
    diag[0] = (beta - alpha) / (s + 2.0)
    if n >= 1:
        kk = k[1:]
        diag[1:] = (beta * beta - alpha * alpha) / ((2 * kk + s) * (2 * kk + s + 2.0))
    off = np.zeros(n + 1)
    if n >= 1:
        # closed form at k = 1 avoids 0/0 when alpha + beta = -1
        off[1] = math.sqrt(4.0 * (1 + alpha) * (1 + beta) / ((2 + s) ** 2 * (3 + s)))
    if n >= 2:
        kk = k[2:]
        num = 4.0 * kk * (kk + alpha) * (kk + beta) * (kk + s)
        den = (2 * kk + s) ** 2 * (2 * kk + s + 1.0) * (2 * kk + s - 1.0)
        off[2:] = np.sqrt(num / den)
    return diag, off


@dataclass(frozen=True)
class OrthoPolyBasis:
    """
    Orthonormal Jacobi system p_0 ... p_max_degree.

    The recurrence reads x p_k = o_{k+1} p_{k+1} + d_k p_k + o_k p_{k-1}
    with p_0 = 1 / sqrt(mass). Every scale o_{k+1} is positive, so every
    p_k has a positive leading coefficient.

    Attributes:
        params: Jacobi parameters.
        max_degree: Highest degree available.
        diagonal: Offsets d_k.
        off_diagonal: Scales o_k (index 0 unused).
        p0: Value of the constant polynomial.
    """

    params: JacobiParams
    max_degree: int
    diagonal: np.ndarray = field(repr=False)
    off_diagonal: np.ndarray = field(repr=False)
    p0: float = field(repr=False)

    @property
    def recurrence(self) -> list[tuple[float, float]]:
        """Per-degree (offset_k, scale_k) pairs, scale_k = o_{k+1}."""
        return [
            (float(self.diagonal[k]), float(self.off_diagonal[k + 1]))
            for k in range(self.max_degree)
        ]

    def _check_degree(self, degree: int) -> int:
        if degree < 0 or degree > self.max_degree:
            raise ParameterDomainError(
                f"Degree {degree} outside the built range [0, {self.max_degree}]",
                parameter="degree",
                value=degree,
            )
        return degree

    def evaluate(self, x, degree: int | None = None) -> np.ndarray:
        """
        Table of p_0(x) ... p_degree(x).

        Args:
            x: Scalar or array of points in [-1, 1].
            degree: Highest degree; defaults to max_degree.

        Returns:
            Array of shape (degree + 1, *x.shape).
        """
        x = np.asarray(x, dtype=float)
        n = self._check_degree(self.max_degree if degree is None else degree)
        d, o = self.diagonal, self.off_diagonal
        out = np.empty((n + 1,) + x.shape)
        out[0] = self.p0
        if n >= 1:
            out[1] = (x - d[0]) * out[0] / o[1]
        for k in range(1, n):
            out[k + 1] = ((x - d[k]) * out[k] - o[k] * out[k - 1]) / o[k + 1]
        return out

    def evaluate_degree(self, degree: int, x) -> np.ndarray:
        """p_degree(x) alone."""
        return self.evaluate(x, degree)[degree]

    def derivative_table(self, x, degree: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Values and first derivatives of p_0 ... p_degree at x."""
        x = np.asarray(x, dtype=float)
        n = self._check_degree(self.max_degree if degree is None else degree)
        d, o = self.diagonal, self.off_diagonal
        vals = self.evaluate(x, n)
        ders = np.zeros_like(vals)
        if n >= 1:
            ders[1] = vals[0] / o[1]
        for k in range(1, n):
            ders[k + 1] = ((x - d[k]) * ders[k] + vals[k] - o[k] * ders[k - 1]) / o[k + 1]
        return vals, ders

    def clenshaw(self, coefficients, x) -> np.ndarray:
        """
        Sum c_0 p_0(x) + ... + c_N p_N(x) by Clenshaw's backward recurrence.

        Args:
            coefficients: Sequence c_0 ... c_N with N <= max_degree.
            x: Scalar or array of points.
        """
        c = np.asarray(coefficients, dtype=float)
        x = np.asarray(x, dtype=float)
        n = len(c) - 1
        if n < 0:
            return np.zeros_like(x)
        self._check_degree(n)
        d, o = self.diagonal, self.off_diagonal
        b1 = np.zeros_like(x)
        b2 = np.zeros_like(x)
        for k in range(n, -1, -1):
            b = np.full_like(x, c[k])
            if k < n:
                b += (x - d[k]) / o[k + 1] * b1
            if k + 2 <= n:
                b -= o[k + 1] / o[k + 2] * b2
            b2, b1 = b1, b
        return self.p0 * b1


@lru_cache(maxsize=128)
def _build_basis(params: JacobiParams, max_degree: int) -> OrthoPolyBasis:
    diag, off = _recurrence(params.alpha, params.beta, max_degree + 1)
    diag.setflags(write=False)
    off.setflags(write=False)
    logger.debug(f"Built Jacobi basis {params} up to degree {max_degree}")
    return OrthoPolyBasis(
        params=params,
        max_degree=max_degree,
        diagonal=diag,
        off_diagonal=off,
        p0=1.0 / math.sqrt(jacobi_mass(params)),
    )


def build_basis(params: JacobiParams | tuple[float, float], max_degree: int) -> OrthoPolyBasis:
    """
    Build the orthonormal Jacobi system up to ``max_degree``.

    Args:
        params: Jacobi parameters (alpha, beta), both > -1.
        max_degree: Highest degree, 0 <= max_degree <= Config.MAX_DEGREE.

    Returns:
        The basis (cached per parameters and degree).

    Raises:
        ParameterDomainError: Invalid parameters or degree.

    Example:
        >>> b = build_basis((0, 0), 2)
        >>> round(float(b.evaluate_degree(0, 0.3)), 10)
        0.7071067812
    """
    params = as_params(params)
    max_degree = int(max_degree)
    if max_degree < 0 or max_degree > Config.MAX_DEGREE:
        raise ParameterDomainError(
            f"max_degree={max_degree} must lie in [0, {Config.MAX_DEGREE}]",
            parameter="max_degree",
            value=max_degree,
        )
    return _build_basis(params, max_degree)


def value_at_one(params: JacobiParams | tuple[float, float], degree: int) -> float:
    """
    Closed-form p_degree(1) from Gamma functions.

    Uses p_n(1)^2 = (2n+s+1) Gamma(n+a+1) Gamma(n+s+1)
    / (2^{s+1} Gamma(n+1) Gamma(a+1)^2 Gamma(n+b+1)) with s = a + b,
    and 1 / mass at degree 0.

    Example:
        >>> round(value_at_one((0, 0), 1), 10)
        1.2247448714
    """
    params = as_params(params)
    if degree < 0 or degree > Config.MAX_DEGREE:
        raise ParameterDomainError(
            f"degree={degree} must lie in [0, {Config.MAX_DEGREE}]", parameter="degree", value=degree
        )
    if degree == 0:
        return 1.0 / math.sqrt(jacobi_mass(params))
    a, b = params.alpha, params.beta
    s = a + b
    n = float(degree)
    log_sq = (
        math.log(2 * n + s + 1)
        + log_gamma(n + a + 1)
        + log_gamma(n + s + 1)
        - (s + 1) * math.log(2.0)
        - log_gamma(n + 1)
        - 2 * log_gamma(a + 1)
        - log_gamma(n + b + 1)
    )
    return math.exp(0.5 * log_sq)


@dataclass(frozen=True)
class QuadratureRule:
    """
    Gauss-Jacobi rule: sum w_i f(x_i) integrates f against the Jacobi weight,
    exactly for polynomials of degree <= 2 * node_count - 1.
    """

    params: JacobiParams
    node_count: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def integrate(self, f) -> float:
        """Apply the rule to a vectorized callable."""
        return float(np.dot(self.weights, f(self.nodes)))


def _tridiagonal_eigenvalues(d: list[float], e: list[float]) -> list[float]:
    """
    Eigenvalues of a symmetric tridiagonal matrix by implicit QL sweeps.

    ``d`` holds the diagonal, ``e[0:n-1]`` the off-diagonal; both are
    overwritten. Raises NumericalFailureError when an eigenvalue does not
    settle within Config.QL_MAX_SWEEPS sweeps.
    """
    n = len(d)
    e[n - 1] = 0.0
    tol = Config.QL_TOLERANCE
    limit = Config.QL_MAX_SWEEPS
    hypot = math.hypot

    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m + 1 < n:
                if abs(e[m]) <= tol * (abs(d[m]) + abs(d[m + 1])):
                    break
                m += 1
            if m == l:
                break
            if sweeps >= limit:
                raise NumericalFailureError(
                    "Implicit-QL eigensolver did not converge",
                    diagnostic={"eigenvalue": l, "sweeps": sweeps, "size": n,
                                "offdiagonal": f"{abs(e[l]):.3e}"},
                )
            sweeps += 1

            # Wilkinson-type shift
            p = d[l]
            g = (d[l + 1] - p) / (2.0 * e[l])
            r = hypot(g, 1.0)
            g = d[m] - p + e[l] / (g - r if g < 0 else g + r)

            s, c, p = 1.0, 1.0, 0.0
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                if abs(f) > abs(g):
                    c = g / f
                    r = hypot(c, 1.0)
                    e[i + 1] = f * r
                    s = 1.0 / r
                    c *= s
                else:
                    s = f / g
                    r = hypot(s, 1.0)
                    e[i + 1] = g * r
                    c = 1.0 / r
                    s *= c
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b

            d[l] -= p
            e[l] = g
            e[m] = 0.0

    return sorted(d)


@lru_cache(maxsize=64)
def _gauss_rule(params: JacobiParams, node_count: int) -> QuadratureRule:
    m = node_count
    if params.is_chebyshev:
        i = np.arange(m, 0, -1, dtype=float)
        nodes = np.cos((2 * i - 1) * math.pi / (2 * m))
        weights = np.full(m, math.pi / m)
    else:
        basis = build_basis(params, m)
        diag = [float(v) for v in basis.diagonal[:m]]
        off = [float(v) for v in basis.off_diagonal[1:m]] + [0.0]
        nodes = np.asarray(_tridiagonal_eigenvalues(diag, off))

        # one Newton step on p_m
        vals, ders = basis.derivative_table(nodes, m)
        nodes = nodes - vals[m] / ders[m]

        # Christoffel weights
        table = basis.evaluate(nodes, m - 1)
        weights = 1.0 / np.einsum("ki,ki->i", table, table)

    nodes.setflags(write=False)
    weights.setflags(write=False)
    logger.debug(f"Gauss-Jacobi rule {params} with {m} nodes")
    return QuadratureRule(params=params, node_count=m, nodes=nodes, weights=weights)


def gauss_rule(params: JacobiParams | tuple[float, float], node_count: int) -> QuadratureRule:
    """
    Gauss-Jacobi quadrature with ``node_count`` nodes.

    The first-kind Chebyshev weight uses the closed-form Gauss-Chebyshev rule.

    Args:
        params: Jacobi parameters.
        node_count: Number of nodes, >= 1.

    Returns:
        The (cached) rule; nodes ascending, all weights positive.

    Raises:
        ParameterDomainError: node_count < 1 or beyond Config.MAX_DEGREE.
        NumericalFailureError: If the eigensolver does not converge.

    Example:
        >>> rule = gauss_rule((0, 0), 2)
        >>> [round(float(x), 10) for x in rule.nodes]
        [-0.5773502692, 0.5773502692]
    """
    params = as_params(params)
    node_count = int(node_count)
    if node_count < 1 or node_count > Config.MAX_DEGREE:
        raise ParameterDomainError(
            f"node_count={node_count} must lie in [1, {Config.MAX_DEGREE}]",
            parameter="node_count",
            value=node_count,
        )
    return _gauss_rule(params, node_count)


def sphere_area(q: int) -> float:
    """Surface area omega_q = 2 pi^{(q+1)/2} / Gamma((q+1)/2) of the unit sphere S^q."""
    return 2.0 * math.exp(0.5 * (q + 1) * math.log(math.pi) - log_gamma(0.5 * (q + 1)))


def zonal_kernel_term(q: int, degree: int, t):
    """
    Addition-formula sum over an orthonormal basis of degree-``degree``
    spherical harmonics on S^q (probability measure), as a function of the
    inner product t = x . y.

    Returns (omega_q / omega_{q-1}) p_l(1) p_l(t) with parameters (q/2-1, q/2-1).

    Raises:
        ParameterDomainError: q < 1, degree < 0 or |t| > 1.

    Example:
        >>> round(float(zonal_kernel_term(2, 1, 1.0)), 10)
        3.0
    """
    if int(q) != q or q < 1:
        raise ParameterDomainError(f"q={q} must be a positive integer", parameter="q", value=q)
    if degree < 0:
        raise ParameterDomainError(f"degree={degree} must be >= 0", parameter="degree", value=degree)
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + 1e-12):
        raise ParameterDomainError("zonal argument t must lie in [-1, 1]", parameter="t")
    t = np.clip(t, -1.0, 1.0)
    a = q / 2.0 - 1.0
    params = JacobiParams(a, a)
    basis = build_basis(params, degree)
    ratio = sphere_area(q) / sphere_area(q - 1)
    value = ratio * value_at_one(params, degree) * basis.evaluate_degree(degree, t)
    return float(value) if value.ndim == 0 else value


def sphere_rule(q: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Product quadrature on S^q in R^{q+1} for the probability measure.

    Built recursively: S^1 from equally spaced half-offset angles, then each
    S^d from S^{d-1} and a Gauss-Gegenbauer rule in the last coordinate.
    Every factor uses an even node count and no node sits on the equator,
    so exactly half the nodes have a positive last coordinate.

    Args:
        q: Sphere dimension, >= 1.
        order: Polynomial degree integrated exactly.

    Returns:
        (points of shape (N, q + 1), weights summing to 1).
    """
    circle = order + 1 + (order + 1) % 2
    phi = 2.0 * math.pi * (np.arange(circle) + 0.5) / circle
    points = np.column_stack([np.cos(phi), np.sin(phi)])
    weights = np.full(circle, 1.0 / circle)
    for dim in range(2, q + 1):
        a = (dim - 2) / 2.0
        m = order // 2 + 1
        m += m % 2
        rule = gauss_rule(JacobiParams(a, a), m)
        z = np.asarray(rule.nodes)
        wz = np.asarray(rule.weights) / float(np.sum(rule.weights))
        r = np.sqrt(1.0 - z * z)
        points = np.concatenate(
            [np.column_stack([r[i] * points, np.full(len(points), z[i])]) for i in range(m)]
        )
        weights = np.outer(wz, weights).ravel()
    return points, weights
