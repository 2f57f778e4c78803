"""
Joint data spaces between two trigonometric Jacobi spaces.

A joint space pairs a base space (where f is known) with a target space
(where the lifted function lives) through connection coefficients

    A_{j,k} = integral of p_j^{(a1,b1)} p_k^{(a2,b2)} (1 - x)^{max a} (1 + x)^{max b} dx

which are banded whenever |a1 - a2| / 2 and |b1 - b2| / 2 are integers.
Joint kernels and operators filter the band with joint eigenvalues
ell_{j,k}; the lift of f is the limit of the joint operators, evaluated on
an image set of the target computed from where f is known.

Example:
    >>> joint = build_joint_jacobi((1.5, 1.5), (-0.5, -0.5), 32, grid_size=64)
    >>> joint.cstar, joint.cstar_plateau
    (2.05, 4.0)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import pandas as pd

from .config import Config, get_logger
from .dataspace import DataSpace, GridFunction, Measure, TrigJacobiSpace, fourier_coefficients
from .exceptions import (
    IncompatibleParametersError,
    IncompatibleSpacesError,
    InsufficientSpectrumError,
    NonConvergenceError,
    NumericalFailureError,
    ParameterDomainError,
    UnsupportedOperationError,
)
from .kernels import (
    DEFAULT_FILTER,
    EnvelopeFit,
    HeatKernelResult,
    HeatKernelTruncation,
    LocalizationProfile,
    ball_predicate,
    eigenfunction_bound,
    heat_tail_sum,
    heat_weights,
    kernel_weights,
    profile_from_values,
    validate_heat_time,
    validate_profile_args,
)
from .orthopoly import JacobiParams, as_params, build_basis, gauss_rule
from .utils import fit_slope, min_distance

logger = get_logger("joint")

__all__ = [
    "ConnectionMatrix",
    "JointSpace",
    "ImageSetResult",
    "LiftResult",
    "omega_weight",
    "connection_matrix",
    "band_violation",
    "build_joint_jacobi",
    "compute_cstar",
    "spectral_ratio",
    "joint_kernel",
    "joint_kernel_matrix",
    "joint_sigma",
    "joint_coefficients",
    "transplantation_residual",
    "variation_statistic",
    "lebesgue_statistic",
    "joint_heat_kernel",
    "joint_heat_kernel_matrix",
    "fit_joint_envelope",
    "localization_profile",
    "image_set",
    "lift",
    "diffusion_distance",
]

ELL_RULES = ("pythagorean", "target")


def _omega_exponents(p1: JacobiParams, p2: JacobiParams) -> tuple[int, int]:
    a = abs(p1.alpha - p2.alpha) / 2.0
    b = abs(p1.beta - p2.beta) / 2.0
    if a != round(a) or b != round(b):
        raise IncompatibleParametersError(
            f"Parameters {p1} and {p2} differ by non-even amounts "
            f"(a={a:g}, b={b:g}); connection coefficients are not banded",
            first=str(p1),
            second=str(p2),
        )
    return int(round(a)), int(round(b))


def omega_weight(p1, p2, theta):
    """
    Omega(theta) = (1 - cos theta)^a (1 + cos theta)^b with a = |a1 - a2| / 2
    and b = |b1 - b2| / 2.

    Raises:
        IncompatibleParametersError: If a or b is not a nonnegative integer.

    Example:
        >>> round(omega_weight((1.5, 1.5), (-0.5, -0.5), math.pi / 2), 12)
        1.0
    """
    a, b = _omega_exponents(as_params(p1), as_params(p2))
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)
    value = (1.0 - c) ** a * (1.0 + c) ** b
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True, eq=False)
class ConnectionMatrix:
    """
    Band of a connection matrix, stored by diagonals.

    ``diagonals[o + bandwidth, j]`` holds A[j, j + o] for offsets
    -bandwidth <= o <= bandwidth (zero where j + o leaves [0, max_degree]).
    Rows index the target system, columns the base system.
    """

    target: JacobiParams
    base: JacobiParams
    max_degree: int
    bandwidth: int
    diagonals: np.ndarray = field(repr=False)

    def _check_index(self, j: int, k: int) -> None:
        for name, v in (("j", j), ("k", k)):
            if v < 0 or v > self.max_degree:
                raise ParameterDomainError(
                    f"Connection index {name}={v} outside the computed range [0, {self.max_degree}]",
                    parameter=name,
                    value=v,
                )

    def __getitem__(self, jk: tuple[int, int]) -> float:
        j, k = int(jk[0]), int(jk[1])
        self._check_index(j, k)
        offset = k - j
        if abs(offset) > self.bandwidth:
            return 0.0
        return float(self.diagonals[offset + self.bandwidth, j])

    def entries(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Row indices, column indices and values of every stored band entry."""
        rows, cols, vals = [], [], []
        j = np.arange(self.max_degree + 1)
        for o in range(-self.bandwidth, self.bandwidth + 1):
            k = j + o
            ok = (k >= 0) & (k <= self.max_degree)
            rows.append(j[ok])
            cols.append(k[ok])
            vals.append(self.diagonals[o + self.bandwidth, j[ok]])
        return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.max_degree + 1, self.max_degree + 1))
        j, k, v = self.entries()
        out[j, k] = v
        return out

    def to_frame(self) -> pd.DataFrame:
        """Band entries as a table with columns j, k, value (sorted by j then k)."""
        j, k, v = self.entries()
        frame = pd.DataFrame({"j": j, "k": k, "value": v})
        return frame.sort_values(["j", "k"], kind="stable").reset_index(drop=True)


def _connection_tables(p1: JacobiParams, p2: JacobiParams, max_degree: int):
    upper = JacobiParams(max(p1.alpha, p2.alpha), max(p1.beta, p2.beta))
    rule = gauss_rule(upper, max_degree + 1)
    t1 = build_basis(p1, max_degree).evaluate(rule.nodes)
    t2 = build_basis(p2, max_degree).evaluate(rule.nodes)
    return t1, t2, np.asarray(rule.weights)


def connection_matrix(p1, p2, max_degree: int) -> ConnectionMatrix:
    """
    Connection coefficients between the target system p1 and the base system p2.

    Only the declared band |j - k| <= 2a + 2b is computed, with the
    Gauss-Jacobi rule for (max(a1, a2), max(b1, b2)) and max_degree + 1
    nodes, which is exact for every entry.

    Args:
        p1: Target Jacobi parameters.
        p2: Base Jacobi parameters.
        max_degree: Highest degree in both systems, >= 1.

    Raises:
        IncompatibleParametersError: Parameters whose halved differences are not integers.

    Example:
        >>> A = connection_matrix((0, 0), (0, 0), 4)
        >>> round(A[2, 2], 12), A[0, 3]
        (1.0, 0.0)
    """
    p1, p2 = as_params(p1), as_params(p2)
    a, b = _omega_exponents(p1, p2)
    if max_degree < 1:
        raise ParameterDomainError(f"max_degree={max_degree} must be >= 1", parameter="max_degree",
                                   value=max_degree)
    bw = 2 * a + 2 * b
    t1, t2, w = _connection_tables(p1, p2, max_degree)
    t1w = t1 * w
    diagonals = np.zeros((2 * bw + 1, max_degree + 1))
    j = np.arange(max_degree + 1)
    for o in range(-bw, bw + 1):
        rows = j[(j + o >= 0) & (j + o <= max_degree)]
        diagonals[o + bw, rows] = np.sum(t1w[rows] * t2[rows + o], axis=1)
    diagonals.setflags(write=False)
    logger.debug(f"Connection band {p1} <- {p2}: degree {max_degree}, bandwidth {bw}")
    return ConnectionMatrix(target=p1, base=p2, max_degree=int(max_degree), bandwidth=bw,
                            diagonals=diagonals)


def band_violation(p1, p2, max_degree: int) -> float:
    """
    Largest |A[j, k]| outside the declared band, from the full dense matrix.

    A value above Config.BAND_TOLERANCE is logged as a warning.
    """
    p1, p2 = as_params(p1), as_params(p2)
    a, b = _omega_exponents(p1, p2)
    bw = 2 * a + 2 * b
    t1, t2, w = _connection_tables(p1, p2, max_degree)
    dense = (t1 * w) @ t2.T
    j, k = np.indices(dense.shape)
    outside = np.abs(j - k) > bw
    worst = float(np.max(np.abs(dense[outside]))) if np.any(outside) else 0.0
    if worst > Config.BAND_TOLERANCE:
        logger.warning(f"Connection {p1} <- {p2} has entries of size {worst:.2e} outside bandwidth {bw}")
    return worst


@dataclass(frozen=True, eq=False)
class JointSpace:
    """
    A joint data space over a target and a base trigonometric space.

    Attributes:
        target: Space where the lifted function lives.
        base: Space where f is known.
        connection: Banded connection coefficients A[j, k].
        ell_rule: "pythagorean" (sqrt(lambda1_j^2 + lambda2_k^2)) or "target" (lambda1_j).
        exponents: Declared (Q, q1, q2).
        cstar: Polynomial-preservation constant of the literal inclusion.
        cstar_plateau: Constant with every surviving pair on the filter plateau;
            degrees m >= cstar_plateau n reproduce polynomials of degree below n.
    """

    target: TrigJacobiSpace
    base: TrigJacobiSpace
    connection: ConnectionMatrix
    ell_rule: str = "pythagorean"
    exponents: tuple[float, float, float] = (1.0, 1.0, 1.0)
    cstar: float = 1.0
    cstar_plateau: float = 1.0

    @property
    def label(self) -> str:
        return f"joint{self.target.params}<-{self.base.params}"

    @property
    def max_degree(self) -> int:
        return self.connection.max_degree

    def joint_eigenvalue(self, j, k) -> np.ndarray:
        """ell_{j,k} for any nonnegative indices (also beyond the computed band)."""
        lam1 = self.target.eigenvalue(j)
        if self.ell_rule == "target":
            return np.broadcast_to(lam1, np.broadcast_shapes(np.shape(lam1), np.shape(k))).astype(float)
        return np.hypot(lam1, self.base.eigenvalue(k))

    def distance(self, x1, x2) -> np.ndarray:
        return np.abs(np.asarray(x1, dtype=float) - np.asarray(x2, dtype=float))

    def spectrum_limit(self) -> float:
        """Smallest joint eigenvalue of a band pair outside the computed indices."""
        d = self.max_degree + 1
        lo = max(0, d - self.connection.bandwidth)
        return float(min(self.joint_eigenvalue(d, lo), self.joint_eigenvalue(lo, d)))

    def band(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(j, k, A[j, k], ell_{j,k}) for every stored band entry."""
        j, k, v = self.connection.entries()
        return j, k, v, self.joint_eigenvalue(j, k)


def _validate_ell_rule(ell_rule: str) -> str:
    if ell_rule not in ELL_RULES:
        raise ParameterDomainError(f"Unknown ell rule {ell_rule!r}; expected one of {ELL_RULES}",
                                   parameter="ell_rule", value=ell_rule)
    return ell_rule


def build_joint_jacobi(
    p1,
    p2,
    max_degree: int,
    grid_size: int | None = None,
    node_count: int | None = None,
    ell_rule: str = "pythagorean",
) -> JointSpace:
    """
    Build the joint space between the trigonometric spaces of p1 (target) and p2 (base).

    The joint distance is |theta1 - theta2| and the exponents are (1, 1, 1).

    Args:
        p1: Target parameters.
        p2: Base parameters.
        max_degree: Highest index of both systems.
        grid_size: Evaluation grid size of both spaces.
        node_count: Measure nodes of the base space, raise it for non-polynomial f.
        ell_rule: Joint eigenvalue rule.

    Raises:
        IncompatibleParametersError: Non-banded parameter pairs.
        ParameterDomainError: Parameters below -1/2 or invalid sizes.
    """
    p1, p2 = as_params(p1), as_params(p2)
    _validate_ell_rule(ell_rule)
    target = TrigJacobiSpace(p1, max_degree, grid_size)
    base = TrigJacobiSpace(p2, max_degree, grid_size, node_count)
    conn = connection_matrix(p1, p2, max_degree)
    joint = JointSpace(target=target, base=base, connection=conn, ell_rule=ell_rule)
    joint = replace(joint, cstar=compute_cstar(joint, max_degree),
                    cstar_plateau=compute_cstar(joint, max_degree, plateau=True))
    logger.info(f"Built {joint.label}: degree {max_degree}, cstar {joint.cstar:g} "
                f"(plateau {joint.cstar_plateau:g})")
    return joint


def compute_cstar(joint: JointSpace, max_degree: int | None = None, plateau: bool = False) -> float:
    """
    Smallest c on the Config.CSTAR_STEP grid with the inclusion

        {(j, k): A[j,k] != 0, lambda2_k < n} within {(j, k): ell_{j,k} <= f c n, lambda1_j < c n}

    for every integer n <= max_degree, where f = 1 by default and f = 1/2 with
    ``plateau`` (so the filter is identically 1 on every surviving pair).

    Raises:
        NumericalFailureError: If no c <= Config.CSTAR_MAX works.

    Example:
        >>> joint = build_joint_jacobi((-0.5, -0.5), (-0.5, -0.5), 256, grid_size=64)
        >>> compute_cstar(joint, 256), compute_cstar(joint, 256, plateau=True)
        (1.45, 2.85)
    """
    max_degree = joint.max_degree if max_degree is None else int(max_degree)
    frac = 0.5 if plateau else 1.0
    j, k, v, ell = joint.band()
    nonzero = np.abs(v) > Config.BAND_TOLERANCE
    lam1 = joint.target.eigenvalue(j[nonzero])
    n_min = np.floor(joint.base.eigenvalue(k[nonzero])) + 1.0
    use = n_min <= max_degree
    lam1, ell, n_min = lam1[use], ell[nonzero][use], n_min[use]
    if len(n_min) == 0:
        return Config.CSTAR_STEP

    need = float(max(np.max(ell / (frac * n_min)), np.max(lam1 / n_min)))
    step = Config.CSTAR_STEP
    steps = max(1, math.ceil(need / step - 1e-9))

    def holds(c: float) -> bool:
        return bool(np.all(ell <= frac * c * n_min + 1e-12) and np.all(lam1 < c * n_min))

    while True:
        c = round(steps * step, 10)
        if c > Config.CSTAR_MAX:
            raise NumericalFailureError(
                f"No polynomial-preservation constant up to {Config.CSTAR_MAX:g} for {joint.label}",
                diagnostic={"required": f"{need:.4f}", "max_degree": max_degree},
            )
        if holds(c):
            return c
        steps += 1


def spectral_ratio(joint: JointSpace) -> float:
    """max of lambda1_j / ell_{j,k} over the nonzero band (the alpha with alpha ell >= lambda1)."""
    j, _, v, ell = joint.band()
    use = (np.abs(v) > Config.BAND_TOLERANCE) & (ell > 0)
    if not np.any(use):
        return 1.0
    return float(np.max(joint.target.eigenvalue(j[use]) / ell[use]))


def _filtered_band(joint: JointSpace, weight: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Dense J x K matrix weight(ell) A over band entries, trimmed to touched rows and columns."""
    j, k, v, ell = joint.band()
    w = weight(ell) * v
    live = w != 0
    if not np.any(live):
        return np.zeros((0, 0))
    rows, cols = int(np.max(j[live])) + 1, int(np.max(k[live])) + 1
    mat = np.zeros((rows, cols))
    mat[j[live], k[live]] = w[live]
    return mat


def _check_joint_degree(joint: JointSpace, n: float) -> float:
    if not (n > 0 and math.isfinite(n)):
        raise ParameterDomainError(f"Kernel degree n={n} must be positive", parameter="n", value=n)
    limit = joint.spectrum_limit()
    if n > limit:
        raise InsufficientSpectrumError(n, limit, what=joint.label)
    return float(n)


def _kernel_band(joint: JointSpace, n: float) -> np.ndarray:
    n = _check_joint_degree(joint, n)
    return _filtered_band(joint, lambda ell: np.where(ell < n, DEFAULT_FILTER(ell / n), 0.0))


def _apply_band(joint: JointSpace, mat: np.ndarray, x1, x2) -> np.ndarray:
    x1 = joint.target.as_points(x1)
    x2 = joint.base.as_points(x2)
    t1 = joint.target.eigenfunction_table(x1, mat.shape[0])
    t2 = joint.base.eigenfunction_table(x2, mat.shape[1])
    return t1.T @ mat @ t2


def joint_kernel(joint: JointSpace, n: float, x1, x2):
    """
    sum_{j,k} h(ell_{j,k} / n) A[j,k] phi1_j(x1) phi2_k(x2), over aligned point batches.

    Not symmetric in general: x1 is a target point and x2 a base point.

    Raises:
        InsufficientSpectrumError: If a band pair with ell < n lies outside the computed indices.
    """
    mat = _kernel_band(joint, n)
    x1 = joint.target.as_points(x1)
    x2 = joint.base.as_points(x2)
    t1 = joint.target.eigenfunction_table(x1, mat.shape[0])
    t2 = joint.base.eigenfunction_table(x2, mat.shape[1])
    values = np.sum(t1 * (mat @ t2), axis=0)
    return float(values[0]) if values.size == 1 else values


def joint_kernel_matrix(joint: JointSpace, n: float, x1, x2) -> np.ndarray:
    """Joint kernel over target points x1 (rows) and base points x2 (columns)."""
    return _apply_band(joint, _kernel_band(joint, n), x1, x2)


def joint_coefficients(joint: JointSpace, n: float, fhat: np.ndarray) -> np.ndarray:
    """Target coefficients of sigma_n(joint; f) from the base coefficients f_hat."""
    mat = _kernel_band(joint, n)
    if mat.size == 0:
        return np.zeros(0)
    return mat @ fhat[: mat.shape[1]]


def _target_function(joint: JointSpace, coeffs: np.ndarray, meta: dict) -> GridFunction:
    target = joint.target
    return GridFunction(
        grid=target.grid,
        values=target.expand(coeffs, target.grid),
        evaluator=lambda pts: target.expand(coeffs, pts),
        meta=meta,
    )


def joint_sigma(joint: JointSpace, n: float, f: Callable) -> GridFunction:
    """
    sigma_n(joint; f) = sum_{j,k} h(ell_{j,k} / n) A[j,k] f_hat(k) phi1_j on the target.

    The result's meta records n and the spectral ratio alpha, so the
    target-space degree of the result is below alpha n.

    Example:
        >>> joint = build_joint_jacobi((1.5, 1.5), (-0.5, -0.5), 32, grid_size=64)
        >>> g = joint_sigma(joint, 16, joint.base.eigenfunction(3))
        >>> expected = omega_weight((1.5, 1.5), (-0.5, -0.5), 1.0) * joint.base.eigenfunction(3)(1.0)
        >>> bool(abs(g(np.array([1.0]))[0] - expected[0]) < 1e-10)
        True
    """
    fhat = fourier_coefficients(joint.base, f, joint.base.max_index)
    coeffs = joint_coefficients(joint, n, fhat)
    return _target_function(joint, coeffs, {"n": float(n), "spectral_ratio": spectral_ratio(joint)})


def transplantation_residual(joint: JointSpace, index: int, points=None) -> float:
    """
    Sup-norm residual of the finite orthogonal sums linking the two systems.

    When the target parameters dominate the base parameters this checks
    sum_j A[j, index] phi1_j = Omega phi2_index; when the base dominates it
    checks sum_k A[index, k] phi2_k = Omega phi1_index.

    Raises:
        UnsupportedOperationError: Mixed parameter orderings.
        ParameterDomainError: An index whose band leaves the computed range.
    """
    p1, p2 = joint.target.params, joint.base.params
    pts = joint.target.grid if points is None else np.atleast_1d(np.asarray(points, dtype=float))
    bw = joint.connection.bandwidth
    if index < 0 or index + bw > joint.max_degree:
        raise ParameterDomainError(
            f"index={index} needs band entries beyond degree {joint.max_degree}", parameter="index",
            value=index,
        )
    omega = omega_weight(p1, p2, pts)
    dense = joint.connection.to_dense()
    if p1.alpha >= p2.alpha and p1.beta >= p2.beta:
        lhs = joint.target.expand(dense[:, index], pts)
        rhs = omega * joint.base.eigenfunction(index)(pts)
    elif p1.alpha <= p2.alpha and p1.beta <= p2.beta:
        lhs = joint.base.expand(dense[index, :], pts)
        rhs = omega * joint.target.eigenfunction(index)(pts)
    else:
        raise UnsupportedOperationError(
            f"No finite orthogonal sum links {p1} and {p2}: parameters are not ordered"
        )
    return float(np.max(np.abs(lhs - rhs)))


def variation_statistic(joint: JointSpace, n: float, grid_size: int | None = None) -> float:
    """
    max over grid pairs of sum_{ell < n} |A[j,k] phi1_j(x1) phi2_k(x2)|, divided by n^Q.
    """
    n = _check_joint_degree(joint, n)
    mat = np.abs(_filtered_band(joint, lambda ell: (ell < n).astype(float)))
    if mat.size == 0:
        return 0.0
    pts = np.linspace(0.0, math.pi, grid_size or Config.PROFILE_GRID_SIZE)
    t1 = np.abs(joint.target.eigenfunction_table(pts, mat.shape[0]))
    t2 = np.abs(joint.base.eigenfunction_table(pts, mat.shape[1]))
    return float(np.max(t1.T @ mat @ t2)) / n ** joint.exponents[0]


def lebesgue_statistic(joint: JointSpace, n: float, grid_size: int | None = None,
                       rule_size: int | None = None) -> float:
    """max over target grid points x1 of integral |Phi_n(joint; x1, y)| d mu2(y)."""
    pts = np.linspace(0.0, math.pi, grid_size or Config.PROFILE_GRID_SIZE)
    rule = joint.base.integration_rule(rule_size or max(Config.GRID_SIZE, int(16 * n)))
    mat = joint_kernel_matrix(joint, n, pts, rule.points)
    return float(np.max(np.abs(mat) @ rule.weights))


def _joint_heat_band(joint: JointSpace, t: float, diagnostic: bool) -> tuple[np.ndarray, HeatKernelTruncation]:
    validate_heat_time(t, diagnostic)

    def weight(ell: np.ndarray) -> np.ndarray:
        terms = np.exp(-(ell**2) * t)
        return np.where(terms >= Config.HEAT_TERM_THRESHOLD, terms, 0.0)

    mat = _filtered_band(joint, weight)
    start = joint.spectrum_limit()
    bound = eigenfunction_bound(joint.target) * eigenfunction_bound(joint.base)
    tail = (2 * joint.connection.bandwidth + 1) * heat_tail_sum(start, t) * math.sqrt(bound)
    cutoff = mat.shape[0] - 1 if mat.size else 0
    trunc = HeatKernelTruncation(t=float(t), cutoff_index=cutoff, tail_bound=tail)
    if trunc.warning:
        logger.warning(f"Joint heat series on {joint.label} truncated with tail bound {tail:.2e}")
    return mat, trunc


def joint_heat_kernel(joint: JointSpace, t: float, x1, x2, diagnostic: bool = False) -> HeatKernelResult:
    """sum exp(-ell_{j,k}^2 t) A[j,k] phi1_j(x1) phi2_k(x2) over the band, with its truncation record."""
    mat, trunc = _joint_heat_band(joint, t, diagnostic)
    x1 = joint.target.as_points(x1)
    x2 = joint.base.as_points(x2)
    t1 = joint.target.eigenfunction_table(x1, mat.shape[0])
    t2 = joint.base.eigenfunction_table(x2, mat.shape[1])
    values = np.sum(t1 * (mat @ t2), axis=0)
    return HeatKernelResult(value=float(values[0]) if values.size == 1 else values, truncation=trunc)


def joint_heat_kernel_matrix(joint: JointSpace, t: float, x1, x2,
                             diagnostic: bool = False) -> tuple[np.ndarray, HeatKernelTruncation]:
    mat, trunc = _joint_heat_band(joint, t, diagnostic)
    return _apply_band(joint, mat, x1, x2), trunc


def fit_joint_envelope(joint: JointSpace, t: float, min_separation: float = 0.2,
                       grid_size: int = 256) -> EnvelopeFit:
    """Fit log|K_t(joint)| against d^2 / t over grid pairs at joint distance >= min_separation."""
    pts = np.linspace(0.0, math.pi, grid_size)
    mat, _ = joint_heat_kernel_matrix(joint, t, pts, pts)
    d = joint.distance(pts[:, None], pts[None, :])
    use = (d >= min_separation) & (np.abs(mat) >= Config.ENVELOPE_FLOOR)
    fit = fit_slope(d[use] ** 2 / t, np.log(np.abs(mat[use])))
    return EnvelopeFit(t=float(t), c2=-fit.slope, slope=fit.slope, intercept=fit.intercept,
                       residual=fit.residual, min_value=float(np.min(mat)), pairs=int(use.sum()))


def localization_profile(joint: JointSpace, delta: float, N_list,
                         grid_size: int | None = None) -> LocalizationProfile:
    """Sup of |Phi_N(joint; x1, x2)| over grid pairs with |x1 - x2| >= delta, fitted in log N."""
    N_list = validate_profile_args(N_list, delta, math.pi)
    pts = np.linspace(0.0, math.pi, grid_size or Config.PROFILE_GRID_SIZE)
    far = joint.distance(pts[:, None], pts[None, :]) >= delta
    off, diag = [], []
    for N in N_list:
        mat = joint_kernel_matrix(joint, N, pts, pts)
        off.append(float(np.max(np.abs(mat[far]))))
        diag.append(float(np.max(np.abs(np.diag(mat)))))
    return profile_from_values(N_list, np.array(off), np.array(diag))


@dataclass(frozen=True, eq=False)
class ImageSetResult:
    """
    Image set of a base subset A: the margin set B_minus and B = B1(B_minus, s).

    ``B_minus`` and ``B`` are sorted target grid points; ``base_mask`` marks
    the base grid points inside A.
    """

    B_minus: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    r: float
    s: float
    base_mask: np.ndarray = field(repr=False)
    spacing: float = 0.0

    @property
    def is_empty(self) -> bool:
        return len(self.B) == 0

    def interval(self, which: str = "B") -> tuple[float, float] | None:
        """(min, max) of B or B_minus, or None when empty."""
        pts = self.B if which == "B" else self.B_minus
        if len(pts) == 0:
            return None
        return float(pts[0]), float(pts[-1])

    def contains(self, points, tolerance: float = 1e-12) -> np.ndarray:
        """Whether each point lies within s of B_minus."""
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        d = min_distance(lambda a, b: np.abs(a - b), pts, self.B_minus)
        return d <= self.s + tolerance


def image_set(joint: JointSpace, region, r: float, s: float) -> ImageSetResult:
    """
    Maximal grid image set of A.

    B_minus collects the target grid points x1 with joint distance at least
    r + s from every base grid point outside A; B collects the target grid
    points within s of B_minus. An A covering the whole base gives the
    whole target, and a margin that no point clears gives an empty result.

    Args:
        joint: The joint space.
        region: Point predicate on the base, or a (center, radius) ball.
        r: Localization margin, > 0.
        s: Neighborhood radius, > 0.
    """
    if not (r > 0 and s > 0):
        raise ParameterDomainError(f"r={r} and s={s} must be positive", parameter="r")
    base_grid = joint.base.grid
    target_grid = joint.target.grid
    if callable(region):
        inside = np.asarray(region(base_grid), dtype=bool)
    else:
        center, radius = region
        inside = ball_predicate(joint.base, center, radius)(base_grid)
    to_outside = min_distance(joint.distance, target_grid, base_grid[~inside])
    b_minus = target_grid[to_outside >= r + s]
    to_core = min_distance(joint.target.distance, target_grid, b_minus)
    b_set = target_grid[to_core <= s + 1e-12]
    logger.debug(f"Image set: {len(b_minus)} margin points, {len(b_set)} points in B")
    return ImageSetResult(B_minus=b_minus, B=b_set, r=float(r), s=float(s), base_mask=inside,
                          spacing=float(target_grid[1] - target_grid[0]))


@dataclass
class LiftResult:
    """Values of the lifted function and the dyadic convergence report."""

    values: np.ndarray = field(repr=False)
    level: int
    n: float
    report: pd.DataFrame = field(repr=False)

    @property
    def differences(self) -> list[float]:
        return [float(d) for d in self.report["sup_diff"].dropna()]


def _base_sigma_values(joint: JointSpace, fhat: np.ndarray, n: float, mask: np.ndarray) -> np.ndarray | None:
    try:
        w = kernel_weights(joint.base, n)
    except InsufficientSpectrumError:
        return None
    return joint.base.expand(w * fhat[: len(w)], joint.base.grid[mask])


def lift(
    joint: JointSpace,
    f: Callable,
    target_points,
    image: ImageSetResult,
    tolerance: float = 1e-8,
    max_level: int = 12,
    start_level: int = 0,
    level: int | None = None,
    rule: Measure | None = None,
) -> LiftResult:
    """
    Evaluate the lifted function E(f) at target points inside the image set.

    Level L evaluates sigma_{cstar_plateau 2^L}(joint; f); the first level whose sup
    difference from the previous level is at most ``tolerance`` is returned.
    The report lists each level with its difference and the running sum of
    2^{m (Q - q2)} ||sigma_{2^{m+1}} f - sigma_{2^m} f||_A on the base.

    With ``level`` given, only that level is evaluated and returned without a
    convergence test. For f with a singularity inside A the dyadic differences
    decay only like the smoothness of f, so a fixed high level is the usable
    approximation of E(f) there: its target coefficients agree with those of
    E(f) at every index whose band pairs lie on the filter plateau.

    ``rule`` replaces the base measure when computing the coefficients of f,
    e.g. a split rule for f with a known algebraic singularity.

    Raises:
        ParameterDomainError: Target points outside the image set, or a negative level.
        InsufficientSpectrumError: A fixed level beyond the joint spectrum.
        NonConvergenceError: No level up to ``max_level`` meets the tolerance.
    """
    pts = joint.target.as_points(target_points)
    if image.is_empty or not np.all(image.contains(pts)):
        raise ParameterDomainError("lift target points must lie inside the image set B",
                                   parameter="target_points")
    if tolerance <= 0:
        raise ParameterDomainError(f"tolerance={tolerance} must be positive", parameter="tolerance",
                                   value=tolerance)

    if level is not None and level < 0:
        raise ParameterDomainError(f"level={level} must be nonnegative", parameter="level", value=level)

    fhat = fourier_coefficients(joint.base, f, joint.base.max_index, rule)
    if level is not None:
        n = joint.cstar_plateau * 2.0**level
        values = joint.target.expand(joint_coefficients(joint, n, fhat), pts)
        report = pd.DataFrame([{"level": level, "n": n, "sup_diff": math.nan, "thmcon1_partial": math.nan}])
        return LiftResult(values=values, level=int(level), n=n, report=report)

    Q, _, q2 = joint.exponents
    mask = image.base_mask
    rows = []
    previous = None
    partial_sum = 0.0
    diffs: list[float] = []
    for level in range(start_level, max_level + 1):
        n = joint.cstar_plateau * 2.0**level
        try:
            coeffs = joint_coefficients(joint, n, fhat)
        except InsufficientSpectrumError:
            if previous is None:
                raise
            break
        values = joint.target.expand(coeffs, pts)

        lo = _base_sigma_values(joint, fhat, 2.0**level, mask)
        hi = _base_sigma_values(joint, fhat, 2.0 ** (level + 1), mask)
        if lo is not None and hi is not None and len(lo):
            partial_sum += 2.0 ** (level * (Q - q2)) * float(np.max(np.abs(hi - lo)))
            partial = partial_sum
        else:
            partial = math.nan

        diff = math.nan if previous is None else float(np.max(np.abs(values - previous)))
        rows.append({"level": level, "n": n, "sup_diff": diff, "thmcon1_partial": partial})
        if previous is not None:
            diffs.append(diff)
            if diff <= tolerance:
                logger.info(f"Lift on {joint.label} converged at level {level} (n={n:g})")
                return LiftResult(values=values, level=level, n=n, report=pd.DataFrame(rows))
        previous = values

    raise NonConvergenceError(
        f"Lift on {joint.label} did not reach tolerance {tolerance:g} by level {max_level}",
        diffs,
    )


def _trig_only(space: DataSpace, name: str) -> TrigJacobiSpace:
    if not isinstance(space, TrigJacobiSpace):
        raise IncompatibleSpacesError(
            f"Diffusion distance needs trigonometric spaces on [0, pi]; {name} is {space.label}"
        )
    return space


def diffusion_distance(space1: DataSpace, space2: DataSpace, t: float, x: float, y: float) -> float:
    """
    Diffusion distance between x (in space1) and y (in space2) at time t.

    The squared distance is ||a||^2 + ||b||^2 - 2 a' C b with
    a_j = exp(-lambda1_j^2 t) phi1_j(x), b_k = exp(-lambda2_k^2 t) phi2_k(y)
    and C[j,k] the integral of phi1_j phi2_k over the shared measure, so
    ||a||^2 = K1_{2t}(x, x) and ||b||^2 = K2_{2t}(y, y).

    Raises:
        IncompatibleSpacesError: Spaces that are not both trigonometric.
        NumericalFailureError: Squared distance below -1e-10.
    """
    s1 = _trig_only(space1, "space1")
    s2 = _trig_only(space2, "space2")
    for name, v in (("x", x), ("y", y)):
        if not (0.0 <= v <= math.pi):
            raise ParameterDomainError(f"{name}={v} must lie in [0, pi]", parameter=name, value=v)
    w1, _ = heat_weights(s1, t)
    w2, _ = heat_weights(s2, t)
    a = w1 * s1.eigenfunction_table(x, len(w1))[:, 0]
    b = w2 * s2.eigenfunction_table(y, len(w2))[:, 0]

    if s1.params == s2.params:
        m = min(len(a), len(b))
        cross = float(np.dot(a[:m], b[:m]))
    else:
        p1, p2 = s1.params, s2.params
        mid = JacobiParams((p1.alpha + p2.alpha) / 2.0, (p1.beta + p2.beta) / 2.0)
        rule = gauss_rule(mid, (len(a) + len(b)) // 2 + 1)
        t1 = build_basis(p1, max(len(a) - 1, 0)).evaluate(rule.nodes, len(a) - 1)
        t2 = build_basis(p2, max(len(b) - 1, 0)).evaluate(rule.nodes, len(b) - 1)
        overlap = (t1 * np.asarray(rule.weights)) @ t2.T
        cross = float(a @ overlap @ b)

    sq = float(a @ a) + float(b @ b) - 2.0 * cross
    if sq < 0:
        if sq < -1e-10:
            raise NumericalFailureError(
                "Squared diffusion distance is negative beyond round-off",
                diagnostic={"value": f"{sq:.3e}", "t": t},
            )
        logger.debug(f"Clipped squared diffusion distance {sq:.2e} to 0")
        sq = 0.0
    return math.sqrt(sq)
