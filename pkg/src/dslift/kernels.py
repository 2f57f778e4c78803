"""
Localized kernels, summability operators and heat kernels on data spaces.

The kernels are filtered spectral sums

    Phi_n(x, y) = sum_k h(lambda_k / n) phi_k(x) phi_k(y)

with a fixed C-infinity filter h that equals 1 on [0, 1/2] and vanishes on
[1, inf). The operator sigma_n applies the same filter to Fourier
coefficients; it reproduces every diffusion polynomial of degree n/2 and
gives near-best approximation, so ||f - sigma_n f|| serves as the degree
of approximation in all rate and smoothness diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np
import pandas as pd

from .config import Config, get_logger
from .dataspace import DataSpace, GridFunction, Measure, fourier_coefficients
from .exceptions import InsufficientSpectrumError, ParameterDomainError
from .utils import SlopeFit, assemble_tiles, fit_slope

logger = get_logger("kernels")

__all__ = [
    "Filter",
    "DEFAULT_FILTER",
    "HeatKernelTruncation",
    "HeatKernelResult",
    "SmoothnessEstimate",
    "LocalizationProfile",
    "EnvelopeFit",
    "filter_eval",
    "kernel_weights",
    "heat_weights",
    "heat_tail_sum",
    "eigenfunction_bound",
    "localized_kernel",
    "kernel_matrix",
    "sigma",
    "heat_kernel",
    "heat_kernel_matrix",
    "degree_of_approximation",
    "estimate_smoothness",
    "localization_profile",
    "profile_from_values",
    "validate_profile_args",
    "validate_heat_time",
    "make_bump",
    "ball_predicate",
    "lebesgue_constant",
    "fit_gaussian_envelope",
]


def _psi(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


class Filter:
    """
    The fixed filter h, extended evenly to negative arguments.

    On (1/2, 1): h(t) = psi(1 - t) / (psi(1 - t) + psi(t - 1/2)) with
    psi(u) = exp(-1/u), which is symmetric about 3/4.

    Attributes:
        decay_order: Order S used only when comparing kernel decay against
            the polynomial envelope N^q / max(1, (N d)^S).
    """

    def __init__(self, decay_order: int = 4):
        self.decay_order = decay_order

    def __call__(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        out = np.zeros_like(t)
        out[t <= 0.5] = 1.0
        mid = (t > 0.5) & (t < 1.0)
        if np.any(mid):
            a = _psi(1.0 - t[mid])
            b = _psi(t[mid] - 0.5)
            out[mid] = a / (a + b)
        return float(out) if out.ndim == 0 else out

    def derivative(self, order: int, t: float, step: float = 1e-2) -> float:
        """Central finite-difference derivative of the given order (1 to 3)."""
        stencils = {
            1: ([-1, 1], [-0.5, 0.5]),
            2: ([-1, 0, 1], [1.0, -2.0, 1.0]),
            3: ([-2, -1, 1, 2], [-0.5, 1.0, -1.0, 0.5]),
        }
        if order not in stencils:
            raise ParameterDomainError(f"derivative order {order} must be 1, 2 or 3", parameter="order")
        offsets, coef = stencils[order]
        vals = self(np.array([t + k * step for k in offsets]))
        return float(np.dot(coef, vals)) / step**order


DEFAULT_FILTER = Filter()


def filter_eval(t):
    """
    Evaluate the filter h.

    Example:
        >>> filter_eval(0.25), filter_eval(0.75), filter_eval(1.5)
        (1.0, 0.5, 0.0)
    """
    return DEFAULT_FILTER(t)


def _check_degree(n: float) -> float:
    if not (n > 0 and math.isfinite(n)):
        raise ParameterDomainError(f"Kernel degree n={n} must be positive", parameter="n", value=n)
    return float(n)


def kernel_weights(space: DataSpace, n: float, filt: Filter = DEFAULT_FILTER) -> np.ndarray:
    """
    Filter weights h(lambda_k / n) for every k with lambda_k < n.

    Raises:
        InsufficientSpectrumError: If eigenvalues below n lie beyond max_index.
    """
    n = _check_degree(n)
    limit = space.spectrum_limit()
    if n > limit:
        raise InsufficientSpectrumError(n, limit, what=space.label)
    count = space.count_below(n)
    return np.asarray(filt(space.eigenvalues[:count] / n), dtype=float).reshape(count)


@dataclass(frozen=True)
class HeatKernelTruncation:
    """
    Where the heat series was cut and how much it may have dropped.

    Either exp(-lambda_cutoff^2 t) fell below Config.HEAT_TERM_THRESHOLD,
    or cutoff_index == max_index and tail_bound estimates the remainder.
    """

    t: float
    cutoff_index: int
    tail_bound: float

    @property
    def warning(self) -> bool:
        return self.tail_bound > Config.HEAT_TAIL_WARNING


@dataclass(frozen=True)
class HeatKernelResult:
    value: np.ndarray | float
    truncation: HeatKernelTruncation

    @property
    def warning(self) -> bool:
        return self.truncation.warning


def heat_tail_sum(start: float, t: float) -> float:
    """sum_{j >= 0} exp(-(start + j)^2 t), summed until terms underflow."""
    span = int(math.ceil(math.sqrt(745.0 / t))) + 2
    lam = start + np.arange(span)
    return float(np.sum(np.exp(-(lam**2) * t)))


def eigenfunction_bound(space: DataSpace) -> float:
    """Empirical bound for |phi_k(x) phi_k(y)| at the top of the spectrum."""
    if space.has_eigenfunctions:
        top = space.eigenfunction(space.max_index)(space.grid)
        return float(max(1.0, np.max(top**2)))
    top = np.zeros(space.max_index + 1)
    top[-1] = 1.0
    return float(abs(space.zonal(top, 1.0)))


def validate_heat_time(t: float, diagnostic: bool = False) -> float:
    if not (t > 0 and math.isfinite(t)):
        raise ParameterDomainError(f"Heat time t={t} must be positive", parameter="t", value=t)
    if t > 1 and not diagnostic:
        raise ParameterDomainError(
            f"Heat time t={t} exceeds 1; pass diagnostic=True for the extended range",
            parameter="t",
            value=t,
        )
    return float(t)


def heat_weights(space: DataSpace, t: float, diagnostic: bool = False) -> tuple[np.ndarray, HeatKernelTruncation]:
    """
    Heat-series weights exp(-lambda_k^2 t), truncated at the per-term threshold.

    Args:
        space: The data space.
        t: Time, 0 < t <= 1 (t > 1 only with ``diagnostic=True``).
        diagnostic: Allow the extended t range used by sanity checks.

    Returns:
        (weights, truncation record).
    """
    validate_heat_time(t, diagnostic)
    lam = space.eigenvalues
    terms = np.exp(-(lam**2) * t)
    keep = int(np.count_nonzero(terms >= Config.HEAT_TERM_THRESHOLD))
    if keep <= space.max_index:
        cutoff = keep
        start = float(lam[cutoff])
    else:
        cutoff = space.max_index
        start = float(space.eigenvalue(space.max_index + 1))
    tail = heat_tail_sum(start, t) * eigenfunction_bound(space)
    trunc = HeatKernelTruncation(t=float(t), cutoff_index=cutoff, tail_bound=tail)
    if trunc.warning:
        logger.warning(
            f"Heat series on {space.label} truncated at index {cutoff} with tail bound {tail:.2e}"
        )
    return terms[:keep], trunc


def _pairwise(space: DataSpace, weights: np.ndarray, x, y) -> np.ndarray:
    """sum_k w_k phi_k(x_i) phi_k(y_i) for aligned point batches, symmetric in x and y."""
    x = space.as_points(x)
    y = space.as_points(y)
    if space.has_eigenfunctions:
        tx = space.eigenfunction_table(x, len(weights))
        ty = space.eigenfunction_table(y, len(weights))
        return np.sum(weights[:, None] * (tx * ty), axis=0)
    return space.zonal(weights, space.inner(x, y))


def _spectral_matrix(space: DataSpace, weights: np.ndarray, x, y) -> np.ndarray:
    x = space.as_points(x)
    y = space.as_points(y)
    if space.has_eigenfunctions:
        tx = space.eigenfunction_table(x, len(weights)) * weights[:, None]
        ty = space.eigenfunction_table(y, len(weights))

        def block(r: slice, c: slice) -> np.ndarray:
            return tx[:, r].T @ ty[:, c]
    else:
        def block(r: slice, c: slice) -> np.ndarray:
            return space.zonal_block(weights, x[r], y[c])
    return assemble_tiles((len(x), len(y)), block)


def localized_kernel(space: DataSpace, n: float, x, y, filt: Filter = DEFAULT_FILTER):
    """
    Phi_n(x, y) = sum_k h(lambda_k / n) phi_k(x) phi_k(y).

    Terms with lambda_k >= n vanish by the filter support. On kernel-level
    spaces the per-level zonal form is summed instead.

    Args:
        space: The data space.
        n: Degree parameter, > 0.
        x, y: Points (or aligned batches of points).

    Raises:
        InsufficientSpectrumError: If the kernel would be silently truncated.
    """
    w = kernel_weights(space, n, filt)
    values = _pairwise(space, w, x, y)
    return float(values[0]) if values.size == 1 else values


def kernel_matrix(space: DataSpace, n: float, x, y, filt: Filter = DEFAULT_FILTER) -> np.ndarray:
    """
    Pairwise Phi_n over two point sets, assembled in tiles.

    Eigenfunctions are evaluated once per point and reused across tiles.
    """
    return _spectral_matrix(space, kernel_weights(space, n, filt), x, y)


def sigma(space: DataSpace, n: float, f: Callable, filt: Filter = DEFAULT_FILTER) -> GridFunction:
    """
    sigma_n(f) = sum_{lambda_k < n} h(lambda_k / n) f_hat(k) phi_k.

    Args:
        space: A space with per-index eigenfunctions.
        n: Degree parameter.
        f: Vectorized callable evaluable on the measure nodes.

    Returns:
        Grid values on the space's evaluation grid with an off-grid evaluator.

    Raises:
        UnsupportedOperationError: On kernel-level spaces.
        InsufficientSpectrumError: If n exceeds the built spectrum.

    Example:
        >>> from dslift.dataspace import make_trig_jacobi_space
        >>> s = make_trig_jacobi_space((-0.5, -0.5), 32, 64)
        >>> g = sigma(s, 16, lambda th: np.cos(2 * th))
        >>> round(float(g(np.array([0.0]))[0]), 12)
        1.0
    """
    w = kernel_weights(space, n, filt)
    fhat = fourier_coefficients(space, f, len(w) - 1)
    coeffs = w * fhat
    values = space.expand(coeffs, space.grid)
    return GridFunction(
        grid=space.grid,
        values=values,
        evaluator=partial(space.expand, coeffs),
        meta={"n": float(n), "terms": len(coeffs)},
    )


def heat_kernel(space: DataSpace, t: float, x, y, diagnostic: bool = False) -> HeatKernelResult:
    """
    Truncated heat kernel sum_k exp(-lambda_k^2 t) phi_k(x) phi_k(y).

    The result carries the truncation record; a tail bound above
    Config.HEAT_TAIL_WARNING sets its warning flag.
    """
    w, trunc = heat_weights(space, t, diagnostic)
    values = _pairwise(space, w, x, y)
    return HeatKernelResult(value=float(values[0]) if values.size == 1 else values, truncation=trunc)


def heat_kernel_matrix(space: DataSpace, t: float, x, y, diagnostic: bool = False) -> tuple[np.ndarray, HeatKernelTruncation]:
    """Pairwise truncated heat kernel over two point sets."""
    w, trunc = heat_weights(space, t, diagnostic)
    return _spectral_matrix(space, w, x, y), trunc


def degree_of_approximation(space: DataSpace, f: Callable, n: float, mask: np.ndarray | None = None) -> float:
    """
    ||f - sigma_n f|| on the evaluation grid (optionally restricted to a mask).

    Within constant factors this is the best-approximation error from
    diffusion polynomials; it vanishes for f of degree n/2.
    """
    approx = sigma(space, n, f)
    err = np.abs(np.asarray(f(space.grid), dtype=float) - approx.values)
    if mask is not None:
        err = err[mask]
    return float(np.max(err)) if len(err) else 0.0


def ball_predicate(space: DataSpace, center, radius: float) -> Callable[[np.ndarray], np.ndarray]:
    """Indicator of the closed metric ball B(center, radius)."""
    c = space.as_points(center)[0]
    return lambda pts: space.distance(c, space.as_points(pts)) <= radius


def _subset_mask(space: DataSpace, subset) -> np.ndarray:
    if callable(subset):
        return np.asarray(subset(space.grid), dtype=bool)
    center, radius = subset
    return ball_predicate(space, center, radius)(space.grid)


@dataclass
class SmoothnessEstimate:
    """
    Local smoothness estimate from a dyadic error regression.

    ``status`` is "bounded" with a number in ``gamma``, or "unbounded" when
    the errors are machine-flat (f effectively a polynomial on the subset).
    """

    gamma: float | None
    status: str
    fit: SlopeFit
    table: pd.DataFrame = field(repr=False)

    @property
    def residual(self) -> float:
        return self.fit.residual


def estimate_smoothness(
    space: DataSpace,
    f: Callable,
    subset,
    levels=range(4, 10),
    method: str = "residual",
    rule: Measure | None = None,
) -> SmoothnessEstimate:
    """
    Estimate the local smoothness of f on a subset from dyadic errors.

    With ``method="residual"`` the errors are ||f - sigma_{2^m} f|| on the
    subset; with ``method="telescoped"`` they are
    ||sigma_{2^{m+1}} f - sigma_{2^m} f||. The estimate is minus the
    least-squares slope of log2(error) against m. The coefficients of f
    are computed once and filtered per level.

    Args:
        space: Space with per-index eigenfunctions.
        f: Vectorized callable.
        subset: Point predicate, or a (center, radius) ball.
        levels: Dyadic levels m.
        method: "residual" or "telescoped".
        rule: Quadrature for the coefficients, such as
            ``TrigJacobiSpace.singular_rule`` for f with a known power singularity.

    Raises:
        ParameterDomainError: Empty levels or a subset with fewer than 8 grid points.
    """
    levels = [int(m) for m in levels]
    if not levels:
        raise ParameterDomainError("levels must be nonempty", parameter="levels")
    if method not in ("residual", "telescoped"):
        raise ParameterDomainError(f"Unknown smoothness method {method!r}", parameter="method")
    mask = _subset_mask(space, subset)
    if int(mask.sum()) < 8:
        raise ParameterDomainError(
            f"subset holds {int(mask.sum())} grid points; at least 8 are needed", parameter="subset"
        )

    fvals = np.asarray(f(space.grid), dtype=float)
    fhat = fourier_coefficients(space, f, space.max_index, rule)
    cache: dict[int, np.ndarray] = {}

    def approx(m: int) -> np.ndarray:
        if m not in cache:
            w = kernel_weights(space, 2.0**m)
            cache[m] = space.expand(w * fhat[: len(w)], space.grid)
        return cache[m]

    errors = []
    for m in levels:
        if method == "residual":
            diff = fvals - approx(m)
        else:
            diff = approx(m + 1) - approx(m)
        errors.append(float(np.max(np.abs(diff[mask]))))

    errors_arr = np.array(errors)
    used = errors_arr >= Config.SMOOTHNESS_FLOOR
    table = pd.DataFrame({
        "level": levels,
        "n": [2.0**m for m in levels],
        "error": errors_arr,
        "used": used,
    })
    if int(used.sum()) < 2:
        logger.info("Smoothness errors are machine-flat; reporting unbounded smoothness")
        return SmoothnessEstimate(gamma=None, status="unbounded", fit=fit_slope([], []), table=table)
    fit = fit_slope(np.array(levels)[used], np.log2(errors_arr[used]))
    return SmoothnessEstimate(gamma=-fit.slope, status="bounded", fit=fit, table=table)


@dataclass
class LocalizationProfile:
    """Off-diagonal kernel suprema per degree, with fitted log-log slopes."""

    table: pd.DataFrame = field(repr=False)
    slope: float
    residual: float
    diagonal_slope: float


def profile_from_values(N_list, off: np.ndarray, diag: np.ndarray) -> LocalizationProfile:
    """
    Fit log|Phi_N| against log N over the values above the round-off floor.

    A value counts as resolved when it is at least Config.PROFILE_FLOOR times
    the on-diagonal value at the same N. With fewer than two resolved
    values the decay is beyond resolution and the slope is -inf.
    """
    N = np.asarray(N_list, dtype=float)
    off = np.asarray(off, dtype=float)
    diag = np.asarray(diag, dtype=float)
    resolved = off >= Config.PROFILE_FLOOR * np.abs(diag)
    if int(resolved.sum()) >= 2:
        fit = fit_slope(np.log(N[resolved]), np.log(off[resolved]))
        slope, residual = fit.slope, fit.residual
    else:
        slope, residual = -math.inf, math.nan
    dfit = fit_slope(np.log(N), np.log(np.abs(diag)))
    table = pd.DataFrame({
        "N": N,
        "value": off,
        "diagonal": diag,
        "resolved": resolved,
        "fitted_slope": slope,
        "residual": residual,
    })
    return LocalizationProfile(table=table, slope=slope, residual=residual, diagonal_slope=dfit.slope)


def validate_profile_args(N_list, delta: float, diameter: float) -> list[float]:
    N_list = [float(n) for n in N_list]
    if not N_list or any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ParameterDomainError("N_list must be nonempty and increasing", parameter="N_list")
    if not (0 < delta < diameter):
        raise ParameterDomainError(
            f"delta={delta} must lie in (0, {diameter:.4f})", parameter="delta", value=delta
        )
    return N_list


def localization_profile(
    space: DataSpace,
    delta: float,
    N_list,
    grid_size: int | None = None,
) -> LocalizationProfile:
    """
    Table of (N, sup over d(x, y) >= delta of |Phi_N(x, y)|) with fitted slopes.

    On spaces with eigenfunctions the supremum runs over grid x grid pairs
    of a uniform grid (Config.PROFILE_GRID_SIZE points by default). On
    kernel-level spaces the kernel depends on the distance alone, so the
    supremum runs over a dense grid of distances in [delta, diameter].
    """
    N_list = validate_profile_args(N_list, delta, space.diameter)
    off, diag = [], []
    if space.has_eigenfunctions:
        pts = np.linspace(0.0, math.pi, grid_size or Config.PROFILE_GRID_SIZE)
        far = space.distance(pts[:, None], pts[None, :]) >= delta
        for N in N_list:
            mat = kernel_matrix(space, N, pts, pts)
            off.append(float(np.max(np.abs(mat[far]))))
            diag.append(float(np.max(np.abs(np.diag(mat)))))
    else:
        d = np.linspace(delta, space.diameter, Config.ZONAL_PROFILE_POINTS)
        for N in N_list:
            w = kernel_weights(space, N)
            off.append(float(np.max(np.abs(space.zonal(w, np.cos(d))))))
            diag.append(float(abs(space.zonal(w, 1.0))))
    profile = profile_from_values(N_list, np.array(off), np.array(diag))
    logger.info(f"Localization profile on {space.label}: slope {profile.slope:.3f}")
    return profile


def make_bump(space: DataSpace, center, inner_r: float, outer_r: float,
              filt: Filter = DEFAULT_FILTER) -> Callable[[np.ndarray], np.ndarray]:
    """
    Smooth bump: 1 on B(center, inner_r), 0 off B(center, outer_r).

    The transition reuses the filter profile, so the value at distance
    (inner_r + outer_r) / 2 is exactly 1/2.

    Raises:
        ParameterDomainError: Unless 0 < inner_r < outer_r.
    """
    if not (0 < inner_r < outer_r):
        raise ParameterDomainError(
            f"Bump radii need 0 < inner_r < outer_r, got {inner_r}, {outer_r}", parameter="inner_r"
        )
    c = space.as_points(center)[0]
    width = outer_r - inner_r

    def bump(pts) -> np.ndarray:
        d = space.distance(c, space.as_points(pts))
        return np.asarray(filt(0.5 + (d - inner_r) / (2.0 * width)), dtype=float)

    return bump


def lebesgue_constant(space: DataSpace, n: float, grid_size: int | None = None,
                      rule_size: int | None = None) -> float:
    """
    max_x of integral |Phi_n(x, y)| d mu(y), the operator-norm proxy of sigma_n.

    The integral uses the space's integration rule with at least 16 n points.
    """
    pts = np.linspace(0.0, math.pi, grid_size or Config.PROFILE_GRID_SIZE) \
        if space.has_eigenfunctions else np.asarray(space.grid)
    rule = space.integration_rule(rule_size or max(Config.GRID_SIZE, int(16 * n)))
    mat = kernel_matrix(space, n, pts, rule.points)
    return float(np.max(np.abs(mat) @ rule.weights))


@dataclass(frozen=True)
class EnvelopeFit:
    """Least-squares fit of log|K_t| against d^2 / t over separated pairs."""

    t: float
    c2: float
    slope: float
    intercept: float
    residual: float
    min_value: float
    pairs: int


def fit_gaussian_envelope(
    space: DataSpace,
    t: float,
    min_separation: float = 0.2,
    grid_size: int = 256,
    diagnostic: bool = False,
) -> EnvelopeFit:
    """
    Fit the Gaussian envelope of the heat kernel.

    Pairs with d >= min_separation and |K_t| above Config.ENVELOPE_FLOOR
    enter the regression of log|K_t| on d^2 / t; c2 = -slope. The minimum
    kernel value over all pairs is reported as a positivity check.
    """
    if space.has_eigenfunctions:
        pts = np.linspace(0.0, math.pi, grid_size)
    else:
        step = max(1, len(space.grid) // grid_size)
        pts = np.asarray(space.grid)[::step]
    mat, _ = heat_kernel_matrix(space, t, pts, pts, diagnostic=diagnostic)
    d = space.distance(pts[:, None], pts[None, :]) if space.has_eigenfunctions else \
        space.distance(pts[:, None, :], pts[None, :, :])
    use = (d >= min_separation) & (np.abs(mat) >= Config.ENVELOPE_FLOOR)
    fit = fit_slope(d[use] ** 2 / t, np.log(np.abs(mat[use])))
    return EnvelopeFit(
        t=float(t),
        c2=-fit.slope,
        slope=fit.slope,
        intercept=fit.intercept,
        residual=fit.residual,
        min_value=float(np.min(mat)),
        pairs=int(use.sum()),
    )
