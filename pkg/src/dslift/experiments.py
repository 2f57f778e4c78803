"""
Reproducible experiments behind the command-line subcommands.

Each ``run_*`` function takes an ExperimentConfig and returns an
ExperimentResult: a table (written as CSV) and a flat summary (written as
JSON) carrying the fitted quantities, the thresholds they are judged
against and a short ``anchor`` naming the result being exercised.

Example:
    >>> cfg = ExperimentConfig("imageset", max_degree=16, grid_size=1024)
    >>> result = run_imageset(cfg)
    >>> result.summary["passed"]
    True
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
import pandas as pd

from .config import Config, get_logger
from .dataspace import fourier_coefficients, make_ball_space, make_trig_jacobi_space
from .exceptions import ParameterDomainError
from .joint import (
    band_violation,
    build_joint_jacobi,
    connection_matrix,
    diffusion_distance,
    fit_joint_envelope,
    image_set,
    joint_coefficients,
    joint_heat_kernel,
    joint_sigma,
    lift,
    omega_weight,
    spectral_ratio,
    transplantation_residual,
    variation_statistic,
)
from .joint import localization_profile as joint_localization_profile
from .kernels import (
    estimate_smoothness,
    fit_gaussian_envelope,
    heat_kernel,
    heat_weights,
    lebesgue_constant,
    localization_profile,
    make_bump,
    sigma,
)
from .orthopoly import JacobiParams, build_basis, gauss_rule, value_at_one
from .utils import fit_slope, write_artifacts

try:
    from tqdm import tqdm as _tqdm
    tqdm: Any = _tqdm
except ImportError:
    tqdm = None

logger = get_logger("experiments")

__all__ = [
    "SUBCOMMANDS",
    "ExperimentConfig",
    "ExperimentResult",
    "joint_degree_for",
    "run_basis",
    "run_localize",
    "run_heat",
    "run_transplant",
    "run_rates",
    "run_smoothness",
    "run_imageset",
    "run_diffusion",
    "run_selftest",
    "run_experiment",
]

SUBCOMMANDS = (
    "basis", "localize", "heat", "transplant", "rates", "smoothness", "imageset", "diffusion", "selftest",
)
LOCALIZE_KINDS = ("trig", "ball", "joint")


@dataclass
class ExperimentConfig:
    """
    Parameters of one experiment run.

    ``alpha1``/``beta1`` select the target (or single) space and
    ``alpha2``/``beta2`` the base space. ``n_levels`` defaults per
    subcommand when left as None.

    Raises:
        ParameterDomainError: On any out-of-range value.
    """

    subcommand: str = "selftest"
    alpha1: float = 1.5
    beta1: float = 1.5
    alpha2: float = -0.5
    beta2: float = -0.5
    max_degree: int = 256
    grid_size: int | None = None
    n_levels: int | None = None
    delta: float = 0.5
    r: float = 1.0 / 16.0
    s: float = 1.0 / 16.0
    t_list: tuple[float, ...] = (0.01, 0.05, 0.1, 0.5)
    seed: int = field(default_factory=lambda: Config.SEED)
    gamma: float = 0.5
    theta0: float = math.pi / 2.0
    r0: float = 0.8
    x: float = math.pi / 2.0
    y: float = math.pi / 2.0
    kind: str = "trig"
    q: int = 2
    outdir: Path = field(default_factory=lambda: Config.OUTDIR)

    def __post_init__(self):
        self.t_list = tuple(float(t) for t in self.t_list)
        self.outdir = Path(self.outdir)
        self.validate()

    def validate(self) -> None:
        def bad(name: str, rule: str) -> ParameterDomainError:
            return ParameterDomainError(f"{name}={getattr(self, name)!r} is invalid: {rule}",
                                        parameter=name, value=getattr(self, name))

        if self.subcommand not in SUBCOMMANDS:
            raise bad("subcommand", f"expected one of {', '.join(SUBCOMMANDS)}")
        for name in ("alpha1", "beta1", "alpha2", "beta2"):
            if getattr(self, name) < -0.5:
                raise bad(name, "must be >= -1/2")
        if not 1 <= self.max_degree <= Config.MAX_DEGREE:
            raise bad("max_degree", f"must lie in [1, {Config.MAX_DEGREE}]")
        if self.grid_size is not None and self.grid_size < 16:
            raise bad("grid_size", "must be >= 16")
        if self.n_levels is not None and self.n_levels < 2:
            raise bad("n_levels", "must be >= 2")
        if not 0 < self.delta < math.pi:
            raise bad("delta", "must lie in (0, pi)")
        if self.r <= 0:
            raise bad("r", "must be positive")
        if self.s <= 0:
            raise bad("s", "must be positive")
        if not self.t_list or any(t <= 0 for t in self.t_list):
            raise bad("t_list", "needs at least one positive time")
        if self.gamma <= 0:
            raise bad("gamma", "must be positive")
        if self.r0 <= 0:
            raise bad("r0", "must be positive")
        for name in ("theta0", "x", "y"):
            if not 0 <= getattr(self, name) <= math.pi:
                raise bad(name, "must lie in [0, pi]")
        if self.kind not in LOCALIZE_KINDS:
            raise bad("kind", f"expected one of {', '.join(LOCALIZE_KINDS)}")
        if not 1 <= self.q <= Config.BALL_MAX_Q:
            raise bad("q", f"must lie in [1, {Config.BALL_MAX_Q}]")

    @property
    def target_params(self) -> JacobiParams:
        return JacobiParams(self.alpha1, self.beta1)

    @property
    def base_params(self) -> JacobiParams:
        return JacobiParams(self.alpha2, self.beta2)

    def levels(self, default: int) -> int:
        return self.n_levels if self.n_levels is not None else default

    def as_summary(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k != "outdir"}
        out["t_list"] = list(self.t_list)
        return out


@dataclass
class ExperimentResult:
    """Tabular result plus flat summary of one experiment."""

    name: str
    table: pd.DataFrame
    summary: dict

    @property
    def passed(self) -> bool:
        return bool(self.summary.get("passed", True))

    def write(self, outdir: Path | str) -> tuple[Path, Path]:
        return write_artifacts(outdir, self.name, self.table, self.summary)


def _progress(items, desc: str):
    if tqdm is not None and logger.isEnabledFor(logging.INFO):
        return tqdm(items, desc=desc, unit="step", leave=False)
    return items


def _summary(cfg: ExperimentConfig, anchor: str, **values) -> dict:
    out = cfg.as_summary()
    out["anchor"] = anchor
    out.update(values)
    return out


def joint_degree_for(n: float, p1: JacobiParams, p2: JacobiParams, ell_rule: str = "pythagorean") -> int:
    """Smallest comfortable joint max_degree whose spectrum reaches n."""
    bw = int(round(abs(p1.alpha - p2.alpha) + abs(p1.beta - p2.beta)))
    if ell_rule == "target":
        return int(math.ceil(n)) + bw + 1
    return int(math.ceil(n / math.sqrt(2.0))) + bw + 1


def _rough_node_count(max_index: int) -> int:
    """Measure nodes for non-polynomial integrands such as |theta - theta0|^gamma."""
    return min(Config.MAX_DEGREE, max(4096, 8 * max_index))


def _power_function(theta0: float, gamma: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda th: np.abs(np.asarray(th, dtype=float) - theta0) ** gamma


# -- basis ---------------------------------------------------------------------------------

def run_basis(cfg: ExperimentConfig) -> ExperimentResult:
    """Orthonormality and value-at-one checks of the target Jacobi system."""
    params = cfg.target_params
    degree = cfg.max_degree
    basis = build_basis(params, degree)
    rule = gauss_rule(params, degree + 2)
    table = basis.evaluate(rule.nodes, degree)
    gram = (table * rule.weights) @ table.T
    deviation = np.abs(gram - np.eye(degree + 1))

    at_one = basis.evaluate(1.0, degree)
    closed = np.array([value_at_one(params, n) for n in range(degree + 1)])
    rel = np.abs(at_one - closed) / np.abs(closed)
    frame = pd.DataFrame({
        "degree": np.arange(degree + 1),
        "gram_row_deviation": deviation.max(axis=1),
        "value_at_one": closed,
        "recurrence_at_one": at_one,
        "relative_difference": rel,
    })
    gram_dev = float(deviation.max())
    summary = _summary(
        cfg,
        "orthogonality relation and value at one of the Jacobi polynomials",
        params=str(params),
        gram_deviation=gram_dev,
        value_at_one_error=float(rel.max()),
        threshold=1e-10,
        passed=gram_dev <= 1e-10,
    )
    return ExperimentResult("basis", frame, summary)


# -- localize ------------------------------------------------------------------------------

def run_localize(cfg: ExperimentConfig) -> ExperimentResult:
    """Off-diagonal decay of the localized kernels over N = 64, 128, ..."""
    N_list = [64 * 2**i for i in range(cfg.levels(5))]
    n_max = N_list[-1]
    if cfg.kind == "trig":
        space = make_trig_jacobi_space(cfg.target_params, n_max, cfg.grid_size)
        profile = localization_profile(space, cfg.delta, N_list)
        label = space.label
    elif cfg.kind == "ball":
        space = make_ball_space(cfg.q, n_max)
        profile = localization_profile(space, cfg.delta, N_list)
        label = space.label
    else:
        p1, p2 = cfg.target_params, cfg.base_params
        joint = build_joint_jacobi(p1, p2, joint_degree_for(n_max, p1, p2), cfg.grid_size)
        profile = joint_localization_profile(joint, cfg.delta, N_list)
        label = joint.label
    summary = _summary(
        cfg,
        "localization of the kernels: decay faster than any power of N d(x, y)",
        space=label,
        fitted_slope=profile.slope,
        residual=profile.residual,
        diagonal_slope=profile.diagonal_slope,
        threshold=-3.0,
        passed=profile.slope <= -3.0,
    )
    return ExperimentResult("localize", profile.table, summary)


# -- heat ----------------------------------------------------------------------------------

def _heat_index(t: float) -> int:
    """max_index so that exp(-lambda^2 t) passes the per-term threshold inside the space."""
    return int(math.ceil(math.sqrt(-math.log(Config.HEAT_TERM_THRESHOLD) / t))) + 8


def run_heat(cfg: ExperimentConfig) -> ExperimentResult:
    """Positivity, Gaussian envelope and large-time limit of the heat kernel."""
    space = make_trig_jacobi_space(cfg.target_params, _heat_index(min(cfg.t_list)), cfg.grid_size)
    rows = []
    for t in cfg.t_list:
        fit = fit_gaussian_envelope(space, t)
        _, trunc = heat_weights(space, t)
        rows.append({
            "t": t,
            "c2": fit.c2,
            "residual": fit.residual,
            "min_value": fit.min_value,
            "pairs": fit.pairs,
            "cutoff_index": trunc.cutoff_index,
            "tail_bound": trunc.tail_bound,
        })
    frame = pd.DataFrame(rows)
    lam0, lam1 = (float(v) ** 2 for v in space.eigenvalues[:2])
    t_large = max(1.0, 32.0 / (lam1 - lam0))
    ground = float(space.eigenfunction(0)(np.array([0.3]))[0] * space.eigenfunction(0)(np.array([2.1]))[0])
    if lam0 * t_large <= 35.0:
        limit = heat_kernel(space, t_large, 0.3, 2.1, diagnostic=True)
        large_t = float(limit.value) * math.exp(lam0 * t_large)
        large_ok = abs(large_t - ground) <= 1e-8
    else:
        # ground-state weight would fall under the per-term threshold
        large_t, large_ok = math.nan, True
    min_value = float(frame["min_value"].min())
    summary = _summary(
        cfg,
        "Gaussian upper bound of the heat kernel",
        space=space.label,
        min_value=min_value,
        min_c2=float(frame["c2"].min()),
        large_time=t_large,
        large_time_value=large_t,
        large_time_limit=ground,
        passed=bool(min_value >= -1e-10 and (frame["c2"] > 0).all() and large_ok),
    )
    return ExperimentResult("heat", frame, summary)


# -- transplant ----------------------------------------------------------------------------

def run_transplant(cfg: ExperimentConfig) -> ExperimentResult:
    """Connection band, the finite orthogonal sums and the preservation constant."""
    p1, p2 = cfg.target_params, cfg.base_params
    joint = build_joint_jacobi(p1, p2, cfg.max_degree, cfg.grid_size)
    bw = joint.connection.bandwidth
    violation = band_violation(p1, p2, cfg.max_degree)
    top = min(64, cfg.max_degree - bw)
    residual = max(transplantation_residual(joint, k) for k in range(top + 1))
    summary = _summary(
        cfg,
        "connection coefficients and the two finite orthogonal sums",
        joint=joint.label,
        bandwidth=bw,
        band_violation=violation,
        transplant_error=residual,
        cstar=joint.cstar,
        cstar_plateau=joint.cstar_plateau,
        spectral_ratio=spectral_ratio(joint),
        passed=bool(violation <= Config.BAND_TOLERANCE and residual <= 1e-8),
    )
    return ExperimentResult("transplant", joint.connection.to_frame(), summary)


# -- rates ---------------------------------------------------------------------------------

def _rate_table(joint, f: Callable, image, levels: list[int]) -> pd.DataFrame:
    fhat = fourier_coefficients(joint.base, f, joint.base.max_index)
    oracle = omega_weight(joint.target.params, joint.base.params, image.B) * f(image.B)
    rows = []
    for m in _progress(levels, "rates"):
        coeffs = joint_coefficients(joint, 2.0**m, fhat)
        err = float(np.max(np.abs(joint.target.expand(coeffs, image.B) - oracle)))
        rows.append({"level": m, "n": 2.0**m, "error": err})
    return pd.DataFrame(rows)


def run_rates(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Convergence of sigma_{2^m}(joint; f) to Omega f on the image set B of
    A = B(theta0, 1/2), for f = |theta - theta0|^gamma.
    """
    levels = list(range(4, 4 + cfg.levels(6)))
    p1, p2 = cfg.target_params, cfg.base_params
    degree = joint_degree_for(2.0 ** levels[-1], p1, p2)
    joint = build_joint_jacobi(p1, p2, degree, cfg.grid_size, node_count=_rough_node_count(degree))
    image = image_set(joint, (cfg.theta0, 0.5), cfg.r, cfg.s)
    if image.is_empty:
        raise ParameterDomainError("r + s leaves an empty image set for A = B(theta0, 1/2)",
                                   parameter="r", value=cfg.r)
    frame = _rate_table(joint, _power_function(cfg.theta0, cfg.gamma), image, levels)
    fit = fit_slope(frame["level"], np.log2(frame["error"]))
    frame["fitted_slope"] = fit.slope
    lo, hi = -cfg.gamma - 0.25, -cfg.gamma + 0.15
    summary = _summary(
        cfg,
        "rate of approximation of the lifted function on the image set",
        joint=joint.label,
        fitted_slope=fit.slope,
        residual=fit.residual,
        expected_slope=-cfg.gamma,
        slope_range=[lo, hi],
        passed=bool(lo <= fit.slope <= hi),
    )
    return ExperimentResult("rates", frame, summary)


# -- smoothness ----------------------------------------------------------------------------

LIFT_RADIUS = 1.2


def _lifted_estimate(cfg: ExperimentConfig, f: Callable, levels: range):
    """
    Telescoped smoothness of bump * E(f) on the target space.

    E(f) comes from ``lift`` at a fixed level of the joint
    target <- base, with f known on A = B(theta0, LIFT_RADIUS) and its
    coefficients taken with the rule split at theta0. The bump lives inside
    the image set B; its transition starts well outside the ball the
    smoothness is measured on, so the coarse levels see E(f) and not the
    bump edge. The lift level keeps every target index used by the
    telescoped differences on the filter plateau.
    """
    p1, p2 = cfg.target_params, cfg.base_params
    top = 2.0 ** (levels[-1] + 1)
    # ell_{j,k} is about sqrt(2) j: n >= 2.5 sqrt(2) top keeps j <= 1.25 top on the plateau,
    # with a factor 2 of room for rounding the lift level down
    degree = joint_degree_for(5.0 * math.sqrt(2.0) * top, p1, p2)
    joint = build_joint_jacobi(p1, p2, degree, cfg.grid_size)
    lift_level = int(math.floor(math.log2(joint.spectrum_limit() / joint.cstar_plateau)))
    image = image_set(joint, (cfg.theta0, LIFT_RADIUS), cfg.r, cfg.s)
    if image.is_empty:
        raise ParameterDomainError(f"r + s leaves an empty image set for A = B(theta0, {LIFT_RADIUS})",
                                   parameter="r", value=cfg.r)
    lo, hi = image.interval("B")
    outer = 0.9 * min(cfg.theta0 - lo, hi - cfg.theta0)
    inner = outer / 2.0
    radius = min(0.2, inner / 2.0)
    bump = make_bump(joint.target, cfg.theta0, inner, outer)
    rule = joint.base.singular_rule(cfg.theta0, cfg.gamma)

    def lifted(pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        weight = bump(pts)
        out = np.zeros_like(pts)
        inside = weight > 0
        if np.any(inside):
            values = lift(joint, f, pts[inside], image, level=lift_level, rule=rule).values
            out[inside] = weight[inside] * values
        return out

    logger.info(f"Lifted smoothness on {joint.label} at lift level {lift_level}, bump radii {inner:.3f}/{outer:.3f}")
    return estimate_smoothness(joint.target, lifted, (cfg.theta0, radius), levels, method="telescoped")


def run_smoothness(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Local smoothness estimates near and away from the singularity of |theta - theta0|^gamma.

    Coefficients use the rule split at theta0, so quadrature error does not
    flatten the errors away from the singularity. The smooth ball sits near
    the boundary, where the even extension of f has a kink; its levels start
    where the kernels resolve that distance.
    """
    count = cfg.levels(6)
    last = 4 + count - 1
    smooth_levels = range(last - 2, last + 2)
    max_index = 2 ** smooth_levels[-1]
    space = make_trig_jacobi_space(cfg.base_params, max_index, cfg.grid_size, _rough_node_count(max_index))
    f = _power_function(cfg.theta0, cfg.gamma)
    rule = space.singular_rule(cfg.theta0, cfg.gamma)

    singular = estimate_smoothness(space, f, (cfg.theta0, 0.4), range(4, last + 1), rule=rule)
    far_center = 3.0 if abs(3.0 - cfg.theta0) >= 0.6 else 0.3
    smooth = estimate_smoothness(space, f, (far_center, 0.1), smooth_levels, rule=rule)
    lifted = _lifted_estimate(cfg, f, range(4, 4 + max(2, count - 1)))

    frames = []
    for case, est in (("singular", singular), ("smooth", smooth), ("lifted", lifted)):
        part = est.table.copy()
        part.insert(0, "case", case)
        frames.append(part)
    frame = pd.concat(frames, ignore_index=True)

    def within(est) -> bool:
        return est.gamma is not None and abs(est.gamma - cfg.gamma) <= 0.25

    smooth_ok = smooth.status == "unbounded" or (smooth.gamma is not None and smooth.gamma >= 2.0)
    summary = _summary(
        cfg,
        "local smoothness characterized by the degree of approximation",
        gamma_singular=singular.gamma,
        gamma_smooth=smooth.gamma if smooth.gamma is not None else "unbounded",
        status_smooth=smooth.status,
        smooth_center=far_center,
        gamma_lifted=lifted.gamma,
        passed=bool(within(singular) and smooth_ok and within(lifted)),
    )
    return ExperimentResult("smoothness", frame, summary)


# -- imageset ------------------------------------------------------------------------------

def _expected_interval(center: float, radius: float) -> tuple[float, float] | None:
    if radius < 0:
        return None
    return max(0.0, center - radius), min(math.pi, center + radius)


def run_imageset(cfg: ExperimentConfig) -> ExperimentResult:
    """Image set of A = B(theta0, r0) against the closed-form intervals."""
    p1, p2 = cfg.target_params, cfg.base_params
    joint = build_joint_jacobi(p1, p2, min(cfg.max_degree, 16), cfg.grid_size)
    result = image_set(joint, (cfg.theta0, cfg.r0), cfg.r, cfg.s)
    margin = cfg.r0 - cfg.r - cfg.s
    expected = {
        "B_minus": _expected_interval(cfg.theta0, margin),
        "B": _expected_interval(cfg.theta0, margin + cfg.s) if margin >= 0 else None,
    }
    rows = []
    ok = True
    for which in ("B_minus", "B"):
        got = result.interval(which)
        exp = expected[which]
        pts = len(result.B if which == "B" else result.B_minus)
        if got is None or exp is None:
            ok = ok and got is None and exp is None
            rows.append({"set": which, "lo": math.nan, "hi": math.nan, "expected_lo": math.nan,
                         "expected_hi": math.nan, "points": pts})
            continue
        # B_minus edges move by at most one grid step, B edges by two
        tol = (1 if which == "B_minus" else 2) * result.spacing + 1e-12
        ok = ok and abs(got[0] - exp[0]) <= tol and abs(got[1] - exp[1]) <= tol
        rows.append({"set": which, "lo": got[0], "hi": got[1], "expected_lo": exp[0],
                     "expected_hi": exp[1], "points": pts})
    frame = pd.DataFrame(rows)
    summary = _summary(
        cfg,
        "image set of a ball in the Jacobi joint space",
        grid_spacing=result.spacing,
        b_minus=list(result.interval("B_minus") or []),
        b=list(result.interval("B") or []),
        passed=bool(ok),
    )
    return ExperimentResult("imageset", frame, summary)


# -- diffusion -----------------------------------------------------------------------------

def run_diffusion(cfg: ExperimentConfig) -> ExperimentResult:
    """Diffusion distances between the two trigonometric spaces, with single-space cross-checks."""
    index = _heat_index(min(cfg.t_list))
    s1 = make_trig_jacobi_space(cfg.target_params, index, cfg.grid_size)
    s2 = make_trig_jacobi_space(cfg.base_params, index, cfg.grid_size)
    rows = []
    for t in cfg.t_list:
        dist = diffusion_distance(s1, s2, t, cfg.x, cfg.y)
        same = diffusion_distance(s1, s1, t, cfg.x, cfg.y)
        kxx = heat_kernel(s1, 2 * t, cfg.x, cfg.x, diagnostic=True).value
        kyy = heat_kernel(s1, 2 * t, cfg.y, cfg.y, diagnostic=True).value
        kxy = heat_kernel(s1, 2 * t, cfg.x, cfg.y, diagnostic=True).value
        classical = math.sqrt(max(kxx + kyy - 2 * kxy, 0.0))
        rows.append({
            "t": t,
            "distance": dist,
            "single_space_distance": same,
            "classical_distance": classical,
            "self_distance": diffusion_distance(s1, s1, t, cfg.x, cfg.x),
        })
    frame = pd.DataFrame(rows)
    classical_gap = float(np.max(np.abs(frame["single_space_distance"] - frame["classical_distance"])))
    summary = _summary(
        cfg,
        "diffusion distance between points of two spaces",
        min_distance=float(frame["distance"].min()),
        max_self_distance=float(frame["self_distance"].max()),
        classical_gap=classical_gap,
        passed=bool(frame["self_distance"].max() <= 1e-8 and classical_gap <= 1e-10),
    )
    return ExperimentResult("diffusion", frame, summary)


# -- selftest ------------------------------------------------------------------------------

def _row(check: str, value: float, threshold: float, passed: bool, comparison: str) -> dict:
    return {"check": check, "value": float(value), "threshold": float(threshold),
            "comparison": comparison, "passed": bool(passed)}


def _check_orthonormality(cfg: ExperimentConfig) -> list[dict]:
    worst = 0.0
    for params in ((-0.5, -0.5), (0.0, 0.0), (1.5, 1.5), (2.0, 1.0)):
        sub = ExperimentConfig("basis", alpha1=params[0], beta1=params[1], max_degree=256)
        worst = max(worst, run_basis(sub).summary["gram_deviation"])
    return [_row("orthonormality", worst, 1e-10, worst <= 1e-10, "<=")]


def _check_chebyshev(cfg: ExperimentConfig) -> list[dict]:
    space = make_trig_jacobi_space((-0.5, -0.5), 64, 4096)
    theta = space.grid
    table = space.eigenfunction_table(theta, 65)
    expected = np.vstack([np.ones_like(theta)] + [math.sqrt(2.0) * np.cos(n * theta) for n in range(1, 65)])
    err = float(np.max(np.abs(table - expected)))
    return [_row("chebyshev_closed_form", err, 1e-10, err <= 1e-10, "<=")]


def _check_projector(cfg: ExperimentConfig) -> list[dict]:
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for params in ((-0.5, -0.5), (1.5, 1.5)):
        space = make_trig_jacobi_space(params, 130, cfg.grid_size)
        count = space.count_below(64)
        coeffs = rng.standard_normal(count)
        poly = lambda th, c=coeffs, s=space: s.expand(c, th)
        approx = sigma(space, 128, poly)
        worst = max(worst, float(np.max(np.abs(approx.values - poly(space.grid)))))
    return [_row("projector_identity", worst, 1e-9, worst <= 1e-9, "<=")]


def _check_localization(cfg: ExperimentConfig) -> list[dict]:
    rows = []
    for label, sub in (
        ("localization_chebyshev", ExperimentConfig("localize", alpha1=-0.5, beta1=-0.5, kind="trig")),
        ("localization_trig_3_2", ExperimentConfig("localize", alpha1=1.5, beta1=1.5, kind="trig")),
        ("localization_ball_q2", ExperimentConfig("localize", kind="ball", q=2)),
        ("localization_joint", ExperimentConfig("localize", kind="joint")),
    ):
        slope = run_localize(sub).summary["fitted_slope"]
        rows.append(_row(label, slope, -3.0, slope <= -3.0, "<="))
    return rows


def _check_band(cfg: ExperimentConfig) -> list[dict]:
    violation = band_violation((1.5, 1.5), (-0.5, -0.5), 256)
    ident = connection_matrix((1.5, 1.5), (1.5, 1.5), 256).to_dense()
    ident_err = float(np.max(np.abs(ident - np.eye(257))))
    return [
        _row("connection_band", violation, 1e-10, violation <= 1e-10, "<="),
        _row("connection_identity", ident_err, 1e-10, ident_err <= 1e-10, "<="),
    ]


def _check_transplant(cfg: ExperimentConfig) -> list[dict]:
    p1, p2 = JacobiParams(1.5, 1.5), JacobiParams(-0.5, -0.5)
    joint = build_joint_jacobi(p1, p2, 200, cfg.grid_size)
    worst = 0.0
    for k in range(65):
        n = joint.cstar_plateau * (k + 3)
        phi = joint.base.eigenfunction(k)
        got = joint_sigma(joint, n, phi)
        want = omega_weight(p1, p2, joint.target.grid) * phi(joint.target.grid)
        worst = max(worst, float(np.max(np.abs(got.values - want))))

    image = image_set(joint, (math.pi / 2, 0.5), 1.0 / 16, 1.0 / 16)
    phi3 = joint.base.eigenfunction(3)
    lifted = lift(joint, phi3, image.B, image)
    want = omega_weight(p1, p2, image.B) * phi3(image.B)
    lift_err = float(np.max(np.abs(lifted.values - want)))
    return [
        _row("transplantation_oracle", worst, 1e-8, worst <= 1e-8, "<="),
        _row("lift_transplant", lift_err, 1e-7, lift_err <= 1e-7, "<="),
    ]


def _check_rates(cfg: ExperimentConfig) -> list[dict]:
    result = run_rates(ExperimentConfig("rates", grid_size=cfg.grid_size))
    slope = result.summary["fitted_slope"]
    return [_row("lift_rate_slope", slope, -0.5, -0.75 <= slope <= -0.35, "in [-0.75, -0.35]")]


def _check_imageset(cfg: ExperimentConfig) -> list[dict]:
    result = run_imageset(ExperimentConfig("imageset", theta0=math.pi / 2, r0=0.8, r=0.1, s=0.1,
                                           grid_size=cfg.grid_size))
    return [_row("image_set_intervals", result.summary["grid_spacing"], 0.0, result.passed, "within spacing")]


def _check_heat(cfg: ExperimentConfig) -> list[dict]:
    result = run_heat(ExperimentConfig("heat", alpha1=-0.5, beta1=-0.5, grid_size=cfg.grid_size))
    s = result.summary
    rows = [
        _row("heat_positivity", s["min_value"], -1e-10, s["min_value"] >= -1e-10, ">="),
        _row("heat_envelope_c2", s["min_c2"], 0.0, s["min_c2"] > 0, ">"),
        _row("heat_large_time", abs(s["large_time_value"] - 1.0), 1e-8,
             abs(s["large_time_value"] - 1.0) <= 1e-8, "<="),
    ]
    cheb = JacobiParams(-0.5, -0.5)
    joint = build_joint_jacobi(cheb, cheb, 128, cfg.grid_size)
    pts = np.linspace(0.0, math.pi, 64)
    got = joint_heat_kernel(joint, 0.05, pts, pts[::-1]).value
    tab = joint.target.eigenfunction_table(pts, 129)
    weights = np.exp(-2.0 * joint.target.eigenvalues**2 * 0.05)
    want = np.sum(weights[:, None] * tab * tab[:, ::-1], axis=0)
    gap = float(np.max(np.abs(got - want)))
    rows.append(_row("joint_heat_identity", gap, 1e-12, gap <= 1e-12, "<="))

    joint = build_joint_jacobi((1.5, 1.5), (-0.5, -0.5), 64, cfg.grid_size)
    for t in (0.02, 0.1):
        slope = fit_joint_envelope(joint, t).slope
        rows.append(_row(f"joint_envelope_t{t:g}", slope, 0.0, slope < 0, "<"))
    return rows


def _check_growth(cfg: ExperimentConfig) -> list[dict]:
    ns = [16 * 2**i for i in range(6)]
    p1, p2 = JacobiParams(1.5, 1.5), JacobiParams(-0.5, -0.5)
    joint = build_joint_jacobi(p1, p2, joint_degree_for(ns[-1], p1, p2), cfg.grid_size)
    var = [variation_statistic(joint, n) for n in ns]
    var_ratio = max(b / a for a, b in zip(var, var[1:]))

    space = make_trig_jacobi_space((-0.5, -0.5), ns[-1], cfg.grid_size)
    leb = [lebesgue_constant(space, n) for n in ns]
    leb_ratio = max(b / a for a, b in zip(leb, leb[1:]))
    return [
        _row("variation_doubling_ratio", var_ratio, 2.5, var_ratio <= 2.5, "<="),
        _row("lebesgue_doubling_ratio", leb_ratio, 1.25, leb_ratio <= 1.25, "<="),
    ]


def _check_smoothness(cfg: ExperimentConfig) -> list[dict]:
    result = run_smoothness(ExperimentConfig("smoothness", alpha2=-0.5, beta2=-0.5, grid_size=cfg.grid_size))
    s = result.summary
    g1 = s["gamma_singular"] if s["gamma_singular"] is not None else math.nan
    g3 = s["gamma_lifted"] if s["gamma_lifted"] is not None else math.nan
    g2 = math.inf if s["status_smooth"] == "unbounded" else float(s["gamma_smooth"])
    return [
        _row("smoothness_singular", g1, 0.5, 0.25 <= g1 <= 0.75, "in [0.25, 0.75]"),
        _row("smoothness_smooth", g2, 2.0, g2 >= 2.0, ">= or unbounded"),
        _row("smoothness_lifted", g3, 0.5, 0.25 <= g3 <= 0.75, "in [0.25, 0.75]"),
    ]


def _check_determinism(cfg: ExperimentConfig) -> list[dict]:
    sub = ExperimentConfig("localize", alpha1=-0.5, beta1=-0.5, n_levels=3, grid_size=cfg.grid_size)
    first = run_localize(sub).table.to_csv(index=False, float_format=Config.CSV_FLOAT_FORMAT)
    second = run_localize(sub).table.to_csv(index=False, float_format=Config.CSV_FLOAT_FORMAT)
    same = first == second
    return [_row("determinism", 0.0 if same else 1.0, 0.0, same, "identical")]


SELFTEST_CHECKS: tuple[Callable[[ExperimentConfig], list[dict]], ...] = (
    _check_orthonormality,
    _check_chebyshev,
    _check_projector,
    _check_localization,
    _check_band,
    _check_transplant,
    _check_rates,
    _check_imageset,
    _check_heat,
    _check_growth,
    _check_smoothness,
    _check_determinism,
)


def run_selftest(cfg: ExperimentConfig, checks=SELFTEST_CHECKS) -> ExperimentResult:
    """Run the acceptance checks; ``passed`` is False when any threshold fails."""
    rows: list[dict] = []
    for check in _progress(checks, "selftest"):
        logger.info(f"Running {check.__name__.removeprefix('_check_')}")
        rows.extend(check(cfg))
    frame = pd.DataFrame(rows, columns=["check", "value", "threshold", "comparison", "passed"])
    failed = frame.loc[~frame["passed"], "check"].tolist()
    summary = _summary(
        cfg,
        "acceptance suite over all diagnostics",
        checks=len(frame),
        failed=failed,
        passed=not failed,
    )
    return ExperimentResult("selftest", frame, summary)


RUNNERS: dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "basis": run_basis,
    "localize": run_localize,
    "heat": run_heat,
    "transplant": run_transplant,
    "rates": run_rates,
    "smoothness": run_smoothness,
    "imageset": run_imageset,
    "diffusion": run_diffusion,
    "selftest": run_selftest,
}


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Dispatch on ``cfg.subcommand`` and optionally write the artifacts."""
    result = RUNNERS[cfg.subcommand](cfg)
    if write:
        result.write(cfg.outdir)
    return result
