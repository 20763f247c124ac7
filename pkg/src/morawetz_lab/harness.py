"""Experiments probing weighted space-time estimates for the wave propagators.

The measured quantity is always a ratio

    R = || u ||_{L^2_{x,t}(w)}  /  ( ||f||_{Hdot^s} + ||g||_{Hdot^{s-1}} )

for solutions u with data (f, g), either the elastic system or the scalar
half-wave propagator.  Because the admissible-index statements are suprema
over all data, every scan reports measured lower bounds and growth exponents;
results are "measured" and "consistent with", never certificates.

Exact dilation covariance: rescaling data as ``f_l(x) = f(l x)``,
``g_l(x) = l g(l x)`` on a fixed grid reproduces, identically in floating
point, the same computation on the dilated grid, so fitted ratio exponents
equal ``(alpha - 1 - 2 s)/2`` up to the grid-convergence drift of the base
ratio.  The same mechanism forces the rescaled-probe frequency scan to the
slope ``(alpha - 1)/2``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .analysis import hs_norm, lp_project
from .elastic import ElasticPropagator, ElasticState, LameParams
from .errors import ConfigurationError, DomainError
from .spectral import GridSpec, VectorField, forward_values, inverse_values
from .weights import (
    SPACETIME_POWER,
    SPATIAL_POWER,
    QuadratureConfig,
    WeightSpec,
    weighted_spacetime_norm,
)

__all__ = [
    "Region",
    "RegionQuery",
    "classify_region",
    "DataFamily",
    "Member",
    "RatioRecord",
    "compute_ratio",
    "ScaleCovariance",
    "scale_covariance_test",
    "FrequencyScan",
    "frequency_constant_scan",
    "DecompositionCheck",
    "decomposition_check",
    "time_sampling_drift",
    "worker_count",
]

_SEGMENT_TOL = 1e-12


class Region:
    ON_THEOREM1_SEGMENT = "OnTheorem1Segment"
    IN_THEOREM2_TRIANGLE = "InTheorem2Triangle"
    OUTSIDE = "Outside"


@dataclass(frozen=True)
class RegionQuery:
    """A point (alpha, s) with its dimension and weight kind."""

    alpha: float
    s: float
    n: int
    weight_kind: str = SPATIAL_POWER


def classify_region(q: RegionQuery) -> str:
    """Pure predicate evaluation of the admissible-index regions.

    Spatial weights are classified against the segment ``alpha = 1 + 2s``
    with ``0 < s < (n-1)/2``; space-time weights against the open triangle
    ``1/2 < s < (n+1)/4``, ``1 + 2s < alpha < 4s``.
    """
    if q.weight_kind == SPATIAL_POWER:
        if 0.0 < q.s < (q.n - 1) / 2.0 and abs(q.alpha - (1.0 + 2.0 * q.s)) < _SEGMENT_TOL:
            return Region.ON_THEOREM1_SEGMENT
        return Region.OUTSIDE
    if q.weight_kind == SPACETIME_POWER:
        if 0.5 < q.s < (q.n + 1) / 4.0 and 1.0 + 2.0 * q.s < q.alpha < 4.0 * q.s:
            return Region.IN_THEOREM2_TRIANGLE
        return Region.OUTSIDE
    raise DomainError(f"cannot classify weight kind {q.weight_kind!r}")


# -- probe data ----------------------------------------------------------------

GAUSSIAN = "gaussian"
MODULATED = "modulated"


@dataclass(frozen=True)
class Member:
    """One concrete data realization: scalar samples or an elastic state."""

    member_id: str
    f: object  # ndarray (scalar mode) or VectorField
    g: object | None
    support_radius: float
    scalar: bool


@dataclass(frozen=True)
class DataFamily:
    """Deterministic probe-data recipe; members are exact dilations of the base.

    ``kind`` is ``gaussian`` (radial envelope) or ``modulated`` (envelope times
    a plane-wave carrier).  If ``level`` is set, modulated members are
    band-localized by a dyadic projection at ``level + log2(lambda)``, so a
    rescaled member stays an exact dilation of the base probe.  ``g_policy``
    is ``zero`` or ``matched`` (velocity that turns each mode into a single
    outgoing half-wave).  Scalar members carry plain samples; vector members
    put the profile into one displacement component.
    """

    kind: str = GAUSSIAN
    width: float = 1.0
    carrier: float = 0.0
    carrier_axis: int = 0
    level: int | None = None
    g_policy: str = "zero"
    scalar: bool = True
    component: int = 0

    def __post_init__(self) -> None:
        if self.kind not in (GAUSSIAN, MODULATED):
            raise ConfigurationError(f"unknown family kind {self.kind!r}")
        if self.g_policy not in ("zero", "matched"):
            raise ConfigurationError(f"unknown g policy {self.g_policy!r}")
        if not self.width > 0:
            raise ConfigurationError("family width must be positive")
        if self.kind == MODULATED and not self.carrier > 0:
            raise ConfigurationError("modulated family needs a positive carrier")

    def member(self, grid: GridSpec, lam: float = 1.0, propagation=1.0) -> Member:
        """Materialize the member f_lam(x) = f(lam x) (velocity g scaled by lam)."""
        if not lam > 0:
            raise ConfigurationError("lambda must be positive")
        width = self.width / lam
        profile = np.exp(-(grid.x_norm() ** 2) / (2.0 * width**2)).astype(np.complex128)
        if self.kind == MODULATED:
            carrier = self.carrier * lam
            profile = profile * np.exp(1j * carrier * grid.x_grids()[self.carrier_axis])
        if self.level is not None:
            shift = math.log2(lam)
            if abs(shift - round(shift)) > 1e-12:
                raise ConfigurationError(
                    "band-localized members require power-of-two lambda"
                )
            profile = lp_project(profile, self.level + int(round(shift)), grid)
        member_id = f"{self.kind}-w{self.width}-lam{lam}"
        support = 5.0 * width  # envelope below ~4e-6 outside (1.4e-11 in energy)

        if self.scalar:
            g = None
            if self.g_policy == "matched":
                g = _matched_velocity_scalar(profile, grid, float(propagation))
            return Member(member_id, profile, g, support, True)

        values = np.zeros((grid.dim,) + grid.shape, dtype=np.complex128)
        values[self.component] = profile
        fvec = VectorField(grid, values)
        if self.g_policy == "matched":
            if not isinstance(propagation, LameParams):
                raise ConfigurationError("matched elastic velocity needs LameParams")
            gvec = _matched_velocity_elastic(fvec, propagation)
        else:
            gvec = VectorField(grid, np.zeros_like(values))
        return Member(member_id, fvec, gvec, support, False)


def _matched_velocity_scalar(profile: np.ndarray, grid: GridSpec, speed: float) -> np.ndarray:
    F = forward_values(profile, grid)
    return inverse_values(1j * speed * grid.xi_norm() * F, grid)


def _matched_velocity_elastic(f: VectorField, params: LameParams) -> VectorField:
    from .elastic import _split_spectrum  # spectral Helmholtz split

    grid = f.grid
    F = forward_values(f.values, grid)
    pot, sol = _split_spectrum(F, grid)
    xin = grid.xi_norm()
    G = 1j * xin * (params.shear_speed * sol + params.pressure_speed * pot)
    return VectorField(grid, inverse_values(G, grid))


# -- ratio measurement -----------------------------------------------------------


@dataclass(frozen=True)
class RatioRecord:
    """One measured Morawetz ratio with full grid provenance."""

    query: RegionQuery
    member_id: str
    lam: float
    numerator: float
    denominator: float
    ratio: float
    margin: float
    grid: GridSpec
    tolerance: float
    refinement: int


def _max_speed(propagation) -> float:
    if isinstance(propagation, LameParams):
        return propagation.max_speed
    speed = float(propagation)
    if not speed > 0:
        raise DomainError(f"wave speed must be positive, got {speed}")
    return speed


def _scalar_halfwave_sampler(profile: np.ndarray, grid: GridSpec, speed: float):
    F = forward_values(profile, grid)
    xin = grid.xi_norm()

    def sample(t: float) -> np.ndarray:
        return inverse_values(np.exp(1j * t * speed * xin) * F, grid)

    return sample


def compute_ratio(
    member: Member,
    query: RegionQuery,
    propagation,
    grid: GridSpec,
    quad: QuadratureConfig | None = None,
    lam: float = 1.0,
) -> RatioRecord:
    """Measure the weighted-norm-to-data-norm ratio for one member.

    ``propagation`` is a wave speed (scalar half-wave mode) or LameParams
    (elastic mode).  Scalar mode evolves f by the half-wave propagator and
    rejects members with velocity data; elastic mode evolves the full state.
    """
    quad = quad or QuadratureConfig()
    weight = WeightSpec(kind=query.weight_kind, alpha=query.alpha)
    weight.validate_for(grid)
    margin = grid.wraparound_margin(member.support_radius, _max_speed(propagation))
    if margin <= 0:
        raise ConfigurationError(
            f"member {member.member_id!r} violates the wrap-around margin "
            f"({margin:.3f} <= 0); enlarge the box or shrink the window"
        )

    if member.scalar:
        if isinstance(propagation, LameParams):
            raise ConfigurationError("scalar members need a wave speed, not LameParams")
        if member.g is not None:
            raise ConfigurationError(
                "scalar mode uses the half-wave propagator e^{itc sqrt(-Lap)}: "
                "velocity data is not part of that reduction"
            )
        sampler = _scalar_halfwave_sampler(member.f, grid, float(propagation))
        denominator = hs_norm(member.f, query.s, grid)
    else:
        if not isinstance(propagation, LameParams):
            raise ConfigurationError("vector members need LameParams")
        state = ElasticState(member.f, member.g)
        prop = ElasticPropagator(state, propagation)
        sampler = prop.displacement
        denominator = hs_norm(member.f, query.s) + hs_norm(member.g, query.s - 1.0)

    if not denominator > 0:
        raise ConfigurationError("zero initial data: the ratio is undefined")

    numerator = weighted_spacetime_norm(sampler, weight, grid, quad)
    return RatioRecord(
        query=query,
        member_id=member.member_id,
        lam=lam,
        numerator=numerator,
        denominator=denominator,
        ratio=numerator / denominator,
        margin=margin,
        grid=grid,
        tolerance=quad.tolerance,
        refinement=quad.singular_cell_refinement,
    )


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares slope, intercept, and the slope's standard error."""
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = max(len(x) - 2, 1)
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = float(np.sqrt(np.sum(resid**2) / dof / sxx)) if sxx > 0 else float("nan")
    return float(slope), float(intercept), stderr


def worker_count() -> int:
    """Worker cap from MORAWETZ_LAB_THREADS (default 1)."""
    raw = os.environ.get("MORAWETZ_LAB_THREADS", "1")
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"MORAWETZ_LAB_THREADS must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigurationError("MORAWETZ_LAB_THREADS must be >= 1")
    return value


def _map_ordered(fn: Callable, items: Sequence) -> list:
    """Apply fn preserving input order; parallel when the worker cap allows."""
    workers = worker_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class ScaleCovariance:
    """Fitted dilation exponent of the ratio over a rescaled family."""

    records: tuple[RatioRecord, ...]
    dropped: tuple[tuple[float, float], ...]  # (lambda, margin) pairs
    slope: float
    intercept: float
    stderr: float
    target: float


def scale_covariance_test(
    family: DataFamily,
    query: RegionQuery,
    grid: GridSpec,
    lambdas: Sequence[float] = (0.5, 1.0, 2.0),
    propagation=1.0,
    quad: QuadratureConfig | None = None,
) -> ScaleCovariance:
    """Fit log2 R(f_lambda) against log2 lambda; analytic target (alpha-1-2s)/2.

    Members that violate the wrap-around margin are dropped and reported, not
    silently computed.  Fewer than two surviving members is a configuration
    error (degenerate fit).
    """
    quad = quad or QuadratureConfig()
    max_speed = _max_speed(propagation)
    kept: list[float] = []
    dropped: list[tuple[float, float]] = []
    for lam in lambdas:
        member = family.member(grid, lam=lam, propagation=propagation)
        margin = grid.wraparound_margin(member.support_radius, max_speed)
        if margin <= 0:
            dropped.append((float(lam), float(margin)))
        else:
            kept.append(float(lam))
    if len(set(kept)) < 2:
        raise ConfigurationError(
            f"scale covariance needs at least two distinct admissible lambdas; "
            f"kept {kept}, dropped {dropped}"
        )

    def run(lam: float) -> RatioRecord:
        member = family.member(grid, lam=lam, propagation=propagation)
        return compute_ratio(member, query, propagation, grid, quad, lam=lam)

    records = _map_ordered(run, kept)
    x = np.log2(np.array([r.lam for r in records]))
    y = np.log2(np.array([r.ratio for r in records]))
    slope, intercept, stderr = _linear_fit(x, y)
    target = (query.alpha - 1.0 - 2.0 * query.s) / 2.0
    return ScaleCovariance(
        records=tuple(records),
        dropped=tuple(dropped),
        slope=slope,
        intercept=intercept,
        stderr=stderr,
        target=target,
    )


@dataclass(frozen=True)
class FrequencyScan:
    """Frequency-localized constants C_k and their fitted growth exponent.

    ``constants[k]`` is a measured lower bound on the operator constant at
    dyadic level k.  ``dilation_target`` is the exponent (alpha-1)/2 forced by
    exact dilation covariance for the rescaled-probe family;
    ``reference_exponent`` is the frequency-growth exponent s associated with
    the (alpha, s) query (printed alongside, never asserted).
    """

    levels: tuple[int, ...]
    constants: tuple[float, ...]
    per_probe: tuple[tuple[float, ...], ...]
    slope: float
    stderr: float
    dilation_target: float
    reference_exponent: float
    implied_p: float | None
    lemma_range_ok: bool | None


def frequency_constant_scan(
    levels: Sequence[int],
    query: RegionQuery,
    grid: GridSpec,
    probes: Sequence[DataFamily] | None = None,
    quad: QuadratureConfig | None = None,
    speed: float = 1.0,
) -> FrequencyScan:
    """Scan max_{probes} ||half_wave(p)||_w / ||p||_{L2} over dyadic levels.

    Probes default to two band-localized modulated Gaussians whose level-k
    members are exact dilations of the level-0 ones.  The weight is the
    space-time power |(x,t)|^{-alpha} (alpha = 0 degenerates to the plain
    time-slab L2 norm, where unitarity makes the constants flat in k).
    """
    quad = quad or QuadratureConfig()
    levels = tuple(int(k) for k in levels)
    if probes is None:
        probes = (
            DataFamily(kind=MODULATED, width=2.0, carrier=1.0, level=0),
            DataFamily(kind=MODULATED, width=2.0, carrier=1.25, level=0),
        )
    if not probes:
        raise ConfigurationError("frequency scan needs at least one probe family")
    if not levels:
        raise ConfigurationError("frequency scan needs at least one level")
    weight = WeightSpec(kind=SPACETIME_POWER, alpha=query.alpha)
    weight.validate_for(grid)
    measure = grid.dx**grid.dim

    def constant_for(level: int) -> tuple[float, ...]:
        vals = []
        for fam in probes:
            member = fam.member(grid, lam=2.0**level, propagation=speed)
            p = member.f
            l2 = float(np.sqrt(measure * np.sum(np.abs(p) ** 2)))
            if l2 == 0.0:
                raise ConfigurationError("probe collapsed to zero after band projection")
            sampler = _scalar_halfwave_sampler(p, grid, speed)
            num = weighted_spacetime_norm(sampler, weight, grid, quad)
            vals.append(num / l2)
        return tuple(vals)

    per_probe = tuple(_map_ordered(constant_for, levels))
    constants = tuple(max(v) for v in per_probe)
    x = np.asarray(levels, dtype=float)
    y = np.log2(np.asarray(constants))
    slope, _, stderr = _linear_fit(x, y)

    s = query.s
    implied_p = (query.n + 1) / (4.0 * s) if s > 0 else None
    lemma_ok = None
    if implied_p is not None:
        lemma_ok = bool(
            1.0 < implied_p < (query.n + 1) / 2.0
            and 1.0 + (query.n + 1) / (2.0 * implied_p) < query.alpha < (query.n + 1) / implied_p
        )
    return FrequencyScan(
        levels=levels,
        constants=constants,
        per_probe=per_probe,
        slope=slope,
        stderr=stderr,
        dilation_target=(query.alpha - 1.0) / 2.0,
        reference_exponent=s,
        implied_p=implied_p,
        lemma_range_ok=lemma_ok,
    )


@dataclass(frozen=True)
class ExperimentReport:
    """Bundle of one experiment's records, fits, and provenance.

    ``fitted`` maps exponent names to (value, ci_halfwidth) with the 95%
    half-width 1.96 * stderr; ``classification`` is the region label of the
    query; ``config`` echoes the resolved experiment configuration;
    ``diagnostics`` carries refinement/margin information.
    """

    records: tuple[RatioRecord, ...]
    fitted: dict
    classification: str
    config: dict
    diagnostics: dict


def scale_covariance_report(
    result: ScaleCovariance, query: RegionQuery, grid: GridSpec, config: dict | None = None
) -> ExperimentReport:
    ci = 1.96 * result.stderr if np.isfinite(result.stderr) else float("nan")
    margins = [r.margin for r in result.records]
    return ExperimentReport(
        records=result.records,
        fitted={"dilation_exponent": (result.slope, ci), "analytic_target": (result.target, 0.0)},
        classification=classify_region(query),
        config=dict(config or {}, alpha=query.alpha, s=query.s, n=query.n,
                    weight_kind=query.weight_kind),
        diagnostics={
            "margin_min": min(margins) if margins else float("nan"),
            "dropped": list(result.dropped),
            "refinement": result.records[0].refinement if result.records else None,
            "tolerance": result.records[0].tolerance if result.records else None,
        },
    )


@dataclass(frozen=True)
class DecompositionCheck:
    """Solenoidal/potential split diagnostics for one elastic state."""

    hs_pythagoras_gap: float  # | |f_P|_s^2 + |f_S|_s^2 - |f|_s^2 | / |f|_s^2
    triangle_slack: float  # |u_Q|_w + |u_P|_w - |u|_w  (>= 0 up to round-off)
    ratio_solenoidal: float
    ratio_potential: float


def decomposition_check(
    state: ElasticState,
    params: LameParams,
    query: RegionQuery,
    grid: GridSpec,
    quad: QuadratureConfig | None = None,
) -> DecompositionCheck:
    """Verify the orthogonal-split norm identity and the weighted triangle bound."""
    from .elastic import helmholtz_split

    quad = quad or QuadratureConfig()
    weight = WeightSpec(kind=query.weight_kind, alpha=query.alpha)
    weight.validate_for(grid)
    s = query.s

    f_P, f_S = helmholtz_split(state.f)
    g_P, g_S = helmholtz_split(state.g)
    total_sq = hs_norm(state.f, s) ** 2
    gap = abs(hs_norm(f_P, s) ** 2 + hs_norm(f_S, s) ** 2 - total_sq) / total_sq

    full = ElasticPropagator(state, params).displacement
    sol = ElasticPropagator(ElasticState(f_S, g_S), params).displacement
    pot = ElasticPropagator(ElasticState(f_P, g_P), params).displacement
    n_full = weighted_spacetime_norm(full, weight, grid, quad)
    n_sol = weighted_spacetime_norm(sol, weight, grid, quad)
    n_pot = weighted_spacetime_norm(pot, weight, grid, quad)

    den = hs_norm(state.f, s) + hs_norm(state.g, s - 1.0)
    return DecompositionCheck(
        hs_pythagoras_gap=float(gap),
        triangle_slack=float(n_sol + n_pot - n_full),
        ratio_solenoidal=float(n_sol / den),
        ratio_potential=float(n_pot / den),
    )


def time_sampling_drift(
    sampler_factory: Callable[[GridSpec], Callable[[float], object]],
    weight: WeightSpec,
    grid: GridSpec,
    quad: QuadratureConfig | None = None,
) -> float:
    """Relative change of the weighted norm when the time sampling is halved.

    Diagnostic for the trapezoid resolution: experiments aim for < 0.5%.
    """
    quad = quad or QuadratureConfig()
    if (grid.time_samples - 1) % 2 != 0:
        raise ConfigurationError("time_samples - 1 must be even to halve the sampling")
    coarse_grid = replace(grid, time_samples=(grid.time_samples - 1) // 2 + 1)
    fine = weighted_spacetime_norm(sampler_factory(grid), weight, grid, quad)
    coarse = weighted_spacetime_norm(sampler_factory(coarse_grid), weight, coarse_grid, quad)
    return abs(fine - coarse) / fine
