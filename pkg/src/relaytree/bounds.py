"""Closed-form bounds on the fusion-center error of a balanced relay tree.

Every bound is a two-sided estimate of ``log2(1/P)`` where ``P`` is the
root value of ``alpha + beta`` (twice the total error probability under
equal priors) for a tree with ``N = 2**h`` leaves.  Which formula applies
depends on where the initial pair sits in the region geometry and on the
parity of the height:

* initial pair in the invariant region, even height: scale ``sqrt(N)``;
* invariant region, odd height: scale between ``sqrt(N/2)`` and
  ``sqrt(2N)``, tightened when the trajectory is seen visiting the
  band-2 / invariant-region overlap;
* initial pair in band ``m >= 2``: scale ``N`` while the trajectory is
  still marching through the bands (height below the band index), and a
  ``sqrt(2**(m-1) * N)``-flavored scale afterwards, by parity of the gap.

``select_bounds`` encodes that dispatch; ``sandwich_check`` validates any
dispatched bound against the exact log-domain recursion.  The tail of the
module covers the asymptotic decay ratio, the minimum-sensor-count solver,
and scans with per-sensor quality degrading as the tree grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence

from .dynamics import (
    COMPARISON_TOL,
    DEFAULT_LEVEL_CAP,
    DomainError,
    ErrorPair,
    NotInTriangleError,
    Side,
    Trajectory,
    classify,
    evolve,
    fuse,
    total_error_log2,
)
from .logdomain import LOG2_ZERO

__all__ = [
    "TheoremId",
    "VisitParity",
    "BoundResult",
    "SandwichResult",
    "GrowthRow",
    "CrummySchedule",
    "CrummyRow",
    "CrummyScanResult",
    "NoConvergenceError",
    "DegenerateInputError",
    "bound_corollary1",
    "bound_theorem1",
    "bound_theorem2",
    "bound_theorem3",
    "bound_theorem4",
    "bound_corollary2_alpha",
    "bound_corollary2_beta",
    "detect_b2ru_visit",
    "select_bounds",
    "sandwich_check",
    "min_sensors_exact",
    "min_sensors_growth",
    "asymptotic_ratio",
    "crummy_scan",
]


class NoConvergenceError(DomainError):
    """Recursion did not reach the target within the level cap."""


class DegenerateInputError(DomainError):
    """Initial pair has zero total error; every bound is vacuous."""


class TheoremId(Enum):
    """Which closed-form bound produced a result."""

    COROLLARY_1 = "Corollary1"
    THEOREM_1 = "Theorem1"
    THEOREM_2 = "Theorem2"
    THEOREM_3_EVEN_VISIT = "Theorem3EvenVisit"
    THEOREM_3_ODD_VISIT = "Theorem3OddVisit"
    THEOREM_4_ODD_GAP = "Theorem4OddGap"
    THEOREM_4_EVEN_GAP = "Theorem4EvenGap"


class VisitParity(Enum):
    """Parity of the level at which the band-2 overlap visit happens."""

    EVEN = "Even"
    ODD = "Odd"


@dataclass(frozen=True)
class BoundResult:
    """Two-sided bound on ``log2(1/P)`` plus the inputs that produced it.

    ``lower`` is the raw formula value and may be negative (vacuous) for
    small trees; ``lower_clamped`` floors it at 0, which is always valid
    because ``P <= 1``.
    """

    lower: float
    upper: float
    theorem: TheoremId
    log2_l0: float
    leaves: int
    band: int | None = None

    @property
    def lower_clamped(self) -> float:
        return max(self.lower, 0.0)


def _height_of(leaves: int) -> int:
    if leaves < 1 or leaves & (leaves - 1):
        raise ValueError(f"leaf count must be a power of two, got {leaves}")
    return leaves.bit_length() - 1


def _check_rate(log2_l0_inv: float) -> None:
    if not (log2_l0_inv > 0.0) or math.isinf(log2_l0_inv):
        raise ValueError(
            f"log2 of inverse initial total error must be positive and finite,"
            f" got {log2_l0_inv!r}")


def bound_corollary1(log2_l0_inv: float, leaves: int) -> BoundResult:
    """Bounds with scale ``N``, valid while the height stays below the band
    index: ``N*(v - log2(N)/N) <= log2(1/P) <= N*v``."""
    _check_rate(log2_l0_inv)
    height = _height_of(leaves)
    lower = leaves * log2_l0_inv - height
    upper = leaves * log2_l0_inv
    return BoundResult(lower, upper, TheoremId.COROLLARY_1,
                       -log2_l0_inv, leaves)


def bound_theorem1(log2_l0_inv: float, leaves: int) -> BoundResult:
    """Invariant region, even height: scale ``sqrt(N)``."""
    _check_rate(log2_l0_inv)
    height = _height_of(leaves)
    if height % 2:
        raise ValueError(f"even-height bound needs even log2(N), got {height}")
    scale = 2.0 ** (height // 2)
    lower = scale * log2_l0_inv - height / 2
    upper = scale * log2_l0_inv
    return BoundResult(lower, upper, TheoremId.THEOREM_1, -log2_l0_inv, leaves)


def bound_theorem2(log2_l0_inv: float, leaves: int) -> BoundResult:
    """Invariant region, odd height: ``sqrt(N/2)`` below, ``sqrt(2N)`` above."""
    _check_rate(log2_l0_inv)
    height = _height_of(leaves)
    if height % 2 == 0:
        raise ValueError(f"odd-height bound needs odd log2(N), got {height}")
    scale_lo = 2.0 ** ((height - 1) // 2)
    scale_hi = 2.0 ** ((height + 1) // 2)
    lower = scale_lo * log2_l0_inv - (height - 1) // 2
    upper = scale_hi * log2_l0_inv
    return BoundResult(lower, upper, TheoremId.THEOREM_2, -log2_l0_inv, leaves)


def bound_theorem3(log2_l0_inv: float, leaves: int,
                   visit_parity: VisitParity) -> BoundResult:
    """Odd height refined by a band-2 / invariant-region overlap visit.

    An even-level visit tightens both sides to scale ``sqrt(2N)``; an
    odd-level visit keeps scale ``sqrt(N/2)`` with one extra halving step
    allowed on the upper side.
    """
    _check_rate(log2_l0_inv)
    height = _height_of(leaves)
    if height % 2 == 0:
        raise ValueError(f"odd-height bound needs odd log2(N), got {height}")
    if visit_parity is VisitParity.EVEN:
        scale = 2.0 ** ((height + 1) // 2)
        lower = scale * log2_l0_inv - (height + 1) // 2
        upper = scale * log2_l0_inv
        return BoundResult(lower, upper, TheoremId.THEOREM_3_EVEN_VISIT,
                           -log2_l0_inv, leaves)
    scale = 2.0 ** ((height - 1) // 2)
    lower = scale * log2_l0_inv - (height - 1) // 2
    upper = scale * log2_l0_inv + 1.0
    return BoundResult(lower, upper, TheoremId.THEOREM_3_ODD_VISIT,
                       -log2_l0_inv, leaves)


def bound_theorem4(log2_l0_inv: float, leaves: int, band: int) -> BoundResult:
    """General bounds for an initial pair in band ``m >= 2``.

    Height at most ``m - 1`` reduces to the ``N``-scale formula; beyond
    that the scale is ``sqrt(2**(m-1) * N)`` when the height/band gap is
    odd, and straddles ``sqrt(2**(m-2) * N)`` / ``sqrt(2**m * N)`` when
    even.
    """
    _check_rate(log2_l0_inv)
    height = _height_of(leaves)
    if band < 2:
        raise ValueError(f"band index must be at least 2, got {band}")
    if height <= band - 1:
        return replace(bound_corollary1(log2_l0_inv, leaves), band=band)
    gap = height - band
    if gap % 2:
        half = (band - 1 + height) // 2
        scale = 2.0 ** half
        lower = scale * log2_l0_inv - half
        upper = scale * log2_l0_inv
        return BoundResult(lower, upper, TheoremId.THEOREM_4_ODD_GAP,
                           -log2_l0_inv, leaves, band)
    half_lo = (band - 2 + height) // 2
    scale_lo = 2.0 ** half_lo
    lower = scale_lo * log2_l0_inv - half_lo
    upper = 2.0 ** ((band + height) // 2) * log2_l0_inv
    return BoundResult(lower, upper, TheoremId.THEOREM_4_EVEN_GAP,
                       -log2_l0_inv, leaves, band)


def _corollary2(log2_x0_inv: float, k: int) -> tuple[float, float]:
    _check_rate(log2_x0_inv)
    if k < 0 or k % 2:
        raise ValueError(f"level must be a non-negative even integer, got {k}")
    scale = 2.0 ** (k // 2)
    return scale * log2_x0_inv - k, scale * log2_x0_inv


def bound_corollary2_alpha(log2_alpha0_inv: float, k: int) -> tuple[float, float]:
    """Two-sided bound on ``log2(1/alpha_k)`` for even ``k``, valid when the
    initial pair lies in the inner invariant region (caller's precondition):
    ``2**(k/2) * (v - k/2**(k/2)) <= log2(1/alpha_k) <= 2**(k/2) * v``."""
    return _corollary2(log2_alpha0_inv, k)


def bound_corollary2_beta(log2_beta0_inv: float, k: int) -> tuple[float, float]:
    """Same formula shape for the Type II channel (the geometry is symmetric
    under reflection across the diagonal)."""
    return _corollary2(log2_beta0_inv, k)


def detect_b2ru_visit(trajectory: Trajectory) -> int | None:
    """Smallest level strictly before the last whose state (reflected to the
    upper triangle) lies in the band-2 / invariant-region overlap."""
    if not trajectory.states:
        raise ValueError("trajectory must be non-empty")
    for state in trajectory.states[:-1]:
        if state.tag.b_index == 2 and state.tag.in_r:
            return state.level
    return None


def select_bounds(pair0: ErrorPair, leaves: int) -> BoundResult:
    """Dispatch to the applicable bound for an initial pair and leaf count.

    Requires ``alpha0 + beta0 < 1`` strictly positive, and ``leaves`` a
    power of two, at least 2.  Dispatch:

    * invariant region, even height: even-height bound;
    * invariant region, odd height: overlap-visit bound when a visit is
      detected along the trajectory (the refined case is preferred),
      otherwise the generic odd-height bound;
    * band ``m >= 2``: the ``N``-scale bound while ``log2(N) < m``,
      otherwise the general band bound by gap parity.

    A band-1 pair outside the invariant region cannot occur (band 1 is a
    subset of the region); this is asserted, not silently repaired.
    """
    if leaves < 2:
        raise ValueError(f"leaf count must be at least 2, got {leaves}")
    height = _height_of(leaves)
    tag = classify(pair0)
    if tag.side is Side.DIAGONAL_SUM1:
        raise NotInTriangleError("bounds require alpha0 + beta0 < 1")
    log2_l0 = total_error_log2(pair0)
    if log2_l0 == LOG2_ZERO:
        raise DegenerateInputError(
            "initial pair has zero total error; bounds are degenerate")
    rate = -log2_l0
    if tag.in_r:
        if height % 2 == 0:
            return bound_theorem1(rate, leaves)
        visit = detect_b2ru_visit(evolve(pair0, height))
        if visit is None:
            return bound_theorem2(rate, leaves)
        parity = VisitParity.EVEN if visit % 2 == 0 else VisitParity.ODD
        return bound_theorem3(rate, leaves, parity)
    band = tag.b_index
    if band == 1:
        raise RuntimeError(
            "state in band 1 but outside the invariant region; "
            "the region geometry makes this unreachable")
    if height < band:
        return replace(bound_corollary1(rate, leaves), band=band)
    return bound_theorem4(rate, leaves, band)


@dataclass(frozen=True)
class SandwichResult:
    """Exact recursion value versus the dispatched bound."""

    exact: float
    bound: BoundResult
    ok: bool


def sandwich_check(pair0: ErrorPair, leaves: int) -> SandwichResult:
    """Validate the dispatched bound against the exact log-domain recursion."""
    bound = select_bounds(pair0, leaves)
    height = leaves.bit_length() - 1
    exact = -evolve(pair0, height).log2_l[-1]
    ok = bound.lower_clamped <= exact <= bound.upper
    return SandwichResult(exact, bound, ok)


def min_sensors_exact(pair0: ErrorPair, epsilon: float, *,
                      level_cap: int = DEFAULT_LEVEL_CAP) -> int:
    """Smallest power-of-two leaf count with root total error at most epsilon.

    Runs the exact recursion; the comparison carries the global log-domain
    tolerance so that an initial error exactly equal to epsilon counts as
    already sufficient.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    log2_l = total_error_log2(pair0)
    if log2_l >= -COMPARISON_TOL:
        raise NotInTriangleError("sensor-count search requires alpha + beta < 1")
    target = math.log2(epsilon)
    pair = pair0
    for height in range(level_cap + 1):
        if log2_l <= target + COMPARISON_TOL:
            return 1 << height
        pair = fuse(pair)
        log2_l = total_error_log2(pair)
    raise NoConvergenceError(
        f"target error {epsilon!r} not reached within {level_cap} levels")


@dataclass(frozen=True)
class GrowthRow:
    epsilon: float
    min_leaves: int
    ratio: float


def min_sensors_growth(pair0: ErrorPair,
                       epsilons: Sequence[float]) -> list[GrowthRow]:
    """Exact minimum leaf counts plus the ``N / (log2 eps)**2`` ratios.

    The ratio sequence staying inside a fixed band is what pins the
    quadratic-in-``log epsilon`` growth of the required sensor count.
    """
    eps = list(epsilons)
    if not eps:
        raise ValueError("need at least one epsilon")
    for e in eps:
        if not 0.0 < e < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {e!r}")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilons must be strictly decreasing")
    rows = []
    for e in eps:
        n = min_sensors_exact(pair0, e)
        rows.append(GrowthRow(e, n, n / math.log2(e) ** 2))
    return rows


def asymptotic_ratio(pair0: ErrorPair, leaves: int) -> float:
    """``log2(1/P)`` relative to its leading term ``sqrt(N) * log2(1/L0)``.

    Requires the initial pair in the invariant region and an even height.
    The value lies in ``(0, 1]`` and approaches 1, at rate
    ``1 - log2(sqrt(N)) / (log2(1/L0) * sqrt(N))`` or better.
    """
    height = _height_of(leaves)
    if height % 2:
        raise ValueError(f"asymptotic ratio needs even log2(N), got {height}")
    tag = classify(pair0)
    if tag.side is Side.DIAGONAL_SUM1 or not tag.in_r:
        raise DomainError("initial pair must lie in the invariant region")
    log2_l0 = total_error_log2(pair0)
    if log2_l0 == LOG2_ZERO:
        raise DegenerateInputError("initial pair has zero total error")
    exact = -evolve(pair0, height).log2_l[-1]
    return exact / (2.0 ** (height / 2) * -log2_l0)


class CrummySchedule(Enum):
    """How fast the per-sensor quality margin shrinks with the tree size."""

    INV_SQRT = "inv-sqrt"                # eta = c / sqrt(N): bounded error
    INV_FOURTH_ROOT = "inv-fourth-root"  # eta = c / N**(1/4): error -> 0
    INV_LINEAR = "inv-linear"            # eta = c / N: error -> 1

    def eta(self, c: float, leaves: int) -> float:
        if self is CrummySchedule.INV_SQRT:
            return c / math.sqrt(leaves)
        if self is CrummySchedule.INV_FOURTH_ROOT:
            return c * leaves ** -0.25
        return c / leaves


@dataclass(frozen=True)
class CrummyRow:
    leaves: int
    eta: float
    log2_pn: float


@dataclass(frozen=True)
class CrummyScanResult:
    rows: tuple[CrummyRow, ...]


def crummy_scan(c: float, heights: Iterable[int], split: float = 0.5,
                schedule: CrummySchedule = CrummySchedule.INV_SQRT) -> CrummyScanResult:
    """Exact root error for sensors whose quality degrades with tree size.

    For each even height ``h`` the per-sensor total error is
    ``1 - eta(c, 2**h)`` with the given schedule, split between the two
    error types by ``split``.  Rejects any height at which the margin would
    fail to be a probability (equivalently, the smallest tree, since the
    margin shrinks with size).
    """
    if c <= 0.0 or math.isinf(c) or c != c:
        raise ValueError(f"margin coefficient must be positive, got {c!r}")
    if not 0.0 < split < 1.0:
        raise ValueError(f"split must lie in (0, 1), got {split!r}")
    hs = list(heights)
    if not hs:
        raise ValueError("need at least one height")
    for h in hs:
        if h < 2 or h % 2:
            raise ValueError(f"heights must be positive even integers, got {h}")
    rows = []
    for h in hs:
        leaves = 1 << h
        eta = schedule.eta(c, leaves)
        if eta >= 1.0:
            raise ValueError(
                f"margin {eta!r} at {leaves} leaves is not below 1;"
                " increase the smallest height or decrease c")
        l0 = 1.0 - eta
        pair = ErrorPair.from_probabilities(split * l0, (1.0 - split) * l0)
        rows.append(CrummyRow(leaves, eta, evolve(pair, h).log2_l[-1]))
    return CrummyScanResult(tuple(rows))
