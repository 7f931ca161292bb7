"""Error-probability dynamics of a balanced binary relay tree.

The state of the system is the pair ``(alpha, beta)`` of Type I / Type II
error probabilities shared by every node at one tree level.  Fusing the two
child messages at a node applies one step of the map

    (alpha, beta)  ->  (1-(1-alpha)^2, beta^2)        when alpha <= beta
                       (alpha^2, 1-(1-beta)^2)        when alpha >  beta

which is the optimal two-input binary fusion rule (OR below the diagonal's
reflection, AND above).  Iterating the map is a discrete dynamical system on
the unit square; this module evolves it exactly in the log domain and
classifies states into the band / invariant-region geometry that governs how
fast the total error shrinks.

Region vocabulary used throughout (all inside the open triangle
``alpha + beta < 1``, described for the upper half ``beta >= alpha``; every
predicate first reflects the pair across ``beta = alpha``):

* band ``m``: ``(1-a)^(2^m) + b^(2^m) <= 1 <= (1-a)^(2^(m-1)) + b^(2^(m-1))``.
  A state in band ``m`` needs exactly ``m-1`` fusion steps before it first
  crosses the diagonal; bands descend one per step.
* invariant region (``in_r``): ``sqrt(1-b) + sqrt(a) >= 1``.  Once entered,
  never left.
* inner invariant region (``in_s``): ``b <= sqrt(a)`` and
  ``b >= 1-(1-a)^2``.  A sub-region of band 1, also invariant, inside which
  alpha and beta admit individual two-step squaring bounds.

Boundary policy: every closed inequality is evaluated in the log domain with
the symmetric tolerance ``2**-44``; points within tolerance of a boundary
count as inside the closed region.  Adjacent bands therefore overlap within
tolerance, and the band index is the smallest qualifying ``m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .logdomain import LOG2_ZERO, ExtendedProb, log2_add

__all__ = [
    "COMPARISON_TOL",
    "DEFAULT_BAND_CAP",
    "DEFAULT_LEVEL_CAP",
    "DomainError",
    "NotInTriangleError",
    "IndexOverflowError",
    "NoEntryError",
    "ErrorPair",
    "Side",
    "RegionTag",
    "RegionTarget",
    "TrajectoryState",
    "Trajectory",
    "fuse",
    "fuse_oracle",
    "oracle_prefers_or",
    "invert_or_step",
    "total_error_log2",
    "classify",
    "b_index",
    "evolve",
    "entry_level",
]

#: Symmetric log-domain tolerance for all closed-inequality comparisons.
COMPARISON_TOL = 2.0 ** -44

#: Band indices beyond this are indistinguishable from the boundary at
#: double precision (the smallest positive subnormal is 2**-1074).
DEFAULT_BAND_CAP = 1074

#: Level cap for searches along a trajectory.
DEFAULT_LEVEL_CAP = 10_000


class DomainError(ValueError):
    """A domain precondition on the error pair is not met."""


class NotInTriangleError(DomainError):
    """Operation requires ``alpha + beta < 1``."""


class IndexOverflowError(DomainError):
    """Band index would exceed the configured cap."""


class NoEntryError(DomainError):
    """Trajectory did not reach the target region within the level cap."""


class ErrorPair:
    """Type I / Type II error probabilities of one tree level."""

    __slots__ = ("alpha", "beta")

    def __init__(self, alpha: ExtendedProb, beta: ExtendedProb):
        self.alpha = alpha
        self.beta = beta

    @classmethod
    def from_probabilities(cls, alpha: float, beta: float) -> "ErrorPair":
        """Build from plain probabilities; rejects values outside [0, 1]."""
        return cls(ExtendedProb.from_probability(alpha),
                   ExtendedProb.from_probability(beta))

    def swapped(self) -> "ErrorPair":
        """Reflection across the diagonal ``beta = alpha``."""
        return ErrorPair(self.beta, self.alpha)

    def complemented(self) -> "ErrorPair":
        """The pair ``(1-alpha, 1-beta)`` (point reflection through 1/2)."""
        return ErrorPair(self.alpha.swapped(), self.beta.swapped())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ErrorPair):
            return NotImplemented
        return self.alpha == other.alpha and self.beta == other.beta

    def __hash__(self) -> int:
        return hash((self.alpha, self.beta))

    def __repr__(self) -> str:
        return (f"ErrorPair(alpha={self.alpha.probability!r},"
                f" beta={self.beta.probability!r})")


class Side(Enum):
    """Position relative to the line ``alpha + beta = 1``.

    ``DIAGONAL_SUM1`` tags everything on or beyond the line (the analysis
    regions live strictly inside the open triangle).
    """

    UPPER_TRIANGLE = "UpperTriangle"
    LOWER_TRIANGLE = "LowerTriangle"
    DIAGONAL_SUM1 = "DiagonalSum1"


@dataclass(frozen=True)
class RegionTag:
    """Full region classification of one state."""

    side: Side
    b_index: int | None
    in_r: bool
    in_s: bool
    above_diagonal: bool


class RegionTarget(Enum):
    """Region predicates accepted by :func:`entry_level`."""

    B1 = "B1"
    R = "R"
    S = "S"


@dataclass(frozen=True)
class TrajectoryState:
    level: int
    pair: ErrorPair
    tag: RegionTag


@dataclass(frozen=True)
class Trajectory:
    """A fused trajectory with per-level classification and log2 total error."""

    states: tuple[TrajectoryState, ...]
    log2_l: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.states)


def fuse(pair: ErrorPair) -> ErrorPair:
    """One fusion step, entirely in the log domain.

    Total on valid pairs.  On the diagonal ``alpha == beta`` the OR branch
    applies.  Squaring doubles the relevant log channel exactly; the other
    channel is then derived from it, so the pair stays consistent.
    """
    if pair.alpha <= pair.beta:
        return ErrorPair(pair.alpha.complement_squared(), pair.beta.squared())
    return ErrorPair(pair.alpha.squared(), pair.beta.complement_squared())


def _rule_error_pairs(a: float, b: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """Error pairs of the OR and AND rules by exhaustive enumeration.

    Enumerates the four joint outcomes of two independent child messages
    under each hypothesis, in plain floating point.  This is deliberately
    independent of the log-domain branch arithmetic so the two can be
    checked against each other.
    """
    # P(message | hypothesis): index by message value.
    msg_h0 = (1.0 - a, a)  # child decides 1 with probability alpha under H0
    msg_h1 = (b, 1.0 - b)  # child decides 0 with probability beta under H1
    results = []
    for rule_is_or in (True, False):
        alpha_r = 0.0
        beta_r = 0.0
        for m1 in (0, 1):
            for m2 in (0, 1):
                out = (m1 | m2) if rule_is_or else (m1 & m2)
                if out == 1:
                    alpha_r += msg_h0[m1] * msg_h0[m2]
                else:
                    beta_r += msg_h1[m1] * msg_h1[m2]
        results.append((alpha_r, beta_r))
    return results[0], results[1]


def fuse_oracle(pair: ErrorPair) -> ErrorPair:
    """Independent enumeration oracle for :func:`fuse`.

    Evaluates both candidate rules and returns the one with the smaller
    total error; ties go to OR.  Requires ``alpha + beta < 1`` (the rule
    optimality argument assumes it).
    """
    a = pair.alpha.probability
    b = pair.beta.probability
    if a + b >= 1.0:
        raise NotInTriangleError(
            f"fusion-rule optimality requires alpha + beta < 1, got {a + b!r}")
    (or_a, or_b), (and_a, and_b) = _rule_error_pairs(a, b)
    if or_a + or_b <= and_a + and_b:
        return ErrorPair.from_probabilities(or_a, or_b)
    return ErrorPair.from_probabilities(and_a, and_b)


def oracle_prefers_or(pair: ErrorPair) -> bool:
    """Whether minimum-total-error rule selection picks OR (ties do)."""
    a = pair.alpha.probability
    b = pair.beta.probability
    (or_a, or_b), (and_a, and_b) = _rule_error_pairs(a, b)
    return or_a + or_b <= and_a + and_b


def invert_or_step(pair: ErrorPair) -> ErrorPair:
    """Preimage of the OR branch: maps ``(1-(1-a)^2, b^2)`` back to ``(a, b)``.

    Halving the log channels is the exact inverse of the doubling the
    branch performs.
    """
    alpha = ExtendedProb.from_log2_complement(pair.alpha.log2_q / 2.0)
    beta = ExtendedProb.from_log2(pair.beta.log2_p / 2.0)
    return ErrorPair(alpha, beta)


def total_error_log2(pair: ErrorPair) -> float:
    """``log2(alpha + beta)``; ``-inf`` for the perfect pair (0, 0)."""
    return log2_add(pair.alpha.log2_p, pair.beta.log2_p)


def _band_index(low: ExtendedProb, high: ExtendedProb, cap: int) -> int:
    """Smallest ``m >= 1`` with ``(1-low)^(2^m) + high^(2^m) <= 1``.

    Iterated doubling of the log channels; the closed inequality is tested
    with the global comparison tolerance.
    """
    g = 2.0 * low.log2_q
    h = 2.0 * high.log2_p
    for m in range(1, cap + 1):
        if log2_add(g, h) <= COMPARISON_TOL:
            return m
        g *= 2.0
        h *= 2.0
    raise IndexOverflowError(f"band index exceeds cap {cap}")


def _reflected(pair: ErrorPair) -> tuple[ExtendedProb, ExtendedProb, bool]:
    """Return (min, max, beta >= alpha) for the pair."""
    above = pair.beta >= pair.alpha
    if above:
        return pair.alpha, pair.beta, True
    return pair.beta, pair.alpha, False


def classify(pair: ErrorPair, *, band_cap: int = DEFAULT_BAND_CAP) -> RegionTag:
    """Classify a state into the full region geometry.

    Region membership is only defined inside the open triangle; states on or
    beyond ``alpha + beta = 1`` (within tolerance) are tagged
    ``DIAGONAL_SUM1`` with no band index and no region flags.
    """
    log2_l = total_error_log2(pair)
    above = pair.beta >= pair.alpha
    if log2_l >= -COMPARISON_TOL:
        return RegionTag(Side.DIAGONAL_SUM1, None, False, False, above)
    low, high, _ = _reflected(pair)
    side = Side.UPPER_TRIANGLE if above else Side.LOWER_TRIANGLE
    band = _band_index(low, high, band_cap)
    # sqrt(1-high) + sqrt(low) >= 1, as a log-domain sum of half-logs.
    in_r = log2_add(high.log2_q / 2.0, low.log2_p / 2.0) >= -COMPARISON_TOL
    # high <= sqrt(low) and 1-high <= (1-low)^2.
    in_s = (high.log2_p <= low.log2_p / 2.0 + COMPARISON_TOL
            and high.log2_q <= 2.0 * low.log2_q + COMPARISON_TOL)
    return RegionTag(side, band, in_r, in_s, above)


def b_index(pair: ErrorPair, *, band_cap: int = DEFAULT_BAND_CAP) -> int:
    """Band index of the pair reflected into the upper triangle.

    Requires ``alpha + beta < 1``.
    """
    if total_error_log2(pair) >= -COMPARISON_TOL:
        raise NotInTriangleError("band index requires alpha + beta < 1")
    low, high, _ = _reflected(pair)
    return _band_index(low, high, band_cap)


def evolve(pair0: ErrorPair, levels: int, *,
           band_cap: int = DEFAULT_BAND_CAP) -> Trajectory:
    """Iterate the fusion map for ``levels`` steps, tagging every state."""
    if levels < 0:
        raise ValueError(f"levels must be non-negative, got {levels}")
    states = []
    logs = []
    pair = pair0
    for k in range(levels + 1):
        states.append(TrajectoryState(k, pair, classify(pair, band_cap=band_cap)))
        logs.append(total_error_log2(pair))
        if k < levels:
            pair = fuse(pair)
    return Trajectory(tuple(states), tuple(logs))


def _satisfies(tag: RegionTag, target: RegionTarget) -> bool:
    if target is RegionTarget.B1:
        return tag.b_index == 1
    if target is RegionTarget.R:
        return tag.in_r
    return tag.in_s


def entry_level(pair0: ErrorPair, target: RegionTarget, *,
                level_cap: int = DEFAULT_LEVEL_CAP) -> int:
    """Smallest level whose state satisfies the target region predicate.

    Requires ``alpha0 + beta0 < 1``.  A pair starting in band ``m`` reaches
    band 1 at exactly level ``m - 1``.
    """
    if total_error_log2(pair0) >= -COMPARISON_TOL:
        raise NotInTriangleError("entry level requires alpha + beta < 1")
    pair = pair0
    for k in range(level_cap + 1):
        if _satisfies(classify(pair), target):
            return k
        pair = fuse(pair)
    raise NoEntryError(
        f"target {target.value} not reached within {level_cap} levels")
