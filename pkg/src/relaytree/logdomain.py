"""Base-2 log-domain probability arithmetic.

A probability is carried as the pair ``(log2 p, log2 (1-p))``.  Keeping both
channels is what lets the relay-tree recursion run to hundreds of levels:
the total error shrinks doubly exponentially, so plain doubles underflow
around level 20, while the log of the small channel stays a perfectly
ordinary float.  Conversely, a probability exponentially close to 1 is only
representable through the log of its complement.

All logarithms here are base 2.
"""

from __future__ import annotations

import math

__all__ = ["LOG2_ZERO", "ExtendedProb", "log2_add", "log2_one_minus_pow2"]

_LN2 = math.log(2.0)

#: log2 of an exact zero probability.
LOG2_ZERO = float("-inf")


def log2_add(u: float, v: float) -> float:
    """Return ``log2(2**u + 2**v)`` without leaving the log domain.

    Either argument may be ``-inf`` (an exact zero term).  The result may be
    positive: sums of probabilities are allowed to exceed 1.
    """
    if u == LOG2_ZERO:
        return v
    if v == LOG2_ZERO:
        return u
    if u < v:
        u, v = v, u
    return u + math.log1p(2.0 ** (v - u)) / _LN2


def log2_one_minus_pow2(y: float) -> float:
    """Return ``log2(1 - 2**y)`` for ``y <= 0``.

    The two-regime split keeps full relative accuracy on both ends:

    * ``y in (-1, 0)``: ``2**y`` is close to 1, so ``1 - 2**y`` is computed
      as ``-expm1(y * ln 2)``, which preserves the tiny difference.
    * ``y <= -1``: ``2**y <= 1/2``, so ``log1p(-2**y)`` is exact enough and
      also handles arbitrarily small ``2**y`` (down to subnormals).
    """
    if y > 0.0:
        raise ValueError(f"log2(1 - 2**y) requires y <= 0, got y={y!r}")
    if y == 0.0:
        return LOG2_ZERO
    if y == LOG2_ZERO:
        return 0.0
    if y > -1.0:
        return math.log(-math.expm1(y * _LN2)) / _LN2
    return math.log1p(-(2.0 ** y)) / _LN2


class ExtendedProb:
    """A probability stored as ``(log2 p, log2 (1-p))``.

    Values are immutable by convention and safe to share across threads.
    Both channels are non-positive and never both ``-inf``.  Fresh values
    built by the classmethod constructors are consistent by construction
    (``2**log2_p + 2**log2_q == 1`` up to rounding); operations derive one
    channel from the exact update of the other, bounding drift.
    """

    __slots__ = ("log2_p", "log2_q")

    def __init__(self, log2_p: float, log2_q: float):
        if log2_p > 0.0 or log2_q > 0.0 or log2_p != log2_p or log2_q != log2_q:
            raise ValueError(
                f"log2 channels must be non-positive, got ({log2_p!r}, {log2_q!r})"
            )
        if log2_p == LOG2_ZERO and log2_q == LOG2_ZERO:
            raise ValueError("probability and complement cannot both be zero")
        self.log2_p = log2_p
        self.log2_q = log2_q

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_probability(cls, p: float) -> "ExtendedProb":
        """Build from a plain probability in [0, 1]."""
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability must lie in [0, 1], got {p!r}")
        log2_p = math.log2(p) if p > 0.0 else LOG2_ZERO
        log2_q = math.log1p(-p) / _LN2 if p < 1.0 else LOG2_ZERO
        return cls(log2_p, log2_q)

    @classmethod
    def from_log2(cls, log2_p: float) -> "ExtendedProb":
        """Build from ``log2 p``, deriving the complement channel."""
        return cls(log2_p, log2_one_minus_pow2(log2_p))

    @classmethod
    def from_log2_complement(cls, log2_q: float) -> "ExtendedProb":
        """Build from ``log2 (1-p)``, deriving the probability channel."""
        return cls(log2_one_minus_pow2(log2_q), log2_q)

    # -- views -------------------------------------------------------------

    @property
    def probability(self) -> float:
        """The probability as a plain float (may underflow to 0.0)."""
        return 2.0 ** self.log2_p

    @property
    def complement_probability(self) -> float:
        """``1 - p`` as a plain float (may underflow to 0.0)."""
        return 2.0 ** self.log2_q

    # -- algebra -----------------------------------------------------------

    def squared(self) -> "ExtendedProb":
        """Return ``p**2``.  Doubling ``log2 p`` is exact in floats."""
        lp = 2.0 * self.log2_p
        return ExtendedProb(lp, log2_one_minus_pow2(lp))

    def complement_squared(self) -> "ExtendedProb":
        """Return ``1 - (1-p)**2``.  Doubling ``log2 (1-p)`` is exact."""
        lq = 2.0 * self.log2_q
        return ExtendedProb(log2_one_minus_pow2(lq), lq)

    def swapped(self) -> "ExtendedProb":
        """Return ``1 - p`` (channels exchanged, no arithmetic)."""
        return ExtendedProb(self.log2_q, self.log2_p)

    # -- total order -------------------------------------------------------
    #
    # Ordered primarily by log2_p; ties broken by the complement channel
    # (larger complement means smaller probability).  This refines the
    # mathematical order into a deterministic total order on representations.

    def _key(self) -> tuple[float, float]:
        return (self.log2_p, -self.log2_q)

    def __lt__(self, other: "ExtendedProb") -> bool:
        return self._key() < other._key()

    def __le__(self, other: "ExtendedProb") -> bool:
        return self._key() <= other._key()

    def __gt__(self, other: "ExtendedProb") -> bool:
        return self._key() > other._key()

    def __ge__(self, other: "ExtendedProb") -> bool:
        return self._key() >= other._key()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExtendedProb):
            return NotImplemented
        return self.log2_p == other.log2_p and self.log2_q == other.log2_q

    def __hash__(self) -> int:
        return hash((self.log2_p, self.log2_q))

    def __repr__(self) -> str:
        return f"ExtendedProb(log2_p={self.log2_p!r}, log2_q={self.log2_q!r})"
