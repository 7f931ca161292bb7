"""Literal Monte Carlo simulation of the balanced binary relay tree.

Each trial draws one random bit per leaf sensor and folds them pairwise up
the tree with the per-level OR/AND gate that the recursion dictates,
producing one root decision.  The empirical root error frequency is then
compared against the recursion's prediction.

Randomness is counter-based so results are reproducible and independent of
how work is scheduled:

* bit generator: Philox (4x64) keyed with the 64-bit master seed, counter
  starting at zero;
* the raw 64-bit output stream is read as a sequence of 32-bit words, low
  half first;
* trial ``t`` of a run with ``2**h`` leaves owns the word window
  ``[t * 2**h, (t+1) * 2**h)``; leaf ``i`` uses word ``t * 2**h + i``;
* a leaf bit is 1 when its word is below ``round(p * 2**32)`` where ``p``
  is the probability of the leaf deciding 1 under the configured
  hypothesis (``alpha0`` under H0, ``1 - beta0`` under H1).  ``p = 1`` is
  exact; other probabilities are quantized to ``2**-32``, far below
  anything resolvable by feasible trial counts.

The two hypotheses of one seed deliberately share the word stream, so
paired H0/H1 runs see the same leaf randomness (on the line
``alpha + beta = 1`` their root decisions are then exactly complementary).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dynamics import ErrorPair, NotInTriangleError, evolve, oracle_prefers_or

__all__ = [
    "MAX_HEIGHT",
    "Gate",
    "Hypothesis",
    "McConfig",
    "McEstimate",
    "gate_schedule",
    "simulate",
    "simulate_lrt_equivalence",
    "agreement_z",
]

#: Largest supported tree height (2**24 leaves); memory/time guard.
MAX_HEIGHT = 24

#: Upper bound on uint64 words folded per chunk (64 MiB).
_CHUNK_WORDS = 1 << 23

#: Full raw streams up to this many uint64 words are cached so that paired
#: runs (both hypotheses, rule-equivalence refolds) pay for generation once.
_CACHE_MAX_WORDS = 1 << 26

_cache_lock = threading.Lock()
_raw_cache: tuple[tuple[int, int], np.ndarray] | None = None


class Gate(Enum):
    """Fusion gate applied at one tree level."""

    OR = "OR"
    AND = "AND"


class Hypothesis(Enum):
    """Which hypothesis the simulated world is in."""

    H0 = "H0"
    H1 = "H1"


@dataclass(frozen=True)
class McConfig:
    """One simulation run: initial pair, tree height, trials, seed, world."""

    pair0: ErrorPair
    height: int
    trials: int
    seed: int
    hypothesis: Hypothesis

    def __post_init__(self) -> None:
        if not 1 <= self.height <= MAX_HEIGHT:
            raise ValueError(
                f"height must lie in [1, {MAX_HEIGHT}], got {self.height}")
        if self.trials < 1:
            raise ValueError(f"trials must be positive, got {self.trials}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class McEstimate:
    """Empirical root error frequency with its binomial standard error and
    the recursion's prediction for the same level."""

    error_rate: float
    trials: int
    std_err: float
    predicted: float


def gate_schedule(pair0: ErrorPair, height: int) -> list[Gate]:
    """Per-level gates: OR while ``alpha_k <= beta_k``, AND otherwise."""
    if height < 1:
        raise ValueError(f"height must be positive, got {height}")
    traj = evolve(pair0, height - 1)
    return [Gate.OR if st.pair.alpha <= st.pair.beta else Gate.AND
            for st in traj.states]


def _oracle_schedule(pair0: ErrorPair, height: int) -> list[Gate]:
    """Gates chosen by minimizing the fused total error at each level."""
    traj = evolve(pair0, height - 1)
    return [Gate.OR if oracle_prefers_or(st.pair) else Gate.AND
            for st in traj.states]


def _raw_words(seed: int, n_words: int) -> np.ndarray:
    """The first ``n_words`` uint64 words of the seed's Philox stream."""
    global _raw_cache
    key = (seed, n_words)
    with _cache_lock:
        if _raw_cache is not None and _raw_cache[0] == key:
            return _raw_cache[1]
    words = np.random.Philox(key=seed).random_raw(n_words)
    words.flags.writeable = False
    if n_words <= _CACHE_MAX_WORDS:
        with _cache_lock:
            _raw_cache = (key, words)
    return words


def _leaf_threshold(p_one: float) -> np.uint32 | None:
    """32-bit comparison threshold for a leaf-one probability; None means
    every leaf bit is 1 (``p == 1`` exactly)."""
    if p_one >= 1.0:
        return None
    return np.uint32(min(int(round(p_one * 4294967296.0)), 4294967295))


def _fold_chunk(u32: np.ndarray, gates: list[Gate]) -> np.ndarray:
    """Fold a (trials, leaves) bit matrix to one root bit per trial."""
    x = u32
    for gate in gates:
        x = x.reshape(x.shape[0], -1, 2)
        x = (x[:, :, 0] | x[:, :, 1]) if gate is Gate.OR else (x[:, :, 0] & x[:, :, 1])
    return x[:, 0]


def _fold_roots(seed: int, trials: int, height: int, p_one: float,
                gates: list[Gate]) -> np.ndarray:
    """Root decisions for every trial, chunked to bound memory.

    Chunk boundaries cannot change the result: the word stream is consumed
    strictly sequentially and each trial owns a fixed window of it.
    """
    leaves = 1 << height
    words_per_trial = leaves // 2
    total_words = trials * words_per_trial
    threshold = _leaf_threshold(p_one)
    roots = np.empty(trials, dtype=bool)

    chunk_trials = max(1, _CHUNK_WORDS // words_per_trial)
    if total_words <= _CACHE_MAX_WORDS:
        raw = _raw_words(seed, total_words)
        stream = None
    else:
        raw = None
        stream = np.random.Philox(key=seed)

    done = 0
    while done < trials:
        count = min(chunk_trials, trials - done)
        if raw is not None:
            words = raw[done * words_per_trial:(done + count) * words_per_trial]
        else:
            words = stream.random_raw(count * words_per_trial)
        u32 = words.view(np.uint32).reshape(count, leaves)
        bits = np.ones((count, leaves), dtype=bool) if threshold is None \
            else u32 < threshold
        roots[done:done + count] = _fold_chunk(bits, gates)
        done += count
    return roots


def _run(config: McConfig, gates: list[Gate]) -> tuple[np.ndarray, float]:
    """Root decisions plus the recursion's predicted error rate."""
    traj = evolve(config.pair0, config.height)
    final = traj.states[-1].pair
    if config.hypothesis is Hypothesis.H0:
        p_one = config.pair0.alpha.probability
        predicted = final.alpha.probability
    else:
        p_one = config.pair0.beta.complement_probability
        predicted = final.beta.probability
    roots = _fold_roots(config.seed, config.trials, config.height, p_one, gates)
    return roots, predicted


def _error_count(roots: np.ndarray, hypothesis: Hypothesis) -> int:
    # error event: root decides 1 under H0, root decides 0 under H1
    ones = int(np.count_nonzero(roots))
    return ones if hypothesis is Hypothesis.H0 else len(roots) - ones


def simulate(config: McConfig) -> McEstimate:
    """Run the literal tree simulation and compare with the recursion."""
    gates = gate_schedule(config.pair0, config.height)
    roots, predicted = _run(config, gates)
    rate = _error_count(roots, config.hypothesis) / config.trials
    std_err = math.sqrt(rate * (1.0 - rate) / config.trials)
    return McEstimate(rate, config.trials, std_err, predicted)


def simulate_lrt_equivalence(config: McConfig) -> bool:
    """Refold the same leaf bits with minimum-total-error rule selection.

    Returns whether every trial's root decision matches the branch-rule
    fold bit for bit.  Requires ``alpha0 + beta0 < 1`` (rule optimality).
    """
    a = config.pair0.alpha.probability
    b = config.pair0.beta.probability
    if a + b >= 1.0:
        raise NotInTriangleError(
            "rule equivalence requires alpha0 + beta0 < 1")
    roots_branch, _ = _run(config, gate_schedule(config.pair0, config.height))
    roots_oracle, _ = _run(config, _oracle_schedule(config.pair0, config.height))
    return bool(np.array_equal(roots_branch, roots_oracle))


def agreement_z(estimate: McEstimate) -> float:
    """Z-score of the empirical rate under the recursion-predicted binomial.

    The null standard error ``sqrt(p*(1-p)/n)`` uses the predicted rate, so
    the statistic stays meaningful when the empirical count is zero.  A
    zero prediction with a matching empirical zero scores 0.
    """
    sigma = math.sqrt(estimate.predicted * (1.0 - estimate.predicted)
                      / estimate.trials)
    diff = estimate.error_rate - estimate.predicted
    if sigma == 0.0:
        return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    return diff / sigma
