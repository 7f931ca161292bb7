"""Fusion map, oracle, trajectories, and their symmetries."""

from __future__ import annotations

import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import plain_trajectory, rel_err, triangle_grid
from relaytree import (
    ErrorPair,
    NotInTriangleError,
    RegionTarget,
    Side,
    entry_level,
    evolve,
    fuse,
    fuse_oracle,
    total_error_log2,
)
from relaytree.dynamics import oracle_prefers_or

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def pair_of(a: float, b: float) -> ErrorPair:
    return ErrorPair.from_probabilities(a, b)


def probs(pair: ErrorPair) -> tuple[float, float]:
    return pair.alpha.probability, pair.beta.probability


class TestFuse:
    @pytest.mark.parametrize("a,b,expect", [
        ((0.1), 0.2, (0.19, 0.04)),
        (0.0, 0.0, (0.0, 0.0)),
        (0.5, 0.5, (0.75, 0.25)),
        (0.2, 0.1, (0.04, 0.19)),
    ])
    def test_examples(self, a, b, expect):
        got = probs(fuse(pair_of(a, b)))
        assert got == pytest.approx(expect, rel=1e-14, abs=1e-300)

    def test_diagonal_line_is_invariant(self):
        # alpha + beta = 1 stays on the line exactly in log-sum terms
        for a in (0.1, 0.25, 0.4, 0.5, 0.6, 0.9):
            out = fuse(pair_of(a, 1.0 - a))
            assert abs(total_error_log2(out)) < 1e-13

    @given(unit, unit)
    def test_reflection_symmetry(self, a, b):
        # swap(fuse(a, b)) == fuse(b, a), exact off the diagonal
        assume(a != b)
        left = fuse(pair_of(a, b)).swapped()
        right = fuse(pair_of(b, a))
        assert left == right

    @given(unit, unit)
    def test_complement_symmetry(self, a, b):
        # fuse(1-a, 1-b) == complement of fuse(a, b), to 2**-40 relative
        left = fuse(pair_of(a, b).complemented())
        right = fuse(pair_of(a, b)).complemented()
        for lch, rch in [(left.alpha, right.alpha), (left.beta, right.beta)]:
            assert math.isclose(lch.log2_p, rch.log2_p,
                                rel_tol=2 ** -40, abs_tol=2 ** -40)
            assert math.isclose(lch.log2_q, rch.log2_q,
                                rel_tol=2 ** -40, abs_tol=2 ** -40)


class TestFuseOracle:
    @pytest.mark.parametrize("a,b,expect", [
        (0.1, 0.2, (0.19, 0.04)),
        (0.3, 0.3, (0.51, 0.09)),   # tie between rules resolved toward OR
        (0.0, 0.5, (0.0, 0.25)),
    ])
    def test_examples(self, a, b, expect):
        got = probs(fuse_oracle(pair_of(a, b)))
        assert got == pytest.approx(expect, rel=1e-14, abs=0.0)

    def test_rejects_outside_triangle(self):
        with pytest.raises(NotInTriangleError):
            fuse_oracle(pair_of(0.5, 0.5))
        with pytest.raises(NotInTriangleError):
            fuse_oracle(pair_of(0.9, 0.4))

    def test_branch_agreement_on_grid(self):
        # The enumeration oracle and the log-domain branch map must agree.
        for a, b in triangle_grid(100):
            pair = pair_of(a, b)
            got = probs(fuse(pair))
            want = probs(fuse_oracle(pair))
            assert rel_err(got[0], want[0]) < 1e-12
            assert rel_err(got[1], want[1]) < 1e-12

    @given(unit, unit)
    def test_branch_agreement_random(self, a, b):
        assume(a + b < 1.0)
        pair = pair_of(a, b)
        got = probs(fuse(pair))
        want = probs(fuse_oracle(pair))
        assert rel_err(got[0], want[0]) < 1e-12
        assert rel_err(got[1], want[1]) < 1e-12

    def test_prefers_or_on_tie(self):
        assert oracle_prefers_or(pair_of(0.3, 0.3))
        assert oracle_prefers_or(pair_of(0.0, 0.0))
        assert not oracle_prefers_or(pair_of(0.2, 0.1))


class TestTotalErrorLog2:
    def test_examples(self):
        assert total_error_log2(pair_of(0.1, 0.2)) == pytest.approx(
            math.log2(0.3), abs=1e-12)
        assert total_error_log2(pair_of(0.0, 0.0)) == float("-inf")
        assert total_error_log2(pair_of(0.5, 0.5)) == 0.0


class TestEvolve:
    def test_example_trajectory(self):
        traj = evolve(pair_of(0.1, 0.2), 2)
        pts = [probs(st.pair) for st in traj.states]
        assert pts[0] == pytest.approx((0.1, 0.2), rel=1e-15)
        assert pts[1] == pytest.approx((0.19, 0.04), rel=1e-14)
        assert pts[2] == pytest.approx((0.0361, 0.0784), rel=1e-13)
        assert traj.log2_l == pytest.approx(
            (-1.737, -2.120, -3.127), abs=5e-4)

    def test_fixed_point(self):
        traj = evolve(pair_of(0.0, 0.0), 5)
        for state in traj.states:
            assert probs(state.pair) == (0.0, 0.0)

    def test_diagonal_sum1_line(self):
        traj = evolve(pair_of(0.4, 0.6), 3)
        for state, log2_l in zip(traj.states, traj.log2_l):
            assert state.tag.side is Side.DIAGONAL_SUM1
            assert abs(log2_l) < 1e-13

    def test_states_rederivable(self):
        traj = evolve(pair_of(0.13, 0.46), 12)
        for prev, nxt in zip(traj.states, traj.states[1:]):
            assert fuse(prev.pair) == nxt.pair

    def test_rejects_negative_levels(self):
        with pytest.raises(ValueError):
            evolve(pair_of(0.1, 0.2), -1)

    @given(unit, unit, st.integers(0, 25))
    @settings(max_examples=60)
    def test_monotone_log2_l(self, a, b, levels):
        assume(a + b < 1.0)
        traj = evolve(pair_of(a, b), levels)
        for prev, nxt in zip(traj.log2_l, traj.log2_l[1:]):
            assert nxt <= prev + 2 ** -40

    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    @settings(max_examples=80)
    def test_fidelity_vs_plain_recursion(self, a, b):
        # log-domain recursion tracks the plain double recursion to 1e-9
        # relative over 10 levels whenever the start is not too small
        assume(0.1 <= a + b < 1.0)
        plain = plain_trajectory(a, b, 10)
        traj = evolve(pair_of(a, b), 10)
        for (pa, pb), state in zip(plain, traj.states):
            assert rel_err(state.pair.alpha.probability, pa) <= 1e-9
            assert rel_err(state.pair.beta.probability, pb) <= 1e-9


class TestEntryLevel:
    def test_examples(self):
        assert entry_level(pair_of(0.05, 0.9), RegionTarget.B1) == 3
        assert entry_level(pair_of(0.1, 0.2), RegionTarget.R) == 0
        assert entry_level(pair_of(0.0, 0.0), RegionTarget.B1) == 0

    def test_band_index_predicts_entry(self):
        # a pair in band m reaches band 1 at exactly level m-1
        from relaytree import b_index
        for a, b in [(0.05, 0.9), (0.01, 0.97), (0.3, 0.65), (0.1, 0.2),
                     (0.45, 0.05), (0.02, 0.5)]:
            pair = pair_of(a, b)
            m = b_index(pair)
            assert entry_level(pair, RegionTarget.B1) == m - 1

    def test_rejects_outside_triangle(self):
        with pytest.raises(NotInTriangleError):
            entry_level(pair_of(0.5, 0.5), RegionTarget.B1)
