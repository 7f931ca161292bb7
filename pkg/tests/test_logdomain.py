"""Log-domain primitive correctness against mpmath references."""

from __future__ import annotations

import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from relaytree.logdomain import (
    LOG2_ZERO,
    ExtendedProb,
    log2_add,
    log2_one_minus_pow2,
)

# enough bits to resolve 1 - 2**y down to the subnormal floor y = -1074
mpmath.mp.prec = 1200


def mp_log2_add(u: float, v: float) -> float:
    return float(mpmath.log(mpmath.mpf(2) ** u + mpmath.mpf(2) ** v, 2))


def mp_log2_one_minus_pow2(y: float) -> float:
    return float(mpmath.log(1 - mpmath.mpf(2) ** y, 2))


class TestLog2Add:
    def test_symmetric_halves(self):
        assert log2_add(-1.0, -1.0) == 0.0

    def test_neg_inf_identity(self):
        assert log2_add(LOG2_ZERO, -3.25) == -3.25
        assert log2_add(-3.25, LOG2_ZERO) == -3.25
        assert log2_add(LOG2_ZERO, LOG2_ZERO) == LOG2_ZERO

    @pytest.mark.parametrize("u,v", [
        (-0.1, -0.2), (-50.0, -51.0), (-1000.0, -0.5),
        (-3.321928094887362, -2.321928094887362),
        (-0.001, -900.0), (-1074.0, -1074.0),
    ])
    def test_against_mpmath(self, u, v):
        assert math.isclose(log2_add(u, v), mp_log2_add(u, v), rel_tol=1e-14)

    @given(st.floats(-300, 0), st.floats(-300, 0))
    def test_random_against_mpmath(self, u, v):
        assert math.isclose(log2_add(u, v), mp_log2_add(u, v),
                            rel_tol=1e-13, abs_tol=1e-15)


class TestLog2OneMinusPow2:
    def test_edges(self):
        assert log2_one_minus_pow2(0.0) == LOG2_ZERO
        assert log2_one_minus_pow2(LOG2_ZERO) == 0.0
        with pytest.raises(ValueError):
            log2_one_minus_pow2(0.5)

    @pytest.mark.parametrize("y", [
        -1e-12, -0.01, -0.5, -0.999, -1.0, -1.001, -2.0, -10.0,
        -52.0, -53.0, -54.0, -100.0, -500.0, -1074.0,
    ])
    def test_against_mpmath(self, y):
        got = log2_one_minus_pow2(y)
        want = mp_log2_one_minus_pow2(y)
        assert math.isclose(got, want, rel_tol=1e-13)

    @given(st.floats(-1074, -1e-14))
    def test_random_against_mpmath(self, y):
        got = log2_one_minus_pow2(y)
        want = mp_log2_one_minus_pow2(y)
        assert math.isclose(got, want, rel_tol=1e-12, abs_tol=5e-324)

    def test_branch_continuity_at_cutover(self):
        lo = log2_one_minus_pow2(math.nextafter(-1.0, -2.0))
        hi = log2_one_minus_pow2(math.nextafter(-1.0, 0.0))
        at = log2_one_minus_pow2(-1.0)
        assert abs(lo - at) < 1e-15 and abs(hi - at) < 1e-15


unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestExtendedProb:
    def test_from_probability_edges(self):
        zero = ExtendedProb.from_probability(0.0)
        assert zero.log2_p == LOG2_ZERO and zero.log2_q == 0.0
        one = ExtendedProb.from_probability(1.0)
        assert one.log2_p == 0.0 and one.log2_q == LOG2_ZERO

    def test_rejects_out_of_range(self):
        for bad in (-0.1, 1.1, float("nan")):
            with pytest.raises(ValueError):
                ExtendedProb.from_probability(bad)

    def test_rejects_double_zero(self):
        with pytest.raises(ValueError):
            ExtendedProb(LOG2_ZERO, LOG2_ZERO)

    def test_rejects_positive_channel(self):
        with pytest.raises(ValueError):
            ExtendedProb(0.5, -1.0)

    @given(unit)
    def test_consistency_fresh(self, p):
        x = ExtendedProb.from_probability(p)
        self._assert_consistent(x)

    @given(unit)
    def test_consistency_after_squaring(self, p):
        x = ExtendedProb.from_probability(p)
        self._assert_consistent(x.squared())
        self._assert_consistent(x.complement_squared())

    @staticmethod
    def _assert_consistent(x: ExtendedProb):
        # 2**log2_p + 2**log2_q == 1 whenever both channels are resolvable
        p, q = x.probability, x.complement_probability
        if p > 2.0 ** -50 and q > 2.0 ** -50:
            assert abs(p + q - 1.0) <= 2.0 ** -40

    def test_squaring_doubles_exactly(self):
        x = ExtendedProb.from_probability(0.3)
        assert x.squared().log2_p == 2.0 * x.log2_p
        assert x.complement_squared().log2_q == 2.0 * x.log2_q

    def test_deep_squaring_survives(self):
        # 40 squarings of 0.5: probability 2**(-2**40), far below double range
        x = ExtendedProb.from_probability(0.5)
        for _ in range(40):
            x = x.squared()
        assert x.log2_p == -(2.0 ** 40)
        assert x.log2_q == 0.0  # complement indistinguishable from 1
        assert x.probability == 0.0  # plain view underflows, channels do not

    def test_order(self):
        a = ExtendedProb.from_probability(0.1)
        b = ExtendedProb.from_probability(0.2)
        assert a < b and a <= b and b > a and b >= a
        assert a <= ExtendedProb.from_probability(0.1)

    def test_swapped(self):
        x = ExtendedProb.from_probability(0.3)
        y = x.swapped()
        assert y.log2_p == x.log2_q and y.log2_q == x.log2_p
