from __future__ import annotations

from decimal import ROUND_DOWN, Decimal
from fractions import Fraction

import pytest

from seqcert.functions import Q, d, tau
from seqcert.kernel import EXACT, DomainError, NumericMode
from seqcert.pairwise import (
    FIGURE_IDS,
    binomial_ratio,
    figure_data,
    gap,
    gap_approximation,
    lhs_41,
    log_binomial_ratio,
    property_4_1_scan,
    rhs_41,
    round_decimal,
    scan_l_range,
    table_4_1,
    table_l,
    verify_pairwise,
    verify_pairwise_range,
    verify_small_l,
)


class TestSides:
    @pytest.mark.parametrize("l", [9, 20, 63, 143])
    def test_gap_sign_matches_direct_inequality(self, l):
        a = int(l**0.5) // 2
        for j in range(1, a + 1):
            if j + a + 1 > tau(l):
                continue
            k = j + a + 1
            direct = d((l, k)) * Q(l, k) + d((l, j)) * Q(l, j)
            assert (direct > 0) == (gap(a, j, l) > 0)

    def test_ratio_of_d_q_terms_is_rhs_over_lhs_scale(self):
        # d(k)Q(k) / (-d(j)Q(j)) == lhs / rhs exactly
        a, j, l = 2, 1, 35
        k = j + a + 1
        ratio = d((l, k)) * Q(l, k) / (-d((l, j)) * Q(l, j))
        assert ratio == lhs_41(a, j, l) / rhs_41(a, j, l)

    def test_log_mode_encloses_exact(self):
        for a, j, l in [(1, 1, 15), (3, 2, 63), (5, 5, 143)]:
            assert lhs_41(a, j, l, NumericMode(53)).contains(lhs_41(a, j, l))
            assert rhs_41(a, j, l, NumericMode(53)).contains(rhs_41(a, j, l))
            assert log_binomial_ratio(a, j, l, 53).exp().contains(binomial_ratio(a, j, l))

    @pytest.mark.parametrize("a, j, l", [(1, 0, 15), (1, 2, 15), (3, 3, 20), (1, 1, 5)])
    def test_index_guard(self, a, j, l):
        with pytest.raises(DomainError):
            gap(a, j, l)


class TestRounding:
    def test_half_even(self):
        assert round_decimal(Fraction(5, 10**7)) == Decimal("0.000000")
        assert round_decimal(Fraction(15, 10**7)) == Decimal("0.000002")
        assert round_decimal(Fraction(25, 10**7)) == Decimal("0.000002")

    def test_truncation(self):
        assert round_decimal(Fraction(2, 3), rounding=ROUND_DOWN) == Decimal("0.666666")
        assert round_decimal(Fraction(2, 3)) == Decimal("0.666667")
        assert round_decimal(Fraction(-2, 3), rounding=ROUND_DOWN) == Decimal("-0.666666")

    def test_negative_half_even(self):
        assert round_decimal(Fraction(-2, 3)) == Decimal("-0.666667")


class TestTable:
    def test_dimensions_and_l(self):
        t = table_4_1(4)
        assert len(t.entries) == 10
        assert table_l(1) == 15 and table_l(10) == 483
        assert [len(r) for _, r in t.rows()] == [1, 2, 3, 4]

    def test_spot_values(self):
        t = table_4_1(3)
        assert str(t.rounded(1, 1)) == "0.440909"
        assert str(t.rounded(3, 3)) == "0.325816"
        assert str(t.truncated(3, 3)) == "0.325815"
        assert (3, 3) in t.convention_sensitive()

    def test_all_positive(self):
        assert all(v > 0 for v in table_4_1(8).entries.values())

    def test_max_a_guard(self):
        with pytest.raises(DomainError):
            table_4_1(0)


class TestVerify:
    @pytest.mark.parametrize("l", [9, 15, 16, 99, 100, 255])
    def test_single_l(self, l):
        rep = verify_pairwise(l)
        assert rep.passed, rep.summary()

    def test_log_mode(self):
        rep = verify_pairwise_range(200, 240, NumericMode(53))
        assert rep.passed, rep.summary()

    @pytest.mark.parametrize("l", [6, 7, 8])
    def test_small(self, l):
        assert verify_small_l(l).passed

    def test_small_guard(self):
        with pytest.raises(DomainError):
            verify_small_l(9)
        with pytest.raises(DomainError):
            verify_pairwise(8)

    def test_range_dispatch(self):
        rep = verify_pairwise_range(6, 30)
        assert rep.passed
        assert rep.checks["reduced_inequality"].count == 3
        assert rep.observations["l_range"] == [6, 30]


class TestScan:
    def test_scan_range_starts_where_defined(self):
        r = scan_l_range(1, 1)
        assert r.start == 9 and r.stop == 16
        r = scan_l_range(3, 3)
        assert 3 + 3 + 1 <= tau(r.start) and r.stop == 64

    def test_grid(self):
        rep = property_4_1_scan(6)
        assert rep.passed, rep.summary()
        assert rep.checks["corner_decreasing_in_a"].count == 5


class TestFigures:
    @pytest.mark.parametrize("fig_id", FIGURE_IDS)
    def test_shapes(self, fig_id):
        fig = figure_data(fig_id)
        assert all(len(row) == len(fig.columns) for row in fig.rows)
        assert fig.rows

    def test_pairwise_bars_dominate(self):
        fig = figure_data("4.1")
        assert len(fig.rows) == 8
        assert all(up > low > 0 for _, up, low in fig.rows)

    def test_gap_series_cover_the_a3_block(self):
        fig = figure_data("4.3")
        assert [r[0] for r in fig.rows] == list(range(36, 64))
        assert all(g > 0 for *_, g in fig.rows)

    def test_approximation_tracks_gap(self):
        fig = figure_data("4.6")
        last_a, last_gap, last_approx = fig.rows[-1]
        assert last_a == 10
        assert abs(last_gap - last_approx) / last_gap < 0.02
        assert gap_approximation(10) == pytest.approx(1 / 121 + (19 / 12 - 2.718281828459045 / 2) / 1331)

    def test_unknown(self):
        with pytest.raises(DomainError):
            figure_data("9.9")


def test_exact_is_default_mode():
    assert isinstance(gap(1, 1, 15), Fraction)
    assert isinstance(gap(1, 1, 15, EXACT), Fraction)
