from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import pytest

from seqcert import asymptotics as asy
from seqcert.kernel import EXACT, DomainError, NumericMode
from seqcert.pairwise import gap, lhs_41, rhs_41


class TestClosedForms:
    @pytest.mark.parametrize("a", [2, 3, 7])
    def test_gap_closed_matches_pairwise_gap(self, a):
        assert asy.gap_closed(a) == gap(a - 1, 1, 4 * a * a - 1)

    def test_log_modes_enclose(self):
        for a in (2, 5, 12):
            m = NumericMode(53)
            assert asy.lhs_closed(a, m).contains(asy.lhs_closed(a))
            assert asy.rhs_closed(a, m).contains(asy.rhs_closed(a))

    def test_oracle_terms(self):
        a = 4
        assert len(asy.appendix_c_terms(a)) == 4 * a + 3
        assert math.prod(asy.appendix_c_terms(a), start=Fraction(1)) == 1 + lhs_41(a - 1, 1, 4 * a * a - 1)

    def test_rhs_bracket_factor(self):
        a = 3
        assert asy.rhs_bracket(a) * asy.product_ratio_exact(a) == rhs_41(a - 1, 1, 35)

    def test_domain(self):
        with pytest.raises(DomainError):
            asy.lhs_closed(1)
        with pytest.raises(DomainError):
            asy.product_ratio(1)


class TestProductRatio:
    def test_small_a_is_exact(self):
        assert isinstance(asy.product_ratio(10), Fraction)

    @pytest.mark.parametrize("bits", [53, 113, 256])
    def test_tracked_encloses_exact(self, bits):
        for a in (2, 10, 40):
            assert asy.product_ratio(a, NumericMode(bits)).contains(asy.product_ratio_exact(a))

    def test_published_a10(self):
        assert abs(float(asy.product_ratio(10)) - 3.2737) <= asy.REMARK_D1_TOL

    def test_decreasing_toward_e(self):
        vals = [float(asy.product_ratio(a, NumericMode(53))) for a in (10, 40, 160)]
        assert vals[0] > vals[1] > vals[2] > math.e

    def test_two_log_paths_agree(self):
        x53 = asy.log_product_ratio(300, 53)
        x113 = asy.log_product_ratio(300, 113)
        assert abs(x53.value - x113.value) <= x53.abs_error + x113.abs_error


class TestLSums:
    @pytest.mark.parametrize("a", [2, 3, 10, 25])
    def test_l4_count(self, a):
        assert asy.l4_count(a) == 4 * a * a - 3 * a - 4

    def test_l4_paths_agree(self):
        lo = asy.l_terms(60, NumericMode(53)).L4
        hi = asy.l_terms(60, NumericMode(113)).L4
        assert abs(lo.value - hi.value) <= lo.abs_error + hi.abs_error

    def test_l4_direct_sum_oracle(self):
        a = 7
        n, base = asy.l4_count(a), 4 * a * a + a - 1
        with mpmath.workprec(200):
            truth = mpmath.fsum(mpmath.log1p(mpmath.mpf(-a) / (base + i)) for i in range(1, n + 1))
            L4 = asy.l_terms(a).L4
            assert abs(L4.value - truth) <= L4.abs_error

    def test_constants_near_limits(self):
        consts = asy.l_terms(1000).constants()
        for name, target in asy.L_CONSTANTS.items():
            assert abs(float(consts[name]) - float(target)) < 2e-3, name

    def test_exact_mode_rejected(self):
        with pytest.raises(DomainError):
            asy.l_terms(5, EXACT)

    def test_claim_series_shrinks(self):
        series = asy.claim_d1_series([100, 200, 400])
        for name, rs in series.items():
            errs = [abs(r.scaled_residual - float(r.target)) for r in rs]
            assert errs[0] > errs[1] > errs[2], name


class TestLimits:
    def test_decisive_constant(self):
        rep = asy.decisive_constant_check()
        assert rep.passed
        assert rep.observations["margin"] == pytest.approx(19 / 12 - math.e / 2)

    def test_suite_converges(self):
        suite = asy.limit_suite([20, 40, 80])
        for name, rs in suite.items():
            assert all(r.converged for r in rs), name

    def test_gap_over_alpha2_at_eleven(self):
        assert float(asy.gap_closed(11) * 121) == pytest.approx(1.024494, abs=1e-6)

    def test_suite_guard(self):
        with pytest.raises(DomainError):
            asy.limit_suite([5, 20])
        with pytest.raises(DomainError):
            asy.limit_suite([40, 20])

    def test_target_value(self):
        assert asy.target_value(asy.E_HALF) == pytest.approx(math.e / 2)
        assert asy.target_value(Fraction(19, 12)) == 19 / 12


def test_remark_check_without_slow_point():
    rep = asy.remark_d1_check([10, 100])
    assert rep.passed, rep.summary()
    assert rep.observations["values"][10] == pytest.approx(3.2737, abs=5e-5)
