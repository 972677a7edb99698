"""The nine acceptance criteria.  Run ``pytest tests/test_acceptance.py`` to see one
line per criterion in the terminal summary."""

from __future__ import annotations

import math
import time
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from seqcert import asymptotics as asy
from seqcert import cli
from seqcert.finite_difference import delta2, delta2_h_closed, verify_theorem_1_1_range
from seqcert.functions import g, g_ratio, h_sequence, tau
from seqcert.kernel import EXACT, NumericMode
from seqcert.pairwise import lhs_41, rhs_41, property_4_1_scan, table_4_1, verify_pairwise_range
from seqcert.threshold import compute_a, conjectured_a, expansion_residuals, verify_threshold

# pinned tolerances and budgets
TABLE_TOL = Fraction(5, 10**7)
TABLE_SECONDS = 10
REMARK_TOL = 5e-5
SLOW_POINT_SECONDS = 120
THRESHOLD_SECONDS = 300
GAP_RATIO_PUBLISHED = 1.0245
GAP_RATIO_TOL = 5e-4

PUBLISHED_TABLE = {
    1: ["0.440909"],
    2: ["0.134941", "0.360421"],
    3: ["0.069596", "0.144741", "0.325816"],
    4: ["0.043015", "0.085709", "0.142530", "0.300135"],
    5: ["0.029335", "0.058016", "0.088660", "0.140139", "0.277542"],
    6: ["0.021317", "0.042164", "0.062874", "0.088736", "0.137890", "0.257280"],
    7: ["0.016203", "0.032102", "0.047553", "0.064230", "0.088335", "0.135406", "0.239180"],
    8: ["0.012736", "0.025280", "0.037415", "0.049678", "0.064481", "0.087874", "0.132574", "0.223069"],
    9: ["0.010276", "0.020430", "0.030268", "0.039933", "0.050440", "0.064425", "0.087350", "0.129440",
        "0.208735"],
    10: ["0.008467", "0.016856", "0.025011", "0.032935", "0.041072", "0.050665", "0.064294", "0.086710",
         "0.126098", "0.195960"],
}

PUBLISHED_PRODUCT_RATIO = {10: 3.2737, 100: 2.7665, 1000: 2.7230, 5000: 2.7189}

ORACLE = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def _cli(*argv: str) -> tuple[int, str]:
    ns = cli.build_parser().parse_args(list(argv))
    return cli.run(cli.config_from_args(ns, env={}))


# 1 ---------------------------------------------------------------------------


@pytest.mark.acceptance(1, "gap table reproduces all 55 published entries within 5e-7 in < 10 s")
def test_gap_table_matches_published():
    start = time.perf_counter()
    code, text = _cli("table41", "--max-a", "10")
    elapsed = time.perf_counter() - start
    assert code == 0
    assert elapsed < TABLE_SECONDS

    table = table_4_1(10)
    worst = max(
        abs(table[a, j] - Fraction(PUBLISHED_TABLE[a][j - 1]))
        for a in PUBLISHED_TABLE
        for j in range(1, a + 1)
    )
    assert worst <= TABLE_TOL

    rows = [line.split(",") for line in text.strip().splitlines()[1:]]
    assert len(rows) == 55
    for a, j, _, rounded, *_ in rows:
        assert rounded == PUBLISHED_TABLE[int(a)][int(j) - 1]


# 2 ---------------------------------------------------------------------------


@pytest.mark.acceptance(2, "product ratio matches the published values at a = 10, 100, 1000, 5000 within 5e-5")
@pytest.mark.parametrize("a", [10, 100, 1000])
def test_product_ratio_published(a):
    value = float(asy.product_ratio(a, NumericMode(53)))
    assert abs(value - PUBLISHED_PRODUCT_RATIO[a]) <= REMARK_TOL


@pytest.mark.acceptance(2, "product ratio matches the published values at a = 10, 100, 1000, 5000 within 5e-5")
def test_product_ratio_slow_point():
    # Known to fail: the certified value is 2.719233..., 3.3e-4 above the published 2.7189.
    start = time.perf_counter()
    code, text = _cli("asymptotics", "--suite", "remarkD1", "--a", "5000", "--slow")
    elapsed = time.perf_counter() - start
    assert elapsed < SLOW_POINT_SECONDS
    value = float(text.strip().splitlines()[1].split(",")[1])
    assert abs(value - PUBLISHED_PRODUCT_RATIO[5000]) <= REMARK_TOL, f"computed {value}"
    assert code == 0


# 3 ---------------------------------------------------------------------------


@pytest.mark.acceptance(3, "threshold formula holds for l = 6..2500 (exact) in < 5 min")
def test_threshold_formula_range():
    start = time.perf_counter()
    rep = verify_threshold(6, 2500, EXACT)
    assert time.perf_counter() - start < THRESHOLD_SECONDS
    assert rep.passed, rep.summary()
    assert rep.checks["a_matches_formula"].count == 2495
    lo, hi = rep.observations["triple_a_range"]
    assert lo <= 3 and hi >= 24


@pytest.mark.acceptance(3, "threshold formula holds for l = 6..2500 (exact) in < 5 min")
def test_threshold_small_hand_checks():
    assert all(compute_a(l) == 1 for l in range(6, 16))
    assert all(compute_a(l) == 2 for l in range(16, 36))
    assert all(compute_a(l) == conjectured_a(l) for l in range(6, 36))


# 4 ---------------------------------------------------------------------------


@pytest.mark.acceptance(4, "convexity assertions (i)-(v) and the corollary for l = 6..600, exact")
def test_convexity_suite():
    rep = verify_theorem_1_1_range(6, 600, EXACT)
    assert rep.passed, rep.summary()
    assert all(c.failures == [] for c in rep.checks.values())
    assert rep.modes_used == {"exact"}


# 5 ---------------------------------------------------------------------------


@pytest.mark.acceptance(5, "pairwise inequalities for l = 9..600, reduced check l = 6..8, E[d] > 0")
def test_pairwise_suite():
    rep = verify_pairwise_range(6, 600, EXACT)
    assert rep.passed, rep.summary()
    assert rep.checks["reduced_inequality"].count == 3
    assert rep.checks["expected_d_positive"].count == 595
    assert rep.checks["pairwise_inequality"].count == sum(conjectured_a(l) for l in range(9, 601))


# 6 ---------------------------------------------------------------------------


@pytest.mark.acceptance(6, "gap monotonicities (i)-(iii) on the max-a = 12 grid, zero violations")
def test_monotonicity_scan():
    rep = property_4_1_scan(12, EXACT)
    assert rep.passed, rep.summary()
    assert {"decreasing_in_l", "increasing_in_j", "corner_decreasing_in_a"} <= set(rep.checks)
    assert rep.checks["corner_decreasing_in_a"].count == 11


# 7 ---------------------------------------------------------------------------


@pytest.mark.acceptance(7, "oracle equivalences between independent evaluation paths")
@ORACLE
@given(st.integers(6, 200).flatmap(lambda l: st.tuples(st.just(l), st.integers(0, tau(l)))))
def test_telescoped_ratio_equals_direct_g(point):
    l, j = point
    assert math.prod((g_ratio(l, i) for i in range(j)), start=Fraction(1)) == g((l, j))


@pytest.mark.acceptance(7, "oracle equivalences between independent evaluation paths")
@ORACLE
@given(st.integers(6, 300))
def test_closed_second_difference_of_h(l):
    hs = h_sequence(l)
    assert all(delta2(hs, j) == delta2_h_closed(l, j) for j in range(1, tau(l)))


@pytest.mark.acceptance(7, "oracle equivalences between independent evaluation paths")
@ORACLE
@given(st.integers(2, 30))
def test_closed_forms_equal_pairwise_sides(a):
    l = 4 * a * a - 1
    assert asy.lhs_closed(a) == lhs_41(a - 1, 1, l)
    assert asy.rhs_closed(a) == rhs_41(a - 1, 1, l)


@pytest.mark.acceptance(7, "oracle equivalences between independent evaluation paths")
@ORACLE
@given(st.integers(2, 50))
def test_sum_oracle_matches_lhs(a):
    one_plus = 1 + asy.lhs_closed(a)
    assert asy.appendix_c_oracle(a, EXACT) == one_plus
    assert asy.appendix_c_oracle(a, NumericMode(53)).exp().contains(one_plus)


@pytest.mark.acceptance(7, "oracle equivalences between independent evaluation paths")
@ORACLE
@given(st.integers(2, 30))
def test_l_sums_enclose_exact_product_ratio(a):
    exact = asy.product_ratio_exact(a)
    assert asy.l_terms(a).combination.exp().contains(exact)


# 8 ---------------------------------------------------------------------------

LIMIT_A = [50, 100, 200, 400]
CLAIM_A = [500, 1000, 2000]


def _shrinks(values: list[float], target: float) -> bool:
    errs = [abs(v - target) for v in values]
    return all(e1 < e0 for e0, e1 in zip(errs, errs[1:]))


@pytest.mark.acceptance(8, "asymptotic residuals shrink monotonically; gap/alpha^2 at a = 11 is 1.0245")
def test_lhs_cubic_coefficient_converges():
    series = asy.limit_series("a3_lhs_minus_alpha2", LIMIT_A)
    assert _shrinks([r.scaled_residual for r in series], 19 / 12)


@pytest.mark.acceptance(8, "asymptotic residuals shrink monotonically; gap/alpha^2 at a = 11 is 1.0245")
def test_rhs_coefficient_converges():
    series = asy.limit_series("a3_rhs", LIMIT_A)
    assert _shrinks([r.scaled_residual for r in series], asy.target_value(asy.E_HALF))


@pytest.mark.acceptance(8, "asymptotic residuals shrink monotonically; gap/alpha^2 at a = 11 is 1.0245")
def test_log_g_cubic_coefficient_converges():
    # Known to fail: the residual converges to -1/32, so its distance from -3/32 grows.
    series = expansion_residuals("g_at_a", LIMIT_A)
    values = [r.scaled_residual for r in series]
    assert _shrinks(values, -3 / 32), f"residuals {values}"


@pytest.mark.acceptance(8, "asymptotic residuals shrink monotonically; gap/alpha^2 at a = 11 is 1.0245")
def test_l1_constant_converges():
    series = asy.claim_d1_series(CLAIM_A)["L1"]
    assert _shrinks([r.scaled_residual for r in series], 1 / 16)


@pytest.mark.acceptance(8, "asymptotic residuals shrink monotonically; gap/alpha^2 at a = 11 is 1.0245")
def test_gap_ratio_at_shifted_eleven():
    ratio = asy.gap_closed(11) * 121
    assert abs(float(ratio) - GAP_RATIO_PUBLISHED) <= GAP_RATIO_TOL


# 9 ---------------------------------------------------------------------------

DETERMINISM_RUNS = [
    ("verify", "threshold", "--l", "6..400"),
    ("verify", "theorem1", "--l", "6..150"),
    ("verify", "pairwise", "--l", "6..150"),
    ("scan", "property41", "--max-a", "6"),
    ("table41", "--max-a", "10"),
]


@pytest.mark.acceptance(9, "byte-identical output across worker counts")
@pytest.mark.parametrize("argv", DETERMINISM_RUNS, ids=lambda a: "-".join(a[:2]))
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_worker_count_does_not_change_output(argv, fmt):
    outputs = {_cli(*argv, "--format", fmt, "--workers", str(w)) for w in (1, 3)}
    assert len(outputs) == 1
