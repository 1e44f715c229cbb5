"""Exact q-series ring: oracle comparisons, ring laws, named identities.

The oracle for the builtin expansions is a deliberately naive dict-based
product expander written inline here (no shared code with the library), plus
numeric evaluation against the floating-point special-function engine.
"""

import cmath
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elliptic_selberg import specfun
from elliptic_selberg.errors import NonUnitLeading, OrderTooSmall, UnsupportedBuiltin
from elliptic_selberg.qseries import (
    NAMED_IDENTITIES,
    BivariateSeries,
    GaussianRational,
    SeriesIdentity,
    alternation_report,
    check_series_identity,
    expand_builtin,
    named_identity,
    series_pow,
    series_rows,
)

ONE = GaussianRational.of(1)
I = GaussianRational.of(0, 1)


# ---------------------------------------------------------------------------
# oracle: naive product expander
# ---------------------------------------------------------------------------


def naive_product(order, factors):
    """Multiply out {exponent: coeff} factors with plain Fraction arithmetic."""
    acc = {Fraction(0): Fraction(1)}
    for f in factors:
        nxt = {}
        for ea, ca in acc.items():
            for eb, cb in f.items():
                e = ea + eb
                if e < order:
                    nxt[e] = nxt.get(e, Fraction(0)) + ca * cb
        acc = {e: c for e, c in nxt.items() if c}
    return acc


def x_free_coeffs(series):
    assert series.x_free()
    return {qe: c.re for (qe, _), c in series.coeffs.items() if c.im == 0}


@pytest.mark.parametrize("name,shift,sign,step", [
    ("eta", Fraction(1, 24), -1, 1),
    ("phi3", Fraction(1, 24), +1, 1),
])
def test_integer_step_products_match_naive_expansion(name, shift, sign, step):
    order = Fraction(12)
    factors = [{Fraction(0): Fraction(1), Fraction(j): Fraction(sign)}
               for j in range(1, 13)]
    series = expand_builtin(name, order)
    want = {e + shift: c for e, c in naive_product(order, factors).items()
            if e + shift < series.order}
    assert x_free_coeffs(series) == want


@pytest.mark.parametrize("name,sign", [("phi1", 1), ("phi2", -1)])
def test_half_step_products_match_naive_expansion(name, sign):
    order = Fraction(10)
    factors = [{Fraction(0): Fraction(1), Fraction(2 * j - 1, 2): Fraction(sign)}
               for j in range(1, 12)]
    shift = Fraction(-1, 48)
    series = expand_builtin(name, order)
    want = {e + shift: c for e, c in naive_product(order + 1, factors).items()
            if e + shift < series.order}
    assert x_free_coeffs(series) == want


def test_theta_level_coefficients_are_lattice_sum():
    order = Fraction(9)
    kappa, n = 4, 3
    s = expand_builtin("theta_level", order, kappa=kappa, n=n)
    want = {}
    for j in range(-6, 7):
        qe = Fraction(kappa * (2 * kappa * j + n) ** 2, 4 * kappa ** 2)
        if qe < order:
            want[(qe, 2 * kappa * j + n)] = ONE
    assert s.coeffs == want


def test_theta1_series_is_signed_odd_powers():
    s = expand_builtin("theta1", Fraction(7))
    # q^{1/8}(x - 1/x) - q^{9/8}(x^3 - x^-3) + q^{25/8}(x^5 - x^-5) - ...
    want = {}
    for j, c in [(0, -I), (1, I), (2, -I), (3, I)]:
        qe = Fraction((2 * j + 1) ** 2, 8)  # 49/8 < 7 keeps the j=3 pair
        want[(qe, 2 * j + 1)] = c
        want[(qe, -(2 * j + 1))] = -c
    assert s.coeffs == want


def eval_series(s, lam, tau):
    tot = 0j
    for (qe, xe), c in s.coeffs.items():
        tot += (c.to_complex() * cmath.exp(2j * cmath.pi * tau * float(qe))
                * cmath.exp(1j * cmath.pi * lam * xe))
    return tot


@pytest.mark.parametrize("tau", [1.1j, 0.9j])
def test_builtins_evaluate_to_float_engine(tau):
    pt = specfun.ModularPoint(tau)
    lam = 0.37
    order = Fraction(14)
    checks = [
        (expand_builtin("theta1", order), lam, specfun.theta1(lam, pt)),
        (expand_builtin("eta", order), 0.0, specfun.dedekind_eta(pt)),
        (expand_builtin("phi1", order), 0.0, specfun.phi(1, pt)),
        (expand_builtin("phi2", order), 0.0, specfun.phi(2, pt)),
        (expand_builtin("theta_level", order, kappa=6, n=5), lam,
         specfun.theta_level(6, 5, lam, pt)),
    ]
    for series, at, ref in checks:
        assert abs(eval_series(series, at, tau) - ref) < 1e-13 * max(1, abs(ref))
    p3 = expand_builtin("phi3", order)
    assert abs(eval_series(p3, 0.0, tau) * 2 ** 0.5 - specfun.phi(3, pt)) < 1e-13


def test_unknown_builtin_and_missing_args():
    with pytest.raises(UnsupportedBuiltin):
        expand_builtin("zeta", 5)
    with pytest.raises(UnsupportedBuiltin):
        expand_builtin("theta_level", 5)
    with pytest.raises(OrderTooSmall):
        expand_builtin("eta", 0)


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------


def test_gaussian_rational_arithmetic():
    a = GaussianRational.of(Fraction(1, 2), Fraction(-3, 4))
    b = GaussianRational.of(2, 5)
    assert a + b == GaussianRational.of(Fraction(5, 2), Fraction(17, 4))
    assert a * b == GaussianRational.of(
        Fraction(1, 2) * 2 - Fraction(-3, 4) * 5,
        Fraction(1, 2) * 5 + Fraction(-3, 4) * 2)
    assert (a / b) * b == a
    assert str(I * I) == "-1"
    assert 1 - a == GaussianRational.of(Fraction(1, 2), Fraction(3, 4))
    assert not GaussianRational()
    assert a


def test_gaussian_rational_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        GaussianRational.of(1) / GaussianRational()


gr_strategy = st.builds(
    GaussianRational.of,
    st.fractions(min_value=-3, max_value=3, max_denominator=6),
    st.fractions(min_value=-3, max_value=3, max_denominator=6),
)


@given(a=gr_strategy, b=gr_strategy, c=gr_strategy)
@settings(max_examples=80, deadline=None)
def test_gaussian_rational_field_laws(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    if b:
        assert (a / b) * b == a


# ---------------------------------------------------------------------------
# ring laws for series
# ---------------------------------------------------------------------------


def small_series(seed: int) -> BivariateSeries:
    # deterministic pseudo-random small series with exponents in (1/4)Z
    coeffs = {}
    state = seed
    for _ in range(4):
        state = (state * 1103515245 + 12345) % (2 ** 31)
        qe = Fraction(state % 8, 4)
        xe = (state // 8) % 5 - 2
        cr = Fraction((state // 64) % 7 - 3)
        ci = Fraction((state // 512) % 5 - 2)
        c = GaussianRational.of(cr, ci)
        if c:
            coeffs[(qe, xe)] = coeffs.get((qe, xe), GaussianRational()) + c
    return BivariateSeries(coeffs, order=Fraction(4))


@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
@settings(max_examples=60, deadline=None)
def test_series_ring_laws(i, j, k):
    a, b, c = small_series(i), small_series(j), small_series(k)
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert a * b == b * a
    assert a - a == BivariateSeries(order=a.order)
    lhs = a * (b + c)
    rhs = a * b + a * c
    # orders may differ (truncation bookkeeping is conservative); compare terms
    cutoff = min(lhs.order, rhs.order)
    assert {k_: v for k_, v in lhs.coeffs.items() if k_[0] < cutoff} == \
           {k_: v for k_, v in rhs.coeffs.items() if k_[0] < cutoff}


def test_multiplication_order_tracking():
    # multiplying by a series with positive valuation extends validity
    a = BivariateSeries({(Fraction(1, 2), 0): ONE}, order=Fraction(3))
    b = BivariateSeries({(Fraction(2), 1): ONE}, order=Fraction(5))
    assert (a * b).order == Fraction(5)  # min(3+2, 5+1/2)
    assert (a * b).coeffs == {(Fraction(5, 2), 1): ONE}


def test_monomial_and_phase_helpers():
    t = expand_builtin("theta1", Fraction(5))
    assert t.x_invert() == -t  # oddness, exact
    # theta_level index reflection via x-inversion
    s = expand_builtin("theta_level", Fraction(7), kappa=5, n=2)
    r = expand_builtin("theta_level", Fraction(7), kappa=5, n=-2)
    assert s.x_invert() == r
    # four quarter-turns come home
    assert t.x_phase_i(1).x_phase_i(3) == t
    shifted = t.times_monomial(Fraction(3, 2), -2, I)
    assert shifted.order == t.order + Fraction(3, 2)
    assert shifted.coeffs[(Fraction(1, 8) + Fraction(3, 2), -1)] == \
        t.coeffs[(Fraction(1, 8), 1)] * I


# ---------------------------------------------------------------------------
# rational powers
# ---------------------------------------------------------------------------


def test_series_pow_matches_integer_power():
    e = expand_builtin("eta", Fraction(8))
    assert check_series_identity(
        SeriesIdentity("p24", series_pow(e, Fraction(24)), e ** 24)).passed


def test_series_pow_rational_roundtrip():
    e = expand_builtin("eta", Fraction(9))
    r = series_pow(e, Fraction(2, 3))
    back = series_pow(r, Fraction(3, 2))
    assert check_series_identity(SeriesIdentity("roundtrip", back, e)).passed


def test_series_pow_negative_exponent_inverse():
    e = expand_builtin("phi3", Fraction(8))
    inv = series_pow(e, Fraction(-1))
    prod = e * inv
    lead = prod.leading_terms()
    assert lead == [(Fraction(0), 0, ONE)]
    assert len(prod.coeffs) == 1


def test_series_pow_rejects_non_unit_leading():
    t = expand_builtin("theta1", Fraction(6))
    with pytest.raises(NonUnitLeading):
        series_pow(t, Fraction(1, 2))  # two monomials at the leading q-power
    s = BivariateSeries({(Fraction(0), 0): GaussianRational.of(2)}, order=Fraction(4))
    with pytest.raises(NonUnitLeading):
        series_pow(s, Fraction(1, 2))
    # x-carrying lead with non-integer resulting x-exponent
    m = BivariateSeries({(Fraction(0), 1): ONE}, order=Fraction(4))
    with pytest.raises(NonUnitLeading):
        series_pow(m, Fraction(1, 2))
    with pytest.raises(OrderTooSmall):
        series_pow(BivariateSeries(order=Fraction(4)), Fraction(1, 2))


def test_integer_pow_guard():
    e = expand_builtin("eta", Fraction(5))
    with pytest.raises(ValueError):
        e ** (-1)
    assert (e ** 0).leading_terms() == [(Fraction(0), 0, ONE)]


# ---------------------------------------------------------------------------
# named identities and alternation
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(NAMED_IDENTITIES))
def test_named_identities_hold_exactly(name):
    report = check_series_identity(named_identity(name, Fraction(10)))
    assert report.passed, str(report)
    assert report.checked_order >= Fraction(8)


def test_named_identity_unknown_name():
    with pytest.raises(UnsupportedBuiltin):
        named_identity("nonsense", 5)


def test_check_reports_first_mismatch():
    e = expand_builtin("eta", Fraction(6))
    tampered = e + BivariateSeries({(Fraction(3), 0): I}, order=Fraction(6))
    report = check_series_identity(SeriesIdentity("tampered", e, tampered))
    assert not report.passed
    qe, xe, lc, rc = report.first_mismatch
    assert (qe, xe) == (Fraction(3), 0)
    assert rc - lc == I
    assert "FAIL" in str(report)


def test_phi_pair_alternates_in_half_steps():
    p1 = expand_builtin("phi1", Fraction(10))
    p2 = expand_builtin("phi2", Fraction(10))
    assert alternation_report("phi_pair", p1, p2).passed


def test_theta4_pair_alternates_in_half_steps():
    t1 = expand_builtin("theta_level", Fraction(10), kappa=4, n=1, at_lambda_zero=True)
    t3 = expand_builtin("theta_level", Fraction(10), kappa=4, n=3, at_lambda_zero=True)
    assert alternation_report("theta4_pair", t1 - t3, t1 + t3).passed


def test_alternation_detects_failure():
    p1 = expand_builtin("phi1", Fraction(6))
    assert not alternation_report("same_series", p1, p1).passed
    with pytest.raises(ValueError):
        alternation_report("not_x_free", expand_builtin("theta1", 4), p1)


def test_series_rows_are_sorted_strings():
    s = BivariateSeries({(Fraction(1, 2), -1): I, (Fraction(0), 2): ONE},
                        order=Fraction(3))
    rows = series_rows(s)
    assert rows == [("0", 2, "1", "0"), ("1/2", -1, "0", "1")]
