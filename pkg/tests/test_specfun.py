"""Special-function engine checks against independent oracles and exact laws.

Oracles: mpmath's jtheta (arbitrary precision, independent implementation) for
theta1 and its tau-derivative, plus internal consistency laws (heat equations,
quasi-periodicity, modular behaviour) that the implementation does not use
directly.
"""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elliptic_selberg import specfun
from elliptic_selberg.errors import (
    BranchAmbiguity,
    NonConvergence,
    PoleProximity,
)
from elliptic_selberg.specfun import (
    EllipticArgument,
    ModularPoint,
    SeriesTruncation,
    branched_pow,
    continue_log,
    dedekind_eta,
    dedekind_eta_logderiv,
    lattice_distance,
    phi,
    phi_logderiv,
    sigma_and_E,
    theta1,
    theta_level,
)

mpmath = pytest.importorskip("mpmath")

TAUS = [0.9j, 0.6j, 0.3 + 1.0j]
LAMS = [0.13, 0.41, 0.83, 0.27 + 0.15j, -0.55 + 0.4j]


def mp_theta1(lam, tau, dps=30):
    with mpmath.workdps(dps):
        val = mpmath.jtheta(1, mpmath.pi * mpmath.mpmathify(lam),
                            mpmath.exp(1j * mpmath.pi * mpmath.mpmathify(tau)))
        return complex(val)


# ---------------------------------------------------------------------------
# theta1
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("tau", TAUS)
@pytest.mark.parametrize("lam", LAMS)
def test_theta1_against_mpmath(tau, lam):
    pt = ModularPoint(tau)
    ours = theta1(lam, pt)
    ref = mp_theta1(lam, tau)
    assert abs(ours - ref) <= 1e-13 * max(1.0, abs(ref))


@pytest.mark.parametrize("tau", TAUS)
def test_theta1_lambda_derivative_vs_mpmath_difference(tau):
    # central difference of the oracle at high precision
    pt = ModularPoint(tau)
    lam, h = 0.37, 1e-5
    fd = (mp_theta1(lam + h, tau, dps=40) - mp_theta1(lam - h, tau, dps=40)) / (2 * h)
    assert abs(theta1(lam, pt, d_lambda=1) - fd) <= 1e-8


@pytest.mark.parametrize("tau", TAUS)
def test_theta1_tau_derivative_vs_mpmath_difference(tau):
    pt = ModularPoint(tau)
    lam, h = 0.37, 1e-6
    fd = (mp_theta1(lam, tau + h, dps=40) - mp_theta1(lam, tau - h, dps=40)) / (2 * h)
    assert abs(theta1(lam, pt, d_tau=1) - fd) <= 1e-6


@pytest.mark.parametrize("tau", TAUS)
def test_theta1_heat_equation(tau):
    # 4*pi*i * d_tau theta1 = d_lambda^2 theta1, termwise exact
    pt = ModularPoint(tau)
    for lam in (0.13, 0.69, 0.27 + 0.15j):
        lhs = 4j * math.pi * theta1(lam, pt, d_tau=1)
        rhs = theta1(lam, pt, d_lambda=2)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


@pytest.mark.parametrize("tau", TAUS)
def test_theta1_derivative_at_zero_is_eta_cubed(tau):
    pt = ModularPoint(tau)
    lhs = theta1(0.0, pt, d_lambda=1)
    rhs = 2 * math.pi * dedekind_eta(pt) ** 3
    assert abs(lhs - rhs) <= 1e-13 * abs(rhs)


def test_theta1_oddness_and_periodicity():
    pt = ModularPoint(0.9j)
    for lam in (0.21, 0.47 + 0.2j):
        assert abs(theta1(-lam, pt) + theta1(lam, pt)) < 1e-14
        assert abs(theta1(lam + 1, pt) + theta1(lam, pt)) < 1e-13
        # quasi-periodicity in tau direction
        shift = -cmath.exp(-1j * cmath.pi * (2 * lam + pt.tau)) * theta1(lam, pt)
        assert abs(theta1(lam + pt.tau, pt) - shift) < 1e-12 * max(1, abs(shift))


def test_theta1_derivative_order_guard():
    pt = ModularPoint(0.9j)
    with pytest.raises(ValueError):
        theta1(0.3, pt, d_lambda=2, d_tau=1)
    with pytest.raises(ValueError):
        theta1(0.3, pt, d_lambda=-1)


def test_nonconvergence_when_budget_too_small():
    trunc = SeriesTruncation(tail_tolerance=1e-15, max_terms=8)
    with pytest.raises(NonConvergence):
        theta1(0.3, ModularPoint(0.005j), trunc=trunc)


# ---------------------------------------------------------------------------
# level-kappa theta family
# ---------------------------------------------------------------------------

LEVEL_CASES = [(2, 1), (4, 0), (4, 3), (5, 2), (6, 1), (6, 5)]


@pytest.mark.parametrize("kappa,n", LEVEL_CASES)
@pytest.mark.parametrize("tau", [0.9j, 0.3 + 1.0j])
def test_theta_level_translations(kappa, n, tau):
    pt = ModularPoint(tau)
    lam = 0.29
    base = theta_level(kappa, n, lam, pt)
    assert abs(theta_level(kappa, n, lam + 1, pt) - (-1) ** n * base) < 1e-12 * abs(base)
    lhs = theta_level(kappa, n, lam + tau, pt)
    rhs = cmath.exp(-1j * cmath.pi * kappa * (lam + tau / 2)) * theta_level(
        kappa, n + kappa, lam, pt)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


@pytest.mark.parametrize("kappa,n", LEVEL_CASES)
def test_theta_level_index_reflection_and_period(kappa, n):
    pt = ModularPoint(0.8j)
    lam = 0.33
    assert abs(theta_level(kappa, n, -lam, pt)
               - theta_level(kappa, -n, lam, pt)) < 1e-14
    assert abs(theta_level(kappa, n + 2 * kappa, lam, pt)
               - theta_level(kappa, n, lam, pt)) == 0.0


@pytest.mark.parametrize("kappa,n", LEVEL_CASES)
def test_theta_level_heat_equation(kappa, n):
    # 2*pi*i*kappa * d_tau theta = d_lambda^2 theta
    pt = ModularPoint(0.7j)
    lam = 0.41
    lhs = 2j * math.pi * kappa * theta_level(kappa, n, lam, pt, d_tau=1)
    rhs = theta_level(kappa, n, lam, pt, d_lambda=2)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


@pytest.mark.parametrize("kappa,n", [(2, 1), (4, 0), (4, 3), (5, 2), (6, 1)])
@pytest.mark.parametrize("tau", [1j, 0.8j])
def test_theta_level_modular_inversion(kappa, n, tau):
    # theta_{k,n}(lam/tau, -1/tau) expands over the dual family at (lam, tau)
    pt = ModularPoint(tau)
    lam = 0.31
    lhs = theta_level(kappa, n, lam / tau, ModularPoint(-1 / tau))
    pref = cmath.sqrt(-1j * tau / (2 * kappa)) * cmath.exp(
        1j * cmath.pi * kappa * lam ** 2 / (2 * tau))
    rhs = pref * sum(
        cmath.exp(-1j * cmath.pi * m * n / kappa) * theta_level(kappa, m, lam, pt)
        for m in range(2 * kappa))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_theta_level_symmetrized_and_derivative_sign():
    pt = ModularPoint(0.9j)
    kappa, n, lam = 4, 1, 0.37
    sym = theta_level(kappa, n, lam, pt, symmetrized=True)
    expected = theta_level(kappa, n, lam, pt) + theta_level(kappa, n, -lam, pt)
    assert abs(sym - expected) < 1e-14
    dsym = theta_level(kappa, n, lam, pt, d_lambda=1, symmetrized=True)
    expected = (theta_level(kappa, n, lam, pt, d_lambda=1)
                - theta_level(kappa, n, -lam, pt, d_lambda=1))
    assert abs(dsym - expected) < 1e-14


def test_theta_level_tau_derivative_vs_finite_difference():
    kappa, n, lam, tau, h = 5, 2, 0.23, 0.85j, 1e-6
    d = theta_level(kappa, n, lam, ModularPoint(tau), d_tau=1)
    fd = (theta_level(kappa, n, lam, ModularPoint(tau + h))
          - theta_level(kappa, n, lam, ModularPoint(tau - h))) / (2 * h)
    assert abs(d - fd) <= 1e-7


# ---------------------------------------------------------------------------
# eta and the phi triple
# ---------------------------------------------------------------------------


def test_eta_against_mpmath():
    for tau in TAUS:
        with mpmath.workdps(30):
            ref = complex(mpmath.qp(mpmath.exp(2j * mpmath.pi * tau))
                          * mpmath.exp(2j * mpmath.pi * tau / 24))
        ours = dedekind_eta(ModularPoint(tau))
        assert abs(ours - ref) <= 1e-13 * abs(ref)


def test_eta_logderiv_vs_finite_difference():
    tau, h = 0.75j, 1e-6
    d = dedekind_eta_logderiv(ModularPoint(tau))
    fd = (cmath.log(dedekind_eta(ModularPoint(tau + h)))
          - cmath.log(dedekind_eta(ModularPoint(tau - h)))) / (2 * h)
    assert abs(d - fd) <= 1e-7


def test_phi_product_is_sqrt2():
    for tau in (1j, 0.9j, 0.3 + 1.0j):
        pt = ModularPoint(tau)
        prod = phi(1, pt) * phi(2, pt) * phi(3, pt)
        assert abs(prod - math.sqrt(2)) <= 1e-13


@pytest.mark.parametrize("tau", [1j, 0.8j])
def test_phi_modular_inversion_rules(tau):
    inv = ModularPoint(-1 / tau)
    pt = ModularPoint(tau)
    assert abs(phi(1, inv) - phi(1, pt)) < 1e-13
    assert abs(phi(2, inv) - phi(3, pt)) < 1e-13
    assert abs(phi(3, inv) - phi(2, pt)) < 1e-13


@pytest.mark.parametrize("tau", [0.9j, 0.6j])
def test_phi_translation_rules(tau):
    pt = ModularPoint(tau)
    sh = ModularPoint(tau + 1)
    w = cmath.exp(-1j * cmath.pi / 24)
    assert abs(phi(1, sh) - w * phi(2, pt)) < 1e-13
    assert abs(phi(2, sh) - w * phi(1, pt)) < 1e-13
    assert abs(phi(3, sh) - cmath.exp(1j * cmath.pi / 12) * phi(3, pt)) < 1e-13


@pytest.mark.parametrize("kind", [1, 2, 3])
def test_phi_logderiv_vs_finite_difference(kind):
    tau, h = 0.85j, 1e-6
    d = phi_logderiv(kind, ModularPoint(tau))
    fd = (cmath.log(phi(kind, ModularPoint(tau + h)))
          - cmath.log(phi(kind, ModularPoint(tau - h)))) / (2 * h)
    assert abs(d - fd) <= 1e-7


def test_phi_kind_guard():
    with pytest.raises(ValueError):
        phi(4, ModularPoint(1j))


# ---------------------------------------------------------------------------
# sigma / E kernel
# ---------------------------------------------------------------------------


def test_sigma_small_t_limit():
    # t*sigma_lam(t) -> 1 and E(t)/t -> 1 as t -> 0
    pt = ModularPoint(0.9j)
    lam = 0.31
    for t in (1e-4, 1e-5):
        se = sigma_and_E(lam, t, pt)
        assert abs(t * se.sigma - 1) < 5e-4
        assert abs(se.E / t - 1) < 5e-4


def test_sigma_shift_symmetries():
    pt = ModularPoint(0.9j)
    lam, t = 0.31, 0.27
    a = sigma_and_E(lam, t, pt)
    b = sigma_and_E(lam, t + 1, pt)
    assert abs(a.sigma - b.sigma) < 1e-12 * abs(a.sigma)
    # E(1-t) = E(t) and sigma_lam(1-s) = sigma_lam(-s)
    c = sigma_and_E(lam, 1 - t, pt)
    d = sigma_and_E(lam, -t, pt)
    assert abs(c.E - a.E) < 1e-13
    assert abs(c.sigma - d.sigma) < 1e-12 * abs(c.sigma)


def test_E_is_positive_on_unit_interval_for_imaginary_tau():
    pt = ModularPoint(0.7j)
    for t in np.linspace(0.05, 0.95, 19):
        se = sigma_and_E(0.4, float(t), pt)
        assert abs(se.E.imag) < 1e-14
        assert se.E.real > 0


def test_rho_is_logarithmic_derivative():
    pt = ModularPoint(0.8j)
    lam, h = 0.37, 1e-6
    se = sigma_and_E(lam, 0.2, pt)
    fd = (cmath.log(theta1(lam + h, pt)) - cmath.log(theta1(lam - h, pt))) / (2 * h)
    assert abs(se.rho - fd) < 1e-7
    fd2 = (theta1(lam + h, pt, d_lambda=1) / theta1(lam + h, pt)
           - theta1(lam - h, pt, d_lambda=1) / theta1(lam - h, pt)) / (2 * h)
    assert abs(se.rho_prime - fd2) < 1e-6


def test_sigma_pole_proximity_guard():
    pt = ModularPoint(0.9j)
    with pytest.raises(PoleProximity):
        sigma_and_E(0.5, 1e-9, pt)
    with pytest.raises(PoleProximity):
        sigma_and_E(1e-9, 0.2, pt)


# ---------------------------------------------------------------------------
# lattice distance, arguments, branch tracking
# ---------------------------------------------------------------------------


def test_lattice_distance_examples():
    tau = 0.9j
    assert lattice_distance(0.0, tau) == 0.0
    assert abs(lattice_distance(0.5, tau) - 0.5) < 1e-15
    assert abs(lattice_distance(1.0 + 0.9j, tau)) < 1e-12
    assert abs(lattice_distance(0.3, tau) - 0.3) < 1e-15


@given(a=st.integers(-3, 3), b=st.integers(-3, 3),
       eps=st.floats(-0.04, 0.04), tau_im=st.floats(0.5, 1.5))
@settings(max_examples=60, deadline=None)
def test_lattice_distance_translation_invariance(a, b, eps, tau_im):
    tau = 1j * tau_im
    lam = 0.23 + eps
    d0 = lattice_distance(lam, tau)
    d1 = lattice_distance(lam + a + b * tau, tau)
    assert abs(d0 - d1) < 1e-9


def test_elliptic_argument_guard():
    pt = ModularPoint(0.9j)
    arg = EllipticArgument.from_lambda(1.0 + 1e-9, pt)
    with pytest.raises(PoleProximity):
        arg.require_off_lattice(1e-6, "test point")
    ok = EllipticArgument.from_lambda(0.3, pt)
    ok.require_off_lattice(1e-6, "test point")


def test_continue_log_tracks_winding():
    # one full counterclockwise loop of the unit circle: log gains 2*pi*i
    th = np.linspace(0.0, 2 * np.pi, 200)
    vals = np.exp(1j * th)
    logs = continue_log(vals)
    assert abs(logs[0]) < 1e-12
    assert abs(logs[-1] - 2j * np.pi) < 1e-10


def test_continue_log_rejects_jumps_and_zero():
    with pytest.raises(BranchAmbiguity):
        continue_log(np.array([1.0 + 0j, -1.0 + 0j]))
    with pytest.raises(BranchAmbiguity):
        continue_log(np.array([1.0 + 0j, 0.0 + 0j]))


def test_branched_pow_continuity_and_monodromy():
    th = np.linspace(0.0, 2 * np.pi, 400)
    vals = np.exp(1j * th)
    bp = branched_pow(vals, -0.5)
    # continuous branch: end value is e^{-pi i}, not the principal 1
    assert abs(bp.values[-1] - cmath.exp(-1j * cmath.pi)) < 1e-9
    steps = np.abs(np.diff(bp.values))
    assert steps.max() < 0.1


@given(st.floats(-1.5, 1.5))
@settings(max_examples=40, deadline=None)
def test_branched_pow_matches_principal_on_positive_reals(expo):
    vals = np.linspace(0.5, 2.0, 7).astype(complex)
    bp = branched_pow(vals, expo)
    assert np.allclose(bp.values, vals.real ** expo, rtol=1e-12)


def test_modular_point_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        ModularPoint(-0.5j)
    with pytest.raises(ValueError):
        ModularPoint(0.7)
