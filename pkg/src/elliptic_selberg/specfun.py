"""Theta-type special functions on the upper half plane.

Conventions used throughout the package:

    q = exp(2*pi*i*tau),  Im tau > 0,

and every fractional power of q is taken as q**c = exp(2*pi*i*tau*c), which
is single valued in tau.  The odd Jacobi theta function is evaluated from its
sine series

    theta1(lam, tau) = 2 * sum_{j>=0} (-1)**j q**((j+1/2)**2/2)
                                       * sin((2j+1)*pi*lam),

with lambda- and tau-derivatives applied term by term.  Level-kappa theta
functions are lattice sums

    theta_level(kappa, n; lam, tau)
        = sum_{j in Z} exp(2*pi*i*kappa*(j+n/(2*kappa))**2 * tau)
                     * exp(2*pi*i*kappa*(j+n/(2*kappa)) * lam).

All series stop once the current term falls below tail_tolerance times the
largest term seen so far; they raise NonConvergence at max_terms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BranchAmbiguity, NonConvergence, PoleProximity

__all__ = [
    "SeriesTruncation",
    "ModularPoint",
    "EllipticArgument",
    "BranchedPower",
    "SigmaE",
    "theta1",
    "dedekind_eta",
    "dedekind_eta_logderiv",
    "phi",
    "phi_logderiv",
    "theta_level",
    "sigma_and_E",
    "branched_pow",
    "continue_log",
    "lattice_distance",
    "DEFAULT_TRUNC",
    "DEFAULT_LATTICE_FLOOR",
]

DEFAULT_LATTICE_FLOOR = 1e-6


@dataclass(frozen=True)
class SeriesTruncation:
    """Stopping rule for theta series and eta-type products."""

    tail_tolerance: float = 1e-14
    max_terms: int = 600

    def __post_init__(self):
        if not (0 < self.tail_tolerance < 1):
            raise ValueError("tail_tolerance must lie in (0, 1)")
        if self.max_terms < 8:
            raise ValueError("max_terms must be at least 8")


DEFAULT_TRUNC = SeriesTruncation()


@dataclass(frozen=True)
class ModularPoint:
    """A point tau in the open upper half plane."""

    tau: complex

    def __post_init__(self):
        if not (self.tau.imag > 0):
            raise ValueError(f"Im tau must be positive, got tau={self.tau}")

    @property
    def q(self) -> complex:
        return cmath.exp(2j * cmath.pi * self.tau)

    def q_pow(self, c: float) -> complex:
        """q**c as exp(2*pi*i*tau*c); the only branch used for fractional powers."""
        return cmath.exp(2j * cmath.pi * self.tau * c)


def lattice_distance(lam: complex, tau: complex) -> float:
    """Distance from lam to the lattice Z + tau*Z.

    The minimum is exact: lam is written as a + b*tau with real a, b and the
    four nearest lattice points (floor/ceil of a and b) are compared.
    """
    lam = complex(lam)
    tau = complex(tau)
    b = lam.imag / tau.imag
    a = lam.real - b * tau.real
    best = math.inf
    for m in (math.floor(a), math.floor(a) + 1):
        for n in (math.floor(b), math.floor(b) + 1):
            best = min(best, abs(lam - (m + n * tau)))
    return best


@dataclass(frozen=True)
class EllipticArgument:
    """A lattice-aware elliptic argument: lam together with its distance to Z + tau*Z."""

    lam: complex
    lattice_dist: float

    @classmethod
    def from_lambda(cls, lam: complex, pt: ModularPoint) -> "EllipticArgument":
        return cls(complex(lam), lattice_distance(lam, pt.tau))

    def require_off_lattice(self, floor: float = DEFAULT_LATTICE_FLOOR, what: str = "argument"):
        if self.lattice_dist < floor:
            raise PoleProximity(
                f"{what} {self.lam} is within {self.lattice_dist:.3e} of the lattice "
                f"(floor {floor:.1e})"
            )


# ---------------------------------------------------------------------------
# theta1 and friends
# ---------------------------------------------------------------------------


def _theta1_array(lam, tau: complex, d_lambda: int = 0, d_tau: int = 0,
                  trunc: SeriesTruncation = DEFAULT_TRUNC) -> np.ndarray:
    """Vectorised sine-series evaluation of theta1 derivatives.

    lam may be any complex ndarray; returns an array of the same shape.
    """
    lam = np.asarray(lam, dtype=complex)
    out = np.zeros_like(lam)
    runmax = 0.0
    small_streak = 0
    phase_shift = d_lambda * cmath.pi / 2
    for j in range(trunc.max_terms):
        half = j + 0.5
        coef = 2.0 * (-1) ** j * cmath.exp(1j * cmath.pi * tau * half * half)
        coef *= ((2 * j + 1) * math.pi) ** d_lambda
        if d_tau:
            coef *= (1j * cmath.pi * half * half) ** d_tau
        term = coef * np.sin((2 * j + 1) * math.pi * lam + phase_shift)
        out += term
        tmax = float(np.max(np.abs(term)))
        runmax = max(runmax, tmax)
        if j >= 2 and tmax <= trunc.tail_tolerance * max(runmax, 1e-300):
            small_streak += 1
            if small_streak >= 2:
                return out
        else:
            small_streak = 0
    raise NonConvergence(
        f"theta1 series did not settle after {trunc.max_terms} terms (tau={tau})"
    )


def theta1(lam: complex, pt: ModularPoint, d_lambda: int = 0, d_tau: int = 0,
           trunc: SeriesTruncation = DEFAULT_TRUNC) -> complex:
    """The odd Jacobi theta function theta1(lam, tau) or one of its derivatives.

    Parameters
    ----------
    lam : complex
        Elliptic argument.
    pt : ModularPoint
        Modular parameter tau (Im tau > 0).
    d_lambda, d_tau : int
        Derivative orders.  Supported range: d_lambda + 2*d_tau <= 3 with
        d_lambda, d_tau >= 0 (term-wise differentiation of the sine series).

    Notes
    -----
    theta1'(0, tau) = 2*pi*eta(tau)**3, and theta1 is odd, 1-antiperiodic and
    tau-quasi-periodic; those identities are exercised by the test suite at
    multiple points of the fundamental domain.
    """
    if d_lambda < 0 or d_tau < 0 or d_lambda + 2 * d_tau > 3:
        raise ValueError("need d_lambda, d_tau >= 0 with d_lambda + 2*d_tau <= 3")
    return complex(_theta1_array(np.array(complex(lam)), pt.tau, d_lambda, d_tau, trunc))


def dedekind_eta(pt: ModularPoint, trunc: SeriesTruncation = DEFAULT_TRUNC) -> complex:
    """Dedekind eta(tau) = q**(1/24) * prod_{j>=1} (1 - q**j)."""
    q = pt.q
    aq = abs(q)
    acc = pt.q_pow(1.0 / 24.0)
    for j in range(1, trunc.max_terms):
        acc *= 1.0 - q ** j
        if aq ** j < trunc.tail_tolerance and j >= 2:
            return acc
    raise NonConvergence(f"eta product did not settle after {trunc.max_terms} factors")


def dedekind_eta_logderiv(pt: ModularPoint, trunc: SeriesTruncation = DEFAULT_TRUNC) -> complex:
    """d/dtau log eta(tau), term-wise from the product form."""
    q = pt.q
    aq = abs(q)
    acc = 1j * cmath.pi / 12.0
    for j in range(1, trunc.max_terms):
        qj = q ** j
        acc += -2j * cmath.pi * j * qj / (1.0 - qj)
        if j * aq ** j < trunc.tail_tolerance and j >= 2:
            return acc
    raise NonConvergence("eta log-derivative series did not settle")


_PHI_KINDS = (1, 2, 3)


def phi(kind: int, pt: ModularPoint, trunc: SeriesTruncation = DEFAULT_TRUNC) -> complex:
    """Weber-type eta quotients phi_1, phi_2, phi_3.

        phi_1 = q**(-1/48) prod (1 + q**(j-1/2))
        phi_2 = q**(-1/48) prod (1 - q**(j-1/2))
        phi_3 = sqrt(2) q**(1/24) prod (1 + q**j)

    They satisfy phi_1(-1/tau) = phi_1(tau), phi_2(-1/tau) = phi_3(tau),
    phi_3(-1/tau) = phi_2(tau) and pick up 48th roots of unity under
    tau -> tau + 1.
    """
    if kind not in _PHI_KINDS:
        raise ValueError(f"phi kind must be one of {_PHI_KINDS}, got {kind}")
    q = pt.q
    aq = abs(q)
    if kind == 3:
        acc = math.sqrt(2.0) * pt.q_pow(1.0 / 24.0)
        for j in range(1, trunc.max_terms):
            acc *= 1.0 + q ** j
            if aq ** j < trunc.tail_tolerance and j >= 2:
                return acc
    else:
        sign = 1.0 if kind == 1 else -1.0
        acc = pt.q_pow(-1.0 / 48.0)
        for j in range(1, trunc.max_terms):
            acc *= 1.0 + sign * pt.q_pow(j - 0.5)
            if aq ** (j - 0.5) < trunc.tail_tolerance and j >= 2:
                return acc
    raise NonConvergence(f"phi_{kind} product did not settle")


def phi_logderiv(kind: int, pt: ModularPoint, trunc: SeriesTruncation = DEFAULT_TRUNC) -> complex:
    """d/dtau log phi_kind(tau), term-wise from the product form."""
    if kind not in _PHI_KINDS:
        raise ValueError(f"phi kind must be one of {_PHI_KINDS}, got {kind}")
    q = pt.q
    aq = abs(q)
    if kind == 3:
        acc = 1j * cmath.pi / 12.0
        for j in range(1, trunc.max_terms):
            qj = q ** j
            acc += 2j * cmath.pi * j * qj / (1.0 + qj)
            if j * aq ** j < trunc.tail_tolerance and j >= 2:
                return acc
    else:
        sign = 1.0 if kind == 1 else -1.0
        acc = -1j * cmath.pi / 24.0
        for j in range(1, trunc.max_terms):
            h = j - 0.5
            qh = pt.q_pow(h)
            acc += sign * 2j * cmath.pi * h * qh / (1.0 + sign * qh)
            if j * aq ** h < trunc.tail_tolerance and j >= 2:
                return acc
    raise NonConvergence(f"phi_{kind} log-derivative series did not settle")


# ---------------------------------------------------------------------------
# level-kappa theta functions
# ---------------------------------------------------------------------------


def _theta_level_array(kappa: int, n: int, lam, tau: complex, d_lambda: int = 0,
                       d_tau: int = 0,
                       trunc: SeriesTruncation = DEFAULT_TRUNC) -> np.ndarray:
    """Vectorised lattice sum for theta_level; lam may be a complex ndarray."""
    lam = np.asarray(lam, dtype=complex)
    c = (n % (2 * kappa)) / (2.0 * kappa)
    out = np.zeros_like(lam)
    runmax = 0.0
    small_streak = 0
    for j in range(trunc.max_terms):
        tmax = 0.0
        for m in ({c} if j == 0 else {j + c, -j + c}):
            w = 2j * cmath.pi * kappa * m
            coef = cmath.exp(2j * cmath.pi * kappa * m * m * tau)
            if d_lambda:
                coef *= w ** d_lambda
            if d_tau:
                coef *= (2j * cmath.pi * kappa * m * m) ** d_tau
            term = coef * np.exp(w * lam)
            out += term
            tmax = max(tmax, float(np.max(np.abs(term))))
        runmax = max(runmax, tmax)
        if j >= 2 and tmax <= trunc.tail_tolerance * max(runmax, 1e-300):
            small_streak += 1
            if small_streak >= 2:
                return out
        else:
            small_streak = 0
    raise NonConvergence(
        f"theta_level({kappa},{n}) sum did not settle after {trunc.max_terms} shells"
    )


def theta_level(kappa: int, n: int, lam: complex, pt: ModularPoint,
                d_lambda: int = 0, d_tau: int = 0, symmetrized: bool = False,
                trunc: SeriesTruncation = DEFAULT_TRUNC) -> complex:
    """Level-kappa theta function theta_{kappa,n}(lam, tau) or a derivative.

    The index n only matters modulo 2*kappa and is reduced before summing.
    With symmetrized=True the combination theta_{kappa,n}(lam) +
    theta_{kappa,n}(-lam) is returned (derivatives of the second term carry
    the usual (-1)**d_lambda).

    Supported derivative orders: d_lambda <= 2, d_tau <= 1.
    """
    if kappa < 1:
        raise ValueError("kappa must be a positive integer")
    if not (0 <= d_lambda <= 2 and 0 <= d_tau <= 1):
        raise ValueError("need 0 <= d_lambda <= 2 and 0 <= d_tau <= 1")
    lam = complex(lam)
    val = complex(_theta_level_array(kappa, n, np.array(lam), pt.tau, d_lambda, d_tau, trunc))
    if symmetrized:
        other = complex(
            _theta_level_array(kappa, n, np.array(-lam), pt.tau, d_lambda, d_tau, trunc)
        )
        val += (-1) ** d_lambda * other
    return val


# ---------------------------------------------------------------------------
# sigma, E, rho
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SigmaE:
    """Values of the sigma kernel and its companions at (lam, t, tau)."""

    sigma: complex
    E: complex
    rho: complex
    rho_prime: complex


def sigma_and_E(lam: complex, t: complex, pt: ModularPoint,
                trunc: SeriesTruncation = DEFAULT_TRUNC,
                lattice_floor: float = DEFAULT_LATTICE_FLOOR) -> SigmaE:
    """The kernel sigma_lam(t) = theta1(lam-t) theta1'(0) / (theta1(lam) theta1(t)),
    the prime form E(t) = theta1(t)/theta1'(0), and rho = theta1'/theta1 with its
    derivative rho' = theta1''/theta1 - rho**2, all at the same tau.

    Raises PoleProximity when lam or t is within lattice_floor of Z + tau*Z
    (sigma and rho have poles there).
    """
    EllipticArgument.from_lambda(lam, pt).require_off_lattice(lattice_floor, "lam")
    EllipticArgument.from_lambda(t, pt).require_off_lattice(lattice_floor, "t")
    th_d0 = theta1(0.0, pt, d_lambda=1, trunc=trunc)
    th_lam = theta1(lam, pt, trunc=trunc)
    th_t = theta1(t, pt, trunc=trunc)
    th_lt = theta1(lam - t, pt, trunc=trunc)
    th_dlam = theta1(lam, pt, d_lambda=1, trunc=trunc)
    th_ddlam = theta1(lam, pt, d_lambda=2, trunc=trunc)
    rho = th_dlam / th_lam
    return SigmaE(
        sigma=th_lt * th_d0 / (th_lam * th_t),
        E=th_t / th_d0,
        rho=rho,
        rho_prime=th_ddlam / th_lam - rho * rho,
    )


# ---------------------------------------------------------------------------
# branch-tracked powers
# ---------------------------------------------------------------------------


def continue_log(values: Sequence[complex]) -> np.ndarray:
    """Continuous logarithm along a path of nonzero values.

    The branch at the path head is the principal one; every later point picks
    the log continuously.  Raises BranchAmbiguity when a step turns by pi or
    more (the caller must then refine the path).
    """
    vals = np.asarray(values, dtype=complex)
    if vals.ndim != 1 or len(vals) == 0:
        raise ValueError("need a non-empty 1-d path of values")
    if np.any(vals == 0):
        raise BranchAmbiguity("branch tracking hit an exact zero")
    logs = np.empty(len(vals), dtype=complex)
    logs[0] = cmath.log(vals[0])
    for k in range(1, len(vals)):
        step = cmath.phase(complex(vals[k] / vals[k - 1]))
        if abs(step) >= math.pi * (1.0 - 1e-12):
            raise BranchAmbiguity(
                f"consecutive path values subtend {abs(step):.6f} rad at index {k}; "
                "refine the path"
            )
        logs[k] = logs[k - 1] + math.log(abs(vals[k] / vals[k - 1])) + 1j * step
    return logs


@dataclass(frozen=True)
class BranchedPower:
    """A power of values along a path with a continuously tracked branch."""

    base_path: tuple
    exponent: complex
    log_branch: tuple
    values: tuple

    def __post_init__(self):
        diffs = np.diff(np.asarray(self.log_branch, dtype=complex).imag)
        if len(diffs) and np.max(np.abs(diffs)) >= math.pi:
            raise BranchAmbiguity("log branch jumps by >= pi between path points")


def branched_pow(values: Sequence[complex], exponent: complex) -> BranchedPower:
    """values**exponent along a path, with the branch continued from the head.

    At the head the principal log is used, which realises the convention
    arg -> 0 for paths that start next to the positive real axis.
    """
    logs = continue_log(values)
    powered = np.exp(complex(exponent) * logs)
    return BranchedPower(
        base_path=tuple(complex(v) for v in values),
        exponent=complex(exponent),
        log_branch=tuple(complex(v) for v in logs),
        values=tuple(complex(v) for v in powered),
    )
