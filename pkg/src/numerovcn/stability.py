"""Scalar stability calculus for the time-stepped eigenmodes.

Each pencil eigenvalue evolves per step by the Cayley-type amplification
factor ``q = (1 - i a lam tau / 2) / (1 + i a lam tau / 2)``; the factor is
unimodular exactly for real eigenvalues, grows for ``lam_I > 0`` and decays
for ``lam_I < 0``.  Mode stability with growth allowance kappa is
``|q| <= 1 + kappa tau``; for ``lam_I > 0`` the same inequality has an
algebraic rewriting used to derive necessary conditions relating the time
step to the mean space step ("converse" conditions: the space step must not
be too small relative to tau).
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PhysicalParams",
    "StabilityParams",
    "NecessaryConstants",
    "PoleError",
    "amplification_factor",
    "growth_factor_sq",
    "spectral_condition",
    "rewritten_condition",
    "min_kappa",
    "necessary_condition",
    "step_bound_holds",
    "converse_threshold_tau",
]

#: denominators smaller than this are treated as the pole of the Cayley map
POLE_TOL = 1e-300


class PoleError(ValueError):
    """The input hits the pole ``lam = 2i/(a tau)`` of the amplification map."""


@dataclass(frozen=True)
class PhysicalParams:
    """Physical constants; defaults give the unit-scaled regime a = 1."""

    hbar: float = 1.0
    m0: float = 0.5

    def __post_init__(self):
        if self.hbar <= 0 or self.m0 <= 0:
            raise ValueError("hbar and m0 must be positive")

    @property
    def c_hbar(self):
        return self.hbar ** 2 / (2.0 * self.m0)

    @property
    def a(self):
        return self.c_hbar / self.hbar


@dataclass(frozen=True)
class StabilityParams:
    """Growth allowance kappa, maximal step tau0 and the reporting constant C."""

    kappa: float
    tau0: float
    C: float = 1.0

    def __post_init__(self):
        if self.kappa <= 0 or self.tau0 <= 0 or self.C < 1.0:
            raise ValueError("need kappa > 0, tau0 > 0 and C >= 1")


def _check_tau(tau):
    if not (np.isfinite(tau) and tau > 0.0):
        raise ValueError(f"tau must be finite and > 0, got {tau!r}")


def amplification_factor(lam, tau, a=1.0):
    """One-step multiplier ``(1 - i a lam tau/2) / (1 + i a lam tau/2)``."""
    _check_tau(tau)
    lam = complex(lam)
    z = 0.5j * a * lam * tau
    den = 1.0 + z
    if abs(den) < POLE_TOL:
        raise PoleError(f"lam = {lam} is the pole 2i/(a tau) of the amplification map")
    return (1.0 - z) / den


def growth_factor_sq(lam, tau, a=1.0):
    """|q|^2 through the algebraic form ``1 + 4 lt_I tau / ((lt_R tau)^2 +
    (lt_I tau - 1)^2)`` with ``lt = a lam / 2``; cross-checks the Cayley form."""
    _check_tau(tau)
    lam = complex(lam)
    lt = 0.5 * a * lam
    den = (lt.real * tau) ** 2 + (lt.imag * tau - 1.0) ** 2
    if den < POLE_TOL:
        raise PoleError(f"lam = {lam} is the pole 2i/(a tau) of the amplification map")
    return 1.0 + 4.0 * lt.imag * tau / den


def spectral_condition(lam, tau, kappa, a=1.0):
    """Per-mode stability: ``|q_tau(lam)| <= 1 + kappa tau``."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return abs(amplification_factor(lam, tau, a)) <= 1.0 + kappa * tau


def rewritten_condition(lam, tau, kappa, a=1.0):
    """Algebraically equivalent form of the per-mode condition, defined for
    ``lam_I > 0`` only:

        ``4/(kappa (2 + kappa tau)) + 2 tau <= (|lt|^2 / lt_I) tau^2 + 1/lt_I``

    with ``lt = a lam / 2``.
    """
    _check_tau(tau)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    lam = complex(lam)
    if lam.imag <= 0:
        raise ValueError("the rewritten form requires lam_I > 0")
    lt = 0.5 * a * lam
    lhs = 4.0 / (kappa * (2.0 + kappa * tau)) + 2.0 * tau
    rhs = (abs(lt) ** 2 / lt.imag) * tau * tau + 1.0 / lt.imag
    return lhs <= rhs


def min_kappa(lam, tau, a=1.0):
    """Smallest growth allowance making the per-mode condition hold:
    ``max(0, (|q| - 1)/tau)``; zero for ``lam_I <= 0``."""
    lam = complex(lam)
    if lam.imag <= 0.0:
        _check_tau(tau)
        return 0.0
    q = abs(amplification_factor(lam, tau, a))
    return max(0.0, (q - 1.0) / tau)


@dataclass(frozen=True)
class NecessaryConstants:
    """Constants of the necessary step-coupling inequality and the asymptotic
    converse constant c0 (for ``h_omega <= c0 tau``)."""

    c1: float
    c2: float
    c0: float


def necessary_condition(lambda0, h_omega0, a, kappa, tau0):
    """Constants (c1, c2, c0) attached to a genuinely complex base eigenvalue.

    For the mesh family obtained by K-fold replication (mean step
    ``h_omega = h_omega0 / K``), validity of the per-mode condition for the
    replicated eigenvalue ``K^2 lambda0`` with ``tau <= tau0`` implies

        ``1 / sqrt(kappa (2 + kappa tau0)) <= c1 tau / h_omega + c2 h_omega``.

    A negative imaginary part is conjugated away; a real eigenvalue is
    rejected since the whole construction needs ``lam_I != 0``.
    """
    lam = complex(lambda0)
    if lam.imag == 0.0:
        raise ValueError("necessary-condition constants need a complex eigenvalue")
    if lam.imag < 0.0:
        lam = np.conj(lam)
    if h_omega0 <= 0 or a <= 0 or kappa <= 0 or tau0 <= 0:
        raise ValueError("h_omega0, a, kappa, tau0 must all be positive")
    mod = abs(lam)
    li = lam.imag
    c1 = 0.5 * mod * h_omega0 * np.sqrt(a / (2.0 * li))
    c2 = 1.0 / (h_omega0 * np.sqrt(2.0 * a * li))
    c0 = np.sqrt(a * kappa) * h_omega0 * mod / (2.0 * np.sqrt(li))
    return NecessaryConstants(float(c1), float(c2), float(c0))


def step_bound_holds(tau, h_omega, consts, kappa, tau0):
    """Evaluate the necessary inequality at a concrete (tau, h_omega)."""
    if tau <= 0 or h_omega <= 0:
        raise ValueError("tau and h_omega must be positive")
    lhs = 1.0 / np.sqrt(kappa * (2.0 + kappa * tau0))
    return lhs <= consts.c1 * tau / h_omega + consts.c2 * h_omega


def converse_threshold_tau(h_omega, consts):
    """The tau at which ``h_omega = c0 tau``: smaller tau violates the
    asymptotic converse condition."""
    if h_omega <= 0:
        raise ValueError("h_omega must be positive")
    return h_omega / consts.c0
